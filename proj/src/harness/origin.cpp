#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "wmcp/codec.hpp"
#include "wmcp/harness.hpp"
#include "wmcp/text.hpp"

namespace wmcp::harness {

namespace {

struct Route {
  std::string symbol;
  EndpointPolicy policy;
  std::optional<CsrfPolicy> csrf;
  graph::Params expected;
  std::unique_ptr<resolver::Throttle> throttle;
};

std::string bearer(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (auth.size() > kPrefix.size() && text::iequals(std::string_view(auth).substr(0, kPrefix.size()), kPrefix)) {
    return auth.substr(kPrefix.size());
  }
  return {};
}

std::string cookie(const httplib::Request& req, std::string_view name) {
  const auto header = req.get_header_value("Cookie");
  std::string_view rest = header;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    auto part = text::trim(rest.substr(0, semi));
    const auto eq = part.find('=');
    if (eq != std::string_view::npos && part.substr(0, eq) == name) return std::string(part.substr(eq + 1));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
  }
  return {};
}

// Form or JSON body fields.
std::multimap<std::string, std::string> body_fields(const httplib::Request& req) {
  std::multimap<std::string, std::string> out;
  if (req.get_header_value("Content-Type").starts_with("application/json")) {
    const auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_object()) {
      for (const auto& [k, v] : j.items()) out.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return out;
  }
  httplib::Params params;
  httplib::detail::parse_query_text(req.body, params);
  for (auto& [k, v] : params) out.emplace(k, v);
  return out;
}

const std::string* field(const std::multimap<std::string, std::string>& fields, std::string_view name) {
  const auto it = fields.find(std::string(name));
  return it == fields.end() ? nullptr : &it->second;
}

const std::string* field_ci(const std::multimap<std::string, std::string>& fields, std::string_view name) {
  for (const auto& [k, v] : fields) {
    if (text::iequals(k, name)) return &v;
  }
  return nullptr;
}

void reply(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  nlohmann::json j = {{"status", status}, {"message", message}};
  res.set_content(j.dump(), "application/json");
}

}  // namespace

struct Origin::Impl {
  std::vector<ScenarioFixture> fixtures;
  resolver::EndpointRegistry registry;
  Keys keys;
  OriginOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  std::mutex issued_mutex;
  std::set<std::string> issued;
  std::map<std::string, Route> routes;  // by URL

  std::string fresh_token() {
    std::array<std::uint8_t, 16> raw{};
    crypto::random_bytes(raw);
    auto token = codec::hex_encode(raw);
    std::lock_guard lock(issued_mutex);
    issued.insert(token);
    return token;
  }

  bool was_issued(const std::string& token) {
    std::lock_guard lock(issued_mutex);
    return issued.contains(token);
  }

  void build_routes() {
    for (const auto& s : fixtures) {
      for (const auto& page : s.pages) {
        for (const auto& e : page.doc.elements) {
          if (!e.action) continue;
          if (!e.action->is_symbolic()) continue;
          const auto* entry = registry.find(e.action->endpoint);
          if (!entry) throw Error(ErrorCode::FixtureInvalid, e.action->endpoint + " is not in the registry");
          auto& route = routes[entry->url];
          route.symbol = e.action->endpoint;
          route.policy = entry->policy;
          if (page.doc.security && page.doc.security->csrf) route.csrf = page.doc.security->csrf;
          if (page.submits()) route.expected = page.params;
          if (!route.throttle && entry->policy.rpm) {
            auto burst = options.burst_override ? options.burst_override : entry->policy.burst;
            route.throttle = std::make_unique<resolver::Throttle>(*entry->policy.rpm, burst, options.clock());
          }
        }
      }
    }
  }

  void serve_pages() {
    for (const auto& s : fixtures) {
      for (const auto& page : s.pages) {
        server.Get(page.path, [this, &page](const httplib::Request&, httplib::Response& res) {
          const auto token = fresh_token();
          res.set_header("Set-Cookie", std::string(kCsrfCookie) + "=" + token + "; Path=/; HttpOnly; SameSite=Strict");
          res.set_content(serve_html(page, token), "text/html; charset=utf-8");
        });
        const auto sig = sig::encode_signature(sig::sign_bundle(page.sidecar, keys.seed, keys.key_id));
        auto bytes = page.sidecar;
        if (options.tamper_sidecars) bytes.back() = bytes.back() == ' ' ? '\t' : ' ';
        server.Get(page.path + ".wmcp", [sig, bytes](const httplib::Request&, httplib::Response& res) {
          res.set_header(std::string(sig::kSignatureHeader), sig);
          res.set_content(bytes, std::string(kMediaType));
        });
      }
    }
  }

  void serve_wmcp() {
    server.Post("/wmcp/token", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto j = nlohmann::json::parse(req.body);
        const auto now = j.value("issued_at", options.unix_clock());
        const auto token =
            resolver::issue_agent_token(j.at("subject").get<std::string>(),
                                        j.at("scopes").get<std::vector<std::string>>(), j.value("ttl", 300), keys.seed, now);
        res.set_content(nlohmann::json({{"token", token.compact}, {"expires_at", token.claims.expires_at}}).dump(),
                        "application/json");
      } catch (const std::exception& e) {
        reply(res, 400, e.what());
      }
    });
    server.Get("/wmcp/resolve", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto& url = resolver::resolve_endpoint(req.get_param_value("symbol"), bearer(req), registry,
                                                     options.unix_clock());
        res.set_content(nlohmann::json({{"url", url}}).dump(), "application/json");
      } catch (const Error& e) {
        reply(res, resolver::http_status(e.code()), e.what());
      }
    });
    server.Get("/wmcp/keys", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        resolver::resolve_endpoint(resolver::kKeysSymbol, bearer(req), registry, options.unix_clock());
        res.set_content(nlohmann::json({{"kid", keys.key_id}, {"alg", "dir"}, {"enc", "A256GCM"},
                                        {"k", codec::base64url_encode(keys.jwe_key)}})
                            .dump(),
                        "application/json");
      } catch (const Error& e) {
        reply(res, resolver::http_status(e.code()), e.what());
      }
    });
  }

  // CSRF, then token scopes, then throttle, then the submitted fields.
  void handle_action(Route& route, const httplib::Request& req, httplib::Response& res) {
    const auto fields = body_fields(req);
    const auto token = bearer(req);
    const bool agent = !token.empty();

    if (route.csrf) {
      const auto* body_token = field(fields, route.csrf->token_field);
      if (!body_token || !was_issued(*body_token)) return reply(res, 403, "CSRF token missing or unknown");
      if (agent) {
        if (route.csrf->mode == CsrfMode::DoubleSubmit) {
          const auto header = req.get_header_value(route.csrf->header_name);
          if (header.empty()) return reply(res, 403, "CSRF header missing");
          if (header != *body_token) return reply(res, 403, "CSRF header and body disagree");
        }
      } else if (cookie(req, kCsrfCookie) != *body_token) {
        return reply(res, 403, "CSRF cookie and body disagree");
      }
    }

    // Browser form posts ride on the session cookie; agents must present a token.
    if (agent && route.policy.tokenised) {
      try {
        resolver::resolve_endpoint(route.symbol, token, registry, options.unix_clock());
      } catch (const Error& e) {
        return reply(res, resolver::http_status(e.code()), e.what());
      }
    }

    if (route.throttle) {
      const auto decision = route.throttle->acquire(options.clock());
      if (!decision.proceed) {
        const auto wait = decision.wait_until - options.clock();
        res.set_header("Retry-After", std::to_string((wait.count() + 999) / 1000));
        return reply(res, 429, "over the throttle budget");
      }
    }

    for (const auto& [name, value] : route.expected) {
      const auto* got = field_ci(fields, name);
      if (!got || *got != value) return reply(res, 422, "field " + name + " missing or wrong");
    }
    reply(res, 200, "ok");
  }

  void serve_actions() {
    for (auto& [url, route] : routes) {
      server.Post(url, [this, &route](const httplib::Request& req, httplib::Response& res) { handle_action(route, req, res); });
    }
  }
};

std::unique_ptr<Origin> Origin::start(std::vector<ScenarioFixture> fixtures, resolver::EndpointRegistry registry,
                                      Keys keys, OriginOptions options) {
  auto impl = std::make_unique<Impl>();
  if (!options.clock) {
    options.clock = [] {
      return std::chrono::duration_cast<resolver::Millis>(std::chrono::steady_clock::now().time_since_epoch());
    };
  }
  if (!options.unix_clock) {
    options.unix_clock = [] {
      return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  impl->fixtures = std::move(fixtures);
  impl->registry = std::move(registry);
  impl->keys = std::move(keys);
  impl->options = std::move(options);
  if (!impl->registry.find(resolver::kKeysSymbol)) {
    throw Error(ErrorCode::FixtureInvalid, "registry has no " + std::string(resolver::kKeysSymbol) + " entry");
  }
  impl->build_routes();
  impl->serve_pages();
  impl->serve_wmcp();
  impl->serve_actions();

  auto& server = impl->server;
  // httplib's default adds SO_REUSEPORT, which lets a second origin share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  const auto& host = impl->options.host;
  if (impl->options.port == 0) {
    impl->port = server.bind_to_any_port(host);
    if (impl->port < 0) throw Error(ErrorCode::PortUnavailable, "cannot bind " + host);
  } else {
    if (!server.bind_to_port(host, impl->options.port)) {
      throw Error(ErrorCode::PortUnavailable, "port " + std::to_string(impl->options.port) + " is unavailable");
    }
    impl->port = impl->options.port;
  }
  impl->thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return std::unique_ptr<Origin>(new Origin(std::move(impl)));
}

Origin::Origin(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

Origin::~Origin() { stop(); }

int Origin::port() const noexcept { return impl_->port; }

std::string Origin::base_url() const { return "http://" + impl_->options.host + ":" + std::to_string(impl_->port); }

void Origin::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace wmcp::harness
