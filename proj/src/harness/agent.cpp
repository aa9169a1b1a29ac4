#include <chrono>

#include <httplib.h>
#include <json.hpp>

#include "wmcp/author.hpp"
#include "wmcp/codec.hpp"
#include "wmcp/harness.hpp"
#include "wmcp/secure.hpp"
#include "wmcp/selector.hpp"
#include "wmcp/text.hpp"

namespace wmcp::harness {

std::string_view to_string(Method method) noexcept {
  return method == Method::BaselineHtml ? "baseline_html" : "webmcp_optimized";
}

namespace {

// Ends the run: the status that decided the outcome and why.
struct Failed {
  int status;
  std::string why;
};

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

httplib::Result must_get(httplib::Client& client, const std::string& path, const httplib::Headers& headers = {}) {
  auto res = client.Get(path, headers);
  if (!res) throw Failed{0, "GET " + path + ": " + httplib::to_string(res.error())};
  if (res->status != 200) throw Failed{res->status, "GET " + path + " returned " + std::to_string(res->status)};
  return res;
}

void submit(httplib::Client& client, const secure::ActionRequest& request) {
  if (request.method != HttpVerb::Post) throw Failed{0, "only POST actions are driven"};
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  auto res = client.Post(request.url, headers, request.encoded_body(), request.content_type());
  if (!res) throw Failed{0, "POST " + request.url + ": " + httplib::to_string(res.error())};
  if (res->status != 200) throw Failed{res->status, "POST " + request.url + " returned " + std::to_string(res->status)};
}

std::string cookie_value(const httplib::Response& res, std::string_view name) {
  for (const auto& [k, v] : res.headers) {
    if (!text::iequals(k, "Set-Cookie")) continue;
    const auto prefix = std::string(name) + "=";
    if (v.starts_with(prefix)) return v.substr(prefix.size(), v.find(';') - prefix.size());
  }
  return {};
}

class Run {
 public:
  Run(const ScenarioFixture& scenario, const std::string& base_url, const AgentOptions& options)
      : scenario_(scenario), client_(base_url), options_(options) {
    client_.set_connection_timeout(5);
    client_.set_read_timeout(10);
  }

  std::size_t tokens = 0;

  void baseline() {
    for (const auto& page : scenario_.pages) {
      auto res = must_get(client_, page.path);
      const auto& html = res->body;
      tokens += graph::estimate_tokens(html);
      if (!page.submits()) continue;

      const auto scan = author::scan_html(html);
      const auto g = graph::build_graph(scan.document);
      const auto plan = graph::plan_for_goal(g, scenario_.goal, page.params);
      const auto& action = g.find(plan.submit().name)->element;
      if (!action.action) throw Failed{0, "scanned submit has no action"};

      // Post the form the way a browser would: hidden fields plus the filled
      // controls under their HTML names, with the session cookie.
      const auto dom = html::Document::parse(html);
      const auto* button = html::Selector::parse(action.selector).select(dom).front();
      const auto* form = button->closest("form");
      secure::ActionRequest request;
      request.method = action.action->kind;
      request.url = action.action->endpoint;
      for (const auto* e : dom.elements()) {
        if (e->tag() == "input" && e->closest("form") == form && e->attr("type") &&
            text::iequals(*e->attr("type"), "hidden") && e->attr("name")) {
          request.body.emplace_back(*e->attr("name"), e->attr("value") ? *e->attr("value") : "");
        }
      }
      for (const auto& step : plan.steps) {
        if (step.op != graph::StepOp::Fill) continue;
        const auto& selector = g.find(step.name)->element.selector;
        const auto* control = html::Selector::parse(selector).select(dom).front();
        const auto* name = control->attr("name");
        if (!name) throw Failed{0, selector + " has no form name"};
        request.set_field(*name, page.params.find(*step.param)->second);
      }
      request.set_header("Cookie", std::string(kCsrfCookie) + "=" + cookie_value(*res, kCsrfCookie));
      submit(client_, request);
    }
  }

  void webmcp() {
    for (const auto& page : scenario_.pages) {
      trace("fetch");
      auto res = must_get(client_, page.path + ".wmcp");
      const auto bundle = sig::decode_signature(res->get_header_value(std::string(sig::kSignatureHeader)),
                                                      res->body);
      trace("verify");
      const auto doc = sig::open_verified(bundle, options_.pins, [this](std::string_view bytes) {
        trace("verified");
        trace("parse");
        return parse_document(bytes);
      });
      const auto g = graph::build_graph(doc);
      const auto prompt = graph::make_prompt(scenario_.goal, doc, page.params);
      tokens += graph::estimate_tokens(prompt.elements_json);
      if (!page.submits()) continue;

      trace("plan");
      const auto plan = graph::plan_for_goal(g, scenario_.goal, page.params);
      const auto& action = *g.find(plan.submit().name)->element.action;

      secure::ActionRequest request;
      request.method = action.kind;
      request.url = action.endpoint;
      std::string token;
      if (action.is_symbolic()) {
        token = mint_token(doc.security->endpoints.at(action.endpoint), action.payload_jwe.has_value());
        trace("resolve");
        auto resolved = must_get(client_, "/wmcp/resolve?symbol=" + codec::form_encode(action.endpoint), auth(token));
        request.url = nlohmann::json::parse(resolved->body).at("url").get<std::string>();
        request.set_header("Authorization", "Bearer " + token);
      }
      if (action.payload_jwe) merge_payload(request, *action.payload_jwe, token);
      for (const auto& step : plan.steps) {
        if (step.op == graph::StepOp::Fill) request.set_field(step.name, page.params.find(*step.param)->second);
      }
      if (action.csrf_tag && doc.security && doc.security->csrf) request = with_csrf(std::move(request), page, *doc.security->csrf);
      trace("submit");
      submit(client_, request);
    }
  }

 private:
  void trace(std::string_view event) const {
    if (options_.trace) options_.trace(event);
  }

  static httplib::Headers auth(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

  std::string mint_token(const EndpointPolicy& policy, bool needs_key) {
    std::vector<std::string> scopes;
    if (!options_.faults.drop_scopes) scopes = policy.scopes;
    if (needs_key) scopes.emplace_back(resolver::kKeyScope);
    nlohmann::json body = {{"subject", options_.subject}, {"scopes", scopes}, {"ttl", policy.expires}};
    if (options_.faults.expired_token) body["issued_at"] = unix_now() - 2 * policy.expires;
    auto res = client_.Post("/wmcp/token", body.dump(), "application/json");
    if (!res) throw Failed{0, "POST /wmcp/token: " + httplib::to_string(res.error())};
    if (res->status != 200) throw Failed{res->status, "token request refused"};
    return nlohmann::json::parse(res->body).at("token").get<std::string>();
  }

  void merge_payload(secure::ActionRequest& request, const std::string& jwe, const std::string& token) {
    auto res = must_get(client_, "/wmcp/keys", auth(token));
    const auto k = codec::base64url_decode(nlohmann::json::parse(res->body).at("k").get<std::string>());
    if (!k || k->size() != crypto::SymmetricKey{}.size()) throw Failed{0, "bad JWE key"};
    const auto plain = secure::decrypt_payload(jwe, crypto::fixed_key<32>(*k));
    const auto fields = nlohmann::json::parse(std::string(plain.begin(), plain.end()));
    for (const auto& [name, value] : fields.items()) {
      request.set_field(name, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }

  secure::ActionRequest with_csrf(secure::ActionRequest request, const PageFixture& page, const CsrfPolicy& policy) {
    if (options_.faults.omit_csrf) return request;
    auto res = must_get(client_, page.path);
    auto result = secure::apply_csrf(std::move(request), secure::extract_csrf_token(res->body, policy), policy);
    if (options_.faults.mismatch_csrf) {
      const std::string forged(32, 'f');
      if (policy.mode == CsrfMode::DoubleSubmit) {
        result.set_header(policy.header_name, forged);
      } else {
        result.set_field(policy.token_field, forged);
      }
    }
    return result;
  }

  const ScenarioFixture& scenario_;
  httplib::Client client_;
  const AgentOptions& options_;
};

}  // namespace

RunRecord run_agent(Method method, const ScenarioFixture& scenario, const std::string& base_url,
                    const AgentOptions& options, int iteration) {
  RunRecord record;
  record.scenario = scenario.name;
  record.method = method;
  record.iteration = iteration;
  Run run(scenario, base_url, options);
  const auto start = std::chrono::steady_clock::now();
  try {
    method == Method::BaselineHtml ? run.baseline() : run.webmcp();
    record.success = true;
    record.last_status = 200;
  } catch (const Failed& f) {
    record.last_status = f.status;
    record.failure = f.why;
  } catch (const std::exception& e) {
    record.failure = e.what();
  }
  record.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  record.tokens = run.tokens;
  record.cost_proxy = static_cast<double>(record.tokens) * options.rate_per_1k / 1000.0;
  return record;
}

graph::TokenReport scenario_tokens(const ScenarioFixture& scenario) {
  // Any 32-hex token costs the same; a fixed one keeps this pure.
  const std::string token(32, '0');
  std::vector<graph::TokenReport> pages;
  for (const auto& page : scenario.pages) pages.push_back(graph::token_report(page.path, serve_html(page, token), page.doc));
  return graph::combine_reports(scenario.name, pages);
}

}  // namespace wmcp::harness
