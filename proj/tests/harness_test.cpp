#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "generators.hpp"
#include "wmcp/harness.hpp"

using namespace wmcp;
using namespace wmcp::harness;
using wmcp::testing::fixture;

namespace {

const std::filesystem::path kKeys = std::filesystem::path(WMCP_SOURCE_DIR) / "keys";

struct Site {
  Keys keys = Keys::load(kKeys);
  std::vector<ScenarioFixture> scenarios = load_scenarios(fixture("site/scenarios.json"));
  sig::TrustStore pins = sig::TrustStore::load(read_file(kKeys / "pins.txt"));

  resolver::EndpointRegistry registry() const {
    return resolver::EndpointRegistry::load(read_file(fixture("site/registry.json")),
                                            crypto::ed25519_public_key(keys.seed));
  }
  std::unique_ptr<Origin> start(OriginOptions options = {}) const {
    return Origin::start(scenarios, registry(), keys, std::move(options));
  }
  const ScenarioFixture& scenario(std::string_view name) const {
    for (const auto& s : scenarios) {
      if (s.name == name) return s;
    }
    FAIL("no scenario " << name);
    return scenarios.front();
  }
  AgentOptions agent() const {
    AgentOptions o;
    o.pins = pins;
    return o;
  }
};

const Site& site() {
  static const Site s;
  return s;
}

std::string mint(httplib::Client& client, const std::vector<std::string>& scopes) {
  const nlohmann::json body = {{"subject", "test"}, {"scopes", scopes}, {"ttl", 300}};
  auto res = client.Post("/wmcp/token", body.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  return nlohmann::json::parse(res->body).at("token").get<std::string>();
}

// A token the origin issued, via a page load.
std::string page_token(httplib::Client& client, const std::string& path) {
  auto res = client.Get(path);
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const auto cookie = res->get_header_value("Set-Cookie");
  const auto start = std::string(kCsrfCookie).size() + 1;
  return cookie.substr(start, cookie.find(';') - start);
}

int post(httplib::Client& client, const std::string& url, const httplib::Headers& headers, const httplib::Params& form) {
  auto res = client.Post(url, headers, form);
  REQUIRE(res);
  return res->status;
}

}  // namespace

TEST_CASE("fixtures load") {
  const auto& s = site().scenarios;
  REQUIRE(s.size() == 3);
  CHECK(s[0].name == "ecommerce");
  CHECK(s[0].pages.size() == 4);
  CHECK(s[1].name == "auth");
  CHECK(s[2].name == "dynamic");
  CHECK_FALSE(s[2].pages[0].submits());
}

TEST_CASE("served html carries the token twice") {
  const auto& page = site().scenario("auth").pages[0];
  const std::string token(32, 'a');
  const auto html = serve_html(page, token);
  CHECK(html.find(kCsrfPlaceholder) == std::string::npos);
  CHECK(html.find("<meta name=\"csrf_token\" content=\"" + token + "\">\n</head>") != std::string::npos);
  CHECK(html.find("value=\"" + token + "\"") != std::string::npos);
}

TEST_CASE("sidecars are served signed with the media type") {
  const auto origin = site().start();
  httplib::Client client(origin->base_url());
  auto res = client.Get("/login.wmcp");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == kMediaType);
  const auto bundle = sig::decode_signature(res->get_header_value(std::string(sig::kSignatureHeader)), res->body);
  CHECK(bundle.key_id == "dev");
  CHECK(sig::load_verified(bundle, site().pins).elements.size() == 3);

  auto page = client.Get("/login");
  REQUIRE(page);
  CHECK(page->get_header_value("Set-Cookie").starts_with("wmcp_csrf="));
}

TEST_CASE("keys endpoint needs the payload scope") {
  const auto origin = site().start();
  httplib::Client client(origin->base_url());
  auto denied = client.Get("/wmcp/keys", {{"Authorization", "Bearer " + mint(client, {"auth:login"})}});
  REQUIRE(denied);
  CHECK(denied->status == 403);
  auto none = client.Get("/wmcp/keys");
  REQUIRE(none);
  CHECK(none->status == 401);
  auto ok = client.Get("/wmcp/keys", {{"Authorization", "Bearer " + mint(client, {"payload:key"})}});
  REQUIRE(ok);
  CHECK(ok->status == 200);
  const auto j = nlohmann::json::parse(ok->body);
  CHECK(j["alg"] == "dir");
  CHECK(j["enc"] == "A256GCM");
  CHECK(j["kid"] == "dev");
}

TEST_CASE("double-submit csrf matrix") {
  const auto origin = site().start();
  httplib::Client client(origin->base_url());
  const auto bearer = "Bearer " + mint(client, {"cart:add"});
  const httplib::Params fields = {{"size", "10"}, {"quantity", "1"}};
  const auto with_token = [&](const std::string& t) {
    auto f = fields;
    f.emplace("csrf_token", t);
    return f;
  };

  const auto a = page_token(client, "/product");
  const auto b = page_token(client, "/product");
  CHECK(post(client, "/api/cart", {{"Authorization", bearer}, {"X-CSRF-TOKEN", a}}, with_token(a)) == 200);
  CHECK(post(client, "/api/cart", {{"Authorization", bearer}, {"X-CSRF-TOKEN", b}}, with_token(a)) == 403);
  CHECK(post(client, "/api/cart", {{"Authorization", bearer}}, with_token(a)) == 403);
  CHECK(post(client, "/api/cart", {{"Authorization", bearer}, {"X-CSRF-TOKEN", a}}, fields) == 403);
  const std::string unknown(32, 'e');
  CHECK(post(client, "/api/cart", {{"Authorization", bearer}, {"X-CSRF-TOKEN", unknown}}, with_token(unknown)) == 403);
  // Correct csrf, wrong fields.
  auto wrong = with_token(a);
  wrong.erase("size");
  CHECK(post(client, "/api/cart", {{"Authorization", bearer}, {"X-CSRF-TOKEN", a}}, wrong) == 422);
  // Browser form post: cookie instead of header, no bearer.
  CHECK(post(client, "/api/cart", {{"Cookie", "wmcp_csrf=" + a}}, with_token(a)) == 200);
  CHECK(post(client, "/api/cart", {{"Cookie", "wmcp_csrf=" + b}}, with_token(a)) == 403);
}

TEST_CASE("synchroniser csrf needs only the body token") {
  const auto origin = site().start();
  httplib::Client client(origin->base_url());
  const auto bearer = "Bearer " + mint(client, {"feed:comment"});
  const auto t = page_token(client, "/feed-updated");
  const httplib::Params ok = {{"comment", "Welcome aboard, Devon"}, {"csrf_token", t}};
  CHECK(post(client, "/api/comment", {{"Authorization", bearer}}, ok) == 200);
  CHECK(post(client, "/api/comment", {{"Authorization", bearer}}, {{"comment", "Welcome aboard, Devon"}}) == 403);
  CHECK(post(client, "/api/comment", {{"Authorization", bearer}},
             {{"comment", "Welcome aboard, Devon"}, {"csrf_token", std::string(32, 'f')}}) == 403);
}

TEST_CASE("token checks on actions") {
  const auto origin = site().start();
  httplib::Client client(origin->base_url());
  const auto t = page_token(client, "/login");
  const httplib::Params form = {{"username", "alice"}, {"password", "correct horse battery staple"}, {"csrf_token", t}};
  CHECK(post(client, "/api/login", {{"Authorization", "Bearer " + mint(client, {"cart:add"})}, {"X-CSRF-TOKEN", t}},
             form) == 403);
  CHECK(post(client, "/api/login", {{"Authorization", "Bearer junk"}, {"X-CSRF-TOKEN", t}}, form) == 401);
  CHECK(post(client, "/api/login", {{"Authorization", "Bearer " + mint(client, {"auth:login"})}, {"X-CSRF-TOKEN", t}},
             form) == 200);
}

TEST_CASE("both methods succeed on every scenario") {
  const auto origin = site().start();
  for (const auto& s : site().scenarios) {
    for (const auto m : {Method::BaselineHtml, Method::WebmcpOptimized}) {
      CAPTURE(s.name);
      CAPTURE(to_string(m));
      const auto r = run_agent(m, s, origin->base_url(), site().agent());
      CHECK(r.success);
      CHECK(r.last_status == 200);
      CHECK(r.failure.empty());
    }
  }
}

TEST_CASE("security matrix") {
  struct Row {
    const char* name;
    Faults faults;
    int status;
  };
  const std::vector<Row> rows = {
      {"missing csrf", {.omit_csrf = true}, 403},
      {"mismatched csrf", {.mismatch_csrf = true}, 403},
      {"missing scope", {.drop_scopes = true}, 403},
      {"expired token", {.expired_token = true}, 401},
  };
  const auto origin = site().start();
  for (const auto& s : site().scenarios) {
    for (const auto& row : rows) {
      CAPTURE(s.name);
      CAPTURE(row.name);
      auto options = site().agent();
      options.faults = row.faults;
      const auto r = run_agent(Method::WebmcpOptimized, s, origin->base_url(), options);
      CHECK_FALSE(r.success);
      CHECK(r.last_status == row.status);
    }
  }
}

TEST_CASE("over the throttle budget") {
  OriginOptions options;
  options.clock = [] { return resolver::Millis{0}; };  // no refill
  options.burst_override = 1;
  const auto origin = site().start(options);
  for (const auto& s : site().scenarios) {
    CAPTURE(s.name);
    CHECK(run_agent(Method::WebmcpOptimized, s, origin->base_url(), site().agent()).success);
    const auto r = run_agent(Method::WebmcpOptimized, s, origin->base_url(), site().agent());
    CHECK_FALSE(r.success);
    CHECK(r.last_status == 429);
  }
  httplib::Client client(origin->base_url());
  const auto t = page_token(client, "/login");
  auto res = client.Post("/api/login", {{"Cookie", "wmcp_csrf=" + t}}, httplib::Params{{"csrf_token", t}});
  REQUIRE(res);
  CHECK(res->status == 429);
  CHECK(res->get_header_value("Retry-After") == "1");
}

TEST_CASE("signature is verified before the sidecar is parsed") {
  std::vector<std::string> events;
  auto options = site().agent();
  options.trace = [&](std::string_view e) { events.emplace_back(e); };
  const auto& auth = site().scenario("auth");

  SUBCASE("intact") {
    const auto origin = site().start();
    CHECK(run_agent(Method::WebmcpOptimized, auth, origin->base_url(), options).success);
    const std::vector<std::string> expected = {"fetch", "verify", "verified", "parse", "plan", "resolve", "submit"};
    CHECK(events == expected);
  }
  SUBCASE("tampered") {
    OriginOptions o;
    o.tamper_sidecars = true;
    const auto origin = site().start(o);
    const auto r = run_agent(Method::WebmcpOptimized, auth, origin->base_url(), options);
    CHECK_FALSE(r.success);
    CHECK(events == std::vector<std::string>{"fetch", "verify"});
  }
  SUBCASE("unpinned key") {
    const auto origin = site().start();
    options.pins = sig::TrustStore{};
    CHECK_FALSE(run_agent(Method::WebmcpOptimized, auth, origin->base_url(), options).success);
    CHECK(std::find(events.begin(), events.end(), "parse") == events.end());
  }
}

// Frozen from tests/oracles/scenario_tokens.py.
TEST_CASE("token counts per scenario") {
  struct Golden {
    const char* name;
    std::size_t html;
    std::size_t payload;
    double reduction;
  };
  const std::vector<Golden> goldens = {
      {"ecommerce", 5149, 1110, 78.4424160031},
      {"auth", 794, 175, 77.9596977330},
      {"dynamic", 2539, 270, 89.3658920835},
  };
  const auto origin = site().start();
  for (const auto& g : goldens) {
    CAPTURE(g.name);
    const auto& s = site().scenario(g.name);
    const auto report = scenario_tokens(s);
    CHECK(report.tokens_full_html == g.html);
    CHECK(report.tokens_elements_payload == g.payload);
    CHECK(std::abs(report.reduction_pct - g.reduction) < 1e-9);
    // A live run counts the same tokens.
    CHECK(run_agent(Method::BaselineHtml, s, origin->base_url(), site().agent()).tokens == g.html);
    CHECK(run_agent(Method::WebmcpOptimized, s, origin->base_url(), site().agent()).tokens == g.payload);
  }
}

TEST_CASE("benchmark rows") {
  const auto origin = site().start();
  BenchOptions options;
  options.iterations = 1;
  const auto one = run_benchmark(site().scenarios, origin->base_url(), site().agent(), options);
  REQUIRE(one.size() == 6);
  CHECK(one[0].scenario == "ecommerce");
  CHECK(one[0].method == Method::BaselineHtml);
  CHECK(one[1].method == Method::WebmcpOptimized);

  options.iterations = 15;
  const auto second = site().start();
  const auto full = run_benchmark(site().scenarios, second->base_url(), site().agent(), options);
  REQUIRE(full.size() == 90);
  for (const auto& r : full) {
    CHECK(r.success);
    CHECK(r.cost_proxy == doctest::Approx(static_cast<double>(r.tokens) * kDefaultRatePer1k / 1000.0));
  }
  // A fresh origin: the checkout route's burst of 50 is spent by now.
  const auto fresh = site().start();
  const auto again = run_benchmark(site().scenarios, fresh->base_url(), site().agent(), options);
  REQUIRE(again.size() == full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(again[i].scenario == full[i].scenario);
    CHECK(again[i].method == full[i].method);
    CHECK(again[i].iteration == full[i].iteration);
    CHECK(again[i].tokens == full[i].tokens);
    CHECK(again[i].success == full[i].success);
  }

  const auto summary = summarize(full);
  REQUIRE(summary.size() == 3);
  CHECK(summary[1].scenario == "auth");
  CHECK(summary[1].reduction_pct == doctest::Approx(77.9596977330));
  CHECK(summary[1].webmcp_success_rate == 1.0);

  options.iterations = 0;
  CHECK_THROWS_AS(run_benchmark(site().scenarios, origin->base_url(), site().agent(), options), Error);
}

TEST_CASE("csv output") {
  RunRecord r;
  r.scenario = "auth";
  r.method = Method::WebmcpOptimized;
  r.iteration = 3;
  r.tokens = 175;
  r.latency_ms = 1.23456;
  r.success = true;
  r.cost_proxy = 0.00175;
  CHECK(records_csv({r}) ==
        "scenario,method,iteration,tokens,latency_ms,success,cost_proxy\n"
        "auth,webmcp_optimized,3,175,1.235,true,0.001750\n");

  RunRecord b = r;
  b.method = Method::BaselineHtml;
  b.tokens = 794;
  b.success = false;
  const auto summary = summary_csv(summarize({b, r}));
  CHECK(summary.find("auth,794.00,175.00,77.9597,") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "wmcp_harness_test";
  std::filesystem::create_directories(dir);
  write_results(dir / "results.csv", {b, r});
  CHECK(read_file(dir / "results.csv") == records_csv({b, r}));
  CHECK(read_file(dir / "results_summary.csv") == summary);
  CHECK(summary_path("out/x.csv") == std::filesystem::path("out/x_summary.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("origin errors") {
  const auto first = site().start();
  OriginOptions taken;
  taken.port = first->port();
  try {
    site().start(taken);
    FAIL("second bind succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PortUnavailable);
  }

  const auto dir = std::filesystem::temp_directory_path() / "wmcp_fixture_test";
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(fixture("login.html"), dir / "login.html", std::filesystem::copy_options::overwrite_existing);
  std::filesystem::copy_file(fixture("login.wmcp"), dir / "login.wmcp", std::filesystem::copy_options::overwrite_existing);
  const auto manifest = [&](const std::string& body) {
    std::ofstream(dir / "scenarios.json") << body;
    return dir / "scenarios.json";
  };
  const auto code_of = [](const std::filesystem::path& p) {
    try {
      load_scenarios(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  // The last page has nothing to submit.
  CHECK(code_of(manifest(R"({"scenarios": [{"name": "x", "goal": "log in", "pages": [
      {"path": "/login", "html": "login.html", "sidecar": "login.wmcp"}]}]})")) == ErrorCode::FixtureInvalid);
  // A required param is missing.
  CHECK(code_of(manifest(R"({"scenarios": [{"name": "x", "goal": "log in", "pages": [
      {"path": "/login", "html": "login.html", "sidecar": "login.wmcp", "params": {"USERNAME": "a"}}]}]})")) ==
        ErrorCode::FixtureInvalid);
  CHECK(code_of(manifest(R"({"scenarios": [)")) == ErrorCode::FixtureInvalid);
  CHECK(code_of(manifest(R"({"scenarios": [{"name": "x", "goal": "log in", "pages": [
      {"path": "/login", "html": "absent.html", "sidecar": "login.wmcp"}]}]})")) == ErrorCode::IoFailure);
  CHECK(load_scenarios(manifest(R"({"scenarios": [{"name": "x", "goal": "log in", "pages": [
      {"path": "/login", "html": "login.html", "sidecar": "login.wmcp",
       "params": {"USERNAME": "a", "PASSWORD": "b"}}]}]})")).size() == 1);
  std::filesystem::remove_all(dir);

  auto no_keys = nlohmann::json::parse(read_file(fixture("site/registry.json")));
  no_keys.erase("@WMCP_KEYS");
  const auto registry =
      resolver::EndpointRegistry::load(no_keys.dump(), crypto::ed25519_public_key(site().keys.seed));
  CHECK_THROWS_AS(Origin::start(site().scenarios, registry, site().keys), Error);
}
