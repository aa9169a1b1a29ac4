#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmcp/crypto.hpp"
#include "wmcp/graph.hpp"
#include "wmcp/resolver.hpp"
#include "wmcp/signature.hpp"

namespace wmcp::harness {

inline constexpr std::string_view kCsrfPlaceholder = "{{csrf_token}}";
inline constexpr std::string_view kCsrfCookie = "wmcp_csrf";
inline constexpr double kDefaultRatePer1k = 0.01;

struct PageFixture {
  std::string path;     // "/login"
  std::string html;     // template; kCsrfPlaceholder is filled per request
  std::string sidecar;  // served bytes
  WmcpDocument doc;
  graph::Params params;  // empty: the page is only observed

  bool submits() const noexcept { return !params.empty(); }
};

struct ScenarioFixture {
  std::string name;
  std::string goal;
  std::vector<PageFixture> pages;
};

// Reads the manifest (scenarios.json) and the files it names, relative to the
// manifest's directory. Every sidecar must lint without errors and the last
// page must plan to exactly one button.submit action.
// Throws FixtureInvalid or IoFailure.
std::vector<ScenarioFixture> load_scenarios(const std::filesystem::path& manifest);

// The page as served: the placeholder replaced by `token`, and, when the
// sidecar has a csrf policy, <meta name="<token_field>" content="<token>">
// inserted before </head>.
std::string serve_html(const PageFixture& page, std::string_view token);

struct Keys {
  crypto::Seed seed{};  // signs sidecars and agent tokens
  std::string key_id = "dev";
  crypto::SymmetricKey jwe_key{};

  // dev.seed and dev.jwe.key (base64) from `dir`. Throws IoFailure.
  static Keys load(const std::filesystem::path& dir, std::string key_id = "dev");
};

struct OriginOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::function<resolver::Millis()> clock;       // throttle clock; steady clock by default
  std::function<std::int64_t()> unix_clock;      // token clock; system clock by default
  std::optional<std::int64_t> burst_override;    // replaces every route's burst
  bool tamper_sidecars = false;                  // serve bytes that no longer match their signature
};

// A running mock origin. Stops on destruction.
class Origin {
 public:
  // Throws PortUnavailable or FixtureInvalid.
  static std::unique_ptr<Origin> start(std::vector<ScenarioFixture> fixtures, resolver::EndpointRegistry registry,
                                       Keys keys, OriginOptions options = {});
  ~Origin();
  Origin(const Origin&) = delete;
  Origin& operator=(const Origin&) = delete;

  int port() const noexcept;
  std::string base_url() const;
  void stop();

  struct Impl;

 private:
  explicit Origin(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

enum class Method { BaselineHtml, WebmcpOptimized };
std::string_view to_string(Method method) noexcept;

struct RunRecord {
  std::string scenario;
  Method method = Method::BaselineHtml;
  int iteration = 0;
  std::size_t tokens = 0;
  double latency_ms = 0.0;
  bool success = false;
  double cost_proxy = 0.0;
  int last_status = 0;  // status of the last HTTP request that decided the outcome
  std::string failure;  // empty on success
};

// Deliberate misbehaviour for security tests.
struct Faults {
  bool omit_csrf = false;
  bool mismatch_csrf = false;
  bool drop_scopes = false;
  bool expired_token = false;
};

struct AgentOptions {
  std::string subject = "bench-agent";
  double rate_per_1k = kDefaultRatePer1k;
  Faults faults;
  sig::TrustStore pins;
  // Receives "fetch", "verify", "verified", "parse", "plan", "resolve",
  // "submit" as the webMCP agent runs.
  std::function<void(std::string_view)> trace;
};

// Runs one scenario end to end with one method. Never throws for HTTP or
// security failures; they end up in the record.
RunRecord run_agent(Method method, const ScenarioFixture& scenario, const std::string& base_url,
                    const AgentOptions& options, int iteration = 0);

// Prompt tokens of one scenario, per method. Baseline: every served page;
// webMCP: every page's elements payload. Goal and params are the same for both
// methods and are left out.
graph::TokenReport scenario_tokens(const ScenarioFixture& scenario);

struct BenchOptions {
  int iterations = 15;
  std::uint64_t seed = 1;
  double rate_per_1k = kDefaultRatePer1k;
};

struct SummaryRow {
  std::string scenario;
  double baseline_mean_tokens = 0.0;
  double webmcp_mean_tokens = 0.0;
  double reduction_pct = 0.0;
  double baseline_mean_latency_ms = 0.0;
  double webmcp_mean_latency_ms = 0.0;
  double baseline_success_rate = 0.0;
  double webmcp_success_rate = 0.0;
};

// Scenario x method x iteration, run sequentially. The seed shuffles the
// method order within each iteration. Throws InvalidArgument for iterations < 1.
std::vector<RunRecord> run_benchmark(const std::vector<ScenarioFixture>& scenarios, const std::string& base_url,
                                     const AgentOptions& agent, const BenchOptions& options);
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

// Header plus one row per record, LF line endings.
std::string records_csv(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
// Writes `path` and `<stem>_summary.csv` beside it. Throws IoFailure.
void write_results(const std::filesystem::path& path, const std::vector<RunRecord>& records);
std::filesystem::path summary_path(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);  // throws IoFailure

}  // namespace wmcp::harness
