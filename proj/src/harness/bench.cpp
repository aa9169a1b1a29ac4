#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "wmcp/harness.hpp"

namespace wmcp::harness {

std::vector<RunRecord> run_benchmark(const std::vector<ScenarioFixture>& scenarios, const std::string& base_url,
                                     const AgentOptions& agent, const BenchOptions& options) {
  if (options.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");
  std::mt19937_64 rng(options.seed);
  auto run_options = agent;
  run_options.rate_per_1k = options.rate_per_1k;

  std::vector<RunRecord> records;
  for (const auto& scenario : scenarios) {
    const auto first = records.size();
    for (int i = 1; i <= options.iterations; ++i) {
      std::array<Method, 2> order{Method::BaselineHtml, Method::WebmcpOptimized};
      if (rng() & 1U) std::swap(order[0], order[1]);
      for (const auto method : order) records.push_back(run_agent(method, scenario, base_url, run_options, i));
    }
    // Rows are reported in a fixed order regardless of execution order.
    std::sort(records.begin() + static_cast<std::ptrdiff_t>(first), records.end(),
              [](const RunRecord& a, const RunRecord& b) {
                return std::tie(a.method, a.iteration) < std::tie(b.method, b.iteration);
              });
  }
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  struct Acc {
    double tokens = 0, latency = 0, successes = 0, n = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, std::array<Acc, 2>> acc;
  for (const auto& r : records) {
    if (!acc.contains(r.scenario)) order.push_back(r.scenario);
    auto& a = acc[r.scenario][r.method == Method::BaselineHtml ? 0 : 1];
    a.tokens += static_cast<double>(r.tokens);
    a.latency += r.latency_ms;
    a.successes += r.success ? 1 : 0;
    a.n += 1;
  }
  std::vector<SummaryRow> rows;
  for (const auto& name : order) {
    const auto& [base, wmcp] = acc[name];
    const auto mean = [](double sum, double n) { return n > 0 ? sum / n : 0.0; };
    SummaryRow row;
    row.scenario = name;
    row.baseline_mean_tokens = mean(base.tokens, base.n);
    row.webmcp_mean_tokens = mean(wmcp.tokens, wmcp.n);
    row.reduction_pct =
        row.baseline_mean_tokens > 0 ? 100.0 * (1.0 - row.webmcp_mean_tokens / row.baseline_mean_tokens) : 0.0;
    row.baseline_mean_latency_ms = mean(base.latency, base.n);
    row.webmcp_mean_latency_ms = mean(wmcp.latency, wmcp.n);
    row.baseline_success_rate = mean(base.successes, base.n);
    row.webmcp_success_rate = mean(wmcp.successes, wmcp.n);
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

std::string records_csv(const std::vector<RunRecord>& records) {
  std::string out = "scenario,method,iteration,tokens,latency_ms,success,cost_proxy\n";
  for (const auto& r : records) {
    out += r.scenario + "," + std::string(to_string(r.method)) + "," + std::to_string(r.iteration) + "," +
           std::to_string(r.tokens) + "," + fmt("%.3f", r.latency_ms) + "," + (r.success ? "true" : "false") + "," +
           fmt("%.6f", r.cost_proxy) + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "scenario,baseline_mean_tokens,webmcp_mean_tokens,reduction_pct,baseline_mean_latency_ms,"
      "webmcp_mean_latency_ms,baseline_success_rate,webmcp_success_rate\n";
  for (const auto& r : rows) {
    out += r.scenario + "," + fmt("%.2f", r.baseline_mean_tokens) + "," + fmt("%.2f", r.webmcp_mean_tokens) + "," +
           fmt("%.4f", r.reduction_pct) + "," + fmt("%.3f", r.baseline_mean_latency_ms) + "," +
           fmt("%.3f", r.webmcp_mean_latency_ms) + "," + fmt("%.4f", r.baseline_success_rate) + "," +
           fmt("%.4f", r.webmcp_success_rate) + "\n";
  }
  return out;
}

std::filesystem::path summary_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_filename(path.stem().string() + "_summary.csv");
  return p;
}

void write_results(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  const auto write = [](const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out.flush()) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
  };
  write(path, records_csv(records));
  write(summary_path(path), summary_csv(summarize(records)));
}

}  // namespace wmcp::harness
