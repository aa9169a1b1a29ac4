#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wmcp/author.hpp"
#include "wmcp/codec.hpp"
#include "wmcp/text.hpp"
#include "wmcp/harness.hpp"

namespace wmcp::harness {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::FixtureInvalid, what); }

void check_final_page(const ScenarioFixture& s) {
  const auto& last = s.pages.back();
  if (!last.submits()) invalid(s.name + ": the last page has no params to submit");
  const auto g = graph::build_graph(last.doc);
  std::size_t submits = 0;
  for (const auto i : g.actions()) {
    if (g.nodes()[i].element.role == "button.submit") ++submits;
  }
  if (submits != 1) invalid(s.name + ": the last page must have exactly one button.submit action");
  try {
    graph::plan_for_goal(g, s.goal, last.params);
  } catch (const Error& e) {
    invalid(s.name + ": " + e.what());
  }
}

}  // namespace

std::vector<ScenarioFixture> load_scenarios(const std::filesystem::path& manifest) {
  const auto dir = manifest.parent_path();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    invalid(manifest.string() + ": " + e.what());
  }
  std::vector<ScenarioFixture> out;
  try {
    for (const auto& s : j.at("scenarios")) {
      ScenarioFixture scenario;
      scenario.name = s.at("name").get<std::string>();
      scenario.goal = s.at("goal").get<std::string>();
      for (const auto& p : s.at("pages")) {
        PageFixture page;
        page.path = p.at("path").get<std::string>();
        page.html = read_file(dir / p.at("html").get<std::string>());
        page.sidecar = read_file(dir / p.at("sidecar").get<std::string>());
        if (p.contains("params")) {
          for (const auto& [k, v] : p["params"].items()) page.params[k] = v.get<std::string>();
        }
        const auto lint = author::lint_document(page.sidecar);
        if (!lint.ok()) {
          invalid(scenario.name + page.path + ".wmcp: " + lint.errors.front().rule + " " + lint.errors.front().message);
        }
        page.doc = parse_document(page.sidecar);
        scenario.pages.push_back(std::move(page));
      }
      if (scenario.pages.empty()) invalid(scenario.name + ": no pages");
      check_final_page(scenario);
      out.push_back(std::move(scenario));
    }
  } catch (const nlohmann::json::exception& e) {
    invalid(manifest.string() + ": " + e.what());
  }
  return out;
}

std::string serve_html(const PageFixture& page, std::string_view token) {
  std::string html = page.html;
  for (auto pos = html.find(kCsrfPlaceholder); pos != std::string::npos;
       pos = html.find(kCsrfPlaceholder, pos + token.size())) {
    html.replace(pos, kCsrfPlaceholder.size(), token);
  }
  if (page.doc.security && page.doc.security->csrf) {
    const auto head_end = html.find("</head>");
    if (head_end != std::string::npos) {
      html.insert(head_end, "  <meta name=\"" + page.doc.security->csrf->token_field + "\" content=\"" +
                                std::string(token) + "\">\n");
    }
  }
  return html;
}

Keys Keys::load(const std::filesystem::path& dir, std::string key_id) {
  Keys k;
  k.key_id = std::move(key_id);
  k.seed = sig::parse_seed(read_file(dir / (k.key_id + ".seed")));
  const auto jwe = codec::base64_decode(text::trim(read_file(dir / (k.key_id + ".jwe.key"))));
  if (!jwe || jwe->size() != k.jwe_key.size()) throw Error(ErrorCode::IoFailure, "bad JWE key file in " + dir.string());
  std::copy(jwe->begin(), jwe->end(), k.jwe_key.begin());
  return k;
}

}  // namespace wmcp::harness
