#include <algorithm>
#include <set>

#include "wmcp/author.hpp"
#include "wmcp/html.hpp"
#include "wmcp/selector.hpp"
#include "wmcp/text.hpp"

namespace wmcp::author {

std::string_view to_string(DriftKind kind) noexcept {
  switch (kind) {
    case DriftKind::Scope:
      return "scope";
    case DriftKind::CsrfHeader:
      return "csrf-header";
    case DriftKind::KeyId:
      return "key-id";
  }
  return "scope";
}

RegistryDigest RegistryDigest::parse(std::string_view json) {
  RegistryDigest d;
  try {
    const auto j = nlohmann::json::parse(json);
    for (const auto& [key, _] : j.items()) {
      if (key != "scopes" && key != "csrf_header" && key != "key_ids") {
        throw Error(ErrorCode::InvalidArgument, "unknown digest key \"" + key + "\"");
      }
    }
    if (j.contains("scopes")) d.scopes = j["scopes"].get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("csrf_header")) d.csrf_header = j["csrf_header"].get<std::string>();
    if (j.contains("key_ids")) d.key_ids = j["key_ids"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed registry digest: ") + e.what());
  }
  return d;
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out = "[";
  for (const auto& s : items) out += (out.size() > 1 ? ", " : "") + s;
  return out + "]";
}

void compare_scopes(const WmcpDocument& doc, const std::map<std::string, std::vector<std::string>>& registry,
                    std::vector<PolicyDrift>& out) {
  if (!doc.security) return;
  for (const auto& [symbol, policy] : doc.security->endpoints) {
    const auto it = registry.find(symbol);
    if (it == registry.end()) {
      out.push_back({DriftKind::Scope, symbol + " is not in the registry"});
      continue;
    }
    const std::set<std::string> ours(policy.scopes.begin(), policy.scopes.end());
    const std::set<std::string> theirs(it->second.begin(), it->second.end());
    if (ours != theirs) {
      out.push_back({DriftKind::Scope, symbol + " scopes " + join({ours.begin(), ours.end()}) + " but registry has " +
                                           join({theirs.begin(), theirs.end()})});
    }
  }
}

}  // namespace

DriftReport check_drift(const WmcpDocument& doc, std::string_view html, const std::optional<RegistryDigest>& digest,
                        const std::optional<std::string>& signing_key_id) {
  const auto dom = html::Document::parse(html);
  DriftReport report;
  for (const auto& e : doc.elements) {
    std::size_t hits = 0;
    try {
      hits = html::Selector::parse(e.selector).select(dom).size();
    } catch (const Error&) {
      hits = 0;
    }
    if (hits == 0) {
      report.missing_selectors.push_back(e.selector);
    } else if (hits > 1) {
      report.multi_match.push_back(e.selector);
    }
  }
  if (!digest) return report;

  if (digest->scopes) compare_scopes(doc, *digest->scopes, report.policy_drift);
  if (digest->csrf_header) {
    const auto* csrf = doc.security && doc.security->csrf ? &*doc.security->csrf : nullptr;
    if (!csrf) {
      report.policy_drift.push_back({DriftKind::CsrfHeader, "registry expects header " + *digest->csrf_header +
                                                                " but the document has no csrf policy"});
    } else if (!text::iequals(csrf->header_name, *digest->csrf_header)) {
      report.policy_drift.push_back(
          {DriftKind::CsrfHeader, "document uses " + csrf->header_name + " but registry uses " + *digest->csrf_header});
    }
  }
  if (digest->key_ids && signing_key_id &&
      std::find(digest->key_ids->begin(), digest->key_ids->end(), *signing_key_id) == digest->key_ids->end()) {
    report.policy_drift.push_back(
        {DriftKind::KeyId, "signature key " + *signing_key_id + " is not pinned; pinned " + join(*digest->key_ids)});
  }
  return report;
}

nlohmann::ordered_json to_json(const DriftReport& report) {
  nlohmann::ordered_json j;
  j["ok"] = report.ok();
  j["missing_selectors"] = report.missing_selectors;
  j["policy_drift"] = nlohmann::ordered_json::array();
  for (const auto& d : report.policy_drift) j["policy_drift"].push_back({{"kind", to_string(d.kind)}, {"detail", d.detail}});
  j["multi_match"] = report.multi_match;
  return j;
}

DriftReport drift_report_from_json(const nlohmann::json& j) {
  try {
    DriftReport r;
    r.missing_selectors = j.at("missing_selectors").get<std::vector<std::string>>();
    r.multi_match = j.at("multi_match").get<std::vector<std::string>>();
    for (const auto& d : j.at("policy_drift")) {
      const auto kind = d.at("kind").get<std::string>();
      DriftKind k;
      if (kind == "scope") {
        k = DriftKind::Scope;
      } else if (kind == "csrf-header") {
        k = DriftKind::CsrfHeader;
      } else if (kind == "key-id") {
        k = DriftKind::KeyId;
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown drift kind \"" + kind + "\"");
      }
      r.policy_drift.push_back({k, d.at("detail").get<std::string>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("not a drift report: ") + e.what());
  }
}

std::string to_text(const DriftReport& report) {
  std::string out;
  for (const auto& s : report.missing_selectors) out += "missing selector " + s + "\n";
  for (const auto& d : report.policy_drift) out += "drift " + std::string(to_string(d.kind)) + ": " + d.detail + "\n";
  for (const auto& s : report.multi_match) out += "warning: selector " + s + " matches more than one element\n";
  out += report.ok() ? "no drift\n" : "drift detected\n";
  return out;
}

nlohmann::ordered_json to_json(const ScanSuggestion& suggestion) {
  nlohmann::ordered_json j;
  j["document"] = nlohmann::ordered_json::parse(serialize_document(suggestion.document));
  j["confidence_notes"] = nlohmann::ordered_json::array();
  for (const auto& n : suggestion.confidence_notes) {
    j["confidence_notes"].push_back({{"selector", n.selector}, {"note", n.note}});
  }
  return j;
}

}  // namespace wmcp::author
