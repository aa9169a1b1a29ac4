#include "wmcp/author.hpp"

namespace wmcp::author {

std::string_view to_string(Severity severity) noexcept { return severity == Severity::Error ? "error" : "warning"; }

const std::vector<LintRule>& lint_catalog() {
  static const std::vector<LintRule> kRules = {
      // decoding
      {"malformed-json", Severity::Error, "document is not well-formed JSON"},
      {"duplicate-key", Severity::Error, "an object repeats a key"},
      {"unknown-key", Severity::Error, "an object has a key outside the schema"},
      {"missing-field", Severity::Error, "a required field is absent"},
      {"type-mismatch", Severity::Error, "a field has the wrong JSON type"},
      // document
      {"unsupported-version", Severity::Error, "version is not 0.1 or 0.2"},
      {"text-encoding", Severity::Error, "free text is not valid UTF-8"},
      {"context-length", Severity::Error, "context exceeds 160 characters"},
      {"context-markup", Severity::Error, "context contains markup, markdown or control characters"},
      // elements
      {"selector-empty", Severity::Error, "selector is empty"},
      {"selector-syntax", Severity::Error, "selector does not parse"},
      {"duplicate-selector", Severity::Error, "two elements share a selector"},
      {"role-vocabulary", Severity::Error, "role is not category.subtype with a known category"},
      {"name-syntax", Severity::Error, "name is not an uppercase identifier"},
      {"desc-length", Severity::Error, "description exceeds 160 characters"},
      {"desc-markup", Severity::Error, "description contains markup, markdown or control characters"},
      {"desc-missing", Severity::Warning, "element has no description"},
      // actions
      {"action-kind", Severity::Error, "action kind is not an HTTP verb"},
      {"endpoint-syntax", Severity::Error, "endpoint is neither a URL reference nor @NAME"},
      {"unresolved-symbol", Severity::Error, "symbolic endpoint has no security.endpoints entry"},
      {"csrf-tag-syntax", Severity::Error, "csrf_tag is not $NAME"},
      {"csrf-policy-missing", Severity::Error, "action has a csrf_tag but the document has no csrf policy"},
      {"jwe-compact-form", Severity::Error, "payload_jwe is not a compact JWE"},
      {"unshielded-endpoint", Severity::Warning, "literal URL endpoint in a document that has a security block"},
      // security
      {"policy-key-syntax", Severity::Error, "endpoint policy key is not @NAME"},
      {"expires-positive", Severity::Error, "expires is not a positive number of seconds"},
      {"scope-syntax", Severity::Error, "scope is not lowercase domain:verb"},
      {"tokenised-no-scopes", Severity::Error, "tokenised endpoint lists no scopes"},
      {"rpm-positive", Severity::Error, "rpm is not positive"},
      {"burst-positive", Severity::Error, "burst is not positive"},
      {"burst-exceeds-rpm", Severity::Error, "burst is larger than rpm"},
      {"csrf-header-syntax", Severity::Error, "csrf header_name is not an HTTP field name"},
      {"csrf-field-syntax", Severity::Error, "csrf token_field is not a usable form field name"},
      {"csrf-mode", Severity::Error, "csrf mode is not double-submit or synchroniser"},
  };
  return kRules;
}

const LintRule* find_rule(std::string_view id) noexcept {
  for (const auto& r : lint_catalog()) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string catalog_text() {
  std::string out = "# wmcp lint rules, catalog version " + std::string(kCatalogVersion) + "\n";
  out += "# id severity summary\n";
  for (const auto& r : lint_catalog()) {
    out += std::string(r.id) + " " + std::string(to_string(r.severity)) + " " + std::string(r.summary) + "\n";
  }
  return out;
}

bool LintReport::has(std::string_view rule) const noexcept {
  for (const auto* list : {&errors, &warnings}) {
    for (const auto& f : *list) {
      if (f.rule == rule) return true;
    }
  }
  return false;
}

namespace {

void add(LintReport& report, std::string rule, std::string path, std::string message) {
  const auto* r = find_rule(rule);
  auto& list = r && r->severity == Severity::Warning ? report.warnings : report.errors;
  list.push_back({std::move(rule), std::move(path), std::move(message)});
}

}  // namespace

LintReport lint_document(std::string_view bytes) {
  LintReport report;
  WmcpDocument doc;
  try {
    doc = decode_document(bytes);
  } catch (const SchemaError& e) {
    add(report, e.rule(), e.path(), e.what());
    return report;
  } catch (const Error& e) {
    add(report, e.code() == ErrorCode::MalformedJson ? "malformed-json" : "type-mismatch", e.path(), e.what());
    return report;
  }

  for (auto& v : validate_document(doc).violations) add(report, std::move(v.rule), std::move(v.path), std::move(v.message));

  for (std::size_t i = 0; i < doc.elements.size(); ++i) {
    const auto& e = doc.elements[i];
    const auto path = ".elements[" + std::to_string(i) + "]";
    if (!e.description) add(report, "desc-missing", path, "element \"" + e.selector + "\" has no description");
    if (e.action && !e.action->is_symbolic() && doc.security) {
      add(report, "unshielded-endpoint", path + ".action.endpoint",
          "literal endpoint \"" + e.action->endpoint + "\" bypasses the security block");
    }
  }
  if (doc.security) {
    for (const auto& [name, policy] : doc.security->endpoints) {
      if (policy.tokenised && policy.scopes.empty()) {
        add(report, "tokenised-no-scopes", ".security.endpoints." + name + ".scopes",
            "tokenised endpoint " + name + " requires at least one scope");
      }
    }
  }
  return report;
}

namespace {

nlohmann::ordered_json findings_json(const std::vector<Finding>& list) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& f : list) out.push_back({{"rule", f.rule}, {"path", f.path}, {"message", f.message}});
  return out;
}

std::vector<Finding> findings_from(const nlohmann::json& j) {
  std::vector<Finding> out;
  for (const auto& f : j) {
    out.push_back({f.at("rule").get<std::string>(), f.at("path").get<std::string>(), f.at("message").get<std::string>()});
  }
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const LintReport& report) {
  nlohmann::ordered_json j;
  j["ok"] = report.ok();
  j["errors"] = findings_json(report.errors);
  j["warnings"] = findings_json(report.warnings);
  return j;
}

LintReport lint_report_from_json(const nlohmann::json& j) {
  try {
    return {findings_from(j.at("errors")), findings_from(j.at("warnings"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("not a lint report: ") + e.what());
  }
}

std::string to_text(const LintReport& report) {
  std::string out;
  for (const auto& [list, label] : {std::pair{&report.errors, "error"}, std::pair{&report.warnings, "warning"}}) {
    for (const auto& f : *list) {
      out += std::string(label) + " " + f.rule + " " + (f.path.empty() ? "." : f.path) + ": " + f.message + "\n";
    }
  }
  out += std::to_string(report.errors.size()) + " error(s), " + std::to_string(report.warnings.size()) +
         " warning(s)\n";
  return out;
}

}  // namespace wmcp::author
