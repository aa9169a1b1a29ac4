#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmcp/document.hpp"

namespace wmcp::author {

struct ConfidenceNote {
  std::string selector;
  std::string note;

  bool operator==(const ConfidenceNote&) const = default;
};

struct ScanSuggestion {
  WmcpDocument document;  // draft: no security block
  std::vector<ConfidenceNote> confidence_notes;
};

// One descriptor per interactive element in document order. A form is
// represented by its submit button, which carries the draft action; forms
// without one get a region.form descriptor. Hidden inputs are skipped.
// Throws Error(UnparseableHtml).
ScanSuggestion scan_html(std::string_view html);

enum class Severity { Error, Warning };
std::string_view to_string(Severity severity) noexcept;

struct LintRule {
  std::string_view id;
  Severity severity;
  std::string_view summary;
};

inline constexpr std::string_view kCatalogVersion = "1";

// Every rule id a LintReport can contain.
const std::vector<LintRule>& lint_catalog();
const LintRule* find_rule(std::string_view id) noexcept;
// The published catalog file (docs/lint-rules.txt).
std::string catalog_text();

struct Finding {
  std::string rule;
  std::string path;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct LintReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool ok() const noexcept { return errors.empty(); }
  bool has(std::string_view rule) const noexcept;
  bool operator==(const LintReport&) const = default;
};

// Never throws on bad input: a document that does not decode yields a single
// error entry.
LintReport lint_document(std::string_view bytes);

// What the endpoint registry and pin file currently say. Absent parts are
// not compared.
struct RegistryDigest {
  std::optional<std::map<std::string, std::vector<std::string>>> scopes;  // symbol -> scopes
  std::optional<std::string> csrf_header;
  std::optional<std::vector<std::string>> key_ids;  // pinned key ids

  // {"scopes": {"@NAME": [...]}, "csrf_header": "...", "key_ids": [...]}.
  // Throws Error(InvalidArgument).
  static RegistryDigest parse(std::string_view json);
};

enum class DriftKind { Scope, CsrfHeader, KeyId };
std::string_view to_string(DriftKind kind) noexcept;

struct PolicyDrift {
  DriftKind kind;
  std::string detail;

  bool operator==(const PolicyDrift&) const = default;
};

struct DriftReport {
  std::vector<std::string> missing_selectors;
  std::vector<PolicyDrift> policy_drift;
  std::vector<std::string> multi_match;  // warnings only

  bool ok() const noexcept { return missing_selectors.empty() && policy_drift.empty(); }
  bool operator==(const DriftReport&) const = default;
};

// `signing_key_id` is the key id of the document's detached signature, when
// known; it is checked against the digest's pinned ids.
// Throws Error(UnparseableHtml).
DriftReport check_drift(const WmcpDocument& doc, std::string_view html, const std::optional<RegistryDigest>& digest,
                        const std::optional<std::string>& signing_key_id = std::nullopt);

// Machine-readable report forms. from_json throws Error(InvalidArgument).
nlohmann::ordered_json to_json(const LintReport& report);
nlohmann::ordered_json to_json(const DriftReport& report);
nlohmann::ordered_json to_json(const ScanSuggestion& suggestion);
LintReport lint_report_from_json(const nlohmann::json& j);
DriftReport drift_report_from_json(const nlohmann::json& j);

// Human-readable forms, one finding per line.
std::string to_text(const LintReport& report);
std::string to_text(const DriftReport& report);

}  // namespace wmcp::author
