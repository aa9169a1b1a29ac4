#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmcp/error.hpp"

namespace wmcp {

inline constexpr std::string_view kMediaType = "application/webmcp+json";
inline constexpr std::size_t kMaxTextLength = 160;

enum class HttpVerb { Get, Post, Put, Patch, Delete };
enum class CsrfMode { DoubleSubmit, Synchroniser };

std::string_view to_string(HttpVerb verb) noexcept;
std::optional<HttpVerb> parse_verb(std::string_view s) noexcept;
std::string_view to_string(CsrfMode mode) noexcept;
std::optional<CsrfMode> parse_csrf_mode(std::string_view s) noexcept;

struct ActionSpec {
  HttpVerb kind = HttpVerb::Post;
  std::string endpoint;  // literal URL or '@NAME'
  std::optional<std::string> csrf_tag;
  std::optional<std::string> payload_jwe;

  bool is_symbolic() const noexcept { return !endpoint.empty() && endpoint.front() == '@'; }
  bool operator==(const ActionSpec&) const = default;
};

struct ElementDescriptor {
  std::string selector;
  std::string role;  // "category.subtype"
  std::optional<std::string> name;
  std::optional<std::string> description;
  std::optional<ActionSpec> action;

  std::string_view role_category() const noexcept;
  bool operator==(const ElementDescriptor&) const = default;
};

struct EndpointPolicy {
  bool tokenised = true;
  std::int64_t expires = 0;  // seconds
  std::vector<std::string> scopes;
  std::optional<std::int64_t> rpm;
  std::optional<std::int64_t> burst;

  bool operator==(const EndpointPolicy&) const = default;
};

struct CsrfPolicy {
  std::string token_field;
  std::string header_name;
  CsrfMode mode = CsrfMode::DoubleSubmit;

  bool operator==(const CsrfPolicy&) const = default;
};

struct SecurityPolicy {
  std::map<std::string, EndpointPolicy> endpoints;
  std::optional<CsrfPolicy> csrf;

  bool operator==(const SecurityPolicy&) const = default;
};

struct WmcpDocument {
  std::string version;
  std::string context;
  std::vector<ElementDescriptor> elements;
  std::optional<SecurityPolicy> security;

  bool operator==(const WmcpDocument&) const = default;
};

struct Violation {
  std::string path;
  std::string rule;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has_rule(std::string_view rule) const noexcept;
};

// Document failures carry the lint rule id that produced them.
class SchemaError : public Error {
 public:
  SchemaError(ErrorCode code, std::string rule, const std::string& message, std::string path)
      : Error(code, message, std::move(path)), rule_(std::move(rule)) {}

  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

ErrorCode error_code_for_rule(std::string_view rule) noexcept;

// Structural decode only: JSON well-formedness, duplicate/unknown keys,
// required fields and value types. Throws Error(MalformedJson) or
// Error(SchemaViolation) with the offending path.
WmcpDocument decode_document(std::string_view bytes);

// Every invariant check, including cross-references. Never throws.
ValidationReport validate_document(const WmcpDocument& doc);

// decode + validate. The first violation is raised as the matching error:
// UnsupportedVersion, OversizedDescription, MarkupInText or SchemaViolation.
WmcpDocument parse_document(std::string_view bytes);

// Canonical form: schema key order, two-space indent, trailing newline.
std::string serialize_document(const WmcpDocument& doc);
// The elements array alone in the same canonical form, without a trailing newline.
std::string serialize_elements(const std::vector<ElementDescriptor>& elements);

// Raw content of the single <script type="application/webmcp+json"> block,
// trimmed at the ends. Throws Error(MultipleInlineBlocks) when ambiguous.
std::optional<std::string> extract_inline(std::string_view html);

// ".wmcp" is canonical; ".wmcps", ".wmcpj" and ".wmcpc" are also read.
bool is_sidecar_path(std::string_view path) noexcept;

// Field-level grammar helpers shared with the other modules.
bool is_symbolic_endpoint(std::string_view s) noexcept;  // '@' + [A-Z][A-Z0-9_]*
bool is_csrf_tag(std::string_view s) noexcept;           // '$' + [A-Z][A-Z0-9_]*
bool is_compact_jwe(std::string_view s) noexcept;
bool is_valid_role(std::string_view role) noexcept;

}  // namespace wmcp
