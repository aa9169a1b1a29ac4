#include <algorithm>
#include <set>

#include "wmcp/document.hpp"
#include "wmcp/selector.hpp"
#include "wmcp/text.hpp"

namespace wmcp {
namespace {

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  void add(std::string path, std::string rule, std::string message) {
    report_.violations.push_back({std::move(path), std::move(rule), std::move(message)});
  }

  // Shared rules for the two free-text fields.
  void text_field(std::string_view value, const std::string& path, std::string_view prefix) {
    const auto length = text::code_point_count(value);
    if (!length) {
      add(path, "text-encoding", "text is not valid UTF-8");
      return;
    }
    if (*length > kMaxTextLength) {
      add(path, std::string(prefix) + "-length",
          "text is " + std::to_string(*length) + " characters; limit is " + std::to_string(kMaxTextLength));
    }
    if (text::has_markup_char(value)) {
      add(path, std::string(prefix) + "-markup", "text contains '<', '>' or backtick");
    } else if (text::has_control(value)) {
      add(path, std::string(prefix) + "-markup", "text contains control characters");
    } else if (text::has_markdown(value)) {
      add(path, std::string(prefix) + "-markup", "text contains markdown formatting");
    }
  }

 private:
  ValidationReport& report_;
};

// Relative or absolute URL reference. A leading '@' or '$' would read as a
// symbolic reference or placeholder.
bool is_literal_endpoint(std::string_view s) noexcept {
  if (s.empty() || s.front() == '@' || s.front() == '$' || text::has_control(s)) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return text::is_ascii_space(c) || std::string_view("<>\"`{}|\\^").find(c) != std::string_view::npos;
  });
}

bool is_form_field_name(std::string_view s) noexcept {
  if (s.empty() || text::has_control(s) || text::has_markup_char(s)) return false;
  for (char c : s) {
    if (text::is_ascii_space(c) || c == '"' || c == '\'' || c == '=' || c == '&') return false;
  }
  return true;
}

void check_action(Checker& check, const ActionSpec& action, const std::string& path,
                  const WmcpDocument& doc) {
  const auto endpoint_path = path + ".endpoint";
  if (action.is_symbolic()) {
    if (!is_symbolic_endpoint(action.endpoint)) {
      check.add(endpoint_path, "endpoint-syntax",
                "symbolic endpoint must be '@' followed by an uppercase identifier");
    } else if (!doc.security || !doc.security->endpoints.contains(action.endpoint)) {
      check.add(endpoint_path, "unresolved-symbol",
                "no security.endpoints entry for \"" + action.endpoint + "\"");
    }
  } else if (!is_literal_endpoint(action.endpoint)) {
    check.add(endpoint_path, "endpoint-syntax", "endpoint is neither a URL reference nor '@NAME'");
  }
  if (action.csrf_tag) {
    if (!is_csrf_tag(*action.csrf_tag)) {
      check.add(path + ".csrf_tag", "csrf-tag-syntax", "csrf_tag must be '$' followed by an uppercase identifier");
    }
    if (!doc.security || !doc.security->csrf) {
      check.add(path + ".csrf_tag", "csrf-policy-missing", "csrf_tag requires a security.csrf policy");
    }
  }
  if (action.payload_jwe && !is_compact_jwe(*action.payload_jwe)) {
    check.add(path + ".payload_jwe", "jwe-compact-form",
              "payload_jwe must be five dot-separated base64url segments");
  }
}

void check_security(Checker& check, const SecurityPolicy& security) {
  for (const auto& [name, policy] : security.endpoints) {
    const auto path = ".security.endpoints." + name;
    if (!is_symbolic_endpoint(name)) {
      check.add(path, "policy-key-syntax", "endpoint policy keys must be '@' followed by an uppercase identifier");
    }
    if (policy.expires <= 0) check.add(path + ".expires", "expires-positive", "expires must be a positive number of seconds");
    for (std::size_t i = 0; i < policy.scopes.size(); ++i) {
      if (!text::is_scope(policy.scopes[i])) {
        check.add(path + ".scopes[" + std::to_string(i) + "]", "scope-syntax",
                  "scope \"" + policy.scopes[i] + "\" is not lowercase \"domain:verb\"");
      }
    }
    if (policy.rpm && *policy.rpm <= 0) check.add(path + ".rpm", "rpm-positive", "rpm must be positive");
    if (policy.burst && *policy.burst <= 0) check.add(path + ".burst", "burst-positive", "burst must be positive");
    if (policy.rpm && policy.burst && *policy.burst > *policy.rpm) {
      check.add(path + ".burst", "burst-exceeds-rpm", "burst must not exceed rpm");
    }
  }
  if (security.csrf) {
    if (!text::is_http_token(security.csrf->header_name)) {
      check.add(".security.csrf.header_name", "csrf-header-syntax", "header_name is not a valid HTTP field name");
    }
    if (!is_form_field_name(security.csrf->token_field)) {
      check.add(".security.csrf.token_field", "csrf-field-syntax", "token_field is not a usable form field name");
    }
  }
}

}  // namespace

bool ValidationReport::has_rule(std::string_view rule) const noexcept {
  for (const auto& v : violations) {
    if (v.rule == rule) return true;
  }
  return false;
}

ErrorCode error_code_for_rule(std::string_view rule) noexcept {
  if (rule == "malformed-json") return ErrorCode::MalformedJson;
  if (rule == "unsupported-version") return ErrorCode::UnsupportedVersion;
  if (rule == "desc-length" || rule == "context-length") return ErrorCode::OversizedDescription;
  if (rule == "desc-markup" || rule == "context-markup") return ErrorCode::MarkupInText;
  return ErrorCode::SchemaViolation;
}

ValidationReport validate_document(const WmcpDocument& doc) {
  ValidationReport report;
  Checker check(report);

  if (doc.version != "0.1" && doc.version != "0.2") {
    check.add(".version", "unsupported-version", "version \"" + doc.version + "\" is not 0.1 or 0.2");
  }
  check.text_field(doc.context, ".context", "context");

  std::set<std::string_view> selectors;
  for (std::size_t i = 0; i < doc.elements.size(); ++i) {
    const auto& e = doc.elements[i];
    const auto path = ".elements[" + std::to_string(i) + "]";
    if (e.selector.empty()) {
      check.add(path + ".selector", "selector-empty", "selector must not be empty");
    } else if (!html::Selector::is_valid(e.selector)) {
      check.add(path + ".selector", "selector-syntax", "selector \"" + e.selector + "\" does not parse");
    }
    if (!e.selector.empty() && !selectors.insert(e.selector).second) {
      check.add(path + ".selector", "duplicate-selector", "selector \"" + e.selector + "\" is used twice");
    }
    if (!is_valid_role(e.role)) {
      check.add(path + ".role", "role-vocabulary",
                "role \"" + e.role + "\" is not category.subtype with a known category");
    }
    if (e.name && !text::is_upper_identifier(*e.name)) {
      check.add(path + ".name", "name-syntax", "name must be uppercase letters, digits and underscores");
    }
    if (e.description) check.text_field(*e.description, path + ".description", "desc");
    if (e.action) check_action(check, *e.action, path + ".action", doc);
  }
  if (doc.security) check_security(check, *doc.security);
  return report;
}

}  // namespace wmcp
