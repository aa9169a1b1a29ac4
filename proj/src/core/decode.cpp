#include <json.hpp>

#include <initializer_list>
#include <limits>
#include <set>

#include "wmcp/document.hpp"
#include "wmcp/text.hpp"

namespace wmcp {
namespace {

using json = nlohmann::json;

[[noreturn]] void schema_fail(std::string rule, const std::string& message, std::string path) {
  throw SchemaError(ErrorCode::SchemaViolation, std::move(rule), message, std::move(path));
}

// Tracks the JSON path during the parser callback so duplicate keys can be
// reported where they occur. nlohmann's DOM silently keeps the last value.
class DuplicateKeyProbe {
 public:
  bool on_event(json::parse_event_t event, const json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        enter_child();
        frames_.push_back(Frame{true, {}, -1, {}});
        break;
      case json::parse_event_t::array_start:
        enter_child();
        frames_.push_back(Frame{false, {}, -1, {}});
        break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        if (!frames_.empty()) frames_.pop_back();
        break;
      case json::parse_event_t::key: {
        auto& top = frames_.back();
        top.key = parsed.get<std::string>();
        if (!top.seen.insert(top.key).second && !duplicate_) {
          duplicate_ = path();
          duplicate_key_ = top.key;
        }
        break;
      }
      case json::parse_event_t::value:
        enter_child();
        break;
    }
    return true;
  }

  const std::optional<std::string>& duplicate() const noexcept { return duplicate_; }
  const std::string& duplicate_key() const noexcept { return duplicate_key_; }

 private:
  struct Frame {
    bool object;
    std::string key;
    long index = -1;
    std::set<std::string> seen;
  };

  void enter_child() {
    if (!frames_.empty() && !frames_.back().object) ++frames_.back().index;
  }

  std::string path() const {
    std::string out;
    for (const auto& f : frames_) {
      out += f.object ? "." + f.key : "[" + std::to_string(f.index) + "]";
    }
    return out;
  }

  std::vector<Frame> frames_;
  std::optional<std::string> duplicate_;
  std::string duplicate_key_;
};

json parse_json(std::string_view bytes) {
  DuplicateKeyProbe probe;
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end(),
                       [&probe](int, json::parse_event_t event, json& parsed) {
                         return probe.on_event(event, parsed);
                       });
  } catch (const json::exception& e) {
    throw SchemaError(ErrorCode::MalformedJson, "malformed-json", e.what(), "");
  }
  if (probe.duplicate()) {
    schema_fail("duplicate-key", "duplicate object key \"" + probe.duplicate_key() + "\"",
                *probe.duplicate());
  }
  return root;
}

const char* type_name(const json& v) { return v.type_name(); }

void expect_object(const json& v, const std::string& path) {
  if (!v.is_object()) schema_fail("type-mismatch", std::string("expected object, got ") + type_name(v), path);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) schema_fail("unknown-key", "unknown key \"" + key + "\"", path + "." + key);
  }
}

const json* field(const json& obj, const std::string& key, const std::string& path, bool required) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) schema_fail("missing-field", "missing required field \"" + key + "\"", path + "." + key);
    return nullptr;
  }
  return &*it;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_fail("type-mismatch", std::string("expected string, got ") + type_name(v), path);
  return v.get<std::string>();
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      schema_fail("type-mismatch", "integer out of range", path);
    }
    return static_cast<std::int64_t>(u);
  }
  if (v.is_number_integer()) return v.get<std::int64_t>();
  schema_fail("type-mismatch", std::string("expected integer, got ") + type_name(v), path);
}

std::string required_string(const json& obj, const std::string& key, const std::string& path) {
  return as_string(*field(obj, key, path, true), path + "." + key);
}

std::optional<std::string> optional_string(const json& obj, const std::string& key, const std::string& path) {
  const auto* v = field(obj, key, path, false);
  if (v == nullptr) return std::nullopt;
  return as_string(*v, path + "." + key);
}

std::optional<std::int64_t> optional_integer(const json& obj, const std::string& key, const std::string& path) {
  const auto* v = field(obj, key, path, false);
  if (v == nullptr) return std::nullopt;
  return as_integer(*v, path + "." + key);
}

ActionSpec decode_action(const json& v, const std::string& path) {
  expect_object(v, path);
  only_keys(v, path, {"kind", "endpoint", "csrf_tag", "payload_jwe"});
  ActionSpec a;
  const auto kind = required_string(v, "kind", path);
  const auto verb = parse_verb(kind);
  if (!verb) schema_fail("action-kind", "unsupported action kind \"" + kind + "\"", path + ".kind");
  a.kind = *verb;
  a.endpoint = required_string(v, "endpoint", path);
  a.csrf_tag = optional_string(v, "csrf_tag", path);
  a.payload_jwe = optional_string(v, "payload_jwe", path);
  return a;
}

ElementDescriptor decode_element(const json& v, const std::string& path) {
  expect_object(v, path);
  only_keys(v, path, {"selector", "role", "name", "description", "action"});
  ElementDescriptor e;
  e.selector = required_string(v, "selector", path);
  e.role = required_string(v, "role", path);
  e.name = optional_string(v, "name", path);
  e.description = optional_string(v, "description", path);
  if (const auto* a = field(v, "action", path, false)) e.action = decode_action(*a, path + ".action");
  return e;
}

EndpointPolicy decode_endpoint_policy(const json& v, const std::string& path) {
  expect_object(v, path);
  only_keys(v, path, {"tokenised", "expires", "scopes", "rpm", "burst"});
  EndpointPolicy p;
  const auto& tokenised = *field(v, "tokenised", path, true);
  if (!tokenised.is_boolean()) {
    schema_fail("type-mismatch", std::string("expected boolean, got ") + type_name(tokenised),
                path + ".tokenised");
  }
  p.tokenised = tokenised.get<bool>();
  p.expires = as_integer(*field(v, "expires", path, true), path + ".expires");
  if (const auto* scopes = field(v, "scopes", path, false)) {
    if (!scopes->is_array()) {
      schema_fail("type-mismatch", std::string("expected array, got ") + type_name(*scopes), path + ".scopes");
    }
    for (std::size_t i = 0; i < scopes->size(); ++i) {
      p.scopes.push_back(as_string((*scopes)[i], path + ".scopes[" + std::to_string(i) + "]"));
    }
  }
  p.rpm = optional_integer(v, "rpm", path);
  p.burst = optional_integer(v, "burst", path);
  return p;
}

CsrfPolicy decode_csrf(const json& v, const std::string& path) {
  expect_object(v, path);
  only_keys(v, path, {"token_field", "header_name", "mode"});
  CsrfPolicy c;
  c.token_field = required_string(v, "token_field", path);
  c.header_name = required_string(v, "header_name", path);
  const auto mode = required_string(v, "mode", path);
  const auto parsed = parse_csrf_mode(mode);
  if (!parsed) schema_fail("csrf-mode", "unsupported csrf mode \"" + mode + "\"", path + ".mode");
  c.mode = *parsed;
  return c;
}

SecurityPolicy decode_security(const json& v, const std::string& path) {
  expect_object(v, path);
  only_keys(v, path, {"endpoints", "csrf"});
  SecurityPolicy s;
  const auto& endpoints = *field(v, "endpoints", path, true);
  expect_object(endpoints, path + ".endpoints");
  for (const auto& [name, policy] : endpoints.items()) {
    s.endpoints.emplace(name, decode_endpoint_policy(policy, path + ".endpoints." + name));
  }
  if (const auto* c = field(v, "csrf", path, false)) s.csrf = decode_csrf(*c, path + ".csrf");
  return s;
}

}  // namespace

WmcpDocument decode_document(std::string_view bytes) {
  const json root = parse_json(bytes);
  expect_object(root, "");
  only_keys(root, "", {"version", "context", "elements", "security"});
  WmcpDocument doc;
  doc.version = required_string(root, "version", "");
  doc.context = required_string(root, "context", "");
  const auto& elements = *field(root, "elements", "", true);
  if (!elements.is_array()) {
    schema_fail("type-mismatch", std::string("expected array, got ") + type_name(elements), ".elements");
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    doc.elements.push_back(decode_element(elements[i], ".elements[" + std::to_string(i) + "]"));
  }
  if (const auto* s = field(root, "security", "", false)) doc.security = decode_security(*s, ".security");
  return doc;
}

WmcpDocument parse_document(std::string_view bytes) {
  auto doc = decode_document(bytes);
  const auto report = validate_document(doc);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw SchemaError(error_code_for_rule(v.rule), v.rule, v.message, v.path);
  }
  return doc;
}

}  // namespace wmcp
