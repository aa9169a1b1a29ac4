#include "wmcp/document.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>

#include "wmcp/codec.hpp"
#include "wmcp/html.hpp"
#include "wmcp/text.hpp"

namespace wmcp {

std::string_view to_string(HttpVerb verb) noexcept {
  switch (verb) {
    case HttpVerb::Get: return "GET";
    case HttpVerb::Post: return "POST";
    case HttpVerb::Put: return "PUT";
    case HttpVerb::Patch: return "PATCH";
    case HttpVerb::Delete: return "DELETE";
  }
  return "POST";
}

std::optional<HttpVerb> parse_verb(std::string_view s) noexcept {
  for (auto v : {HttpVerb::Get, HttpVerb::Post, HttpVerb::Put, HttpVerb::Patch, HttpVerb::Delete}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string_view to_string(CsrfMode mode) noexcept {
  return mode == CsrfMode::DoubleSubmit ? "double-submit" : "synchroniser";
}

std::optional<CsrfMode> parse_csrf_mode(std::string_view s) noexcept {
  if (s == "double-submit") return CsrfMode::DoubleSubmit;
  if (s == "synchroniser") return CsrfMode::Synchroniser;
  return std::nullopt;
}

std::string_view ElementDescriptor::role_category() const noexcept {
  const auto dot = role.find('.');
  return dot == std::string::npos ? std::string_view(role) : std::string_view(role).substr(0, dot);
}

bool is_symbolic_endpoint(std::string_view s) noexcept {
  return s.size() > 1 && s.front() == '@' && text::is_upper_identifier(s.substr(1));
}

bool is_csrf_tag(std::string_view s) noexcept {
  return s.size() > 1 && s.front() == '$' && text::is_upper_identifier(s.substr(1));
}

bool is_compact_jwe(std::string_view s) noexcept {
  std::array<std::string_view, 5> parts;
  std::size_t n = 0;
  std::size_t start = 0;
  for (;;) {
    const auto dot = s.find('.', start);
    if (n == parts.size()) return false;
    parts[n++] = s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (n != 5) return false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    // Direct key agreement leaves the encrypted-key segment empty.
    if (parts[i].empty() && i != 1) return false;
    if (!codec::is_base64url(parts[i])) return false;
  }
  return true;
}

bool is_valid_role(std::string_view role) noexcept {
  static constexpr std::array<std::string_view, 6> kCategories{"input", "button", "link",
                                                               "select", "form", "region"};
  const auto dot = role.find('.');
  if (dot == std::string_view::npos) return false;
  const auto category = role.substr(0, dot);
  const auto subtype = role.substr(dot + 1);
  if (std::find(kCategories.begin(), kCategories.end(), category) == kCategories.end()) return false;
  if (subtype.empty() || subtype.front() < 'a' || subtype.front() > 'z') return false;
  return std::all_of(subtype.begin(), subtype.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

namespace {

nlohmann::ordered_json element_json(const ElementDescriptor& e) {
  nlohmann::ordered_json el;
  el["selector"] = e.selector;
  el["role"] = e.role;
  if (e.name) el["name"] = *e.name;
  if (e.description) el["description"] = *e.description;
  if (e.action) {
    nlohmann::ordered_json a;
    a["kind"] = std::string(to_string(e.action->kind));
    a["endpoint"] = e.action->endpoint;
    if (e.action->csrf_tag) a["csrf_tag"] = *e.action->csrf_tag;
    if (e.action->payload_jwe) a["payload_jwe"] = *e.action->payload_jwe;
    el["action"] = std::move(a);
  }
  return el;
}

nlohmann::ordered_json elements_json(const std::vector<ElementDescriptor>& elements) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : elements) arr.push_back(element_json(e));
  return arr;
}

}  // namespace

std::string serialize_elements(const std::vector<ElementDescriptor>& elements) {
  return elements_json(elements).dump(2);
}

std::string serialize_document(const WmcpDocument& doc) {
  using ojson = nlohmann::ordered_json;
  ojson root;
  root["version"] = doc.version;
  root["context"] = doc.context;
  root["elements"] = elements_json(doc.elements);
  if (doc.security) {
    ojson sec;
    sec["endpoints"] = ojson::object();
    for (const auto& [name, p] : doc.security->endpoints) {
      ojson ep;
      ep["tokenised"] = p.tokenised;
      ep["expires"] = p.expires;
      ep["scopes"] = p.scopes;
      if (p.rpm) ep["rpm"] = *p.rpm;
      if (p.burst) ep["burst"] = *p.burst;
      sec["endpoints"][name] = std::move(ep);
    }
    if (doc.security->csrf) {
      const auto& c = *doc.security->csrf;
      sec["csrf"] = {{"token_field", c.token_field},
                     {"header_name", c.header_name},
                     {"mode", std::string(to_string(c.mode))}};
    }
    root["security"] = std::move(sec);
  }
  return root.dump(2) + "\n";
}

std::optional<std::string> extract_inline(std::string_view html_bytes) {
  const auto tokens = html::tokenize(html_bytes);
  std::optional<std::string> found;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind != html::Token::Kind::StartTag || t.name != "script") continue;
    const auto* type = t.attr("type");
    if (type == nullptr || *type != kMediaType) continue;
    if (found) throw Error(ErrorCode::MultipleInlineBlocks, "more than one inline webMCP script block");
    std::string_view content;
    if (!t.self_closing && i + 1 < tokens.size() && tokens[i + 1].kind == html::Token::Kind::Text) {
      content = tokens[i + 1].text;
    }
    found = std::string(text::trim(content));
  }
  return found;
}

bool is_sidecar_path(std::string_view path) noexcept {
  for (std::string_view ext : {".wmcp", ".wmcps", ".wmcpj", ".wmcpc"}) {
    if (path.size() > ext.size() && path.ends_with(ext)) return true;
  }
  return false;
}

}  // namespace wmcp
