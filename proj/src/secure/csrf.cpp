#include <algorithm>
#include <json.hpp>

#include "wmcp/codec.hpp"
#include "wmcp/html.hpp"
#include "wmcp/secure.hpp"
#include "wmcp/text.hpp"

namespace wmcp::secure {
namespace {

// Collects the distinct candidate values from one kind of source.
void collect(std::optional<std::string>& slot, const std::string& value, std::string_view what) {
  if (value.empty() || text::has_control(value)) return;
  if (slot && *slot != value) {
    throw Error(ErrorCode::AmbiguousToken, "two " + std::string(what) + " sources disagree on the CSRF token");
  }
  slot = value;
}

template <typename Pairs>
auto find_pair(Pairs& pairs, std::string_view name, bool case_insensitive) {
  return std::find_if(pairs.begin(), pairs.end(), [&](const auto& kv) {
    return case_insensitive ? text::iequals(kv.first, name) : kv.first == name;
  });
}

}  // namespace

std::string_view to_string(TokenSource source) noexcept {
  return source == TokenSource::MetaTag ? "meta-tag" : "hidden-input";
}

CsrfToken extract_csrf_token(std::string_view html, const CsrfPolicy& policy) {
  std::optional<std::string> meta;
  std::optional<std::string> hidden;
  for (const auto& t : html::tokenize(html)) {
    if (t.kind != html::Token::Kind::StartTag) continue;
    const auto* name = t.attr("name");
    if (name == nullptr || *name != policy.token_field) continue;
    if (t.name == "meta") {
      const auto* value = t.attr("value");
      if (value == nullptr) value = t.attr("content");
      if (value != nullptr) collect(meta, *value, "meta");
    } else if (t.name == "input") {
      const auto* type = t.attr("type");
      const auto* value = t.attr("value");
      if (type != nullptr && text::iequals(*type, "hidden") && value != nullptr) collect(hidden, *value, "hidden input");
    }
  }
  if (meta && hidden && *meta != *hidden) {
    throw Error(ErrorCode::AmbiguousToken, "meta tag and hidden input carry different CSRF tokens");
  }
  if (meta) return {*meta, TokenSource::MetaTag};
  if (hidden) return {*hidden, TokenSource::HiddenInput};
  throw Error(ErrorCode::TokenNotFound, "no meta tag or hidden input named \"" + policy.token_field + "\"");
}

const std::string* ActionRequest::header(std::string_view name) const noexcept {
  const auto it = find_pair(headers, name, true);
  return it == headers.end() ? nullptr : &it->second;
}

const std::string* ActionRequest::field(std::string_view name) const noexcept {
  const auto it = find_pair(body, name, false);
  return it == body.end() ? nullptr : &it->second;
}

void ActionRequest::set_header(std::string_view name, std::string value) {
  const auto it = find_pair(headers, name, true);
  if (it == headers.end()) {
    headers.emplace_back(std::string(name), std::move(value));
  } else {
    it->second = std::move(value);
  }
}

void ActionRequest::set_field(std::string_view name, std::string value) {
  const auto it = find_pair(body, name, false);
  if (it == body.end()) {
    body.emplace_back(std::string(name), std::move(value));
  } else {
    it->second = std::move(value);
  }
}

std::string ActionRequest::content_type() const {
  return encoding == BodyEncoding::Json ? "application/json" : "application/x-www-form-urlencoded";
}

std::string ActionRequest::encoded_body() const {
  if (encoding == BodyEncoding::Json) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : body) j[k] = v;
    return j.dump();
  }
  std::string out;
  for (const auto& [k, v] : body) {
    if (!out.empty()) out += '&';
    out += codec::form_encode(k) + "=" + codec::form_encode(v);
  }
  return out;
}

ActionRequest apply_csrf(ActionRequest request, const CsrfToken& token, const CsrfPolicy& policy) {
  if (policy.mode == CsrfMode::DoubleSubmit) request.set_header(policy.header_name, token.value);
  request.set_field(policy.token_field, token.value);
  return request;
}

}  // namespace wmcp::secure
