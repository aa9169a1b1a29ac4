#include <json.hpp>

#include "wmcp/resolver.hpp"
#include "wmcp/text.hpp"

namespace wmcp::resolver {
namespace {

using json = nlohmann::json;

[[noreturn]] void malformed(const std::string& message) { throw Error(ErrorCode::MalformedRegistry, message); }

template <typename T>
T get(const json& obj, const char* key, const std::string& symbol) {
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(symbol + ": missing \"" + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    malformed(symbol + ": \"" + key + "\" has the wrong type");
  }
}

}  // namespace

EndpointRegistry EndpointRegistry::load(std::string_view text, const crypto::PublicKey& token_key) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    malformed(std::string("registry is not JSON: ") + e.what());
  }
  if (!root.is_object()) malformed("registry must be a JSON object");
  EndpointRegistry registry(token_key);
  for (const auto& [symbol, value] : root.items()) {
    if (!value.is_object()) malformed(symbol + ": entry must be an object");
    for (const auto& [key, _] : value.items()) {
      if (key != "url" && key != "tokenised" && key != "expires" && key != "scopes" && key != "rpm" && key != "burst") {
        malformed(symbol + ": unknown key \"" + key + "\"");
      }
    }
    RegistryEntry entry;
    entry.url = get<std::string>(value, "url", symbol);
    entry.policy.tokenised = get<bool>(value, "tokenised", symbol);
    const auto& expires = value.find("expires");
    if (expires == value.end() || !expires->is_number_integer()) malformed(symbol + ": \"expires\" must be an integer");
    entry.policy.expires = expires->get<std::int64_t>();
    if (value.contains("scopes")) entry.policy.scopes = get<std::vector<std::string>>(value, "scopes", symbol);
    for (const char* key : {"rpm", "burst"}) {
      const auto it = value.find(key);
      if (it == value.end()) continue;
      if (!it->is_number_integer()) malformed(symbol + ": \"" + key + "\" must be an integer");
      (std::string_view(key) == "rpm" ? entry.policy.rpm : entry.policy.burst) = it->get<std::int64_t>();
    }
    registry.add(symbol, std::move(entry));
  }
  return registry;
}

void EndpointRegistry::add(std::string symbol, RegistryEntry entry) {
  if (!is_symbolic_endpoint(symbol)) malformed("\"" + symbol + "\" is not '@' followed by an uppercase identifier");
  if (entry.url.empty()) malformed(symbol + ": url must not be empty");
  const auto& p = entry.policy;
  if (p.expires <= 0) malformed(symbol + ": expires must be positive");
  for (const auto& s : p.scopes) {
    if (!text::is_scope(s)) malformed(symbol + ": scope \"" + s + "\" is not \"domain:verb\"");
  }
  if ((p.rpm && *p.rpm <= 0) || (p.burst && *p.burst <= 0)) malformed(symbol + ": rpm and burst must be positive");
  if (p.rpm && p.burst && *p.burst > *p.rpm) malformed(symbol + ": burst exceeds rpm");
  if (!entries_.emplace(std::move(symbol), std::move(entry)).second) malformed("duplicate registry entry");
}

const RegistryEntry* EndpointRegistry::find(std::string_view symbol) const noexcept {
  const auto it = entries_.find(symbol);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::string& resolve_endpoint(std::string_view symbol, std::string_view token, const EndpointRegistry& registry,
                                    std::int64_t now) {
  const auto* entry = registry.find(symbol);
  if (entry == nullptr) throw Error(ErrorCode::UnknownSymbol, "\"" + std::string(symbol) + "\" is not registered");
  const auto claims = verify_agent_token(token, registry.token_key());
  if (now >= claims.expires_at) {
    throw Error(ErrorCode::TokenExpired, "token expired at " + std::to_string(claims.expires_at));
  }
  for (const auto& required : entry->policy.scopes) {
    if (!claims.has_scope(required)) {
      throw Error(ErrorCode::Forbidden, "token lacks scope \"" + required + "\" for " + std::string(symbol));
    }
  }
  return entry->url;
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSymbol: return 404;
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::TokenExpired:
    case ErrorCode::SignatureInvalid:
    case ErrorCode::MalformedToken: return 401;
    default: return 400;
  }
}

}  // namespace wmcp::resolver
