#include <json.hpp>

#include "wmcp/codec.hpp"
#include "wmcp/resolver.hpp"
#include "wmcp/text.hpp"

namespace wmcp::resolver {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kHeader = R"({"alg":"EdDSA","typ":"JWT"})";

[[noreturn]] void malformed(const std::string& message) { throw Error(ErrorCode::MalformedToken, message); }

ojson decode_json_segment(std::string_view segment, std::string_view what) {
  const auto raw = codec::base64url_decode(segment);
  if (!raw) malformed(std::string(what) + " is not base64url");
  try {
    auto j = ojson::parse(raw->begin(), raw->end());
    if (!j.is_object()) malformed(std::string(what) + " is not a JSON object");
    return j;
  } catch (const ojson::exception&) {
    malformed(std::string(what) + " is not JSON");
  }
}

std::int64_t integer_claim(const ojson& claims, const char* key) {
  const auto it = claims.find(key);
  if (it == claims.end() || !it->is_number_integer()) malformed(std::string("claim \"") + key + "\" is not an integer");
  return it->get<std::int64_t>();
}

}  // namespace

bool TokenClaims::has_scope(std::string_view scope) const noexcept {
  for (const auto& s : scopes) {
    if (s == scope) return true;
  }
  return false;
}

AgentToken issue_agent_token(std::string subject, std::vector<std::string> scopes, std::int64_t ttl,
                             const crypto::Seed& signing_seed, std::int64_t now) {
  if (ttl <= 0) throw Error(ErrorCode::InvalidArgument, "ttl must be positive");
  if (subject.empty()) throw Error(ErrorCode::InvalidArgument, "subject must not be empty");
  for (const auto& s : scopes) {
    if (!text::is_scope(s)) throw Error(ErrorCode::InvalidScopeSyntax, "scope \"" + s + "\" is not \"domain:verb\"");
  }
  AgentToken token;
  token.claims = {std::move(subject), std::move(scopes), now, now + ttl};
  const ojson claims = {{"sub", token.claims.subject},
                        {"scopes", token.claims.scopes},
                        {"iat", token.claims.issued_at},
                        {"exp", token.claims.expires_at}};
  const auto signing_input =
      codec::base64url_encode(as_bytes(kHeader)) + "." + codec::base64url_encode(as_bytes(claims.dump()));
  const auto signature = crypto::ed25519_sign(signing_seed, as_bytes(signing_input));
  token.compact = signing_input + "." + codec::base64url_encode(signature);
  return token;
}

AgentToken issue_agent_token(std::string subject, std::vector<std::string> scopes, std::int64_t ttl,
                             std::span<const std::uint8_t> signing_seed, std::int64_t now) {
  return issue_agent_token(std::move(subject), std::move(scopes), ttl, crypto::fixed_key<32>(signing_seed), now);
}

AgentToken issue_endpoint_token(std::string subject, std::vector<std::string> scopes, std::int64_t ttl,
                                const crypto::Seed& signing_seed, std::int64_t now, const EndpointPolicy& policy) {
  if (ttl > policy.expires) {
    throw Error(ErrorCode::TtlExceedsPolicy,
                "ttl " + std::to_string(ttl) + "s exceeds the endpoint bound of " + std::to_string(policy.expires) + "s");
  }
  return issue_agent_token(std::move(subject), std::move(scopes), ttl, signing_seed, now);
}

TokenClaims verify_agent_token(std::string_view compact, const crypto::PublicKey& key) {
  const auto first = compact.find('.');
  const auto last = compact.rfind('.');
  if (first == std::string_view::npos || first == last) malformed("expected three dot-separated segments");
  const auto header_seg = compact.substr(0, first);
  const auto claims_seg = compact.substr(first + 1, last - first - 1);
  const auto sig_seg = compact.substr(last + 1);
  if (claims_seg.find('.') != std::string_view::npos) malformed("expected three dot-separated segments");

  const auto header = decode_json_segment(header_seg, "header");
  if (header.value("alg", "") != "EdDSA") malformed("header alg must be EdDSA");
  const auto sig = codec::base64url_decode(sig_seg);
  if (!sig || sig->size() != crypto::Signature{}.size()) malformed("signature segment is not 64 bytes");
  crypto::Signature signature{};
  std::copy(sig->begin(), sig->end(), signature.begin());
  if (!crypto::ed25519_verify(key, as_bytes(compact.substr(0, last)), signature)) {
    throw Error(ErrorCode::SignatureInvalid, "agent token signature does not verify");
  }

  const auto claims = decode_json_segment(claims_seg, "claims");
  TokenClaims out;
  const auto sub = claims.find("sub");
  if (sub == claims.end() || !sub->is_string()) malformed("claim \"sub\" is not a string");
  out.subject = sub->get<std::string>();
  const auto scopes = claims.find("scopes");
  if (scopes == claims.end() || !scopes->is_array()) malformed("claim \"scopes\" is not an array");
  for (const auto& s : *scopes) {
    if (!s.is_string()) malformed("scope is not a string");
    out.scopes.push_back(s.get<std::string>());
  }
  out.issued_at = integer_claim(claims, "iat");
  out.expires_at = integer_claim(claims, "exp");
  if (out.expires_at <= out.issued_at) malformed("exp must be after iat");
  return out;
}

}  // namespace wmcp::resolver
