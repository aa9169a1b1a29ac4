#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmcp/crypto.hpp"
#include "wmcp/document.hpp"

namespace wmcp::resolver {

// Reserved registry entry through which JWE keys are delivered.
inline constexpr std::string_view kKeysSymbol = "@WMCP_KEYS";
inline constexpr std::string_view kKeyScope = "payload:key";
inline constexpr std::string_view kPlaintextScope = "payload:plaintext";

struct TokenClaims {
  std::string subject;
  std::vector<std::string> scopes;
  std::int64_t issued_at = 0;   // unix seconds
  std::int64_t expires_at = 0;  // unix seconds

  bool has_scope(std::string_view scope) const noexcept;
  bool operator==(const TokenClaims&) const = default;
};

struct AgentToken {
  std::string compact;  // header.claims.signature, EdDSA-signed JWT
  TokenClaims claims;
};

// Throws InvalidArgument (ttl <= 0, empty subject), InvalidScopeSyntax or
// BadKeyLength.
AgentToken issue_agent_token(std::string subject, std::vector<std::string> scopes, std::int64_t ttl,
                             std::span<const std::uint8_t> signing_seed, std::int64_t now);
AgentToken issue_agent_token(std::string subject, std::vector<std::string> scopes, std::int64_t ttl,
                             const crypto::Seed& signing_seed, std::int64_t now);
// As above, and also TtlExceedsPolicy when ttl > policy.expires.
AgentToken issue_endpoint_token(std::string subject, std::vector<std::string> scopes, std::int64_t ttl,
                                const crypto::Seed& signing_seed, std::int64_t now, const EndpointPolicy& policy);

// Signature and structure only; expiry is the resolver's business.
// Throws MalformedToken or SignatureInvalid.
TokenClaims verify_agent_token(std::string_view compact, const crypto::PublicKey& key);

struct RegistryEntry {
  std::string url;
  EndpointPolicy policy;

  bool operator==(const RegistryEntry&) const = default;
};

class EndpointRegistry {
 public:
  EndpointRegistry() = default;
  explicit EndpointRegistry(const crypto::PublicKey& token_key) : token_key_(token_key) {}

  // {"@NAME": {"url": "...", "tokenised": true, "expires": N, "scopes": [...],
  //  "rpm": N, "burst": N}}. Throws MalformedRegistry.
  static EndpointRegistry load(std::string_view json, const crypto::PublicKey& token_key);

  // Throws MalformedRegistry for a bad name, URL or policy.
  void add(std::string symbol, RegistryEntry entry);
  const RegistryEntry* find(std::string_view symbol) const noexcept;
  const std::map<std::string, RegistryEntry, std::less<>>& entries() const noexcept { return entries_; }
  const crypto::PublicKey& token_key() const noexcept { return token_key_; }

 private:
  crypto::PublicKey token_key_{};
  std::map<std::string, RegistryEntry, std::less<>> entries_;
};

// Checks, in order: symbol registered (UnknownSymbol), signature
// (MalformedToken/SignatureInvalid), now < expires_at (TokenExpired), token
// scopes cover the policy scopes (Forbidden).
const std::string& resolve_endpoint(std::string_view symbol, std::string_view token, const EndpointRegistry& registry,
                                    std::int64_t now);

// HTTP status for a resolver error: 404, 403 or 401; 400 for anything else.
int http_status(ErrorCode code) noexcept;

using Millis = std::chrono::milliseconds;

struct ThrottleDecision {
  bool proceed = false;
  Millis wait_until{0};  // meaningful only when !proceed

  static ThrottleDecision go() { return {true, Millis{0}}; }
  static ThrottleDecision wait(Millis until) { return {false, until}; }
  bool operator==(const ThrottleDecision&) const = default;
};

// Token bucket: capacity `burst`, refilled at rpm/60 tokens per second, full
// at start. Time is an injected millisecond clock; a clock that goes
// backwards is treated as standing still. Safe for concurrent acquire().
class Throttle {
 public:
  // Throws InvalidArgument unless rpm > 0 and 0 < burst.
  Throttle(std::int64_t rpm, std::optional<std::int64_t> burst, Millis start = Millis{0});
  // Throws InvalidArgument when the policy has no rpm.
  static Throttle from_policy(const EndpointPolicy& policy, Millis start = Millis{0});

  static std::int64_t default_burst(std::int64_t rpm) noexcept;

  ThrottleDecision acquire(Millis now);

  std::int64_t rpm() const noexcept { return rpm_; }
  std::int64_t burst() const noexcept { return burst_; }
  // Whole tokens currently available (after refilling to `now`).
  std::int64_t available(Millis now);

 private:
  void refill(Millis now);

  // One token is kUnit level units; the bucket gains rpm units per ms.
  static constexpr std::int64_t kUnit = 60'000;
  std::mutex mutex_;
  std::int64_t rpm_;
  std::int64_t burst_;
  std::int64_t level_;
  Millis last_;
};

}  // namespace wmcp::resolver
