#pragma once

// Reference models shared by the unit tests and the acceptance binary. None of
// them call into the code under test.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmcp/codec.hpp"

namespace wmcp::testing {

// Access decision re-derived from the raw token bytes.
struct OracleRegistry {
  std::map<std::string, std::vector<std::string>> scopes;
};

inline std::string oracle_decide(const std::string& symbol, const std::string& token, bool signed_by_issuer,
                                 const OracleRegistry& reg, std::int64_t now) {
  if (!reg.scopes.contains(symbol)) return "UnknownSymbol";
  if (!signed_by_issuer) return "SignatureInvalid";
  const auto a = token.find('.');
  const auto b = token.find('.', a + 1);
  const auto raw = codec::base64url_decode(token.substr(a + 1, b - a - 1));
  const auto claims = nlohmann::json::parse(raw->begin(), raw->end());
  if (!(now < claims["exp"].get<std::int64_t>())) return "TokenExpired";
  const auto held = claims["scopes"].get<std::vector<std::string>>();
  for (const auto& need : reg.scopes.at(symbol)) {
    if (std::find(held.begin(), held.end(), need) == held.end()) return "Forbidden";
  }
  return "ok";
}

// Literal simulation: a bucket of whole tokens topped up one token at a time at
// the exact instants k*60000/rpm ms.
inline int tick_simulation(std::int64_t rpm, std::int64_t burst, const std::vector<std::int64_t>& calls) {
  std::int64_t tokens = burst;
  std::int64_t credited = 0;  // tokens credited so far
  int granted = 0;
  for (const auto t : calls) {
    const auto earned = t * rpm / 60'000;
    while (credited < earned) {
      ++credited;
      if (tokens < burst) ++tokens;
    }
    if (tokens > 0) {
      --tokens;
      ++granted;
    }
  }
  return granted;
}

// Brute-force discrete-time run of a bucket with capacity `burst` refilled at
// rpm/60000 tokens per millisecond: the clock advances one millisecond at a
// time, and levels are kept in 1/60000 token units so every step is exact.
// `calls` are sorted call instants in ms from a full bucket at t=0.
inline int bucket_simulation(std::int64_t rpm, std::int64_t burst, const std::vector<std::int64_t>& calls) {
  const std::int64_t unit = 60'000;
  std::int64_t level = burst * unit;
  std::int64_t clock = 0;
  int granted = 0;
  for (const auto t : calls) {
    for (; clock < t; ++clock) level = std::min(burst * unit, level + rpm);
    if (level >= unit) {
      level -= unit;
      ++granted;
    }
  }
  return granted;
}

// A login form after `blocks` repeated content blocks.
inline std::string page_with_blocks(int blocks) {
  std::string html = "<!DOCTYPE html><html><head><title>Feed</title></head><body><main>";
  for (int i = 0; i < blocks; ++i) {
    html += "<article class=\"post\"><h2>Update " + std::to_string(i) +
            "</h2><p>Release notes for build " + std::to_string(1000 + i) +
            ": performance fixes, new filters, and a redesigned settings panel.</p></article>";
  }
  html += R"(<form id="f" action="/api/login" method="post"><input id="user" name="username"><input id="pass" )"
          R"(type="password" name="password"><button id="loginBtn" type="submit">Go</button></form></main></body></html>)";
  return html;
}

}  // namespace wmcp::testing
