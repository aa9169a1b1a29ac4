#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmcp {

using Bytes = std::vector<std::uint8_t>;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace wmcp

namespace wmcp::codec {

// Standard alphabet with '=' padding.
std::string base64_encode(std::span<const std::uint8_t> data);
std::optional<Bytes> base64_decode(std::string_view text);

// URL-safe alphabet, unpadded. Decoding rejects padding and foreign characters.
std::string base64url_encode(std::span<const std::uint8_t> data);
std::optional<Bytes> base64url_decode(std::string_view text);
bool is_base64url(std::string_view text) noexcept;

// application/x-www-form-urlencoded component: unreserved bytes kept, space
// as '+', everything else %XX.
std::string form_encode(std::string_view text);

std::string hex_encode(std::span<const std::uint8_t> data);
std::optional<Bytes> hex_decode(std::string_view text);

}  // namespace wmcp::codec
