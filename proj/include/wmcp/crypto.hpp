#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "wmcp/codec.hpp"

// Thin wrappers over OpenSSL for the two primitives the toolkit needs.
namespace wmcp::crypto {

using Seed = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;
using SymmetricKey = std::array<std::uint8_t, 32>;
using GcmIv = std::array<std::uint8_t, 12>;
using GcmTag = std::array<std::uint8_t, 16>;

// Throws Error(BadKeyLength) unless `bytes` is exactly N long.
template <std::size_t N>
std::array<std::uint8_t, N> fixed_key(std::span<const std::uint8_t> bytes);

PublicKey ed25519_public_key(const Seed& seed);
Signature ed25519_sign(const Seed& seed, std::span<const std::uint8_t> message);
bool ed25519_verify(const PublicKey& key, std::span<const std::uint8_t> message,
                    const Signature& signature);

struct Sealed {
  Bytes ciphertext;
  GcmTag tag{};
};

Sealed aes256gcm_seal(const SymmetricKey& key, const GcmIv& iv,
                      std::span<const std::uint8_t> aad,
                      std::span<const std::uint8_t> plaintext);

// nullopt when the tag does not authenticate.
std::optional<Bytes> aes256gcm_open(const SymmetricKey& key, const GcmIv& iv,
                                    std::span<const std::uint8_t> aad,
                                    std::span<const std::uint8_t> ciphertext,
                                    const GcmTag& tag);

// CSPRNG; safe to call from any thread.
void random_bytes(std::span<std::uint8_t> out);

}  // namespace wmcp::crypto
