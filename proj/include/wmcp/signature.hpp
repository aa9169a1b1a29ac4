#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "wmcp/crypto.hpp"
#include "wmcp/document.hpp"

namespace wmcp::sig {

inline constexpr std::string_view kSignatureHeader = "X-WMCP-SIG";
inline constexpr std::string_view kSignatureSuffix = ".sig";
inline constexpr std::size_t kMaxKeyIdLength = 64;

// Non-empty, at most 64 characters from the URL-unreserved set.
bool is_valid_key_id(std::string_view key_id) noexcept;

struct SignedBundle {
  std::string document_bytes;  // exactly as served
  crypto::Signature signature{};
  std::string key_id;
};

class TrustStore {
 public:
  // Pin file: one "key_id base64(public key)" pair per line. Blank lines and
  // lines starting with '#' are ignored. Throws MalformedPinFile,
  // DuplicateKeyId or BadKeyLength.
  static TrustStore load(std::string_view source);

  // Throws DuplicateKeyId, or MalformedPinFile for a bad key id.
  void add(std::string key_id, const crypto::PublicKey& key);
  const crypto::PublicKey* find(std::string_view key_id) const noexcept;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, crypto::PublicKey, std::less<>>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, crypto::PublicKey, std::less<>> entries_;
};

// Seeds and symmetric keys are stored as base64 text. Throws BadKeyLength
// (wrong size) or InvalidArgument (not base64).
crypto::Seed parse_seed(std::string_view base64_text);

// Signs the bytes as given; no canonicalisation. Throws InvalidArgument for a
// bad key id.
SignedBundle sign_bundle(std::string document_bytes, const crypto::Seed& seed, std::string key_id);
// Throws BadKeyLength unless the seed is 32 bytes.
SignedBundle sign_bundle(std::string document_bytes, std::span<const std::uint8_t> seed, std::string key_id);

// Returns the document bytes. Throws UnknownKeyId or SignatureInvalid.
const std::string& verify_bundle(const SignedBundle& bundle, const TrustStore& store);

// "<key_id>.<base64url signature>", used for the header and the .sig sidecar.
std::string encode_signature(const SignedBundle& bundle);
// Throws MalformedSignature.
SignedBundle decode_signature(std::string_view value, std::string document_bytes);

// The secure pipeline: `parser` only ever sees bytes that passed verification.
template <typename Parser>
auto open_verified(const SignedBundle& bundle, const TrustStore& store, Parser&& parser) {
  const auto& bytes = verify_bundle(bundle, store);
  return std::forward<Parser>(parser)(std::string_view(bytes));
}

inline WmcpDocument load_verified(const SignedBundle& bundle, const TrustStore& store) {
  return open_verified(bundle, store, [](std::string_view bytes) { return parse_document(bytes); });
}

}  // namespace wmcp::sig
