#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wmcp/crypto.hpp"
#include "wmcp/document.hpp"

namespace wmcp::secure {

inline constexpr std::string_view kJweAlg = "dir";
inline constexpr std::string_view kJweEnc = "A256GCM";

struct CompactJwe {
  std::string protected_header;
  std::string encrypted_key;  // empty for direct key agreement
  std::string iv;
  std::string ciphertext;
  std::string tag;

  // Throws MalformedCompactForm unless there are exactly five base64url segments.
  static CompactJwe parse(std::string_view compact);
  std::string str() const;
  bool operator==(const CompactJwe&) const = default;
};

// Fresh random IV per call. Throws InvalidArgument for an empty plaintext.
CompactJwe encrypt_payload(std::span<const std::uint8_t> plaintext, const crypto::SymmetricKey& key);
// Throws BadKeyLength unless the key is 32 bytes.
CompactJwe encrypt_payload(std::span<const std::uint8_t> plaintext, std::span<const std::uint8_t> key);
// Deterministic variant for known-answer tests.
CompactJwe encrypt_payload_with_iv(std::span<const std::uint8_t> plaintext, const crypto::SymmetricKey& key,
                                   const crypto::GcmIv& iv);

// Throws UnsupportedAlgorithm, MalformedCompactForm or AuthenticationFailed.
Bytes decrypt_payload(const CompactJwe& jwe, const crypto::SymmetricKey& key);
Bytes decrypt_payload(std::string_view compact, const crypto::SymmetricKey& key);

enum class TokenSource { MetaTag, HiddenInput };
std::string_view to_string(TokenSource source) noexcept;

struct CsrfToken {
  std::string value;
  TokenSource source = TokenSource::MetaTag;

  bool operator==(const CsrfToken&) const = default;
};

// Meta tag named policy.token_field (its `value`, else `content`) wins over a
// hidden input of that name. Throws TokenNotFound or AmbiguousToken.
CsrfToken extract_csrf_token(std::string_view html, const CsrfPolicy& policy);

enum class BodyEncoding { Form, Json };

struct ActionRequest {
  HttpVerb method = HttpVerb::Post;
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  BodyEncoding encoding = BodyEncoding::Form;
  std::vector<std::pair<std::string, std::string>> body;

  // Header lookup is case-insensitive; body lookup is exact.
  const std::string* header(std::string_view name) const noexcept;
  const std::string* field(std::string_view name) const noexcept;
  void set_header(std::string_view name, std::string value);
  void set_field(std::string_view name, std::string value);

  std::string content_type() const;
  std::string encoded_body() const;

  bool operator==(const ActionRequest&) const = default;
};

// Double-submit sets the header and the body field; synchroniser only the
// body field. Existing entries with the same name are replaced in place.
ActionRequest apply_csrf(ActionRequest request, const CsrfToken& token, const CsrfPolicy& policy);

}  // namespace wmcp::secure
