#include <json.hpp>

#include "wmcp/codec.hpp"
#include "wmcp/secure.hpp"

namespace wmcp::secure {
namespace {

constexpr std::string_view kProtectedHeader = R"({"alg":"dir","enc":"A256GCM"})";

[[noreturn]] void malformed(const std::string& message) {
  throw Error(ErrorCode::MalformedCompactForm, message);
}

Bytes decode_segment(std::string_view segment, std::string_view what) {
  auto bytes = codec::base64url_decode(segment);
  if (!bytes) malformed(std::string(what) + " is not base64url");
  return std::move(*bytes);
}

template <std::size_t N>
std::array<std::uint8_t, N> decode_fixed(std::string_view segment, std::string_view what) {
  const auto bytes = decode_segment(segment, what);
  if (bytes.size() != N) {
    malformed(std::string(what) + " is " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(N));
  }
  std::array<std::uint8_t, N> out{};
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

void check_header(std::string_view segment) {
  const auto raw = decode_segment(segment, "protected header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::exception&) {
    malformed("protected header is not JSON");
  }
  if (!header.is_object()) malformed("protected header is not a JSON object");
  const auto alg = header.find("alg");
  const auto enc = header.find("enc");
  if (alg == header.end() || enc == header.end() || !alg->is_string() || !enc->is_string()) {
    malformed("protected header lacks \"alg\" or \"enc\"");
  }
  if (*alg != kJweAlg || *enc != kJweEnc) {
    throw Error(ErrorCode::UnsupportedAlgorithm, "unsupported JWE suite " + alg->get<std::string>() + "/" +
                                                     enc->get<std::string>() + "; only dir/A256GCM");
  }
  // Compression and critical extensions would change how the plaintext is read.
  if (header.contains("zip") || header.contains("crit")) {
    throw Error(ErrorCode::UnsupportedAlgorithm, "\"zip\" and \"crit\" header parameters are not supported");
  }
}

}  // namespace

CompactJwe CompactJwe::parse(std::string_view compact) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = compact.find('.', start);
    parts.emplace_back(compact.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (parts.size() != 5) malformed("expected 5 segments, got " + std::to_string(parts.size()));
  for (const auto& p : parts) {
    if (!codec::is_base64url(p)) malformed("segment is not base64url");
  }
  return {parts[0], parts[1], parts[2], parts[3], parts[4]};
}

std::string CompactJwe::str() const {
  return protected_header + "." + encrypted_key + "." + iv + "." + ciphertext + "." + tag;
}

CompactJwe encrypt_payload_with_iv(std::span<const std::uint8_t> plaintext, const crypto::SymmetricKey& key,
                                   const crypto::GcmIv& iv) {
  if (plaintext.empty()) throw Error(ErrorCode::InvalidArgument, "plaintext must not be empty");
  CompactJwe jwe;
  jwe.protected_header = codec::base64url_encode(as_bytes(kProtectedHeader));
  const auto sealed = crypto::aes256gcm_seal(key, iv, as_bytes(jwe.protected_header), plaintext);
  jwe.iv = codec::base64url_encode(iv);
  jwe.ciphertext = codec::base64url_encode(sealed.ciphertext);
  jwe.tag = codec::base64url_encode(sealed.tag);
  return jwe;
}

CompactJwe encrypt_payload(std::span<const std::uint8_t> plaintext, const crypto::SymmetricKey& key) {
  crypto::GcmIv iv{};
  crypto::random_bytes(iv);
  return encrypt_payload_with_iv(plaintext, key, iv);
}

CompactJwe encrypt_payload(std::span<const std::uint8_t> plaintext, std::span<const std::uint8_t> key) {
  return encrypt_payload(plaintext, crypto::fixed_key<32>(key));
}

Bytes decrypt_payload(const CompactJwe& jwe, const crypto::SymmetricKey& key) {
  check_header(jwe.protected_header);
  if (!jwe.encrypted_key.empty()) malformed("direct key agreement requires an empty encrypted key");
  const auto iv = decode_fixed<12>(jwe.iv, "iv");
  const auto tag = decode_fixed<16>(jwe.tag, "authentication tag");
  const auto ciphertext = decode_segment(jwe.ciphertext, "ciphertext");
  auto plaintext = crypto::aes256gcm_open(key, iv, as_bytes(jwe.protected_header), ciphertext, tag);
  if (!plaintext) throw Error(ErrorCode::AuthenticationFailed, "authentication tag does not verify");
  return std::move(*plaintext);
}

Bytes decrypt_payload(std::string_view compact, const crypto::SymmetricKey& key) {
  return decrypt_payload(CompactJwe::parse(compact), key);
}

}  // namespace wmcp::secure
