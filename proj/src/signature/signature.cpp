#include "wmcp/signature.hpp"

#include <algorithm>

#include "wmcp/codec.hpp"
#include "wmcp/text.hpp"

namespace wmcp::sig {
namespace {

bool is_unreserved(char c) noexcept {
  return text::is_ascii_alnum(c) || c == '-' || c == '_' || c == '.' || c == '~';
}

}  // namespace

bool is_valid_key_id(std::string_view key_id) noexcept {
  return !key_id.empty() && key_id.size() <= kMaxKeyIdLength &&
         std::all_of(key_id.begin(), key_id.end(), is_unreserved);
}

TrustStore TrustStore::load(std::string_view source) {
  TrustStore store;
  std::size_t line_no = 0;
  while (!source.empty()) {
    const auto nl = source.find('\n');
    auto line = text::trim(source.substr(0, nl));
    source = nl == std::string_view::npos ? std::string_view{} : source.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto where = "line " + std::to_string(line_no);
    const auto split = std::find_if(line.begin(), line.end(), text::is_ascii_space);
    if (split == line.end()) throw Error(ErrorCode::MalformedPinFile, where + ": expected \"key_id base64key\"");
    const auto key_id = line.substr(0, static_cast<std::size_t>(split - line.begin()));
    const auto material = text::trim(line.substr(key_id.size()));
    if (std::any_of(material.begin(), material.end(), text::is_ascii_space)) {
      throw Error(ErrorCode::MalformedPinFile, where + ": trailing fields after the key");
    }
    const auto bytes = codec::base64_decode(material);
    if (!bytes) throw Error(ErrorCode::MalformedPinFile, where + ": key is not base64");
    if (store.find(key_id) != nullptr) {
      throw Error(ErrorCode::DuplicateKeyId, where + ": key id \"" + std::string(key_id) + "\" pinned twice");
    }
    store.add(std::string(key_id), crypto::fixed_key<32>(*bytes));
  }
  return store;
}

void TrustStore::add(std::string key_id, const crypto::PublicKey& key) {
  if (!is_valid_key_id(key_id)) throw Error(ErrorCode::MalformedPinFile, "invalid key id \"" + key_id + "\"");
  if (!entries_.emplace(key_id, key).second) {
    throw Error(ErrorCode::DuplicateKeyId, "key id \"" + key_id + "\" pinned twice");
  }
}

const crypto::PublicKey* TrustStore::find(std::string_view key_id) const noexcept {
  const auto it = entries_.find(key_id);
  return it == entries_.end() ? nullptr : &it->second;
}

crypto::Seed parse_seed(std::string_view base64_text) {
  const auto bytes = codec::base64_decode(text::trim(base64_text));
  if (!bytes) throw Error(ErrorCode::InvalidArgument, "key material is not base64");
  return crypto::fixed_key<32>(*bytes);
}

SignedBundle sign_bundle(std::string document_bytes, const crypto::Seed& seed, std::string key_id) {
  if (!is_valid_key_id(key_id)) throw Error(ErrorCode::InvalidArgument, "invalid key id \"" + key_id + "\"");
  SignedBundle bundle;
  bundle.signature = crypto::ed25519_sign(seed, as_bytes(document_bytes));
  bundle.document_bytes = std::move(document_bytes);
  bundle.key_id = std::move(key_id);
  return bundle;
}

SignedBundle sign_bundle(std::string document_bytes, std::span<const std::uint8_t> seed, std::string key_id) {
  return sign_bundle(std::move(document_bytes), crypto::fixed_key<32>(seed), std::move(key_id));
}

const std::string& verify_bundle(const SignedBundle& bundle, const TrustStore& store) {
  const auto* key = store.find(bundle.key_id);
  if (key == nullptr) throw Error(ErrorCode::UnknownKeyId, "key id \"" + bundle.key_id + "\" is not pinned");
  if (!crypto::ed25519_verify(*key, as_bytes(bundle.document_bytes), bundle.signature)) {
    throw Error(ErrorCode::SignatureInvalid, "signature does not verify under key \"" + bundle.key_id + "\"");
  }
  return bundle.document_bytes;
}

std::string encode_signature(const SignedBundle& bundle) {
  return bundle.key_id + "." + codec::base64url_encode(bundle.signature);
}

SignedBundle decode_signature(std::string_view value, std::string document_bytes) {
  value = text::trim(value);
  // Key ids may contain '.', the signature never does.
  const auto dot = value.rfind('.');
  if (dot == std::string_view::npos) throw Error(ErrorCode::MalformedSignature, "expected \"key_id.signature\"");
  const auto key_id = value.substr(0, dot);
  if (!is_valid_key_id(key_id)) throw Error(ErrorCode::MalformedSignature, "invalid key id");
  const auto raw = codec::base64url_decode(value.substr(dot + 1));
  if (!raw) throw Error(ErrorCode::MalformedSignature, "signature is not base64url");
  if (raw->size() != crypto::Signature{}.size()) {
    throw Error(ErrorCode::MalformedSignature, "signature is " + std::to_string(raw->size()) + " bytes, expected 64");
  }
  SignedBundle bundle;
  std::copy(raw->begin(), raw->end(), bundle.signature.begin());
  bundle.key_id = std::string(key_id);
  bundle.document_bytes = std::move(document_bytes);
  return bundle;
}

}  // namespace wmcp::sig
