#include <doctest.h>

#include <random>

#include "wmcp/codec.hpp"
#include "wmcp/crypto.hpp"
#include "wmcp/error.hpp"
#include "wmcp/text.hpp"

using namespace wmcp;

namespace {

crypto::Seed seed_from_hex(std::string_view hex) {
  return crypto::fixed_key<32>(*codec::hex_decode(hex));
}

}  // namespace

TEST_CASE("utf8 and code point counting") {
  CHECK(text::is_valid_utf8("plain"));
  CHECK(text::is_valid_utf8("caf\xc3\xa9"));
  CHECK_FALSE(text::is_valid_utf8("\xc3"));
  CHECK_FALSE(text::is_valid_utf8("\xc0\xaf"));        // overlong
  CHECK_FALSE(text::is_valid_utf8("\xed\xa0\x80"));    // surrogate
  CHECK_FALSE(text::is_valid_utf8("\xf4\x90\x80\x80"));  // > U+10FFFF
  CHECK(text::code_point_count("caf\xc3\xa9") == 4u);
  CHECK(text::code_point_count("\xf0\x9f\x98\x80") == 1u);
  CHECK_FALSE(text::code_point_count("\xe2\x82").has_value());
}

TEST_CASE("control, markup and markdown detection") {
  CHECK(text::has_control("a\tb"));
  CHECK(text::has_control("a\x7f"));
  CHECK(text::has_control("a\xc2\x85"));  // NEL, C1
  CHECK_FALSE(text::has_control("caf\xc3\xa9"));
  CHECK(text::has_markup_char("<b>"));
  CHECK(text::has_markup_char("use `rm`"));
  CHECK_FALSE(text::has_markup_char("a = b & c"));
  CHECK(text::has_markdown("**bold**"));
  CHECK(text::has_markdown("# Heading"));
  CHECK(text::has_markdown("see [here](http://x)"));
  CHECK_FALSE(text::has_markdown("#1 choice"));
  CHECK_FALSE(text::has_markdown("snake_case and 2*3"));
}

TEST_CASE("identifier grammars") {
  CHECK(text::is_upper_identifier("LOGIN_API"));
  CHECK(text::is_upper_identifier("A1"));
  CHECK_FALSE(text::is_upper_identifier("1A"));
  CHECK_FALSE(text::is_upper_identifier("Login"));
  CHECK_FALSE(text::is_upper_identifier(""));
  CHECK(text::is_scope("auth:login"));
  CHECK_FALSE(text::is_scope("Auth:login"));
  CHECK_FALSE(text::is_scope("auth:"));
  CHECK_FALSE(text::is_scope("auth:login:x"));
  CHECK(text::is_http_token("X-CSRF-TOKEN"));
  CHECK_FALSE(text::is_http_token("X CSRF"));
  CHECK_FALSE(text::is_http_token(""));
  CHECK(text::iequals("Content-Type", "content-type"));
  CHECK(text::trim("  x y \n") == "x y");
}

TEST_CASE("base64 variants") {
  const std::string_view hello = "hello?>";
  CHECK(codec::base64_encode(as_bytes(hello)) == "aGVsbG8/Pg==");
  CHECK(codec::base64url_encode(as_bytes(hello)) == "aGVsbG8_Pg");
  CHECK(codec::base64url_decode("aGVsbG8_Pg") == Bytes(hello.begin(), hello.end()));
  CHECK_FALSE(codec::base64url_decode("aGVsbG8_Pg==").has_value());
  CHECK_FALSE(codec::base64url_decode("aGVsbG8/Pg").has_value());
  CHECK_FALSE(codec::base64url_decode("a").has_value());
  CHECK_FALSE(codec::base64_decode("aGVsbG8/Ph==").has_value());  // non-canonical trailing bits
  CHECK(codec::base64url_decode("")->empty());
  CHECK(codec::hex_encode(*codec::hex_decode("00ff10")) == "00ff10");
  CHECK_FALSE(codec::hex_decode("0g").has_value());
}

TEST_CASE("base64url round trip on random buffers") {
  std::mt19937 rng(7);
  for (int n = 0; n < 200; ++n) {
    Bytes data(static_cast<std::size_t>(n));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    const auto enc = codec::base64url_encode(data);
    CHECK(codec::is_base64url(enc));
    CHECK(codec::base64url_decode(enc) == data);
    CHECK(codec::base64_decode(codec::base64_encode(data)) == data);
  }
}

TEST_CASE("ed25519 known answer") {
  // Values produced by tests/oracles/ed25519_rfc8032.py (pyca/cryptography).
  const auto seed = seed_from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
  const auto pub = crypto::ed25519_public_key(seed);
  CHECK(codec::hex_encode(pub) == "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const auto sig = crypto::ed25519_sign(seed, {});
  CHECK(codec::hex_encode(sig) ==
        "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
  CHECK(crypto::ed25519_verify(pub, {}, sig));
  auto bad = sig;
  bad[10] ^= 1;
  CHECK_FALSE(crypto::ed25519_verify(pub, {}, bad));
}

TEST_CASE("fixed_key rejects wrong lengths") {
  Bytes short_key(31);
  CHECK_THROWS_AS(crypto::fixed_key<32>(short_key), Error);
  try {
    crypto::fixed_key<32>(short_key);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadKeyLength);
  }
}

TEST_CASE("aes-256-gcm seal and open") {
  crypto::SymmetricKey key{};
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(i);
  crypto::GcmIv iv{};
  for (std::size_t i = 0; i < iv.size(); ++i) iv[i] = static_cast<std::uint8_t>(0xA0 + i);
  const std::string_view aad = "eyJhbGciOiJkaXIiLCJlbmMiOiJBMjU2R0NNIn0";
  const std::string_view pt = R"({"payment_token":"tok_4242"})";
  const auto sealed = crypto::aes256gcm_seal(key, iv, as_bytes(aad), as_bytes(pt));
  // Ciphertext and tag from tests/oracles/jwe_kat.py.
  CHECK(codec::base64url_encode(sealed.ciphertext) == "nToMTDymZ9EWOvO8bB-u_EqOLX_56HZeqDwE-w");
  CHECK(codec::base64url_encode(sealed.tag) == "bHj9c9eTw9uavSqTy0DDwg");
  const auto opened = crypto::aes256gcm_open(key, iv, as_bytes(aad), sealed.ciphertext, sealed.tag);
  REQUIRE(opened);
  CHECK(std::string(opened->begin(), opened->end()) == pt);
  auto tag = sealed.tag;
  tag[0] ^= 0x80;
  CHECK_FALSE(crypto::aes256gcm_open(key, iv, as_bytes(aad), sealed.ciphertext, tag));
}

TEST_CASE("error formatting") {
  const Error e(ErrorCode::SchemaViolation, "bad", ".elements[0]");
  CHECK(std::string(e.what()) == "SchemaViolation: bad");
  CHECK(e.path() == ".elements[0]");
  CHECK(to_string(ErrorCode::TtlExceedsPolicy) == "TtlExceedsPolicy");
}
