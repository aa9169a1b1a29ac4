#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

// Small text helpers shared by the document, HTML and authoring code.
namespace wmcp::text {

bool is_valid_utf8(std::string_view s) noexcept;

// Number of Unicode code points; nullopt for invalid UTF-8.
std::optional<std::size_t> code_point_count(std::string_view s) noexcept;

// C0 (U+0000..U+001F), DEL and C1 (U+0080..U+009F) controls.
bool has_control(std::string_view s) noexcept;

// '<', '>' or backtick.
bool has_markup_char(std::string_view s) noexcept;

// Inline markdown constructs: emphasis runs, strike, links/images, headings.
bool has_markdown(std::string_view s) noexcept;

bool is_ascii_alnum(char c) noexcept;
bool is_ascii_space(char c) noexcept;

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s) noexcept;

// [A-Z][A-Z0-9_]*
bool is_upper_identifier(std::string_view s) noexcept;

// lowercase "word:word"
bool is_scope(std::string_view s) noexcept;

// RFC 9110 token (HTTP field names).
bool is_http_token(std::string_view s) noexcept;

bool iequals(std::string_view a, std::string_view b) noexcept;

}  // namespace wmcp::text
