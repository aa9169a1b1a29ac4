#include "wmcp/graph.hpp"
#include "wmcp/text.hpp"

namespace wmcp::graph {
namespace {

// Length of the UTF-8 sequence starting at s[i], or 1 for a stray byte.
std::size_t sequence_length(std::string_view s, std::size_t i) noexcept {
  const auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if (b >= 0xF0 && b <= 0xF4) {
    len = 4;
  } else if (b >= 0xE0 && b <= 0xEF) {
    len = 3;
  } else if (b >= 0xC2 && b < 0xE0) {
    len = 2;
  }
  if (len == 1 || i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

}  // namespace

std::size_t estimate_tokens(std::string_view text) noexcept {
  std::size_t tokens = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (text::is_ascii_alnum(c)) {
      std::size_t run = 0;
      while (i < text.size() && text::is_ascii_alnum(text[i])) {
        ++run;
        ++i;
      }
      tokens += (run + 3) / 4;
    } else if (text::is_ascii_space(c)) {
      ++i;
    } else {
      ++tokens;
      i += sequence_length(text, i);
    }
  }
  return tokens;
}

double reduction_pct(std::size_t full, std::size_t payload) noexcept {
  if (full == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(payload) / static_cast<double>(full));
}

TokenReport token_report(std::string scenario, std::string_view full_html, const WmcpDocument& doc) {
  TokenReport r;
  r.scenario = std::move(scenario);
  r.tokens_full_html = estimate_tokens(full_html);
  if (r.tokens_full_html == 0) throw Error(ErrorCode::ZeroHtmlTokens, "page \"" + r.scenario + "\" has no tokens");
  r.tokens_elements_payload = estimate_tokens(elements_payload(doc));
  r.reduction_pct = reduction_pct(r.tokens_full_html, r.tokens_elements_payload);
  return r;
}

TokenReport combine_reports(std::string scenario, const std::vector<TokenReport>& pages) {
  TokenReport r;
  r.scenario = std::move(scenario);
  for (const auto& p : pages) {
    r.tokens_full_html += p.tokens_full_html;
    r.tokens_elements_payload += p.tokens_elements_payload;
  }
  if (r.tokens_full_html == 0) throw Error(ErrorCode::ZeroHtmlTokens, "scenario \"" + r.scenario + "\" has no tokens");
  r.reduction_pct = reduction_pct(r.tokens_full_html, r.tokens_elements_payload);
  return r;
}

}  // namespace wmcp::graph
