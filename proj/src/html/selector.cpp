#include "wmcp/selector.hpp"

#include <algorithm>

#include "wmcp/error.hpp"
#include "wmcp/text.hpp"

namespace wmcp::html {
namespace {

using text::is_ascii_space;

bool ident_start(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool ident_char(char c) noexcept {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '-';
}

class Parser {
 public:
  Parser(std::string_view in, std::vector<Selector::Compound>& compounds,
         std::vector<Selector::Combinator>& combinators)
      : in_(in), compounds_(compounds), combinators_(combinators) {}

  void run() {
    if (in_.empty()) fail("empty selector");
    compounds_.push_back(compound());
    for (;;) {
      const bool had_space = skip_space();
      if (at_end()) break;
      if (peek() == '>') {
        ++pos_;
        skip_space();
        combinators_.push_back(Selector::Combinator::Child);
      } else if (had_space) {
        combinators_.push_back(Selector::Combinator::Descendant);
      } else {
        fail("unexpected character");
      }
      if (at_end()) fail("dangling combinator");
      compounds_.push_back(compound());
    }
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::InvalidSelector,
                why + " at offset " + std::to_string(pos_) + " in \"" + std::string(in_) + "\"");
  }

  bool at_end() const noexcept { return pos_ >= in_.size(); }
  char peek() const noexcept { return in_[pos_]; }

  bool skip_space() {
    const auto start = pos_;
    while (!at_end() && is_ascii_space(peek())) ++pos_;
    return pos_ > start;
  }

  std::string ident() {
    const auto start = pos_;
    if (!at_end() && peek() == '-') ++pos_;
    if (at_end() || !ident_start(peek())) fail("expected identifier");
    while (!at_end() && ident_char(peek())) ++pos_;
    return std::string(in_.substr(start, pos_ - start));
  }

  std::string quoted() {
    const char q = peek();
    ++pos_;
    std::string out;
    while (!at_end() && peek() != q) {
      if (peek() == '\\') {
        ++pos_;
        if (at_end()) break;
      }
      out.push_back(peek());
      ++pos_;
    }
    if (at_end()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::size_t positive_int() {
    const auto start = pos_;
    std::size_t n = 0;
    while (!at_end() && peek() >= '0' && peek() <= '9') {
      n = n * 10 + static_cast<std::size_t>(peek() - '0');
      if (n > 1'000'000) fail("index too large");
      ++pos_;
    }
    if (pos_ == start || n == 0) fail("expected positive integer");
    return n;
  }

  Selector::Compound compound() {
    Selector::Compound c;
    bool any = false;
    if (!at_end() && peek() == '*') {
      ++pos_;
      any = true;
    } else if (!at_end() && ident_start(peek())) {
      c.tag = text::to_lower(ident());
      any = true;
    }
    while (!at_end()) {
      const char ch = peek();
      if (ch == '#') {
        ++pos_;
        c.ids.push_back(ident());
      } else if (ch == '.') {
        ++pos_;
        c.classes.push_back(ident());
      } else if (ch == '[') {
        ++pos_;
        c.attrs.push_back(attribute());
      } else if (ch == ':') {
        ++pos_;
        c.pseudos.push_back(pseudo());
      } else {
        break;
      }
      any = true;
    }
    if (!any) fail("expected compound selector");
    return c;
  }

  Selector::AttrTest attribute() {
    using Op = Selector::AttrTest::Op;
    Selector::AttrTest a;
    skip_space();
    a.name = text::to_lower(ident());
    skip_space();
    if (at_end()) fail("unterminated attribute selector");
    if (peek() == ']') {
      ++pos_;
      return a;
    }
    const char first = peek();
    if (first == '=') {
      a.op = Op::Equals;
      ++pos_;
    } else {
      if (pos_ + 1 >= in_.size() || in_[pos_ + 1] != '=') fail("expected attribute operator");
      switch (first) {
        case '~': a.op = Op::Includes; break;
        case '^': a.op = Op::Prefix; break;
        case '$': a.op = Op::Suffix; break;
        case '*': a.op = Op::Substring; break;
        case '|': a.op = Op::DashMatch; break;
        default: fail("unknown attribute operator");
      }
      pos_ += 2;
    }
    skip_space();
    if (at_end()) fail("missing attribute value");
    a.value = (peek() == '"' || peek() == '\'') ? quoted() : ident();
    skip_space();
    if (at_end() || peek() != ']') fail("expected ']'");
    ++pos_;
    return a;
  }

  Selector::Pseudo pseudo() {
    using Kind = Selector::Pseudo::Kind;
    const auto name = text::to_lower(ident());
    if (name == "nth-of-type" || name == "nth-child") {
      if (at_end() || peek() != '(') fail("expected '('");
      ++pos_;
      skip_space();
      const auto n = positive_int();
      skip_space();
      if (at_end() || peek() != ')') fail("expected ')'");
      ++pos_;
      return {name == "nth-of-type" ? Kind::NthOfType : Kind::NthChild, n};
    }
    if (name == "first-of-type") return {Kind::FirstOfType};
    if (name == "last-of-type") return {Kind::LastOfType};
    if (name == "first-child") return {Kind::FirstChild};
    if (name == "last-child") return {Kind::LastChild};
    if (name == "root") return {Kind::Root};
    fail("unsupported pseudo-class :" + name);
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::vector<Selector::Compound>& compounds_;
  std::vector<Selector::Combinator>& combinators_;
};

bool contains_word(std::string_view s, std::string_view word) noexcept {
  while (!s.empty()) {
    while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
    std::size_t n = 0;
    while (n < s.size() && !is_ascii_space(s[n])) ++n;
    if (n > 0 && s.substr(0, n) == word) return true;
    s.remove_prefix(n);
  }
  return false;
}

bool has_class(const Node& e, std::string_view cls) {
  const auto* v = e.attr("class");
  return v != nullptr && contains_word(*v, cls);
}

bool attr_matches(const Node& e, const Selector::AttrTest& t) {
  using Op = Selector::AttrTest::Op;
  const auto* v = e.attr(t.name);
  if (v == nullptr) return false;
  const std::string_view value = *v;
  switch (t.op) {
    case Op::Exists: return true;
    case Op::Equals: return value == t.value;
    case Op::Prefix: return !t.value.empty() && value.starts_with(t.value);
    case Op::Suffix: return !t.value.empty() && value.ends_with(t.value);
    case Op::Substring: return !t.value.empty() && value.find(t.value) != std::string_view::npos;
    case Op::DashMatch: return value == t.value || value.starts_with(t.value + "-");
    case Op::Includes: return contains_word(value, t.value);
  }
  return false;
}

bool pseudo_matches(const Node& e, const Selector::Pseudo& p) {
  using Kind = Selector::Pseudo::Kind;
  switch (p.kind) {
    case Kind::NthOfType: return e.index_of_type() == p.n;
    case Kind::NthChild: return e.element_index() == p.n;
    case Kind::FirstOfType: return e.index_of_type() == 1;
    case Kind::LastOfType: return e.index_of_type() == e.count_of_type();
    case Kind::FirstChild: return e.element_index() == 1;
    case Kind::LastChild: return e.element_index() == e.element_sibling_count();
    case Kind::Root: return e.parent() != nullptr && e.parent()->kind() == Node::Kind::Document;
  }
  return false;
}

bool compound_matches(const Node& e, const Selector::Compound& c) {
  if (!e.is_element()) return false;
  if (!c.tag.empty() && e.tag() != c.tag) return false;
  for (const auto& id : c.ids) {
    const auto* v = e.attr("id");
    if (v == nullptr || *v != id) return false;
  }
  for (const auto& cls : c.classes) {
    if (!has_class(e, cls)) return false;
  }
  for (const auto& a : c.attrs) {
    if (!attr_matches(e, a)) return false;
  }
  for (const auto& p : c.pseudos) {
    if (!pseudo_matches(e, p)) return false;
  }
  return true;
}

}  // namespace

Selector Selector::parse(std::string_view text) {
  Selector s;
  s.text_ = std::string(text);
  const auto trimmed = text::trim(text);
  if (trimmed.size() != text.size()) {
    throw Error(ErrorCode::InvalidSelector, "leading or trailing whitespace in \"" + s.text_ + "\"");
  }
  Parser(trimmed, s.compounds_, s.combinators_).run();
  return s;
}

bool Selector::is_valid(std::string_view text) noexcept {
  try {
    (void)parse(text);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool Selector::match_at(std::size_t index, const Node& element) const {
  if (!compound_matches(element, compounds_[index])) return false;
  if (index == 0) return true;
  const auto comb = combinators_[index - 1];
  const Node* up = element.parent();
  if (comb == Combinator::Child) {
    return up != nullptr && up->is_element() && match_at(index - 1, *up);
  }
  for (; up != nullptr && up->is_element(); up = up->parent()) {
    if (match_at(index - 1, *up)) return true;
  }
  return false;
}

bool Selector::matches(const Node& element) const {
  return element.is_element() && match_at(compounds_.size() - 1, element);
}

std::vector<const Node*> Selector::select(const Document& doc) const {
  std::vector<const Node*> out;
  for (const Node* e : doc.elements()) {
    if (matches(*e)) out.push_back(e);
  }
  return out;
}

}  // namespace wmcp::html
