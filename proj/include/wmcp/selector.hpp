#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wmcp/html.hpp"

namespace wmcp::html {

// CSS selector subset used by webMCP documents.
//
//   selector  := compound ( combinator compound )*
//   combinator:= '>' | whitespace
//   compound  := ( tag | '*' )? ( '#'id | '.'class | '[' attr ( op value )? ']' | ':'pseudo )*
//   op        := '=' | '~=' | '^=' | '$=' | '*=' | '|='
//   pseudo    := nth-of-type(N) | nth-child(N) | first-of-type | last-of-type
//                | first-child | last-child | root
//
// Selector lists (',') are not accepted: each descriptor targets one thing.
class Selector {
 public:
  // Throws Error(InvalidSelector).
  static Selector parse(std::string_view text);
  static bool is_valid(std::string_view text) noexcept;

  bool matches(const Node& element) const;
  std::vector<const Node*> select(const Document& doc) const;

  const std::string& text() const noexcept { return text_; }

  struct AttrTest {
    enum class Op { Exists, Equals, Includes, Prefix, Suffix, Substring, DashMatch };
    std::string name;
    Op op = Op::Exists;
    std::string value;
  };
  struct Pseudo {
    enum class Kind { NthOfType, NthChild, FirstOfType, LastOfType, FirstChild, LastChild, Root };
    Kind kind;
    std::size_t n = 0;
  };
  struct Compound {
    std::string tag;  // empty matches any element
    std::vector<std::string> ids;
    std::vector<std::string> classes;
    std::vector<AttrTest> attrs;
    std::vector<Pseudo> pseudos;
  };
  enum class Combinator { Descendant, Child };

 private:
  bool match_at(std::size_t index, const Node& element) const;

  std::string text_;
  std::vector<Compound> compounds_;
  std::vector<Combinator> combinators_;  // combinators_[i] joins compounds_[i] and [i + 1]
};

}  // namespace wmcp::html
