#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

// Error-tolerant HTML reading: a tokenizer that accepts any byte stream and a
// tree builder producing a lightweight DOM for selector matching.
namespace wmcp::html {

struct Attribute {
  std::string name;  // lowercased
  std::string value;  // entity-decoded
};

struct Token {
  enum class Kind { StartTag, EndTag, Text, Comment, Doctype };

  Kind kind = Kind::Text;
  std::string name;  // lowercased tag name for StartTag/EndTag
  std::vector<Attribute> attributes;
  bool self_closing = false;
  std::string text;  // raw bytes for Text/Comment/Doctype

  const std::string* attr(std::string_view attr_name) const noexcept;
};

// Never fails. script/style/textarea/title content comes back as a single raw
// Text token (no entity decoding, no nested tags).
std::vector<Token> tokenize(std::string_view html);

class Node {
 public:
  enum class Kind { Document, Element, Text };

  Kind kind() const noexcept { return kind_; }
  bool is_element() const noexcept { return kind_ == Kind::Element; }
  const std::string& tag() const noexcept { return tag_; }
  const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
  const std::string* attr(std::string_view name) const noexcept;
  const std::string& text() const noexcept { return text_; }
  const Node* parent() const noexcept { return parent_; }
  const std::vector<std::unique_ptr<Node>>& children() const noexcept { return children_; }

  // 1-based position among element siblings with the same tag.
  std::size_t index_of_type() const noexcept;
  std::size_t count_of_type() const noexcept;
  // 1-based position among element siblings.
  std::size_t element_index() const noexcept;
  std::size_t element_sibling_count() const noexcept;

  const Node* closest(std::string_view tag_name) const noexcept;

 private:
  friend class TreeBuilder;

  Kind kind_ = Kind::Document;
  std::string tag_;
  std::vector<Attribute> attributes_;
  std::string text_;
  Node* parent_ = nullptr;
  std::vector<std::unique_ptr<Node>> children_;
};

class Document {
 public:
  // Throws Error(UnparseableHtml) for input that contains NUL bytes or is not
  // valid UTF-8; anything else yields a best-effort tree.
  static Document parse(std::string_view html);

  const Node& root() const noexcept { return *root_; }

  // Every element in document (pre-)order.
  std::vector<const Node*> elements() const;

 private:
  explicit Document(std::unique_ptr<Node> root) : root_(std::move(root)) {}
  std::unique_ptr<Node> root_;
};

std::string text_content(const Node& node);

}  // namespace wmcp::html
