#include "wmcp/html.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

#include "wmcp/error.hpp"
#include "wmcp/text.hpp"

namespace wmcp::html {
namespace {

using text::is_ascii_space;

bool is_alpha(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool in_set(std::string_view name, std::initializer_list<std::string_view> set) noexcept {
  return std::find(set.begin(), set.end(), name) != set.end();
}

bool is_void(std::string_view tag) noexcept {
  return in_set(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta",
                      "param", "source", "track", "wbr"});
}

bool is_raw_text(std::string_view tag) noexcept {
  return in_set(tag, {"script", "style", "textarea", "title"});
}

bool closes_paragraph(std::string_view tag) noexcept {
  return in_set(tag, {"address", "article", "aside", "blockquote", "div", "dl", "fieldset",
                      "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
                      "main", "nav", "ol", "p", "pre", "section", "table", "ul"});
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the handful of named references that show up in attribute values,
// plus numeric references. Unknown references are kept literally.
std::string decode_entities(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kNamed{{
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", "\xC2\xA0"},
  }};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const auto ref = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (ref.size() > 1 && ref[0] == '#') {
      const bool hex = ref[1] == 'x' || ref[1] == 'X';
      const auto digits = ref.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      bool ok = !digits.empty();
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (ok) {
        append_utf8(out, cp);
        done = true;
      }
    } else {
      for (const auto& [name, value] : kNamed) {
        if (ref == name) {
          out += value;
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view in) : in_(in) {}

  std::vector<Token> run() {
    std::size_t text_start = 0;
    while (pos_ < in_.size()) {
      if (in_[pos_] != '<') {
        ++pos_;
        continue;
      }
      const std::size_t lt = pos_;
      const auto next = lt + 1 < in_.size() ? in_[lt + 1] : '\0';
      const bool markup = next == '!' || next == '?' || next == '/' || is_alpha(next);
      if (!markup) {
        ++pos_;
        continue;
      }
      flush_text(text_start, lt);
      if (next == '!' || next == '?') {
        read_declaration();
      } else if (next == '/') {
        read_end_tag();
      } else {
        read_start_tag();
      }
      text_start = pos_;
    }
    flush_text(text_start, in_.size());
    return std::move(out_);
  }

 private:
  void flush_text(std::size_t from, std::size_t to) {
    if (to <= from) return;
    Token t;
    t.kind = Token::Kind::Text;
    t.text = std::string(in_.substr(from, to - from));
    out_.push_back(std::move(t));
  }

  void read_declaration() {
    Token t;
    if (in_.substr(pos_, 4) == "<!--") {
      const auto end = in_.find("-->", pos_ + 4);
      const auto stop = end == std::string_view::npos ? in_.size() : end;
      t.kind = Token::Kind::Comment;
      t.text = std::string(in_.substr(pos_ + 4, stop - pos_ - 4));
      pos_ = end == std::string_view::npos ? in_.size() : end + 3;
    } else {
      const auto end = in_.find('>', pos_);
      const auto stop = end == std::string_view::npos ? in_.size() : end;
      t.kind = text::iequals(in_.substr(pos_ + 2, 7), "doctype") ? Token::Kind::Doctype
                                                                 : Token::Kind::Comment;
      t.text = std::string(in_.substr(pos_ + 2, stop - pos_ - 2));
      pos_ = end == std::string_view::npos ? in_.size() : end + 1;
    }
    out_.push_back(std::move(t));
  }

  std::string read_name() {
    const auto start = pos_;
    while (pos_ < in_.size() && !is_ascii_space(in_[pos_]) && in_[pos_] != '/' && in_[pos_] != '>') {
      ++pos_;
    }
    return text::to_lower(in_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < in_.size() && is_ascii_space(in_[pos_])) ++pos_;
  }

  void read_end_tag() {
    pos_ += 2;
    if (pos_ >= in_.size() || !is_alpha(in_[pos_])) {
      // "</>" or "</ junk>": bogus comment.
      const auto end = in_.find('>', pos_);
      pos_ = end == std::string_view::npos ? in_.size() : end + 1;
      return;
    }
    Token t;
    t.kind = Token::Kind::EndTag;
    t.name = read_name();
    const auto end = in_.find('>', pos_);
    pos_ = end == std::string_view::npos ? in_.size() : end + 1;
    out_.push_back(std::move(t));
  }

  void read_start_tag() {
    ++pos_;
    Token t;
    t.kind = Token::Kind::StartTag;
    t.name = read_name();
    while (pos_ < in_.size()) {
      skip_space();
      if (pos_ >= in_.size()) break;
      if (in_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (in_[pos_] == '/') {
        ++pos_;
        if (pos_ < in_.size() && in_[pos_] == '>') {
          t.self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      const auto name_start = pos_;
      while (pos_ < in_.size() && !is_ascii_space(in_[pos_]) && in_[pos_] != '=' &&
             in_[pos_] != '>' && !(in_[pos_] == '/' && pos_ > name_start)) {
        ++pos_;
      }
      Attribute attr{text::to_lower(in_.substr(name_start, pos_ - name_start)), {}};
      skip_space();
      if (pos_ < in_.size() && in_[pos_] == '=') {
        ++pos_;
        skip_space();
        attr.value = decode_entities(read_attr_value());
      }
      if (t.attr(attr.name) == nullptr) t.attributes.push_back(std::move(attr));
    }
    const bool raw = is_raw_text(t.name) && !t.self_closing;
    const std::string name = t.name;
    out_.push_back(std::move(t));
    if (raw) read_raw_text(name);
  }

  std::string_view read_attr_value() {
    if (pos_ >= in_.size()) return {};
    const char q = in_[pos_];
    if (q == '"' || q == '\'') {
      const auto end = in_.find(q, pos_ + 1);
      const auto stop = end == std::string_view::npos ? in_.size() : end;
      const auto value = in_.substr(pos_ + 1, stop - pos_ - 1);
      pos_ = end == std::string_view::npos ? in_.size() : end + 1;
      return value;
    }
    const auto start = pos_;
    while (pos_ < in_.size() && !is_ascii_space(in_[pos_]) && in_[pos_] != '>') ++pos_;
    return in_.substr(start, pos_ - start);
  }

  void read_raw_text(const std::string& tag) {
    // Content runs to the first "</tag" (case-insensitive).
    std::size_t end = pos_;
    for (;;) {
      end = in_.find("</", end);
      if (end == std::string_view::npos) {
        end = in_.size();
        break;
      }
      if (text::iequals(in_.substr(end + 2, tag.size()), tag)) {
        const auto after = end + 2 + tag.size();
        if (after >= in_.size() || is_ascii_space(in_[after]) || in_[after] == '>' || in_[after] == '/') {
          break;
        }
      }
      end += 2;
    }
    if (end > pos_) {
      Token t;
      t.kind = Token::Kind::Text;
      t.text = std::string(in_.substr(pos_, end - pos_));
      out_.push_back(std::move(t));
    }
    pos_ = end;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::vector<Token> out_;
};

const std::string* find_attr(const std::vector<Attribute>& attrs, std::string_view name) noexcept {
  for (const auto& a : attrs) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

}  // namespace

const std::string* Token::attr(std::string_view attr_name) const noexcept {
  return find_attr(attributes, attr_name);
}

std::vector<Token> tokenize(std::string_view html) { return Tokenizer(html).run(); }

const std::string* Node::attr(std::string_view name) const noexcept {
  return find_attr(attributes_, name);
}

std::size_t Node::index_of_type() const noexcept {
  if (parent_ == nullptr) return 1;
  std::size_t i = 0;
  for (const auto& c : parent_->children_) {
    if (c->is_element() && c->tag_ == tag_) ++i;
    if (c.get() == this) break;
  }
  return i;
}

std::size_t Node::count_of_type() const noexcept {
  if (parent_ == nullptr) return 1;
  return static_cast<std::size_t>(std::count_if(
      parent_->children_.begin(), parent_->children_.end(),
      [this](const auto& c) { return c->is_element() && c->tag_ == tag_; }));
}

std::size_t Node::element_index() const noexcept {
  if (parent_ == nullptr) return 1;
  std::size_t i = 0;
  for (const auto& c : parent_->children_) {
    if (c->is_element()) ++i;
    if (c.get() == this) break;
  }
  return i;
}

std::size_t Node::element_sibling_count() const noexcept {
  if (parent_ == nullptr) return 1;
  return static_cast<std::size_t>(std::count_if(parent_->children_.begin(), parent_->children_.end(),
                                                [](const auto& c) { return c->is_element(); }));
}

const Node* Node::closest(std::string_view tag_name) const noexcept {
  for (const Node* n = this; n != nullptr; n = n->parent_) {
    if (n->is_element() && n->tag_ == tag_name) return n;
  }
  return nullptr;
}

class TreeBuilder {
 public:
  std::unique_ptr<Node> build(const std::vector<Token>& tokens) {
    auto root = std::make_unique<Node>();
    root->kind_ = Node::Kind::Document;
    stack_.push_back(root.get());
    for (const auto& t : tokens) {
      switch (t.kind) {
        case Token::Kind::StartTag: start(t); break;
        case Token::Kind::EndTag: end(t.name); break;
        case Token::Kind::Text:
          add_text(current()->tag_ == "script" || current()->tag_ == "style" ? t.text : decode_entities(t.text));
          break;
        case Token::Kind::Comment:
        case Token::Kind::Doctype: break;
      }
    }
    return root;
  }

 private:
  Node* current() const noexcept { return stack_.back(); }

  bool open(std::string_view tag) const noexcept {
    return std::any_of(stack_.begin() + 1, stack_.end(), [&](const Node* n) { return n->tag_ == tag; });
  }

  // Pops up to and including the nearest `tag`, stopping at any of `fences`.
  void close_within(std::string_view tag, std::initializer_list<std::string_view> fences) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag_ == tag) {
        stack_.resize(i);
        return;
      }
      if (in_set(stack_[i]->tag_, fences)) return;
    }
  }

  void start(const Token& t) {
    if (closes_paragraph(t.name)) close_within("p", {"button", "table", "td", "th"});
    if (t.name == "li") close_within("li", {"ul", "ol"});
    if (t.name == "option") close_within("option", {"select", "datalist"});
    if (t.name == "dt" || t.name == "dd") {
      close_within("dt", {"dl"});
      close_within("dd", {"dl"});
    }
    if (t.name == "tr") close_within("tr", {"table", "tbody", "thead", "tfoot"});
    if (t.name == "td" || t.name == "th") {
      close_within("td", {"tr", "table"});
      close_within("th", {"tr", "table"});
    }
    if (t.name == "form" && open("form")) return;  // nested forms are dropped

    auto node = std::make_unique<Node>();
    node->kind_ = Node::Kind::Element;
    node->tag_ = t.name;
    node->attributes_ = t.attributes;
    node->parent_ = current();
    Node* raw = node.get();
    current()->children_.push_back(std::move(node));
    if (!is_void(t.name) && !t.self_closing) stack_.push_back(raw);
  }

  void end(const std::string& tag) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag_ == tag) {
        stack_.resize(i);
        return;
      }
    }
  }

  void add_text(const std::string& text) {
    auto node = std::make_unique<Node>();
    node->kind_ = Node::Kind::Text;
    node->text_ = text;
    node->parent_ = current();
    current()->children_.push_back(std::move(node));
  }

  std::vector<Node*> stack_;
};

Document Document::parse(std::string_view html) {
  if (html.find('\0') != std::string_view::npos) {
    throw Error(ErrorCode::UnparseableHtml, "input contains NUL bytes");
  }
  if (!text::is_valid_utf8(html)) {
    throw Error(ErrorCode::UnparseableHtml, "input is not valid UTF-8");
  }
  return Document(TreeBuilder().build(tokenize(html)));
}

std::vector<const Node*> Document::elements() const {
  std::vector<const Node*> out;
  std::vector<const Node*> pending{root_.get()};
  while (!pending.empty()) {
    const Node* n = pending.back();
    pending.pop_back();
    if (n->is_element()) out.push_back(n);
    for (auto it = n->children().rbegin(); it != n->children().rend(); ++it) pending.push_back(it->get());
  }
  return out;
}

std::string text_content(const Node& node) {
  if (node.kind() == Node::Kind::Text) return node.text();
  std::string out;
  for (const auto& c : node.children()) out += text_content(*c);
  return out;
}

}  // namespace wmcp::html
