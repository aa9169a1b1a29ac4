#include <set>

#include "wmcp/author.hpp"
#include "wmcp/graph.hpp"
#include "wmcp/html.hpp"
#include "wmcp/selector.hpp"
#include "wmcp/text.hpp"

namespace wmcp::author {
namespace {

using html::Node;

std::string attr_or(const Node& n, std::string_view name, std::string fallback = {}) {
  const auto* v = n.attr(name);
  return v ? *v : fallback;
}

std::string input_type(const Node& n) { return text::to_lower(text::trim(attr_or(n, "type", "text"))); }

bool is_submit_control(const Node& n) {
  if (n.tag() == "button") {
    const auto type = text::to_lower(text::trim(attr_or(n, "type", "submit")));
    return type == "submit";
  }
  return n.tag() == "input" && (input_type(n) == "submit" || input_type(n) == "image");
}

bool is_interactive(const Node& n) {
  const auto& tag = n.tag();
  if (tag == "input") {
    const auto type = input_type(n);
    return type != "hidden";
  }
  if (tag == "button" || tag == "select" || tag == "textarea" || tag == "form") return true;
  return tag == "a" && n.attr("href") != nullptr;
}

// Role mapping table. Unknown input types fall back to input.<type> when that
// is a valid role, otherwise input.text, and are noted.
std::string role_for(const Node& n, std::vector<std::string>& notes) {
  const auto& tag = n.tag();
  if (tag == "input") {
    const auto type = input_type(n);
    if (type == "text" || type == "email" || type == "search" || type.empty()) return "input.text";
    if (type == "password") return "input.password";
    if (type == "checkbox") return "input.checkbox";
    if (type == "submit" || type == "image" || type == "button" || type == "reset") {
      return is_submit_control(n) && n.closest("form") ? "button.submit" : "button.action";
    }
    const auto role = "input." + type;
    notes.push_back("input type \"" + type + "\" is outside the role table");
    return is_valid_role(role) ? role : "input.text";
  }
  if (tag == "textarea") return "input.textarea";
  if (tag == "select") {
    if (n.attr("multiple")) notes.push_back("multiple select mapped to select.single");
    return "select.single";
  }
  if (tag == "button") return is_submit_control(n) && n.closest("form") ? "button.submit" : "button.action";
  if (tag == "a") return "link.nav";
  return "region.form";
}

std::string quote_attr(std::string_view v) {
  std::string out = "\"";
  for (const char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

class SelectorBuilder {
 public:
  explicit SelectorBuilder(const html::Document& doc) : doc_(doc) {}

  // #id, then tag[name=...], then a positional path. The boolean reports
  // whether the positional fallback was needed.
  std::pair<std::string, bool> build(const Node& n) {
    if (const auto* id = n.attr("id"); id && !id->empty()) {
      const auto candidate = "#" + *id;
      if (unique(candidate, n)) return {candidate, false};
    }
    if (const auto* name = n.attr("name"); name && !name->empty()) {
      const auto candidate = n.tag() + "[name=" + quote_attr(*name) + "]";
      if (unique(candidate, n)) return {candidate, false};
    }
    return {path(n), true};
  }

 private:
  bool unique(const std::string& candidate, const Node& n) const {
    if (!html::Selector::is_valid(candidate)) return false;
    const auto hits = html::Selector::parse(candidate).select(doc_);
    return hits.size() == 1 && hits.front() == &n;
  }

  // Anchored at the nearest ancestor with a unique id, else at the root.
  std::string path(const Node& n) const {
    std::vector<std::string> steps;
    const Node* cur = &n;
    while (cur && cur->is_element()) {
      if (cur != &n) {
        if (const auto* id = cur->attr("id"); id && !id->empty() && unique("#" + *id, *cur)) {
          steps.push_back("#" + *id);
          break;
        }
      }
      const bool at_root = !cur->parent() || !cur->parent()->is_element();
      steps.push_back(at_root ? cur->tag() : cur->tag() + ":nth-of-type(" + std::to_string(cur->index_of_type()) + ")");
      cur = cur->parent();
    }
    std::string out;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
      if (!out.empty()) out += " > ";
      out += *it;
    }
    return out;
  }

  const html::Document& doc_;
};

std::string collapse_space(std::string_view s) {
  std::string out;
  bool gap = false;
  for (const char c : s) {
    if (text::is_ascii_space(c)) {
      gap = !out.empty();
      continue;
    }
    if (gap) out += ' ';
    gap = false;
    out += c;
  }
  return out;
}

// Visible text usable as a context or description; nullopt if it would not
// pass validation as-is.
std::optional<std::string> usable_text(std::string_view raw) {
  auto s = collapse_space(raw);
  if (s.empty() || !text::is_valid_utf8(s) || *text::code_point_count(s) > kMaxTextLength) return std::nullopt;
  if (text::has_markup_char(s) || text::has_control(s) || text::has_markdown(s)) return std::nullopt;
  return s;
}

std::optional<std::string> label_for(const html::Document& doc, const Node& n) {
  if (const auto* aria = n.attr("aria-label")) return usable_text(*aria);
  if (const auto* id = n.attr("id")) {
    for (const auto* e : doc.elements()) {
      if (e->tag() == "label" && e->attr("for") && *e->attr("for") == *id) return usable_text(html::text_content(*e));
    }
  }
  if (const auto* label = n.closest("label"); label && label != &n) return usable_text(html::text_content(*label));
  if (n.tag() == "button" || n.tag() == "a") return usable_text(html::text_content(n));
  if (n.tag() == "input" && n.attr("value") && is_submit_control(n)) return usable_text(*n.attr("value"));
  if (const auto* placeholder = n.attr("placeholder")) return usable_text(*placeholder);
  return std::nullopt;
}

std::optional<ActionSpec> draft_action(const Node& form, std::vector<std::string>& notes) {
  const auto method = text::to_upper(text::trim(attr_or(form, "method", "GET")));
  const auto verb = parse_verb(method);
  if (!verb) {
    notes.push_back("form method \"" + method + "\" has no action kind");
    return std::nullopt;
  }
  ActionSpec action;
  action.kind = *verb;
  action.endpoint = std::string(text::trim(attr_or(form, "action")));
  if (action.endpoint.empty()) {
    action.endpoint = "./";
    notes.push_back("form has no action attribute; endpoint set to \"./\"");
  }
  return action;
}

void note_hidden_tokens(const html::Document& doc, const Node& form, std::vector<std::string>& notes) {
  for (const auto* e : doc.elements()) {
    if (e->tag() != "input" || input_type(*e) != "hidden" || e->closest("form") != &form) continue;
    const auto name = text::to_lower(attr_or(*e, "name"));
    if (name.find("csrf") != std::string::npos || name.find("xsrf") != std::string::npos) {
      notes.push_back("form carries hidden field \"" + attr_or(*e, "name") +
                      "\"; add a security.csrf policy and csrf_tag");
    }
  }
}

}  // namespace

ScanSuggestion scan_html(std::string_view html) {
  const auto dom = html::Document::parse(html);
  const auto all = dom.elements();
  SelectorBuilder selectors(dom);

  ScanSuggestion out;
  auto& doc = out.document;
  doc.version = "0.2";
  doc.context = "Scanned page";
  for (const auto* e : all) {
    if (e->tag() == "title") {
      if (auto t = usable_text(html::text_content(*e))) doc.context = *t;
      break;
    }
  }

  std::set<const Node*> forms_with_submit;
  for (const auto* e : all) {
    if (is_submit_control(*e)) {
      if (const auto* f = e->closest("form")) forms_with_submit.insert(f);
    }
  }

  std::set<std::string> names;
  for (const auto* e : all) {
    if (!is_interactive(*e)) continue;
    if (e->tag() == "form" && forms_with_submit.contains(e)) continue;

    std::vector<std::string> notes;
    ElementDescriptor d;
    bool positional = false;
    std::tie(d.selector, positional) = selectors.build(*e);
    if (positional) notes.push_back("ambiguous: no unique id or name, positional selector used");
    d.role = role_for(*e, notes);

    const auto category = d.role.substr(0, d.role.find('.'));
    if (category == "input" || category == "select") {
      const auto* source = e->attr("name") ? e->attr("name") : e->attr("id");
      if (source && !source->empty()) {
        const auto name = graph::synthetic_name(*source);
        if (names.insert(name).second) {
          d.name = name;
        } else {
          notes.push_back("name " + name + " is already taken; left unnamed");
        }
      } else {
        notes.push_back("no id or name to derive a parameter name from");
      }
    }
    d.description = label_for(dom, *e);

    if (d.role == "button.submit") {
      const auto* form = e->closest("form");
      d.action = draft_action(*form, notes);
      note_hidden_tokens(dom, *form, notes);
    } else if (d.role == "region.form") {
      d.action = draft_action(*e, notes);
      note_hidden_tokens(dom, *e, notes);
    }

    for (auto& n : notes) out.confidence_notes.push_back({d.selector, std::move(n)});
    doc.elements.push_back(std::move(d));
  }
  return out;
}

}  // namespace wmcp::author
