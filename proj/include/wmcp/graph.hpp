#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmcp/document.hpp"

namespace wmcp::graph {

struct Node {
  std::string name;
  bool synthetic_name = false;  // derived from the selector
  std::size_t index = 0;        // position in the document
  ElementDescriptor element;

  bool is_action() const noexcept { return element.action.has_value(); }
  // Nodes that take a value: input.* and select.*.
  bool is_input() const noexcept;
};

class InteractionGraph {
 public:
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::size_t>& actions() const noexcept { return actions_; }
  const Node* find(std::string_view name) const noexcept;
  bool empty() const noexcept { return nodes_.empty(); }

 private:
  friend InteractionGraph build_graph(const WmcpDocument& doc);
  std::vector<Node> nodes_;
  std::vector<std::size_t> actions_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

// "#loginBtn" -> "LOGINBTN": non-alphanumeric runs become '_', trimmed, and
// uppercased; a leading digit gets an "E_" prefix.
std::string synthetic_name(std::string_view selector);

// Throws DuplicateName when two elements share an explicit name, and
// SchemaViolation when an action's symbolic endpoint has no policy.
// Synthetic names that collide take a numeric suffix ("_2", "_3", ...).
InteractionGraph build_graph(const WmcpDocument& doc);

enum class StepOp { Fill, Submit };
std::string_view to_string(StepOp op) noexcept;

struct PlanStep {
  std::string name;
  StepOp op = StepOp::Fill;
  std::optional<std::string> param;  // parameter slot for fill steps

  bool operator==(const PlanStep&) const = default;
};

struct ActionPlan {
  std::string goal;
  std::vector<PlanStep> steps;

  const PlanStep& submit() const { return steps.back(); }
  bool operator==(const ActionPlan&) const = default;
};

using Params = std::map<std::string, std::string, std::less<>>;

// Fill steps for every input node named in `params`, in document order, then
// one submit on the first action node (button.submit preferred). The goal is
// carried but never interpreted.
// Throws NoActionableElement, or MissingParam naming an input node between the
// previous action node and the chosen one that has no parameter.
ActionPlan plan_for_goal(const InteractionGraph& graph, std::string goal, const Params& params);

// The document's elements array in canonical form; no security block.
std::string elements_payload(const WmcpDocument& doc);

struct AgentPrompt {
  std::string goal;
  std::string elements_json;
  Params user_params;

  // {"goal": ..., "elements": <elements_json>, "params": {...}}
  std::string render() const;
};

AgentPrompt make_prompt(std::string goal, const WmcpDocument& doc, Params params);

// Each maximal ASCII alphanumeric run costs ceil(len/4), every other
// non-whitespace code point 1, whitespace 0. Invalid UTF-8 bytes cost 1 each.
std::size_t estimate_tokens(std::string_view text) noexcept;

struct TokenReport {
  std::string scenario;
  std::size_t tokens_full_html = 0;
  std::size_t tokens_elements_payload = 0;
  double reduction_pct = 0.0;

  bool operator==(const TokenReport&) const = default;
};

double reduction_pct(std::size_t full, std::size_t payload) noexcept;

// Throws ZeroHtmlTokens when the page has no tokens.
TokenReport token_report(std::string scenario, std::string_view full_html, const WmcpDocument& doc);
// Sums counts and recomputes the reduction. Throws ZeroHtmlTokens if the sum is 0.
TokenReport combine_reports(std::string scenario, const std::vector<TokenReport>& pages);

}  // namespace wmcp::graph
