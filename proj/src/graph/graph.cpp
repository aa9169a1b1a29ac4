#include <json.hpp>

#include "wmcp/graph.hpp"
#include "wmcp/text.hpp"

namespace wmcp::graph {

bool Node::is_input() const noexcept {
  const auto category = element.role_category();
  return category == "input" || category == "select";
}

const Node* InteractionGraph::find(std::string_view name) const noexcept {
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &nodes_[it->second];
}

std::string synthetic_name(std::string_view selector) {
  std::string out;
  bool gap = false;
  for (const char c : selector) {
    if (text::is_ascii_alnum(c)) {
      if (gap && !out.empty()) out += '_';
      gap = false;
      out += c;
    } else {
      gap = true;
    }
  }
  out = text::to_upper(out);
  if (out.empty()) return "ELEMENT";
  if (out.front() >= '0' && out.front() <= '9') out = "E_" + out;
  return out;
}

InteractionGraph build_graph(const WmcpDocument& doc) {
  InteractionGraph g;
  // Explicit names are claimed first so synthetic ones never shadow them.
  for (const auto& e : doc.elements) {
    if (!e.name) continue;
    if (!g.by_name_.emplace(*e.name, 0).second) {
      throw Error(ErrorCode::DuplicateName, "two elements are named \"" + *e.name + "\"");
    }
  }
  for (std::size_t i = 0; i < doc.elements.size(); ++i) {
    const auto& e = doc.elements[i];
    Node node;
    node.index = i;
    node.element = e;
    if (e.name) {
      node.name = *e.name;
    } else {
      const auto base = synthetic_name(e.selector);
      node.name = base;
      for (int n = 2; g.by_name_.contains(node.name); ++n) node.name = base + "_" + std::to_string(n);
      node.synthetic_name = true;
    }
    g.by_name_[node.name] = i;
    if (e.action) {
      if (e.action->is_symbolic() &&
          (!doc.security || !doc.security->endpoints.contains(e.action->endpoint))) {
        throw Error(ErrorCode::SchemaViolation, "no policy for endpoint \"" + e.action->endpoint + "\"");
      }
      g.actions_.push_back(i);
    }
    g.nodes_.push_back(std::move(node));
  }
  return g;
}

std::string_view to_string(StepOp op) noexcept { return op == StepOp::Fill ? "fill" : "submit"; }

ActionPlan plan_for_goal(const InteractionGraph& graph, std::string goal, const Params& params) {
  if (graph.actions().empty()) throw Error(ErrorCode::NoActionableElement, "the graph has no action node");
  const auto& nodes = graph.nodes();
  std::size_t chosen = graph.actions().front();
  for (const auto i : graph.actions()) {
    if (nodes[i].element.role == "button.submit") {
      chosen = i;
      break;
    }
  }
  // The action's flow: inputs after the previous action node.
  std::size_t flow_start = 0;
  for (const auto i : graph.actions()) {
    if (i < chosen) flow_start = i + 1;
  }
  for (std::size_t i = flow_start; i < chosen; ++i) {
    if (nodes[i].is_input() && !params.contains(nodes[i].name)) {
      throw Error(ErrorCode::MissingParam, "no value supplied for \"" + nodes[i].name + "\"");
    }
  }
  ActionPlan plan;
  plan.goal = std::move(goal);
  for (const auto& n : nodes) {
    if (n.is_input() && params.contains(n.name)) plan.steps.push_back({n.name, StepOp::Fill, n.name});
  }
  plan.steps.push_back({nodes[chosen].name, StepOp::Submit, std::nullopt});
  return plan;
}

std::string elements_payload(const WmcpDocument& doc) { return serialize_elements(doc.elements); }

std::string AgentPrompt::render() const {
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  for (const auto& [k, v] : user_params) p[k] = v;
  return R"({"goal":)" + nlohmann::json(goal).dump() + R"(,"elements":)" + elements_json + R"(,"params":)" +
         p.dump() + "}";
}

AgentPrompt make_prompt(std::string goal, const WmcpDocument& doc, Params params) {
  return {std::move(goal), elements_payload(doc), std::move(params)};
}

}  // namespace wmcp::graph
