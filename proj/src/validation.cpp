#include "goalnet/validation.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <tuple>

namespace goalnet {

std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

std::string_view to_string(Rule r) {
  static constexpr std::array<std::string_view, 11> kCodes = {"E1", "E2", "E3", "E4", "E5", "E6",
                                                              "W1", "W2", "W3", "W4", "W5"};
  return kCodes[static_cast<std::size_t>(r)];
}

std::optional<Rule> rule_from(std::string_view code) {
  for (int i = 0; i <= static_cast<int>(Rule::W5); ++i) {
    if (to_string(static_cast<Rule>(i)) == code) return static_cast<Rule>(i);
  }
  return std::nullopt;
}

Severity severity_of(Rule r) { return r <= Rule::E6 ? Severity::Error : Severity::Warning; }

std::string_view to_string(NavigationTarget t) {
  switch (t) {
    case NavigationTarget::NetPropertiesDialog: return "net_properties_dialog";
    case NavigationTarget::StateOnCanvas: return "state_on_canvas";
    case NavigationTarget::TransitionOnCanvas: return "transition_on_canvas";
    case NavigationTarget::StateFunctionsDialog: return "state_functions_dialog";
    case NavigationTarget::TransitionTasksDialog: return "transition_tasks_dialog";
    case NavigationTarget::TaskManagerDialog: return "task_manager_dialog";
  }
  return "unknown";
}

const RuleInfo& explain(Rule rule) {
  static const std::array<RuleInfo, 11> kCatalog = {{
      {Rule::E1, "Missing net property", "Open the Goal Net properties and set the root, start, and end states.",
       NavigationTarget::NetPropertiesDialog},
      {Rule::E2, "Root is not composite", "Choose a composite state as root, or convert the root state to composite.",
       NavigationTarget::NetPropertiesDialog},
      {Rule::E3, "Composite without boundaries", "Set the start and end child states of the composite state.",
       NavigationTarget::StateOnCanvas},
      {Rule::E4, "Unconnected state", "Connect the state to a transition with an arc, or remove it.",
       NavigationTarget::StateOnCanvas},
      {Rule::E5, "Unconnected transition", "Connect the transition to an input and an output state.",
       NavigationTarget::TransitionOnCanvas},
      {Rule::E6, "One-sided transition", "Add the missing incoming or outgoing arc to the transition.",
       NavigationTarget::TransitionOnCanvas},
      {Rule::W1, "State without functions", "Associate at least one function with the state.",
       NavigationTarget::StateFunctionsDialog},
      {Rule::W2, "Transition without tasks", "Associate at least one task with the transition.",
       NavigationTarget::TransitionTasksDialog},
      {Rule::W3, "Task without functions", "Add functions to the task in the task manager.",
       NavigationTarget::TaskManagerDialog},
      {Rule::W4, "Source-only state", "Add an incoming arc or make the state a start state.",
       NavigationTarget::StateOnCanvas},
      {Rule::W5, "Sink-only state", "Add an outgoing arc or make the state an end state.",
       NavigationTarget::StateOnCanvas},
  }};
  return kCatalog[static_cast<std::size_t>(rule)];
}

namespace {

struct ArcCounts {
  std::size_t incoming = 0;
  std::size_t outgoing = 0;
};

/// Read-only facts shared by all validators.
struct Context {
  const GoalNetDocument& doc;
  std::map<EntityId, ArcCounts> arcs;
  std::map<std::pair<AssociationKind, EntityId>, std::size_t> owned;

  explicit Context(const GoalNetDocument& d) : doc(d) {
    for (const auto& [id, a] : d.arcs()) {
      ++arcs[a.source.id].outgoing;
      ++arcs[a.target.id].incoming;
    }
    for (const auto& [id, as] : d.associations()) ++owned[{as.kind, as.owner_id}];
  }

  ArcCounts counts(const EntityId& id) const {
    auto it = arcs.find(id);
    return it == arcs.end() ? ArcCounts{} : it->second;
  }

  bool owns(AssociationKind kind, const EntityId& id) const { return owned.count({kind, id}) > 0; }
};

class Validator {
 public:
  virtual ~Validator() = default;
  virtual void check(const Context& ctx, std::vector<Diagnostic>& out) const = 0;

 protected:
  static void emit(std::vector<Diagnostic>& out, Rule rule, std::string message, EntityRef subject,
                   std::string subject_name) {
    out.push_back({severity_of(rule), rule, std::move(message), std::move(subject), std::move(subject_name)});
  }
};

class NetValidator final : public Validator {
 public:
  void check(const Context& ctx, std::vector<Diagnostic>& out) const override {
    const NetHeader& h = ctx.doc.header();
    const EntityRef net{EntityKind::GoalNet, h.id};
    if (!h.root_state_id) emit(out, Rule::E1, "This Goal Net has no root state.", net, h.name);
    if (!h.start_state_id) emit(out, Rule::E1, "This Goal Net has no start state.", net, h.name);
    if (!h.end_state_id) emit(out, Rule::E1, "This Goal Net has no end state.", net, h.name);
    if (h.root_state_id) {
      const State& root = ctx.doc.state(*h.root_state_id);
      if (root.kind != StateKind::Composite) {
        emit(out, Rule::E2, "Root state " + root.name + " is not a composite state.",
             {EntityKind::State, root.id}, root.name);
      }
    }
  }
};

class StateValidator final : public Validator {
 public:
  void check(const Context& ctx, std::vector<Diagnostic>& out) const override {
    const NetHeader& h = ctx.doc.header();
    for (const auto& [id, s] : ctx.doc.states()) {
      const EntityRef ref{EntityKind::State, id};
      const ArcCounts c = ctx.counts(id);
      if (s.kind == StateKind::Composite) {
        if (!s.child_start_id) emit(out, Rule::E3, "Composite state " + s.name + " has no start state.", ref, s.name);
        if (!s.child_end_id) emit(out, Rule::E3, "Composite state " + s.name + " has no end state.", ref, s.name);
      }
      if (c.incoming + c.outgoing == 0 && h.root_state_id != id) {
        emit(out, Rule::E4,
             "State " + s.name + " is not connected to any transition and it's not the root state.", ref,
             s.name);
      }
      if (!ctx.owns(AssociationKind::StateFunction, id)) {
        emit(out, Rule::W1, "State " + s.name + " has no associated function.", ref, s.name);
      }
      const State* parent = s.parent_id ? ctx.doc.find_state(*s.parent_id) : nullptr;
      if (c.outgoing > 0 && c.incoming == 0) {
        const bool is_start = h.start_state_id == id || (parent && parent->child_start_id == id);
        if (!is_start) {
          emit(out, Rule::W4, "State " + s.name + " has only outgoing arcs but it is not start state.", ref,
               s.name);
        }
      }
      if (c.incoming > 0 && c.outgoing == 0) {
        const bool is_end = h.end_state_id == id || (parent && parent->child_end_id == id);
        if (!is_end) {
          emit(out, Rule::W5, "State " + s.name + " has only incoming arcs but it is not end state.", ref,
               s.name);
        }
      }
    }
  }
};

class TransitionValidator final : public Validator {
 public:
  void check(const Context& ctx, std::vector<Diagnostic>& out) const override {
    for (const auto& [id, t] : ctx.doc.transitions()) {
      const EntityRef ref{EntityKind::Transition, id};
      const ArcCounts c = ctx.counts(id);
      if (c.incoming + c.outgoing == 0) {
        emit(out, Rule::E5, "Transition " + t.name + " is not connected to any state.", ref, t.name);
      } else if (c.incoming == 0) {
        emit(out, Rule::E6, "Transition " + t.name + " has only outgoing arcs.", ref, t.name);
      } else if (c.outgoing == 0) {
        emit(out, Rule::E6, "Transition " + t.name + " has only incoming arcs.", ref, t.name);
      }
      if (!ctx.owns(AssociationKind::TransitionTask, id)) {
        emit(out, Rule::W2, "Transition " + t.name + " has no associated task.", ref, t.name);
      }
    }
  }
};

class TaskValidator final : public Validator {
 public:
  void check(const Context& ctx, std::vector<Diagnostic>& out) const override {
    for (const auto& [id, t] : ctx.doc.tasks()) {
      if (!ctx.owns(AssociationKind::TaskFunction, id)) {
        emit(out, Rule::W3, "Task " + t.name + " has no associated function.", {EntityKind::Task, id}, t.name);
      }
    }
  }
};

const std::vector<std::unique_ptr<Validator>>& validators() {
  static const auto kValidators = [] {
    std::vector<std::unique_ptr<Validator>> v;
    v.push_back(std::make_unique<NetValidator>());
    v.push_back(std::make_unique<StateValidator>());
    v.push_back(std::make_unique<TransitionValidator>());
    v.push_back(std::make_unique<TaskValidator>());
    return v;
  }();
  return kValidators;
}

}  // namespace

ValidationReport validate(const GoalNetDocument& doc) {
  const Context ctx(doc);
  ValidationReport report;
  for (const auto& v : validators()) v->check(ctx, report.diagnostics);
  std::stable_sort(report.diagnostics.begin(), report.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) {
                     return std::tie(a.rule, a.subject_name, a.subject.id) <
                            std::tie(b.rule, b.subject_name, b.subject.id);
                   });
  for (const auto& d : report.diagnostics) {
    (d.severity == Severity::Error ? report.error_count : report.warning_count)++;
  }
  return report;
}

std::vector<Diagnostic> validate_for_run(const GoalNetDocument& doc) {
  std::vector<Diagnostic> errors;
  for (auto& d : validate(doc).diagnostics) {
    if (d.severity == Severity::Error) errors.push_back(std::move(d));
  }
  return errors;
}

}  // namespace goalnet
