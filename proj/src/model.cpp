#include "goalnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "goalnet/error.hpp"
#include "goalnet/guard.hpp"

namespace goalnet {

namespace {

[[noreturn]] void reject(const std::string& message, std::string field = {}) {
  throw Error(ErrorCode::InvalidArgument, message, std::move(field));
}

[[noreturn]] void missing(std::string_view what, const EntityId& id) {
  throw Error(ErrorCode::NotFound, std::string(what) + " " + id.str() + " does not exist");
}

void require_name(const std::string& name, std::string_view what) {
  if (name.empty()) reject(std::string(what) + " name must not be empty", "name");
}

void require_finite(Point p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) reject("position must be finite", "position");
}

void require_non_negative(double v, const char* field) {
  if (!std::isfinite(v) || v < 0.0) reject(std::string(field) + " must be a non-negative number", field);
}

EntityKind owner_kind(AssociationKind kind) {
  switch (kind) {
    case AssociationKind::StateFunction: return EntityKind::State;
    case AssociationKind::TransitionTask: return EntityKind::Transition;
    case AssociationKind::TaskFunction: return EntityKind::Task;
  }
  return EntityKind::State;
}

EntityKind member_kind(AssociationKind kind) {
  return kind == AssociationKind::TransitionTask ? EntityKind::Task : EntityKind::Function;
}

}  // namespace

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::GoalNet: return "goalnet";
    case EntityKind::State: return "state";
    case EntityKind::Transition: return "transition";
    case EntityKind::Arc: return "arc";
    case EntityKind::Function: return "function";
    case EntityKind::Task: return "task";
    case EntityKind::Association: return "association";
  }
  return "unknown";
}

std::string_view to_string(StateKind kind) {
  return kind == StateKind::Atomic ? "atomic" : "composite";
}

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::Direct: return "direct";
    case TransitionKind::Conditional: return "conditional";
    case TransitionKind::Probabilistic: return "probabilistic";
  }
  return "unknown";
}

std::string_view to_string(AssociationKind kind) {
  switch (kind) {
    case AssociationKind::StateFunction: return "state_function";
    case AssociationKind::TransitionTask: return "transition_task";
    case AssociationKind::TaskFunction: return "task_function";
  }
  return "unknown";
}

std::optional<EntityKind> entity_kind_from(std::string_view name) {
  for (auto k : {EntityKind::GoalNet, EntityKind::State, EntityKind::Transition, EntityKind::Arc,
                 EntityKind::Function, EntityKind::Task, EntityKind::Association}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<StateKind> state_kind_from(std::string_view name) {
  if (name == "atomic") return StateKind::Atomic;
  if (name == "composite") return StateKind::Composite;
  return std::nullopt;
}

std::optional<TransitionKind> transition_kind_from(std::string_view name) {
  for (auto k : {TransitionKind::Direct, TransitionKind::Conditional, TransitionKind::Probabilistic}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<AssociationKind> association_kind_from(std::string_view name) {
  for (auto k : {AssociationKind::StateFunction, AssociationKind::TransitionTask,
                 AssociationKind::TaskFunction}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

GoalNetDocument GoalNetDocument::create(std::string name, std::string description,
                                        UserId creator) {
  require_name(name, "goal net");
  if (creator.empty()) reject("creator must not be empty", "created_by");
  GoalNetDocument doc;
  doc.header_.id = new_uuid();
  doc.header_.name = std::move(name);
  doc.header_.description = std::move(description);
  doc.header_.created_by = std::move(creator);
  return doc;
}

GoalNetDocument GoalNetDocument::assemble(NetHeader header, std::vector<State> states,
                                          std::vector<Transition> transitions,
                                          std::vector<Arc> arcs,
                                          std::vector<FunctionDef> functions,
                                          std::vector<TaskDef> tasks,
                                          std::vector<Association> associations) {
  GoalNetDocument doc;
  if (header.id.empty()) reject("goal net id is missing", "net.id");
  if (header.name.empty()) reject("goal net name must not be empty", "net.name");
  if (header.version < 0) reject("version must be non-negative", "net.version");

  std::set<EntityId> seen{header.id};
  auto claim = [&](const EntityId& id, const std::string& path) {
    if (id.empty()) reject("missing id", path);
    if (!seen.insert(id).second) reject("duplicate id " + id.str(), path);
  };

  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string path = "states[" + std::to_string(i) + "]";
    claim(states[i].id, path + ".id");
    require_non_negative(states[i].achievement_value, "achievement_value");
    require_non_negative(states[i].cost, "cost");
    if (!std::isfinite(states[i].position.x) || !std::isfinite(states[i].position.y)) {
      reject("position must be finite", path + ".position");
    }
    doc.states_.emplace(states[i].id, std::move(states[i]));
  }
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const std::string path = "transitions[" + std::to_string(i) + "]";
    claim(transitions[i].id, path + ".id");
    if (!std::isfinite(transitions[i].position.x) || !std::isfinite(transitions[i].position.y)) {
      reject("position must be finite", path + ".position");
    }
    doc.transitions_.emplace(transitions[i].id, std::move(transitions[i]));
  }
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    claim(arcs[i].id, "arcs[" + std::to_string(i) + "].id");
  }
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const std::string path = "functions[" + std::to_string(i) + "]";
    claim(functions[i].id, path + ".id");
    if (functions[i].name.empty()) reject("function name must not be empty", path + ".name");
    doc.functions_.emplace(functions[i].id, std::move(functions[i]));
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string path = "tasks[" + std::to_string(i) + "]";
    claim(tasks[i].id, path + ".id");
    if (tasks[i].name.empty()) reject("task name must not be empty", path + ".name");
    doc.tasks_.emplace(tasks[i].id, std::move(tasks[i]));
  }
  for (std::size_t i = 0; i < associations.size(); ++i) {
    claim(associations[i].id, "associations[" + std::to_string(i) + "].id");
  }

  // Hierarchy: parents are composites and chains are acyclic.
  std::size_t index = 0;
  for (const auto& [id, s] : doc.states_) {
    const std::string path = "states[" + s.id.str() + "]";
    if (s.parent_id) {
      const State* p = doc.find_state(*s.parent_id);
      if (!p) reject("parent " + s.parent_id->str() + " does not exist", path + ".parent_id");
      if (p->kind != StateKind::Composite) {
        reject("parent " + p->id.str() + " is not a composite state", path + ".parent_id");
      }
    }
    if (s.kind == StateKind::Atomic && (s.child_start_id || s.child_end_id)) {
      reject("atomic state cannot have child boundaries", path + ".child_start_id");
    }
    for (const auto* boundary : {&s.child_start_id, &s.child_end_id}) {
      if (!*boundary) continue;
      const State* c = doc.find_state(**boundary);
      if (!c || c->parent_id != s.id) {
        reject("boundary " + (*boundary)->str() + " is not a direct child", path +
               (boundary == &s.child_start_id ? ".child_start_id" : ".child_end_id"));
      }
    }
    // Walk up; more steps than states means a cycle.
    std::optional<EntityId> cursor = s.parent_id;
    std::size_t steps = 0;
    while (cursor) {
      if (++steps > doc.states_.size()) reject("parent chain is cyclic", path + ".parent_id");
      cursor = doc.states_.at(*cursor).parent_id;
    }
    ++index;
  }
  for (const auto& [id, t] : doc.transitions_) {
    if (!t.parent_id) continue;
    const State* p = doc.find_state(*t.parent_id);
    if (!p || p->kind != StateKind::Composite) {
      reject("parent " + t.parent_id->str() + " is not a composite state",
             "transitions[" + t.id.str() + "].parent_id");
    }
  }

  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::string path = "arcs[" + std::to_string(i) + "]";
    Arc& a = arcs[i];
    for (const auto* end : {&a.source, &a.target}) {
      const bool ok = (end->kind == EntityKind::State && doc.states_.count(end->id)) ||
                      (end->kind == EntityKind::Transition && doc.transitions_.count(end->id));
      if (!ok) {
        reject("endpoint " + end->id.str() + " does not resolve",
               path + (end == &a.source ? ".source" : ".target"));
      }
    }
    if (a.source.kind == a.target.kind) reject("arc must connect a state and a transition", path);
    if (doc.parent_of(a.source) != doc.parent_of(a.target)) {
      reject("arc endpoints are in different scopes", path);
    }
    if (!std::isfinite(a.weight) || a.weight <= 0.0) reject("weight must be positive", path + ".weight");
    if (a.priority < 0) reject("priority must be non-negative", path + ".priority");
    if (a.guard) {
      try {
        (void)parse_guard(*a.guard);
      } catch (const Error& e) {
        reject(std::string("invalid guard: ") + e.what(), path + ".guard");
      }
    }
    for (const auto& [oid, other] : doc.arcs_) {
      if (other.source == a.source && other.target == a.target) {
        reject("duplicate arc between the same endpoints", path);
      }
    }
    doc.arcs_.emplace(a.id, std::move(a));
  }

  std::set<std::tuple<AssociationKind, EntityId, EntityId>> pairs;
  for (std::size_t i = 0; i < associations.size(); ++i) {
    const std::string path = "associations[" + std::to_string(i) + "]";
    Association& as = associations[i];
    if (doc.kind_of(as.owner_id) != owner_kind(as.kind)) {
      reject("owner " + as.owner_id.str() + " does not match association kind", path + ".owner_id");
    }
    if (doc.kind_of(as.member_id) != member_kind(as.kind)) {
      reject("member " + as.member_id.str() + " does not match association kind", path + ".member_id");
    }
    if (!pairs.emplace(as.kind, as.owner_id, as.member_id).second) {
      reject("duplicate association", path);
    }
    doc.associations_.emplace(as.id, std::move(as));
  }
  // order_index must be a permutation of 0..n-1 per (kind, owner).
  std::map<std::pair<AssociationKind, EntityId>, std::vector<std::int64_t>> orders;
  for (const auto& [id, as] : doc.associations_) orders[{as.kind, as.owner_id}].push_back(as.order_index);
  for (auto& [key, list] : orders) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i] != static_cast<std::int64_t>(i)) {
        reject("order_index values for owner " + key.second.str() + " are not contiguous",
               "associations");
      }
    }
  }

  for (const auto& [field, value] : {std::pair{"net.root_state_id", &header.root_state_id},
                                     std::pair{"net.start_state_id", &header.start_state_id},
                                     std::pair{"net.end_state_id", &header.end_state_id}}) {
    if (*value && !doc.states_.count(**value)) {
      reject("state " + (*value)->str() + " does not exist", field);
    }
  }
  doc.header_ = std::move(header);
  return doc;
}

// ---- lookups ---------------------------------------------------------------

const State& GoalNetDocument::state(const EntityId& id) const {
  auto it = states_.find(id);
  if (it == states_.end()) missing("state", id);
  return it->second;
}

const Transition& GoalNetDocument::transition(const EntityId& id) const {
  auto it = transitions_.find(id);
  if (it == transitions_.end()) missing("transition", id);
  return it->second;
}

const Arc& GoalNetDocument::arc(const EntityId& id) const {
  auto it = arcs_.find(id);
  if (it == arcs_.end()) missing("arc", id);
  return it->second;
}

const FunctionDef& GoalNetDocument::function(const EntityId& id) const {
  auto it = functions_.find(id);
  if (it == functions_.end()) missing("function", id);
  return it->second;
}

const TaskDef& GoalNetDocument::task(const EntityId& id) const {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) missing("task", id);
  return it->second;
}

const Association& GoalNetDocument::association(const EntityId& id) const {
  auto it = associations_.find(id);
  if (it == associations_.end()) missing("association", id);
  return it->second;
}

const State* GoalNetDocument::find_state(const EntityId& id) const {
  auto it = states_.find(id);
  return it == states_.end() ? nullptr : &it->second;
}

const Transition* GoalNetDocument::find_transition(const EntityId& id) const {
  auto it = transitions_.find(id);
  return it == transitions_.end() ? nullptr : &it->second;
}

std::optional<EntityKind> GoalNetDocument::kind_of(const EntityId& id) const {
  if (id == header_.id) return EntityKind::GoalNet;
  if (states_.count(id)) return EntityKind::State;
  if (transitions_.count(id)) return EntityKind::Transition;
  if (arcs_.count(id)) return EntityKind::Arc;
  if (functions_.count(id)) return EntityKind::Function;
  if (tasks_.count(id)) return EntityKind::Task;
  if (associations_.count(id)) return EntityKind::Association;
  return std::nullopt;
}

bool GoalNetDocument::resolves(const EntityRef& ref) const {
  return kind_of(ref.id) == ref.kind;
}

std::string GoalNetDocument::name_of(const EntityRef& ref) const {
  switch (ref.kind) {
    case EntityKind::GoalNet: return header_.name;
    case EntityKind::State: return state(ref.id).name;
    case EntityKind::Transition: return transition(ref.id).name;
    case EntityKind::Arc: return arc(ref.id).name;
    case EntityKind::Function: return function(ref.id).name;
    case EntityKind::Task: return task(ref.id).name;
    case EntityKind::Association: return {};
  }
  return {};
}

std::optional<EntityId> GoalNetDocument::parent_of(const EntityRef& node) const {
  if (node.kind == EntityKind::State) return state(node.id).parent_id;
  return transition(node.id).parent_id;
}

void GoalNetDocument::require_composite_parent(const std::optional<EntityId>& parent_id) const {
  if (!parent_id) return;
  const State* parent = find_state(*parent_id);
  if (!parent) missing("parent state", *parent_id);
  if (parent->kind != StateKind::Composite) {
    reject("parent '" + parent->name + "' is not a composite state", "parent_id");
  }
}

EntityId GoalNetDocument::fresh_id() const {
  for (;;) {
    EntityId id = new_uuid();
    if (!kind_of(id)) return id;
  }
}

// ---- editing ---------------------------------------------------------------

void GoalNetDocument::set_net_info(std::optional<std::string> name,
                                   std::optional<std::string> description) {
  if (name) require_name(*name, "goal net");
  if (name) header_.name = std::move(*name);
  if (description) header_.description = std::move(*description);
}

EntityId GoalNetDocument::add_state(std::optional<EntityId> parent_id, std::string name,
                                    StateKind kind, Point position) {
  require_composite_parent(parent_id);
  require_name(name, "state");
  require_finite(position);
  State s;
  s.id = fresh_id();
  s.name = std::move(name);
  s.kind = kind;
  s.parent_id = std::move(parent_id);
  s.position = position;
  EntityId id = s.id;
  states_.emplace(id, std::move(s));
  return id;
}

EntityId GoalNetDocument::add_transition(std::optional<EntityId> parent_id, std::string name,
                                         TransitionKind kind, Point position) {
  require_composite_parent(parent_id);
  require_name(name, "transition");
  require_finite(position);
  Transition t;
  t.id = fresh_id();
  t.name = std::move(name);
  t.kind = kind;
  t.parent_id = std::move(parent_id);
  t.position = position;
  EntityId id = t.id;
  transitions_.emplace(id, std::move(t));
  return id;
}

EntityId GoalNetDocument::add_arc(const EntityRef& source, const EntityRef& target) {
  for (const auto* end : {&source, &target}) {
    if (end->kind != EntityKind::State && end->kind != EntityKind::Transition) {
      reject("arc endpoints must be states or transitions");
    }
    if (!resolves(*end)) missing(to_string(end->kind), end->id);
  }
  if (source.kind == target.kind) {
    reject("an arc must connect a state and a transition, not two " +
           std::string(to_string(source.kind)) + "s");
  }
  if (parent_of(source) != parent_of(target)) {
    reject("arc endpoints must share the same parent composite");
  }
  for (const auto& [id, a] : arcs_) {
    if (a.source == source && a.target == target) reject("an identical arc already exists");
  }
  Arc a;
  a.id = fresh_id();
  a.source = source;
  a.target = target;
  EntityId id = a.id;
  arcs_.emplace(id, std::move(a));
  return id;
}

void GoalNetDocument::convert_state_kind(const EntityId& state_id, StateKind new_kind,
                                         bool cascade) {
  const State& s = state(state_id);
  if (s.kind == new_kind) return;
  if (new_kind == StateKind::Composite) {
    State& m = states_.at(state_id);
    m.kind = StateKind::Composite;
    m.child_start_id.reset();
    m.child_end_id.reset();
    return;
  }
  const auto descendants = descendants_of(state_id);
  if (!descendants.empty() && !cascade) {
    reject("composite state '" + s.name + "' has " + std::to_string(descendants.size()) +
           " descendants; convert with cascade to delete them");
  }
  std::set<EntityId> doomed;
  for (const auto& ref : descendants) doomed.insert(ref.id);
  erase_closure(doomed);
  State& m = states_.at(state_id);
  m.kind = StateKind::Atomic;
  m.child_start_id.reset();
  m.child_end_id.reset();
}

void GoalNetDocument::set_net_properties(std::optional<EntityId> root,
                                         std::optional<EntityId> start,
                                         std::optional<EntityId> end) {
  for (const auto* id : {&root, &start, &end}) {
    if (*id && !find_state(**id)) missing("state", **id);
  }
  if (root && state(*root).kind != StateKind::Composite) {
    reject("root state '" + state(*root).name + "' must be a composite state", "root_state_id");
  }
  header_.root_state_id = std::move(root);
  header_.start_state_id = std::move(start);
  header_.end_state_id = std::move(end);
}

void GoalNetDocument::set_composite_boundaries(const EntityId& composite_id,
                                               std::optional<EntityId> start_child,
                                               std::optional<EntityId> end_child) {
  const State& c = state(composite_id);
  if (c.kind != StateKind::Composite) reject("'" + c.name + "' is not a composite state");
  for (const auto* child : {&start_child, &end_child}) {
    if (!*child) continue;
    const State* s = find_state(**child);
    if (!s) missing("state", **child);
    if (s->parent_id != composite_id) {
      reject("'" + s->name + "' is not a direct child of '" + c.name + "'");
    }
  }
  State& m = states_.at(composite_id);
  m.child_start_id = std::move(start_child);
  m.child_end_id = std::move(end_child);
}

RemovalReport GoalNetDocument::remove_entities(const std::set<EntityId>& ids) {
  for (const auto& id : ids) {
    const auto kind = kind_of(id);
    if (!kind) missing("entity", id);
    if (*kind == EntityKind::GoalNet) reject("the goal net itself cannot be removed");
  }
  return erase_closure(ids);
}

RemovalReport GoalNetDocument::erase_closure(const std::set<EntityId>& ids) {
  std::set<EntityId> doomed = ids;
  for (const auto& id : ids) {
    const State* s = find_state(id);
    if (s && s->kind == StateKind::Composite) {
      for (const auto& d : descendants_of(id)) doomed.insert(d.id);
    }
  }
  for (const auto& [id, a] : arcs_) {
    if (doomed.count(a.source.id) || doomed.count(a.target.id)) doomed.insert(id);
  }
  std::set<std::pair<AssociationKind, EntityId>> touched_owners;
  for (const auto& [id, as] : associations_) {
    if (doomed.count(as.owner_id) || doomed.count(as.member_id)) doomed.insert(id);
    if (doomed.count(id)) touched_owners.emplace(as.kind, as.owner_id);
  }

  RemovalReport report;
  for (const auto& id : doomed) {
    if (states_.erase(id)) ++report.states;
    else if (transitions_.erase(id)) ++report.transitions;
    else if (arcs_.erase(id)) ++report.arcs;
    else if (functions_.erase(id)) ++report.functions;
    else if (tasks_.erase(id)) ++report.tasks;
    else if (associations_.erase(id)) ++report.associations;
  }

  auto clear_if_removed = [&](std::optional<EntityId>& ref) {
    if (ref && doomed.count(*ref)) ref.reset();
  };
  clear_if_removed(header_.root_state_id);
  clear_if_removed(header_.start_state_id);
  clear_if_removed(header_.end_state_id);
  for (auto& [id, s] : states_) {
    clear_if_removed(s.child_start_id);
    clear_if_removed(s.child_end_id);
  }
  for (const auto& [kind, owner] : touched_owners) {
    if (!doomed.count(owner)) compact_order(kind, owner);
  }
  return report;
}

void GoalNetDocument::move_entities(const std::set<EntityId>& ids, Point delta) {
  require_finite(delta);
  for (const auto& id : ids) {
    const auto kind = kind_of(id);
    if (!kind) missing("entity", id);
    if (*kind != EntityKind::State && *kind != EntityKind::Transition) {
      reject(std::string(to_string(*kind)) + " " + id.str() + " is not movable");
    }
  }
  for (const auto& id : ids) {
    Point* p = states_.count(id) ? &states_.at(id).position : &transitions_.at(id).position;
    const Point moved{p->x + delta.x, p->y + delta.y};
    require_finite(moved);
  }
  for (const auto& id : ids) {
    Point& p = states_.count(id) ? states_.at(id).position : transitions_.at(id).position;
    p.x += delta.x;
    p.y += delta.y;
  }
}

EntityId GoalNetDocument::add_function(std::string name, std::string description,
                                       std::string binding_key) {
  FunctionDef f;
  f.name = std::move(name);
  f.description = std::move(description);
  f.binding_key = std::move(binding_key);
  return insert_function(std::move(f));
}

EntityId GoalNetDocument::add_task(std::string name, std::string description) {
  TaskDef t;
  t.name = std::move(name);
  t.description = std::move(description);
  return insert_task(std::move(t));
}

EntityId GoalNetDocument::insert_function(FunctionDef def) {
  require_name(def.name, "function");
  def.id = fresh_id();
  EntityId id = def.id;
  functions_.emplace(id, std::move(def));
  return id;
}

EntityId GoalNetDocument::insert_task(TaskDef def) {
  require_name(def.name, "task");
  def.id = fresh_id();
  EntityId id = def.id;
  tasks_.emplace(id, std::move(def));
  return id;
}

EntityId GoalNetDocument::associate(AssociationKind kind, const EntityId& owner_id,
                                    const EntityId& member_id) {
  const auto ok = kind_of(owner_id);
  if (!ok) missing("owner", owner_id);
  const auto mk = kind_of(member_id);
  if (!mk) missing("member", member_id);
  if (*ok != owner_kind(kind) || *mk != member_kind(kind)) {
    reject(std::string(to_string(kind)) + " association needs a " +
           std::string(to_string(owner_kind(kind))) + " owner and a " +
           std::string(to_string(member_kind(kind))) + " member");
  }
  const auto existing = associations_of(kind, owner_id);
  for (const auto& as : existing) {
    if (as.member_id == member_id) reject("association already exists");
  }
  Association as;
  as.id = fresh_id();
  as.kind = kind;
  as.owner_id = owner_id;
  as.member_id = member_id;
  as.order_index = static_cast<std::int64_t>(existing.size());
  EntityId id = as.id;
  associations_.emplace(id, std::move(as));
  return id;
}

void GoalNetDocument::dissociate(const EntityId& association_id) {
  const Association as = association(association_id);
  associations_.erase(association_id);
  compact_order(as.kind, as.owner_id);
}

void GoalNetDocument::compact_order(AssociationKind kind, const EntityId& owner_id) {
  std::int64_t next = 0;
  for (const auto& as : associations_of(kind, owner_id)) {
    associations_.at(as.id).order_index = next++;
  }
}

void GoalNetDocument::update_state(const EntityId& id, const StateUpdate& update) {
  (void)state(id);
  if (update.name) require_name(*update.name, "state");
  if (update.achievement_value) require_non_negative(*update.achievement_value, "achievement_value");
  if (update.cost) require_non_negative(*update.cost, "cost");
  State& s = states_.at(id);
  if (update.name) s.name = *update.name;
  if (update.description) s.description = *update.description;
  if (update.achievement_value) s.achievement_value = *update.achievement_value;
  if (update.cost) s.cost = *update.cost;
}

void GoalNetDocument::update_transition(const EntityId& id, const TransitionUpdate& update) {
  (void)transition(id);
  if (update.name) require_name(*update.name, "transition");
  Transition& t = transitions_.at(id);
  if (update.name) t.name = *update.name;
  if (update.description) t.description = *update.description;
  if (update.kind) t.kind = *update.kind;
}

void GoalNetDocument::update_arc(const EntityId& id, const ArcUpdate& update) {
  (void)arc(id);
  if (update.weight && (!std::isfinite(*update.weight) || *update.weight <= 0.0)) {
    reject("weight must be a positive number", "weight");
  }
  if (update.priority && *update.priority < 0) reject("priority must be non-negative", "priority");
  if (update.guard && *update.guard) {
    try {
      (void)parse_guard(**update.guard);
    } catch (const Error& e) {
      reject(std::string("invalid guard: ") + e.what(), "guard");
    }
  }
  Arc& a = arcs_.at(id);
  if (update.name) a.name = *update.name;
  if (update.description) a.description = *update.description;
  if (update.guard) a.guard = *update.guard;
  if (update.weight) a.weight = *update.weight;
  if (update.priority) a.priority = *update.priority;
}

void GoalNetDocument::update_function(const EntityId& id, const DefinitionUpdate& update) {
  (void)function(id);
  if (update.name) require_name(*update.name, "function");
  FunctionDef& f = functions_.at(id);
  if (update.name) f.name = *update.name;
  if (update.description) f.description = *update.description;
  if (update.binding_key) f.binding_key = *update.binding_key;
}

void GoalNetDocument::update_task(const EntityId& id, const DefinitionUpdate& update) {
  (void)task(id);
  if (update.name) require_name(*update.name, "task");
  if (update.binding_key) reject("tasks have no binding key", "binding_key");
  TaskDef& t = tasks_.at(id);
  if (update.name) t.name = *update.name;
  if (update.description) t.description = *update.description;
}

// ---- queries ---------------------------------------------------------------

template <typename T>
std::vector<EntityId> GoalNetDocument::sorted_by_name(const std::vector<EntityId>& ids,
                                                      const std::map<EntityId, T>& table) const {
  std::vector<EntityId> out = ids;
  std::sort(out.begin(), out.end(), [&](const EntityId& a, const EntityId& b) {
    return std::tie(table.at(a).name, a) < std::tie(table.at(b).name, b);
  });
  return out;
}

std::vector<EntityId> GoalNetDocument::inputs_of(const EntityId& transition_id) const {
  (void)transition(transition_id);
  std::vector<EntityId> ids;
  for (const auto& [id, a] : arcs_) {
    if (a.target.id == transition_id && a.source.kind == EntityKind::State) ids.push_back(a.source.id);
  }
  return sorted_by_name(ids, states_);
}

std::vector<EntityId> GoalNetDocument::outputs_of(const EntityId& transition_id) const {
  (void)transition(transition_id);
  std::vector<EntityId> ids;
  for (const auto& [id, a] : arcs_) {
    if (a.source.id == transition_id && a.target.kind == EntityKind::State) ids.push_back(a.target.id);
  }
  return sorted_by_name(ids, states_);
}

std::vector<EntityId> GoalNetDocument::arcs_of(const EntityId& node_id) const {
  const auto kind = kind_of(node_id);
  if (!kind) missing("entity", node_id);
  if (*kind != EntityKind::State && *kind != EntityKind::Transition) {
    reject("arcs_of needs a state or transition");
  }
  std::vector<EntityId> ids;
  for (const auto& [id, a] : arcs_) {
    if (a.source.id == node_id || a.target.id == node_id) ids.push_back(id);
  }
  return sorted_by_name(ids, arcs_);
}

std::vector<EntityRef> GoalNetDocument::children_of(const EntityId& composite_id) const {
  const State& c = state(composite_id);
  if (c.kind != StateKind::Composite) reject("'" + c.name + "' is not a composite state");
  std::vector<std::pair<std::string, EntityRef>> keyed;
  for (const auto& [id, s] : states_) {
    if (s.parent_id == composite_id) keyed.push_back({s.name, {EntityKind::State, id}});
  }
  for (const auto& [id, t] : transitions_) {
    if (t.parent_id == composite_id) keyed.push_back({t.name, {EntityKind::Transition, id}});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second.id) < std::tie(b.first, b.second.id);
  });
  std::vector<EntityRef> out;
  for (auto& [name, ref] : keyed) out.push_back(std::move(ref));
  return out;
}

std::vector<EntityRef> GoalNetDocument::descendants_of(const EntityId& composite_id) const {
  std::vector<EntityRef> out;
  std::vector<EntityId> frontier{composite_id};
  while (!frontier.empty()) {
    const EntityId current = frontier.back();
    frontier.pop_back();
    for (const auto& [id, s] : states_) {
      if (s.parent_id == current) {
        out.push_back({EntityKind::State, id});
        frontier.push_back(id);
      }
    }
    for (const auto& [id, t] : transitions_) {
      if (t.parent_id == current) out.push_back({EntityKind::Transition, id});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Association> GoalNetDocument::associations_of(AssociationKind kind,
                                                          const EntityId& owner_id) const {
  std::vector<Association> out;
  for (const auto& [id, as] : associations_) {
    if (as.kind == kind && as.owner_id == owner_id) out.push_back(as);
  }
  std::sort(out.begin(), out.end(),
            [](const Association& a, const Association& b) { return a.order_index < b.order_index; });
  return out;
}

std::vector<EntityId> GoalNetDocument::functions_of(const EntityId& owner_id) const {
  const auto kind = kind_of(owner_id);
  if (!kind) missing("entity", owner_id);
  AssociationKind assoc;
  if (*kind == EntityKind::State) assoc = AssociationKind::StateFunction;
  else if (*kind == EntityKind::Task) assoc = AssociationKind::TaskFunction;
  else reject("functions_of needs a state or task");
  std::vector<EntityId> out;
  for (const auto& as : associations_of(assoc, owner_id)) out.push_back(as.member_id);
  return out;
}

std::vector<EntityId> GoalNetDocument::tasks_of(const EntityId& transition_id) const {
  (void)transition(transition_id);
  std::vector<EntityId> out;
  for (const auto& as : associations_of(AssociationKind::TransitionTask, transition_id)) {
    out.push_back(as.member_id);
  }
  return out;
}

}  // namespace goalnet
