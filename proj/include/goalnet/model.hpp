#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "goalnet/ids.hpp"

namespace goalnet {

enum class EntityKind { GoalNet, State, Transition, Arc, Function, Task, Association };
enum class StateKind { Atomic, Composite };
enum class TransitionKind { Direct, Conditional, Probabilistic };
enum class AssociationKind { StateFunction, TransitionTask, TaskFunction };

std::string_view to_string(EntityKind kind);
std::string_view to_string(StateKind kind);
std::string_view to_string(TransitionKind kind);
std::string_view to_string(AssociationKind kind);

// Inverse of to_string; nullopt for unknown names.
std::optional<EntityKind> entity_kind_from(std::string_view name);
std::optional<StateKind> state_kind_from(std::string_view name);
std::optional<TransitionKind> transition_kind_from(std::string_view name);
std::optional<AssociationKind> association_kind_from(std::string_view name);

struct EntityRef {
  EntityKind kind = EntityKind::State;
  EntityId id;

  auto operator<=>(const EntityRef&) const = default;
  bool operator==(const EntityRef&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

struct State {
  EntityId id;
  std::string name;
  std::string description;
  StateKind kind = StateKind::Atomic;
  double achievement_value = 0.0;
  double cost = 0.0;
  std::optional<EntityId> parent_id;
  std::optional<EntityId> child_start_id;
  std::optional<EntityId> child_end_id;
  Point position;

  bool operator==(const State&) const = default;
};

struct Transition {
  EntityId id;
  std::string name;
  std::string description;
  TransitionKind kind = TransitionKind::Direct;
  std::optional<EntityId> parent_id;
  Point position;

  bool operator==(const Transition&) const = default;
};

struct Arc {
  EntityId id;
  std::string name;
  std::string description;
  EntityRef source;
  EntityRef target;
  std::optional<std::string> guard;
  double weight = 1.0;
  std::int64_t priority = 0;

  bool operator==(const Arc&) const = default;
};

struct FunctionDef {
  EntityId id;
  std::string name;
  std::string description;
  std::string binding_key;

  bool operator==(const FunctionDef&) const = default;
};

struct TaskDef {
  EntityId id;
  std::string name;
  std::string description;

  bool operator==(const TaskDef&) const = default;
};

struct Association {
  EntityId id;
  AssociationKind kind = AssociationKind::StateFunction;
  EntityId owner_id;
  EntityId member_id;
  std::int64_t order_index = 0;

  bool operator==(const Association&) const = default;
};

struct NetHeader {
  EntityId id;
  std::string name;
  std::string description;
  std::optional<EntityId> root_state_id;
  std::optional<EntityId> start_state_id;
  std::optional<EntityId> end_state_id;
  UserId created_by;
  std::int64_t version = 0;

  bool operator==(const NetHeader&) const = default;
};

struct RemovalReport {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t arcs = 0;
  std::size_t functions = 0;
  std::size_t tasks = 0;
  std::size_t associations = 0;

  std::size_t total() const { return states + transitions + arcs + functions + tasks + associations; }
  bool operator==(const RemovalReport&) const = default;
};

// Partial updates; unset fields are left alone.
struct StateUpdate {
  std::optional<std::string> name;
  std::optional<std::string> description;
  std::optional<double> achievement_value;
  std::optional<double> cost;
};

struct TransitionUpdate {
  std::optional<std::string> name;
  std::optional<std::string> description;
  std::optional<TransitionKind> kind;
};

struct ArcUpdate {
  std::optional<std::string> name;
  std::optional<std::string> description;
  // Outer optional: change or not. Inner: the new guard, or none to clear it.
  std::optional<std::optional<std::string>> guard;
  std::optional<double> weight;
  std::optional<std::int64_t> priority;
};

struct DefinitionUpdate {
  std::optional<std::string> name;
  std::optional<std::string> description;
  std::optional<std::string> binding_key;  // functions only
};

/// In-memory model of one Goal Net.
///
/// Every editing operation either succeeds completely or throws goalnet::Error
/// and leaves the document untouched. Collections are keyed by id so iteration
/// order (and therefore serialization) is deterministic.
class GoalNetDocument {
 public:
  static GoalNetDocument create(std::string name, std::string description, UserId creator);

  /// Builds a document from already-identified parts (import, store load).
  /// Checks referential integrity and throws Error(InvalidArgument) with the
  /// offending field path on the first violation.
  static GoalNetDocument assemble(NetHeader header, std::vector<State> states,
                                  std::vector<Transition> transitions, std::vector<Arc> arcs,
                                  std::vector<FunctionDef> functions, std::vector<TaskDef> tasks,
                                  std::vector<Association> associations);

  const NetHeader& header() const noexcept { return header_; }
  const EntityId& id() const noexcept { return header_.id; }
  const std::string& name() const noexcept { return header_.name; }
  std::int64_t version() const noexcept { return header_.version; }
  void set_version(std::int64_t v) noexcept { header_.version = v; }

  const std::map<EntityId, State>& states() const noexcept { return states_; }
  const std::map<EntityId, Transition>& transitions() const noexcept { return transitions_; }
  const std::map<EntityId, Arc>& arcs() const noexcept { return arcs_; }
  const std::map<EntityId, FunctionDef>& functions() const noexcept { return functions_; }
  const std::map<EntityId, TaskDef>& tasks() const noexcept { return tasks_; }
  const std::map<EntityId, Association>& associations() const noexcept { return associations_; }

  // Lookups throw Error(NotFound) for unknown ids; find_* return nullptr instead.
  const State& state(const EntityId& id) const;
  const Transition& transition(const EntityId& id) const;
  const Arc& arc(const EntityId& id) const;
  const FunctionDef& function(const EntityId& id) const;
  const TaskDef& task(const EntityId& id) const;
  const Association& association(const EntityId& id) const;
  const State* find_state(const EntityId& id) const;
  const Transition* find_transition(const EntityId& id) const;

  /// Kind of the entity with this id, if any (the net itself reports GoalNet).
  std::optional<EntityKind> kind_of(const EntityId& id) const;
  std::string name_of(const EntityRef& ref) const;
  bool resolves(const EntityRef& ref) const;

  // ---- editing ----

  void set_net_info(std::optional<std::string> name, std::optional<std::string> description);
  EntityId add_state(std::optional<EntityId> parent_id, std::string name, StateKind kind,
                     Point position);
  EntityId add_transition(std::optional<EntityId> parent_id, std::string name,
                          TransitionKind kind, Point position);
  EntityId add_arc(const EntityRef& source, const EntityRef& target);
  void convert_state_kind(const EntityId& state_id, StateKind new_kind, bool cascade);
  void set_net_properties(std::optional<EntityId> root, std::optional<EntityId> start,
                          std::optional<EntityId> end);
  void set_composite_boundaries(const EntityId& composite_id, std::optional<EntityId> start_child,
                                std::optional<EntityId> end_child);
  RemovalReport remove_entities(const std::set<EntityId>& ids);
  void move_entities(const std::set<EntityId>& ids, Point delta);
  EntityId add_function(std::string name, std::string description, std::string binding_key);
  EntityId add_task(std::string name, std::string description);
  EntityId associate(AssociationKind kind, const EntityId& owner_id, const EntityId& member_id);
  void dissociate(const EntityId& association_id);

  void update_state(const EntityId& id, const StateUpdate& update);
  void update_transition(const EntityId& id, const TransitionUpdate& update);
  void update_arc(const EntityId& id, const ArcUpdate& update);
  void update_function(const EntityId& id, const DefinitionUpdate& update);
  void update_task(const EntityId& id, const DefinitionUpdate& update);

  // Inserts a copy of an existing definition under a fresh id (clone support).
  EntityId insert_function(FunctionDef def);
  EntityId insert_task(TaskDef def);

  // ---- queries ----
  // Entity lists are ordered by name, then id. Association-backed lists
  // (functions_of, tasks_of) follow order_index, the execution order.

  std::vector<EntityId> inputs_of(const EntityId& transition_id) const;
  std::vector<EntityId> outputs_of(const EntityId& transition_id) const;
  std::vector<EntityId> arcs_of(const EntityId& node_id) const;
  std::vector<EntityRef> children_of(const EntityId& composite_id) const;
  std::vector<EntityId> functions_of(const EntityId& owner_id) const;
  std::vector<EntityId> tasks_of(const EntityId& transition_id) const;
  /// Associations of one kind owned by `owner_id`, by order_index.
  std::vector<Association> associations_of(AssociationKind kind, const EntityId& owner_id) const;

  /// All states and transitions strictly below `composite_id`.
  std::vector<EntityRef> descendants_of(const EntityId& composite_id) const;

  bool operator==(const GoalNetDocument&) const = default;

 private:
  GoalNetDocument() = default;

  std::optional<EntityId> parent_of(const EntityRef& node) const;
  void require_composite_parent(const std::optional<EntityId>& parent_id) const;
  EntityId fresh_id() const;
  template <typename T>
  std::vector<EntityId> sorted_by_name(const std::vector<EntityId>& ids,
                                       const std::map<EntityId, T>& table) const;
  // Removes without checking; compacts association order afterwards.
  RemovalReport erase_closure(const std::set<EntityId>& ids);
  void compact_order(AssociationKind kind, const EntityId& owner_id);

  NetHeader header_;
  std::map<EntityId, State> states_;
  std::map<EntityId, Transition> transitions_;
  std::map<EntityId, Arc> arcs_;
  std::map<EntityId, FunctionDef> functions_;
  std::map<EntityId, TaskDef> tasks_;
  std::map<EntityId, Association> associations_;
};

}  // namespace goalnet
