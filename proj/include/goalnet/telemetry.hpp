#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "goalnet/model.hpp"
#include "goalnet/records.hpp"
#include "goalnet/store.hpp"

namespace goalnet {

/// GoalNet: Open, Close, Edit. State and Transition: Create, Edit, Move,
/// Delete. Every other object type: Create, Edit, Delete.
bool is_allowed(ObjectType object, ActionType action);

ObjectType object_type_of(EntityKind kind);
ObjectType object_type_of(AssociationKind kind);

/// Appends one row. A zero timestamp is stamped from the store clock.
/// Throws InvalidArgument for a pair outside the matrix, NotFound for an
/// unregistered user.
void record_action(Store& store, ActionLogEntry entry);

std::vector<ActionLogEntry> query_log(const Store& store, const ActionFilter& filter);

nlohmann::json action_to_json(const ActionLogEntry& entry);
/// One canonical JSON object per line, each terminated by '\n'.
std::string export_log_jsonl(const Store& store, const ActionFilter& filter);

std::vector<FeedbackQuestion> list_active_questions(const Store& store);
/// Score must be 1..5 and the question active.
void submit_feedback(Store& store, const UserId& user, const EntityId& question_id, int score);

struct ScoreSummary {
  EntityId question_id;
  std::string text;
  std::size_t responses = 0;
  double mean = 0.0;  // 0 when there are no responses
};

/// Per question (all questions, active or not), in creation order.
std::vector<ScoreSummary> mean_scores(const Store& store);

/// Editing facade over one open document that writes exactly one log row per
/// affected object. Logging problems never fail the edit; they are collected
/// in warnings().
class EditSession {
 public:
  EditSession(Store& store, GoalNetDocument& doc, UserId user);

  GoalNetDocument& document() noexcept { return doc_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  void open();
  void close();

  void set_net_info(std::optional<std::string> name, std::optional<std::string> description);
  void set_net_properties(std::optional<EntityId> root, std::optional<EntityId> start,
                          std::optional<EntityId> end);
  EntityId add_state(std::optional<EntityId> parent_id, std::string name, StateKind kind, Point position);
  EntityId add_transition(std::optional<EntityId> parent_id, std::string name, TransitionKind kind,
                          Point position);
  EntityId add_arc(const EntityRef& source, const EntityRef& target);
  void convert_state_kind(const EntityId& state_id, StateKind kind, bool cascade);
  void set_composite_boundaries(const EntityId& composite_id, std::optional<EntityId> start_child,
                                std::optional<EntityId> end_child);
  /// One Delete row per requested id (cascaded removals are not logged separately).
  RemovalReport remove_entities(const std::set<EntityId>& ids);
  /// One Move row per requested id.
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

 private:
  ObjectType object_type(const EntityId& id) const;
  void log(ObjectType object, const EntityId& id, ActionType action);

  Store& store_;
  GoalNetDocument& doc_;
  UserId user_;
  std::vector<std::string> warnings_;
};

}  // namespace goalnet
