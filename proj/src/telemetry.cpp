#include "goalnet/telemetry.hpp"

#include <map>

#include "goalnet/document_io.hpp"
#include "goalnet/error.hpp"

namespace goalnet {

bool is_allowed(ObjectType object, ActionType action) {
  switch (object) {
    case ObjectType::GoalNet:
      return action == ActionType::Open || action == ActionType::Close || action == ActionType::Edit;
    case ObjectType::State:
    case ObjectType::Transition:
      return action == ActionType::Create || action == ActionType::Edit || action == ActionType::Move ||
             action == ActionType::Delete;
    default:
      return action == ActionType::Create || action == ActionType::Edit || action == ActionType::Delete;
  }
}

ObjectType object_type_of(EntityKind kind) {
  switch (kind) {
    case EntityKind::GoalNet: return ObjectType::GoalNet;
    case EntityKind::State: return ObjectType::State;
    case EntityKind::Transition: return ObjectType::Transition;
    case EntityKind::Arc: return ObjectType::Arc;
    case EntityKind::Function: return ObjectType::Function;
    case EntityKind::Task: return ObjectType::Task;
    case EntityKind::Association: break;
  }
  throw Error(ErrorCode::InvalidArgument, "associations map to an object type through their kind");
}

ObjectType object_type_of(AssociationKind kind) {
  switch (kind) {
    case AssociationKind::StateFunction: return ObjectType::AssocStateFunction;
    case AssociationKind::TransitionTask: return ObjectType::AssocTransitionTask;
    case AssociationKind::TaskFunction: return ObjectType::AssocTaskFunction;
  }
  return ObjectType::AssocStateFunction;
}

void record_action(Store& store, ActionLogEntry entry) {
  if (!is_allowed(entry.object_type, entry.action_type)) {
    throw Error(ErrorCode::InvalidArgument, "action '" + std::string(to_string(entry.action_type)) +
                                                "' is not defined for object type '" +
                                                std::string(to_string(entry.object_type)) + "'",
                "action_type");
  }
  if (!store.find_user(entry.user_id)) {
    throw Error(ErrorCode::NotFound, "user '" + entry.user_id + "' is not registered", "user_id");
  }
  if (entry.timestamp == 0) entry.timestamp = store.now();
  store.append_action(entry);
}

std::vector<ActionLogEntry> query_log(const Store& store, const ActionFilter& filter) {
  return store.actions(filter);
}

nlohmann::json action_to_json(const ActionLogEntry& e) {
  nlohmann::json j = {{"object_type", to_string(e.object_type)},
                      {"object_id", e.object_id.str()},
                      {"user_id", e.user_id},
                      {"action_type", to_string(e.action_type)},
                      {"timestamp", e.timestamp}};
  j["gnet_id"] = e.gnet_id ? nlohmann::json(e.gnet_id->str()) : nlohmann::json(nullptr);
  return j;
}

std::string export_log_jsonl(const Store& store, const ActionFilter& filter) {
  std::string out;
  for (const auto& e : query_log(store, filter)) {
    out += canonical_json(action_to_json(e));
    out += '\n';
  }
  return out;
}

std::vector<FeedbackQuestion> list_active_questions(const Store& store) { return store.questions(true); }

void submit_feedback(Store& store, const UserId& user, const EntityId& question_id, int score) {
  if (score < 1 || score > 5) {
    throw Error(ErrorCode::InvalidArgument, "score must be between 1 and 5, got " + std::to_string(score), "score");
  }
  bool active = false;
  for (const auto& q : store.questions(false)) {
    if (q.id == question_id) {
      if (!q.active) throw Error(ErrorCode::InvalidArgument, "question " + question_id.str() + " is not active");
      active = true;
    }
  }
  if (!active) throw Error(ErrorCode::NotFound, "question " + question_id.str() + " does not exist");
  if (!store.find_user(user)) throw Error(ErrorCode::NotFound, "user '" + user + "' is not registered");
  store.append_feedback({question_id, user, score, store.now()});
}

std::vector<ScoreSummary> mean_scores(const Store& store) {
  std::map<EntityId, std::pair<std::size_t, std::int64_t>> totals;
  for (const auto& r : store.feedback()) {
    auto& t = totals[r.question_id];
    ++t.first;
    t.second += r.score;
  }
  std::vector<ScoreSummary> out;
  for (const auto& q : store.questions(false)) {
    ScoreSummary s{q.id, q.text, 0, 0.0};
    if (auto it = totals.find(q.id); it != totals.end()) {
      s.responses = it->second.first;
      s.mean = static_cast<double>(it->second.second) / static_cast<double>(s.responses);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

EditSession::EditSession(Store& store, GoalNetDocument& doc, UserId user)
    : store_(store), doc_(doc), user_(std::move(user)) {}

void EditSession::log(ObjectType object, const EntityId& id, ActionType action) {
  ActionLogEntry entry{object, id, user_, action, 0, doc_.id()};
  try {
    record_action(store_, entry);
  } catch (const Error& e) {
    if (!is_allowed(object, action)) throw;
    warnings_.push_back(std::string("action log: ") + e.what());
  }
}

ObjectType EditSession::object_type(const EntityId& id) const {
  const auto kind = doc_.kind_of(id);
  if (!kind) throw Error(ErrorCode::NotFound, "no entity with id " + id.str());
  if (*kind == EntityKind::Association) return object_type_of(doc_.association(id).kind);
  return object_type_of(*kind);
}

void EditSession::open() { log(ObjectType::GoalNet, doc_.id(), ActionType::Open); }
void EditSession::close() { log(ObjectType::GoalNet, doc_.id(), ActionType::Close); }

void EditSession::set_net_info(std::optional<std::string> name, std::optional<std::string> description) {
  doc_.set_net_info(std::move(name), std::move(description));
  log(ObjectType::GoalNet, doc_.id(), ActionType::Edit);
}

void EditSession::set_net_properties(std::optional<EntityId> root, std::optional<EntityId> start,
                                     std::optional<EntityId> end) {
  doc_.set_net_properties(std::move(root), std::move(start), std::move(end));
  log(ObjectType::GoalNet, doc_.id(), ActionType::Edit);
}

EntityId EditSession::add_state(std::optional<EntityId> parent_id, std::string name, StateKind kind,
                                Point position) {
  EntityId id = doc_.add_state(std::move(parent_id), std::move(name), kind, position);
  log(ObjectType::State, id, ActionType::Create);
  return id;
}

EntityId EditSession::add_transition(std::optional<EntityId> parent_id, std::string name, TransitionKind kind,
                                     Point position) {
  EntityId id = doc_.add_transition(std::move(parent_id), std::move(name), kind, position);
  log(ObjectType::Transition, id, ActionType::Create);
  return id;
}

EntityId EditSession::add_arc(const EntityRef& source, const EntityRef& target) {
  EntityId id = doc_.add_arc(source, target);
  log(ObjectType::Arc, id, ActionType::Create);
  return id;
}

void EditSession::convert_state_kind(const EntityId& state_id, StateKind kind, bool cascade) {
  doc_.convert_state_kind(state_id, kind, cascade);
  log(ObjectType::State, state_id, ActionType::Edit);
}

void EditSession::set_composite_boundaries(const EntityId& composite_id, std::optional<EntityId> start_child,
                                           std::optional<EntityId> end_child) {
  doc_.set_composite_boundaries(composite_id, std::move(start_child), std::move(end_child));
  log(ObjectType::State, composite_id, ActionType::Edit);
}

RemovalReport EditSession::remove_entities(const std::set<EntityId>& ids) {
  std::vector<std::pair<ObjectType, EntityId>> rows;
  for (const auto& id : ids) {
    if (doc_.kind_of(id)) rows.emplace_back(object_type(id), id);
  }
  RemovalReport report = doc_.remove_entities(ids);
  for (const auto& [type, id] : rows) log(type, id, ActionType::Delete);
  return report;
}

void EditSession::move_entities(const std::set<EntityId>& ids, Point delta) {
  doc_.move_entities(ids, delta);
  for (const auto& id : ids) log(object_type(id), id, ActionType::Move);
}

EntityId EditSession::add_function(std::string name, std::string description, std::string binding_key) {
  EntityId id = doc_.add_function(std::move(name), std::move(description), std::move(binding_key));
  log(ObjectType::Function, id, ActionType::Create);
  return id;
}

EntityId EditSession::add_task(std::string name, std::string description) {
  EntityId id = doc_.add_task(std::move(name), std::move(description));
  log(ObjectType::Task, id, ActionType::Create);
  return id;
}

EntityId EditSession::associate(AssociationKind kind, const EntityId& owner_id, const EntityId& member_id) {
  EntityId id = doc_.associate(kind, owner_id, member_id);
  log(object_type_of(kind), id, ActionType::Create);
  return id;
}

void EditSession::dissociate(const EntityId& association_id) {
  const ObjectType type = object_type_of(doc_.association(association_id).kind);
  doc_.dissociate(association_id);
  log(type, association_id, ActionType::Delete);
}

void EditSession::update_state(const EntityId& id, const StateUpdate& update) {
  doc_.update_state(id, update);
  log(ObjectType::State, id, ActionType::Edit);
}

void EditSession::update_transition(const EntityId& id, const TransitionUpdate& update) {
  doc_.update_transition(id, update);
  log(ObjectType::Transition, id, ActionType::Edit);
}

void EditSession::update_arc(const EntityId& id, const ArcUpdate& update) {
  doc_.update_arc(id, update);
  log(ObjectType::Arc, id, ActionType::Edit);
}

void EditSession::update_function(const EntityId& id, const DefinitionUpdate& update) {
  doc_.update_function(id, update);
  log(ObjectType::Function, id, ActionType::Edit);
}

void EditSession::update_task(const EntityId& id, const DefinitionUpdate& update) {
  doc_.update_task(id, update);
  log(ObjectType::Task, id, ActionType::Edit);
}

}  // namespace goalnet
