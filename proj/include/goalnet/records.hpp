#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "goalnet/ids.hpp"

namespace goalnet {

/// Read < Write < Admin.
enum class AccessLevel { Read = 1, Write = 2, Admin = 3 };

std::string_view to_string(AccessLevel level);
std::optional<AccessLevel> access_level_from(std::string_view name);

struct AccessGrant {
  UserId user_id;
  EntityId gnet_id;
  AccessLevel level = AccessLevel::Read;

  bool operator==(const AccessGrant&) const = default;
};

struct UserProfile {
  UserId login;
  std::string display_name;
  std::string age_bracket;
  std::string education_level;

  bool operator==(const UserProfile&) const = default;
};

struct NetSummary {
  EntityId id;
  std::string name;
  std::string description;
  std::int64_t version = 0;
  AccessLevel level = AccessLevel::Read;  // the listing user's level
};

enum class ObjectType {
  GoalNet,
  State,
  Transition,
  Arc,
  Function,
  Task,
  AssocStateFunction,
  AssocTransitionTask,
  AssocTaskFunction,
};

enum class ActionType { Open, Close, Edit, Create, Move, Delete };

std::string_view to_string(ObjectType t);
std::string_view to_string(ActionType t);
std::optional<ObjectType> object_type_from(std::string_view name);
std::optional<ActionType> action_type_from(std::string_view name);

/// One audited user operation.
struct ActionLogEntry {
  ObjectType object_type = ObjectType::GoalNet;
  EntityId object_id;
  UserId user_id;
  ActionType action_type = ActionType::Open;
  std::int64_t timestamp = 0;  // UTC milliseconds; 0 means "stamp on insert"
  // Net the object belongs to; used for filtering, not part of the audited tuple.
  std::optional<EntityId> gnet_id;

  bool operator==(const ActionLogEntry&) const = default;
};

struct FeedbackQuestion {
  EntityId id;
  std::string text;
  bool active = true;

  bool operator==(const FeedbackQuestion&) const = default;
};

struct FeedbackResponse {
  EntityId question_id;
  UserId user_id;
  int score = 0;
  std::int64_t timestamp = 0;

  bool operator==(const FeedbackResponse&) const = default;
};

}  // namespace goalnet
