#pragma once

#include <map>
#include <optional>

#include "goalnet/model.hpp"
#include "goalnet/records.hpp"
#include "goalnet/store.hpp"

namespace goalnet {

enum class NetAction { Open, LocalEdit, Export, Save, Clone, Grant };

std::string_view to_string(NetAction a);
AccessLevel required_level(NetAction a);

/// Pure grid lookup; no grant at all permits nothing.
bool is_permitted(std::optional<AccessLevel> held, NetAction action);

/// True iff `user` holds a grant on `gnet_id` at `required` or above.
bool check_access(const Store& store, const UserId& user, const EntityId& gnet_id, AccessLevel required);

/// Throws Error(AccessDenied) unless `user` may perform `action` on the net,
/// Error(NotFound) if the net does not exist.
void require_access(const Store& store, const UserId& user, const EntityId& gnet_id, NetAction action);

/// Loads a net for a Read holder. The returned copy may be edited freely;
/// persisting it goes through Store::save, which enforces Write.
GoalNetDocument open_net(const Store& store, const UserId& user, const EntityId& gnet_id);

/// Creates and stores an empty net with `creator` as Admin.
GoalNetDocument create_net_with_owner(Store& store, std::string name, std::string description,
                                      const UserId& creator);

/// Actor needs Admin. Lowering or removing the last Admin is rejected with Conflict.
void grant_access(Store& store, const UserId& actor, const UserId& target, const EntityId& gnet_id,
                  AccessLevel level);
void revoke_access(Store& store, const UserId& actor, const UserId& target, const EntityId& gnet_id);

struct CloneResult {
  EntityId root;                           // the new function or task
  std::map<EntityId, EntityId> id_map;     // source id -> new id, every created row
  std::int64_t destination_version = 0;
};

/// Copies one function into `dst_gnet` (no associations). Needs Write on both nets.
CloneResult clone_function(Store& store, const UserId& actor, const EntityId& function_id,
                           const EntityId& src_gnet, const EntityId& dst_gnet);

/// Copies a task, its functions and their task associations (1 + 2k rows),
/// keeping order_index. Needs Write on both nets.
CloneResult clone_task(Store& store, const UserId& actor, const EntityId& task_id, const EntityId& src_gnet,
                       const EntityId& dst_gnet);

}  // namespace goalnet
