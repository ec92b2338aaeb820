#include "goalnet/collaboration.hpp"

#include <algorithm>

#include "goalnet/error.hpp"

namespace goalnet {

std::string_view to_string(NetAction a) {
  switch (a) {
    case NetAction::Open: return "open";
    case NetAction::LocalEdit: return "local-edit";
    case NetAction::Export: return "export";
    case NetAction::Save: return "save";
    case NetAction::Clone: return "clone";
    case NetAction::Grant: return "grant";
  }
  return "unknown";
}

AccessLevel required_level(NetAction a) {
  switch (a) {
    case NetAction::Open:
    case NetAction::LocalEdit:
    case NetAction::Export: return AccessLevel::Read;
    case NetAction::Save:
    case NetAction::Clone: return AccessLevel::Write;
    case NetAction::Grant: return AccessLevel::Admin;
  }
  return AccessLevel::Admin;
}

bool is_permitted(std::optional<AccessLevel> held, NetAction action) {
  return held && *held >= required_level(action);
}

bool check_access(const Store& store, const UserId& user, const EntityId& gnet_id, AccessLevel required) {
  const auto held = store.grant_level(user, gnet_id);
  return held && *held >= required;
}

void require_access(const Store& store, const UserId& user, const EntityId& gnet_id, NetAction action) {
  if (!store.has_net(gnet_id)) throw Error(ErrorCode::NotFound, "goal net " + gnet_id.str() + " does not exist");
  if (!is_permitted(store.grant_level(user, gnet_id), action)) {
    throw Error(ErrorCode::AccessDenied, "user '" + user + "' needs " +
                                             std::string(to_string(required_level(action))) + " access to " +
                                             std::string(to_string(action)) + " goal net " + gnet_id.str());
  }
}

GoalNetDocument open_net(const Store& store, const UserId& user, const EntityId& gnet_id) {
  require_access(store, user, gnet_id, NetAction::Open);
  return store.load(gnet_id);
}

GoalNetDocument create_net_with_owner(Store& store, std::string name, std::string description,
                                      const UserId& creator) {
  if (!store.find_user(creator)) throw Error(ErrorCode::NotFound, "user '" + creator + "' is not registered");
  GoalNetDocument doc = GoalNetDocument::create(std::move(name), std::move(description), creator);
  store.insert_net(doc, creator);
  return doc;
}

namespace {

std::size_t admin_count(const Store& store, const EntityId& gnet_id) {
  const auto grants = store.grants(gnet_id);
  return static_cast<std::size_t>(
      std::count_if(grants.begin(), grants.end(), [](const AccessGrant& g) { return g.level == AccessLevel::Admin; }));
}

void guard_last_admin(const Store& store, const UserId& target, const EntityId& gnet_id) {
  if (store.grant_level(target, gnet_id) == AccessLevel::Admin && admin_count(store, gnet_id) == 1) {
    throw Error(ErrorCode::Conflict, "user '" + target + "' is the only administrator of goal net " + gnet_id.str());
  }
}

}  // namespace

void grant_access(Store& store, const UserId& actor, const UserId& target, const EntityId& gnet_id,
                  AccessLevel level) {
  require_access(store, actor, gnet_id, NetAction::Grant);
  if (!store.find_user(target)) throw Error(ErrorCode::NotFound, "user '" + target + "' is not registered", "user");
  if (level != AccessLevel::Admin) guard_last_admin(store, target, gnet_id);
  store.upsert_grant({target, gnet_id, level});
}

void revoke_access(Store& store, const UserId& actor, const UserId& target, const EntityId& gnet_id) {
  require_access(store, actor, gnet_id, NetAction::Grant);
  if (!store.grant_level(target, gnet_id)) {
    throw Error(ErrorCode::NotFound, "user '" + target + "' has no access to goal net " + gnet_id.str(), "user");
  }
  guard_last_admin(store, target, gnet_id);
  store.delete_grant(target, gnet_id);
}

namespace {

struct ClonePair {
  GoalNetDocument src;
  GoalNetDocument dst;
};

ClonePair load_for_clone(Store& store, const UserId& actor, const EntityId& src_gnet, const EntityId& dst_gnet) {
  require_access(store, actor, src_gnet, NetAction::Clone);
  require_access(store, actor, dst_gnet, NetAction::Clone);
  return {store.load(src_gnet), store.load(dst_gnet)};
}

FunctionDef copy_of(const FunctionDef& f) {
  FunctionDef copy = f;
  copy.id = EntityId();
  return copy;
}

}  // namespace

CloneResult clone_function(Store& store, const UserId& actor, const EntityId& function_id,
                           const EntityId& src_gnet, const EntityId& dst_gnet) {
  auto [src, dst] = load_for_clone(store, actor, src_gnet, dst_gnet);
  const FunctionDef& original = src.function(function_id);
  CloneResult result;
  result.root = dst.insert_function(copy_of(original));
  result.id_map.emplace(function_id, result.root);
  result.destination_version = store.save(dst, actor);
  return result;
}

CloneResult clone_task(Store& store, const UserId& actor, const EntityId& task_id, const EntityId& src_gnet,
                       const EntityId& dst_gnet) {
  auto [src, dst] = load_for_clone(store, actor, src_gnet, dst_gnet);
  TaskDef task = src.task(task_id);
  task.id = EntityId();
  CloneResult result;
  result.root = dst.insert_task(std::move(task));
  result.id_map.emplace(task_id, result.root);
  for (const Association& link : src.associations_of(AssociationKind::TaskFunction, task_id)) {
    const EntityId fn = dst.insert_function(copy_of(src.function(link.member_id)));
    result.id_map.emplace(link.member_id, fn);
    result.id_map.emplace(link.id, dst.associate(AssociationKind::TaskFunction, result.root, fn));
  }
  result.destination_version = store.save(dst, actor);
  return result;
}

}  // namespace goalnet
