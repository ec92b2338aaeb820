#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "goalnet/model.hpp"
#include "goalnet/records.hpp"

struct sqlite3;

namespace goalnet {

struct ActionFilter {
  std::optional<UserId> user;
  std::optional<EntityId> gnet;
  std::optional<std::int64_t> since;  // inclusive, UTC ms
  std::optional<std::int64_t> until;  // inclusive, UTC ms
};

struct MergeReport {
  std::size_t nets_added = 0;
  std::size_t users_added = 0;
  /// Logins present in both stores with different profiles. Left as they
  /// were in the destination; resolving them is a manual step.
  std::vector<UserId> user_conflicts;
};

/// Single-file embedded store (SQLite). One handle may be shared across
/// threads; every call is serialized on an internal mutex and writes run in
/// IMMEDIATE transactions, so readers only see committed state.
class Store {
 public:
  /// Opens or creates the store file; ":memory:" gives a private in-memory store.
  static Store open(const std::string& path);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  const std::string& path() const noexcept { return path_; }

  /// Milliseconds since the Unix epoch, UTC. Replaceable for tests.
  std::int64_t now() const;
  void set_clock(std::function<std::int64_t()> clock);

  // ---- users and tokens ----
  void add_user(const UserProfile& profile);
  std::optional<UserProfile> find_user(const UserId& login) const;
  std::vector<UserProfile> users() const;
  /// Issues a new random bearer token for a registered user.
  std::string issue_token(const UserId& login);
  bool revoke_token(const std::string& token);
  /// (token, login) pairs.
  std::vector<std::pair<std::string, UserId>> tokens() const;

  // ---- goal nets ----
  /// Inserts a net at its current version together with an Admin grant, atomically.
  void insert_net(const GoalNetDocument& doc, const UserId& admin);
  /// Persists `doc` if `actor` holds Write or better and doc.version matches
  /// the stored version; bumps and returns the new version (also written back
  /// into `doc`). Throws AccessDenied, Conflict or NotFound otherwise.
  std::int64_t save(GoalNetDocument& doc, const UserId& actor);
  GoalNetDocument load(const EntityId& gnet_id) const;
  bool has_net(const EntityId& gnet_id) const;
  /// Nets on which `user` holds any grant, ordered by name then id.
  std::vector<NetSummary> list_nets(const UserId& user) const;

  // ---- grants ----
  std::optional<AccessLevel> grant_level(const UserId& user, const EntityId& gnet_id) const;
  void upsert_grant(const AccessGrant& grant);
  void delete_grant(const UserId& user, const EntityId& gnet_id);
  std::vector<AccessGrant> grants(const EntityId& gnet_id) const;

  // ---- telemetry tables (append-only) ----
  void append_action(const ActionLogEntry& entry);
  std::vector<ActionLogEntry> actions(const ActionFilter& filter) const;
  EntityId add_question(const std::string& text);
  void set_question_active(const EntityId& id, bool active);
  std::vector<FeedbackQuestion> questions(bool active_only) const;
  void append_feedback(const FeedbackResponse& response);
  std::vector<FeedbackResponse> feedback() const;

  // ---- runner configuration ----
  void set_compiler_path(const UserId& user, const EntityId& gnet_id, const std::string& path);
  std::optional<std::string> compiler_path(const UserId& user, const EntityId& gnet_id) const;

  // ---- maintenance ----
  /// Number of stored references (foreign keys and intra-net ids) that do not resolve.
  std::size_t dangling_references() const;
  /// Writes every net as `<id>.gnet.json` into `dir`; returns the file paths.
  std::vector<std::string> dump(const std::string& dir) const;
  /// Imports every `*.gnet.json` in `dir` that is not already stored. The
  /// creator receives Admin when registered, otherwise `fallback_admin`.
  std::size_t restore(const std::string& dir, const UserId& fallback_admin);
  /// Copies rows from another store file. UUID-keyed rows never collide with
  /// different content; only user logins can, and those are reported.
  MergeReport merge_from(const std::string& other_path);
  /// Canonical text dump of every table, for byte-level comparisons.
  std::string snapshot() const;

 private:
  Store() = default;
  void exec(const std::string& sql) const;
  template <typename F>
  auto write_transaction(F&& body);
  void write_net_rows(const GoalNetDocument& doc);

  std::string path_;
  sqlite3* db_ = nullptr;
  std::unique_ptr<std::recursive_mutex> mutex_;
  std::function<std::int64_t()> clock_;
};

}  // namespace goalnet
