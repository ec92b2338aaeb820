#include "goalnet/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "goalnet/document_io.hpp"
#include "goalnet/error.hpp"

namespace goalnet {

std::string_view to_string(AccessLevel level) {
  switch (level) {
    case AccessLevel::Read: return "read";
    case AccessLevel::Write: return "write";
    case AccessLevel::Admin: return "admin";
  }
  return "unknown";
}

std::optional<AccessLevel> access_level_from(std::string_view name) {
  for (auto l : {AccessLevel::Read, AccessLevel::Write, AccessLevel::Admin}) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

std::string_view to_string(ObjectType t) {
  switch (t) {
    case ObjectType::GoalNet: return "goalnet";
    case ObjectType::State: return "state";
    case ObjectType::Transition: return "transition";
    case ObjectType::Arc: return "arc";
    case ObjectType::Function: return "function";
    case ObjectType::Task: return "task";
    case ObjectType::AssocStateFunction: return "assoc_state_function";
    case ObjectType::AssocTransitionTask: return "assoc_transition_task";
    case ObjectType::AssocTaskFunction: return "assoc_task_function";
  }
  return "unknown";
}

std::string_view to_string(ActionType t) {
  switch (t) {
    case ActionType::Open: return "open";
    case ActionType::Close: return "close";
    case ActionType::Edit: return "edit";
    case ActionType::Create: return "create";
    case ActionType::Move: return "move";
    case ActionType::Delete: return "delete";
  }
  return "unknown";
}

std::optional<ObjectType> object_type_from(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ObjectType::AssocTaskFunction); ++i) {
    if (to_string(static_cast<ObjectType>(i)) == name) return static_cast<ObjectType>(i);
  }
  return std::nullopt;
}

std::optional<ActionType> action_type_from(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ActionType::Delete); ++i) {
    if (to_string(static_cast<ActionType>(i)) == name) return static_cast<ActionType>(i);
  }
  return std::nullopt;
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS user (
  login TEXT PRIMARY KEY,
  display_name TEXT NOT NULL,
  age_bracket TEXT NOT NULL,
  education_level TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS api_token (
  token TEXT PRIMARY KEY,
  user_id TEXT NOT NULL REFERENCES user(login) ON DELETE CASCADE
);
CREATE TABLE IF NOT EXISTS gnet (
  id TEXT PRIMARY KEY,
  name TEXT NOT NULL,
  description TEXT NOT NULL,
  root_state_id TEXT,
  start_state_id TEXT,
  end_state_id TEXT,
  created_by TEXT NOT NULL,
  version INTEGER NOT NULL,
  updated_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS state (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  name TEXT NOT NULL,
  description TEXT NOT NULL,
  kind TEXT NOT NULL,
  achievement_value REAL NOT NULL,
  cost REAL NOT NULL,
  parent_id TEXT,
  child_start_id TEXT,
  child_end_id TEXT,
  x REAL NOT NULL,
  y REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS transition (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  name TEXT NOT NULL,
  description TEXT NOT NULL,
  kind TEXT NOT NULL,
  parent_id TEXT,
  x REAL NOT NULL,
  y REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS arc (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  name TEXT NOT NULL,
  description TEXT NOT NULL,
  source_kind TEXT NOT NULL,
  source_id TEXT NOT NULL,
  target_kind TEXT NOT NULL,
  target_id TEXT NOT NULL,
  guard TEXT,
  weight REAL NOT NULL,
  priority INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS method (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  name TEXT NOT NULL,
  description TEXT NOT NULL,
  binding_key TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS tasklist (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  name TEXT NOT NULL,
  description TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS state_method (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  owner_id TEXT NOT NULL,
  member_id TEXT NOT NULL,
  order_index INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS transition_task (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  owner_id TEXT NOT NULL,
  member_id TEXT NOT NULL,
  order_index INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS task_method (
  id TEXT PRIMARY KEY,
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  owner_id TEXT NOT NULL,
  member_id TEXT NOT NULL,
  order_index INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS user_gnet (
  id TEXT PRIMARY KEY,
  user_id TEXT NOT NULL REFERENCES user(login),
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  level TEXT NOT NULL,
  UNIQUE (user_id, gnet_id)
);
CREATE TABLE IF NOT EXISTS action_log (
  id TEXT PRIMARY KEY,
  object_type TEXT NOT NULL,
  object_id TEXT NOT NULL,
  user_id TEXT NOT NULL REFERENCES user(login),
  action_type TEXT NOT NULL,
  timestamp INTEGER NOT NULL,
  gnet_id TEXT
);
CREATE TABLE IF NOT EXISTS question (
  id TEXT PRIMARY KEY,
  text TEXT NOT NULL,
  active INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS feedback_log (
  id TEXT PRIMARY KEY,
  question_id TEXT NOT NULL REFERENCES question(id),
  user_id TEXT NOT NULL REFERENCES user(login),
  score INTEGER NOT NULL CHECK (score BETWEEN 1 AND 5),
  timestamp INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS compiler_config (
  id TEXT PRIMARY KEY,
  user_id TEXT NOT NULL REFERENCES user(login),
  gnet_id TEXT NOT NULL REFERENCES gnet(id) ON DELETE CASCADE,
  path TEXT NOT NULL,
  UNIQUE (user_id, gnet_id)
);
CREATE TRIGGER IF NOT EXISTS action_log_no_update BEFORE UPDATE ON action_log
  BEGIN SELECT RAISE(ABORT, 'action_log is append-only'); END;
CREATE TRIGGER IF NOT EXISTS action_log_no_delete BEFORE DELETE ON action_log
  BEGIN SELECT RAISE(ABORT, 'action_log is append-only'); END;
CREATE TRIGGER IF NOT EXISTS feedback_log_no_update BEFORE UPDATE ON feedback_log
  BEGIN SELECT RAISE(ABORT, 'feedback_log is append-only'); END;
CREATE TRIGGER IF NOT EXISTS feedback_log_no_delete BEFORE DELETE ON feedback_log
  BEGIN SELECT RAISE(ABORT, 'feedback_log is append-only'); END;
)sql";

// Tables whose rows belong to one net, in dependency-free order.
constexpr const char* kNetTables[] = {"state",        "transition",      "arc",        "method",
                                      "tasklist",     "state_method",    "transition_task", "task_method"};

const char* association_table(AssociationKind kind) {
  switch (kind) {
    case AssociationKind::StateFunction: return "state_method";
    case AssociationKind::TransitionTask: return "transition_task";
    case AssociationKind::TaskFunction: return "task_method";
  }
  return "";
}

[[noreturn]] void storage_error(sqlite3* db, const std::string& what) {
  throw Error(ErrorCode::Storage, what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
      storage_error(db, "prepare failed for '" + sql + "'");
    }
  }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;
  ~Stmt() { sqlite3_finalize(stmt_); }

  template <typename... Args>
  Stmt& bind_all(const Args&... args) {
    int i = 1;
    (bind(i++, args), ...);
    return *this;
  }

  void bind(int i, const std::string& v) { sqlite3_bind_text(stmt_, i, v.c_str(), -1, SQLITE_TRANSIENT); }
  void bind(int i, const char* v) { sqlite3_bind_text(stmt_, i, v, -1, SQLITE_TRANSIENT); }
  void bind(int i, std::string_view v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
  }
  void bind(int i, const EntityId& v) { bind(i, v.str()); }
  void bind(int i, std::int64_t v) { sqlite3_bind_int64(stmt_, i, v); }
  void bind(int i, int v) { sqlite3_bind_int64(stmt_, i, v); }
  void bind(int i, double v) { sqlite3_bind_double(stmt_, i, v); }
  void bind(int i, std::nullptr_t) { sqlite3_bind_null(stmt_, i); }
  template <typename T>
  void bind(int i, const std::optional<T>& v) {
    if (v) bind(i, *v);
    else sqlite3_bind_null(stmt_, i);
  }

  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    storage_error(db_, "statement failed");
  }
  void run() {
    while (step()) {
    }
  }

  bool is_null(int c) const { return sqlite3_column_type(stmt_, c) == SQLITE_NULL; }
  std::string text(int c) const {
    const auto* p = sqlite3_column_text(stmt_, c);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, c)) : std::string();
  }
  std::optional<std::string> opt_text(int c) const {
    if (is_null(c)) return std::nullopt;
    return text(c);
  }
  EntityId id(int c) const { return EntityId::parse(text(c)); }
  std::optional<EntityId> opt_id(int c) const {
    if (is_null(c)) return std::nullopt;
    return id(c);
  }
  std::int64_t integer(int c) const { return sqlite3_column_int64(stmt_, c); }
  double real(int c) const { return sqlite3_column_double(stmt_, c); }
  int columns() const { return sqlite3_column_count(stmt_); }
  int type(int c) const { return sqlite3_column_type(stmt_, c); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

std::string random_token() {
  std::random_device rd;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 8; ++i) {
    std::uint32_t v = rd();
    for (int n = 0; n < 8; ++n) out.push_back(kHex[(v >> (4 * n)) & 0xF]);
  }
  return out;
}

ActionLogEntry read_action(const Stmt& s) {
  ActionLogEntry e;
  e.object_type = object_type_from(s.text(0)).value_or(ObjectType::GoalNet);
  e.object_id = s.id(1);
  e.user_id = s.text(2);
  e.action_type = action_type_from(s.text(3)).value_or(ActionType::Open);
  e.timestamp = s.integer(4);
  e.gnet_id = s.opt_id(5);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

Store Store::open(const std::string& path) {
  Store store;
  store.path_ = path;
  store.mutex_ = std::make_unique<std::recursive_mutex>();
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &store.db_, flags, nullptr) != SQLITE_OK) {
    const std::string message = store.db_ ? sqlite3_errmsg(store.db_) : "out of memory";
    throw Error(ErrorCode::Storage, "cannot open store '" + path + "': " + message);
  }
  sqlite3_busy_timeout(store.db_, 5000);
  store.exec("PRAGMA foreign_keys = ON;");
  store.exec(kSchema);
  return store;
}

Store::Store(Store&& other) noexcept
    : path_(std::move(other.path_)),
      db_(std::exchange(other.db_, nullptr)),
      mutex_(std::move(other.mutex_)),
      clock_(std::move(other.clock_)) {}

Store& Store::operator=(Store&& other) noexcept {
  if (this != &other) {
    if (db_) sqlite3_close(db_);
    path_ = std::move(other.path_);
    db_ = std::exchange(other.db_, nullptr);
    mutex_ = std::move(other.mutex_);
    clock_ = std::move(other.clock_);
  }
  return *this;
}

Store::~Store() {
  if (db_) sqlite3_close(db_);
}

void Store::exec(const std::string& sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string message = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::Storage, "store error: " + message);
  }
}

template <typename F>
auto Store::write_transaction(F&& body) {
  std::lock_guard lock(*mutex_);
  exec("BEGIN IMMEDIATE;");
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      exec("COMMIT;");
    } else {
      auto result = body();
      exec("COMMIT;");
      return result;
    }
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK;", nullptr, nullptr, nullptr);
    throw;
  }
}

std::int64_t Store::now() const {
  if (clock_) return clock_();
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void Store::set_clock(std::function<std::int64_t()> clock) { clock_ = std::move(clock); }

// ---- users and tokens ------------------------------------------------------------

void Store::add_user(const UserProfile& p) {
  if (p.login.empty()) throw Error(ErrorCode::InvalidArgument, "login must not be empty", "login");
  write_transaction([&] {
    if (Stmt(db_, "SELECT 1 FROM user WHERE login = ?").bind_all(p.login).step()) {
      throw Error(ErrorCode::InvalidArgument, "user '" + p.login + "' already exists", "login");
    }
    Stmt(db_, "INSERT INTO user (login, display_name, age_bracket, education_level) VALUES (?, ?, ?, ?)")
        .bind_all(p.login, p.display_name, p.age_bracket, p.education_level)
        .run();
  });
}

std::optional<UserProfile> Store::find_user(const UserId& login) const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT login, display_name, age_bracket, education_level FROM user WHERE login = ?");
  s.bind_all(login);
  if (!s.step()) return std::nullopt;
  return UserProfile{s.text(0), s.text(1), s.text(2), s.text(3)};
}

std::vector<UserProfile> Store::users() const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT login, display_name, age_bracket, education_level FROM user ORDER BY login");
  std::vector<UserProfile> out;
  while (s.step()) out.push_back({s.text(0), s.text(1), s.text(2), s.text(3)});
  return out;
}

std::string Store::issue_token(const UserId& login) {
  return write_transaction([&] {
    if (!Stmt(db_, "SELECT 1 FROM user WHERE login = ?").bind_all(login).step()) {
      throw Error(ErrorCode::NotFound, "user '" + login + "' is not registered");
    }
    std::string token = random_token();
    Stmt(db_, "INSERT INTO api_token (token, user_id) VALUES (?, ?)").bind_all(token, login).run();
    return token;
  });
}

bool Store::revoke_token(const std::string& token) {
  return write_transaction([&] {
    Stmt(db_, "DELETE FROM api_token WHERE token = ?").bind_all(token).run();
    return sqlite3_changes(db_) > 0;
  });
}

std::vector<std::pair<std::string, UserId>> Store::tokens() const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT token, user_id FROM api_token ORDER BY token");
  std::vector<std::pair<std::string, UserId>> out;
  while (s.step()) out.emplace_back(s.text(0), s.text(1));
  return out;
}

// ---- goal nets ---------------------------------------------------------------------

void Store::write_net_rows(const GoalNetDocument& doc) {
  const NetHeader& h = doc.header();
  for (const char* table : kNetTables) {
    Stmt(db_, std::string("DELETE FROM ") + table + " WHERE gnet_id = ?").bind_all(h.id).run();
  }
  Stmt(db_,
       "INSERT INTO gnet (id, name, description, root_state_id, start_state_id, end_state_id, created_by, "
       "version, updated_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?) ON CONFLICT(id) DO UPDATE SET "
       "name = excluded.name, description = excluded.description, root_state_id = excluded.root_state_id, "
       "start_state_id = excluded.start_state_id, end_state_id = excluded.end_state_id, "
       "created_by = excluded.created_by, version = excluded.version, updated_at = excluded.updated_at")
      .bind_all(h.id, h.name, h.description, h.root_state_id, h.start_state_id, h.end_state_id, h.created_by,
                h.version, now())
      .run();
  for (const auto& [id, s] : doc.states()) {
    Stmt(db_,
         "INSERT INTO state (id, gnet_id, name, description, kind, achievement_value, cost, parent_id, "
         "child_start_id, child_end_id, x, y) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)")
        .bind_all(id, h.id, s.name, s.description, to_string(s.kind), s.achievement_value, s.cost, s.parent_id,
                  s.child_start_id, s.child_end_id, s.position.x, s.position.y)
        .run();
  }
  for (const auto& [id, t] : doc.transitions()) {
    Stmt(db_,
         "INSERT INTO transition (id, gnet_id, name, description, kind, parent_id, x, y) "
         "VALUES (?, ?, ?, ?, ?, ?, ?, ?)")
        .bind_all(id, h.id, t.name, t.description, to_string(t.kind), t.parent_id, t.position.x, t.position.y)
        .run();
  }
  for (const auto& [id, a] : doc.arcs()) {
    Stmt(db_,
         "INSERT INTO arc (id, gnet_id, name, description, source_kind, source_id, target_kind, target_id, "
         "guard, weight, priority) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)")
        .bind_all(id, h.id, a.name, a.description, to_string(a.source.kind), a.source.id,
                  to_string(a.target.kind), a.target.id, a.guard, a.weight, a.priority)
        .run();
  }
  for (const auto& [id, f] : doc.functions()) {
    Stmt(db_, "INSERT INTO method (id, gnet_id, name, description, binding_key) VALUES (?, ?, ?, ?, ?)")
        .bind_all(id, h.id, f.name, f.description, f.binding_key)
        .run();
  }
  for (const auto& [id, t] : doc.tasks()) {
    Stmt(db_, "INSERT INTO tasklist (id, gnet_id, name, description) VALUES (?, ?, ?, ?)")
        .bind_all(id, h.id, t.name, t.description)
        .run();
  }
  for (const auto& [id, as] : doc.associations()) {
    Stmt(db_, std::string("INSERT INTO ") + association_table(as.kind) +
                  " (id, gnet_id, owner_id, member_id, order_index) VALUES (?, ?, ?, ?, ?)")
        .bind_all(id, h.id, as.owner_id, as.member_id, as.order_index)
        .run();
  }
}

void Store::insert_net(const GoalNetDocument& doc, const UserId& admin) {
  write_transaction([&] {
    if (!Stmt(db_, "SELECT 1 FROM user WHERE login = ?").bind_all(admin).step()) {
      throw Error(ErrorCode::NotFound, "user '" + admin + "' is not registered");
    }
    if (Stmt(db_, "SELECT 1 FROM gnet WHERE id = ?").bind_all(doc.id()).step()) {
      throw Error(ErrorCode::InvalidArgument, "goal net " + doc.id().str() + " already exists");
    }
    write_net_rows(doc);
    Stmt(db_, "INSERT INTO user_gnet (id, user_id, gnet_id, level) VALUES (?, ?, ?, ?)")
        .bind_all(new_uuid(), admin, doc.id(), to_string(AccessLevel::Admin))
        .run();
  });
}

std::int64_t Store::save(GoalNetDocument& doc, const UserId& actor) {
  const std::int64_t next = write_transaction([&] {
    Stmt v(db_, "SELECT version FROM gnet WHERE id = ?");
    v.bind_all(doc.id());
    if (!v.step()) throw Error(ErrorCode::NotFound, "goal net " + doc.id().str() + " does not exist");
    const std::int64_t stored = v.integer(0);

    Stmt g(db_, "SELECT level FROM user_gnet WHERE user_id = ? AND gnet_id = ?");
    g.bind_all(actor, doc.id());
    const auto level = g.step() ? access_level_from(g.text(0)) : std::nullopt;
    if (!level || *level < AccessLevel::Write) {
      throw Error(ErrorCode::AccessDenied,
                  "user '" + actor + "' needs write access to save goal net '" + doc.name() + "'");
    }
    if (doc.version() != stored) {
      throw Error(ErrorCode::Conflict, "goal net '" + doc.name() + "' was saved concurrently (stored version " +
                                           std::to_string(stored) + ", editing version " +
                                           std::to_string(doc.version()) + ")");
    }
    GoalNetDocument copy = doc;
    copy.set_version(stored + 1);
    write_net_rows(copy);
    return stored + 1;
  });
  doc.set_version(next);
  return next;
}

bool Store::has_net(const EntityId& gnet_id) const {
  std::lock_guard lock(*mutex_);
  return Stmt(db_, "SELECT 1 FROM gnet WHERE id = ?").bind_all(gnet_id).step();
}

GoalNetDocument Store::load(const EntityId& gnet_id) const {
  std::lock_guard lock(*mutex_);
  Stmt n(db_,
         "SELECT name, description, root_state_id, start_state_id, end_state_id, created_by, version "
         "FROM gnet WHERE id = ?");
  n.bind_all(gnet_id);
  if (!n.step()) throw Error(ErrorCode::NotFound, "goal net " + gnet_id.str() + " does not exist");
  NetHeader h;
  h.id = gnet_id;
  h.name = n.text(0);
  h.description = n.text(1);
  h.root_state_id = n.opt_id(2);
  h.start_state_id = n.opt_id(3);
  h.end_state_id = n.opt_id(4);
  h.created_by = n.text(5);
  h.version = n.integer(6);

  std::vector<State> states;
  Stmt s(db_,
         "SELECT id, name, description, kind, achievement_value, cost, parent_id, child_start_id, child_end_id, "
         "x, y FROM state WHERE gnet_id = ? ORDER BY id");
  s.bind_all(gnet_id);
  while (s.step()) {
    State st;
    st.id = s.id(0);
    st.name = s.text(1);
    st.description = s.text(2);
    st.kind = state_kind_from(s.text(3)).value_or(StateKind::Atomic);
    st.achievement_value = s.real(4);
    st.cost = s.real(5);
    st.parent_id = s.opt_id(6);
    st.child_start_id = s.opt_id(7);
    st.child_end_id = s.opt_id(8);
    st.position = {s.real(9), s.real(10)};
    states.push_back(std::move(st));
  }

  std::vector<Transition> transitions;
  Stmt t(db_, "SELECT id, name, description, kind, parent_id, x, y FROM transition WHERE gnet_id = ? ORDER BY id");
  t.bind_all(gnet_id);
  while (t.step()) {
    Transition tr;
    tr.id = t.id(0);
    tr.name = t.text(1);
    tr.description = t.text(2);
    tr.kind = transition_kind_from(t.text(3)).value_or(TransitionKind::Direct);
    tr.parent_id = t.opt_id(4);
    tr.position = {t.real(5), t.real(6)};
    transitions.push_back(std::move(tr));
  }

  std::vector<Arc> arcs;
  Stmt a(db_,
         "SELECT id, name, description, source_kind, source_id, target_kind, target_id, guard, weight, priority "
         "FROM arc WHERE gnet_id = ? ORDER BY id");
  a.bind_all(gnet_id);
  while (a.step()) {
    Arc arc;
    arc.id = a.id(0);
    arc.name = a.text(1);
    arc.description = a.text(2);
    arc.source = {entity_kind_from(a.text(3)).value_or(EntityKind::State), a.id(4)};
    arc.target = {entity_kind_from(a.text(5)).value_or(EntityKind::State), a.id(6)};
    arc.guard = a.opt_text(7);
    arc.weight = a.real(8);
    arc.priority = a.integer(9);
    arcs.push_back(std::move(arc));
  }

  std::vector<FunctionDef> functions;
  Stmt f(db_, "SELECT id, name, description, binding_key FROM method WHERE gnet_id = ? ORDER BY id");
  f.bind_all(gnet_id);
  while (f.step()) functions.push_back({f.id(0), f.text(1), f.text(2), f.text(3)});

  std::vector<TaskDef> tasks;
  Stmt k(db_, "SELECT id, name, description FROM tasklist WHERE gnet_id = ? ORDER BY id");
  k.bind_all(gnet_id);
  while (k.step()) tasks.push_back({k.id(0), k.text(1), k.text(2)});

  std::vector<Association> associations;
  for (auto kind : {AssociationKind::StateFunction, AssociationKind::TransitionTask, AssociationKind::TaskFunction}) {
    Stmt q(db_, std::string("SELECT id, owner_id, member_id, order_index FROM ") + association_table(kind) +
                    " WHERE gnet_id = ? ORDER BY id");
    q.bind_all(gnet_id);
    while (q.step()) associations.push_back({q.id(0), kind, q.id(1), q.id(2), q.integer(3)});
  }

  return GoalNetDocument::assemble(std::move(h), std::move(states), std::move(transitions), std::move(arcs),
                                   std::move(functions), std::move(tasks), std::move(associations));
}

std::vector<NetSummary> Store::list_nets(const UserId& user) const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_,
         "SELECT g.id, g.name, g.description, g.version, ug.level FROM gnet g JOIN user_gnet ug ON ug.gnet_id = g.id "
         "WHERE ug.user_id = ? ORDER BY g.name, g.id");
  s.bind_all(user);
  std::vector<NetSummary> out;
  while (s.step()) {
    out.push_back({s.id(0), s.text(1), s.text(2), s.integer(3),
                   access_level_from(s.text(4)).value_or(AccessLevel::Read)});
  }
  return out;
}

// ---- grants ---------------------------------------------------------------------------

std::optional<AccessLevel> Store::grant_level(const UserId& user, const EntityId& gnet_id) const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT level FROM user_gnet WHERE user_id = ? AND gnet_id = ?");
  s.bind_all(user, gnet_id);
  if (!s.step()) return std::nullopt;
  return access_level_from(s.text(0));
}

void Store::upsert_grant(const AccessGrant& grant) {
  write_transaction([&] {
    Stmt(db_,
         "INSERT INTO user_gnet (id, user_id, gnet_id, level) VALUES (?, ?, ?, ?) "
         "ON CONFLICT(user_id, gnet_id) DO UPDATE SET level = excluded.level")
        .bind_all(new_uuid(), grant.user_id, grant.gnet_id, to_string(grant.level))
        .run();
  });
}

void Store::delete_grant(const UserId& user, const EntityId& gnet_id) {
  write_transaction([&] {
    Stmt(db_, "DELETE FROM user_gnet WHERE user_id = ? AND gnet_id = ?").bind_all(user, gnet_id).run();
  });
}

std::vector<AccessGrant> Store::grants(const EntityId& gnet_id) const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT user_id, level FROM user_gnet WHERE gnet_id = ? ORDER BY user_id");
  s.bind_all(gnet_id);
  std::vector<AccessGrant> out;
  while (s.step()) out.push_back({s.text(0), gnet_id, access_level_from(s.text(1)).value_or(AccessLevel::Read)});
  return out;
}

// ---- telemetry tables --------------------------------------------------------------------

void Store::append_action(const ActionLogEntry& e) {
  write_transaction([&] {
    Stmt(db_,
         "INSERT INTO action_log (id, object_type, object_id, user_id, action_type, timestamp, gnet_id) "
         "VALUES (?, ?, ?, ?, ?, ?, ?)")
        .bind_all(new_uuid(), to_string(e.object_type), e.object_id, e.user_id, to_string(e.action_type),
                  e.timestamp != 0 ? e.timestamp : now(), e.gnet_id)
        .run();
  });
}

std::vector<ActionLogEntry> Store::actions(const ActionFilter& filter) const {
  std::lock_guard lock(*mutex_);
  std::string sql =
      "SELECT object_type, object_id, user_id, action_type, timestamp, gnet_id FROM action_log WHERE 1 = 1";
  if (filter.user) sql += " AND user_id = ?";
  if (filter.gnet) sql += " AND gnet_id = ?";
  if (filter.since) sql += " AND timestamp >= ?";
  if (filter.until) sql += " AND timestamp <= ?";
  sql += " ORDER BY timestamp, rowid";
  Stmt s(db_, sql);
  int i = 1;
  if (filter.user) s.bind(i++, *filter.user);
  if (filter.gnet) s.bind(i++, *filter.gnet);
  if (filter.since) s.bind(i++, *filter.since);
  if (filter.until) s.bind(i++, *filter.until);
  std::vector<ActionLogEntry> out;
  while (s.step()) out.push_back(read_action(s));
  return out;
}

EntityId Store::add_question(const std::string& text) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "question text must not be empty", "text");
  return write_transaction([&] {
    EntityId id = new_uuid();
    Stmt(db_, "INSERT INTO question (id, text, active) VALUES (?, ?, 1)").bind_all(id, text).run();
    return id;
  });
}

void Store::set_question_active(const EntityId& id, bool active) {
  write_transaction([&] {
    Stmt(db_, "UPDATE question SET active = ? WHERE id = ?").bind_all(active ? 1 : 0, id).run();
    if (sqlite3_changes(db_) == 0) throw Error(ErrorCode::NotFound, "question " + id.str() + " does not exist");
  });
}

std::vector<FeedbackQuestion> Store::questions(bool active_only) const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, std::string("SELECT id, text, active FROM question") + (active_only ? " WHERE active = 1" : "") +
                  " ORDER BY rowid");
  std::vector<FeedbackQuestion> out;
  while (s.step()) out.push_back({s.id(0), s.text(1), s.integer(2) != 0});
  return out;
}

void Store::append_feedback(const FeedbackResponse& r) {
  write_transaction([&] {
    Stmt(db_, "INSERT INTO feedback_log (id, question_id, user_id, score, timestamp) VALUES (?, ?, ?, ?, ?)")
        .bind_all(new_uuid(), r.question_id, r.user_id, r.score, r.timestamp != 0 ? r.timestamp : now())
        .run();
  });
}

std::vector<FeedbackResponse> Store::feedback() const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT question_id, user_id, score, timestamp FROM feedback_log ORDER BY timestamp, rowid");
  std::vector<FeedbackResponse> out;
  while (s.step()) out.push_back({s.id(0), s.text(1), static_cast<int>(s.integer(2)), s.integer(3)});
  return out;
}

// ---- runner configuration -------------------------------------------------------------------

void Store::set_compiler_path(const UserId& user, const EntityId& gnet_id, const std::string& path) {
  write_transaction([&] {
    if (!has_net(gnet_id)) throw Error(ErrorCode::NotFound, "goal net " + gnet_id.str() + " does not exist");
    Stmt(db_,
         "INSERT INTO compiler_config (id, user_id, gnet_id, path) VALUES (?, ?, ?, ?) "
         "ON CONFLICT(user_id, gnet_id) DO UPDATE SET path = excluded.path")
        .bind_all(new_uuid(), user, gnet_id, path)
        .run();
  });
}

std::optional<std::string> Store::compiler_path(const UserId& user, const EntityId& gnet_id) const {
  std::lock_guard lock(*mutex_);
  Stmt s(db_, "SELECT path FROM compiler_config WHERE user_id = ? AND gnet_id = ?");
  s.bind_all(user, gnet_id);
  if (!s.step()) return std::nullopt;
  return s.text(0);
}

// ---- maintenance -------------------------------------------------------------------------------

std::size_t Store::dangling_references() const {
  std::lock_guard lock(*mutex_);
  // Each query counts references in one column that do not resolve.
  static const char* kChecks[] = {
      "SELECT COUNT(*) FROM gnet g WHERE g.root_state_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state s WHERE s.id = g.root_state_id AND s.gnet_id = g.id)",
      "SELECT COUNT(*) FROM gnet g WHERE g.start_state_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state s WHERE s.id = g.start_state_id AND s.gnet_id = g.id)",
      "SELECT COUNT(*) FROM gnet g WHERE g.end_state_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state s WHERE s.id = g.end_state_id AND s.gnet_id = g.id)",
      "SELECT COUNT(*) FROM state c WHERE c.parent_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state p WHERE p.id = c.parent_id AND p.gnet_id = c.gnet_id)",
      "SELECT COUNT(*) FROM state c WHERE c.child_start_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state p WHERE p.id = c.child_start_id AND p.gnet_id = c.gnet_id)",
      "SELECT COUNT(*) FROM state c WHERE c.child_end_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state p WHERE p.id = c.child_end_id AND p.gnet_id = c.gnet_id)",
      "SELECT COUNT(*) FROM transition t WHERE t.parent_id IS NOT NULL AND NOT EXISTS "
      "(SELECT 1 FROM state p WHERE p.id = t.parent_id AND p.gnet_id = t.gnet_id)",
      "SELECT COUNT(*) FROM arc a WHERE NOT EXISTS (SELECT 1 FROM state s WHERE s.id = a.source_id) AND NOT EXISTS "
      "(SELECT 1 FROM transition t WHERE t.id = a.source_id)",
      "SELECT COUNT(*) FROM arc a WHERE NOT EXISTS (SELECT 1 FROM state s WHERE s.id = a.target_id) AND NOT EXISTS "
      "(SELECT 1 FROM transition t WHERE t.id = a.target_id)",
      "SELECT COUNT(*) FROM state_method x WHERE NOT EXISTS (SELECT 1 FROM state s WHERE s.id = x.owner_id) "
      "OR NOT EXISTS (SELECT 1 FROM method m WHERE m.id = x.member_id)",
      "SELECT COUNT(*) FROM transition_task x WHERE NOT EXISTS (SELECT 1 FROM transition t WHERE t.id = x.owner_id) "
      "OR NOT EXISTS (SELECT 1 FROM tasklist k WHERE k.id = x.member_id)",
      "SELECT COUNT(*) FROM task_method x WHERE NOT EXISTS (SELECT 1 FROM tasklist k WHERE k.id = x.owner_id) "
      "OR NOT EXISTS (SELECT 1 FROM method m WHERE m.id = x.member_id)",
      "SELECT COUNT(*) FROM user_gnet x WHERE NOT EXISTS (SELECT 1 FROM user u WHERE u.login = x.user_id) "
      "OR NOT EXISTS (SELECT 1 FROM gnet g WHERE g.id = x.gnet_id)",
      "SELECT COUNT(*) FROM action_log x WHERE NOT EXISTS (SELECT 1 FROM user u WHERE u.login = x.user_id)",
      "SELECT COUNT(*) FROM feedback_log x WHERE NOT EXISTS (SELECT 1 FROM question q WHERE q.id = x.question_id) "
      "OR NOT EXISTS (SELECT 1 FROM user u WHERE u.login = x.user_id)",
      "SELECT COUNT(*) FROM api_token x WHERE NOT EXISTS (SELECT 1 FROM user u WHERE u.login = x.user_id)",
  };
  std::size_t total = 0;
  for (const char* sql : kChecks) {
    Stmt s(db_, sql);
    if (s.step()) total += static_cast<std::size_t>(s.integer(0));
  }
  for (const char* table : kNetTables) {
    Stmt s(db_, std::string("SELECT COUNT(*) FROM ") + table +
                    " x WHERE NOT EXISTS (SELECT 1 FROM gnet g WHERE g.id = x.gnet_id)");
    if (s.step()) total += static_cast<std::size_t>(s.integer(0));
  }
  return total;
}

std::vector<std::string> Store::dump(const std::string& dir) const {
  std::lock_guard lock(*mutex_);
  std::filesystem::create_directories(dir);
  std::vector<EntityId> ids;
  {
    Stmt s(db_, "SELECT id FROM gnet ORDER BY id");
    while (s.step()) ids.push_back(s.id(0));
  }
  std::vector<std::string> paths;
  for (const auto& id : ids) {
    const std::string path = (std::filesystem::path(dir) / (id.str() + std::string(kDocumentExtension))).string();
    std::ofstream out(path, std::ios::binary);
    out << export_document(load(id));
    if (!out) throw Error(ErrorCode::Storage, "cannot write '" + path + "'");
    paths.push_back(path);
  }
  return paths;
}

std::size_t Store::restore(const std::string& dir, const UserId& fallback_admin) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > kDocumentExtension.size() &&
        name.compare(name.size() - kDocumentExtension.size(), kDocumentExtension.size(), kDocumentExtension) == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::size_t restored = 0;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    GoalNetDocument doc = import_document(buf.str());
    if (has_net(doc.id())) continue;
    const UserId admin = find_user(doc.header().created_by) ? doc.header().created_by : fallback_admin;
    insert_net(doc, admin);
    ++restored;
  }
  return restored;
}

MergeReport Store::merge_from(const std::string& other_path) {
  MergeReport report;
  std::lock_guard lock(*mutex_);
  Stmt attach(db_, "ATTACH DATABASE ? AS src");
  attach.bind_all(other_path);
  attach.run();
  try {
    write_transaction([&] {
      {
        Stmt c(db_,
               "SELECT s.login FROM src.user s JOIN main.user m ON m.login = s.login WHERE "
               "s.display_name <> m.display_name OR s.age_bracket <> m.age_bracket OR "
               "s.education_level <> m.education_level ORDER BY s.login");
        while (c.step()) report.user_conflicts.push_back(c.text(0));
      }
      {
        Stmt c(db_, "SELECT COUNT(*) FROM src.user s WHERE NOT EXISTS (SELECT 1 FROM main.user m WHERE m.login = s.login)");
        c.step();
        report.users_added = static_cast<std::size_t>(c.integer(0));
      }
      {
        Stmt c(db_, "SELECT COUNT(*) FROM src.gnet s WHERE NOT EXISTS (SELECT 1 FROM main.gnet m WHERE m.id = s.id)");
        c.step();
        report.nets_added = static_cast<std::size_t>(c.integer(0));
      }
      exec("INSERT OR IGNORE INTO main.user SELECT * FROM src.user;");
      exec("INSERT OR IGNORE INTO main.gnet SELECT * FROM src.gnet;");
      for (const char* table : kNetTables) {
        exec(std::string("INSERT OR IGNORE INTO main.") + table + " SELECT * FROM src." + table + ";");
      }
      for (const char* table : {"user_gnet", "question", "feedback_log", "action_log", "api_token", "compiler_config"}) {
        exec(std::string("INSERT OR IGNORE INTO main.") + table + " SELECT * FROM src." + table + ";");
      }
    });
  } catch (...) {
    sqlite3_exec(db_, "DETACH DATABASE src;", nullptr, nullptr, nullptr);
    throw;
  }
  exec("DETACH DATABASE src;");
  return report;
}

std::string Store::snapshot() const {
  std::lock_guard lock(*mutex_);
  std::ostringstream out;
  for (const char* table : {"user", "api_token", "gnet", "state", "transition", "arc", "method", "tasklist",
                            "state_method", "transition_task", "task_method", "user_gnet", "action_log", "question",
                            "feedback_log", "compiler_config"}) {
    out << "[" << table << "]\n";
    Stmt s(db_, std::string("SELECT * FROM ") + table + " ORDER BY 1");
    while (s.step()) {
      for (int c = 0; c < s.columns(); ++c) {
        if (c) out << '|';
        switch (s.type(c)) {
          case SQLITE_NULL: out << "NULL"; break;
          case SQLITE_INTEGER: out << s.integer(c); break;
          case SQLITE_FLOAT: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", s.real(c));
            out << buf;
            break;
          }
          default: out << s.text(c);
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace goalnet
