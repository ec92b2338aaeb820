#include "goalnet/runner.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <tuple>

#include <json.hpp>

#include "goalnet/document_io.hpp"
#include "goalnet/error.hpp"

extern char** environ;

namespace goalnet {

void FunctionRegistry::bind(std::string key, FunctionHandler handler) {
  handlers_[std::move(key)] = std::move(handler);
}

const FunctionHandler* FunctionRegistry::find(std::string_view key) const {
  auto it = handlers_.find(key);
  return it == handlers_.end() ? nullptr : &it->second;
}

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::ReachedEnd: return "reached_end";
    case FinishReason::StepLimit: return "step_limit";
    case FinishReason::GuardFailure: return "guard_failure";
    case FinishReason::DeadEnd: return "dead_end";
  }
  return "unknown";
}

std::string_view to_string(TraceEvent::Type t) {
  switch (t) {
    case TraceEvent::Type::EnterState: return "enter_state";
    case TraceEvent::Type::ExecuteFunction: return "execute_function";
    case TraceEvent::Type::FireTransition: return "fire_transition";
    case TraceEvent::Type::ExecuteTask: return "execute_task";
    case TraceEvent::Type::Finish: return "finish";
  }
  return "unknown";
}

std::string trace_to_jsonl(const RunTrace& trace) {
  std::string out = canonical_json({{"event", "trace"}, {"seed", trace.seed}}) + "\n";
  for (const auto& e : trace.events) {
    nlohmann::json j = {{"event", to_string(e.type)}};
    switch (e.type) {
      case TraceEvent::Type::EnterState:
      case TraceEvent::Type::ExecuteTask:
        j["id"] = e.id.str();
        j["name"] = e.name;
        break;
      case TraceEvent::Type::FireTransition:
        j["id"] = e.id.str();
        j["name"] = e.name;
        j["target"] = e.target ? e.target->str() : "";
        break;
      case TraceEvent::Type::ExecuteFunction:
        j["id"] = e.id.str();
        j["name"] = e.name;
        j["binding_key"] = e.binding_key;
        j["bound"] = e.bound;
        j["owner_kind"] = to_string(e.owner.kind);
        j["owner_id"] = e.owner.id.str();
        break;
      case TraceEvent::Type::Finish:
        j["reason"] = to_string(e.reason);
        j["detail"] = e.detail;
        j["steps"] = trace.steps;
        break;
    }
    out += canonical_json(j);
    out += '\n';
  }
  return out;
}

std::vector<EntityId> ordered_outputs(const GoalNetDocument& doc, const EntityId& transition_id) {
  std::vector<std::tuple<std::int64_t, std::string, EntityId>> keyed;
  for (const auto& [id, a] : doc.arcs()) {
    if (a.source.id == transition_id && a.target.kind == EntityKind::State) {
      keyed.emplace_back(a.priority, doc.state(a.target.id).name, id);
    }
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<EntityId> out;
  for (auto& k : keyed) out.push_back(std::get<2>(k));
  return out;
}

std::vector<std::pair<EntityId, double>> selection_probabilities(const GoalNetDocument& doc,
                                                                 const EntityId& transition_id) {
  const auto arcs = ordered_outputs(doc, transition_id);
  double total = 0.0;
  for (const auto& id : arcs) total += doc.arc(id).weight;
  std::vector<std::pair<EntityId, double>> out;
  for (const auto& id : arcs) out.emplace_back(doc.arc(id).target.id, doc.arc(id).weight / total);
  return out;
}

namespace {

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Selection select_target(const GoalNetDocument& doc, const EntityId& transition_id, const Blackboard& bb,
                        std::mt19937_64& rng) {
  const Transition& t = doc.transition(transition_id);
  const auto arcs = ordered_outputs(doc, transition_id);
  if (arcs.empty()) return {std::nullopt, "transition " + t.name + " has no output state"};

  switch (t.kind) {
    case TransitionKind::Direct:
      if (arcs.size() != 1) {
        throw Error(ErrorCode::Runtime, "direct transition " + t.name + " has " + std::to_string(arcs.size()) +
                                            " output states; it needs exactly one");
      }
      return {doc.arc(arcs.front()).target.id, {}};

    case TransitionKind::Conditional: {
      std::optional<EntityId> fallback;
      for (const auto& id : arcs) {
        const Arc& a = doc.arc(id);
        if (!a.guard) {
          if (!fallback) fallback = a.target.id;
          continue;
        }
        try {
          if (eval_guard(parse_guard(*a.guard), bb)) return {a.target.id, {}};
        } catch (const Error& e) {
          return {std::nullopt, "guard '" + *a.guard + "' on transition " + t.name + ": " + e.what(), true};
        }
      }
      if (fallback) return {fallback, {}};
      return {std::nullopt, "no guard of transition " + t.name + " holds and it has no default branch"};
    }

    case TransitionKind::Probabilistic: {
      const auto probs = selection_probabilities(doc, transition_id);
      const double u = unit_draw(rng);
      double cumulative = 0.0;
      for (const auto& [target, p] : probs) {
        cumulative += p;
        if (u < cumulative) return {target, {}};
      }
      return {probs.back().first, {}};
    }
  }
  return {std::nullopt, "unknown transition kind"};
}

namespace {

class Interpreter {
 public:
  Interpreter(const GoalNetDocument& doc, const FunctionRegistry& registry, const RunConfig& config)
      : doc_(doc), registry_(registry), config_(config), rng_(config.seed) {
    trace_.seed = config.seed;
    trace_.blackboard = config.blackboard;
  }

  RunTrace run() {
    EntityId active = enter(*doc_.header().start_state_id);
    while (!finished_) {
      if (trace_.steps >= config_.max_steps) {
        finish(FinishReason::StepLimit, "step limit of " + std::to_string(config_.max_steps) + " reached");
        break;
      }
      step(active);
    }
    return std::move(trace_);
  }

 private:
  void step(EntityId& active) {
    bool guard_blocked = false;
    std::string guard_detail;
    for (const auto& transition_id : candidates(active)) {
      Selection s = select_target(doc_, transition_id, trace_.blackboard, rng_);
      if (!s.target) {
        if (s.guard_error) {
          finish(FinishReason::GuardFailure, s.failure);
          return;
        }
        if (!guard_blocked) guard_detail = s.failure;
        guard_blocked = true;
        continue;
      }
      fire(transition_id, *s.target);
      active = enter(*s.target);
      return;
    }
    if (guard_blocked) {
      finish(FinishReason::GuardFailure, guard_detail);
    } else {
      finish(FinishReason::DeadEnd, "state " + doc_.state(active).name + " has no outgoing transition");
    }
  }

  // Transitions fed by `state`, by arc priority, then transition name, then id.
  std::vector<EntityId> candidates(const EntityId& state) const {
    std::vector<std::tuple<std::int64_t, std::string, EntityId>> keyed;
    for (const auto& [id, a] : doc_.arcs()) {
      if (a.source.id == state && a.target.kind == EntityKind::Transition) {
        keyed.emplace_back(a.priority, doc_.transition(a.target.id).name, a.target.id);
      }
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<EntityId> out;
    for (auto& k : keyed) out.push_back(std::get<2>(k));
    return out;
  }

  void fire(const EntityId& transition_id, const EntityId& target) {
    ++trace_.steps;
    TraceEvent e;
    e.type = TraceEvent::Type::FireTransition;
    e.id = transition_id;
    e.name = doc_.transition(transition_id).name;
    e.target = target;
    trace_.events.push_back(std::move(e));
    for (const auto& task_id : doc_.tasks_of(transition_id)) {
      TraceEvent t;
      t.type = TraceEvent::Type::ExecuteTask;
      t.id = task_id;
      t.name = doc_.task(task_id).name;
      trace_.events.push_back(std::move(t));
      run_functions({EntityKind::Task, task_id});
    }
  }

  // Enters a state, descending through composites; returns the state the
  // token rests on afterwards.
  EntityId enter(EntityId id) {
    for (;;) {
      const State& s = doc_.state(id);
      TraceEvent e;
      e.type = TraceEvent::Type::EnterState;
      e.id = id;
      e.name = s.name;
      trace_.events.push_back(std::move(e));
      if (s.kind == StateKind::Composite && s.child_start_id) {
        id = *s.child_start_id;
        continue;
      }
      break;
    }
    run_functions({EntityKind::State, id});
    return achieve(id);
  }

  // Marks `id` achieved and ascends while it closes a composite.
  EntityId achieve(EntityId id) {
    for (;;) {
      if (id == doc_.header().end_state_id) {
        finish(FinishReason::ReachedEnd, {});
        return id;
      }
      const State& s = doc_.state(id);
      if (!s.parent_id) return id;
      const State& parent = doc_.state(*s.parent_id);
      if (parent.child_end_id != id) return id;
      id = parent.id;
      run_functions({EntityKind::State, id});
    }
  }

  void run_functions(const EntityRef& owner) {
    for (const auto& fn_id : doc_.functions_of(owner.id)) {
      const FunctionDef& f = doc_.function(fn_id);
      TraceEvent e;
      e.type = TraceEvent::Type::ExecuteFunction;
      e.id = fn_id;
      e.name = f.name;
      e.owner = owner;
      e.binding_key = f.binding_key;
      if (const FunctionHandler* h = registry_.find(f.binding_key)) {
        (*h)(trace_.blackboard);
        e.bound = true;
      }
      trace_.events.push_back(std::move(e));
    }
  }

  void finish(FinishReason reason, std::string detail) {
    if (finished_) return;
    finished_ = true;
    trace_.finish = reason;
    TraceEvent e;
    e.type = TraceEvent::Type::Finish;
    e.reason = reason;
    e.detail = std::move(detail);
    trace_.events.push_back(std::move(e));
  }

  const GoalNetDocument& doc_;
  const FunctionRegistry& registry_;
  const RunConfig& config_;
  std::mt19937_64 rng_;
  RunTrace trace_;
  bool finished_ = false;
};

void require_runnable(const GoalNetDocument& doc) {
  const auto errors = validate_for_run(doc);
  if (!errors.empty()) {
    throw Error(ErrorCode::InvalidArgument, "goal net '" + doc.name() + "' has " + std::to_string(errors.size()) +
                                                " validation error(s); first: " + errors.front().message);
  }
  if (!doc.header().start_state_id || !doc.header().end_state_id) {
    throw Error(ErrorCode::InvalidArgument, "goal net '" + doc.name() + "' needs start and end states");
  }
}

}  // namespace

RunTrace interpret(const GoalNetDocument& doc, const FunctionRegistry& registry, const RunConfig& config) {
  if (config.max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be at least 1", "max_steps");
  require_runnable(doc);
  return Interpreter(doc, registry, config).run();
}

LaunchReport run_external(const Store& store, const EntityId& gnet_id, const RunConfig& config) {
  const GoalNetDocument doc = store.load(gnet_id);
  LaunchReport report;
  report.errors = validate_for_run(doc);
  if (!report.errors.empty()) return report;
  if (!config.compiler_path || config.compiler_path->empty()) {
    throw Error(ErrorCode::Config, std::string(kCompilerNotSpecified), "compiler_path");
  }

  report.argv = {*config.compiler_path, "--goalnet", gnet_id.str(), "--store", store.path()};
  std::vector<char*> argv;
  for (auto& a : report.argv) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawn(&pid, config.compiler_path->c_str(), nullptr, nullptr, argv.data(), environ);
  if (rc != 0) {
    throw Error(ErrorCode::Runtime,
                "cannot launch external compiler '" + *config.compiler_path + "': " + std::strerror(rc));
  }
  report.launched = true;
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw Error(ErrorCode::Runtime, std::string("waitpid failed: ") + std::strerror(errno));
  }
  if (WIFEXITED(status)) report.exit_status = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) report.exit_status = 128 + WTERMSIG(status);
  return report;
}

nlohmann::json launch_report_to_json(const LaunchReport& report) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& d : report.errors) errors.push_back(diagnostic_to_json(d));
  return {{"launched", report.launched},
          {"argv", report.argv},
          {"exit_status", report.exit_status},
          {"errors", std::move(errors)}};
}

GuardValue parse_blackboard_value(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (!text.empty() && ec == std::errc() && ptr == end && std::isfinite(v)) return v;
  return std::string(text);
}

Blackboard blackboard_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "blackboard must be an object", "blackboard");
  Blackboard bb;
  for (const auto& [key, value] : j.items()) {
    if (value.is_boolean()) bb.set(key, value.get<bool>());
    else if (value.is_number()) bb.set(key, value.get<double>());
    else if (value.is_string()) bb.set(key, value.get<std::string>());
    else throw Error(ErrorCode::InvalidArgument, "unsupported value type", "blackboard." + key);
  }
  return bb;
}

nlohmann::json blackboard_to_json(const Blackboard& bb) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : bb.entries()) {
    std::visit([&](const auto& v) { j[key] = v; }, value);
  }
  return j;
}

}  // namespace goalnet
