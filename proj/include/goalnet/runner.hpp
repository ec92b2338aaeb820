#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "goalnet/guard.hpp"
#include "goalnet/model.hpp"
#include "goalnet/store.hpp"
#include "goalnet/validation.hpp"

namespace goalnet {

using FunctionHandler = std::function<void(Blackboard&)>;

/// binding_key -> handler. Keys without a handler run as recording stubs.
class FunctionRegistry {
 public:
  void bind(std::string key, FunctionHandler handler);
  const FunctionHandler* find(std::string_view key) const;

 private:
  std::map<std::string, FunctionHandler, std::less<>> handlers_;
};

struct RunConfig {
  std::optional<std::string> compiler_path;
  std::uint64_t seed = 0;
  std::int64_t max_steps = 10000;
  Blackboard blackboard;
};

enum class FinishReason { ReachedEnd, StepLimit, GuardFailure, DeadEnd };
std::string_view to_string(FinishReason r);

struct TraceEvent {
  enum class Type { EnterState, ExecuteFunction, FireTransition, ExecuteTask, Finish };

  Type type = Type::EnterState;
  EntityId id;                     // state, function, transition or task; empty for Finish
  std::string name;
  std::optional<EntityId> target;  // FireTransition: chosen output state
  EntityRef owner;                 // ExecuteFunction: state or task that ran it
  std::string binding_key;         // ExecuteFunction
  bool bound = false;              // ExecuteFunction: a registered handler ran
  FinishReason reason = FinishReason::ReachedEnd;
  std::string detail;              // Finish

  bool operator==(const TraceEvent&) const = default;
};

std::string_view to_string(TraceEvent::Type t);

struct RunTrace {
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  std::int64_t steps = 0;  // transitions fired
  FinishReason finish = FinishReason::ReachedEnd;
  Blackboard blackboard;   // final contents

  bool operator==(const RunTrace&) const = default;
};

/// Header line {"event":"trace","seed":...} followed by one line per event.
std::string trace_to_jsonl(const RunTrace& trace);

/// Output arcs of a transition in selection order: priority, target name, arc id.
std::vector<EntityId> ordered_outputs(const GoalNetDocument& doc, const EntityId& transition_id);

/// Per-output probabilities of a probabilistic transition, in ordered_outputs order.
std::vector<std::pair<EntityId, double>> selection_probabilities(const GoalNetDocument& doc,
                                                                 const EntityId& transition_id);

struct Selection {
  std::optional<EntityId> target;  // chosen state
  std::string failure;             // why nothing was chosen
  bool guard_error = false;        // a guard could not be evaluated
};

/// Picks the output state of one firing. Direct with other than one output
/// throws Error(Runtime); guard evaluation errors become a failure text.
Selection select_target(const GoalNetDocument& doc, const EntityId& transition_id, const Blackboard& bb,
                        std::mt19937_64& rng);

/// Reference interpreter with one token. Throws Error(InvalidArgument) when
/// the net has validation errors.
RunTrace interpret(const GoalNetDocument& doc, const FunctionRegistry& registry, const RunConfig& config);

struct LaunchReport {
  bool launched = false;
  std::vector<Diagnostic> errors;  // set when the gate blocked the launch
  std::vector<std::string> argv;
  int exit_status = -1;
};

/// Validates the stored net; with no errors spawns
/// `<compiler> --goalnet <uuid> --store <store path>` and waits for it.
LaunchReport run_external(const Store& store, const EntityId& gnet_id, const RunConfig& config);

nlohmann::json launch_report_to_json(const LaunchReport& report);

/// "true"/"false" become booleans, decimal numbers become numbers, anything
/// else stays text.
GuardValue parse_blackboard_value(std::string_view text);
/// Object of booleans, numbers and strings.
Blackboard blackboard_from_json(const nlohmann::json& j);
nlohmann::json blackboard_to_json(const Blackboard& bb);

inline constexpr std::string_view kCompilerNotSpecified =
    "The external compiler is not specified. Set the path to the external compiler executable first.";

}  // namespace goalnet
