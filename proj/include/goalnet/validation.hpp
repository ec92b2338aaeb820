#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "goalnet/model.hpp"

namespace goalnet {

enum class Severity { Error, Warning };

// Errors E1..E6 block running; warnings W1..W5 are advisory.
enum class Rule { E1, E2, E3, E4, E5, E6, W1, W2, W3, W4, W5 };

std::string_view to_string(Severity s);
std::string_view to_string(Rule r);
std::optional<Rule> rule_from(std::string_view code);
Severity severity_of(Rule r);

struct Diagnostic {
  Severity severity = Severity::Error;
  Rule rule = Rule::E1;
  std::string message;
  EntityRef subject;
  std::string subject_name;

  bool operator==(const Diagnostic&) const = default;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;
  std::size_t error_count = 0;
  std::size_t warning_count = 0;

  bool operator==(const ValidationReport&) const = default;
};

/// Runs every rule. Malformed structure is reported, never thrown.
/// Ordering: rule code, then subject name, then subject id; ties keep rule
/// emission order (root, start, end for E1).
ValidationReport validate(const GoalNetDocument& doc);

/// Error-severity subset of validate(doc), same order.
std::vector<Diagnostic> validate_for_run(const GoalNetDocument& doc);

enum class NavigationTarget {
  NetPropertiesDialog,
  StateOnCanvas,
  TransitionOnCanvas,
  StateFunctionsDialog,
  TransitionTasksDialog,
  TaskManagerDialog,
};

std::string_view to_string(NavigationTarget t);

struct RuleInfo {
  Rule rule;
  std::string_view title;
  std::string_view remedy;
  NavigationTarget target;
};

const RuleInfo& explain(Rule rule);

}  // namespace goalnet
