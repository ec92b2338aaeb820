#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "goalnet/model.hpp"

namespace goalnet::testing {

// The waterfall SDLC design from the walkthrough: composite SDLC holding
// Start -> [Analyse Requirements] -> Requirements Specified -> [Design Software]
// -> Design Completed -> [Implement and Test] -> End, with tasks and functions.
struct Sdlc {
  GoalNetDocument doc;
  EntityId sdlc, start, requirements, design_done, end;
  EntityId analyse, design, implement;
  EntityId do_analysis, do_design, do_implementation;
  EntityId draw_uml, write_design_doc;
};

// with_properties=false gives the state just before the first validation run.
Sdlc make_sdlc(bool with_properties);

// Root R { Start -> T -> End }, T runs task "Work" with function "work.fn".
struct Linear {
  GoalNetDocument doc;
  EntityId root, start, transition, end, task, function;
};
Linear make_linear();

// Root R { Start -> P(probabilistic) -> A | B; A -> TA -> End; B -> TB -> End }.
struct Fork {
  GoalNetDocument doc;
  EntityId start, fork, a, b, end;
};
Fork make_probabilistic_fork(double weight_a, double weight_b);

// Root R { Start -> C(conditional) -> Low [guard "x < 3", priority 0] | High [no guard, priority 1] ... -> End }.
Fork make_conditional_fork(bool with_default);

// Cyclic main routine: conditional event check, intrinsic goal selection over
// three sub-goal composites, probabilistic continue/finish loop.
GoalNetDocument make_main_routine();
// Assessment chain (desire, relationship, relevance) ending in emotion generation.
GoalNetDocument make_affective_chain();

struct RandomLimits {
  int max_states = 12;
  int max_transitions = 8;
  int max_arcs = 20;
};
// Built through the editing API, so it is always structurally sound, but
// deliberately sloppy: missing properties, missing boundaries, stray nodes,
// atomic roots, guards, weights, priorities and associations.
GoalNetDocument random_document(std::mt19937_64& rng, const RandomLimits& limits = {});

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace goalnet::testing
