#include "fixtures.hpp"

#include <unistd.h>

#include <vector>

#include "goalnet/error.hpp"

namespace goalnet::testing {

namespace {

EntityRef S(const EntityId& id) { return {EntityKind::State, id}; }
EntityRef T(const EntityId& id) { return {EntityKind::Transition, id}; }

// state -> transition -> state
void chain(GoalNetDocument& doc, const EntityId& from, const EntityId& t, const EntityId& to) {
  doc.add_arc(S(from), T(t));
  doc.add_arc(T(t), S(to));
}

EntityId arc_between(const GoalNetDocument& doc, const EntityId& source, const EntityId& target) {
  for (const auto& [id, a] : doc.arcs()) {
    if (a.source.id == source && a.target.id == target) return id;
  }
  throw Error(ErrorCode::NotFound, "no arc");
}

EntityId task_with(GoalNetDocument& doc, const EntityId& transition, const std::string& task_name,
                   const std::vector<std::pair<std::string, std::string>>& functions) {
  const EntityId task = doc.add_task(task_name, "");
  doc.associate(AssociationKind::TransitionTask, transition, task);
  for (const auto& [name, key] : functions) {
    doc.associate(AssociationKind::TaskFunction, task, doc.add_function(name, "", key));
  }
  return task;
}

void state_function(GoalNetDocument& doc, const EntityId& state, const std::string& name, const std::string& key) {
  doc.associate(AssociationKind::StateFunction, state, doc.add_function(name, "", key));
}

}  // namespace

Sdlc make_sdlc(bool with_properties) {
  Sdlc f{GoalNetDocument::create("SDLC", "Waterfall software development life cycle", "lisiyao"), {}, {}, {}, {},
         {}, {}, {}, {}, {}, {}, {}, {}, {}};
  auto& d = f.doc;
  f.sdlc = d.add_state(std::nullopt, "SDLC", StateKind::Composite, {100, 100});
  f.start = d.add_state(f.sdlc, "Start", StateKind::Atomic, {10, 10});
  f.requirements = d.add_state(f.sdlc, "Requirements Specified", StateKind::Atomic, {130, 10});
  f.design_done = d.add_state(f.sdlc, "Design Completed", StateKind::Atomic, {250, 10});
  f.end = d.add_state(f.sdlc, "End", StateKind::Atomic, {370, 10});
  f.analyse = d.add_transition(f.sdlc, "Analyse Requirements", TransitionKind::Direct, {70, 20});
  f.design = d.add_transition(f.sdlc, "Design Software", TransitionKind::Direct, {190, 20});
  f.implement = d.add_transition(f.sdlc, "Implement and Test", TransitionKind::Direct, {310, 20});
  chain(d, f.start, f.analyse, f.requirements);
  chain(d, f.requirements, f.design, f.design_done);
  chain(d, f.design_done, f.implement, f.end);
  d.set_composite_boundaries(f.sdlc, f.start, f.end);

  f.do_analysis = task_with(d, f.analyse, "Do Analysis", {{"Interview Stakeholders", "sdlc.interview"}});
  f.do_design = d.add_task("Do Design", "");
  d.associate(AssociationKind::TransitionTask, f.design, f.do_design);
  f.draw_uml = d.add_function("Draw UML Diagrams", "", "sdlc.uml");
  f.write_design_doc = d.add_function("Write Design Document", "", "sdlc.design_doc");
  d.associate(AssociationKind::TaskFunction, f.do_design, f.draw_uml);
  d.associate(AssociationKind::TaskFunction, f.do_design, f.write_design_doc);
  f.do_implementation =
      task_with(d, f.implement, "Do Implementation", {{"Write Code", "sdlc.code"}, {"Run Tests", "sdlc.test"}});
  state_function(d, f.start, "Kick Off", "sdlc.kickoff");
  state_function(d, f.requirements, "Sign Off Requirements", "sdlc.signoff_req");
  state_function(d, f.design_done, "Review Design", "sdlc.review");
  state_function(d, f.end, "Release", "sdlc.release");
  state_function(d, f.sdlc, "Report Progress", "sdlc.report");

  if (with_properties) d.set_net_properties(f.sdlc, f.start, f.end);
  return f;
}

Linear make_linear() {
  Linear f{GoalNetDocument::create("Linear", "", "tester"), {}, {}, {}, {}, {}, {}};
  auto& d = f.doc;
  f.root = d.add_state(std::nullopt, "R", StateKind::Composite, {0, 0});
  f.start = d.add_state(f.root, "Start", StateKind::Atomic, {0, 0});
  f.end = d.add_state(f.root, "End", StateKind::Atomic, {200, 0});
  f.transition = d.add_transition(f.root, "T", TransitionKind::Direct, {100, 0});
  chain(d, f.start, f.transition, f.end);
  d.set_composite_boundaries(f.root, f.start, f.end);
  d.set_net_properties(f.root, f.start, f.end);
  f.task = d.add_task("Work", "");
  f.function = d.add_function("Do Work", "", "work.fn");
  d.associate(AssociationKind::TransitionTask, f.transition, f.task);
  d.associate(AssociationKind::TaskFunction, f.task, f.function);
  return f;
}

namespace {

Fork fork_skeleton(const std::string& name, TransitionKind kind) {
  Fork f{GoalNetDocument::create(name, "", "tester"), {}, {}, {}, {}, {}};
  auto& d = f.doc;
  const EntityId root = d.add_state(std::nullopt, "R", StateKind::Composite, {0, 0});
  f.start = d.add_state(root, "Start", StateKind::Atomic, {0, 0});
  f.a = d.add_state(root, "A", StateKind::Atomic, {200, -50});
  f.b = d.add_state(root, "B", StateKind::Atomic, {200, 50});
  f.end = d.add_state(root, "End", StateKind::Atomic, {400, 0});
  f.fork = d.add_transition(root, "Fork", kind, {100, 0});
  const EntityId ta = d.add_transition(root, "TA", TransitionKind::Direct, {300, -50});
  const EntityId tb = d.add_transition(root, "TB", TransitionKind::Direct, {300, 50});
  d.add_arc(S(f.start), T(f.fork));
  d.add_arc(T(f.fork), S(f.a));
  d.add_arc(T(f.fork), S(f.b));
  chain(d, f.a, ta, f.end);
  chain(d, f.b, tb, f.end);
  d.set_composite_boundaries(root, f.start, f.end);
  d.set_net_properties(root, f.start, f.end);
  return f;
}

}  // namespace

Fork make_probabilistic_fork(double weight_a, double weight_b) {
  Fork f = fork_skeleton("Fork", TransitionKind::Probabilistic);
  ArcUpdate ua;
  ua.weight = weight_a;
  f.doc.update_arc(arc_between(f.doc, f.fork, f.a), ua);
  ArcUpdate ub;
  ub.weight = weight_b;
  f.doc.update_arc(arc_between(f.doc, f.fork, f.b), ub);
  return f;
}

Fork make_conditional_fork(bool with_default) {
  Fork f = fork_skeleton("Choice", TransitionKind::Conditional);
  ArcUpdate ua;
  ua.guard = std::optional<std::string>("x < 3");
  ua.priority = 0;
  f.doc.update_arc(arc_between(f.doc, f.fork, f.a), ua);
  ArcUpdate ub;
  ub.priority = 1;
  if (!with_default) ub.guard = std::optional<std::string>("x >= 100");
  f.doc.update_arc(arc_between(f.doc, f.fork, f.b), ub);
  return f;
}

GoalNetDocument make_main_routine() {
  GoalNetDocument d = GoalNetDocument::create("TA Main Routine", "Teachable agent top level goal net", "designer");
  const EntityId root = d.add_state(std::nullopt, "TA Main Routine", StateKind::Composite, {0, 0});
  const EntityId idle = d.add_state(root, "Idle", StateKind::Atomic, {0, 0});
  const EntityId event_goal = d.add_state(root, "Event Goal Selected", StateKind::Atomic, {200, -100});
  const EntityId intrinsic = d.add_state(root, "Intrinsic Goal Selected", StateKind::Atomic, {200, 100});
  const EntityId pursued = d.add_state(root, "Goal Pursued", StateKind::Atomic, {600, 0});
  const EntityId finished = d.add_state(root, "Routine Finished", StateKind::Atomic, {800, 0});

  const EntityId check = d.add_transition(root, "Check Event", TransitionKind::Conditional, {100, 0});
  d.add_arc(S(idle), T(check));
  const EntityId to_event = d.add_arc(T(check), S(event_goal));
  d.add_arc(T(check), S(intrinsic));
  ArcUpdate guard;
  guard.guard = std::optional<std::string>("external_event == true");
  d.update_arc(to_event, guard);
  ArcUpdate fallback;
  fallback.priority = 1;
  d.update_arc(arc_between(d, check, intrinsic), fallback);

  // Sub-goals, each a small composite of its own.
  const EntityId choose = d.add_transition(root, "Choose Sub-goal", TransitionKind::Probabilistic, {300, 100});
  d.add_arc(S(intrinsic), T(choose));
  std::vector<EntityId> subgoals;
  double y = 50;
  for (const std::string name : {"To Learn", "To Practice", "To Be Affective"}) {
    const EntityId sub = d.add_state(root, name, StateKind::Composite, {400, y});
    const EntityId begin = d.add_state(sub, name + " Begun", StateKind::Atomic, {0, 0});
    const EntityId done = d.add_state(sub, name + " Achieved", StateKind::Atomic, {100, 0});
    const EntityId work = d.add_transition(sub, "Work On " + name.substr(3), TransitionKind::Direct, {50, 0});
    chain(d, begin, work, done);
    d.set_composite_boundaries(sub, begin, done);
    task_with(d, work, "Pursue " + name.substr(3), {{"Act " + name.substr(3), "ta.act." + name.substr(3)}});
    d.add_arc(T(choose), S(sub));
    subgoals.push_back(sub);
    y += 50;
  }

  const EntityId respond = d.add_transition(root, "Respond To Event", TransitionKind::Direct, {300, -100});
  chain(d, event_goal, respond, pursued);
  // One multi-input transition collects every sub-goal.
  const EntityId reflect = d.add_transition(root, "Reflect", TransitionKind::Direct, {500, 50});
  for (const auto& sub : subgoals) d.add_arc(S(sub), T(reflect));
  d.add_arc(T(reflect), S(pursued));

  const EntityId again = d.add_transition(root, "Continue Or Stop", TransitionKind::Probabilistic, {700, 0});
  d.add_arc(S(pursued), T(again));
  d.add_arc(T(again), S(idle));
  d.add_arc(T(again), S(finished));

  d.set_composite_boundaries(root, idle, finished);
  d.set_net_properties(root, idle, finished);

  task_with(d, check, "Sense Environment", {{"Detect External Event", "ta.sense"}});
  task_with(d, choose, "Select Intrinsic Goal", {{"Rank Motivations", "ta.motivation"}});
  task_with(d, respond, "Handle Event", {{"React", "ta.react"}});
  task_with(d, reflect, "Reflect On Outcome", {{"Update Knowledge", "ta.reflect"}});
  task_with(d, again, "Decide Continuation", {{"Check Session", "ta.session"}});
  state_function(d, idle, "Wait", "ta.wait");
  state_function(d, finished, "Say Goodbye", "ta.goodbye");
  return d;
}

GoalNetDocument make_affective_chain() {
  GoalNetDocument d = GoalNetDocument::create("To Be Affective", "Emotion elicitation sub goal net", "designer");
  const EntityId root = d.add_state(std::nullopt, "To Be Affective", StateKind::Composite, {0, 0});
  const EntityId start = d.add_state(root, "Stimulus Perceived", StateKind::Atomic, {0, 0});

  struct Stage {
    std::string transition;
    std::string guard;
    std::string high;
    std::string low;
    std::string function;
  };
  const std::vector<Stage> stages = {
      {"Assess Desire", "desire >= 0.5", "Desire High", "Desire Low", "AssessDesire"},
      {"Assess Relationship", "relationship == \"friend\"", "Relationship Close", "Relationship Distant",
       "AssessRelationship"},
      {"Assess Relevance", "relevance > 0.3 && !bored", "Relevant", "Irrelevant", "AssessRelevance"},
  };
  std::vector<EntityId> inputs = {start};
  double x = 100;
  for (const auto& stage : stages) {
    const EntityId t = d.add_transition(root, stage.transition, TransitionKind::Conditional, {x, 0});
    for (const auto& in : inputs) d.add_arc(S(in), T(t));
    const EntityId high = d.add_state(root, stage.high, StateKind::Atomic, {x + 50, -50});
    const EntityId low = d.add_state(root, stage.low, StateKind::Atomic, {x + 50, 50});
    ArcUpdate g;
    g.guard = std::optional<std::string>(stage.guard);
    d.update_arc(d.add_arc(T(t), S(high)), g);
    ArcUpdate fallback;
    fallback.priority = 1;
    d.update_arc(d.add_arc(T(t), S(low)), fallback);
    task_with(d, t, stage.transition + " Rules", {{stage.function, "affect." + stage.function}});
    inputs = {high, low};
    x += 100;
  }
  const EntityId generate = d.add_transition(root, "Generate Emotion", TransitionKind::Direct, {x, 0});
  for (const auto& in : inputs) d.add_arc(S(in), T(generate));
  const EntityId expressed = d.add_state(root, "Emotion Expressed", StateKind::Atomic, {x + 100, 0});
  d.add_arc(T(generate), S(expressed));
  task_with(d, generate, "Emotion Generation", {{"GenerateEmotion", "emotion.v1"}});
  state_function(d, expressed, "Express Emotion", "affect.express");

  d.set_composite_boundaries(root, start, expressed);
  d.set_net_properties(root, start, expressed);
  return d;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

int upto(std::mt19937_64& rng, int n) { return std::uniform_int_distribution<int>(0, n)(rng); }

const std::vector<std::string> kNames = {"A", "B", "Start", "End", "Loop", "x", "Ärger", "a b", "Z", "B"};
const std::vector<std::string> kGuards = {"x < 3", "flag", "!flag && y >= 2", "name == \"ok\"", "true",
                                          "(a || b) && c"};

}  // namespace

GoalNetDocument random_document(std::mt19937_64& rng, const RandomLimits& limits) {
  GoalNetDocument d = GoalNetDocument::create("Net " + pick(rng, kNames), chance(rng, 0.5) ? "" : "desc", "fuzz");
  std::vector<EntityId> states, composites, transitions;
  std::vector<std::optional<EntityId>> scopes = {std::nullopt};
  auto coord = [&] { return std::uniform_real_distribution<double>(-500, 500)(rng); };

  const int n_states = upto(rng, limits.max_states);
  for (int i = 0; i < n_states; ++i) {
    const auto parent = pick(rng, scopes);
    const StateKind kind = chance(rng, 0.3) ? StateKind::Composite : StateKind::Atomic;
    const EntityId id = d.add_state(parent, pick(rng, kNames), kind, {coord(), coord()});
    states.push_back(id);
    if (kind == StateKind::Composite) {
      composites.push_back(id);
      scopes.emplace_back(id);
    }
  }
  const int n_transitions = upto(rng, limits.max_transitions);
  for (int i = 0; i < n_transitions; ++i) {
    const TransitionKind kind = static_cast<TransitionKind>(upto(rng, 2));
    transitions.push_back(d.add_transition(pick(rng, scopes), pick(rng, kNames), kind, {coord(), coord()}));
  }

  if (!states.empty() && !transitions.empty()) {
    const int n_arcs = upto(rng, limits.max_arcs);
    for (int i = 0, made = 0; i < n_arcs * 4 && made < n_arcs; ++i) {
      const EntityId s = pick(rng, states);
      const EntityId t = pick(rng, transitions);
      if (d.state(s).parent_id != d.transition(t).parent_id) continue;
      try {
        const EntityId arc = chance(rng, 0.5) ? d.add_arc(S(s), T(t)) : d.add_arc(T(t), S(s));
        ++made;
        if (d.arc(arc).source.kind == EntityKind::Transition) {
          ArcUpdate u;
          if (chance(rng, 0.4)) u.guard = std::optional<std::string>(pick(rng, kGuards));
          if (chance(rng, 0.4)) u.weight = std::uniform_real_distribution<double>(0.01, 5.0)(rng);
          if (chance(rng, 0.4)) u.priority = upto(rng, 3);
          d.update_arc(arc, u);
        }
      } catch (const Error&) {
        // duplicate arc; try another pair
      }
    }
  }

  for (const auto& c : composites) {
    std::vector<EntityId> children;
    for (const auto& ref : d.children_of(c)) {
      if (ref.kind == EntityKind::State) children.push_back(ref.id);
    }
    if (children.empty()) continue;
    std::optional<EntityId> first, last;
    if (chance(rng, 0.7)) first = pick(rng, children);
    if (chance(rng, 0.7)) last = pick(rng, children);
    d.set_composite_boundaries(c, first, last);
  }

  // Occasionally demote an empty composite so an atomic root becomes possible.
  std::optional<EntityId> atomic_root;
  for (const auto& c : composites) {
    if (d.children_of(c).empty() && chance(rng, 0.3)) {
      d.convert_state_kind(c, StateKind::Atomic, false);
      atomic_root = c;
    }
  }
  std::vector<EntityId> roots;
  for (const auto& c : composites) {
    if (d.state(c).kind == StateKind::Composite) roots.push_back(c);
  }
  if (!states.empty()) {
    std::optional<EntityId> root, start, end;
    if (!roots.empty() && chance(rng, 0.6)) root = pick(rng, roots);
    if (chance(rng, 0.6)) start = pick(rng, states);
    if (chance(rng, 0.6)) end = pick(rng, states);
    d.set_net_properties(root, start, end);
    if (atomic_root && chance(rng, 0.5)) {
      // Make the demoted state root while it was composite, then demote again.
      d.convert_state_kind(*atomic_root, StateKind::Composite, false);
      d.set_net_properties(*atomic_root, start, end);
      d.convert_state_kind(*atomic_root, StateKind::Atomic, false);
    }
  }

  std::vector<EntityId> functions, tasks;
  for (int i = upto(rng, 4); i > 0; --i) functions.push_back(d.add_function(pick(rng, kNames), "", "fn." + std::to_string(i)));
  for (int i = upto(rng, 3); i > 0; --i) tasks.push_back(d.add_task(pick(rng, kNames), ""));
  for (int i = upto(rng, 10); i > 0; --i) {
    try {
      switch (upto(rng, 2)) {
        case 0:
          if (!states.empty() && !functions.empty())
            d.associate(AssociationKind::StateFunction, pick(rng, states), pick(rng, functions));
          break;
        case 1:
          if (!transitions.empty() && !tasks.empty())
            d.associate(AssociationKind::TransitionTask, pick(rng, transitions), pick(rng, tasks));
          break;
        default:
          if (!tasks.empty() && !functions.empty())
            d.associate(AssociationKind::TaskFunction, pick(rng, tasks), pick(rng, functions));
      }
    } catch (const Error&) {
      // duplicate pair
    }
  }
  return d;
}

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "goalnet-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace goalnet::testing
