#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <sys/stat.h>

#include "fixtures.hpp"
#include "goalnet/collaboration.hpp"
#include "goalnet/error.hpp"
#include "goalnet/runner.hpp"

using namespace goalnet;
using Type = TraceEvent::Type;
using goalnet::testing::TempDir;

namespace {

// "enter:Start", "fn:work.fn", "fire:T->End", "task:Work", "finish:reached_end"
std::vector<std::string> shorthand(const GoalNetDocument& doc, const RunTrace& trace) {
  std::vector<std::string> out;
  for (const auto& e : trace.events) {
    switch (e.type) {
      case Type::EnterState: out.push_back("enter:" + e.name); break;
      case Type::ExecuteFunction: out.push_back("fn:" + e.binding_key); break;
      case Type::FireTransition: out.push_back("fire:" + e.name + "->" + doc.state(*e.target).name); break;
      case Type::ExecuteTask: out.push_back("task:" + e.name); break;
      case Type::Finish: out.push_back("finish:" + std::string(to_string(e.reason))); break;
    }
  }
  return out;
}

RunConfig with_seed(std::uint64_t seed, Blackboard bb = {}) {
  RunConfig c;
  c.seed = seed;
  c.blackboard = std::move(bb);
  return c;
}

std::string write_stub(const TempDir& dir, const std::string& record, int exit_code) {
  const auto path = dir.file("stub.sh");
  std::ofstream(path) << "#!/bin/sh\nfor a in \"$@\"; do echo \"$a\"; done > '" << record << "'\nexit "
                      << exit_code << "\n";
  chmod(path.c_str(), 0755);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Interpret, LinearNetTrace) {
  const auto f = goalnet::testing::make_linear();
  const auto trace = interpret(f.doc, {}, with_seed(1));
  EXPECT_EQ(shorthand(f.doc, trace), (std::vector<std::string>{"enter:Start", "fire:T->End", "task:Work",
                                                               "fn:work.fn", "enter:End", "finish:reached_end"}));
  EXPECT_EQ(trace.steps, 1);
  EXPECT_EQ(trace.finish, FinishReason::ReachedEnd);
  EXPECT_FALSE(trace.events[3].bound);
  EXPECT_EQ(trace.events[3].owner, (EntityRef{EntityKind::Task, f.task}));
}

TEST(Interpret, BoundHandlerSeesBlackboard) {
  const auto f = goalnet::testing::make_linear();
  FunctionRegistry reg;
  reg.bind("work.fn", [](Blackboard& bb) { bb.set("done", true); });
  const auto trace = interpret(f.doc, reg, with_seed(1));
  EXPECT_TRUE(trace.events[3].bound);
  ASSERT_NE(trace.blackboard.find("done"), nullptr);
  EXPECT_EQ(std::get<bool>(*trace.blackboard.find("done")), true);
}

TEST(Interpret, ConditionalTakesFirstTrueGuardElseDefault) {
  const auto f = goalnet::testing::make_conditional_fork(true);
  Blackboard bb;
  bb.set("x", 2.0);
  auto t = interpret(f.doc, {}, with_seed(0, bb));
  EXPECT_EQ(shorthand(f.doc, t)[1], "fire:Fork->A");
  bb.set("x", 7.0);
  t = interpret(f.doc, {}, with_seed(0, bb));
  EXPECT_EQ(shorthand(f.doc, t)[1], "fire:Fork->B");
  EXPECT_EQ(t.finish, FinishReason::ReachedEnd);
}

TEST(Interpret, ConditionalWithoutDefaultFailsOnGuard) {
  const auto f = goalnet::testing::make_conditional_fork(false);
  Blackboard bb;
  bb.set("x", 7.0);
  const auto t = interpret(f.doc, {}, with_seed(0, bb));
  EXPECT_EQ(t.finish, FinishReason::GuardFailure);
  EXPECT_EQ(t.steps, 0);
}

TEST(Interpret, GuardEvaluationErrorFails) {
  const auto f = goalnet::testing::make_conditional_fork(true);
  const auto t = interpret(f.doc, {}, with_seed(0));  // x is not on the blackboard
  EXPECT_EQ(t.finish, FinishReason::GuardFailure);
  EXPECT_FALSE(t.events.back().detail.empty());
}

TEST(Interpret, SameSeedSameTrace) {
  const auto doc = goalnet::testing::make_main_routine();
  Blackboard bb;
  bb.set("external_event", false);
  for (std::uint64_t seed : {0ull, 1ull, 99ull, 123456789ull}) {
    const auto a = interpret(doc, {}, with_seed(seed, bb));
    const auto b = interpret(doc, {}, with_seed(seed, bb));
    EXPECT_EQ(trace_to_jsonl(a), trace_to_jsonl(b));
    EXPECT_EQ(a, b);
  }
}

TEST(Interpret, ProbabilisticFrequencyNearWeights) {
  const auto f = goalnet::testing::make_probabilistic_fork(0.7, 0.3);
  int a = 0;
  const int runs = 10000;
  for (int seed = 0; seed < runs; ++seed) {
    const auto t = interpret(f.doc, {}, with_seed(seed));
    ASSERT_EQ(t.finish, FinishReason::ReachedEnd);
    a += *t.events[1].target == f.a;
  }
  EXPECT_NEAR(static_cast<double>(a) / runs, 0.7, 0.02);
}

TEST(SelectionProbabilities, NormalizedWeights) {
  auto doc = GoalNetDocument::create("P", "", "u");
  const auto s = doc.add_state(std::nullopt, "S", StateKind::Atomic, {});
  const auto p = doc.add_transition(std::nullopt, "P", TransitionKind::Probabilistic, {});
  doc.add_arc({EntityKind::State, s}, {EntityKind::Transition, p});
  std::map<std::string, double> weight{{"X", 2}, {"Y", 1}, {"Z", 1}};
  for (const auto& [name, w] : weight) {
    const auto target = doc.add_state(std::nullopt, name, StateKind::Atomic, {});
    ArcUpdate u;
    u.weight = w;
    doc.update_arc(doc.add_arc({EntityKind::Transition, p}, {EntityKind::State, target}), u);
  }
  const auto probs = selection_probabilities(doc, p);
  ASSERT_EQ(probs.size(), 3u);
  EXPECT_NEAR(probs[0].second, 0.5, 1e-12);
  EXPECT_NEAR(probs[1].second, 0.25, 1e-12);
  EXPECT_NEAR(probs[2].second, 0.25, 1e-12);
  EXPECT_EQ(doc.state(probs[0].first).name, "X");
}

TEST(Interpret, CompositeDescendsAndAscends) {
  // Outer: Begin -> Go -> Inner{In Start -> Step -> In End} -> Leave -> Done
  auto d = GoalNetDocument::create("Nested", "", "u");
  auto S = [](const EntityId& id) { return EntityRef{EntityKind::State, id}; };
  auto T = [](const EntityId& id) { return EntityRef{EntityKind::Transition, id}; };
  const auto root = d.add_state(std::nullopt, "Root", StateKind::Composite, {});
  const auto begin = d.add_state(root, "Begin", StateKind::Atomic, {});
  const auto inner = d.add_state(root, "Inner", StateKind::Composite, {});
  const auto done = d.add_state(root, "Done", StateKind::Atomic, {});
  const auto in_start = d.add_state(inner, "In Start", StateKind::Atomic, {});
  const auto in_end = d.add_state(inner, "In End", StateKind::Atomic, {});
  const auto go = d.add_transition(root, "Go", TransitionKind::Direct, {});
  const auto step = d.add_transition(inner, "Step", TransitionKind::Direct, {});
  const auto leave = d.add_transition(root, "Leave", TransitionKind::Direct, {});
  d.add_arc(S(begin), T(go));
  d.add_arc(T(go), S(inner));
  d.add_arc(S(in_start), T(step));
  d.add_arc(T(step), S(in_end));
  d.add_arc(S(inner), T(leave));
  d.add_arc(T(leave), S(done));
  d.set_composite_boundaries(root, begin, done);
  d.set_composite_boundaries(inner, in_start, in_end);
  d.set_net_properties(root, begin, done);
  const auto fn = d.add_function("Inner Done", "", "inner.done");
  d.associate(AssociationKind::StateFunction, inner, fn);
  const auto t = interpret(d, {}, with_seed(0));
  EXPECT_EQ(shorthand(d, t),
            (std::vector<std::string>{"enter:Begin", "fire:Go->Inner", "enter:Inner", "enter:In Start",
                                      "fire:Step->In End", "enter:In End", "fn:inner.done", "fire:Leave->Done",
                                      "enter:Done", "finish:reached_end"}));
  EXPECT_EQ(t.steps, 3);
}

TEST(Interpret, SdlcWalksTheWaterfall) {
  const auto f = goalnet::testing::make_sdlc(true);
  const auto t = interpret(f.doc, {}, with_seed(0));
  std::vector<std::string> fired;
  for (const auto& e : t.events)
    if (e.type == Type::FireTransition) fired.push_back(e.name);
  EXPECT_EQ(fired, (std::vector<std::string>{"Analyse Requirements", "Design Software", "Implement and Test"}));
  EXPECT_EQ(t.finish, FinishReason::ReachedEnd);
  // Do Design runs its two functions in order
  std::vector<std::string> fns;
  for (const auto& e : t.events)
    if (e.type == Type::ExecuteFunction && e.owner.id == f.do_design) fns.push_back(e.name);
  EXPECT_EQ(fns, (std::vector<std::string>{"Draw UML Diagrams", "Write Design Document"}));
}

TEST(Interpret, StepLimit) {
  const auto doc = goalnet::testing::make_main_routine();
  Blackboard bb;
  bb.set("external_event", true);
  RunConfig c = with_seed(0, bb);
  c.max_steps = 1;
  const auto t = interpret(doc, {}, c);
  EXPECT_EQ(t.finish, FinishReason::StepLimit);
  EXPECT_EQ(t.steps, 1);
}

TEST(Interpret, EveryRunTerminatesWithinMaxSteps) {
  const auto doc = goalnet::testing::make_main_routine();
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Blackboard bb;
    bb.set("external_event", seed % 2 == 0);
    RunConfig c = with_seed(seed, bb);
    c.max_steps = 7;
    const auto t = interpret(doc, {}, c);
    ASSERT_LE(t.steps, 7);
    ASSERT_EQ(t.events.back().type, Type::Finish);
  }
}

TEST(Interpret, DeadEnd) {
  auto d = GoalNetDocument::create("Stuck", "", "u");
  auto S = [](const EntityId& id) { return EntityRef{EntityKind::State, id}; };
  auto T = [](const EntityId& id) { return EntityRef{EntityKind::Transition, id}; };
  const auto root = d.add_state(std::nullopt, "R", StateKind::Composite, {});
  const auto a = d.add_state(root, "A", StateKind::Atomic, {});
  const auto mid = d.add_state(root, "Mid", StateKind::Atomic, {});
  const auto x = d.add_state(root, "X", StateKind::Atomic, {});
  const auto end = d.add_state(root, "End", StateKind::Atomic, {});
  const auto t1 = d.add_transition(root, "T1", TransitionKind::Direct, {});
  const auto t2 = d.add_transition(root, "T2", TransitionKind::Direct, {});
  d.add_arc(S(a), T(t1));
  d.add_arc(T(t1), S(mid));
  d.add_arc(S(x), T(t2));
  d.add_arc(T(t2), S(end));
  d.set_composite_boundaries(root, a, end);
  d.set_net_properties(root, a, end);
  ASSERT_TRUE(validate_for_run(d).empty());
  const auto t = interpret(d, {}, with_seed(0));
  EXPECT_EQ(t.finish, FinishReason::DeadEnd);
}

TEST(Interpret, DirectWithTwoOutputsIsRuntimeError) {
  auto f = goalnet::testing::make_linear();
  const auto extra = f.doc.add_state(f.root, "Extra", StateKind::Atomic, {});
  f.doc.add_arc({EntityKind::Transition, f.transition}, {EntityKind::State, extra});
  try {
    interpret(f.doc, {}, with_seed(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Runtime);
  }
}

TEST(Interpret, RefusesNetsWithErrors) {
  const auto f = goalnet::testing::make_sdlc(false);
  try {
    interpret(f.doc, {}, with_seed(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(CaseStudies, MainRoutineReachesEnd) {
  const auto doc = goalnet::testing::make_main_routine();
  ASSERT_TRUE(validate_for_run(doc).empty());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Blackboard bb;
    bb.set("external_event", seed % 3 == 0);
    RunConfig c = with_seed(seed, bb);
    c.max_steps = 200;
    const auto t = interpret(doc, {}, c);
    ASSERT_EQ(t.finish, FinishReason::ReachedEnd) << seed;
    ASSERT_LE(t.steps, 200);
  }
}

TEST(CaseStudies, AffectiveChainReachesEnd) {
  const auto doc = goalnet::testing::make_affective_chain();
  ASSERT_TRUE(validate_for_run(doc).empty());
  Blackboard bb;
  bb.set("desire", 0.8);
  bb.set("relationship", std::string("friend"));
  bb.set("relevance", 0.5);
  bb.set("bored", false);
  RunConfig c = with_seed(0, bb);
  c.max_steps = 200;
  const auto t = interpret(doc, {}, c);
  EXPECT_EQ(t.finish, FinishReason::ReachedEnd);
  std::vector<std::string> entered;
  for (const auto& e : t.events)
    if (e.type == Type::EnterState) entered.push_back(e.name);
  EXPECT_EQ(entered, (std::vector<std::string>{"Stimulus Perceived", "Desire High", "Relationship Close",
                                               "Relevant", "Emotion Expressed"}));
  bb.set("bored", true);
  bb.set("relationship", std::string("stranger"));
  const auto t2 = interpret(doc, {}, with_seed(0, bb));
  entered.clear();
  for (const auto& e : t2.events)
    if (e.type == Type::EnterState) entered.push_back(e.name);
  EXPECT_EQ(entered, (std::vector<std::string>{"Stimulus Perceived", "Desire High", "Relationship Distant",
                                               "Irrelevant", "Emotion Expressed"}));
}

TEST(TraceJsonl, HeaderAndOneLinePerEvent) {
  const auto f = goalnet::testing::make_linear();
  const auto t = interpret(f.doc, {}, with_seed(42));
  const auto text = trace_to_jsonl(t);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, R"({"event":"trace","seed":42})");
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_NO_THROW(nlohmann::json::parse(line));
  }
  EXPECT_EQ(n, t.events.size());
}

class RunGate : public ::testing::Test {
 protected:
  TempDir dir;
  Store store = Store::open(dir.file("gate.db"));
  void SetUp() override { store.add_user({"lisiyao", "", "", ""}); }
};

TEST_F(RunGate, ErrorsBlockTheLaunch) {
  auto f = goalnet::testing::make_sdlc(false);
  store.insert_net(f.doc, "lisiyao");
  const auto record = dir.file("argv.txt");
  RunConfig c;
  c.compiler_path = write_stub(dir, record, 0);
  const auto r = run_external(store, f.doc.id(), c);
  EXPECT_FALSE(r.launched);
  EXPECT_EQ(r.errors.size(), 4u);
  EXPECT_FALSE(std::filesystem::exists(record));
}

TEST_F(RunGate, CleanNetSpawnsWithNetId) {
  auto f = goalnet::testing::make_sdlc(true);
  store.insert_net(f.doc, "lisiyao");
  const auto record = dir.file("argv.txt");
  RunConfig c;
  c.compiler_path = write_stub(dir, record, 3);
  const auto r = run_external(store, f.doc.id(), c);
  EXPECT_TRUE(r.launched);
  EXPECT_EQ(r.exit_status, 3);
  EXPECT_EQ(slurp(record), "--goalnet\n" + f.doc.id().str() + "\n--store\n" + store.path() + "\n");
}

TEST_F(RunGate, UnsetCompilerPath) {
  auto f = goalnet::testing::make_sdlc(true);
  store.insert_net(f.doc, "lisiyao");
  try {
    run_external(store, f.doc.id(), RunConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_EQ(std::string(e.what()), kCompilerNotSpecified);
    EXPECT_NE(std::string(e.what()).find("external compiler is not specified"), std::string::npos);
  }
}

TEST_F(RunGate, MissingExecutable) {
  auto f = goalnet::testing::make_sdlc(true);
  store.insert_net(f.doc, "lisiyao");
  RunConfig c;
  c.compiler_path = dir.file("does-not-exist");
  try {
    run_external(store, f.doc.id(), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Runtime);
  }
}

TEST(BlackboardText, ParseValues) {
  EXPECT_EQ(parse_blackboard_value("true"), GuardValue(true));
  EXPECT_EQ(parse_blackboard_value("2.5"), GuardValue(2.5));
  EXPECT_EQ(parse_blackboard_value("friend"), GuardValue(std::string("friend")));
  EXPECT_EQ(parse_blackboard_value("inf"), GuardValue(std::string("inf")));
}
