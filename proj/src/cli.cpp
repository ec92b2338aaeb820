#include "goalnet/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "goalnet/api.hpp"
#include "goalnet/collaboration.hpp"
#include "goalnet/document_io.hpp"
#include "goalnet/edit_script.hpp"
#include "goalnet/error.hpp"
#include "goalnet/runner.hpp"
#include "goalnet/telemetry.hpp"
#include "goalnet/validation.hpp"

namespace goalnet {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::AccessDenied: return kExitAccess;
    case ErrorCode::Conflict:
    case ErrorCode::Storage:
    case ErrorCode::Runtime: return kExitStore;
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotFound:
    case ErrorCode::Config:
    case ErrorCode::Parse: return kExitUsage;
  }
  return kExitUsage;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << bytes;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  file << bytes;
  if (!file) throw Error(ErrorCode::Config, "cannot write '" + path + "'");
}

EntityId parse_id(const std::string& text, const char* what) {
  if (!EntityId::is_valid(text)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a UUID", what);
  return EntityId::parse(text);
}

void print_problems(const std::vector<Diagnostic>& diagnostics, std::ostream& out) {
  out << "Object\tMessage\n";
  for (const auto& d : diagnostics) out << d.subject_name << '\t' << d.message << '\n';
}

ApiService* g_serving = nullptr;

extern "C" void stop_serving(int) {
  if (g_serving) g_serving->stop();
}

struct Options {
  std::string store;
  std::string user;

  // shared by several subcommands
  std::string net;
  std::string name;
  std::string description;
  std::string from;
  std::string script;
  std::string format = "gnet.json";
  std::string out_path;
  std::string target_user;
  std::string level;
  std::string compiler;
  std::string trace_path;
  std::string dir;
  std::string listen = "127.0.0.1:8080";
  std::string cors = "*";
  std::string id;
  std::string to_net;
  std::string question;
  std::string text;
  std::string display_name;
  std::string age;
  std::string education;
  std::vector<std::string> bb;
  std::int64_t since = -1;
  std::int64_t until = -1;
  std::int64_t max_steps = 10000;
  std::uint64_t seed = 0;
  int score = 0;
  bool json = false;
  bool interpret = false;
  bool all_questions = false;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Design, validate, share and run Goal Net models", "goalnet"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--store", o_.store, "Store file")->envname("GOALNET_STORE");
    app.add_option("--as", o_.user, "Acting user login")->envname("GOALNET_USER");

    auto* init = app.add_subcommand("init", "Create an empty store");
    auto* list = app.add_subcommand("list", "List goal nets the user can open");

    auto* create = app.add_subcommand("new", "Create a goal net (empty, or imported with --from)");
    create->add_option("--name", o_.name, "Net name");
    create->add_option("--description", o_.description);
    create->add_option("--from", o_.from, "Import a .gnet.json document");

    auto* edit = app.add_subcommand("edit", "Apply a JSON edit script and save");
    edit->add_option("--net", o_.net)->required();
    edit->add_option("--script", o_.script, "Script file, - for stdin")->required();

    auto* val = app.add_subcommand("validate", "Check a net against the modelling rules");
    val->add_option("--net", o_.net)->required();
    val->add_flag("--json", o_.json, "Machine-readable report");

    auto* run = app.add_subcommand("run", "Launch the external compiler, or interpret");
    run->add_option("--net", o_.net)->required();
    run->add_option("--compiler", o_.compiler, "Executable; remembered for this user and net");
    run->add_flag("--interpret", o_.interpret, "Use the bundled interpreter");
    run->add_option("--seed", o_.seed);
    run->add_option("--max-steps", o_.max_steps);
    run->add_option("--bb", o_.bb, "Blackboard entry key=value")->take_all();
    run->add_option("--trace", o_.trace_path, "Write the trace here instead of stdout");

    auto* exp = app.add_subcommand("export", "Export a net as SVG or .gnet.json");
    exp->add_option("--net", o_.net)->required();
    exp->add_option("--format", o_.format)->check(CLI::IsMember({"svg", "gnet.json"}));
    exp->add_option("--out", o_.out_path);

    auto* clone = app.add_subcommand("clone", "Copy a function or task into another net");
    clone->require_subcommand(1);
    auto* clone_fn = clone->add_subcommand("function");
    auto* clone_task_cmd = clone->add_subcommand("task");
    for (auto* c : {clone_fn, clone_task_cmd}) {
      c->add_option("--id", o_.id)->required();
      c->add_option("--net", o_.net, "Source net")->required();
      c->add_option("--to", o_.to_net, "Destination net")->required();
    }

    auto* share = app.add_subcommand("share", "Grant or revoke access");
    share->require_subcommand(1);
    auto* grant = share->add_subcommand("grant");
    grant->add_option("--net", o_.net)->required();
    grant->add_option("--user", o_.target_user)->required();
    grant->add_option("--level", o_.level)->required()->check(CLI::IsMember({"read", "write", "admin"}));
    auto* revoke = share->add_subcommand("revoke");
    revoke->add_option("--net", o_.net)->required();
    revoke->add_option("--user", o_.target_user)->required();
    auto* grants = share->add_subcommand("list");
    grants->add_option("--net", o_.net)->required();

    auto* users = app.add_subcommand("users", "Manage registered users");
    users->require_subcommand(1);
    auto* users_add = users->add_subcommand("add", "Register a user and print an API token");
    users_add->add_option("--login", o_.target_user)->required();
    users_add->add_option("--name", o_.display_name);
    users_add->add_option("--age", o_.age);
    users_add->add_option("--education", o_.education);
    auto* users_token = users->add_subcommand("token", "Issue another API token");
    users_token->add_option("--login", o_.target_user)->required();
    auto* users_list = users->add_subcommand("list");

    auto* log = app.add_subcommand("log", "Action log");
    log->require_subcommand(1);
    auto* log_export = log->add_subcommand("export", "One JSON object per line");
    log_export->add_option("--user", o_.target_user);
    log_export->add_option("--net", o_.net);
    log_export->add_option("--since", o_.since, "UTC ms, inclusive");
    log_export->add_option("--until", o_.until, "UTC ms, inclusive");
    log_export->add_option("--out", o_.out_path);

    auto* fb = app.add_subcommand("feedback", "Feedback questionnaire");
    fb->require_subcommand(1);
    auto* fb_questions = fb->add_subcommand("questions");
    fb_questions->add_flag("--all", o_.all_questions, "Include inactive questions");
    auto* fb_submit = fb->add_subcommand("submit");
    fb_submit->add_option("--question", o_.question)->required();
    fb_submit->add_option("--score", o_.score)->required();
    auto* fb_add = fb->add_subcommand("add");
    fb_add->add_option("--text", o_.text)->required();
    auto* fb_deactivate = fb->add_subcommand("deactivate");
    fb_deactivate->add_option("--question", o_.question)->required();
    auto* fb_activate = fb->add_subcommand("activate");
    fb_activate->add_option("--question", o_.question)->required();
    auto* fb_summary = fb->add_subcommand("summary");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--listen", o_.listen, "host:port");
    serve->add_option("--cors", o_.cors, "Allowed origin, empty to disable");

    auto* dump = app.add_subcommand("dump", "Write every net as .gnet.json files");
    dump->add_option("--dir", o_.dir)->required();
    auto* restore = app.add_subcommand("restore", "Import .gnet.json files not yet stored");
    restore->add_option("--dir", o_.dir)->required();
    auto* merge = app.add_subcommand("merge", "Copy rows from another store file");
    merge->add_option("--from", o_.from)->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitUsage;
    }

    try {
      if (o_.store.empty()) throw Error(ErrorCode::Config, "no store given; use --store or GOALNET_STORE");
      if (*init) return cmd_init();
      Store store = Store::open(o_.store);
      if (*users_add) return cmd_users_add(store);
      if (*users_token) return print_line(store.issue_token(o_.target_user));
      if (*users_list) return cmd_users_list(store);
      if (*fb_add) return print_line(store.add_question(o_.text).str());
      if (*fb_deactivate) return set_question(store, false);
      if (*fb_activate) return set_question(store, true);
      if (*fb_questions) return cmd_questions(store);
      if (*fb_summary) return cmd_summary(store);
      if (*log_export) return cmd_log_export(store);
      if (*serve) return cmd_serve(store);
      if (*merge) return cmd_merge(store);
      if (*dump) return cmd_dump(store);

      require_user(store);
      if (*list) return cmd_list(store);
      if (*create) return cmd_new(store);
      if (*edit) return cmd_edit(store);
      if (*val) return cmd_validate(store);
      if (*run) return o_.interpret ? cmd_interpret(store) : cmd_run(store);
      if (*exp) return cmd_export(store);
      if (*clone_fn) return cmd_clone(store, false);
      if (*clone_task_cmd) return cmd_clone(store, true);
      if (*grant) return cmd_grant(store);
      if (*revoke) return cmd_revoke(store);
      if (*grants) return cmd_grants(store);
      if (*fb_submit) return cmd_submit(store);
      if (*restore) return print_line(std::to_string(store.restore(o_.dir, o_.user)));
    } catch (const Error& e) {
      err_ << "error: " << e.what();
      if (!e.field().empty()) err_ << " (at " << e.field() << ")";
      err_ << "\n";
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitStore;
    }
    err_ << "error: no command\n";
    return kExitUsage;
  }

 private:
  int print_line(const std::string& s) {
    out_ << s << "\n";
    return kExitOk;
  }

  void require_user(const Store& store) {
    if (o_.user.empty()) throw Error(ErrorCode::Config, "no acting user; use --as or GOALNET_USER");
    if (!store.find_user(o_.user)) throw Error(ErrorCode::NotFound, "user '" + o_.user + "' is not registered");
  }

  EntityId net() const { return parse_id(o_.net, "net"); }

  int cmd_init() {
    Store::open(o_.store);
    return print_line(o_.store);
  }

  int cmd_users_add(Store& store) {
    store.add_user({o_.target_user, o_.display_name.empty() ? o_.target_user : o_.display_name, o_.age,
                    o_.education});
    return print_line(store.issue_token(o_.target_user));
  }

  int cmd_users_list(const Store& store) {
    for (const auto& u : store.users()) {
      out_ << u.login << '\t' << u.display_name << '\t' << u.age_bracket << '\t' << u.education_level << '\n';
    }
    return kExitOk;
  }

  int cmd_list(const Store& store) {
    for (const auto& s : store.list_nets(o_.user)) {
      out_ << s.id.str() << '\t' << s.name << '\t' << to_string(s.level) << '\t' << s.version << '\n';
    }
    return kExitOk;
  }

  int cmd_new(Store& store) {
    if (o_.from.empty()) {
      if (o_.name.empty()) throw Error(ErrorCode::InvalidArgument, "--name or --from is required", "name");
      GoalNetDocument doc = create_net_with_owner(store, o_.name, o_.description, o_.user);
      record_action(store, {ObjectType::GoalNet, doc.id(), o_.user, ActionType::Edit, 0, doc.id()});
      return print_line(doc.id().str());
    }
    GoalNetDocument doc = import_document(read_file(o_.from));
    store.insert_net(doc, o_.user);
    record_action(store, {ObjectType::GoalNet, doc.id(), o_.user, ActionType::Edit, 0, doc.id()});
    return print_line(doc.id().str());
  }

  int cmd_edit(Store& store) {
    const EntityId id = net();
    require_access(store, o_.user, id, NetAction::Save);
    const std::string text = o_.script == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                              : read_file(o_.script);
    nlohmann::json script;
    try {
      script = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("edit script is not valid JSON: ") + e.what(), "$");
    }
    GoalNetDocument doc = store.load(id);
    EditSession session(store, doc, o_.user);
    session.open();
    const auto labels = apply_edit_script(session, script);
    store.save(doc, o_.user);
    session.close();
    for (const auto& w : session.warnings()) err_ << "warning: " << w << "\n";
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [label, eid] : labels) j[label] = eid.str();
    return print_line(canonical_json({{"labels", j}, {"version", doc.version()}}));
  }

  int cmd_validate(const Store& store) {
    const GoalNetDocument doc = open_net(store, o_.user, net());
    const ValidationReport report = validate(doc);
    if (o_.json) {
      out_ << canonical_json(report_to_json(report)) << "\n";
    } else {
      print_problems(report.diagnostics, out_);
      err_ << report.error_count << " error(s), " << report.warning_count << " warning(s)\n";
    }
    return report.error_count > 0 ? kExitValidation : kExitOk;
  }

  int cmd_run(Store& store) {
    const EntityId id = net();
    require_access(store, o_.user, id, NetAction::Open);
    if (!o_.compiler.empty()) store.set_compiler_path(o_.user, id, o_.compiler);
    RunConfig config;
    config.compiler_path = store.compiler_path(o_.user, id);
    const LaunchReport report = run_external(store, id, config);
    if (!report.launched) {
      print_problems(report.errors, out_);
      err_ << "error: resolve the " << report.errors.size() << " error(s) above before running\n";
      return kExitValidation;
    }
    err_ << "external compiler exited with status " << report.exit_status << "\n";
    return report.exit_status == 0 ? kExitOk : kExitStore;
  }

  int cmd_interpret(const Store& store) {
    const GoalNetDocument doc = open_net(store, o_.user, net());
    const auto errors = validate_for_run(doc);
    if (!errors.empty()) {
      print_problems(errors, out_);
      err_ << "error: resolve the " << errors.size() << " error(s) above before running\n";
      return kExitValidation;
    }
    RunConfig config;
    config.seed = o_.seed;
    config.max_steps = o_.max_steps;
    for (const auto& entry : o_.bb) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--bb expects key=value", "bb");
      config.blackboard.set(entry.substr(0, eq), parse_blackboard_value(entry.substr(eq + 1)));
    }
    const RunTrace trace = interpret(doc, FunctionRegistry{}, config);
    write_output(o_.trace_path, trace_to_jsonl(trace), out_);
    err_ << "finished: " << to_string(trace.finish) << " after " << trace.steps << " step(s)\n";
    return kExitOk;
  }

  int cmd_export(const Store& store) {
    const EntityId id = net();
    require_access(store, o_.user, id, NetAction::Export);
    const GoalNetDocument doc = store.load(id);
    write_output(o_.out_path, o_.format == "svg" ? export_svg(doc) : export_document(doc), out_);
    return kExitOk;
  }

  int cmd_clone(Store& store, bool task) {
    const EntityId src = net();
    const EntityId dst = parse_id(o_.to_net, "to");
    const EntityId entity = parse_id(o_.id, "id");
    const CloneResult result = task ? clone_task(store, o_.user, entity, src, dst)
                                    : clone_function(store, o_.user, entity, src, dst);
    const GoalNetDocument doc = store.load(dst);
    for (const auto& [old_id, new_id] : result.id_map) {
      const auto kind = doc.kind_of(new_id).value_or(EntityKind::Function);
      const ObjectType type =
          kind == EntityKind::Association ? object_type_of(doc.association(new_id).kind) : object_type_of(kind);
      record_action(store, {type, new_id, o_.user, ActionType::Create, 0, dst});
      out_ << old_id.str() << '\t' << new_id.str() << '\n';
    }
    return kExitOk;
  }

  int cmd_grant(Store& store) {
    grant_access(store, o_.user, o_.target_user, net(), *access_level_from(o_.level));
    return kExitOk;
  }

  int cmd_revoke(Store& store) {
    revoke_access(store, o_.user, o_.target_user, net());
    return kExitOk;
  }

  int cmd_grants(const Store& store) {
    const EntityId id = net();
    require_access(store, o_.user, id, NetAction::Open);
    for (const auto& g : store.grants(id)) out_ << g.user_id << '\t' << to_string(g.level) << '\n';
    return kExitOk;
  }

  int cmd_log_export(const Store& store) {
    ActionFilter filter;
    if (!o_.target_user.empty()) filter.user = o_.target_user;
    if (!o_.net.empty()) filter.gnet = net();
    if (o_.since >= 0) filter.since = o_.since;
    if (o_.until >= 0) filter.until = o_.until;
    write_output(o_.out_path, export_log_jsonl(store, filter), out_);
    return kExitOk;
  }

  int cmd_questions(const Store& store) {
    for (const auto& q : store.questions(!o_.all_questions)) {
      out_ << q.id.str() << '\t' << (q.active ? "active" : "inactive") << '\t' << q.text << '\n';
    }
    return kExitOk;
  }

  int set_question(Store& store, bool active) {
    store.set_question_active(parse_id(o_.question, "question"), active);
    return kExitOk;
  }

  int cmd_submit(Store& store) {
    submit_feedback(store, o_.user, parse_id(o_.question, "question"), o_.score);
    return kExitOk;
  }

  int cmd_summary(const Store& store) {
    char mean[32];
    for (const auto& s : mean_scores(store)) {
      std::snprintf(mean, sizeof mean, "%.2f", s.mean);
      out_ << s.question_id.str() << '\t' << s.responses << '\t' << mean << '\t' << s.text << '\n';
    }
    return kExitOk;
  }

  int cmd_serve(Store& store) {
    const auto [host, port] = parse_listen_address(o_.listen);
    ApiService service(store, ApiOptions{o_.cors});
    g_serving = &service;
    std::signal(SIGINT, stop_serving);
    std::signal(SIGTERM, stop_serving);
    service.serve(host, port, [&](int bound) {
      err_ << "listening on " << host << ":" << bound << "\n";
      err_.flush();
    });
    g_serving = nullptr;
    return kExitOk;
  }

  int cmd_dump(const Store& store) {
    for (const auto& path : store.dump(o_.dir)) out_ << path << '\n';
    return kExitOk;
  }

  int cmd_merge(Store& store) {
    const MergeReport r = store.merge_from(o_.from);
    out_ << "nets added: " << r.nets_added << "\nusers added: " << r.users_added << "\n";
    for (const auto& login : r.user_conflicts) err_ << "warning: user '" << login << "' differs between stores\n";
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Cli(out, err).run(args);
}

}  // namespace goalnet
