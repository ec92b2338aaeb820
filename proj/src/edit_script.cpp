#include "goalnet/edit_script.hpp"

#include "goalnet/error.hpp"

namespace goalnet {

using nlohmann::json;

namespace {

class StepReader {
 public:
  StepReader(const json& step, const std::map<std::string, EntityId>& labels) : step_(step), labels_(labels) {}

  bool has(const char* key) const { return step_.contains(key) && !step_[key].is_null(); }

  std::string text(const char* key) const {
    if (!has(key) || !step_[key].is_string()) fail(key, "must be a string");
    return step_[key].get<std::string>();
  }
  std::optional<std::string> opt_text(const char* key) const {
    if (!has(key)) return std::nullopt;
    return text(key);
  }
  std::string text_or(const char* key, std::string fallback) const { return has(key) ? text(key) : fallback; }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!step_[key].is_number()) fail(key, "must be a number");
    return step_[key].get<double>();
  }
  std::optional<double> opt_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }
  bool flag(const char* key) const {
    if (!has(key)) return false;
    if (!step_[key].is_boolean()) fail(key, "must be true or false");
    return step_[key].get<bool>();
  }

  EntityId ref(const char* key) const { return resolve(text(key), key); }
  std::optional<EntityId> opt_ref(const char* key) const {
    if (!has(key)) return std::nullopt;
    return ref(key);
  }
  std::set<EntityId> refs(const char* key) const {
    if (!has(key) || !step_[key].is_array()) fail(key, "must be an array of references");
    std::set<EntityId> out;
    for (const auto& item : step_[key]) {
      if (!item.is_string()) fail(key, "must be an array of references");
      out.insert(resolve(item.get<std::string>(), key));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error(ErrorCode::InvalidArgument, "'" + key + "' " + what, key);
  }

 private:
  EntityId resolve(const std::string& text, const char* key) const {
    if (!text.empty() && text.front() == '@') {
      auto it = labels_.find(text.substr(1));
      if (it == labels_.end()) fail(key, "refers to unknown label " + text);
      return it->second;
    }
    if (!EntityId::is_valid(text)) fail(key, "is neither a UUID nor an @label");
    return EntityId::parse(text);
  }

  const json& step_;
  const std::map<std::string, EntityId>& labels_;
};

template <typename Parse>
auto parse_enum(const StepReader& r, const char* key, const std::string& fallback, Parse parse) {
  const std::string name = r.text_or(key, fallback);
  auto value = parse(name);
  if (!value) r.fail(key, "has unknown value '" + name + "'");
  return *value;
}

std::optional<EntityId> apply_step(EditSession& s, const StepReader& r, const std::string& op) {
  GoalNetDocument& doc = s.document();
  if (op == "set_net_info") {
    s.set_net_info(r.opt_text("name"), r.opt_text("description"));
  } else if (op == "add_state") {
    return s.add_state(r.opt_ref("parent"), r.text("name"), parse_enum(r, "kind", "atomic", state_kind_from),
                       {r.number("x", 0.0), r.number("y", 0.0)});
  } else if (op == "add_transition") {
    return s.add_transition(r.opt_ref("parent"), r.text("name"),
                            parse_enum(r, "kind", "direct", transition_kind_from),
                            {r.number("x", 0.0), r.number("y", 0.0)});
  } else if (op == "add_arc") {
    const EntityId source = r.ref("source");
    const EntityId target = r.ref("target");
    const auto sk = doc.kind_of(source);
    const auto tk = doc.kind_of(target);
    if (!sk) r.fail("source", "does not exist");
    if (!tk) r.fail("target", "does not exist");
    return s.add_arc({*sk, source}, {*tk, target});
  } else if (op == "convert_state_kind") {
    s.convert_state_kind(r.ref("state"), parse_enum(r, "kind", "", state_kind_from), r.flag("cascade"));
  } else if (op == "set_net_properties") {
    s.set_net_properties(r.opt_ref("root"), r.opt_ref("start"), r.opt_ref("end"));
  } else if (op == "set_composite_boundaries") {
    s.set_composite_boundaries(r.ref("state"), r.opt_ref("start"), r.opt_ref("end"));
  } else if (op == "remove") {
    s.remove_entities(r.refs("ids"));
  } else if (op == "move") {
    s.move_entities(r.refs("ids"), {r.number("dx", 0.0), r.number("dy", 0.0)});
  } else if (op == "add_function") {
    return s.add_function(r.text("name"), r.text_or("description", ""), r.text_or("binding_key", ""));
  } else if (op == "add_task") {
    return s.add_task(r.text("name"), r.text_or("description", ""));
  } else if (op == "associate") {
    return s.associate(parse_enum(r, "kind", "", association_kind_from), r.ref("owner"), r.ref("member"));
  } else if (op == "dissociate") {
    s.dissociate(r.ref("association"));
  } else if (op == "update_state") {
    StateUpdate u;
    u.name = r.opt_text("name");
    u.description = r.opt_text("description");
    u.achievement_value = r.opt_number("achievement_value");
    u.cost = r.opt_number("cost");
    s.update_state(r.ref("state"), u);
  } else if (op == "update_transition") {
    TransitionUpdate u;
    u.name = r.opt_text("name");
    u.description = r.opt_text("description");
    if (r.has("kind")) u.kind = parse_enum(r, "kind", "", transition_kind_from);
    s.update_transition(r.ref("transition"), u);
  } else if (op == "update_arc") {
    ArcUpdate u;
    u.name = r.opt_text("name");
    u.description = r.opt_text("description");
    u.weight = r.opt_number("weight");
    if (auto p = r.opt_number("priority")) u.priority = static_cast<std::int64_t>(*p);
    if (r.has("guard")) u.guard = std::optional<std::string>(r.text("guard"));
    if (r.flag("clear_guard")) u.guard = std::optional<std::string>();
    s.update_arc(r.ref("arc"), u);
  } else if (op == "update_function") {
    DefinitionUpdate u;
    u.name = r.opt_text("name");
    u.description = r.opt_text("description");
    u.binding_key = r.opt_text("binding_key");
    s.update_function(r.ref("function"), u);
  } else if (op == "update_task") {
    DefinitionUpdate u;
    u.name = r.opt_text("name");
    u.description = r.opt_text("description");
    s.update_task(r.ref("task"), u);
  } else {
    r.fail("op", "names an unknown operation '" + op + "'");
  }
  return std::nullopt;
}

}  // namespace

std::map<std::string, EntityId> apply_edit_script(EditSession& session, const json& script) {
  if (!script.is_array()) throw Error(ErrorCode::InvalidArgument, "edit script must be a JSON array", "$");
  std::map<std::string, EntityId> labels;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const json& step = script[i];
    const std::string prefix = "[" + std::to_string(i) + "]";
    try {
      if (!step.is_object()) throw Error(ErrorCode::InvalidArgument, "step must be an object");
      StepReader reader(step, labels);
      const std::string op = reader.text("op");
      const std::optional<std::string> label = reader.opt_text("label");
      if (label && labels.count(*label)) reader.fail("label", "'" + *label + "' is already used");
      const auto created = apply_step(session, reader, op);
      if (label) {
        if (!created) reader.fail("label", "is only meaningful on operations that create an entity");
        labels.emplace(*label, *created);
      }
    } catch (const Error& e) {
      const std::string field = e.field().empty() ? prefix : prefix + "." + e.field();
      throw Error(e.code(), "step " + std::to_string(i) + ": " + e.what(), field);
    }
  }
  return labels;
}

}  // namespace goalnet
