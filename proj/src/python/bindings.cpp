#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "goalnet/document_io.hpp"
#include "goalnet/guard.hpp"
#include "goalnet/runner.hpp"
#include "goalnet/validation.hpp"

namespace py = pybind11;
using namespace goalnet;

namespace {

// nlohmann -> python via the json module; keeps number/str/bool types exact
py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::handle& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

EntityId id_of(const std::string& text) { return EntityId::parse(text); }

std::optional<EntityId> opt_id(const std::optional<std::string>& text) {
  if (!text) return std::nullopt;
  return EntityId::parse(*text);
}

EntityRef ref_of(const GoalNetDocument& doc, const std::string& text) {
  const auto id = id_of(text);
  const auto kind = doc.kind_of(id);
  if (!kind) throw Error(ErrorCode::NotFound, "no entity with id " + text);
  return {*kind, id};
}

template <typename Enum>
Enum enum_of(std::optional<Enum> (*from)(std::string_view), const std::string& name, const char* what) {
  auto v = from(name);
  if (!v) throw Error(ErrorCode::InvalidArgument, std::string("unknown ") + what + " '" + name + "'");
  return *v;
}

Blackboard blackboard_of(const py::object& obj) {
  if (obj.is_none()) return {};
  return blackboard_from_json(from_python(obj));
}

py::object trace_to_python(const RunTrace& trace) {
  nlohmann::json events = nlohmann::json::array();
  std::istringstream in(trace_to_jsonl(trace));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) events.push_back(nlohmann::json::parse(line));
  nlohmann::json out = {
      {"seed", trace.seed},
      {"steps", trace.steps},
      {"finish", std::string(to_string(trace.finish))},
      {"events", events},
      {"blackboard", blackboard_to_json(trace.blackboard)},
  };
  return to_python(out);
}

}  // namespace

PYBIND11_MODULE(_goalnet, m) {
  m.doc() = "Goal Net modelling core";

  static py::exception<Error> error_type(m, "GoalNetError");
  static py::exception<GuardSyntaxError> guard_error_type(m, "GuardSyntaxError", error_type.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const GuardSyntaxError& e) {
      py::object exc = py::handle(guard_error_type.ptr())(e.what());
      exc.attr("code") = to_string(e.code());
      exc.attr("field") = e.field();
      exc.attr("column") = e.column();
      PyErr_SetObject(guard_error_type.ptr(), exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = to_string(e.code());
      exc.attr("field") = e.field();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<GoalNetDocument>(m, "Document")
      .def_static("create", &GoalNetDocument::create, py::arg("name"), py::arg("description") = "",
                  py::arg("creator") = "local")
      .def_static("from_json", [](const std::string& text) { return import_document(text); })
      .def("to_json", &export_document)
      .def("to_svg", &export_svg)
      .def("to_dict", [](const GoalNetDocument& d) { return to_python(document_to_json(d)); })
      .def_property_readonly("id", [](const GoalNetDocument& d) { return d.id().str(); })
      .def_property_readonly("name", [](const GoalNetDocument& d) { return d.header().name; })
      .def_property_readonly("version", [](const GoalNetDocument& d) { return d.header().version; })
      .def("kind_of",
           [](const GoalNetDocument& d, const std::string& id) -> std::optional<std::string> {
             auto k = d.kind_of(id_of(id));
             if (!k) return std::nullopt;
             return std::string(to_string(*k));
           })
      .def("set_info",
           [](GoalNetDocument& d, std::optional<std::string> name, std::optional<std::string> description) {
             d.set_net_info(std::move(name), std::move(description));
           },
           py::arg("name") = py::none(), py::arg("description") = py::none())
      .def("add_state",
           [](GoalNetDocument& d, std::string name, const std::string& kind, std::optional<std::string> parent,
              double x, double y) {
             return d.add_state(opt_id(parent), std::move(name), enum_of(state_kind_from, kind, "state kind"), {x, y})
                 .str();
           },
           py::arg("name"), py::arg("kind") = "atomic", py::arg("parent") = py::none(), py::arg("x") = 0.0,
           py::arg("y") = 0.0)
      .def("add_transition",
           [](GoalNetDocument& d, std::string name, const std::string& kind, std::optional<std::string> parent,
              double x, double y) {
             return d
                 .add_transition(opt_id(parent), std::move(name),
                                 enum_of(transition_kind_from, kind, "transition kind"), {x, y})
                 .str();
           },
           py::arg("name"), py::arg("kind") = "direct", py::arg("parent") = py::none(), py::arg("x") = 0.0,
           py::arg("y") = 0.0)
      .def("add_arc",
           [](GoalNetDocument& d, const std::string& source, const std::string& target) {
             return d.add_arc(ref_of(d, source), ref_of(d, target)).str();
           })
      .def("update_arc",
           [](GoalNetDocument& d, const std::string& arc, py::object guard, std::optional<double> weight,
              std::optional<std::int64_t> priority) {
             ArcUpdate u;
             // "" clears the guard, None leaves it alone
             if (!guard.is_none()) {
               auto text = guard.cast<std::string>();
               u.guard = text.empty() ? std::optional<std::string>() : std::optional<std::string>(text);
             }
             u.weight = weight;
             u.priority = priority;
             d.update_arc(id_of(arc), u);
           },
           py::arg("arc"), py::arg("guard") = py::none(), py::arg("weight") = py::none(),
           py::arg("priority") = py::none())
      .def("set_net_properties",
           [](GoalNetDocument& d, std::optional<std::string> root, std::optional<std::string> start,
              std::optional<std::string> end) { d.set_net_properties(opt_id(root), opt_id(start), opt_id(end)); },
           py::arg("root") = py::none(), py::arg("start") = py::none(), py::arg("end") = py::none())
      .def("set_composite_boundaries",
           [](GoalNetDocument& d, const std::string& composite, std::optional<std::string> start,
              std::optional<std::string> end) {
             d.set_composite_boundaries(id_of(composite), opt_id(start), opt_id(end));
           },
           py::arg("composite"), py::arg("start") = py::none(), py::arg("end") = py::none())
      .def("add_function",
           [](GoalNetDocument& d, std::string name, std::string description, std::string key) {
             return d.add_function(std::move(name), std::move(description), std::move(key)).str();
           },
           py::arg("name"), py::arg("description") = "", py::arg("binding_key") = "")
      .def("add_task",
           [](GoalNetDocument& d, std::string name, std::string description) {
             return d.add_task(std::move(name), std::move(description)).str();
           },
           py::arg("name"), py::arg("description") = "")
      .def("associate",
           [](GoalNetDocument& d, const std::string& kind, const std::string& owner, const std::string& member) {
             return d.associate(enum_of(association_kind_from, kind, "association kind"), id_of(owner), id_of(member))
                 .str();
           })
      .def("remove",
           [](GoalNetDocument& d, const std::vector<std::string>& ids) {
             std::set<EntityId> set;
             for (const auto& s : ids) set.insert(id_of(s));
             return d.remove_entities(set).total();
           })
      .def("validate", [](const GoalNetDocument& d) { return to_python(report_to_json(validate(d))); })
      .def("__eq__", [](const GoalNetDocument& a, const GoalNetDocument& b) { return a == b; });

  m.def("normalize_guard", [](const std::string& text) { return format_guard(parse_guard(text)); },
        "Parse a guard and return its canonical text.");
  m.def("eval_guard",
        [](const std::string& text, py::object blackboard) {
          return eval_guard(parse_guard(text), blackboard_of(blackboard));
        },
        py::arg("text"), py::arg("blackboard") = py::none());

  m.def("interpret",
        [](const GoalNetDocument& doc, std::uint64_t seed, std::int64_t max_steps, py::object blackboard,
           std::map<std::string, py::function> handlers) {
          RunConfig config;
          config.seed = seed;
          config.max_steps = max_steps;
          config.blackboard = blackboard_of(blackboard);
          FunctionRegistry registry;
          for (auto& [key, fn] : handlers) {
            // handler gets the blackboard as a dict and may return updates
            registry.bind(key, [fn](Blackboard& bb) {
              py::object updates = fn(to_python(blackboard_to_json(bb)));
              if (updates.is_none()) return;
              const auto changed = blackboard_from_json(from_python(updates));
              for (const auto& [name, value] : changed.entries()) bb.set(name, value);
            });
          }
          return trace_to_python(interpret(doc, registry, config));
        },
        py::arg("doc"), py::arg("seed") = 0, py::arg("max_steps") = 10000, py::arg("blackboard") = py::none(),
        py::arg("handlers") = std::map<std::string, py::function>{});
}
