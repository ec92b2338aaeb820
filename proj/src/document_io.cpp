#include "goalnet/document_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "goalnet/error.hpp"

namespace goalnet {

using nlohmann::json;

namespace {

json opt_id(const std::optional<EntityId>& id) { return id ? json(id->str()) : json(nullptr); }

json point_json(Point p) { return json{{"x", p.x}, {"y", p.y}}; }

json ref_json(const EntityRef& r) {
  return json{{"kind", std::string(to_string(r.kind))}, {"id", r.id.str()}};
}

// ---- strict readers ----

[[noreturn]] void bad(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::InvalidArgument, path + ": " + message, path);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) bad(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(path + "." + key, "missing field");
  return *it;
}

std::string read_string(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) bad(path + "." + key, "expected a string");
  return v.get<std::string>();
}

EntityId read_id(const json& obj, const char* key, const std::string& path) {
  const std::string text = read_string(obj, key, path);
  if (!EntityId::is_valid(text)) bad(path + "." + key, "not a lowercase UUID: '" + text + "'");
  return EntityId::parse(text);
}

std::optional<EntityId> read_opt_id(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (v.is_null()) return std::nullopt;
  return read_id(obj, key, path);
}

double read_number(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(path + "." + key, "expected a finite number");
  return d;
}

std::int64_t read_int(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) bad(path + "." + key, "expected an integer");
  return v.get<std::int64_t>();
}

Point read_point(const json& obj, const std::string& path) {
  const json& p = field(obj, "position", path);
  const std::string pp = path + ".position";
  return {read_number(p, "x", pp), read_number(p, "y", pp)};
}

EntityRef read_ref(const json& obj, const char* key, const std::string& path) {
  const json& r = field(obj, key, path);
  const std::string rp = path + "." + key;
  const std::string kind_text = read_string(r, "kind", rp);
  const auto kind = entity_kind_from(kind_text);
  if (!kind) bad(rp + ".kind", "unknown entity kind '" + kind_text + "'");
  return {*kind, read_id(r, "id", rp)};
}

const json& section(const json& root, const char* key) {
  const json& v = field(root, key, "$");
  if (!v.is_array()) bad(std::string(key), "expected an array");
  return v;
}

}  // namespace

std::string canonical_json(const json& j) { return j.dump(); }

json document_to_json(const GoalNetDocument& doc) {
  const NetHeader& h = doc.header();
  json root;
  root["meta"] = {{"format", std::string(kDocumentFormat)}};
  root["net"] = {{"id", h.id.str()},
                 {"name", h.name},
                 {"description", h.description},
                 {"root_state_id", opt_id(h.root_state_id)},
                 {"start_state_id", opt_id(h.start_state_id)},
                 {"end_state_id", opt_id(h.end_state_id)},
                 {"created_by", h.created_by},
                 {"version", h.version}};

  json states = json::array();
  for (const auto& [id, s] : doc.states()) {
    states.push_back({{"id", id.str()},
                      {"name", s.name},
                      {"description", s.description},
                      {"kind", std::string(to_string(s.kind))},
                      {"achievement_value", s.achievement_value},
                      {"cost", s.cost},
                      {"parent_id", opt_id(s.parent_id)},
                      {"child_start_id", opt_id(s.child_start_id)},
                      {"child_end_id", opt_id(s.child_end_id)},
                      {"position", point_json(s.position)}});
  }
  json transitions = json::array();
  for (const auto& [id, t] : doc.transitions()) {
    transitions.push_back({{"id", id.str()},
                           {"name", t.name},
                           {"description", t.description},
                           {"kind", std::string(to_string(t.kind))},
                           {"parent_id", opt_id(t.parent_id)},
                           {"position", point_json(t.position)}});
  }
  json arcs = json::array();
  for (const auto& [id, a] : doc.arcs()) {
    arcs.push_back({{"id", id.str()},
                    {"name", a.name},
                    {"description", a.description},
                    {"source", ref_json(a.source)},
                    {"target", ref_json(a.target)},
                    {"guard", a.guard ? json(*a.guard) : json(nullptr)},
                    {"weight", a.weight},
                    {"priority", a.priority}});
  }
  json functions = json::array();
  for (const auto& [id, f] : doc.functions()) {
    functions.push_back({{"id", id.str()},
                         {"name", f.name},
                         {"description", f.description},
                         {"binding_key", f.binding_key}});
  }
  json tasks = json::array();
  for (const auto& [id, t] : doc.tasks()) {
    tasks.push_back({{"id", id.str()}, {"name", t.name}, {"description", t.description}});
  }
  json associations = json::array();
  for (const auto& [id, as] : doc.associations()) {
    associations.push_back({{"id", id.str()},
                            {"kind", std::string(to_string(as.kind))},
                            {"owner_id", as.owner_id.str()},
                            {"member_id", as.member_id.str()},
                            {"order_index", as.order_index}});
  }
  root["states"] = std::move(states);
  root["transitions"] = std::move(transitions);
  root["arcs"] = std::move(arcs);
  root["functions"] = std::move(functions);
  root["tasks"] = std::move(tasks);
  root["associations"] = std::move(associations);
  return root;
}

std::string export_document(const GoalNetDocument& doc) {
  return document_to_json(doc).dump(2) + "\n";
}

GoalNetDocument document_from_json(const json& root) {
  if (!root.is_object()) bad("$", "expected an object");
  const json& meta = field(root, "meta", "$");
  const std::string format = read_string(meta, "format", "meta");
  if (format != kDocumentFormat) {
    throw Error(ErrorCode::InvalidArgument, "unsupported document format '" + format + "'", "meta.format");
  }

  const json& net = field(root, "net", "$");
  NetHeader h;
  h.id = read_id(net, "id", "net");
  h.name = read_string(net, "name", "net");
  h.description = read_string(net, "description", "net");
  h.root_state_id = read_opt_id(net, "root_state_id", "net");
  h.start_state_id = read_opt_id(net, "start_state_id", "net");
  h.end_state_id = read_opt_id(net, "end_state_id", "net");
  h.created_by = read_string(net, "created_by", "net");
  h.version = read_int(net, "version", "net");

  std::vector<State> states;
  const json& js = section(root, "states");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string p = "states[" + std::to_string(i) + "]";
    State s;
    s.id = read_id(js[i], "id", p);
    s.name = read_string(js[i], "name", p);
    s.description = read_string(js[i], "description", p);
    const std::string kind = read_string(js[i], "kind", p);
    const auto k = state_kind_from(kind);
    if (!k) bad(p + ".kind", "unknown state kind '" + kind + "'");
    s.kind = *k;
    s.achievement_value = read_number(js[i], "achievement_value", p);
    s.cost = read_number(js[i], "cost", p);
    s.parent_id = read_opt_id(js[i], "parent_id", p);
    s.child_start_id = read_opt_id(js[i], "child_start_id", p);
    s.child_end_id = read_opt_id(js[i], "child_end_id", p);
    s.position = read_point(js[i], p);
    states.push_back(std::move(s));
  }

  std::vector<Transition> transitions;
  const json& jt = section(root, "transitions");
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const std::string p = "transitions[" + std::to_string(i) + "]";
    Transition t;
    t.id = read_id(jt[i], "id", p);
    t.name = read_string(jt[i], "name", p);
    t.description = read_string(jt[i], "description", p);
    const std::string kind = read_string(jt[i], "kind", p);
    const auto k = transition_kind_from(kind);
    if (!k) bad(p + ".kind", "unknown transition kind '" + kind + "'");
    t.kind = *k;
    t.parent_id = read_opt_id(jt[i], "parent_id", p);
    t.position = read_point(jt[i], p);
    transitions.push_back(std::move(t));
  }

  std::vector<Arc> arcs;
  const json& ja = section(root, "arcs");
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string p = "arcs[" + std::to_string(i) + "]";
    Arc a;
    a.id = read_id(ja[i], "id", p);
    a.name = read_string(ja[i], "name", p);
    a.description = read_string(ja[i], "description", p);
    a.source = read_ref(ja[i], "source", p);
    a.target = read_ref(ja[i], "target", p);
    const json& g = field(ja[i], "guard", p);
    if (!g.is_null() && !g.is_string()) bad(p + ".guard", "expected a string or null");
    if (g.is_string()) a.guard = g.get<std::string>();
    a.weight = read_number(ja[i], "weight", p);
    a.priority = read_int(ja[i], "priority", p);
    arcs.push_back(std::move(a));
  }

  std::vector<FunctionDef> functions;
  const json& jf = section(root, "functions");
  for (std::size_t i = 0; i < jf.size(); ++i) {
    const std::string p = "functions[" + std::to_string(i) + "]";
    FunctionDef f;
    f.id = read_id(jf[i], "id", p);
    f.name = read_string(jf[i], "name", p);
    f.description = read_string(jf[i], "description", p);
    f.binding_key = read_string(jf[i], "binding_key", p);
    functions.push_back(std::move(f));
  }

  std::vector<TaskDef> tasks;
  const json& jk = section(root, "tasks");
  for (std::size_t i = 0; i < jk.size(); ++i) {
    const std::string p = "tasks[" + std::to_string(i) + "]";
    TaskDef t;
    t.id = read_id(jk[i], "id", p);
    t.name = read_string(jk[i], "name", p);
    t.description = read_string(jk[i], "description", p);
    tasks.push_back(std::move(t));
  }

  std::vector<Association> associations;
  const json& jas = section(root, "associations");
  for (std::size_t i = 0; i < jas.size(); ++i) {
    const std::string p = "associations[" + std::to_string(i) + "]";
    Association as;
    as.id = read_id(jas[i], "id", p);
    const std::string kind = read_string(jas[i], "kind", p);
    const auto k = association_kind_from(kind);
    if (!k) bad(p + ".kind", "unknown association kind '" + kind + "'");
    as.kind = *k;
    as.owner_id = read_id(jas[i], "owner_id", p);
    as.member_id = read_id(jas[i], "member_id", p);
    as.order_index = read_int(jas[i], "order_index", p);
    associations.push_back(std::move(as));
  }

  return GoalNetDocument::assemble(std::move(h), std::move(states), std::move(transitions),
                                   std::move(arcs), std::move(functions), std::move(tasks),
                                   std::move(associations));
}

GoalNetDocument import_document(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("malformed document: ") + e.what(), "$");
  }
  return document_from_json(root);
}

// ---- validation report -------------------------------------------------------

json diagnostic_to_json(const Diagnostic& d) {
  return json{{"severity", std::string(to_string(d.severity))},
              {"rule", std::string(to_string(d.rule))},
              {"message", d.message},
              {"subject_kind", std::string(to_string(d.subject.kind))},
              {"subject_id", d.subject.id.str()},
              {"subject_name", d.subject_name}};
}

json report_to_json(const ValidationReport& report) {
  json list = json::array();
  for (const auto& d : report.diagnostics) list.push_back(diagnostic_to_json(d));
  return json{{"diagnostics", std::move(list)},
              {"error_count", report.error_count},
              {"warning_count", report.warning_count}};
}

// ---- SVG -----------------------------------------------------------------------

namespace {

constexpr double kAtomicRadius = 20.0;
constexpr double kCompositeRadius = 30.0;
constexpr double kCompositeInner = 25.0;
constexpr double kTransitionHalfWidth = 30.0;
constexpr double kTransitionHalfHeight = 12.0;
constexpr double kMargin = 40.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Node {
  Point center;
  bool is_transition = false;
  double radius = kAtomicRadius;
};

// Distance from the node center to its outline along direction (dx, dy).
double clip(const Node& n, double dx, double dy) {
  const double len = std::hypot(dx, dy);
  if (len == 0.0) return 0.0;
  if (!n.is_transition) return n.radius;
  const double tx = dx == 0.0 ? std::numeric_limits<double>::infinity() : kTransitionHalfWidth / std::abs(dx);
  const double ty = dy == 0.0 ? std::numeric_limits<double>::infinity() : kTransitionHalfHeight / std::abs(dy);
  return std::min(tx, ty) * len;
}

}  // namespace

std::string export_svg(const GoalNetDocument& doc) {
  std::map<EntityId, Node> nodes;
  for (const auto& [id, s] : doc.states()) {
    nodes[id] = {s.position, false, s.kind == StateKind::Composite ? kCompositeRadius : kAtomicRadius};
  }
  for (const auto& [id, t] : doc.transitions()) nodes[id] = {t.position, true, 0.0};

  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  bool first = true;
  for (const auto& [id, n] : nodes) {
    const double hw = n.is_transition ? kTransitionHalfWidth : n.radius;
    const double hh = n.is_transition ? kTransitionHalfHeight : n.radius;
    if (first) {
      min_x = n.center.x - hw, max_x = n.center.x + hw;
      min_y = n.center.y - hh, max_y = n.center.y + hh;
      first = false;
    } else {
      min_x = std::min(min_x, n.center.x - hw), max_x = std::max(max_x, n.center.x + hw);
      min_y = std::min(min_y, n.center.y - hh), max_y = std::max(max_y, n.center.y + hh);
    }
  }
  const double vx = min_x - kMargin, vy = min_y - kMargin;
  const double width = max_x - min_x + 2 * kMargin, height = max_y - min_y + 2 * kMargin;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"" + num(vx) + " " + num(vy) + " " + num(width) +
         " " + num(height) + "\">\n";
  out += "<title>" + xml_escape(doc.name()) + "</title>\n";
  if (!doc.arcs().empty()) {
    out += "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
           "markerHeight=\"8\" orient=\"auto\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#333\"/></marker></defs>\n";
  }

  for (const auto& [id, a] : doc.arcs()) {
    const Node& s = nodes.at(a.source.id);
    const Node& t = nodes.at(a.target.id);
    const double dx = t.center.x - s.center.x, dy = t.center.y - s.center.y;
    const double len = std::hypot(dx, dy);
    double x1 = s.center.x, y1 = s.center.y, x2 = t.center.x, y2 = t.center.y;
    if (len > 0.0) {
      const double cs = clip(s, dx, dy) / len, ct = clip(t, dx, dy) / len;
      x1 += dx * cs, y1 += dy * cs;
      x2 -= dx * ct, y2 -= dy * ct;
    }
    out += "<g class=\"gn-arc\" data-id=\"" + id.str() + "\"><line x1=\"" + num(x1) + "\" y1=\"" + num(y1) +
           "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"#333\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>";
    if (a.guard) {
      out += "<text x=\"" + num((x1 + x2) / 2) + "\" y=\"" + num((y1 + y2) / 2 - 4) +
             "\" font-size=\"10\" text-anchor=\"middle\">[" + xml_escape(*a.guard) + "]</text>";
    }
    out += "</g>\n";
  }

  for (const auto& [id, t] : doc.transitions()) {
    out += "<g class=\"gn-transition gn-" + std::string(to_string(t.kind)) + "\" data-id=\"" + id.str() +
           "\"><rect x=\"" + num(t.position.x - kTransitionHalfWidth) + "\" y=\"" +
           num(t.position.y - kTransitionHalfHeight) + "\" width=\"" + num(2 * kTransitionHalfWidth) +
           "\" height=\"" + num(2 * kTransitionHalfHeight) +
           "\" fill=\"#ffffff\" stroke=\"#333\" stroke-width=\"1.5\"/><text x=\"" + num(t.position.x) +
           "\" y=\"" + num(t.position.y + 4) + "\" font-size=\"10\" text-anchor=\"middle\">" +
           xml_escape(t.name) + "</text></g>\n";
  }

  for (const auto& [id, s] : doc.states()) {
    const bool composite = s.kind == StateKind::Composite;
    const double r = composite ? kCompositeRadius : kAtomicRadius;
    out += "<g class=\"gn-state gn-" + std::string(to_string(s.kind)) + "\" data-id=\"" + id.str() +
           "\"><circle cx=\"" + num(s.position.x) + "\" cy=\"" + num(s.position.y) + "\" r=\"" + num(r) +
           "\" fill=\"#7ccf7c\" stroke=\"#2f6f2f\" stroke-width=\"1.5\"/>";
    if (composite) {
      out += "<circle cx=\"" + num(s.position.x) + "\" cy=\"" + num(s.position.y) + "\" r=\"" +
             num(kCompositeInner) + "\" fill=\"none\" stroke=\"#2f6f2f\" stroke-width=\"1.5\"/>";
    }
    out += "<text x=\"" + num(s.position.x) + "\" y=\"" + num(s.position.y + r + 12) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + xml_escape(s.name) + "</text></g>\n";
  }

  for (const auto& [id, s] : doc.states()) {
    for (const auto& [boundary, cls] : {std::pair{&s.child_start_id, "start"}, std::pair{&s.child_end_id, "end"}}) {
      if (!*boundary) continue;
      const Point to = doc.state(**boundary).position;
      out += "<line class=\"gn-boundary gn-boundary-" + std::string(cls) + "\" x1=\"" + num(s.position.x) +
             "\" y1=\"" + num(s.position.y) + "\" x2=\"" + num(to.x) + "\" y2=\"" + num(to.y) +
             "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace goalnet
