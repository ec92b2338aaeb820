#include "goalnet/api.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <iostream>

#include "goalnet/collaboration.hpp"
#include "goalnet/document_io.hpp"
#include "goalnet/error.hpp"
#include "goalnet/runner.hpp"
#include "goalnet/telemetry.hpp"
#include "goalnet/validation.hpp"

namespace goalnet {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return 422;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::AccessDenied: return 403;
    case ErrorCode::Config:
    case ErrorCode::Parse: return 400;
    case ErrorCode::Runtime:
    case ErrorCode::Storage: return 500;
  }
  return 500;
}

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = canonical_json(body);
  return r;
}

ApiResponse error_response(int status, std::string_view code, const std::string& message,
                           const std::string& field = {}) {
  json err = {{"code", code}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  return json_response(status, {{"error", err}});
}

ApiResponse error_response(const Error& e) {
  return error_response(status_for(e.code()), to_string(e.code()), e.what(), e.field());
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned char>(x ^ y);
  }
  return diff == 0;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) parts.push_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("request body is not valid JSON: ") + e.what(), "$");
  }
}

std::string required_string(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a string", key);
  }
  return j[key].get<std::string>();
}

EntityId required_id(const json& j, const char* key) {
  const std::string text = required_string(j, key);
  if (!EntityId::is_valid(text)) throw Error(ErrorCode::InvalidArgument, "'" + text + "' is not a UUID", key);
  return EntityId::parse(text);
}

json summary_json(const NetSummary& s) {
  return {{"id", s.id.str()},
          {"name", s.name},
          {"description", s.description},
          {"version", s.version},
          {"level", to_string(s.level)}};
}

json grants_json(const std::vector<AccessGrant>& grants) {
  json out = json::array();
  for (const auto& g : grants) out.push_back({{"user", g.user_id}, {"level", to_string(g.level)}});
  return out;
}

std::optional<std::int64_t> parse_if_match(const std::map<std::string, std::string>& headers) {
  auto it = headers.find("if-match");
  if (it == headers.end()) return std::nullopt;
  std::string_view v = it->second;
  if (v.rfind("W/", 0) == 0) v.remove_prefix(2);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::Parse, "If-Match must carry a goal net version", "If-Match");
  }
  return out;
}

std::string etag(std::int64_t version) { return "\"" + std::to_string(version) + "\""; }

}  // namespace

struct ApiService::Listener {
  httplib::Server server;
};

ApiService::ApiService(Store& store, ApiOptions options) : store_(store), options_(std::move(options)) {}

ApiService::~ApiService() = default;

std::optional<Session> ApiService::authenticate(std::string_view token) const {
  if (token.empty()) return std::nullopt;
  std::optional<Session> found;
  for (const auto& [candidate, user] : store_.tokens()) {
    if (constant_time_equal(candidate, token) && !found) found = Session{candidate, user};
  }
  return found;
}

void ApiService::apply_cors(ApiResponse& r) const {
  if (options_.cors_origin.empty()) return;
  r.headers["Access-Control-Allow-Origin"] = options_.cors_origin;
  r.headers["Access-Control-Allow-Headers"] = "Authorization, Content-Type, If-Match";
  r.headers["Access-Control-Allow-Methods"] = "GET, POST, PUT, OPTIONS";
  r.headers["Access-Control-Expose-Headers"] = "ETag";
}

ApiResponse ApiService::handle(const ApiRequest& request) {
  ApiResponse response;
  if (request.method == "OPTIONS") {
    response.status = 204;
    response.content_type.clear();
  } else {
    std::string token;
    if (auto it = request.headers.find("authorization"); it != request.headers.end()) {
      constexpr std::string_view kBearer = "Bearer ";
      if (it->second.rfind(kBearer, 0) == 0) token = it->second.substr(kBearer.size());
    }
    const auto session = authenticate(token);
    if (!session) {
      response = error_response(401, "unauthenticated", "a valid bearer token is required");
    } else {
      try {
        response = dispatch(request, *session);
      } catch (const Error& e) {
        response = error_response(e);
      } catch (const json::exception& e) {
        response = error_response(422, to_string(ErrorCode::InvalidArgument), e.what());
      } catch (const std::exception& e) {
        response = error_response(500, "internal_error", e.what());
      }
    }
  }
  apply_cors(response);
  return response;
}

ApiResponse ApiService::dispatch(const ApiRequest& req, const Session& session) {
  const UserId& user = session.user;
  const auto parts = split_path(req.path);
  const std::string& m = req.method;

  auto log_action = [&](ObjectType type, const EntityId& id, ActionType action, const EntityId& gnet) {
    try {
      record_action(store_, {type, id, user, action, 0, gnet});
    } catch (const Error& e) {
      std::cerr << "warning: action log: " << e.what() << "\n";
    }
  };
  auto net_id_at = [&](std::size_t index) {
    if (!EntityId::is_valid(parts[index])) {
      throw Error(ErrorCode::NotFound, "goal net " + parts[index] + " does not exist");
    }
    return EntityId::parse(parts[index]);
  };

  if (parts.size() == 1 && parts[0] == "goalnets") {
    if (m == "GET") {
      json list = json::array();
      for (const auto& s : store_.list_nets(user)) list.push_back(summary_json(s));
      return json_response(200, list);
    }
    if (m == "POST") {
      const json body = parse_body(req.body);
      const std::string name = required_string(body, "name");
      const std::string description = body.value("description", std::string());
      GoalNetDocument doc = create_net_with_owner(store_, name, description, user);
      log_action(ObjectType::GoalNet, doc.id(), ActionType::Edit, doc.id());
      ApiResponse r = json_response(201, document_to_json(doc));
      r.headers["ETag"] = etag(doc.version());
      return r;
    }
  }

  if (parts.size() >= 2 && parts[0] == "goalnets") {
    const EntityId id = net_id_at(1);
    if (parts.size() == 2 && m == "GET") {
      GoalNetDocument doc = open_net(store_, user, id);
      log_action(ObjectType::GoalNet, id, ActionType::Open, id);
      ApiResponse r = json_response(200, document_to_json(doc));
      r.headers["ETag"] = etag(doc.version());
      return r;
    }
    if (parts.size() == 2 && m == "PUT") {
      require_access(store_, user, id, NetAction::Save);
      GoalNetDocument doc = document_from_json(parse_body(req.body));
      if (doc.id() != id) throw Error(ErrorCode::InvalidArgument, "document id does not match the URL", "net.id");
      if (auto expected = parse_if_match(req.headers)) {
        const std::int64_t stored = store_.load(id).version();
        if (*expected != stored) {
          throw Error(ErrorCode::Conflict, "If-Match version " + std::to_string(*expected) +
                                               " does not match stored version " + std::to_string(stored));
        }
        doc.set_version(*expected);
      }
      const std::int64_t version = store_.save(doc, user);
      log_action(ObjectType::GoalNet, id, ActionType::Edit, id);
      ApiResponse r = json_response(200, {{"id", id.str()}, {"version", version}});
      r.headers["ETag"] = etag(version);
      return r;
    }
    if (parts.size() == 3 && parts[2] == "validate" && m == "POST") {
      GoalNetDocument doc = open_net(store_, user, id);
      return json_response(200, report_to_json(validate(doc)));
    }
    if (parts.size() == 3 && parts[2] == "run" && m == "POST") {
      require_access(store_, user, id, NetAction::Open);
      const json body = parse_body(req.body);
      const std::string mode = body.value("mode", std::string("external"));
      RunConfig config;
      if (body.contains("seed")) config.seed = body["seed"].get<std::uint64_t>();
      if (body.contains("max_steps")) config.max_steps = body["max_steps"].get<std::int64_t>();
      if (body.contains("blackboard")) config.blackboard = blackboard_from_json(body["blackboard"]);
      if (mode == "interpret") {
        GoalNetDocument doc = store_.load(id);
        const auto errors = validate_for_run(doc);
        if (!errors.empty()) {
          json list = json::array();
          for (const auto& d : errors) list.push_back(diagnostic_to_json(d));
          return json_response(422, {{"error", {{"code", "validation_errors"},
                                                {"message", "resolve the validation errors before running"}}},
                                     {"errors", list}});
        }
        RunTrace trace = interpret(doc, FunctionRegistry{}, config);
        return json_response(200, {{"finish", to_string(trace.finish)},
                                   {"steps", trace.steps},
                                   {"blackboard", blackboard_to_json(trace.blackboard)},
                                   {"trace", trace_to_jsonl(trace)}});
      }
      if (mode != "external") throw Error(ErrorCode::InvalidArgument, "mode must be external or interpret", "mode");
      if (body.contains("compiler_path")) {
        store_.set_compiler_path(user, id, required_string(body, "compiler_path"));
      }
      config.compiler_path = store_.compiler_path(user, id);
      return json_response(200, launch_report_to_json(run_external(store_, id, config)));
    }
    if (parts.size() == 3 && parts[2] == "access") {
      if (m == "GET") {
        require_access(store_, user, id, NetAction::Open);
        return json_response(200, grants_json(store_.grants(id)));
      }
      if (m == "POST") {
        require_access(store_, user, id, NetAction::Grant);
        const json body = parse_body(req.body);
        const std::string action = body.value("action", std::string("grant"));
        const UserId target = required_string(body, "user");
        if (action == "grant") {
          const auto level = access_level_from(required_string(body, "level"));
          if (!level) throw Error(ErrorCode::InvalidArgument, "level must be read, write or admin", "level");
          grant_access(store_, user, target, id, *level);
        } else if (action == "revoke") {
          revoke_access(store_, user, target, id);
        } else {
          throw Error(ErrorCode::InvalidArgument, "action must be grant or revoke", "action");
        }
        log_action(ObjectType::GoalNet, id, ActionType::Edit, id);
        return json_response(200, grants_json(store_.grants(id)));
      }
    }
    if (parts.size() == 3 && m == "GET" && (parts[2] == "export.svg" || parts[2] == "export.gnet.json")) {
      require_access(store_, user, id, NetAction::Export);
      const GoalNetDocument doc = store_.load(id);
      ApiResponse r;
      if (parts[2] == "export.svg") {
        r.content_type = "image/svg+xml";
        r.body = export_svg(doc);
      } else {
        r.body = export_document(doc);
      }
      return r;
    }
  }

  if (parts.size() == 1 && parts[0] == "clone" && m == "POST") {
    const json body = parse_body(req.body);
    const std::string kind = required_string(body, "kind");
    const EntityId source = required_id(body, "source");
    const EntityId destination = required_id(body, "destination");
    const EntityId entity = required_id(body, "id");
    CloneResult result;
    if (kind == "function") result = clone_function(store_, user, entity, source, destination);
    else if (kind == "task") result = clone_task(store_, user, entity, source, destination);
    else throw Error(ErrorCode::InvalidArgument, "kind must be function or task", "kind");

    const GoalNetDocument dst = store_.load(destination);
    json mapping = json::object();
    for (const auto& [old_id, new_id] : result.id_map) {
      mapping[old_id.str()] = new_id.str();
      const auto k = dst.kind_of(new_id);
      const ObjectType type = k == EntityKind::Association ? object_type_of(dst.association(new_id).kind)
                                                           : object_type_of(k.value_or(EntityKind::Function));
      log_action(type, new_id, ActionType::Create, destination);
    }
    return json_response(201, {{"id", result.root.str()}, {"mapping", mapping}, {"version", result.destination_version}});
  }

  if (parts.size() == 1 && parts[0] == "actions" && m == "POST") {
    const json body = parse_body(req.body);
    const auto object = object_type_from(required_string(body, "object_type"));
    if (!object) throw Error(ErrorCode::InvalidArgument, "unknown object type", "object_type");
    const auto action = action_type_from(required_string(body, "action_type"));
    if (!action) throw Error(ErrorCode::InvalidArgument, "unknown action type", "action_type");
    ActionLogEntry entry{*object, required_id(body, "object_id"), user, *action, 0, std::nullopt};
    if (body.contains("gnet_id") && !body["gnet_id"].is_null()) {
      entry.gnet_id = required_id(body, "gnet_id");
      require_access(store_, user, *entry.gnet_id, NetAction::Open);
    }
    record_action(store_, entry);
    return json_response(201, {{"recorded", true}});
  }

  if (parts.size() == 1 && parts[0] == "questions" && m == "GET") {
    json list = json::array();
    for (const auto& q : list_active_questions(store_)) list.push_back({{"id", q.id.str()}, {"text", q.text}});
    return json_response(200, list);
  }

  if (parts.size() == 1 && parts[0] == "feedback" && m == "POST") {
    const json body = parse_body(req.body);
    if (!body.contains("score") || !body["score"].is_number_integer()) {
      throw Error(ErrorCode::InvalidArgument, "'score' must be an integer", "score");
    }
    submit_feedback(store_, user, required_id(body, "question_id"), body["score"].get<int>());
    return json_response(201, {{"recorded", true}});
  }

  return error_response(404, "no_route", "no route for " + m + " " + req.path);
}

void ApiService::serve(const std::string& host, int port, std::function<void(int)> on_ready) {
  listener_ = std::make_unique<Listener>();
  auto& server = listener_->server;
  auto bridge = [this](const httplib::Request& in, httplib::Response& out) {
    ApiRequest req;
    req.method = in.method;
    req.path = in.path;
    req.body = in.body;
    for (const auto& [key, value] : in.headers) {
      std::string lower = key;
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
      req.headers[lower] = value;
    }
    ApiResponse res = handle(req);
    out.status = res.status;
    for (const auto& [key, value] : res.headers) out.set_header(key, value);
    if (!res.content_type.empty()) out.set_content(res.body, res.content_type);
  };
  server.Get(".*", bridge);
  server.Post(".*", bridge);
  server.Put(".*", bridge);
  server.Delete(".*", bridge);
  server.Options(".*", bridge);

  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::Config, "cannot listen on " + host + ":" + std::to_string(port));
  if (on_ready) on_ready(bound);
  server.listen_after_bind();
}

void ApiService::stop() {
  if (listener_) listener_->server.stop();
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(ErrorCode::Config, "listen address must look like host:port", "listen");
  }
  int port = -1;
  const std::string_view digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::Config, "invalid port in listen address", "listen");
  }
  return {std::string(text.substr(0, colon)), port};
}

}  // namespace goalnet
