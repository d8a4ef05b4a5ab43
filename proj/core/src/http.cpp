#include "proxysense/http.hpp"

#include <mutex>

#include <httplib.h>

#include "proxysense/records.hpp"

namespace proxysense {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

Json assignment_json(const TaskAssignment& a) {
  return {{"assignment_id", a.assignment_id},
          {"task_id", a.task_id},
          {"kind", to_string(a.kind)},
          {"worker_id", a.worker_id},
          {"issued_at", a.issued_at},
          {"payload", a.payload}};
}

}  // namespace

struct HttpServer::Impl {
  Service& service;
  HttpOptions options;
  httplib::Server server;
  std::mutex mutex;

  Impl(Service& s, HttpOptions o) : service(s), options(std::move(o)) {
    if (!options.authenticate) {
      options.authenticate = [this](const std::string& token) -> std::optional<std::string> {
        try {
          return service.authenticate(token);
        } catch (const proxysense::AuthError&) {
          return std::nullopt;
        }
      };
    }
    routes();
  }

  bool is_admin(const httplib::Request& req) const {
    return !options.admin_token.empty() && req.get_header_value(kAdminTokenHeader) == options.admin_token;
  }

  std::optional<std::string> worker(const httplib::Request& req) const {
    if (!req.has_header(kWorkerTokenHeader)) return std::nullopt;
    return options.authenticate(req.get_header_value(kWorkerTokenHeader));
  }

  void routes() {
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex);
      send_json(res, 200, Json{{"status", "ok"}, {"events", service.log().size()}});
    });

    server.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex);
      const auto who = worker(req);
      if (!who) return send_error(res, 401, "missing or invalid worker token");
      const std::string requested = req.get_param_value("worker");
      if (!requested.empty() && requested != *who) return send_error(res, 403, "token does not belong to " + requested);
      TaskKind kind;
      try {
        kind = parse_task_kind(req.get_param_value("kind"));
      } catch (const proxysense::Error& e) {
        return send_error(res, 400, e.what());
      }
      const auto assignment = service.assign_next_task(*who, kind);
      if (!assignment) return send_json(res, 200, Json{{"status", "no_work"}});
      Json body = assignment_json(*assignment);
      body["status"] = "assigned";
      send_json(res, 200, body);
    });

    server.Post(R"(/tasks/([^/]+)/response)", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex);
      const auto who = worker(req);
      if (!who) return send_error(res, 401, "missing or invalid worker token");
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        return send_error(res, 400, std::string("malformed body: ") + e.what());
      }
      const std::string task_id = req.matches[1];
      if (!service.task(task_id)) return send_error(res, 404, "unknown task " + task_id);
      const auto result = service.submit_response(task_id, *who, body);
      Json out{{"accepted", result.accepted}, {"completed_task", result.completed_task}};
      if (!result.accepted) out["reason"] = result.reason;
      const int status = result.accepted ? 200 : result.reason.starts_with("stale") ? 409 : 422;
      send_json(res, status, out);
    });

    server.Get(R"(/instances/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex);
      if (!is_admin(req) && !worker(req)) return send_error(res, 401, "missing or invalid token");
      const auto* inst = service.find_instance(req.matches[1].str());
      if (!inst) return send_error(res, 404, "unknown instance " + req.matches[1].str());
      send_json(res, 200, instance_public_json(*inst));
    });

    server.Post("/admin/batches", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex);
      if (!is_admin(req)) return send_error(res, 401, "missing or invalid admin token");
      try {
        const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
        const auto kind = parse_task_kind(body.value("kind", "neighbor"));
        std::vector<std::string> created;
        switch (kind) {
          case TaskKind::neighbor:
            created = service.create_neighbor_tasks(body.value("targets", std::vector<std::string>{}));
            break;
          case TaskKind::selection:
            created = service.create_selection_tasks(
                body.value("lemmas", std::vector<std::string>{}),
                body.value("options", std::map<std::string, std::vector<std::string>>{}));
            break;
          case TaskKind::generation:
            created = service.create_generation_tasks(body.value("lemmas", std::vector<std::string>{}));
            break;
        }
        send_json(res, 200, Json{{"kind", to_string(kind)}, {"task_ids", created}});
      } catch (const Json::exception& e) {
        send_error(res, 400, std::string("malformed body: ") + e.what());
      } catch (const proxysense::Error& e) {
        send_error(res, 422, e.what());
      }
    });

    server.Get(R"(/reports/([a-z-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex);
      if (!is_admin(req)) return send_error(res, 401, "missing or invalid admin token");
      const std::string name = req.matches[1];
      std::string text;
      if (name == "radar") text = format_radar(service.radar(options.radar_min_count));
      else if (name == "strategy-tally") text = format_strategy_tally(service.strategy_tally(), service.strategy_descriptions());
      else if (name == "cases") text = format_cases(service.cases());
      else if (name == "progress") text = format_progress(service.progress());
      else return send_error(res, 404, "unknown report " + name);
      res.status = 200;
      res.set_content(text, "text/tab-separated-values");
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const proxysense::AuthError& e) {
        send_error(res, 401, e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    });
  }
};

HttpServer::HttpServer(Service& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace proxysense
