#include "finevq/service/server.hpp"

#include <sstream>

#include "httplib.h"

namespace finevq::service {

namespace {

using nlohmann::json;

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler Guard(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFound& e) {
      SendJson(res, 404, {{"error", e.what()}});
    } catch (const InvalidSubmission& e) {
      SendJson(res, 422, {{"error", e.what()}, {"fields", e.fields()}});
    } catch (const json::exception& e) {
      SendJson(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const Error& e) {
      SendJson(res, e.kind() == ErrorKind::kValidation ? 422 : 500,
               {{"error", e.what()}});
    } catch (const std::exception& e) {
      SendJson(res, 500, {{"error", e.what()}});
    }
  };
}

std::string SubjectParam(const httplib::Request& req) {
  if (!req.has_param("subject_id")) throw NotFound("missing subject_id");
  return req.get_param_value("subject_id");
}

}  // namespace

StudyServer::StudyServer(StudyService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Get("/api/session", Guard([this](const httplib::Request& req, httplib::Response& res) {
          SendJson(res, 200, service_.Session(SubjectParam(req)));
        }));
  s.Get("/api/tasks/next",
        Guard([this](const httplib::Request& req, httplib::Response& res) {
          SendJson(res, 200, service_.NextTask(SubjectParam(req)));
        }));
  s.Post("/api/ratings", Guard([this](const httplib::Request& req, httplib::Response& res) {
           SendJson(res, 200, service_.Submit(json::parse(req.body)));
         }));
  s.Get("/api/progress", Guard([this](const httplib::Request&, httplib::Response& res) {
          SendJson(res, 200, service_.Progress());
        }));
  s.Get("/api/export/ratings",
        Guard([this](const httplib::Request&, httplib::Response& res) {
          std::ostringstream out;
          WriteExportedRatings(service_.Records(), out);
          res.set_content(out.str(), "text/tab-separated-values");
        }));
  s.Get("/api/export/selections",
        Guard([this](const httplib::Request&, httplib::Response& res) {
          std::ostringstream out;
          const auto sel = ExportSelections(service_.Records());
          subjective::WriteSelections(sel, out);
          res.set_content(out.str(), "text/tab-separated-values");
        }));
  const auto& root = service_.config().media_root;
  if (!root.empty()) s.set_mount_point("/media", root.string());
}

StudyServer::~StudyServer() { Stop(); }

bool StudyServer::Listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

int StudyServer::BindToAnyPort(const std::string& host) {
  return server_->bind_to_any_port(host);
}

void StudyServer::ListenAfterBind() { server_->listen_after_bind(); }

void StudyServer::Stop() {
  if (server_->is_running()) server_->stop();
}

bool StudyServer::running() const { return server_->is_running(); }

}  // namespace finevq::service
