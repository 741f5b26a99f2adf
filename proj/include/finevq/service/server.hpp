#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "finevq/service/study.hpp"

namespace httplib {
class Server;
}

namespace finevq::service {

// HTTP front end:
//   GET  /api/session?subject_id=ID
//   GET  /api/tasks/next?subject_id=ID
//   POST /api/ratings              (JSON SubmittedRating)
//   GET  /api/progress
//   GET  /api/export/ratings       (TSV)
//   GET  /media/...                (files under media_root)
// Errors come back as {"error": msg} (404 unknown subject, 422 validation,
// 400 malformed JSON, 500 otherwise).
class StudyServer {
 public:
  explicit StudyServer(StudyService& service);
  ~StudyServer();

  // Binds and serves until Stop(); port 0 picks a free port.
  bool Listen(const std::string& host, int port);
  int BindToAnyPort(const std::string& host);
  void ListenAfterBind();
  void Stop();
  bool running() const;

 private:
  StudyService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace finevq::service
