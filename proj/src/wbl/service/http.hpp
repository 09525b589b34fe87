#pragma once

#include <memory>
#include <string>

#include "wbl/error.hpp"
#include "wbl/service/service.hpp"

namespace wbl::service {

// HTTP status for an error code.
int http_status(Errc code) noexcept;
// {code, message, detail}
nlohmann::json error_body(const Error& e);

// JSON API over a StudyService. GET /export requires the admin token in an
// "Authorization: Bearer <token>" header; with no token configured export is
// refused.
class HttpServer {
 public:
  HttpServer(StudyService& service, std::string admin_token);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wbl::service
