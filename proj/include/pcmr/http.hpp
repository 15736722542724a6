#pragma once

// Binds Service to cpp-httplib routes.

// Eigen first: httplib pulls in <resolv.h>, whose _res macro clashes with
// Eigen parameter names.
#include "pcmr/service.hpp"

#include <httplib.h>

#include <string>

namespace pcmr {

inline void mount(httplib::Server& server, const Service& service) {
  const std::string origin = service.config().allow_origin;

  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };

  // SO_REUSEADDR without SO_REUSEPORT, so binding a port in use fails
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
  server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server.Get("/api/v1/health", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.health());
  });
  server.Post("/api/v1/evaluate", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.evaluate(req.body));
  });
  server.Post("/api/v1/reduce", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.reduce(req.body));
  });
  server.Post("/api/v1/whatif", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.whatif(req.body));
  });
}

}  // namespace pcmr
