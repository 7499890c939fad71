#pragma once

// Session protocol over local HTTP: POST /session with one JSON request per
// body, one JSON response back. GET /health answers "ok".

#include <httplib.h>

#include "silbot/session.hpp"

namespace silbot {

inline void mount_session_routes(httplib::Server& server, SessionManager& sessions) {
  server.Post("/session", [&sessions](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"ok", false}, {"error", "bad_json"}, {"message", e.what()},
                           {"version", kSessionVersion}}
                          .dump(),
                      "application/json");
      return;
    }
    const json resp = sessions.handle(body);
    res.status = 200;
    res.set_content(resp.dump(), "application/json");
  });
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
}

}  // namespace silbot
