#include <gtest/gtest.h>

#include <thread>

#include "silbot/http_service.hpp"
#include "silbot/session.hpp"

using namespace silbot;

namespace {

const char* kTriangle = "0 0\n1 0\n0 1\n";
const char* kConverging = "0 0 E\n0 1 SE\n";

json request(std::string type, json fields = json::object()) {
  fields["version"] = kSessionVersion;
  fields["type"] = std::move(type);
  return fields;
}

class SessionTest : public ::testing::Test {
 protected:
  json call(std::string type, json fields = json::object()) {
    if (!id_.empty() && !fields.contains("session")) fields["session"] = id_;
    json resp = manager_.handle(request(std::move(type), std::move(fields)));
    EXPECT_EQ(resp.at("version"), kSessionVersion);
    return resp;
  }

  json open(const char* instance, bool lenient = false) {
    id_.clear();
    json resp = call("new", {{"instance", instance}, {"lenient", lenient}});
    EXPECT_TRUE(resp.at("ok").get<bool>()) << resp.dump();
    id_ = resp.at("session").get<std::string>();
    return resp;
  }

  SessionManager manager_;
  std::string id_;
};

}  // namespace

TEST_F(SessionTest, NewReportsConfigurationAndPredicates) {
  const json resp = open(kTriangle);
  const json& state = resp.at("state");
  EXPECT_EQ(state.at("config"), "0,0 0,1 1,0");
  EXPECT_EQ(state.at("n"), 3);
  const json& p = state.at("particles");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].at("predicates"),
            (json{{"upper", true}, {"lower", false}, {"pointed", false}, {"near", false}}));
  EXPECT_EQ(p[1].at("predicates").at("lower"), true);
  EXPECT_EQ(p[1].at("decision"), "expand_SE");
  EXPECT_EQ(p[1].at("enabled"), true);
  EXPECT_EQ(p[0].at("decision"), "noop");
  EXPECT_EQ(state.at("metrics").at("move_budget"), 12);
  EXPECT_EQ(state.at("checks").at("bbox").at("status"), "pass");
  EXPECT_EQ(call("enabled").at("enabled"), (json{1}));
}

TEST_F(SessionTest, StepsUndoAndExport) {
  open(kTriangle);
  json s1 = call("step", {{"ids", {1}}});
  ASSERT_TRUE(s1.at("applied").get<bool>());
  EXPECT_EQ(s1.at("record").at("config"), "0,0 0,1,SE 1,0");
  EXPECT_EQ(s1.at("state").at("semi_occupied"), json::array());  // (1,0) is occupied

  json s2 = call("step", {{"ids", {0, 1, 2}}});
  EXPECT_EQ(s2.at("record").at("config"), "0,0 0,1,SE 1,0,E");
  EXPECT_EQ(s2.at("state").at("semi_occupied"), (json{{2, 0}}));

  json undone = call("undo");
  EXPECT_EQ(undone.at("state").at("config"), "0,0 0,1,SE 1,0");

  json rest = call("auto", {{"scheduler", "sync"}, {"rounds", 10}});
  EXPECT_EQ(rest.at("records").size(), 3u);
  EXPECT_EQ(rest.at("state").at("metrics").at("final"), true);
  EXPECT_EQ(rest.at("state").at("metrics").at("moves"), 2);

  const Trace t = read_trace(call("export").at("trace").get<std::string>());
  EXPECT_EQ(t.records.size(), 4u);
  EXPECT_TRUE(t.summary.terminated());
  EXPECT_TRUE(replay(t).ok);
  EXPECT_TRUE(check_all(t).passed());
}

TEST_F(SessionTest, ContractionIntoAnEmptyTarget) {
  open("0 0\n0 1\n");
  call("step", {{"ids", {1}}});
  const json resp = call("step", {{"ids", {1}}});
  EXPECT_EQ(resp.at("record").at("moves").size(), 1u);
  EXPECT_EQ(resp.at("state").at("metrics").at("moves"), 1);
  EXPECT_EQ(resp.at("state").at("config"), "0,0 1,0");
}

TEST_F(SessionTest, ConflictsAreAskedFor) {
  open(kConverging, true);
  const json ask = call("step", {{"ids", {0, 1}}});
  EXPECT_EQ(ask.at("ok"), true);
  EXPECT_EQ(ask.at("applied"), false);
  ASSERT_EQ(ask.at("conflicts").size(), 1u);
  EXPECT_EQ(ask.at("conflicts")[0].at("site"), (json{1, 0}));
  EXPECT_EQ(ask.at("conflicts")[0].at("group"), (json{0, 1}));

  const json wrong = call("step", {{"ids", {0, 1}}, {"tie_breaks", {{{"site", {1, 0}}, {"chosen", 4}}}}});
  EXPECT_EQ(wrong.at("ok"), false);
  EXPECT_EQ(wrong.at("error"), "bad_tie_break");

  const json done = call("step", {{"ids", {0, 1}}, {"tie_breaks", {{{"site", {1, 0}}, {"chosen", 1}}}}});
  ASSERT_EQ(done.at("applied"), true);
  EXPECT_EQ(done.at("record").at("tie_breaks")[0].at("chosen"), 1);
  EXPECT_EQ(done.at("state").at("config"), "0,0,E 1,0");

  const Trace t = read_trace(call("export").at("trace").get<std::string>());
  EXPECT_TRUE(replay(t).ok);
  EXPECT_EQ(t.records[0].tie_breaks[0].chosen, 1u);
}

TEST_F(SessionTest, Query) {
  open(kTriangle);
  const json q = call("query", {{"nodes", {{0, 1}, {5, 5}}}});
  ASSERT_EQ(q.at("nodes").size(), 2u);
  EXPECT_EQ(q.at("nodes")[0].at("decision"), "expand_SE");
  EXPECT_EQ(q.at("nodes")[1].at("occupied"), false);
  EXPECT_FALSE(q.at("nodes")[1].contains("decision"));
}

TEST_F(SessionTest, ExportWithoutStepsIsHeaderAndSummary) {
  open(kTriangle);
  const std::string text = call("export").at("trace").get<std::string>();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_TRUE(replay(read_trace(text)).ok);
}

TEST_F(SessionTest, Errors) {
  EXPECT_EQ(manager_.handle(json{{"type", "state"}}).at("error"), "bad_request");
  EXPECT_EQ(manager_.handle(json{{"type", "state"}, {"version", 99}}).at("error"), "bad_version");
  EXPECT_EQ(manager_.handle(json::array()).at("ok"), false);
  EXPECT_EQ(call("state", {{"session", "nope"}}).at("error"), "unknown_session");
  EXPECT_EQ(call("new", {{"instance", "0 0\n0 0\n"}}).at("ok"), false);
  EXPECT_EQ(call("new", {{"instance", kConverging}}).at("ok"), false);  // not initial
  open(kTriangle);
  EXPECT_EQ(call("undo").at("error"), "nothing_to_undo");
  EXPECT_EQ(call("fly").at("error"), "unknown_request");
  EXPECT_EQ(call("step", {{"ids", json::array()}}).at("error"), "bad_request");
  EXPECT_EQ(call("step", {{"ids", {9}}}).at("error"), "bad_request");
  EXPECT_EQ(call("auto", {{"scheduler", "external"}}).at("ok"), false);
}

TEST(SessionStdio, LinesDefaultToTheLatestSession) {
  SessionManager m;
  const json created = json::parse(m.handle_line(R"({"version":1,"type":"new","instance":"0 0\n0 1\n"})"));
  ASSERT_EQ(created.at("ok"), true);
  const json step = json::parse(m.handle_line(R"({"version":1,"type":"step","ids":[1]})"));
  EXPECT_EQ(step.at("session"), created.at("session"));
  EXPECT_EQ(step.at("record").at("config"), "0,0 0,1,SE");
  const json bad = json::parse(m.handle_line("{oops"));
  EXPECT_EQ(bad.at("error"), "bad_json");
  EXPECT_EQ(bad.at("version"), kSessionVersion);
}

TEST(SessionHttp, RoundTripOverLoopback) {
  httplib::Server server;
  SessionManager sessions;
  mount_session_routes(server, sessions);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->body, "ok");

  auto post = [&](const json& body) {
    auto res = client.Post("/session", body.dump(), "application/json");
    EXPECT_TRUE(res);
    return res ? json::parse(res->body) : json();
  };
  const json created = post(request("new", {{"instance", kTriangle}}));
  ASSERT_EQ(created.at("ok"), true);
  const std::string id = created.at("session");
  const json stepped = post(request("step", {{"session", id}, {"ids", {0, 1, 2}}}));
  EXPECT_EQ(stepped.at("record").at("config"), "0,0 0,1,SE 1,0");
  const json undone = post(request("undo", {{"session", id}}));
  EXPECT_EQ(undone.at("state").at("config"), "0,0 0,1 1,0");

  auto garbage = client.Post("/session", "not json", "application/json");
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);

  server.stop();
  worker.join();
}
