#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "jointvip/report.hpp"
#include "jointvip/service.hpp"
#include "json.hpp"
#include "process.hpp"
#include "random_study.hpp"

using namespace jointvip;

namespace {

const std::string kData = JVIP_TEST_DATA;
const std::string kRoles =
    R"({"treatment":"treat","outcome":"log_re78","covariates":["age","educ","black","hisp","marr","nodegree","log_re74","log_re75"]})";

// A service on an ephemeral loopback port for the lifetime of the object.
class LiveService {
public:
  explicit LiveService(ServiceConfig cfg = {}) : service_(std::move(cfg)) {
    port_ = service_.bind("127.0.0.1", 0);
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { service_.run(); });
    service_.wait_until_ready();
  }
  ~LiveService() {
    service_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }
  Service& service() { return service_; }

private:
  Service service_;
  int port_ = -1;
  std::thread thread_;
};

httplib::MultipartFormDataItems upload(const std::string& pilot, const std::string& analysis,
                                       const std::string& roles) {
  return {{"pilot", pilot, "pilot.csv", "text/csv"},
          {"analysis", analysis, "analysis.csv", "text/csv"},
          {"roles", roles, "", "application/json"}};
}

std::string create_session(httplib::Client& c) {
  const auto res = c.Post("/api/sessions",
                          upload(fixture::slurp(kData + "/lalonde_like_pilot.csv"),
                                 fixture::slurp(kData + "/lalonde_like_analysis.csv"), kRoles));
  REQUIRE(res);
  REQUIRE(res->status == 200);
  return nlohmann::json::parse(res->body).at("session_id").get<std::string>();
}

}  // namespace

TEST_CASE("health and CORS") {
  LiveService live;
  auto c = live.client();
  const auto res = c.Get("/api/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == R"({"status":"ok"})");
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");

  const auto pre = c.Options("/api/sessions");
  REQUIRE(pre);
  CHECK(pre->status == 204);
}

TEST_CASE("session lifecycle on the fixture") {
  LiveService live;
  auto c = live.client();
  const auto created = c.Post("/api/sessions",
                              upload(fixture::slurp(kData + "/lalonde_like_pilot.csv"),
                                     fixture::slurp(kData + "/lalonde_like_analysis.csv"), kRoles));
  REQUIRE(created);
  REQUIRE(created->status == 200);
  const auto body = nlohmann::json::parse(created->body);
  const std::string id = body.at("session_id");
  CHECK(id.size() == 32);
  CHECK(body.at("model").at("covariates").size() == 8);

  const auto measures = c.Get("/api/sessions/" + id + "/measures?bias_tol=0.01");
  REQUIRE(measures);
  REQUIRE(measures->status == 200);
  const auto m = nlohmann::json::parse(measures->body);
  CHECK(m.at("summary").at("n_above_tol") == 2);
  CHECK(m.at("summary").at("n_plottable") == 8);
  CHECK(m.at("table")[0].at("name") == "log_re75");
  CHECK(m.at("table")[1].at("name") == "log_re74");

  // Model JSON is byte-identical to the library serialization.
  const auto study = load_manifest(kData + "/lalonde_like.json");
  const std::string expected = model_json(create_jointvip(study.study), SmdFlavor::pure);
  const auto pure = c.Get("/api/sessions/" + id + "/measures?smd=pure");
  REQUIRE(pure);
  CHECK(pure->body.rfind("{\"model\":" + expected + ",\"summary\":", 0) == 0);

  const auto svg = c.Get("/api/sessions/" + id + "/plot.svg?title=Fixture");
  REQUIRE(svg);
  CHECK(svg->status == 200);
  CHECK(svg->get_header_value("Content-Type") == "image/svg+xml");
  CHECK(svg->body.find("<title>Fixture</title>") != std::string::npos);

  httplib::MultipartFormDataItems post_items{
      {"post", fixture::slurp(kData + "/lalonde_like_post.csv"), "post.csv", "text/csv"}};
  const auto post = c.Post("/api/sessions/" + id + "/post", post_items);
  REQUIRE(post);
  REQUIRE(post->status == 200);
  const auto pj = nlohmann::json::parse(post->body);
  CHECK(pj.at("session_id") == id);
  CHECK(pj.at("model").at("post_covariates").size() == 8);
  CHECK(pj.at("model").at("n_post_control") == 185);

  const auto after = c.Get("/api/sessions/" + id + "/measures?smd=pure&post_bias_tol=0.005");
  REQUIRE(after);
  const auto aj = nlohmann::json::parse(after->body);
  CHECK(aj.at("summary").at("post_bias_tol") == 0.005);
  CHECK(aj.at("summary").at("lines").size() == 6);
  CHECK(aj.at("table")[0].contains("post_bias"));

  const auto trails = c.Get("/api/sessions/" + id + "/plot.svg?trails=true");
  REQUIRE(trails);
  CHECK(trails->body.find("class=\"point-post\"") != std::string::npos);
  CHECK(trails->body.find("class=\"trail\"") != std::string::npos);
}

TEST_CASE("error responses") {
  ServiceConfig cfg;
  cfg.max_payload_bytes = 4096;
  LiveService live(cfg);
  auto c = live.client();

  const auto missing = c.Get("/api/sessions/0123456789abcdef0123456789abcdef/measures");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(nlohmann::json::parse(missing->body).at("code") == "SessionNotFound");

  const auto treated_pilot =
      c.Post("/api/sessions", upload("treat,y,x\n1,1,0\n0,2,1\n0,3,2\n", "treat,y,x\n1,1,1\n0,1,2\n",
                                     R"({"treatment":"treat","outcome":"y","covariates":["x"]})"));
  REQUIRE(treated_pilot);
  CHECK(treated_pilot->status == 400);
  const auto ej = nlohmann::json::parse(treated_pilot->body);
  CHECK(ej.at("code") == "TreatedInPilot");
  CHECK(ej.at("detail").at("count") == 1);

  const auto no_roles = c.Post("/api/sessions", httplib::MultipartFormDataItems{
                                                    {"pilot", "a", "p.csv", "text/csv"}});
  REQUIRE(no_roles);
  CHECK(no_roles->status == 400);

  const auto big = c.Post("/api/sessions", upload(std::string(8192, 'x'), "", kRoles));
  REQUIRE(big);
  CHECK(big->status == 413);
  CHECK(nlohmann::json::parse(big->body).at("code") == "PayloadTooLarge");

  const auto id = [&] {
    const auto res = c.Post("/api/sessions",
                            upload("treat,y,x\n0,1,0\n0,2,1\n0,4,2\n", "treat,y,x\n1,1,1\n0,1,2\n",
                                   R"({"treatment":"treat","outcome":"y","covariates":["x"]})"));
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return nlohmann::json::parse(res->body).at("session_id").get<std::string>();
  }();
  const auto bad_tol = c.Get("/api/sessions/" + id + "/measures?bias_tol=-1");
  REQUIRE(bad_tol);
  CHECK(bad_tol->status == 400);
  CHECK(nlohmann::json::parse(bad_tol->body).at("code") == "InvalidOptions");
  const auto bad_smd = c.Get("/api/sessions/" + id + "/measures?smd=standard");
  REQUIRE(bad_smd);
  CHECK(bad_smd->status == 400);

  const auto bad_post = c.Post("/api/sessions/" + id + "/post",
                               httplib::MultipartFormDataItems{
                                   {"post", "treat,y\n1,1\n0,2\n", "post.csv", "text/csv"}});
  REQUIRE(bad_post);
  CHECK(bad_post->status == 400);
  CHECK(nlohmann::json::parse(bad_post->body).at("code") == "CovariateMissingInPost");
}

TEST_CASE("session store evicts the least recently used session") {
  SessionStore store(2);
  const auto a = store.insert(SessionRecord{});
  const auto b = store.insert(SessionRecord{});
  CHECK(a != b);
  CHECK(store.find(a).has_value());  // a is now most recent
  const auto c = store.insert(SessionRecord{});
  CHECK(store.size() == 2);
  CHECK(store.find(a).has_value());
  CHECK_FALSE(store.find(b).has_value());
  CHECK(store.find(c).has_value());
  CHECK(store.find(c)->record->session_id == c);

  auto post = std::make_shared<const PostJointVipModel>();
  CHECK(store.attach_post(c, post));
  CHECK(store.find(c)->post == post);
  CHECK_FALSE(store.attach_post(b, post));
}

TEST_CASE("concurrent requests") {
  LiveService live;
  auto setup = live.client();
  const std::string id = create_session(setup);
  std::vector<std::thread> workers;
  std::atomic<int> ok{0};
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&] {
      auto c = live.client();
      for (int k = 0; k < 5; ++k) {
        const auto res = c.Get("/api/sessions/" + id + "/measures");
        if (res && res->status == 200) ++ok;
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(ok == 40);
}
