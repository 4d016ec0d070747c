#include "catch_amalgamated.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "roma/remote_chain.hpp"
#include "roma/service/coordinator.hpp"
#include "roma/service/http_api.hpp"

using namespace roma;
using namespace roma::service;

namespace {

constexpr std::int64_t kT0 = 1700000000;
const std::string kSecret = "0123456789abcdef0123456789abcdef";

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("roma-svc-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kConfig;
}

struct ManualClock {
  std::shared_ptr<std::atomic<std::int64_t>> now = std::make_shared<std::atomic<std::int64_t>>(kT0);
  Clock clock() const {
    return [n = now] { return n->load(); };
  }
  void advance(std::int64_t s) { *now += s; }
};

ServiceConfig test_config(const std::filesystem::path& dir) {
  ServiceConfig c;
  c.data_dir = dir.string();
  c.token_secret = kSecret;
  c.pbkdf2_iterations = 1000;
  c.admin_aliases = {"admin"};
  c.id_salt = "salt";
  return c;
}

RegistrationRequest person(const std::string& alias, double years) {
  RegistrationRequest r;
  r.alias = alias;
  r.code = "code-" + alias;
  r.credential = "password-" + alias;
  r.experience_years = years;
  r.expertise_tags = {"cpp"};
  r.availability = {{kT0 + 3600, 600}};
  return r;
}

const Bfi10Response kPilotBfi{{3, 3, 3, 3, 1, 3, 3, 3, 3, 5}};
const Bfi10Response kNavigatorBfi{{1, 5, 3, 3, 5, 5, 1, 3, 3, 1}};

struct World {
  TempDir dir;
  ManualClock clock;
  std::unique_ptr<Coordinator> core;
  TokenClaims alice, bob, admin;

  World() {
    core = std::make_unique<Coordinator>(test_config(dir.path), clock.clock());
    core->register_participant(person("alice", 3));
    core->register_participant(person("bob", 8));
    core->register_participant(person("admin", 1));
    alice = login("alice");
    bob = login("bob");
    admin = login("admin");
    core->submit_assessment(alice, kPilotBfi);
    core->submit_assessment(bob, kNavigatorBfi);
  }

  TokenClaims login(const std::string& alias) {
    return core->authorize(core->authenticate(alias, "password-" + alias).access_token);
  }

  void reopen() {
    core.reset();
    core = std::make_unique<Coordinator>(test_config(dir.path), clock.clock());
  }

  std::string pair_session() {
    ScheduleRequest req;
    req.partner = bob.subject;
    req.slot = {kT0 + 7200, 120};
    const ScheduleOutcome o = core->schedule_session(alice, req);
    REQUIRE(o.proposal);
    core->accept_proposal(bob, o.proposal->session_id);
    return o.proposal->session_id;
  }

  void complete(const std::string& id) {
    for (int r = 1; r <= 6; ++r) {
      core->close_round(alice, id, r, 15);
      core->submit_imi(alice, id, r, {6, 6, 5, 2, 6, 7, 6});
      core->submit_imi(bob, id, r, {5, 5, 5, 3, 5, 5, 5});
    }
    core->submit_feedback(alice, id, "good");
    core->submit_feedback(bob, id, "fine");
  }
};

}  // namespace

TEST_CASE("config defaults validate and unknown keys are rejected") {
  ServiceConfig c;
  CHECK_NOTHROW(validate(c));
  CHECK(kind_of([&] { roma::service::apply_json(c, Json{{"no_such_key", 1}}); }) == ErrorKind::kConfig);
  ServiceConfig bad;
  bad.chunk_limit = 100;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::kConfig);
  bad = ServiceConfig{};
  bad.match_weight_role = 0.9;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::kConfig);
  bad = ServiceConfig{};
  bad.token_secret = "short";
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::kConfig);
  bad = ServiceConfig{};
  bad.base_round_minutes = 20;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::kConfig);
}

TEST_CASE("config file then environment, secret redacted") {
  TempDir dir;
  const auto file = dir.path / "roma.json";
  std::ofstream(file) << R"({"listen_port": 9000, "chunk_limit": 1000, "admin_aliases": ["root"]})";
  const std::map<std::string, std::string> env = {
      {"ROMA_LISTEN_PORT", "9100"},
      {"ROMA_ADMIN_ALIASES", "ops,root"},
      {"ROMA_TOKEN_SECRET", kSecret}};
  const ServiceConfig c = load_config(file, [&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    return it == env.end() ? std::nullopt : std::optional(it->second);
  });
  CHECK(c.listen_port == 9100);
  CHECK(c.chunk_limit == 1000);
  CHECK(c.admin_aliases == std::vector<std::string>{"ops", "root"});
  CHECK(c.is_admin("ops"));
  const Json j = to_json(c);
  CHECK(j.dump().find(kSecret) == std::string::npos);

  std::ofstream(file) << "{not json";
  CHECK(kind_of([&] { load_config(file, [](const std::string&) { return std::nullopt; }); }) ==
        ErrorKind::kConfig);
  const auto env_bad = [](const std::string& k) -> std::optional<std::string> {
    return k == "ROMA_LISTEN_PORT" ? std::optional<std::string>("eighty") : std::nullopt;
  };
  CHECK(kind_of([&] { load_config(std::nullopt, env_bad); }) == ErrorKind::kConfig);
}

TEST_CASE("tokens verify, expire and resist forgery") {
  TokenClaims c{"abc", "participant", kT0, kT0 + 60};
  const std::string t = issue_token(kSecret, c);
  const TokenClaims back = verify_token(kSecret, t, kT0 + 1);
  CHECK(back.subject == "abc");
  CHECK_FALSE(back.admin());
  CHECK(kind_of([&] { verify_token(kSecret, t, kT0 + 60); }) == ErrorKind::kAuthorization);
  CHECK(kind_of([&] { verify_token(std::string(32, 'x'), t, kT0); }) == ErrorKind::kAuthorization);
  CHECK(kind_of([&] { verify_token(kSecret, "a.b", kT0); }) == ErrorKind::kAuthorization);

  c.scope = "admin";
  const std::string admin = issue_token(kSecret, c);
  const std::string spliced = admin.substr(0, admin.rfind('.')) + t.substr(t.rfind('.'));
  CHECK(kind_of([&] { verify_token(kSecret, spliced, kT0); }) == ErrorKind::kAuthorization);

  const std::string none = base64url_encode(R"({"alg":"none","typ":"JWT"})") + "." +
                           t.substr(t.find('.') + 1, t.rfind('.') - t.find('.') - 1);
  const std::string signed_none = none + "." + base64url_encode(hmac_sha256(kSecret, none));
  CHECK(kind_of([&] { verify_token(kSecret, signed_none, kT0); }) == ErrorKind::kAuthorization);
}

TEST_CASE("credential hashes are salted and checked") {
  const std::string h1 = hash_credential("correct horse", 1000);
  const std::string h2 = hash_credential("correct horse", 1000);
  CHECK(h1 != h2);
  CHECK(h1.rfind("pbkdf2-sha256$1000$", 0) == 0);
  CHECK(check_credential("correct horse", h1));
  CHECK_FALSE(check_credential("correct horsf", h1));
  CHECK_FALSE(check_credential("x", "garbage"));
}

TEST_CASE("registration and login rules") {
  World w;
  CHECK(kind_of([&] { w.core->register_participant(person("alice", 1)); }) == ErrorKind::kConflict);
  auto weak = person("carol", 1);
  weak.credential = "short";
  CHECK(kind_of([&] { w.core->register_participant(weak); }) == ErrorKind::kValidation);
  CHECK(kind_of([&] { w.core->authenticate("alice", "wrong-password"); }) == ErrorKind::kAuthorization);
  CHECK(w.admin.admin());
  CHECK_FALSE(w.alice.admin());
  const ParticipantProfile p = w.core->profile(w.alice);
  CHECK(p.participant_hash == anonymize_id("code-alice", "salt"));
  CHECK(p.cluster->preferred_role == Role::kPilot);
  CHECK(w.core->profile(w.bob).cluster->preferred_role == Role::kNavigator);
  w.clock.advance(3600);
  CHECK(kind_of([&] { w.core->authorize(w.core->authenticate("alice", "password-alice").access_token + "x"); }) ==
        ErrorKind::kAuthorization);
}

TEST_CASE("matching needs an assessment and ranks the complementary partner") {
  World w;
  const TokenClaims admin = w.admin;
  CHECK(kind_of([&] { w.core->request_matches(admin, 5); }) == ErrorKind::kPrecondition);
  CHECK(kind_of([&] { w.core->request_matches(w.alice, 0); }) == ErrorKind::kValidation);
  const auto m = w.core->request_matches(w.alice, 5);
  REQUIRE(m.size() == 1);
  CHECK(m[0].alias == "bob");
  CHECK(m[0].score.role_component == 1.0);
}

TEST_CASE("scheduling: proposals, consent, conflicts, expiry") {
  World w;
  ScheduleRequest req;
  req.partner = w.bob.subject;
  req.slot = {kT0 + 7200, 120};
  const ScheduleOutcome o = w.core->schedule_session(w.alice, req);
  REQUIRE(o.proposal);
  CHECK_FALSE(o.session);
  CHECK(kind_of([&] { w.core->accept_proposal(w.alice, o.proposal->session_id); }) == ErrorKind::kForbidden);
  CHECK(kind_of([&] { w.core->schedule_session(w.alice, req); }) == ErrorKind::kConflict);

  ScheduleRequest outside = req;
  outside.slot = {kT0 + 36000, 120};
  CHECK(kind_of([&] { w.core->schedule_session(w.alice, outside); }) == ErrorKind::kScheduling);
  ScheduleRequest past = req;
  past.slot = {kT0 - 60, 30};
  CHECK(kind_of([&] { w.core->schedule_session(w.alice, past); }) == ErrorKind::kContract);
  ScheduleRequest self = req;
  self.partner = w.alice.subject;
  self.slot = {kT0 + 20000, 60};
  CHECK(kind_of([&] { w.core->schedule_session(w.alice, self); }) == ErrorKind::kContract);

  const SessionRecord s = w.core->accept_proposal(w.bob, o.proposal->session_id);
  CHECK(s.state == SessionState::kScheduled);
  CHECK(s.plan.count(0, Role::kPilot) == 4);
  CHECK(kind_of([&] { w.core->accept_proposal(w.bob, o.proposal->session_id); }) == ErrorKind::kConflict);

  ScheduleRequest later = req;
  later.slot = {kT0 + 20000, 60};
  const ScheduleOutcome p2 = w.core->schedule_session(w.alice, later);
  w.clock.advance(w.core->config().proposal_expiry_seconds);
  CHECK(kind_of([&] { w.core->accept_proposal(w.bob, p2.proposal->session_id); }) == ErrorKind::kScheduling);
}

TEST_CASE("solo scheduling creates the session directly") {
  World w;
  ScheduleRequest req;
  req.slot = {kT0 + 7200, 90};
  const ScheduleOutcome o = w.core->schedule_session(w.alice, req);
  REQUIRE(o.session);
  CHECK(o.session->session_type == SessionType::kSolo);
  CHECK(o.session->session_id == "s000001");
  CHECK(kind_of([&] { w.core->session(w.bob, o.session->session_id); }) == ErrorKind::kForbidden);
  CHECK(w.core->session(w.admin, o.session->session_id).session_id == o.session->session_id);
  CHECK(kind_of([&] { w.core->session(w.alice, "s999999"); }) == ErrorKind::kNotFound);
}

TEST_CASE("full pair session is anchored once and survives a restart") {
  World w;
  const std::string id = w.pair_session();
  CHECK(kind_of([&] { w.core->finalize(w.alice, id); }) == ErrorKind::kCompleteness);
  CHECK(kind_of([&] { w.core->close_round(w.admin, id, 1, 15); }) == ErrorKind::kForbidden);
  w.complete(id);
  const FinalizeOutcome f = w.core->finalize(w.alice, id);
  CHECK(f.span.first_index == 0);
  const FinalizeOutcome again = w.core->finalize(w.bob, id);
  CHECK(again.memo == f.memo);
  CHECK(again.span.last_index == f.span.last_index);
  CHECK(w.core->ledger().size() == f.span.last_index + 1);
  CHECK(kind_of([&] { w.core->submit_feedback(w.alice, id, "edit"); }) == ErrorKind::kImmutable);

  const Feed feed = w.core->transparency_feed();
  CHECK(feed.verify.ok);
  REQUIRE(feed.items.size() == 1);
  CHECK(feed.items[0].kind == "session");
  CHECK(feed.items[0].summary["session_id"] == id);

  CHECK(kind_of([&] { w.core->run_analysis(w.alice); }) == ErrorKind::kForbidden);
  const AnalysisOutcome a1 = w.core->run_analysis(w.admin);
  CHECK(a1.report.observations == 12);
  CHECK(w.core->latest_analysis() == a1.canonical);

  const std::size_t before = w.core->ledger().size();
  w.reopen();
  CHECK(w.core->ledger().size() == before);
  CHECK(w.core->verify_ledger().ok);
  CHECK(w.core->session(w.alice, id).state == SessionState::kComplete);
  const AnalysisOutcome a2 = w.core->run_analysis(w.login("admin"));
  CHECK(a2.canonical == a1.canonical);
  CHECK(w.core->transparency_feed().items.size() == 3);
  CHECK(w.core->transparency_feed(a2.span.first_index).items.size() == 1);
}

TEST_CASE("a damaged ledger file limits the feed and blocks analysis") {
  World w;
  const std::string id = w.pair_session();
  w.complete(id);
  w.core->finalize(w.alice, id);
  w.core.reset();
  const auto file = w.dir.path / "ledger.bin";
  std::string bytes;
  {
    std::ifstream in(file, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto at = bytes.find("\"fine\"");
  REQUIRE(at != std::string::npos);
  bytes[at + 1] = 'F';
  std::ofstream(file, std::ios::binary | std::ios::trunc) << bytes;
  w.reopen();
  const VerifyResult v = w.core->verify_ledger();
  CHECK_FALSE(v.ok);
  const Feed feed = w.core->transparency_feed();
  CHECK_FALSE(feed.verify.ok);
  CHECK(feed.items.empty());
  CHECK(kind_of([&] { w.core->run_analysis(w.login("admin")); }) == ErrorKind::kCorrupt);
}

TEST_CASE("HTTP status mapping") {
  CHECK(http_status(ErrorKind::kValidation) == 400);
  CHECK(http_status(ErrorKind::kAuthorization) == 401);
  CHECK(http_status(ErrorKind::kForbidden) == 403);
  CHECK(http_status(ErrorKind::kNotFound) == 404);
  CHECK(http_status(ErrorKind::kConflict) == 409);
  CHECK(http_status(ErrorKind::kPrecondition) == 422);
  CHECK(http_status(ErrorKind::kBackend) == 502);
}

TEST_CASE("HTTP API end to end on a loopback port") {
  TempDir dir;
  ManualClock clock;
  Coordinator core(test_config(dir.path), clock.clock());
  httplib::Server server;
  HttpApi api(core);
  api.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto post = [&](const std::string& path, const Json& body, const std::string& token = "") {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return cli.Post(path, h, body.dump(), "application/json");
  };
  auto get = [&](const std::string& path, const std::string& token = "") {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return cli.Get(path, h);
  };
  const Json avail = Json::array({{{"start", format_utc(kT0 + 3600)}, {"minutes", 600}}});

  auto r = post("/participants", {{"alias", "ann"}, {"code", "P1"}, {"credential", "secret-ann"},
                                  {"experience_years", 2}, {"availability", avail}});
  REQUIRE(r);
  CHECK(r->status == 201);
  CHECK(r->body.find("credential") == std::string::npos);
  r = post("/participants", {{"alias", "ann"}, {"code", "P2"}, {"credential", "secret-ann"}});
  CHECK(r->status == 409);
  r = post("/participants", {{"alias", "x"}});
  CHECK(r->status == 400);

  r = get("/me");
  CHECK(r->status == 401);
  CHECK(r->get_header_value("WWW-Authenticate") == "Bearer realm=\"roma\"");
  r = get("/me", "not.a.token");
  CHECK(r->status == 401);
  CHECK(r->get_header_value("WWW-Authenticate").find("invalid_token") != std::string::npos);

  r = post("/auth/token", {{"alias", "ann"}, {"credential", "secret-ann"}});
  REQUIRE(r->status == 200);
  const std::string token = Json::parse(r->body)["access_token"];

  r = get("/me", token);
  CHECK(r->status == 200);
  r = get("/matches?k=3", token);
  CHECK(r->status == 422);
  r = post("/assessments", {{"items", {3, 3, 3, 3, 3, 3, 3, 3, 3, 3}}}, token);
  REQUIRE(r->status == 200);
  CHECK(Json::parse(r->body)["cluster"] == "CLUSTER_1");
  r = get("/instrument", token);
  CHECK(Json::parse(r->body)["imi_items"].size() == 7);

  r = post("/sessions", {{"slot", {{"start", format_utc(kT0 + 7200)}, {"minutes", 120}}}}, token);
  REQUIRE(r->status == 201);
  const std::string id = Json::parse(r->body)["session_id"];
  r = post("/sessions/" + id + "/rounds/2/close", {{"actual_minutes", 15}}, token);
  CHECK(r->status == 409);
  for (int n = 1; n <= 6; ++n) {
    r = post("/sessions/" + id + "/rounds/" + std::to_string(n) + "/close", {{"actual_minutes", 15}}, token);
    REQUIRE(r->status == 200);
    r = post("/sessions/" + id + "/rounds/" + std::to_string(n) + "/imi",
             {{"items", {7, 7, 7, 1, 7, 7, 7}}}, token);
    REQUIRE(r->status == 200);
    CHECK(Json::parse(r->body)["motivation_scaled"] == 10.0);
  }
  r = post("/sessions/" + id + "/feedback", {{"text", "done"}}, token);
  CHECK(r->status == 200);
  r = post("/sessions/" + id + "/finalize", Json::object(), token);
  REQUIRE(r->status == 200);
  CHECK(Json::parse(r->body)["ledger"]["first_index"] == 0);

  r = get("/ledger/verify");
  CHECK(Json::parse(r->body)["status"] == "OK");
  r = get("/ledger/feed?since=0");
  CHECK(Json::parse(r->body)["items"].size() == 1);
  r = get("/ledger/feed?since=x");
  CHECK(r->status == 400);
  r = get("/sessions/nope", token);
  CHECK(r->status == 404);
  r = post("/analysis/run", Json::object(), token);
  CHECK(r->status == 403);
  CHECK(r->get_header_value("WWW-Authenticate").find("insufficient_scope") != std::string::npos);
  r = get("/analysis/latest", token);
  CHECK(r->status == 404);

  server.stop();
  th.join();
}

TEST_CASE("remote chain anchors through the chain routes") {
  MemoryChain remote_store;
  httplib::Server server;
  mount_chain_routes(server, remote_store);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  {
    LedgerOptions opts;
    opts.backend = std::make_unique<RemoteChain>("http://127.0.0.1:" + std::to_string(port) + "/chain");
    opts.clock = fixed_clock(kT0);
    Ledger ledger(std::move(opts));
    ledger.append_entry("first");
    ledger.append_entry(std::string("bin\0ary", 7));
    CHECK(ledger.anchored());
    CHECK(remote_store.fetch_all().size() == 2);
    CHECK_FALSE(ledger.entries()[0].tx_ref.empty());
  }
  server.stop();
  th.join();

  RemoteChain dead("http://127.0.0.1:" + std::to_string(port) + "/chain");
  CHECK(kind_of([&] { dead.append("x"); }) == ErrorKind::kBackend);
  CHECK_THROWS_AS(parse_chain_endpoint("ftp://host/x"), Error);
}
