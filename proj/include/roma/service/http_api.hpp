#pragma once

// HTTP + JSON front end for the Coordinator. Bearer tokens (RFC 6750)
// carry compact JWS (RFC 7519) access tokens. GET /ledger/feed and
// GET /ledger/verify are the only unauthenticated reads.

#include <httplib.h>

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "roma/canonical_json.hpp"
#include "roma/error.hpp"
#include "roma/service/coordinator.hpp"

namespace roma::service {

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
    case ErrorKind::kParse:
    case ErrorKind::kIncomplete: return 400;
    case ErrorKind::kAuthorization: return 401;
    case ErrorKind::kForbidden: return 403;
    case ErrorKind::kNotFound: return 404;
    case ErrorKind::kConflict:
    case ErrorKind::kImmutable:
    case ErrorKind::kSequencing:
    case ErrorKind::kScheduling:
    case ErrorKind::kCompleteness:
    case ErrorKind::kCorrupt:
    case ErrorKind::kIntegrity: return 409;
    case ErrorKind::kContract:
    case ErrorKind::kPrecondition: return 422;
    case ErrorKind::kBackend: return 502;
    case ErrorKind::kConfig: return 500;
  }
  return 500;
}

namespace http_detail {

struct Reply {
  int status = 200;
  Json body;
};

inline void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(canonical_dump(body), "application/json");
}

// No credentials at all: 401 with a bare challenge and no error code.
struct MissingToken : Error {
  MissingToken() : Error(ErrorKind::kAuthorization, "bearer token required") {}
};

inline void send_error(httplib::Response& res, const Error& e) {
  const int status = http_status(e.kind());
  Json body = {{"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}};
  if (auto* corrupt = dynamic_cast<const CorruptLedgerError*>(&e)) {
    body["error"]["first_bad_index"] = corrupt->first_bad_index();
  }
  if (dynamic_cast<const MissingToken*>(&e)) {
    res.set_header("WWW-Authenticate", "Bearer realm=\"roma\"");
  } else if (status == 401) {
    std::string desc = e.what();
    std::replace(desc.begin(), desc.end(), '"', '\'');
    res.set_header("WWW-Authenticate",
                   "Bearer realm=\"roma\", error=\"invalid_token\", error_description=\"" + desc + "\"");
  } else if (status == 403) {
    res.set_header("WWW-Authenticate", "Bearer realm=\"roma\", error=\"insufficient_scope\"");
  }
  send(res, status, body);
}

inline Json body_of(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json j = parse_json_bytes(req.body);
  if (!j.is_object()) fail(ErrorKind::kValidation, "request body must be a JSON object");
  return j;
}

template <typename T>
T field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::kValidation, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    fail(ErrorKind::kValidation, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return field<T>(j, key);
}

inline int path_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kValidation, "'" + s + "' is not an integer");
}

inline Json score_json(const MatchScore& s) {
  return {{"total", s.total},
          {"role", s.role_component},
          {"expertise", s.expertise_component},
          {"availability", s.availability_component}};
}

inline Json round_json(const RoundResult& r) {
  Json roles = Json::object();
  for (const auto& [who, role] : r.roles) roles[who] = std::string(to_string(role));
  return {{"index", r.index}, {"actual_minutes", r.actual_minutes}, {"roles", roles}};
}

}  // namespace http_detail

class HttpApi {
 public:
  explicit HttpApi(Coordinator& core) : core_(core) {}

  void mount(httplib::Server& server) {
    using http_detail::field;
    using http_detail::optional_field;
    using Req = const httplib::Request&;
    using Reply = http_detail::Reply;

    server.Post("/participants", wrap([this](Req req) {
      const Json b = http_detail::body_of(req);
      RegistrationRequest r;
      r.alias = field<std::string>(b, "alias");
      r.code = field<std::string>(b, "code");
      r.credential = field<std::string>(b, "credential");
      r.experience_years = optional_field<double>(b, "experience_years").value_or(0.0);
      r.expertise_tags = optional_field<std::set<std::string>>(b, "expertise_tags").value_or(std::set<std::string>{});
      if (auto it = b.find("availability"); it != b.end()) r.availability = slots_from_json(*it);
      return Reply{201, profile_view(core_.register_participant(r))};
    }));

    server.Post("/auth/token", wrap([this](Req req) {
      const Json b = http_detail::body_of(req);
      const IssuedToken t =
          core_.authenticate(field<std::string>(b, "alias"), field<std::string>(b, "credential"));
      return Reply{200,
                   {{"access_token", t.access_token},
                    {"token_type", "Bearer"},
                    {"expires_in", t.claims.expires_at - t.claims.issued_at},
                    {"expires_at", format_utc(t.claims.expires_at)},
                    {"scope", t.claims.scope},
                    {"participant_hash", t.claims.subject}}};
    }));

    server.Get("/me", authed([this](Req, const TokenClaims& who) {
      return Reply{200, profile_view(core_.profile(who))};
    }));

    server.Get("/instrument", authed([this](Req, const TokenClaims&) {
      return Reply{200,
                   {{"imi_items", core_.config().imi_item_texts},
                    {"imi_reversed", reversed_indices(kDefaultImiReversed)},
                    {"imi_scale", {1, 7}},
                    {"bfi10_scale", {1, 5}}}};
    }));

    server.Post("/assessments", authed([this](Req req, const TokenClaims& who) {
      const Json b = http_detail::body_of(req);
      Bfi10Response r{field<std::vector<int>>(b, "items")};
      const ClusterAssignment c = core_.submit_assessment(who, r);
      Json out = cluster_to_json(c);
      out["traits"] = traits_to_json(*core_.profile(who).traits);
      return Reply{200, out};
    }));

    server.Get("/matches", authed([this](Req req, const TokenClaims& who) {
      const int k = req.has_param("k") ? http_detail::path_int(req.get_param_value("k")) : 5;
      Json list = Json::array();
      for (const auto& m : core_.request_matches(who, k)) {
        list.push_back({{"participant_hash", m.participant_hash},
                        {"alias", m.alias},
                        {"preferred_role", std::string(to_string(m.preferred_role))},
                        {"score", http_detail::score_json(m.score)}});
      }
      return Reply{200, {{"matches", list}}};
    }));

    server.Post("/sessions", authed([this](Req req, const TokenClaims& who) {
      const Json b = http_detail::body_of(req);
      ScheduleRequest r;
      r.partner = optional_field<std::string>(b, "partner");
      r.slot = slot_from_json(field<Json>(b, "slot"));
      r.share_link = optional_field<std::string>(b, "share_link");
      r.ai_assist = optional_field<bool>(b, "ai_assist").value_or(false);
      const ScheduleOutcome o = core_.schedule_session(who, r);
      if (o.session) return Reply{201, session_to_json(*o.session)};
      return Reply{202, proposal_to_json(*o.proposal)};
    }));

    server.Get("/sessions", authed([this](Req, const TokenClaims& who) {
      Json sessions = Json::array();
      for (const auto& s : core_.sessions(who)) sessions.push_back(session_to_json(s));
      Json proposals = Json::array();
      for (const auto& p : core_.proposals(who)) proposals.push_back(proposal_to_json(p));
      return Reply{200, {{"sessions", sessions}, {"proposals", proposals}}};
    }));

    server.Get(R"(/sessions/([A-Za-z0-9._-]+))", authed([this](Req req, const TokenClaims& who) {
      return Reply{200, session_to_json(core_.session(who, req.matches[1]))};
    }));

    server.Post(R"(/sessions/([A-Za-z0-9._-]+)/accept)", authed([this](Req req, const TokenClaims& who) {
      return Reply{200, session_to_json(core_.accept_proposal(who, req.matches[1]))};
    }));

    server.Post(R"(/sessions/([A-Za-z0-9._-]+)/rounds/(-?\d+)/close)",
                authed([this](Req req, const TokenClaims& who) {
                  const Json b = http_detail::body_of(req);
                  const RoundResult r =
                      core_.close_round(who, req.matches[1], http_detail::path_int(req.matches[2]),
                                        field<double>(b, "actual_minutes"));
                  return Reply{200, http_detail::round_json(r)};
                }));

    server.Post(R"(/sessions/([A-Za-z0-9._-]+)/rounds/(-?\d+)/imi)",
                authed([this](Req req, const TokenClaims& who) {
                  const Json b = http_detail::body_of(req);
                  ImiReversedFlags flags = kDefaultImiReversed;
                  if (auto rev = optional_field<std::vector<int>>(b, "reversed")) {
                    flags = flags_from_indices(*rev);
                  }
                  const ImiResponse r =
                      core_.submit_imi(who, req.matches[1], http_detail::path_int(req.matches[2]),
                                       field<std::vector<int>>(b, "items"), flags);
                  return Reply{200,
                               {{"motivation_scaled", quantize6(r.motivation_scaled)},
                                {"revision", r.revision}}};
                }));

    server.Post(R"(/sessions/([A-Za-z0-9._-]+)/feedback)", authed([this](Req req, const TokenClaims& who) {
      const Json b = http_detail::body_of(req);
      core_.submit_feedback(who, req.matches[1], field<std::string>(b, "text"));
      return Reply{200, {{"stored", true}}};
    }));

    server.Post(R"(/sessions/([A-Za-z0-9._-]+)/finalize)", authed([this](Req req, const TokenClaims& who) {
      const FinalizeOutcome o = core_.finalize(who, req.matches[1]);
      return Reply{200,
                   {{"memo", to_json(o.memo)},
                    {"ledger", {{"first_index", o.span.first_index},
                                {"last_index", o.span.last_index}}}}};
    }));

    server.Get("/ledger/feed", wrap([this](Req req) {
      std::size_t since = 0;
      if (req.has_param("since")) {
        const int v = http_detail::path_int(req.get_param_value("since"));
        if (v < 0) fail(ErrorKind::kValidation, "since must be >= 0");
        since = static_cast<std::size_t>(v);
      }
      return Reply{200, feed_to_json(core_.transparency_feed(since))};
    }));

    server.Get("/ledger/verify", wrap([this](Req) {
      const VerifyResult v = core_.verify_ledger();
      Json out = {{"status", v.ok ? "OK" : "CORRUPT"},
                  {"entries_checked", v.entries_checked},
                  {"entries", core_.ledger().size()}};
      out["first_bad_index"] = v.ok ? Json(nullptr) : Json(v.first_bad_index);
      return Reply{200, out};
    }));

    server.Post("/analysis/run", authed([this](Req, const TokenClaims& who) {
      const AnalysisOutcome o = core_.run_analysis(who);
      return Reply{200,
                   {{"report", parse_json_bytes(o.canonical)},
                    {"ledger", {{"first_index", o.span.first_index},
                                {"last_index", o.span.last_index}}}}};
    }));

    server.Get("/analysis/latest", authed([this](Req, const TokenClaims&) {
      auto latest = core_.latest_analysis();
      if (!latest) fail(ErrorKind::kNotFound, "no analysis has been run yet");
      return Reply{200, {{"report", parse_json_bytes(*latest)}}};
    }));
  }

 private:
  using Handler = std::function<http_detail::Reply(const httplib::Request&)>;
  using AuthedHandler =
      std::function<http_detail::Reply(const httplib::Request&, const TokenClaims&)>;

  static httplib::Server::Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        http_detail::Reply r = h(req);
        http_detail::send(res, r.status, r.body);
      } catch (const Error& e) {
        http_detail::send_error(res, e);
      } catch (const std::exception& e) {
        http_detail::send(res, 500, {{"error", {{"kind", "INTERNAL"}, {"message", e.what()}}}});
      }
    };
  }

  httplib::Server::Handler authed(AuthedHandler h) {
    return wrap([this, h = std::move(h)](const httplib::Request& req) {
      const std::string header = req.get_header_value("Authorization");
      static constexpr std::string_view kPrefix = "Bearer ";
      if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0) {
        throw http_detail::MissingToken();
      }
      return h(req, core_.authorize(std::string_view(header).substr(kPrefix.size())));
    });
  }

  Coordinator& core_;
};

}  // namespace roma::service
