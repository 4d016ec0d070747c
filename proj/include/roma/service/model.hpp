#pragma once

// Persisted service records and their JSON forms.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/matching.hpp"
#include "roma/memo.hpp"
#include "roma/personality.hpp"
#include "roma/session.hpp"
#include "roma/time.hpp"

namespace roma::service {

struct ParticipantProfile {
  std::string participant_hash;
  std::string display_alias;
  double experience_years = 0.0;
  std::set<std::string> expertise_tags;
  std::vector<TimeSlot> availability;
  std::optional<TraitVector> traits;
  std::optional<ClusterAssignment> cluster;
  std::string credential_hash;
};

/// A pair session awaiting the partner's consent.
struct Proposal {
  std::string session_id;
  std::string proposer;
  std::string partner;
  TimeSlot slot;
  std::optional<std::string> share_link;
  bool ai_assist = false;
  std::int64_t created_at = 0;
  std::int64_t expires_at = 0;
};

// ---- JSON ------------------------------------------------------------------

inline Json slot_to_json(const TimeSlot& s) {
  return {{"start", format_utc(s.start)}, {"minutes", s.duration_minutes}};
}

inline TimeSlot slot_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::kValidation, "slot must be an object");
  try {
    TimeSlot s;
    s.start = parse_utc(j.at("start").get<std::string>());
    s.duration_minutes = j.at("minutes").get<int>();
    if (s.duration_minutes <= 0) fail(ErrorKind::kValidation, "slot minutes must be positive");
    return s;
  } catch (const Json::exception&) {
    fail(ErrorKind::kValidation, "slot needs 'start' (UTC string) and 'minutes' (integer)");
  }
}

inline Json slots_to_json(const std::vector<TimeSlot>& slots) {
  Json out = Json::array();
  for (const auto& s : slots) out.push_back(slot_to_json(s));
  return out;
}

inline std::vector<TimeSlot> slots_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorKind::kValidation, "availability must be an array");
  std::vector<TimeSlot> out;
  for (const auto& s : j) out.push_back(slot_from_json(s));
  return out;
}

inline Json traits_to_json(const TraitVector& t) {
  Json j = Json::object();
  for (Trait trait : kAllTraits) j[std::string(to_string(trait))] = t[trait];
  return j;
}

inline TraitVector traits_from_json(const Json& j) {
  std::array<double, 5> v{};
  for (Trait trait : kAllTraits) v[static_cast<std::size_t>(trait)] = j.at(std::string(to_string(trait))).get<double>();
  return TraitVector(TraitScale::kScaled1To10, v);
}

inline Json cluster_to_json(const ClusterAssignment& c) {
  return {{"cluster", std::string(to_string(c.cluster))},
          {"cluster_scores", c.cluster_scores},
          {"predominant_trait", std::string(to_string(c.predominant_trait))},
          {"preferred_role", std::string(to_string(c.preferred_role))}};
}

inline ClusterAssignment cluster_from_json(const Json& j) {
  ClusterAssignment c;
  c.cluster = parse_cluster(j.at("cluster").get<std::string>());
  c.cluster_scores = j.at("cluster_scores").get<std::array<double, 3>>();
  c.predominant_trait = parse_trait(j.at("predominant_trait").get<std::string>());
  c.preferred_role = parse_role(j.at("preferred_role").get<std::string>());
  return c;
}

/// Public view: never includes the credential hash.
inline Json profile_view(const ParticipantProfile& p) {
  Json j = {{"participant_hash", p.participant_hash},
            {"alias", p.display_alias},
            {"experience_years", p.experience_years},
            {"expertise_tags", p.expertise_tags},
            {"availability", slots_to_json(p.availability)}};
  j["traits"] = p.traits ? traits_to_json(*p.traits) : Json(nullptr);
  j["cluster"] = p.cluster ? cluster_to_json(*p.cluster) : Json(nullptr);
  return j;
}

inline Json profile_to_json(const ParticipantProfile& p) {
  Json j = profile_view(p);
  j["credential_hash"] = p.credential_hash;
  return j;
}

inline ParticipantProfile profile_from_json(const Json& j) {
  ParticipantProfile p;
  p.participant_hash = j.at("participant_hash").get<std::string>();
  p.display_alias = j.at("alias").get<std::string>();
  p.experience_years = j.at("experience_years").get<double>();
  p.expertise_tags = j.at("expertise_tags").get<std::set<std::string>>();
  p.availability = slots_from_json(j.at("availability"));
  if (!j.at("traits").is_null()) p.traits = traits_from_json(j.at("traits"));
  if (!j.at("cluster").is_null()) p.cluster = cluster_from_json(j.at("cluster"));
  p.credential_hash = j.at("credential_hash").get<std::string>();
  return p;
}

inline Json proposal_to_json(const Proposal& p) {
  Json j = {{"session_id", p.session_id},
            {"proposer", p.proposer},
            {"partner", p.partner},
            {"slot", slot_to_json(p.slot)},
            {"ai_assist", p.ai_assist},
            {"created_at", format_utc(p.created_at)},
            {"expires_at", format_utc(p.expires_at)},
            {"state", "PROPOSED"}};
  j["share_link"] = p.share_link ? Json(*p.share_link) : Json(nullptr);
  return j;
}

inline Proposal proposal_from_json(const Json& j) {
  Proposal p;
  p.session_id = j.at("session_id").get<std::string>();
  p.proposer = j.at("proposer").get<std::string>();
  p.partner = j.at("partner").get<std::string>();
  p.slot = slot_from_json(j.at("slot"));
  p.ai_assist = j.at("ai_assist").get<bool>();
  p.created_at = parse_utc(j.at("created_at").get<std::string>());
  p.expires_at = parse_utc(j.at("expires_at").get<std::string>());
  if (!j.at("share_link").is_null()) p.share_link = j.at("share_link").get<std::string>();
  return p;
}

inline Json plan_to_json(const RoundPlan& plan) {
  Json rounds = Json::array();
  for (const auto& r : plan.rounds) {
    Json jr = {{"index", r.index},
               {"role_a", std::string(to_string(r.role_a))},
               {"planned_minutes", r.planned_minutes}};
    jr["role_b"] = r.role_b ? Json(std::string(to_string(*r.role_b))) : Json(nullptr);
    rounds.push_back(jr);
  }
  return {{"session_type", std::string(to_string(plan.session_type))},
          {"rounds", rounds},
          {"solo_preference_warning", plan.solo_preference_warning}};
}

inline RoundPlan plan_from_json(const Json& j) {
  RoundPlan plan;
  plan.session_type = parse_session_type(j.at("session_type").get<std::string>());
  plan.solo_preference_warning = j.at("solo_preference_warning").get<bool>();
  for (const auto& jr : j.at("rounds")) {
    PlannedRound r;
    r.index = jr.at("index").get<int>();
    r.role_a = parse_role(jr.at("role_a").get<std::string>());
    if (!jr.at("role_b").is_null()) r.role_b = parse_role(jr.at("role_b").get<std::string>());
    r.planned_minutes = jr.at("planned_minutes").get<int>();
    plan.rounds.push_back(r);
  }
  validate(plan);
  return plan;
}

inline Json imi_to_json(const ImiResponse& r) {
  return {{"items", r.items},
          {"reversed", reversed_indices(r.reversed)},
          {"motivation_scaled", r.motivation_scaled},
          {"revision", r.revision}};
}

inline ImiResponse imi_from_json(const Json& j) {
  const auto items = j.at("items").get<std::vector<int>>();
  const auto reversed = j.at("reversed").get<std::vector<int>>();
  ImiResponse r = score_imi(items, flags_from_indices(reversed));
  r.revision = j.at("revision").get<int>();
  return r;
}

/// Full record as persisted and as returned to session members.
inline Json session_to_json(const SessionRecord& s) {
  Json rounds = Json::array();
  for (const auto& r : s.rounds_done) {
    Json roles = Json::object();
    for (const auto& [who, role] : r.roles) roles[who] = std::string(to_string(role));
    Json imi = Json::object();
    for (const auto& [who, resp] : r.imi) imi[who] = imi_to_json(resp);
    rounds.push_back({{"index", r.index},
                      {"actual_minutes", r.actual_minutes},
                      {"roles", roles},
                      {"imi", imi}});
  }
  Json clusters = Json::object();
  for (const auto& [who, c] : s.clusters) clusters[who] = static_cast<int>(c);
  Json j = {{"session_id", s.session_id},
            {"session_type", std::string(to_string(s.session_type))},
            {"participants", s.participant_hashes},
            {"plan", plan_to_json(s.plan)},
            {"state", std::string(to_string(s.state))},
            {"rounds", rounds},
            {"feedback", s.feedback},
            {"ai_assist", s.ai_assist},
            {"slot", slot_to_json(s.scheduled_slot)},
            {"clusters", clusters}};
  j["share_link"] = s.share_link ? Json(*s.share_link) : Json(nullptr);
  j["memo"] = s.memo ? to_json(*s.memo) : Json(nullptr);
  return j;
}

inline SessionRecord session_from_json(const Json& j) {
  SessionRecord s;
  s.session_id = j.at("session_id").get<std::string>();
  s.session_type = parse_session_type(j.at("session_type").get<std::string>());
  s.participant_hashes = j.at("participants").get<std::vector<std::string>>();
  s.plan = plan_from_json(j.at("plan"));
  s.state = parse_session_state(j.at("state").get<std::string>());
  for (const auto& jr : j.at("rounds")) {
    RoundResult r;
    r.index = jr.at("index").get<int>();
    r.actual_minutes = jr.at("actual_minutes").get<double>();
    for (const auto& [who, role] : jr.at("roles").items()) r.roles[who] = parse_role(role.get<std::string>());
    for (const auto& [who, resp] : jr.at("imi").items()) r.imi[who] = imi_from_json(resp);
    s.rounds_done.push_back(std::move(r));
  }
  s.feedback = j.at("feedback").get<std::map<std::string, std::string>>();
  s.ai_assist = j.at("ai_assist").get<bool>();
  s.scheduled_slot = slot_from_json(j.at("slot"));
  for (const auto& [who, c] : j.at("clusters").items()) s.clusters[who] = cluster_from_number(c.get<int>());
  if (!j.at("share_link").is_null()) s.share_link = j.at("share_link").get<std::string>();
  if (!j.at("memo").is_null()) s.memo = memo_from_json(j.at("memo"));
  return s;
}

}  // namespace roma::service
