#pragma once

// Service core: profiles, assessments, matching, scheduling, the session
// protocol, the ledger transparency feed and analysis runs. Every public
// call is serialized on one mutex; ledger reads use the ledger's own lock.
//
// Data directory layout:
//   profiles.json   participant profiles (hashes only, salted credentials)
//   sessions.json   sessions, pending proposals, ledger anchors
//   audit.jsonl     append-only audit events
//   ledger.bin      hash-chained ledger entries
//   chain.log       local chain backend (ledger_backend = local)
//   token.key       HMAC key when token_secret is not configured
//   analysis_latest.json

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/chain_backend.hpp"
#include "roma/crypto.hpp"
#include "roma/error.hpp"
#include "roma/ledger.hpp"
#include "roma/matching.hpp"
#include "roma/memo.hpp"
#include "roma/observations.hpp"
#include "roma/personality.hpp"
#include "roma/remote_chain.hpp"
#include "roma/rounds.hpp"
#include "roma/service/auth.hpp"
#include "roma/service/config.hpp"
#include "roma/service/model.hpp"
#include "roma/session.hpp"
#include "roma/stats/analysis.hpp"
#include "roma/time.hpp"

namespace roma::service {

inline constexpr int kAnalysisMemoVersion = 1;
inline constexpr std::size_t kMaxAliasBytes = 64;
inline constexpr std::size_t kMinCredentialLength = 8;
inline constexpr int kMaxMatches = 100;

struct RegistrationRequest {
  std::string alias;
  std::string code;
  std::string credential;
  double experience_years = 0.0;
  std::set<std::string> expertise_tags;
  std::vector<TimeSlot> availability;
};

struct IssuedToken {
  std::string access_token;
  TokenClaims claims;
};

struct ScheduleRequest {
  std::optional<std::string> partner;  // participant hash; none for SOLO
  TimeSlot slot;
  std::optional<std::string> share_link;
  bool ai_assist = false;
};

/// SOLO requests produce a session; PAIR requests produce a proposal that
/// becomes a session once the partner accepts.
struct ScheduleOutcome {
  std::optional<SessionRecord> session;
  std::optional<Proposal> proposal;
};

struct MatchView {
  std::string participant_hash;
  std::string alias;
  Role preferred_role = Role::kPilot;
  MatchScore score;
};

struct LedgerSpan {
  std::size_t first_index = 0;
  std::size_t last_index = 0;
};

struct FinalizeOutcome {
  SessionMemo memo;
  LedgerSpan span;
};

struct FeedItem {
  LedgerSpan span;
  std::string kind;
  std::string digest;
  std::vector<std::string> entry_hashes;
  std::vector<std::string> tx_refs;
  std::string appended_at;
  Json summary;
};

struct Feed {
  VerifyResult verify;
  std::size_t total_entries = 0;
  std::vector<FeedItem> items;
};

struct AnalysisOutcome {
  stats::AnalysisReport report;
  std::string canonical;  // persisted bytes
  LedgerSpan span;
};

inline Json feed_to_json(const Feed& f) {
  Json items = Json::array();
  for (const auto& it : f.items) {
    items.push_back({{"first_index", it.span.first_index},
                     {"last_index", it.span.last_index},
                     {"kind", it.kind},
                     {"digest", it.digest},
                     {"entry_hashes", it.entry_hashes},
                     {"tx_refs", it.tx_refs},
                     {"appended_at", it.appended_at},
                     {"summary", it.summary}});
  }
  Json j = {{"status", f.verify.ok ? "OK" : "CORRUPT"},
            {"entries_checked", f.verify.entries_checked},
            {"total_entries", f.total_entries},
            {"items", items}};
  j["first_bad_index"] = f.verify.ok ? Json(nullptr) : Json(f.verify.first_bad_index);
  return j;
}

namespace detail {

inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kBackend, "cannot write " + tmp.string());
    out << bytes;
    out.flush();
    if (!out) fail(ErrorKind::kBackend, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::optional<std::string> read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::unique_ptr<ChainBackend> make_backend(const ServiceConfig& c) {
  if (c.ledger_backend == "external") {
    return std::make_unique<RemoteChain>(c.chain_endpoint, c.chain_commitment);
  }
  return std::make_unique<FileChain>(std::filesystem::path(c.data_dir) / "chain.log");
}

inline Json summarize(const LedgerDocument& doc) {
  const Json& d = doc.decoded.doc;
  const std::string kind = doc.kind();
  if (kind == "session") {
    const SessionMemo m = memo_from_json(d);
    return {{"session_id", m.session_id},
            {"session_type", std::string(to_string(m.session_type))},
            {"participants", m.participant_hashes},
            {"rounds", m.rounds.size()},
            {"ai_assist", m.ai_assist},
            {"finalized_at", m.finalized_at}};
  }
  if (kind == "analysis") {
    return {{"version", d.value("version", 0)},
            {"source_entries", d.value("source_entries", 0)},
            {"source_head", d.value("source_head", "")}};
  }
  return Json::object();
}

}  // namespace detail

class Coordinator {
 public:
  /// `backend` overrides the configured chain backend (tests, embedding).
  explicit Coordinator(ServiceConfig config, Clock clock = system_clock(),
                       std::unique_ptr<ChainBackend> backend = nullptr)
      : config_(std::move(config)), clock_(std::move(clock)), dir_(config_.data_dir) {
    validate(config_);
    std::filesystem::create_directories(dir_);
    secret_ = load_secret();
    load_state();
    LedgerOptions opts;
    opts.backend = backend ? std::move(backend) : detail::make_backend(config_);
    opts.clock = clock_;
    opts.ledger_file = dir_ / "ledger.bin";
    ledger_ = std::make_unique<Ledger>(std::move(opts));
  }

  const ServiceConfig& config() const { return config_; }
  const Ledger& ledger() const { return *ledger_; }

  // ---- identity --------------------------------------------------------

  ParticipantProfile register_participant(const RegistrationRequest& req) {
    std::lock_guard lock(mu_);
    if (req.code.empty()) fail(ErrorKind::kValidation, "participant code must not be empty");
    if (req.alias.empty() || req.alias.size() > kMaxAliasBytes || !is_valid_utf8(req.alias)) {
      fail(ErrorKind::kValidation, "alias must be 1..64 bytes of UTF-8");
    }
    if (req.credential.size() < kMinCredentialLength) {
      fail(ErrorKind::kValidation, "credential must be at least 8 characters");
    }
    if (!(req.experience_years >= 0.0) || req.experience_years > 80.0) {
      fail(ErrorKind::kValidation, "experience_years must be in [0, 80]");
    }
    validate_availability(req.availability);
    for (const auto& [hash, p] : profiles_) {
      if (p.display_alias == req.alias) fail(ErrorKind::kConflict, "alias already taken");
    }
    ParticipantProfile p;
    p.participant_hash = anonymize_id(req.code, config_.id_salt);
    if (profiles_.count(p.participant_hash)) {
      fail(ErrorKind::kConflict, "participant code already registered");
    }
    p.display_alias = req.alias;
    p.experience_years = req.experience_years;
    p.expertise_tags = req.expertise_tags;
    p.availability = req.availability;
    p.credential_hash = hash_credential(req.credential, config_.pbkdf2_iterations);
    profiles_[p.participant_hash] = p;
    save_profiles();
    audit({{"event", "registered"}, {"participant", p.participant_hash}});
    return p;
  }

  IssuedToken authenticate(const std::string& alias, const std::string& credential) {
    std::lock_guard lock(mu_);
    for (const auto& [hash, p] : profiles_) {
      if (p.display_alias != alias) continue;
      if (!check_credential(credential, p.credential_hash)) break;
      IssuedToken t;
      t.claims.subject = hash;
      t.claims.scope = std::string(config_.is_admin(alias) ? kScopeAdmin : kScopeParticipant);
      t.claims.issued_at = clock_();
      t.claims.expires_at = t.claims.issued_at + config_.token_lifetime_seconds;
      t.access_token = issue_token(secret_, t.claims);
      return t;
    }
    fail(ErrorKind::kAuthorization, "unknown alias or wrong credential");
  }

  TokenClaims authorize(std::string_view token) const {
    std::lock_guard lock(mu_);
    TokenClaims c = verify_token(secret_, token, clock_());
    if (!profiles_.count(c.subject)) fail(ErrorKind::kAuthorization, "token subject is not registered");
    return c;
  }

  ParticipantProfile profile(const TokenClaims& who) const {
    std::lock_guard lock(mu_);
    return profile_of(who.subject);
  }

  // ---- assessment & matching -------------------------------------------

  ClusterAssignment submit_assessment(const TokenClaims& who, const Bfi10Response& response) {
    std::lock_guard lock(mu_);
    ParticipantProfile& p = profile_of(who.subject);
    const TraitVector traits = rescale_traits(score_bfi10(response));
    const ClusterAssignment cluster = assign_cluster(traits);
    if (p.cluster) {
      audit({{"event", "assessment_replaced"},
             {"participant", p.participant_hash},
             {"previous_traits", traits_to_json(*p.traits)},
             {"previous_cluster", cluster_to_json(*p.cluster)}});
    }
    p.traits = traits;
    p.cluster = cluster;
    save_profiles();
    return cluster;
  }

  std::vector<MatchView> request_matches(const TokenClaims& who, int k) const {
    std::lock_guard lock(mu_);
    if (k < 1 || k > kMaxMatches) fail(ErrorKind::kValidation, "k must be in 1..100");
    const ParticipantProfile& me = profile_of(who.subject);
    if (!me.cluster) {
      fail(ErrorKind::kPrecondition, "submit an assessment (POST /assessments) before matching");
    }
    std::vector<MatchCandidate> pool;
    for (const auto& [hash, p] : profiles_) {
      if (hash != me.participant_hash && p.cluster) pool.push_back(candidate_of(p));
    }
    std::vector<MatchView> out;
    for (const auto& m : match_partners(candidate_of(me), pool, static_cast<std::size_t>(k),
                                        config_.match_params())) {
      const ParticipantProfile& p = profiles_.at(m.candidate.participant_ref);
      out.push_back({p.participant_hash, p.display_alias, m.candidate.preferred_role, m.score});
    }
    return out;
  }

  // ---- scheduling ------------------------------------------------------

  ScheduleOutcome schedule_session(const TokenClaims& who, const ScheduleRequest& req) {
    std::lock_guard lock(mu_);
    const std::int64_t now = clock_();
    purge_expired(now);
    const ParticipantProfile& me = assessed(who.subject);
    if (req.slot.duration_minutes <= 0) fail(ErrorKind::kValidation, "slot needs a positive duration");
    if (req.slot.start <= now) fail(ErrorKind::kContract, "session slot must lie in the future");
    if (req.share_link && req.share_link->size() > 2048) {
      fail(ErrorKind::kValidation, "share_link is too long");
    }
    require_available(me, req.slot);
    require_free(me.participant_hash, req.slot, std::nullopt);
    ScheduleOutcome out;
    if (!req.partner) {
      RoundPlan plan = plan_rounds(SessionType::kSolo, me.cluster->preferred_role, std::nullopt,
                                   config_.base_round_minutes);
      SessionOptions opts{req.ai_assist, req.share_link, {{me.participant_hash, me.cluster->cluster}}};
      SessionRecord s = create_session(next_session_id(), std::move(plan), {me.participant_hash},
                                       req.slot, now, std::move(opts));
      sessions_[s.session_id] = s;
      save_sessions();
      audit({{"event", "session_scheduled"}, {"session_id", s.session_id}});
      out.session = s;
      return out;
    }
    if (*req.partner == me.participant_hash) {
      fail(ErrorKind::kContract, "a participant cannot pair with themselves");
    }
    if (!profiles_.count(*req.partner)) fail(ErrorKind::kNotFound, "partner is not registered");
    const ParticipantProfile& partner = assessed(*req.partner);
    require_available(partner, req.slot);
    require_free(partner.participant_hash, req.slot, std::nullopt);
    Proposal p;
    p.session_id = next_session_id();
    p.proposer = me.participant_hash;
    p.partner = partner.participant_hash;
    p.slot = req.slot;
    p.share_link = req.share_link;
    p.ai_assist = req.ai_assist;
    p.created_at = now;
    p.expires_at = now + config_.proposal_expiry_seconds;
    proposals_[p.session_id] = p;
    save_sessions();
    audit({{"event", "proposal_created"}, {"session_id", p.session_id}});
    out.proposal = p;
    return out;
  }

  SessionRecord accept_proposal(const TokenClaims& who, const std::string& session_id) {
    std::lock_guard lock(mu_);
    const std::int64_t now = clock_();
    if (sessions_.count(session_id)) fail(ErrorKind::kConflict, "session already scheduled");
    auto it = proposals_.find(session_id);
    if (it == proposals_.end()) fail(ErrorKind::kNotFound, "no pending proposal " + session_id);
    const Proposal p = it->second;
    if (who.subject != p.partner) fail(ErrorKind::kForbidden, "only the invited partner can accept");
    if (now >= p.expires_at) {
      proposals_.erase(it);
      save_sessions();
      audit({{"event", "proposal_expired"}, {"session_id", session_id}});
      fail(ErrorKind::kScheduling, "proposal " + session_id + " expired");
    }
    const ParticipantProfile& a = assessed(p.proposer);
    const ParticipantProfile& b = assessed(p.partner);
    require_free(a.participant_hash, p.slot, session_id);
    require_free(b.participant_hash, p.slot, session_id);
    RoundPlan plan = plan_rounds(SessionType::kPair, a.cluster->preferred_role,
                                 b.cluster->preferred_role, config_.base_round_minutes);
    SessionOptions opts{p.ai_assist, p.share_link,
                        {{a.participant_hash, a.cluster->cluster}, {b.participant_hash, b.cluster->cluster}}};
    SessionRecord s = create_session(session_id, std::move(plan), {p.proposer, p.partner}, p.slot,
                                     now, std::move(opts));
    proposals_.erase(session_id);
    sessions_[session_id] = s;
    save_sessions();
    audit({{"event", "proposal_accepted"}, {"session_id", session_id}});
    return s;
  }

  // ---- session protocol ------------------------------------------------

  SessionRecord session(const TokenClaims& who, const std::string& session_id) const {
    std::lock_guard lock(mu_);
    return visible_session(who, session_id);
  }

  std::vector<SessionRecord> sessions(const TokenClaims& who) const {
    std::lock_guard lock(mu_);
    std::vector<SessionRecord> out;
    for (const auto& [id, s] : sessions_) {
      if (who.admin() || s.has_participant(who.subject)) out.push_back(s);
    }
    return out;
  }

  std::vector<Proposal> proposals(const TokenClaims& who) const {
    std::lock_guard lock(mu_);
    std::vector<Proposal> out;
    for (const auto& [id, p] : proposals_) {
      if (who.admin() || p.proposer == who.subject || p.partner == who.subject) out.push_back(p);
    }
    return out;
  }

  RoundResult close_round(const TokenClaims& who, const std::string& session_id, int round,
                          double actual_minutes) {
    std::lock_guard lock(mu_);
    SessionRecord s = member_session(who, session_id);
    RoundResult r = roma::close_round(s, round, actual_minutes);
    commit(std::move(s));
    return r;
  }

  ImiResponse submit_imi(const TokenClaims& who, const std::string& session_id, int round,
                         const std::vector<int>& items,
                         const ImiReversedFlags& reversed = kDefaultImiReversed) {
    std::lock_guard lock(mu_);
    SessionRecord s = member_session(who, session_id);
    ImiResponse r = roma::submit_imi(s, round, who.subject, items, reversed);
    commit(std::move(s));
    return r;
  }

  void submit_feedback(const TokenClaims& who, const std::string& session_id, std::string text) {
    std::lock_guard lock(mu_);
    SessionRecord s = member_session(who, session_id);
    roma::submit_feedback(s, who.subject, std::move(text));
    commit(std::move(s));
  }

  /// Seals the session and anchors its memo. Repeated calls return the
  /// same memo and ledger span without appending again.
  FinalizeOutcome finalize(const TokenClaims& who, const std::string& session_id) {
    std::lock_guard lock(mu_);
    SessionRecord s = member_session(who, session_id);
    if (s.state == SessionState::kComplete && s.memo) {
      return {*s.memo, anchors_.at(session_id)};
    }
    const SessionMemo memo = finalize_session(s, clock_());
    const auto entries = ledger_->append_payloads(encode_memo(memo, config_.chunk_limit));
    const LedgerSpan span{entries.front().index, entries.back().index};
    anchors_[session_id] = span;
    commit(std::move(s));
    audit({{"event", "session_finalized"},
           {"session_id", session_id},
           {"first_index", span.first_index},
           {"last_index", span.last_index}});
    return {memo, span};
  }

  // ---- transparency & analysis -----------------------------------------

  /// Public, read-only. On a corrupt ledger only the verified prefix is
  /// summarized and the status carries the first bad index.
  Feed transparency_feed(std::size_t since = 0) const {
    const auto entries = ledger_->entries();
    Feed feed;
    feed.verify = ledger_->verify();
    feed.total_entries = entries.size();
    const std::size_t usable = feed.verify.ok ? entries.size()
                                              : std::min(entries.size(), feed.verify.first_bad_index);
    std::size_t i = 0;
    while (i < usable) {
      std::size_t count = 1;
      FeedItem item;
      try {
        const ChunkHeader head = parse_chunk_header(entries[i].payload);
        count = static_cast<std::size_t>(head.of);
        if (head.part != 1 || i + count > usable) break;
        std::vector<std::string> payloads;
        for (std::size_t k = 0; k < count; ++k) payloads.push_back(entries[i + k].payload);
        LedgerDocument doc{i, i + count - 1, decode_document(payloads)};
        item.kind = doc.kind();
        item.digest = doc.decoded.digest_hex;
        item.summary = detail::summarize(doc);
      } catch (const Error&) {
        break;
      }
      item.span = {i, i + count - 1};
      for (std::size_t k = i; k < i + count; ++k) {
        item.entry_hashes.push_back(to_hex(entries[k].entry_hash));
        item.tx_refs.push_back(entries[k].tx_ref);
      }
      item.appended_at = format_utc(entries[i + count - 1].appended_at);
      if (item.span.first_index >= since) feed.items.push_back(std::move(item));
      i += count;
    }
    return feed;
  }

  VerifyResult verify_ledger() const { return ledger_->verify(); }

  /// Admin only. Refused on a corrupt ledger. The report is persisted and
  /// anchored as an analysis memo; reports over an identical session set
  /// are byte-identical.
  AnalysisOutcome run_analysis(const TokenClaims& who) {
    std::lock_guard lock(mu_);
    if (!who.admin()) fail(ErrorKind::kForbidden, "analysis requires admin scope");
    const auto entries = ledger_->entries();
    const ObservationTable table = export_observations(entries);
    AnalysisOutcome out;
    out.report = stats::evaluate_hypotheses(table, table.clusters);
    out.canonical = stats::encode_report(out.report);
    detail::write_atomic(dir_ / "analysis_latest.json", out.canonical);
    Json doc = {{"kind", "analysis"},
                {"version", kAnalysisMemoVersion},
                {"source_entries", entries.size()},
                {"source_head", entries.empty() ? to_hex(kGenesisPrevHash)
                                                : to_hex(entries.back().entry_hash)},
                {"report", stats::to_json(out.report)}};
    const auto appended = ledger_->append_payloads(encode_document(doc, config_.chunk_limit));
    out.span = {appended.front().index, appended.back().index};
    audit({{"event", "analysis_run"},
           {"first_index", out.span.first_index},
           {"source_entries", entries.size()}});
    return out;
  }

  std::optional<std::string> latest_analysis() const {
    std::lock_guard lock(mu_);
    return detail::read_text(dir_ / "analysis_latest.json");
  }

 private:
  ParticipantProfile& profile_of(const std::string& hash) {
    auto it = profiles_.find(hash);
    if (it == profiles_.end()) fail(ErrorKind::kNotFound, "participant not registered");
    return it->second;
  }

  const ParticipantProfile& profile_of(const std::string& hash) const {
    auto it = profiles_.find(hash);
    if (it == profiles_.end()) fail(ErrorKind::kNotFound, "participant not registered");
    return it->second;
  }

  const ParticipantProfile& assessed(const std::string& hash) const {
    const ParticipantProfile& p = profile_of(hash);
    if (!p.cluster) {
      fail(ErrorKind::kPrecondition, "participant " + hash.substr(0, 12) + " has no assessment yet");
    }
    return p;
  }

  static MatchCandidate candidate_of(const ParticipantProfile& p) {
    return {p.participant_hash, p.cluster->preferred_role, p.experience_years, p.expertise_tags,
            p.availability};
  }

  static void require_available(const ParticipantProfile& p, const TimeSlot& slot) {
    for (const auto& a : p.availability) {
      if (a.contains(slot)) return;
    }
    fail(ErrorKind::kScheduling,
         "slot is outside the availability of participant " + p.participant_hash.substr(0, 12));
  }

  // Conflict if `who` already holds an open session or pending proposal
  // overlapping `slot`.
  void require_free(const std::string& who, const TimeSlot& slot,
                    const std::optional<std::string>& ignore) const {
    for (const auto& [id, s] : sessions_) {
      if (s.is_final() || !s.has_participant(who)) continue;
      if (s.scheduled_slot.overlaps(slot)) {
        fail(ErrorKind::kConflict, "double booking: overlaps session " + id);
      }
    }
    for (const auto& [id, p] : proposals_) {
      if (ignore && id == *ignore) continue;
      if ((p.proposer == who || p.partner == who) && p.slot.overlaps(slot)) {
        fail(ErrorKind::kConflict, "double booking: overlaps pending proposal " + id);
      }
    }
  }

  void purge_expired(std::int64_t now) {
    bool changed = false;
    for (auto it = proposals_.begin(); it != proposals_.end();) {
      if (now >= it->second.expires_at) {
        audit({{"event", "proposal_expired"}, {"session_id", it->first}});
        it = proposals_.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
    if (changed) save_sessions();
  }

  std::string next_session_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(++next_id_));
    return buf;
  }

  const SessionRecord& visible_session(const TokenClaims& who, const std::string& id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) fail(ErrorKind::kNotFound, "no session " + id);
    if (!who.admin() && !it->second.has_participant(who.subject)) {
      fail(ErrorKind::kForbidden, "not a participant of session " + id);
    }
    return it->second;
  }

  SessionRecord member_session(const TokenClaims& who, const std::string& id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      if (proposals_.count(id)) fail(ErrorKind::kSequencing, "session " + id + " awaits acceptance");
      fail(ErrorKind::kNotFound, "no session " + id);
    }
    if (!it->second.has_participant(who.subject)) {
      fail(ErrorKind::kForbidden, "not a participant of session " + id);
    }
    return it->second;
  }

  void commit(SessionRecord s) {
    const std::string id = s.session_id;
    sessions_[id] = std::move(s);
    save_sessions();
  }

  // ---- persistence -----------------------------------------------------

  std::string load_secret() {
    if (!config_.token_secret.empty()) return config_.token_secret;
    const auto path = dir_ / "token.key";
    if (auto text = detail::read_text(path)) {
      if (auto bytes = from_hex(*text); bytes && bytes->size() == 32) {
        return std::string(bytes->begin(), bytes->end());
      }
      fail(ErrorKind::kConfig, "token.key is malformed");
    }
    const std::string key = random_bytes(32);
    detail::write_atomic(path, detail::hex_of(key));
    std::filesystem::permissions(path, std::filesystem::perms::owner_read |
                                           std::filesystem::perms::owner_write);
    return key;
  }

  void load_state() {
    try {
      if (auto text = detail::read_text(dir_ / "profiles.json")) {
        const Json doc = Json::parse(*text);
        for (const auto& j : doc.at("profiles")) {
          ParticipantProfile p = profile_from_json(j);
          profiles_[p.participant_hash] = std::move(p);
        }
      }
      if (auto text = detail::read_text(dir_ / "sessions.json")) {
        const Json j = Json::parse(*text);
        next_id_ = j.at("next_id").get<std::uint64_t>();
        for (const auto& js : j.at("sessions")) {
          SessionRecord s = session_from_json(js);
          sessions_[s.session_id] = std::move(s);
        }
        for (const auto& jp : j.at("proposals")) {
          Proposal p = proposal_from_json(jp);
          proposals_[p.session_id] = std::move(p);
        }
        for (const auto& [id, span] : j.at("anchors").items()) {
          anchors_[id] = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
        }
      }
    } catch (const Json::exception& e) {
      fail(ErrorKind::kCorrupt, std::string("service state in ") + dir_.string() + " is unreadable: " + e.what());
    }
  }

  void save_profiles() const {
    Json list = Json::array();
    for (const auto& [hash, p] : profiles_) list.push_back(profile_to_json(p));
    detail::write_atomic(dir_ / "profiles.json", canonical_dump(Json{{"profiles", list}}));
  }

  void save_sessions() const {
    Json sessions = Json::array();
    for (const auto& [id, s] : sessions_) sessions.push_back(session_to_json(s));
    Json proposals = Json::array();
    for (const auto& [id, p] : proposals_) proposals.push_back(proposal_to_json(p));
    Json anchors = Json::object();
    for (const auto& [id, span] : anchors_) anchors[id] = {span.first_index, span.last_index};
    detail::write_atomic(dir_ / "sessions.json",
                         canonical_dump(Json{{"next_id", next_id_},
                                             {"sessions", sessions},
                                             {"proposals", proposals},
                                             {"anchors", anchors}}));
  }

  void audit(Json event) const {
    event["at"] = format_utc(clock_());
    std::ofstream out(dir_ / "audit.jsonl", std::ios::binary | std::ios::app);
    out << canonical_dump(event) << '\n';
  }

  ServiceConfig config_;
  Clock clock_;
  std::filesystem::path dir_;
  std::string secret_;
  mutable std::mutex mu_;
  std::unique_ptr<Ledger> ledger_;
  std::map<std::string, ParticipantProfile> profiles_;
  std::map<std::string, SessionRecord> sessions_;
  std::map<std::string, Proposal> proposals_;
  std::map<std::string, LedgerSpan> anchors_;
  std::uint64_t next_id_ = 0;
};

}  // namespace roma::service
