#pragma once

// Experimental session state machine:
//   SCHEDULED -> IN_PROGRESS (first round closed) -> COMPLETE (finalized)
// with ABORTED reachable from any state before COMPLETE.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roma/error.hpp"
#include "roma/imi.hpp"
#include "roma/matching.hpp"
#include "roma/memo.hpp"
#include "roma/roles.hpp"
#include "roma/rounds.hpp"
#include "roma/time.hpp"

namespace roma {

enum class SessionState { kScheduled, kInProgress, kComplete, kAborted };

constexpr std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::kScheduled: return "SCHEDULED";
    case SessionState::kInProgress: return "IN_PROGRESS";
    case SessionState::kComplete: return "COMPLETE";
    case SessionState::kAborted: return "ABORTED";
  }
  return "?";
}

inline SessionState parse_session_state(std::string_view text) {
  for (auto s : {SessionState::kScheduled, SessionState::kInProgress, SessionState::kComplete,
                 SessionState::kAborted}) {
    if (to_string(s) == text) return s;
  }
  fail(ErrorKind::kValidation, "unknown session state '" + std::string(text) + "'");
}

struct RoundResult {
  int index = 1;
  double actual_minutes = kDefaultRoundMinutes;
  std::map<std::string, Role> roles;
  std::map<std::string, ImiResponse> imi;

  bool operator==(const RoundResult&) const = default;
};

struct SessionRecord {
  std::string session_id;
  SessionType session_type = SessionType::kSolo;
  std::vector<std::string> participant_hashes;
  RoundPlan plan;
  SessionState state = SessionState::kScheduled;
  std::vector<RoundResult> rounds_done;
  std::map<std::string, std::string> feedback;
  bool ai_assist = false;
  std::optional<std::string> share_link;
  TimeSlot scheduled_slot;
  std::map<std::string, Cluster> clusters;
  // Present once finalized; later finalize calls return it unchanged.
  std::optional<SessionMemo> memo;

  bool operator==(const SessionRecord&) const = default;

  bool has_participant(std::string_view hash) const {
    return std::find(participant_hashes.begin(), participant_hashes.end(), hash) !=
           participant_hashes.end();
  }

  std::size_t participant_position(std::string_view hash) const {
    auto it = std::find(participant_hashes.begin(), participant_hashes.end(), hash);
    if (it == participant_hashes.end()) {
      fail(ErrorKind::kAuthorization, "participant does not belong to session " + session_id);
    }
    return static_cast<std::size_t>(it - participant_hashes.begin());
  }

  bool is_final() const {
    return state == SessionState::kComplete || state == SessionState::kAborted;
  }
};

namespace detail {

inline void require_mutable(const SessionRecord& s) {
  if (s.state == SessionState::kComplete) {
    fail(ErrorKind::kImmutable, "session " + s.session_id + " is finalized");
  }
  if (s.state == SessionState::kAborted) {
    fail(ErrorKind::kImmutable, "session " + s.session_id + " was aborted");
  }
}

}  // namespace detail

struct SessionOptions {
  bool ai_assist = false;
  std::optional<std::string> share_link;
  std::map<std::string, Cluster> clusters;
};

inline SessionRecord create_session(std::string session_id, RoundPlan plan,
                                    std::vector<std::string> participants, TimeSlot slot,
                                    std::int64_t now, SessionOptions options = {}) {
  if (!is_valid_session_id(session_id)) fail(ErrorKind::kValidation, "invalid session id");
  validate(plan);
  const std::size_t needed = plan.session_type == SessionType::kPair ? 2 : 1;
  if (participants.size() != needed) {
    fail(ErrorKind::kContract, std::string(to_string(plan.session_type)) + " session needs " +
                                   std::to_string(needed) + " participant(s), got " +
                                   std::to_string(participants.size()));
  }
  for (const auto& p : participants) {
    if (!is_lower_hex_digest(p)) {
      fail(ErrorKind::kValidation, "participants must be anonymized SHA-256 ids");
    }
  }
  if (needed == 2 && participants[0] == participants[1]) {
    fail(ErrorKind::kContract, "a participant cannot pair with themselves");
  }
  if (slot.duration_minutes <= 0) fail(ErrorKind::kValidation, "slot needs a positive duration");
  if (slot.start <= now) fail(ErrorKind::kContract, "session slot must lie in the future");
  for (const auto& [who, c] : options.clusters) {
    (void)c;
    if (std::find(participants.begin(), participants.end(), who) == participants.end()) {
      fail(ErrorKind::kContract, "cluster given for a non-participant");
    }
  }

  SessionRecord s;
  s.session_id = std::move(session_id);
  s.session_type = plan.session_type;
  s.participant_hashes = std::move(participants);
  s.plan = std::move(plan);
  s.scheduled_slot = slot;
  s.ai_assist = options.ai_assist;
  s.share_link = std::move(options.share_link);
  s.clusters = std::move(options.clusters);
  return s;
}

/// Records the duration of the next round. Rounds close strictly in order.
inline const RoundResult& close_round(SessionRecord& s, int round_index, double actual_minutes) {
  detail::require_mutable(s);
  const int next = static_cast<int>(s.rounds_done.size()) + 1;
  if (next > kRoundsPerSession) fail(ErrorKind::kSequencing, "all six rounds are already closed");
  if (round_index != next) {
    fail(ErrorKind::kSequencing, "round " + std::to_string(round_index) +
                                     " cannot close; next round is " + std::to_string(next));
  }
  if (!(actual_minutes >= kMinRoundMinutes && actual_minutes <= kMaxRoundMinutes)) {
    fail(ErrorKind::kValidation, "actual minutes must be within [12,18]");
  }
  RoundResult r;
  r.index = round_index;
  r.actual_minutes = actual_minutes;
  for (std::size_t p = 0; p < s.participant_hashes.size(); ++p) {
    r.roles[s.participant_hashes[p]] = s.plan.role_of(p, round_index);
  }
  s.rounds_done.push_back(std::move(r));
  s.state = SessionState::kInProgress;
  return s.rounds_done.back();
}

/// Stores a participant's IMI answers for a closed round. Resubmission
/// replaces the answers and bumps the revision counter.
inline ImiResponse submit_imi(SessionRecord& s, int round_index, const std::string& participant,
                              std::span<const int> items,
                              const ImiReversedFlags& reversed = kDefaultImiReversed) {
  detail::require_mutable(s);
  if (!s.has_participant(participant)) {
    fail(ErrorKind::kAuthorization, "participant does not belong to session " + s.session_id);
  }
  if (s.state != SessionState::kInProgress) {
    fail(ErrorKind::kSequencing, "IMI accepted only while the session is in progress");
  }
  if (round_index < 1 || round_index > kRoundsPerSession) {
    fail(ErrorKind::kValidation, "round index must be in 1..6");
  }
  if (round_index > static_cast<int>(s.rounds_done.size())) {
    fail(ErrorKind::kSequencing, "round " + std::to_string(round_index) + " is not closed yet");
  }
  ImiResponse response = score_imi(items, reversed);
  auto& slot = s.rounds_done[static_cast<std::size_t>(round_index - 1)].imi;
  auto it = slot.find(participant);
  if (it != slot.end()) response.revision = it->second.revision + 1;
  slot[participant] = response;
  return response;
}

inline void submit_feedback(SessionRecord& s, const std::string& participant, std::string text) {
  detail::require_mutable(s);
  if (!s.has_participant(participant)) {
    fail(ErrorKind::kAuthorization, "participant does not belong to session " + s.session_id);
  }
  if (s.rounds_done.size() != kRoundsPerSession) {
    fail(ErrorKind::kSequencing, "feedback opens after round 6 closes");
  }
  if (text.size() > kMaxFeedbackBytes) {
    fail(ErrorKind::kValidation, "feedback is " + std::to_string(text.size()) +
                                     " bytes; limit is 4096");
  }
  if (!is_valid_utf8(text)) fail(ErrorKind::kValidation, "feedback must be valid UTF-8");
  s.feedback[participant] = std::move(text);
}

inline void abort_session(SessionRecord& s) {
  detail::require_mutable(s);
  s.state = SessionState::kAborted;
}

/// Everything still missing before the session can be finalized.
inline std::vector<std::string> completeness_gaps(const SessionRecord& s) {
  std::vector<std::string> gaps;
  for (int i = static_cast<int>(s.rounds_done.size()) + 1; i <= kRoundsPerSession; ++i) {
    gaps.push_back("round " + std::to_string(i) + " not closed");
  }
  for (const auto& r : s.rounds_done) {
    for (const auto& p : s.participant_hashes) {
      if (!r.imi.count(p)) {
        gaps.push_back("IMI missing for round " + std::to_string(r.index) + " participant " +
                       p.substr(0, 12));
      }
    }
  }
  for (const auto& p : s.participant_hashes) {
    if (!s.feedback.count(p)) gaps.push_back("feedback missing from participant " + p.substr(0, 12));
  }
  return gaps;
}

inline SessionMemo build_memo(const SessionRecord& s, std::int64_t finalized_at) {
  SessionMemo m;
  m.session_id = s.session_id;
  m.session_type = s.session_type;
  m.participant_hashes = s.participant_hashes;
  m.ai_assist = s.ai_assist;
  m.feedback = s.feedback;
  m.clusters = s.clusters;
  m.finalized_at = format_utc(finalized_at);
  for (const auto& r : s.rounds_done) {
    MemoRound mr;
    mr.index = r.index;
    mr.actual_minutes = quantize6(r.actual_minutes);
    for (const auto& p : s.participant_hashes) {
      const ImiResponse& imi = r.imi.at(p);
      mr.entries.push_back({r.roles.at(p), quantize6(imi.motivation_scaled), imi.items,
                            reversed_indices(imi.reversed), imi.revision});
    }
    m.rounds.push_back(std::move(mr));
  }
  return m;
}

/// Seals the session and returns its memo. Calling again on a COMPLETE
/// session returns the identical memo.
inline const SessionMemo& finalize_session(SessionRecord& s, std::int64_t now) {
  if (s.state == SessionState::kComplete && s.memo) return *s.memo;
  detail::require_mutable(s);
  const auto gaps = completeness_gaps(s);
  if (!gaps.empty()) {
    std::string msg = "session " + s.session_id + " incomplete:";
    for (const auto& g : gaps) msg += " [" + g + "]";
    fail(ErrorKind::kCompleteness, msg);
  }
  SessionMemo memo = build_memo(s, now);
  validate(memo);
  s.memo = std::move(memo);
  s.state = SessionState::kComplete;
  return *s.memo;
}

}  // namespace roma
