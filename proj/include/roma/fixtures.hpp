#pragma once

// Deterministic study fixtures: four participants, each with two pair
// sessions and one solo session of six rounds (72 observation rows).
// Memos are produced through the session protocol, not assembled by hand.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roma/crypto.hpp"
#include "roma/imi.hpp"
#include "roma/memo.hpp"
#include "roma/personality.hpp"
#include "roma/rounds.hpp"
#include "roma/session.hpp"
#include "roma/time.hpp"

namespace roma::fixtures {

inline constexpr std::int64_t kStudyStart = 1709542800;  // 2024-03-04T09:00:00Z
inline constexpr std::int64_t kDaySeconds = 86400;
inline constexpr std::array<double, kRoundsPerSession> kRoundMinutes = {14, 15, 16, 15, 14, 16};
inline constexpr std::array<std::pair<int, int>, 4> kPairSchedule = {{{0, 1}, {2, 3}, {0, 2}, {1, 3}}};

/// Per-participant six-round IMI sums (after reversal) for each role.
/// motivation mean over the six rounds = total / 28 - 0.5.
struct RoleTotals {
  int pilot = 0;
  int navigator = 0;
  int solo = 0;
};

/// Totals whose role-level means and sds round to 8.45 (0.76),
/// 7.01 (0.63) and 6.87 (1.17).
inline constexpr std::array<RoleTotals, 4> kTableTwoTotals = {{
    {220, 193, 166},
    {253, 202, 193},
    {260, 212, 232},
    {269, 234, 234},
}};

struct StudyParticipant {
  std::string code;
  std::string hash;
  Bfi10Response bfi;
  ClusterAssignment assignment;
};

struct Study {
  std::vector<StudyParticipant> participants;
  std::vector<SessionMemo> memos;
};

inline std::string participant_code(std::size_t i) {
  return (i < 9 ? "p0" : "p") + std::to_string(i + 1);
}

/// Openness at the ceiling, everything else neutral.
inline Bfi10Response high_openness_response() { return {{3, 3, 3, 3, 1, 3, 3, 3, 3, 5}}; }

/// Spreads a total as evenly as possible over n parts, larger parts first.
inline std::vector<int> split_even(int total, int n) {
  std::vector<int> parts(static_cast<std::size_t>(n), total / n);
  for (int i = 0; i < total % n; ++i) parts[static_cast<std::size_t>(i)] += 1;
  return parts;
}

/// Raw 7-point answers whose scored sum (item 4 reversed) equals `sum`.
inline std::vector<int> items_for_sum(int sum) {
  if (sum < static_cast<int>(kImiItemCount) || sum > 7 * static_cast<int>(kImiItemCount)) {
    fail(ErrorKind::kContract, "IMI sum out of range");
  }
  std::vector<int> scored = split_even(sum, kImiItemCount);
  std::vector<int> raw(scored.begin(), scored.end());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (kDefaultImiReversed[i]) raw[i] = 8 - scored[i];
  }
  return raw;
}

namespace detail {

// Supplies the scored IMI sum for (participant, role, n-th round in that role).
using SumSource = std::function<int(std::size_t participant, Role role, int ordinal)>;
using MinutesSource = std::function<double(int session, int round)>;

inline SessionRecord run_session(const std::string& id, SessionType type,
                                 const std::vector<std::size_t>& who, const Study& study,
                                 std::int64_t start, const SumSource& sums,
                                 std::map<std::pair<std::size_t, Role>, int>& ordinals,
                                 const MinutesSource& minutes, int session_no) {
  std::vector<std::string> hashes;
  std::map<std::string, Cluster> clusters;
  for (std::size_t p : who) {
    hashes.push_back(study.participants[p].hash);
    clusters[study.participants[p].hash] = study.participants[p].assignment.cluster;
  }
  const Role pref_a = study.participants[who[0]].assignment.preferred_role;
  std::optional<Role> pref_b;
  if (who.size() == 2) pref_b = study.participants[who[1]].assignment.preferred_role;
  RoundPlan plan = plan_rounds(type, pref_a, pref_b);
  SessionOptions options;
  options.clusters = clusters;
  SessionRecord s = create_session(id, std::move(plan), hashes, TimeSlot{start, 120}, start - 3600,
                                   std::move(options));
  for (int r = 1; r <= kRoundsPerSession; ++r) {
    close_round(s, r, minutes(session_no, r));
    for (std::size_t k = 0; k < who.size(); ++k) {
      const Role role = s.plan.role_of(k, r);
      const int ordinal = ordinals[{who[k], role}]++;
      submit_imi(s, r, hashes[k], items_for_sum(sums(who[k], role, ordinal)));
    }
  }
  for (const auto& h : hashes) submit_feedback(s, h, "Session " + id + " completed.");
  finalize_session(s, start + 3 * 3600);
  return s;
}

inline Study run_design(std::vector<StudyParticipant> participants, const SumSource& sums,
                        const MinutesSource& minutes) {
  Study study;
  study.participants = std::move(participants);
  std::map<std::pair<std::size_t, Role>, int> ordinals;
  int n = 0;
  for (const auto& [a, b] : kPairSchedule) {
    const std::string id = "pair-" + std::to_string(n + 1);
    SessionRecord s = run_session(id, SessionType::kPair,
                                  {static_cast<std::size_t>(a), static_cast<std::size_t>(b)}, study,
                                  kStudyStart + n * kDaySeconds, sums, ordinals, minutes, n);
    study.memos.push_back(*s.memo);
    ++n;
  }
  for (std::size_t p = 0; p < study.participants.size(); ++p) {
    const std::string id = "solo-" + std::to_string(p + 1);
    SessionRecord s = run_session(id, SessionType::kSolo, {p}, study,
                                  kStudyStart + n * kDaySeconds, sums, ordinals, minutes, n);
    study.memos.push_back(*s.memo);
    ++n;
  }
  return study;
}

inline StudyParticipant make_participant(std::size_t i, Bfi10Response bfi) {
  StudyParticipant p;
  p.code = participant_code(i);
  p.hash = anonymize_id(p.code);
  p.bfi = std::move(bfi);
  p.assignment = assess(p.bfi);
  return p;
}

}  // namespace detail

/// Table II design: every participant is high-Openness (Cluster 1, prefers
/// PILOT), so pair sessions alternate 3/3 and each participant collects six
/// rounds per role.
inline Study table2_study() {
  std::vector<StudyParticipant> people;
  for (std::size_t i = 0; i < kTableTwoTotals.size(); ++i) {
    people.push_back(detail::make_participant(i, high_openness_response()));
  }
  std::map<std::pair<std::size_t, Role>, std::vector<int>> per_round;
  for (std::size_t i = 0; i < kTableTwoTotals.size(); ++i) {
    per_round[{i, Role::kPilot}] = split_even(kTableTwoTotals[i].pilot, kRoundsPerSession);
    per_round[{i, Role::kNavigator}] = split_even(kTableTwoTotals[i].navigator, kRoundsPerSession);
    per_round[{i, Role::kSolo}] = split_even(kTableTwoTotals[i].solo, kRoundsPerSession);
  }
  auto sums = [&](std::size_t p, Role role, int ordinal) {
    return per_round.at({p, role}).at(static_cast<std::size_t>(ordinal));
  };
  auto minutes = [](int, int round) { return kRoundMinutes[static_cast<std::size_t>(round - 1)]; };
  return detail::run_design(std::move(people), sums, minutes);
}

inline std::vector<SessionMemo> table2_memos() { return table2_study().memos; }

/// Same design with seeded random personalities, answers and round lengths.
inline Study simulated_study(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> likert5(1, 5);
  std::vector<StudyParticipant> people;
  for (std::size_t i = 0; i < 4; ++i) {
    Bfi10Response bfi;
    for (int k = 0; k < 10; ++k) bfi.items.push_back(likert5(rng));
    people.push_back(detail::make_participant(i, std::move(bfi)));
  }
  std::uniform_int_distribution<int> imi_sum(static_cast<int>(kImiItemCount), 7 * static_cast<int>(kImiItemCount));
  std::uniform_int_distribution<int> round_minutes(kMinRoundMinutes, kMaxRoundMinutes);
  std::map<std::pair<std::size_t, Role>, std::vector<int>> drawn;
  for (std::size_t p = 0; p < people.size(); ++p) {
    for (Role role : {Role::kPilot, Role::kNavigator, Role::kSolo}) {
      auto& v = drawn[{p, role}];
      for (int k = 0; k < 3 * kRoundsPerSession; ++k) v.push_back(imi_sum(rng));
    }
  }
  std::vector<std::array<double, kRoundsPerSession>> mins(kPairSchedule.size() + people.size());
  for (auto& row : mins) {
    for (auto& m : row) m = round_minutes(rng);
  }
  auto sums = [&](std::size_t p, Role role, int ordinal) {
    return drawn.at({p, role}).at(static_cast<std::size_t>(ordinal));
  };
  auto minutes = [&](int session, int round) {
    return mins[static_cast<std::size_t>(session)][static_cast<std::size_t>(round - 1)];
  };
  return detail::run_design(std::move(people), sums, minutes);
}

inline std::vector<SessionMemo> simulated_memos(std::uint64_t seed) {
  return simulated_study(seed).memos;
}

}  // namespace roma::fixtures
