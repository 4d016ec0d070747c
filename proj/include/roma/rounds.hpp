#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "roma/error.hpp"
#include "roma/roles.hpp"

namespace roma {

inline constexpr int kRoundsPerSession = 6;
inline constexpr int kMinRoundMinutes = 12;
inline constexpr int kMaxRoundMinutes = 18;
inline constexpr int kDefaultRoundMinutes = 15;

/// role_a belongs to the first participant, role_b to the second (PAIR only).
struct PlannedRound {
  int index = 1;
  Role role_a = Role::kSolo;
  std::optional<Role> role_b;
  int planned_minutes = kDefaultRoundMinutes;

  bool operator==(const PlannedRound&) const = default;
};

struct RoundPlan {
  SessionType session_type = SessionType::kSolo;
  std::vector<PlannedRound> rounds;
  // Set when a Solo-preferring participant was placed in a PAIR plan.
  bool solo_preference_warning = false;

  bool operator==(const RoundPlan&) const = default;

  /// Role held by participant 0 or 1 in the given (1-based) round.
  Role role_of(std::size_t participant, int round_index) const {
    const PlannedRound& r = rounds.at(static_cast<std::size_t>(round_index - 1));
    if (participant == 0) return r.role_a;
    if (!r.role_b) fail(ErrorKind::kContract, "SOLO plan has no second participant");
    return *r.role_b;
  }

  int count(std::size_t participant, Role role) const {
    int n = 0;
    for (const auto& r : rounds) n += role_of(participant, r.index) == role ? 1 : 0;
    return n;
  }
};

inline void validate(const RoundPlan& plan) {
  if (plan.rounds.size() != kRoundsPerSession) {
    fail(ErrorKind::kValidation, "round plan must have exactly 6 rounds");
  }
  for (std::size_t i = 0; i < plan.rounds.size(); ++i) {
    const auto& r = plan.rounds[i];
    if (r.index != static_cast<int>(i) + 1) {
      fail(ErrorKind::kValidation, "round indices must run 1..6 in order");
    }
    if (r.planned_minutes < kMinRoundMinutes || r.planned_minutes > kMaxRoundMinutes) {
      fail(ErrorKind::kValidation, "planned minutes outside [12,18] in round " +
                                       std::to_string(r.index));
    }
    if (plan.session_type == SessionType::kSolo) {
      if (r.role_a != Role::kSolo || r.role_b) {
        fail(ErrorKind::kValidation, "SOLO rounds hold exactly one SOLO role");
      }
    } else {
      if (!r.role_b || !is_pair_role(r.role_a) || !is_pair_role(*r.role_b) ||
          r.role_a == *r.role_b) {
        fail(ErrorKind::kValidation, "PAIR round " + std::to_string(r.index) +
                                         " needs one PILOT and one NAVIGATOR");
      }
    }
  }
}

namespace detail {

// Preferred-role rounds under the 2:1 double-time allocation.
inline constexpr std::array<bool, 6> kDoubleTimeMask = {true, true, false, true, true, false};

}  // namespace detail

/// Builds the six-round plan for a session.
///
/// SOLO sessions get six SOLO rounds. In a PAIR, complementary preferences
/// give each participant their preferred role in rounds 1, 2, 4, 5 (double
/// time by round count); identical preferences alternate 3/3 with
/// participant A starting in the shared role. A SOLO preference inside a
/// PAIR counts as no preference and raises the warning flag.
inline RoundPlan plan_rounds(SessionType type, Role pref_a, std::optional<Role> pref_b,
                             int base_minutes = kDefaultRoundMinutes) {
  if (base_minutes < kMinRoundMinutes || base_minutes > kMaxRoundMinutes) {
    fail(ErrorKind::kContract, "base_minutes must be in [12,18], got " +
                                   std::to_string(base_minutes));
  }
  RoundPlan plan;
  plan.session_type = type;
  plan.rounds.reserve(kRoundsPerSession);

  if (type == SessionType::kSolo) {
    for (int i = 1; i <= kRoundsPerSession; ++i) {
      plan.rounds.push_back({i, Role::kSolo, std::nullopt, base_minutes});
    }
    return plan;
  }

  if (!pref_b) fail(ErrorKind::kContract, "PAIR plan requires the partner's preference");

  const bool a_pairs = is_pair_role(pref_a);
  const bool b_pairs = is_pair_role(*pref_b);
  plan.solo_preference_warning = !a_pairs || !b_pairs;

  // Participant A's role in rounds where A gets the "lead" slot.
  auto push = [&](int index, Role a_role) {
    plan.rounds.push_back({index, a_role, other_pair_role(a_role), base_minutes});
  };

  if (a_pairs && b_pairs && pref_a != *pref_b) {
    // B's preference is A's complement, so one mask serves both.
    for (int i = 0; i < kRoundsPerSession; ++i) {
      push(i + 1, detail::kDoubleTimeMask[i] ? pref_a : other_pair_role(pref_a));
    }
    return plan;
  }

  if (a_pairs != b_pairs) {
    // Exactly one participant wants a pair role: they get double time in it.
    const bool a_leads = a_pairs;
    const Role wanted = a_leads ? pref_a : *pref_b;
    for (int i = 0; i < kRoundsPerSession; ++i) {
      const bool preferred_round = detail::kDoubleTimeMask[i];
      const Role leader_role = preferred_round ? wanted : other_pair_role(wanted);
      push(i + 1, a_leads ? leader_role : other_pair_role(leader_role));
    }
    return plan;
  }

  // Identical pair preferences, or both prefer SOLO: strict alternation.
  const Role shared = a_pairs ? pref_a : Role::kPilot;
  for (int i = 0; i < kRoundsPerSession; ++i) {
    push(i + 1, i % 2 == 0 ? shared : other_pair_role(shared));
  }
  return plan;
}

}  // namespace roma
