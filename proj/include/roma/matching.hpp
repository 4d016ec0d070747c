#pragma once

// Partner ranking by ROMA role fit, experience and calendar overlap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "roma/error.hpp"
#include "roma/roles.hpp"

namespace roma {

/// Half-open UTC interval [start, start + duration).
struct TimeSlot {
  std::int64_t start = 0;  // unix seconds
  int duration_minutes = 0;

  std::int64_t end() const { return start + std::int64_t{duration_minutes} * 60; }
  bool contains(const TimeSlot& other) const {
    return other.start >= start && other.end() <= end();
  }
  bool overlaps(const TimeSlot& other) const {
    return start < other.end() && other.start < end();
  }

  bool operator==(const TimeSlot&) const = default;
};

inline double overlap_minutes(const TimeSlot& a, const TimeSlot& b) {
  const std::int64_t lo = std::max(a.start, b.start);
  const std::int64_t hi = std::min(a.end(), b.end());
  return hi > lo ? static_cast<double>(hi - lo) / 60.0 : 0.0;
}

/// Slots are non-overlapping per candidate, so pairwise intersections add up.
inline double overlap_minutes(const std::vector<TimeSlot>& a, const std::vector<TimeSlot>& b) {
  double total = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) total += overlap_minutes(x, y);
  }
  return total;
}

inline void validate_availability(const std::vector<TimeSlot>& slots) {
  for (const auto& s : slots) {
    if (s.duration_minutes <= 0) {
      fail(ErrorKind::kValidation, "availability slot must have positive duration");
    }
  }
  std::vector<TimeSlot> sorted = slots;
  std::sort(sorted.begin(), sorted.end(),
            [](const TimeSlot& x, const TimeSlot& y) { return x.start < y.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1].overlaps(sorted[i])) {
      fail(ErrorKind::kValidation, "availability slots overlap");
    }
  }
}

struct MatchCandidate {
  std::string participant_ref;
  Role preferred_role = Role::kPilot;
  double experience_years = 0.0;
  std::set<std::string> expertise_tags;
  std::vector<TimeSlot> availability;
};

inline void validate(const MatchCandidate& c) {
  if (!(c.experience_years >= 0.0) || !std::isfinite(c.experience_years)) {
    fail(ErrorKind::kValidation, "experience_years must be a non-negative number");
  }
  validate_availability(c.availability);
}

struct MatchWeights {
  double role = 0.5;
  double expertise = 0.3;
  double availability = 0.2;

  bool operator==(const MatchWeights&) const = default;
};

inline void validate(const MatchWeights& w) {
  if (!(w.role >= 0 && w.expertise >= 0 && w.availability >= 0)) {
    fail(ErrorKind::kContract, "match weights must be non-negative");
  }
  if (std::abs(w.role + w.expertise + w.availability - 1.0) > 1e-9) {
    fail(ErrorKind::kContract, "match weights must sum to 1");
  }
}

struct MatchParams {
  MatchWeights weights;
  double experience_normalizer_years = 10.0;
  double overlap_normalizer_minutes = 90.0;  // one 6 x 15 min session
};

struct MatchScore {
  double total = 0.0;
  double role_component = 0.0;
  double expertise_component = 0.0;
  double availability_component = 0.0;
  MatchWeights weights;
};

inline double role_fit(Role a, Role b) {
  if (a == Role::kSolo || b == Role::kSolo) return 0.25;
  return a == b ? 0.5 : 1.0;
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

/// Navigators should not be the less experienced member: when exactly one
/// member prefers NAVIGATOR, the gap only costs if that member trails.
inline double expertise_fit(const MatchCandidate& a, const MatchCandidate& b,
                            double normalizer_years) {
  const bool a_nav = a.preferred_role == Role::kNavigator;
  const bool b_nav = b.preferred_role == Role::kNavigator;
  if (a_nav != b_nav) {
    const MatchCandidate& nav = a_nav ? a : b;
    const MatchCandidate& other = a_nav ? b : a;
    if (nav.experience_years >= other.experience_years) return 1.0;
    return std::max(0.0, 1.0 - (other.experience_years - nav.experience_years) / normalizer_years);
  }
  return clamp01(1.0 - std::abs(a.experience_years - b.experience_years) / normalizer_years);
}

inline MatchScore score_match(const MatchCandidate& requester, const MatchCandidate& candidate,
                              const MatchParams& params = {}) {
  validate(params.weights);
  if (!(params.experience_normalizer_years > 0) || !(params.overlap_normalizer_minutes > 0)) {
    fail(ErrorKind::kContract, "match normalizers must be positive");
  }
  MatchScore s;
  s.weights = params.weights;
  s.role_component = role_fit(requester.preferred_role, candidate.preferred_role);
  s.expertise_component = expertise_fit(requester, candidate, params.experience_normalizer_years);
  s.availability_component =
      clamp01(overlap_minutes(requester.availability, candidate.availability) /
              params.overlap_normalizer_minutes);
  s.total = params.weights.role * s.role_component +
            params.weights.expertise * s.expertise_component +
            params.weights.availability * s.availability_component;
  return s;
}

struct RankedMatch {
  MatchCandidate candidate;
  MatchScore score;
};

/// Top-k by total, then availability component, then participant_ref.
inline std::vector<RankedMatch> match_partners(const MatchCandidate& requester,
                                               const std::vector<MatchCandidate>& pool,
                                               std::size_t k, const MatchParams& params = {}) {
  std::vector<RankedMatch> ranked;
  ranked.reserve(pool.size());
  for (const auto& c : pool) {
    if (c.participant_ref == requester.participant_ref) continue;
    ranked.push_back({c, score_match(requester, c, params)});
  }
  auto better = [](const RankedMatch& x, const RankedMatch& y) {
    if (x.score.total != y.score.total) return x.score.total > y.score.total;
    if (x.score.availability_component != y.score.availability_component) {
      return x.score.availability_component > y.score.availability_component;
    }
    return x.candidate.participant_ref < y.candidate.participant_ref;
  };
  const std::size_t n = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(),
                    better);
  ranked.resize(n);
  return ranked;
}

}  // namespace roma
