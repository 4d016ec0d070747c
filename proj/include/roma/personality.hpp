#pragma once

// BFI-10 scoring, 1-5 -> 1-10 rescaling and ROMA cluster assignment.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roma/error.hpp"
#include "roma/roles.hpp"

namespace roma {

enum class Trait {
  kOpenness,
  kConscientiousness,
  kExtraversion,
  kAgreeableness,
  kNeuroticism,
};

inline constexpr std::array<Trait, 5> kAllTraits = {
    Trait::kOpenness, Trait::kConscientiousness, Trait::kExtraversion,
    Trait::kAgreeableness, Trait::kNeuroticism};

constexpr std::string_view to_string(Trait trait) {
  switch (trait) {
    case Trait::kOpenness: return "OPENNESS";
    case Trait::kConscientiousness: return "CONSCIENTIOUSNESS";
    case Trait::kExtraversion: return "EXTRAVERSION";
    case Trait::kAgreeableness: return "AGREEABLENESS";
    case Trait::kNeuroticism: return "NEUROTICISM";
  }
  return "?";
}

inline Trait parse_trait(std::string_view text) {
  for (Trait t : kAllTraits) {
    if (to_string(t) == text) return t;
  }
  fail(ErrorKind::kValidation, "unknown trait '" + std::string(text) + "'");
}

enum class TraitScale { kRaw1To5, kScaled1To10 };

constexpr std::string_view to_string(TraitScale scale) {
  return scale == TraitScale::kRaw1To5 ? "RAW_1_5" : "SCALED_1_10";
}

constexpr double scale_min(TraitScale) { return 1.0; }
constexpr double scale_max(TraitScale scale) {
  return scale == TraitScale::kRaw1To5 ? 5.0 : 10.0;
}

/// Big Five scores on a declared scale. Construction validates bounds, so a
/// TraitVector in hand is always consistent with its scale tag.
class TraitVector {
 public:
  TraitVector(TraitScale scale, std::array<double, 5> values) : scale_(scale), values_(values) {
    for (Trait t : kAllTraits) {
      double v = values_[index(t)];
      if (!(v >= scale_min(scale_) && v <= scale_max(scale_))) {
        fail(ErrorKind::kValidation, std::string(to_string(t)) + " = " + std::to_string(v) +
                                         " outside " + std::string(to_string(scale_)));
      }
    }
  }

  /// Values in O, C, E, A, N order.
  static TraitVector raw(double o, double c, double e, double a, double n) {
    return TraitVector(TraitScale::kRaw1To5, {o, c, e, a, n});
  }
  static TraitVector scaled(double o, double c, double e, double a, double n) {
    return TraitVector(TraitScale::kScaled1To10, {o, c, e, a, n});
  }

  TraitScale scale() const { return scale_; }
  double operator[](Trait t) const { return values_[index(t)]; }
  const std::array<double, 5>& values() const { return values_; }

  double openness() const { return (*this)[Trait::kOpenness]; }
  double conscientiousness() const { return (*this)[Trait::kConscientiousness]; }
  double extraversion() const { return (*this)[Trait::kExtraversion]; }
  double agreeableness() const { return (*this)[Trait::kAgreeableness]; }
  double neuroticism() const { return (*this)[Trait::kNeuroticism]; }

  bool operator==(const TraitVector&) const = default;

 private:
  static constexpr std::size_t index(Trait t) { return static_cast<std::size_t>(t); }

  TraitScale scale_;
  std::array<double, 5> values_;
};

/// Which trait an item measures and whether it is reverse-keyed.
struct Bfi10Item {
  Trait trait;
  bool reversed;
};

using Bfi10Key = std::array<Bfi10Item, 10>;

/// Published BFI-10 key (Rammstedt & John, 2007):
/// E {1R, 6}, A {2, 7R}, C {3R, 8}, N {4R, 9}, O {5R, 10}.
inline constexpr Bfi10Key kDefaultBfi10Key = {{
    {Trait::kExtraversion, true},
    {Trait::kAgreeableness, false},
    {Trait::kConscientiousness, true},
    {Trait::kNeuroticism, true},
    {Trait::kOpenness, true},
    {Trait::kExtraversion, false},
    {Trait::kAgreeableness, true},
    {Trait::kConscientiousness, false},
    {Trait::kNeuroticism, false},
    {Trait::kOpenness, false},
}};

struct Bfi10Response {
  std::vector<int> items;
};

inline void validate(const Bfi10Response& response) {
  if (response.items.size() != 10) {
    fail(ErrorKind::kValidation,
         "BFI-10 response needs 10 items, got " + std::to_string(response.items.size()));
  }
  for (std::size_t i = 0; i < response.items.size(); ++i) {
    int x = response.items[i];
    if (x < 1 || x > 5) {
      fail(ErrorKind::kValidation, "BFI-10 item " + std::to_string(i + 1) + " = " +
                                       std::to_string(x) + " outside [1,5]");
    }
  }
}

inline void validate(const Bfi10Key& key) {
  std::array<int, 5> per_trait{};
  for (const auto& item : key) ++per_trait[static_cast<std::size_t>(item.trait)];
  for (Trait t : kAllTraits) {
    if (per_trait[static_cast<std::size_t>(t)] != 2) {
      fail(ErrorKind::kContract,
           "BFI-10 key must assign two items to " + std::string(to_string(t)));
    }
  }
}

/// Mean of each trait's two items after reversing r(x) = 6 - x on
/// reverse-keyed items. Result is on the raw 1-5 scale.
inline TraitVector score_bfi10(const Bfi10Response& response,
                               const Bfi10Key& key = kDefaultBfi10Key) {
  validate(response);
  validate(key);
  std::array<double, 5> sums{};
  for (std::size_t i = 0; i < 10; ++i) {
    int x = response.items[i];
    sums[static_cast<std::size_t>(key[i].trait)] += key[i].reversed ? 6 - x : x;
  }
  for (double& s : sums) s /= 2.0;
  return TraitVector(TraitScale::kRaw1To5, sums);
}

/// Linear map t' = 1 + 2.25 (t - 1) from [1,5] onto [1,10].
inline TraitVector rescale_traits(const TraitVector& raw) {
  if (raw.scale() != TraitScale::kRaw1To5) {
    fail(ErrorKind::kContract, "rescale_traits expects a RAW_1_5 vector");
  }
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) out[i] = 1.0 + 2.25 * (raw.values()[i] - 1.0);
  return TraitVector(TraitScale::kScaled1To10, out);
}

struct ClusterAssignment {
  Cluster cluster = Cluster::k1;
  std::array<double, 3> cluster_scores{};
  Trait predominant_trait = Trait::kOpenness;
  Role preferred_role = Role::kPilot;

  bool operator==(const ClusterAssignment&) const = default;
};

/// Scores: c1 = O, c2 = (E + A) / 2, c3 = (N + (11 - E)) / 2.
/// Ties resolve toward the lower cluster number, so exact equality favours
/// the paired roles over Solo. Conscientiousness does not participate.
inline ClusterAssignment assign_cluster(const TraitVector& traits) {
  if (traits.scale() != TraitScale::kScaled1To10) {
    fail(ErrorKind::kContract, "assign_cluster expects a SCALED_1_10 vector");
  }
  const double o = traits.openness();
  const double e = traits.extraversion();
  const double a = traits.agreeableness();
  const double n = traits.neuroticism();

  ClusterAssignment out;
  out.cluster_scores = {o, (e + a) / 2.0, (n + (11.0 - e)) / 2.0};
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (out.cluster_scores[i] > out.cluster_scores[best]) best = i;
  }
  out.cluster = static_cast<Cluster>(best + 1);

  constexpr std::array<Trait, 4> kOrder = {Trait::kOpenness, Trait::kExtraversion,
                                           Trait::kAgreeableness, Trait::kNeuroticism};
  Trait top = kOrder[0];
  for (Trait t : kOrder) {
    if (traits[t] > traits[top]) top = t;
  }
  out.predominant_trait = top;
  out.preferred_role = preferred_role(out.cluster);
  return out;
}

/// score -> rescale -> cluster, the full assessment pipeline.
inline ClusterAssignment assess(const Bfi10Response& response,
                                const Bfi10Key& key = kDefaultBfi10Key) {
  return assign_cluster(rescale_traits(score_bfi10(response, key)));
}

}  // namespace roma
