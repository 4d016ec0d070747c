#pragma once

// Intrinsic Motivation Inventory, Enjoyment/Interest subscale: seven items on
// a 7-point scale, item 4 reverse-keyed by default. Item wording is
// configuration data and never reaches this code.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "roma/error.hpp"

namespace roma {

inline constexpr std::size_t kImiItemCount = 7;

using ImiReversedFlags = std::array<bool, kImiItemCount>;

inline constexpr ImiReversedFlags kDefaultImiReversed = {false, false, false, true,
                                                         false, false, false};

struct ImiResponse {
  std::vector<int> items;
  ImiReversedFlags reversed = kDefaultImiReversed;
  double motivation_scaled = 1.0;
  int revision = 0;  // number of times this response was replaced

  bool operator==(const ImiResponse&) const = default;
};

inline void validate_imi_items(std::span<const int> items) {
  if (items.size() != kImiItemCount) {
    fail(ErrorKind::kValidation,
         "IMI response needs 7 items, got " + std::to_string(items.size()));
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] < 1 || items[i] > 7) {
      fail(ErrorKind::kValidation, "IMI item " + std::to_string(i + 1) + " = " +
                                       std::to_string(items[i]) + " outside [1,7]");
    }
  }
}

/// 1 + 9 (m - 1) / 6 where m is the item mean after r(x) = 8 - x on
/// reverse-keyed items.
inline double imi_motivation(std::span<const int> items,
                             const ImiReversedFlags& reversed = kDefaultImiReversed) {
  validate_imi_items(items);
  int sum = 0;
  for (std::size_t i = 0; i < kImiItemCount; ++i) sum += reversed[i] ? 8 - items[i] : items[i];
  const double mean = static_cast<double>(sum) / static_cast<double>(kImiItemCount);
  return 1.0 + 9.0 * (mean - 1.0) / 6.0;
}

inline ImiResponse score_imi(std::span<const int> items,
                             const ImiReversedFlags& reversed = kDefaultImiReversed) {
  ImiResponse r;
  r.motivation_scaled = imi_motivation(items, reversed);
  r.items.assign(items.begin(), items.end());
  r.reversed = reversed;
  return r;
}

/// 1-based indices of the reverse-keyed items, the form stored in memos.
inline std::vector<int> reversed_indices(const ImiReversedFlags& flags) {
  std::vector<int> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.push_back(static_cast<int>(i) + 1);
  }
  return out;
}

inline ImiReversedFlags flags_from_indices(std::span<const int> indices) {
  ImiReversedFlags flags{};
  int last = 0;
  for (int i : indices) {
    if (i < 1 || i > static_cast<int>(kImiItemCount) || i <= last) {
      fail(ErrorKind::kValidation, "reversed item indices must be ascending within 1..7");
    }
    flags[static_cast<std::size_t>(i - 1)] = true;
    last = i;
  }
  return flags;
}

}  // namespace roma
