#pragma once

// Itching scores (0 to 4 in steps of 0.5) in the left and right eyes of 41
// patients from the sorbinil retinopathy trial, grouped by the treatment given
// to each eye. Stored on the original scale; scaling is applied on request.

#include <array>
#include <cstdint>
#include <span>

#include "vecgee/dataset.hpp"

namespace vecgee {

struct SorbinilRow {
  bool sorbinil_left;
  bool sorbinil_right;
  double score_left;
  double score_right;
};

inline constexpr std::size_t kSorbinilRows = 41;

/// Rows in table order: (S,S) x 6, (S,P) x 14, (P,S) x 14, (P,P) x 7.
std::span<const SorbinilRow> sorbinil_table();

/// Treatment group sizes in table order.
inline constexpr std::array<std::size_t, 4> kSorbinilGroupSizes = {6, 14, 14, 7};

/// FNV-1a 64 over the table's canonical text form, one "l,r,yl,yr\n" line per
/// row with scores printed to one decimal.
std::uint64_t sorbinil_checksum();

/// Responses "left" and "right"; covariates "sorbinil_left" and
/// "sorbinil_right" (1 = sorbinil, 0 = placebo). With `unit_interval` the
/// scores are divided by 4.
Dataset sorbinil_dataset(bool unit_interval = true);

}  // namespace vecgee
