#include "vecgee/sorbinil_data.hpp"

#include <cstdio>
#include <string>

namespace vecgee {

namespace {

constexpr bool S = true;
constexpr bool P = false;

constexpr std::array<SorbinilRow, kSorbinilRows> kTable = {{
    {S, S, 2.0, 2.0}, {S, S, 1.0, 1.0}, {S, S, 0.5, 2.0},
    {S, S, 2.5, 1.0}, {S, S, 3.0, 2.5}, {S, S, 2.0, 2.5},

    {S, P, 1.0, 1.5}, {S, P, 2.0, 2.5}, {S, P, 3.0, 1.0}, {S, P, 2.0, 3.0},
    {S, P, 3.0, 2.5}, {S, P, 2.0, 3.0}, {S, P, 3.0, 3.0}, {S, P, 0.5, 1.5},
    {S, P, 3.0, 3.0}, {S, P, 3.0, 3.0}, {S, P, 3.0, 3.0}, {S, P, 1.0, 2.0},
    {S, P, 1.0, 2.0}, {S, P, 1.5, 2.5},

    {P, S, 2.5, 2.0}, {P, S, 2.5, 2.5}, {P, S, 3.0, 3.0}, {P, S, 2.5, 2.0},
    {P, S, 1.0, 0.5}, {P, S, 2.0, 0.0}, {P, S, 3.0, 2.5}, {P, S, 3.0, 1.0},
    {P, S, 2.0, 1.5}, {P, S, 0.5, 0.0}, {P, S, 2.5, 1.5}, {P, S, 2.0, 2.0},
    {P, S, 2.5, 2.5}, {P, S, 2.5, 2.5},

    {P, P, 3.0, 3.0}, {P, P, 2.0, 3.0}, {P, P, 2.5, 2.5}, {P, P, 1.0, 3.0},
    {P, P, 2.0, 2.5}, {P, P, 2.0, 1.0}, {P, P, 2.0, 2.0},
}};

}  // namespace

std::span<const SorbinilRow> sorbinil_table() { return kTable; }

std::uint64_t sorbinil_checksum() {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char line[64];
  for (const auto& row : kTable) {
    const int len = std::snprintf(line, sizeof line, "%d,%d,%.1f,%.1f\n",
                                  row.sorbinil_left ? 1 : 0, row.sorbinil_right ? 1 : 0,
                                  row.score_left, row.score_right);
    for (int c = 0; c < len; ++c) {
      h ^= static_cast<unsigned char>(line[c]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Dataset sorbinil_dataset(bool unit_interval) {
  const double scale = unit_interval ? 0.25 : 1.0;
  Eigen::MatrixXd y(kSorbinilRows, 2);
  CovariateTable x(kSorbinilRows, 2);
  for (std::size_t i = 0; i < kSorbinilRows; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    y(r, 0) = kTable[i].score_left * scale;
    y(r, 1) = kTable[i].score_right * scale;
    x(r, 0) = kTable[i].sorbinil_left ? 1.0 : 0.0;
    x(r, 1) = kTable[i].sorbinil_right ? 1.0 : 0.0;
  }
  return make_dataset({"left", "right"}, y, {"sorbinil_left", "sorbinil_right"}, x);
}

}  // namespace vecgee
