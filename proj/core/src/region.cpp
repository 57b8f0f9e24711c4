#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "vecgee/errors.hpp"
#include "vecgee/inference.hpp"

namespace vecgee {

namespace {

Eigen::MatrixXd pair_selector(std::size_t first, std::size_t second, Eigen::Index p) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, p);
  m(0, static_cast<Eigen::Index>(first)) = 1.0;
  m(1, static_cast<Eigen::Index>(second)) = 1.0;
  return m;
}

struct Segment {
  std::array<long, 2> edge;
  std::array<Eigen::Vector2d, 2> point;
};

}  // namespace

RegionGrid default_region_grid(std::size_t first, std::size_t second, double level,
                               const Eigen::VectorXd& beta,
                               const std::vector<Eigen::MatrixXd>& vcovs, std::size_t n,
                               std::size_t p, int resolution) {
  const double crit = f_critical(1.0 - level, 2.0, static_cast<double>(n - p));
  double hx = 0.0;
  double hy = 0.0;
  for (const auto& v : vcovs) {
    const auto a = static_cast<Eigen::Index>(first);
    const auto b = static_cast<Eigen::Index>(second);
    hx = std::max(hx, std::sqrt(2.0 * crit * v(a, a) / static_cast<double>(n)));
    hy = std::max(hy, std::sqrt(2.0 * crit * v(b, b) / static_cast<double>(n)));
  }
  hx *= 1.25;
  hy *= 1.25;
  const double cx = beta(static_cast<Eigen::Index>(first));
  const double cy = beta(static_cast<Eigen::Index>(second));
  return {cx - hx, cx + hx, cy - hy, cy + hy, resolution, resolution};
}

ConfidenceRegion confidence_region(std::size_t first, std::size_t second, double level,
                                   const RegionGrid& grid, const Eigen::VectorXd& beta,
                                   const Eigen::MatrixXd& vcov, std::size_t n, std::size_t p) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigurationError("level must lie in (0, 1)");
  if (grid.nx < 2 || grid.ny < 2) throw ConfigurationError("region grid needs >= 2 points per axis");
  const auto p_total = beta.size();
  if (first >= static_cast<std::size_t>(p_total) || second >= static_cast<std::size_t>(p_total) ||
      first == second) {
    throw ConfigurationError("region needs two distinct coefficient indices");
  }
  const double bx = beta(static_cast<Eigen::Index>(first));
  const double by = beta(static_cast<Eigen::Index>(second));
  if (bx < grid.x_min || bx > grid.x_max || by < grid.y_min || by > grid.y_max) {
    throw ConfigurationError("region grid does not contain the estimate");
  }

  ConfidenceRegion region;
  region.level = level;
  region.grid = grid;
  const auto nx = static_cast<std::size_t>(grid.nx);
  const auto ny = static_cast<std::size_t>(grid.ny);
  region.inside.assign(nx * ny, 0);
  std::vector<double> fval(nx * ny);

  const Eigen::MatrixXd m = pair_selector(first, second, p_total);
  Eigen::VectorXd delta(2);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      delta << grid.x(ix), grid.y(iy);
      const auto test = wald_f_test(m, delta, beta, vcov, n, p);
      const auto idx = static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix);
      fval[idx] = test.f;
      region.inside[idx] = test.p_value > 1.0 - level ? 1 : 0;
      if (region.inside[idx] &&
          (ix == 0 || iy == 0 || ix == grid.nx - 1 || iy == grid.ny - 1)) {
        region.touches_edge = true;
      }
    }
  }

  // Marching squares over the F field at the critical value.
  const double crit = f_critical(1.0 - level, 2.0, static_cast<double>(n - p));
  auto at = [&](std::size_t ix, std::size_t iy) { return iy * nx + ix; };
  auto crossing = [&](std::size_t ia, std::size_t ib, const Eigen::Vector2d& pa,
                      const Eigen::Vector2d& pb) {
    const double fa = fval[ia];
    const double fb = fval[ib];
    double t = fb != fa ? (crit - fa) / (fb - fa) : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    return Eigen::Vector2d(pa + t * (pb - pa));
  };
  // Horizontal edge (ix,iy)-(ix+1,iy) has id 2*at(ix,iy); vertical edge
  // (ix,iy)-(ix,iy+1) has id 2*at(ix,iy)+1.
  std::vector<Segment> segments;
  for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      const std::array<std::size_t, 4> corner = {at(ix, iy), at(ix + 1, iy), at(ix + 1, iy + 1),
                                                 at(ix, iy + 1)};
      const std::array<Eigen::Vector2d, 4> pos = {
          Eigen::Vector2d(grid.x(int(ix)), grid.y(int(iy))),
          Eigen::Vector2d(grid.x(int(ix + 1)), grid.y(int(iy))),
          Eigen::Vector2d(grid.x(int(ix + 1)), grid.y(int(iy + 1))),
          Eigen::Vector2d(grid.x(int(ix)), grid.y(int(iy + 1)))};
      std::array<bool, 4> in{};
      int count = 0;
      for (int c = 0; c < 4; ++c) {
        in[c] = region.inside[corner[c]] != 0;
        count += in[c];
      }
      if (count == 0 || count == 4) continue;

      // Edges: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c3-c2), 3 left (c0-c3).
      const std::array<long, 4> edge_id = {
          static_cast<long>(2 * at(ix, iy)), static_cast<long>(2 * at(ix + 1, iy) + 1),
          static_cast<long>(2 * at(ix, iy + 1)), static_cast<long>(2 * at(ix, iy) + 1)};
      const std::array<std::array<int, 2>, 4> edge_corners = {{{0, 1}, {1, 2}, {3, 2}, {0, 3}}};
      auto edge_point = [&](int e) {
        const auto [a, b] = edge_corners[static_cast<std::size_t>(e)];
        return crossing(corner[a], corner[b], pos[a], pos[b]);
      };
      auto add = [&](int e1, int e2) {
        segments.push_back({{edge_id[e1], edge_id[e2]}, {edge_point(e1), edge_point(e2)}});
      };

      if (count == 2 && in[0] == in[2]) {
        // Saddle: cut off the corners whose state differs from the centre.
        const double centre = 0.25 * (fval[corner[0]] + fval[corner[1]] + fval[corner[2]] +
                                      fval[corner[3]]);
        const bool centre_in = centre < crit;
        static constexpr std::array<std::array<int, 2>, 4> corner_edges = {
            {{3, 0}, {0, 1}, {1, 2}, {2, 3}}};
        for (int c = 0; c < 4; ++c) {
          if (in[c] != centre_in) add(corner_edges[c][0], corner_edges[c][1]);
        }
        continue;
      }
      int found[2];
      int f = 0;
      for (int e = 0; e < 4; ++e) {
        const auto [a, b] = edge_corners[static_cast<std::size_t>(e)];
        if (in[a] != in[b]) found[f++] = e;
      }
      add(found[0], found[1]);
    }
  }

  // Chain segments into polylines through shared edges.
  std::unordered_map<long, std::vector<std::size_t>> by_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_edge[segments[s].edge[0]].push_back(s);
    by_edge[segments[s].edge[1]].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  auto next_segment = [&](long edge, std::size_t from) -> long {
    for (auto s : by_edge[edge]) {
      if (s != from && !used[s]) return static_cast<long>(s);
    }
    return -1;
  };
  // Returns the edge where the walk stopped.
  auto walk = [&](std::size_t start, int end_side, std::vector<Eigen::Vector2d>& line) {
    std::size_t cur = start;
    long edge = segments[cur].edge[static_cast<std::size_t>(end_side)];
    for (;;) {
      const long nxt = next_segment(edge, cur);
      if (nxt < 0) return edge;
      cur = static_cast<std::size_t>(nxt);
      used[cur] = true;
      const int side = segments[cur].edge[0] == edge ? 1 : 0;
      line.push_back(segments[cur].point[static_cast<std::size_t>(side)]);
      edge = segments[cur].edge[static_cast<std::size_t>(side)];
    }
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<Eigen::Vector2d> forward{segments[s].point[0], segments[s].point[1]};
    const long stop = walk(s, 1, forward);
    if (stop != segments[s].edge[0]) {
      std::vector<Eigen::Vector2d> backward;
      walk(s, 0, backward);
      std::reverse(backward.begin(), backward.end());
      backward.insert(backward.end(), forward.begin(), forward.end());
      forward = std::move(backward);
    }
    region.boundary.push_back(std::move(forward));
  }
  return region;
}

}  // namespace vecgee
