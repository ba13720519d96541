#include "landscape/surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "landscape/error.hpp"
#include "landscape/parallel.hpp"
#include "landscape/probe.hpp"
#include "landscape/rng.hpp"

namespace lp {
namespace {

constexpr std::size_t kDefaultSurfacePoints = 64;

ParamVector gaussian_like(const ParamVector& like, CounterRng& rng) {
  ParamVector v = ParamVector::zeros(like.manifest_ptr());
  for (auto& x : v.values()) x = rng.normal();
  return v;
}

// Removes the components along each unit vector in `basis` (two passes) and normalizes.
void orthonormalize(ParamVector& v, const std::vector<const ParamVector*>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const ParamVector* b : basis) v.axpy(-dot(v, *b), *b);
  }
  const double n = norm(v);
  if (!(n > 0.0)) throw std::runtime_error("random direction collapsed during orthogonalization");
  v *= 1.0 / n;
}

double mean_cost(const NetworkSpec& spec, const ParamVector& p, const Dataset& train) {
  return loss_total(spec, p, train).mean;
}

void evaluate_cells(SurfaceGrid& grid, std::size_t threads,
                    const std::function<ParamVector(std::size_t, std::size_t)>& point,
                    const NetworkSpec& spec, const Dataset& train) {
  const std::size_t nx = grid.x.size();
  const std::size_t ny = grid.y.size();
  grid.values.assign(nx * ny, 0.0);
  parallel_for(nx * ny, threads, [&](std::size_t cell) {
    const std::size_t i = cell / ny;
    const std::size_t j = cell % ny;
    grid.values[cell] = mean_cost(spec, point(i, j), train);
  });
}

}  // namespace

std::vector<double> symmetric_grid(double extent, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {0.0};
  std::vector<double> v(n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = 2.0 * static_cast<double>(i) - m;
    v[i] = extent * k / m;
  }
  return v;
}

SurfaceGrid surface_from_trajectory(const NetworkSpec& spec, const Dataset& train, const TrajectoryRecord& record,
                                    std::span<const double> alpha_grid, std::span<const double> beta_grid,
                                    std::size_t threads) {
  if (record.snapshots.size() < 2) {
    throw TrajectoryError(TrajectoryError::Kind::Degenerate, "surface needs at least two snapshots");
  }
  const ProjectionTrace trace = projection_trace(record);
  const auto dirs = residual_directions(record);

  SurfaceGrid grid;
  grid.kind = "trajectory";
  grid.x_label = "alpha";
  grid.y_label = "beta";
  grid.x = alpha_grid.empty() ? linspace(0.0, 1.0, kDefaultSurfacePoints)
                              : std::vector<double>(alpha_grid.begin(), alpha_grid.end());
  grid.y = beta_grid.empty() ? linspace(0.0, 1.2 * trace.max_beta, kDefaultSurfacePoints)
                             : std::vector<double>(beta_grid.begin(), beta_grid.end());

  // Nearest snapshot in alpha_hat, ties to the later one, optionally skipping
  // snapshots without a residual direction.
  auto nearest = [&](double a, bool need_direction) {
    std::size_t best = trace.points.size();
    double best_dist = 0.0;
    for (std::size_t t = 0; t < trace.points.size(); ++t) {
      if (need_direction && dirs[t].empty()) continue;
      const double dist = std::abs(trace.points[t].alpha_hat - a);
      if (best == trace.points.size() || dist <= best_dist) {
        best = t;
        best_dist = dist;
      }
    }
    return best;
  };

  for (double a : grid.x) {
    std::size_t t = nearest(a, false);
    if (dirs[t].empty()) t = nearest(a, true);
    if (t == trace.points.size()) {
      throw TrajectoryError(TrajectoryError::Kind::Degenerate,
                            "every snapshot lies on the initial-to-solution line; no residual direction");
    }
    grid.column_snapshot.push_back(t);
    grid.provenance.push_back("snapshot:" + std::to_string(t));
  }

  const ParamVector& start = record.initial;
  const ParamVector& end = record.solution();
  evaluate_cells(
      grid, threads,
      [&](std::size_t i, std::size_t j) {
        ParamVector p = interp_point(start, end, grid.x[i]);
        const double b = grid.y[j];
        const auto& v = dirs[grid.column_snapshot[i]];
        auto out = p.values();
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += b * v[k];
        return p;
      },
      spec, train);

  for (std::size_t t = 0; t < record.snapshots.size(); ++t) {
    grid.overlay.push_back({record.snapshots[t].epoch, trace.points[t].alpha_hat, trace.points[t].beta,
                            mean_cost(spec, record.snapshots[t].params, train)});
  }
  return grid;
}

SurfaceGrid random_plane_control(const NetworkSpec& spec, const Dataset& train, const ParamVector& solution,
                                 double extent, std::size_t resolution, std::uint64_t seed,
                                 const TrajectoryRecord* overlay, std::size_t threads) {
  if (!(extent > 0.0)) throw std::invalid_argument("random plane extent must be > 0");
  if (resolution < 2) throw std::invalid_argument("random plane resolution must be >= 2");
  CounterRng rng(seed, 0x706c616e65ULL);
  ParamVector d1 = gaussian_like(solution, rng);
  ParamVector d2 = gaussian_like(solution, rng);
  orthonormalize(d1, {});
  orthonormalize(d2, {&d1});

  SurfaceGrid grid;
  grid.kind = "random-plane";
  grid.x_label = "alpha";
  grid.y_label = "beta";
  grid.x = symmetric_grid(extent, resolution);
  grid.y = grid.x;
  grid.provenance.assign(grid.x.size(), "fixed-random");
  evaluate_cells(
      grid, threads,
      [&](std::size_t i, std::size_t j) {
        ParamVector p = solution;
        p.axpy(grid.x[i], d1);
        p.axpy(grid.y[j], d2);
        return p;
      },
      spec, train);

  if (overlay) {
    for (const auto& s : overlay->snapshots) {
      const ParamVector rel = s.params - solution;
      grid.overlay.push_back({s.epoch, dot(rel, d1), dot(rel, d2), mean_cost(spec, s.params, train)});
    }
  }
  grid.origin = solution;
  grid.basis = {std::move(d1), std::move(d2)};
  return grid;
}

SurfaceGrid alpha_random_control(const NetworkSpec& spec, const Dataset& train, const TrajectoryRecord& record,
                                 std::size_t resolution, std::uint64_t seed, std::span<const double> alpha_grid,
                                 std::size_t threads) {
  if (resolution < 2) throw std::invalid_argument("alpha-random resolution must be >= 2");
  const ParamVector& start = record.initial;
  const ParamVector& end = record.solution();
  ParamVector u = end - start;
  const double length = norm(u);
  if (!(length > 0.0)) {
    throw TrajectoryError(TrajectoryError::Kind::Degenerate, "solution equals the initial point");
  }
  u *= 1.0 / length;
  CounterRng rng(seed, 0x616c706861ULL);
  ParamVector w = gaussian_like(start, rng);
  orthonormalize(w, {&u});

  SurfaceGrid grid;
  grid.kind = "alpha-random";
  grid.x_label = "alpha";
  grid.y_label = "beta";
  grid.x = alpha_grid.empty() ? linspace(0.0, 1.0, resolution)
                              : std::vector<double>(alpha_grid.begin(), alpha_grid.end());

  const ProjectionTrace trace = projection_trace(record);
  double reach = 0.0;
  std::vector<double> coords;
  for (const auto& s : record.snapshots) {
    coords.push_back(dot(s.params - start, w));
    reach = std::max(reach, std::abs(coords.back()));
  }
  const double extent = reach > 0.0 ? 1.2 * reach : 0.1 * length;
  grid.y = symmetric_grid(extent, resolution % 2 == 1 ? resolution : resolution + 1);
  grid.provenance.assign(grid.x.size(), "fixed-random");

  evaluate_cells(
      grid, threads,
      [&](std::size_t i, std::size_t j) {
        ParamVector p = interp_point(start, end, grid.x[i]);
        p.axpy(grid.y[j], w);
        return p;
      },
      spec, train);

  for (std::size_t t = 0; t < record.snapshots.size(); ++t) {
    grid.overlay.push_back({record.snapshots[t].epoch, trace.points[t].alpha_hat, coords[t],
                            mean_cost(spec, record.snapshots[t].params, train)});
  }
  grid.origin = start;
  grid.basis = {end - start, std::move(w)};
  return grid;
}

double coefficient_of_variation(const SurfaceGrid& grid) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : grid.values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) return 0.0;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : grid.values) {
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  return mean != 0.0 ? sd / std::abs(mean) : 0.0;
}

}  // namespace lp
