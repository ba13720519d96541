#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "landscape/dataset.hpp"
#include "landscape/network.hpp"
#include "landscape/train.hpp"

namespace lp {

struct OverlayPoint {
  std::size_t step = 0;
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

/// Cost sampled on an x-by-y lattice: values[i * y.size() + j] is the cost
/// at (x[i], y[j]).
struct SurfaceGrid {
  std::string kind;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;
  /// Basis description for every x column.
  std::vector<std::string> provenance;
  /// Snapshot whose residual direction each column uses (trajectory surfaces).
  std::vector<std::size_t> column_snapshot;
  /// Trajectory positions in grid coordinates with their cost.
  std::vector<OverlayPoint> overlay;
  /// Extra curve drawn on the plot, e.g. a solution manifold.
  std::vector<std::array<double, 2>> reference_curve;
  /// For linear controls: cell (i, j) is origin + x[i] * basis[0] + y[j] * basis[1].
  ParamVector origin;
  std::vector<ParamVector> basis;

  double at(std::size_t i, std::size_t j) const { return values[i * y.size() + j]; }
};

/// n values from -extent to extent, exactly antisymmetric; the middle value of
/// an odd-sized grid is exactly 0.
std::vector<double> symmetric_grid(double extent, std::size_t n);

/// Cost over (alpha_hat, beta): column alpha_hat uses the residual direction
/// v(t) of the snapshot whose alpha_hat(t) is nearest (ties to the later
/// snapshot; snapshots with beta(t) = 0 defer to the nearest non-degenerate
/// one). Cell value is the mean objective at
/// interp_point(theta_i, theta_f, alpha_hat) + beta * v(t).
/// Empty grids select defaults: 64 alpha values on [0, 1] and 64 beta values on
/// [0, 1.2 * max beta(t)].
SurfaceGrid surface_from_trajectory(const NetworkSpec& spec, const Dataset& train, const TrajectoryRecord& record,
                                    std::span<const double> alpha_grid = {}, std::span<const double> beta_grid = {},
                                    std::size_t threads = 1);

/// Cost over theta_f + s d1 + r d2 for a random orthonormal pair (d1, d2) and
/// s, r in symmetric_grid(extent, resolution). When `overlay` is given its
/// snapshots are projected onto (d1, d2).
SurfaceGrid random_plane_control(const NetworkSpec& spec, const Dataset& train, const ParamVector& solution,
                                 double extent, std::size_t resolution, std::uint64_t seed,
                                 const TrajectoryRecord* overlay = nullptr, std::size_t threads = 1);

/// Cost over the plane spanned by u (theta_i to theta_f) and a random unit
/// direction w orthogonal to u. x is alpha_hat (default: resolution points on
/// [0, 1]); y spans +-1.2 max |(theta(t) - theta_i) . w| with an odd point count.
SurfaceGrid alpha_random_control(const NetworkSpec& spec, const Dataset& train, const TrajectoryRecord& record,
                                 std::size_t resolution, std::uint64_t seed, std::span<const double> alpha_grid = {},
                                 std::size_t threads = 1);

/// Population standard deviation over mean of all finite cell values.
double coefficient_of_variation(const SurfaceGrid& grid);

}  // namespace lp
