#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "landscape/dataset.hpp"
#include "landscape/network.hpp"
#include "landscape/train.hpp"

namespace lp {

struct InterpolationCurve {
  std::vector<double> alpha;
  std::vector<double> j_train;
  std::optional<std::vector<double>> j_valid;
  /// Training misclassification rate, for labelled data.
  std::optional<std::vector<double>> err_rate;
  std::string from;
  std::string to;
};

/// (1 - alpha) * from + alpha * to, elementwise. Any real alpha is allowed.
/// Coordinates where the endpoints agree are copied unchanged, so the path
/// between identical points is constant.
ParamVector interp_point(const ParamVector& from, const ParamVector& to, double alpha);

/// Mean objective along the line from `from` to `to`. Grid points are
/// evaluated on up to `threads` workers and assembled by index, so the result
/// does not depend on the thread count. A non-finite objective raises
/// EvaluationError carrying the offending alpha.
InterpolationCurve interp_curve(const NetworkSpec& spec, const Dataset& train, const Dataset* valid,
                                const ParamVector& from, const ParamVector& to, std::span<const double> grid,
                                std::size_t threads = 1);

/// n points from lo to hi; the endpoints are exact.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// coarse-50, fine-200, zoom-start-200 and zoom-end-200.
std::vector<std::pair<std::string, std::vector<double>>> standard_grids();
/// Throws std::invalid_argument for unknown names.
std::vector<double> named_grid(std::string_view name);

/// Curve between the solutions of two runs of the same network.
InterpolationCurve two_solution_curve(const NetworkSpec& spec, const Dataset& train, const Dataset* valid,
                                      const TrajectoryRecord& a, const TrajectoryRecord& b,
                                      std::span<const double> grid, std::size_t threads = 1);

/// Isotropic Gaussian direction rescaled to norm_scale * |theta_f|.
ParamVector random_point(const ParamVector& like, double norm, std::uint64_t seed);

/// Curve from a random point of norm norm_scale * |theta_f| to theta_f.
InterpolationCurve random_point_curve(const NetworkSpec& spec, const Dataset& train, const Dataset* valid,
                                      const TrajectoryRecord& record, double norm_scale, std::uint64_t seed,
                                      std::span<const double> grid, std::size_t threads = 1);

struct ProjectionPoint {
  std::size_t step = 0;
  /// Coordinate along u in parameter units.
  double alpha = 0.0;
  /// alpha / |theta_f - theta_i|.
  double alpha_hat = 0.0;
  /// Euclidean norm of the residual orthogonal to u.
  double beta = 0.0;
  double norm = 0.0;
  /// beta / norm (0 when norm is 0).
  double residual_ratio = 0.0;
};

struct ProjectionTrace {
  std::vector<ProjectionPoint> points;
  /// |theta_f - theta_i|.
  double length = 0.0;
  std::size_t solution_index = 0;
  double max_residual_ratio = 0.0;
  double max_beta = 0.0;
  /// Objective at each point when the producer computes it.
  std::vector<double> objective;
  bool diverged = false;
};

/// Decomposes points against the line from `start` through `end`. Points
/// bitwise equal to start or end get beta = 0 exactly.
class LineProjector {
 public:
  LineProjector(std::span<const double> start, std::span<const double> end);

  double length() const noexcept { return length_; }
  std::span<const double> unit() const noexcept { return unit_; }

  /// When residual_dir is non-null it receives the unit residual direction.
  /// It is left empty when beta is zero or at rounding level, i.e. at most
  /// 1e-12 * |point - start|, since such a residual has no usable direction.
  ProjectionPoint project(std::span<const double> point, std::size_t step,
                          std::vector<double>* residual_dir = nullptr) const;

 private:
  std::vector<double> start_;
  std::vector<double> end_;
  std::vector<double> unit_;
  double length_ = 0.0;
};

/// alpha(t) and beta(t) for every snapshot, including those after the
/// solution. Throws TrajectoryError(Degenerate) when theta_f == theta_i.
ProjectionTrace projection_trace(const TrajectoryRecord& record);

/// Unit residual directions v(t) per snapshot (empty where beta(t) is zero or
/// at rounding level).
std::vector<std::vector<double>> residual_directions(const TrajectoryRecord& record);

struct Barrier {
  std::size_t index = 0;
  double alpha = 0.0;
  double value = 0.0;
  /// value - max(endpoint values).
  double height = 0.0;
};

struct BumpReport {
  double tolerance = 0.0;
  /// Increments J[i+1] - J[i] exceeding the tolerance.
  std::size_t violations = 0;
  /// Sum of those increments.
  double upward_mass = 0.0;
  double max_violation = 0.0;
  std::vector<Barrier> barriers;
  /// Interior local minima deeper than the tolerance.
  std::vector<std::size_t> minima;
};

/// Default tolerance: 1e-6 * (max - min) of the values.
double default_bump_tolerance(std::span<const double> values);

BumpReport bump_report(std::span<const double> alpha, std::span<const double> values,
                       std::optional<double> tolerance = std::nullopt);
BumpReport bump_report(const InterpolationCurve& curve, std::optional<double> tolerance = std::nullopt);

}  // namespace lp
