#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "landscape/dataset.hpp"
#include "landscape/network.hpp"
#include "landscape/probe.hpp"
#include "landscape/surface.hpp"

namespace lp {

// Scalar factored linear model y = w1 w2 x fit to (x = 1, y = 1).

double factored_cost(double w1, double w2);
std::array<double, 2> factored_grad(double w1, double w2);

/// J(alpha) = c[0] + c[1] alpha + ... + c[4] alpha^4.
struct QuarticCurve {
  std::array<double, 5> c{};
  double operator()(double alpha) const;
};

/// Exact expansion of (1 - w1(alpha) w2(alpha))^2 along the line from `from` to `to`.
QuarticCurve closed_form_interp(std::array<double, 2> from, std::array<double, 2> to);

/// factored_cost over symmetric_grid(extent, resolution)^2 with the branches
/// of w2 = 1 / w1 inside the square as the reference curve.
SurfaceGrid heatmap_grid(double extent, std::size_t resolution);

struct WalkConfig {
  std::size_t dim = 2;
  std::size_t steps = 1000;
  std::size_t solution_step = 900;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gaussian random walk from the origin projected against the line from the
/// start to the position at solution_step. One point per step 0..steps.
ProjectionTrace random_walk_trace(const WalkConfig& config);

/// Diagonal spectrum of a convex quadratic.
struct Spectrum {
  enum class Kind { Isotropic, LogUniform };
  Kind kind = Kind::LogUniform;
  double lo = 1e-2;
  double hi = 1.0;

  /// Isotropic: every eigenvalue is `hi`. LogUniform: geometric spacing from
  /// lo to hi over the dimensions.
  std::vector<double> eigenvalues(std::size_t dim) const;
};

/// Gradient descent with momentum on J = 1/2 theta^T D theta from a standard
/// normal start, projected against the line from the start to the minimizer
/// 0. Stops with `diverged` set once |theta| exceeds 1e6 |theta_0|.
ProjectionTrace quadratic_descent_trace(std::size_t dim, const Spectrum& spectrum, double learning_rate,
                                        double momentum, std::size_t steps, std::uint64_t seed);

struct QuadraticSetting {
  double learning_rate = 0.0;
  double momentum = 0.0;
};

struct QuadraticSweepRow {
  QuadraticSetting setting;
  double max_beta = 0.0;
  double max_residual_ratio = 0.0;
  bool diverged = false;
};

/// One trace per setting from the same start; rows keep the input order.
std::vector<QuadraticSweepRow> quadratic_sweep(std::size_t dim, const Spectrum& spectrum,
                                               std::span<const QuadraticSetting> settings, std::size_t steps,
                                               std::uint64_t seed, std::size_t threads = 1);

struct TaylorRow {
  double t = 0.0;
  /// |second-order prediction - integrated flow|
  double discrepancy = 0.0;
  /// |first-order prediction - integrated flow|
  double first_order_discrepancy = 0.0;
};

/// Compares theta(0) - t g + 1/2 t^2 H g against RK4 integration of
/// d theta / dt = -grad J with step t / 1000.
std::vector<TaylorRow> taylor_check(const Objective& objective, const ParamVector& params,
                                    std::span<const double> t_values);
std::vector<TaylorRow> taylor_check(const NetworkSpec& spec, const ParamVector& params, const Batch& batch,
                                    std::span<const double> t_values);

/// Length of the first- and second-order gradient-flow steps at time t.
struct StepEffect {
  /// g^T H g
  double curvature = 0.0;
  double first_order_length = 0.0;
  double second_order_length = 0.0;
};

StepEffect second_order_step_effect(const Objective& objective, const ParamVector& params, double t);

}  // namespace lp
