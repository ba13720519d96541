#include "landscape/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "landscape/parallel.hpp"
#include "landscape/rng.hpp"

namespace lp {
namespace {

constexpr std::size_t kFlowSubsteps = 1000;
constexpr std::size_t kManifoldSamples = 256;
constexpr double kDivergenceFactor = 1e6;

ParamVector rk4_flow(const GradientFn& gradient, ParamVector theta, double t) {
  const double h = t / static_cast<double>(kFlowSubsteps);
  for (std::size_t s = 0; s < kFlowSubsteps; ++s) {
    const ParamVector k1 = gradient(theta);
    ParamVector probe = theta;
    probe.axpy(-0.5 * h, k1);
    const ParamVector k2 = gradient(probe);
    probe = theta;
    probe.axpy(-0.5 * h, k2);
    const ParamVector k3 = gradient(probe);
    probe = theta;
    probe.axpy(-h, k3);
    const ParamVector k4 = gradient(probe);
    auto out = theta.values();
    const auto a = k1.values();
    const auto b = k2.values();
    const auto c = k3.values();
    const auto d = k4.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
  }
  return theta;
}

}  // namespace

double factored_cost(double w1, double w2) {
  const double r = 1.0 - w1 * w2;
  return r * r;
}

std::array<double, 2> factored_grad(double w1, double w2) {
  const double r = 1.0 - w1 * w2;
  return {-2.0 * r * w2, -2.0 * r * w1};
}

double QuarticCurve::operator()(double alpha) const {
  return (((c[4] * alpha + c[3]) * alpha + c[2]) * alpha + c[1]) * alpha + c[0];
}

QuarticCurve closed_form_interp(std::array<double, 2> from, std::array<double, 2> to) {
  const double a1 = from[0];
  const double b1 = to[0] - from[0];
  const double a2 = from[1];
  const double b2 = to[1] - from[1];
  // 1 - w1 w2 = q0 + q1 alpha + q2 alpha^2
  const double q0 = 1.0 - a1 * a2;
  const double q1 = -(a1 * b2 + a2 * b1);
  const double q2 = -(b1 * b2);
  return QuarticCurve{{q0 * q0, 2.0 * q0 * q1, q1 * q1 + 2.0 * q0 * q2, 2.0 * q1 * q2, q2 * q2}};
}

SurfaceGrid heatmap_grid(double extent, std::size_t resolution) {
  if (!(extent > 0.0)) throw std::invalid_argument("heatmap extent must be > 0");
  if (resolution < 2) throw std::invalid_argument("heatmap resolution must be >= 2");
  SurfaceGrid grid;
  grid.kind = "heatmap";
  grid.x_label = "w1";
  grid.y_label = "w2";
  grid.x = symmetric_grid(extent, resolution);
  grid.y = grid.x;
  grid.provenance.assign(grid.x.size(), "analytic");
  grid.values.resize(grid.x.size() * grid.y.size());
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    for (std::size_t j = 0; j < grid.y.size(); ++j) {
      grid.values[i * grid.y.size() + j] = factored_cost(grid.x[i], grid.y[j]);
    }
  }
  // Solution manifold w2 = 1 / w1, both branches, clipped to the square.
  if (extent >= 1.0) {
    const auto w1s = linspace(1.0 / extent, extent, kManifoldSamples);
    for (double w1 : w1s) grid.reference_curve.push_back({w1, 1.0 / w1});
    for (double w1 : w1s) grid.reference_curve.push_back({-w1, -1.0 / w1});
  }
  return grid;
}

void WalkConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("walk dimension must be >= 1");
  if (!(solution_step > 0 && solution_step < steps)) {
    throw std::invalid_argument("walk solution step must satisfy 0 < solution_step < steps");
  }
}

ProjectionTrace random_walk_trace(const WalkConfig& config) {
  config.validate();
  constexpr std::uint64_t kStream = 0x77616c6bULL;
  std::vector<double> pos(config.dim, 0.0);
  const std::vector<double> start = pos;
  {
    CounterRng rng(config.seed, kStream);
    for (std::size_t s = 0; s < config.solution_step; ++s) {
      for (auto& x : pos) x += rng.normal();
    }
  }
  const LineProjector projector(start, pos);

  // Replay the identical walk so the solution position is reproduced bit for bit.
  ProjectionTrace trace;
  trace.length = projector.length();
  trace.solution_index = config.solution_step;
  std::fill(pos.begin(), pos.end(), 0.0);
  CounterRng rng(config.seed, kStream);
  trace.points.push_back(projector.project(pos, 0));
  for (std::size_t s = 1; s <= config.steps; ++s) {
    for (auto& x : pos) x += rng.normal();
    trace.points.push_back(projector.project(pos, s));
  }
  for (const auto& pt : trace.points) {
    trace.max_beta = std::max(trace.max_beta, pt.beta);
    trace.max_residual_ratio = std::max(trace.max_residual_ratio, pt.residual_ratio);
  }
  return trace;
}

std::vector<double> Spectrum::eigenvalues(std::size_t dim) const {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("spectrum needs 0 < lo <= hi");
  }
  std::vector<double> eig(dim, hi);
  if (kind == Kind::LogUniform && dim > 1) {
    const double ratio = std::log(hi / lo);
    for (std::size_t k = 0; k < dim; ++k) {
      eig[k] = lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(dim - 1));
    }
    eig.back() = hi;
  }
  return eig;
}

ProjectionTrace quadratic_descent_trace(std::size_t dim, const Spectrum& spectrum, double learning_rate,
                                        double momentum, std::size_t steps, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("quadratic dimension must be >= 1");
  if (steps < 1) throw std::invalid_argument("quadratic descent needs at least one step");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  const auto eig = spectrum.eigenvalues(dim);

  std::vector<double> theta(dim);
  CounterRng rng(seed, 0x71756164ULL);
  for (auto& x : theta) x = rng.normal();
  const std::vector<double> minimizer(dim, 0.0);
  const LineProjector projector(theta, minimizer);
  const double limit = kDivergenceFactor * norm(theta);

  auto objective = [&] {
    double j = 0.0;
    for (std::size_t k = 0; k < dim; ++k) j += 0.5 * eig[k] * theta[k] * theta[k];
    return j;
  };

  ProjectionTrace trace;
  trace.length = projector.length();
  trace.solution_index = 0;
  trace.points.push_back(projector.project(theta, 0));
  trace.objective.push_back(objective());
  std::vector<double> velocity(dim, 0.0);
  for (std::size_t s = 1; s <= steps; ++s) {
    for (std::size_t k = 0; k < dim; ++k) {
      velocity[k] = momentum * velocity[k] - learning_rate * (eig[k] * theta[k]);
      theta[k] += velocity[k];
    }
    const double n = norm(theta);
    if (!std::isfinite(n) || n > limit) {
      trace.diverged = true;
      break;
    }
    trace.points.push_back(projector.project(theta, s));
    trace.objective.push_back(objective());
  }
  for (const auto& pt : trace.points) {
    trace.max_beta = std::max(trace.max_beta, pt.beta);
    trace.max_residual_ratio = std::max(trace.max_residual_ratio, pt.residual_ratio);
  }
  return trace;
}

std::vector<QuadraticSweepRow> quadratic_sweep(std::size_t dim, const Spectrum& spectrum,
                                               std::span<const QuadraticSetting> settings, std::size_t steps,
                                               std::uint64_t seed, std::size_t threads) {
  std::vector<QuadraticSweepRow> rows(settings.size());
  parallel_for(settings.size(), threads, [&](std::size_t i) {
    const auto trace =
        quadratic_descent_trace(dim, spectrum, settings[i].learning_rate, settings[i].momentum, steps, seed);
    rows[i] = {settings[i], trace.max_beta, trace.max_residual_ratio, trace.diverged};
  });
  return rows;
}

std::vector<TaylorRow> taylor_check(const Objective& objective, const ParamVector& params,
                                    std::span<const double> t_values) {
  const ParamVector g = objective.gradient(params);
  const ParamVector hg = hvp(objective.gradient, params, g);
  std::vector<TaylorRow> rows;
  for (double t : t_values) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("taylor_check needs t >= 0");
    if (t == 0.0) {
      rows.push_back({0.0, 0.0, 0.0});
      continue;
    }
    const ParamVector flow = rk4_flow(objective.gradient, params, t);
    ParamVector first = params;
    first.axpy(-t, g);
    ParamVector second = first;
    second.axpy(0.5 * t * t, hg);
    rows.push_back({t, norm(second - flow), norm(first - flow)});
  }
  return rows;
}

std::vector<TaylorRow> taylor_check(const NetworkSpec& spec, const ParamVector& params, const Batch& batch,
                                    std::span<const double> t_values) {
  return taylor_check(summed_objective(spec, batch), params, t_values);
}

StepEffect second_order_step_effect(const Objective& objective, const ParamVector& params, double t) {
  const ParamVector g = objective.gradient(params);
  const ParamVector hg = hvp(objective.gradient, params, g);
  ParamVector first = ParamVector::zeros(params.manifest_ptr());
  first.axpy(-t, g);
  ParamVector second = first;
  second.axpy(0.5 * t * t, hg);
  return {dot(g, hg), norm(first), norm(second)};
}

}  // namespace lp
