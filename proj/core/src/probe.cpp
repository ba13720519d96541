#include "landscape/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "landscape/error.hpp"
#include "landscape/parallel.hpp"
#include "landscape/rng.hpp"

namespace lp {
namespace {

constexpr double kDirectionFloor = 1e-12;

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

void require_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("alpha grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("alpha grid must be strictly increasing");
  }
}

std::string digest_label(const TrajectoryRecord& r, std::string_view what) {
  return std::string(what) + "(epoch " + std::to_string(r.snapshots.at(r.solution_index).epoch) + ")";
}

}  // namespace

ParamVector interp_point(const ParamVector& from, const ParamVector& to, double alpha) {
  from.require_same_layout(to);
  ParamVector out = from;
  auto o = out.values();
  const auto a = from.values();
  const auto b = to.values();
  const double keep = 1.0 - alpha;
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] == b[i] ? a[i] : keep * a[i] + alpha * b[i];
  return out;
}

InterpolationCurve interp_curve(const NetworkSpec& spec, const Dataset& train, const Dataset* valid,
                                const ParamVector& from, const ParamVector& to, std::span<const double> grid,
                                std::size_t threads) {
  require_grid(grid);
  from.require_same_layout(to);
  const bool with_valid = valid && !valid->empty();
  const bool with_err = train.examples.has_labels();
  InterpolationCurve curve;
  curve.alpha.assign(grid.begin(), grid.end());
  curve.j_train.assign(grid.size(), 0.0);
  std::vector<double> jv(with_valid ? grid.size() : 0);
  std::vector<double> err(with_err ? grid.size() : 0);

  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const double alpha = grid[i];
    const ParamVector p = interp_point(from, to, alpha);
    const LossTotal lt = loss_total(spec, p, train);
    if (!std::isfinite(lt.mean)) {
      throw EvaluationError("non-finite training objective at alpha=" + format_double_exact(alpha), alpha);
    }
    curve.j_train[i] = lt.mean;
    if (with_err) err[i] = static_cast<double>(lt.errors) / static_cast<double>(lt.count);
    if (with_valid) {
      const double v = loss_total(spec, p, *valid).mean;
      if (!std::isfinite(v)) {
        throw EvaluationError("non-finite validation objective at alpha=" + format_double_exact(alpha), alpha);
      }
      jv[i] = v;
    }
  });
  if (with_valid) curve.j_valid = std::move(jv);
  if (with_err) curve.err_rate = std::move(err);
  return curve;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> v(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * (static_cast<double>(i) / denom);
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<std::pair<std::string, std::vector<double>>> standard_grids() {
  return {
      {"coarse-50", linspace(0.0, 1.0, 50)},
      {"fine-200", linspace(0.0, 1.0, 200)},
      {"zoom-start-200", linspace(0.0, 0.01, 200)},
      {"zoom-end-200", linspace(0.99, 1.0, 200)},
  };
}

std::vector<double> named_grid(std::string_view name) {
  for (auto& [n, g] : standard_grids()) {
    if (n == name) return g;
  }
  throw std::invalid_argument("unknown grid '" + std::string(name) + "'");
}

InterpolationCurve two_solution_curve(const NetworkSpec& spec, const Dataset& train, const Dataset* valid,
                                      const TrajectoryRecord& a, const TrajectoryRecord& b,
                                      std::span<const double> grid, std::size_t threads) {
  if (a.spec_digest != b.spec_digest || a.spec_digest != spec.digest()) {
    throw TrajectoryError(TrajectoryError::Kind::Digest, "trajectories belong to different network specs");
  }
  InterpolationCurve curve = interp_curve(spec, train, valid, a.solution(), b.solution(), grid, threads);
  curve.from = digest_label(a, "solution-a");
  curve.to = digest_label(b, "solution-b");
  return curve;
}

ParamVector random_point(const ParamVector& like, double norm_value, std::uint64_t seed) {
  ParamVector p = ParamVector::zeros(like.manifest_ptr());
  if (norm_value == 0.0) return p;
  CounterRng rng(seed, 0x72616e64ULL);
  for (auto& v : p.values()) v = rng.normal();
  p *= norm_value / norm(p);
  return p;
}

InterpolationCurve random_point_curve(const NetworkSpec& spec, const Dataset& train, const Dataset* valid,
                                      const TrajectoryRecord& record, double norm_scale, std::uint64_t seed,
                                      std::span<const double> grid, std::size_t threads) {
  if (!(norm_scale >= 0.0) || !std::isfinite(norm_scale)) {
    throw std::invalid_argument("norm scale must be finite and non-negative");
  }
  const ParamVector& target = record.solution();
  const ParamVector start = random_point(target, norm_scale * norm(target), seed);
  InterpolationCurve curve = interp_curve(spec, train, valid, start, target, grid, threads);
  curve.from = "random(seed=" + std::to_string(seed) + ", scale=" + format_double_exact(norm_scale) + ")";
  curve.to = digest_label(record, "solution");
  return curve;
}

LineProjector::LineProjector(std::span<const double> start, std::span<const double> end)
    : start_(start.begin(), start.end()), end_(end.begin(), end.end()), unit_(start.size()) {
  if (start.size() != end.size()) throw StructuralError("projection endpoints differ in size");
  for (std::size_t i = 0; i < unit_.size(); ++i) unit_[i] = end[i] - start[i];
  length_ = norm(unit_);
  if (!(length_ > 0.0)) {
    throw TrajectoryError(TrajectoryError::Kind::Degenerate, "solution equals the initial point");
  }
  for (auto& u : unit_) u /= length_;
}

ProjectionPoint LineProjector::project(std::span<const double> point, std::size_t step,
                                       std::vector<double>* residual_dir) const {
  if (point.size() != start_.size()) throw StructuralError("projected point has the wrong size");
  ProjectionPoint pt;
  pt.step = step;
  pt.norm = norm(point);
  if (residual_dir) residual_dir->clear();
  if (same_bits(point, start_)) {
    return pt;
  }
  if (same_bits(point, end_)) {
    pt.alpha = length_;
    pt.alpha_hat = 1.0;
    return pt;
  }
  const std::size_t n = point.size();
  double alpha = 0.0;
  for (std::size_t i = 0; i < n; ++i) alpha += (point[i] - start_[i]) * unit_[i];
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = (point[i] - start_[i]) - alpha * unit_[i];
  const double beta = norm(r);
  double offset2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) offset2 += (point[i] - start_[i]) * (point[i] - start_[i]);
  pt.alpha = alpha;
  pt.alpha_hat = alpha / length_;
  pt.beta = beta;
  pt.residual_ratio = pt.norm > 0.0 ? beta / pt.norm : 0.0;
  if (residual_dir && beta > kDirectionFloor * std::sqrt(offset2)) {
    for (auto& x : r) x /= beta;
    *residual_dir = std::move(r);
  }
  return pt;
}

ProjectionTrace projection_trace(const TrajectoryRecord& record) {
  if (record.snapshots.empty()) throw TrajectoryError(TrajectoryError::Kind::Format, "trajectory has no snapshots");
  const LineProjector projector(record.initial.values(), record.solution().values());
  ProjectionTrace trace;
  trace.length = projector.length();
  trace.solution_index = record.solution_index;
  bool have_objective = true;
  for (const auto& s : record.snapshots) {
    const ProjectionPoint pt = projector.project(s.params.values(), s.epoch);
    trace.max_residual_ratio = std::max(trace.max_residual_ratio, pt.residual_ratio);
    trace.max_beta = std::max(trace.max_beta, pt.beta);
    trace.points.push_back(pt);
    const auto it = std::find_if(record.metrics.begin(), record.metrics.end(),
                                 [&](const EpochMetrics& m) { return m.epoch == s.epoch; });
    if (it == record.metrics.end()) {
      have_objective = false;
    } else {
      trace.objective.push_back(it->train);
    }
  }
  if (!have_objective) trace.objective.clear();
  return trace;
}

std::vector<std::vector<double>> residual_directions(const TrajectoryRecord& record) {
  const LineProjector projector(record.initial.values(), record.solution().values());
  std::vector<std::vector<double>> dirs(record.snapshots.size());
  for (std::size_t i = 0; i < record.snapshots.size(); ++i) {
    projector.project(record.snapshots[i].params.values(), record.snapshots[i].epoch, &dirs[i]);
  }
  return dirs;
}

double default_bump_tolerance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return 1e-6 * (*hi - *lo);
}

BumpReport bump_report(std::span<const double> alpha, std::span<const double> values,
                       std::optional<double> tolerance) {
  if (values.empty()) throw std::invalid_argument("bump_report on an empty curve");
  if (alpha.size() != values.size()) throw std::invalid_argument("alpha and value lengths differ");
  BumpReport report;
  report.tolerance = tolerance.value_or(default_bump_tolerance(values));
  const double tol = report.tolerance;
  const std::size_t n = values.size();

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double inc = values[i + 1] - values[i];
    if (inc > tol) {
      ++report.violations;
      report.upward_mass += inc;
      report.max_violation = std::max(report.max_violation, inc);
    }
  }

  // Collapse runs of identical values so plateaus count once.
  struct Run {
    double value;
    std::size_t first;
    std::size_t last;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!runs.empty() && runs.back().value == values[i]) {
      runs.back().last = i;
    } else {
      runs.push_back({values[i], i, i});
    }
  }
  const double endpoint_max = std::max(values.front(), values.back());
  std::vector<double> prefix_max(runs.size());
  std::vector<double> suffix_max(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    prefix_max[k] = k ? std::max(prefix_max[k - 1], runs[k].value) : runs[k].value;
  }
  for (std::size_t k = runs.size(); k-- > 0;) {
    suffix_max[k] = k + 1 < runs.size() ? std::max(suffix_max[k + 1], runs[k].value) : runs[k].value;
  }
  for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
    const double v = runs[k].value;
    const double left = runs[k - 1].value;
    const double right = runs[k + 1].value;
    if (v > left && v > right && v > endpoint_max + tol) {
      report.barriers.push_back({runs[k].first, alpha[runs[k].first], v, v - endpoint_max});
    }
    if (v < left && v < right) {
      const double depth = std::min(prefix_max[k - 1], suffix_max[k + 1]) - v;
      if (depth > tol) report.minima.push_back(runs[k].first);
    }
  }
  return report;
}

BumpReport bump_report(const InterpolationCurve& curve, std::optional<double> tolerance) {
  return bump_report(curve.alpha, curve.j_train, tolerance);
}

}  // namespace lp
