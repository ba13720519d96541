#include "landscape/train.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "landscape/rng.hpp"

namespace lp {
namespace {

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

void require_finite(double v, std::size_t epoch, const ParamVector& last_finite) {
  if (!std::isfinite(v)) {
    throw DivergedError("training diverged at epoch " + std::to_string(epoch), epoch, last_finite);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (snapshot_every < 1) throw std::invalid_argument("snapshot_every must be >= 1");
}

const EpochMetrics& TrajectoryRecord::metrics_at(std::size_t epoch) const {
  for (const auto& m : metrics) {
    if (m.epoch == epoch) return m;
  }
  throw std::out_of_range("no metrics recorded for epoch " + std::to_string(epoch));
}

bool TrajectoryRecord::bitwise_equal(const TrajectoryRecord& other) const {
  if (spec_text != other.spec_text || spec_digest != other.spec_digest ||
      solution_index != other.solution_index || snapshots.size() != other.snapshots.size() ||
      metrics.size() != other.metrics.size() || !initial.bitwise_equal(other.initial)) {
    return false;
  }
  if (!bits_equal(config.learning_rate, other.config.learning_rate) ||
      !bits_equal(config.momentum, other.config.momentum) || config.batch_size != other.config.batch_size ||
      config.max_epochs != other.config.max_epochs || config.patience != other.config.patience ||
      config.snapshot_every != other.config.snapshot_every || config.seed != other.config.seed) {
    return false;
  }
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i].epoch != other.snapshots[i].epoch ||
        !snapshots[i].params.bitwise_equal(other.snapshots[i].params)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (metrics[i].epoch != other.metrics[i].epoch || !bits_equal(metrics[i].train, other.metrics[i].train) ||
        !bits_equal(metrics[i].valid, other.metrics[i].valid)) {
      return false;
    }
  }
  return true;
}

ParamVector init_params(const NetworkSpec& spec, double scale, std::uint64_t seed) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("init scale must be > 0");
  ParamVector params = ParamVector::zeros(spec.manifest());
  CounterRng rng(seed, 0x696e6974ULL);
  auto values = params.values();
  for (const auto& seg : spec.manifest()->segments()) {
    if (!seg.name.ends_with(".W")) continue;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      values[seg.offset + i] = scale * (2.0 * rng.uniform_open() - 1.0);
    }
  }
  return params;
}

TrajectoryRecord sgd_train(const NetworkSpec& spec, const ParamVector& initial, const Dataset& train,
                           const Dataset* valid, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("sgd_train needs a non-empty training split");
  if (!(initial.manifest() == *spec.manifest())) {
    throw StructuralError("initial parameters do not match the network spec");
  }
  const Dataset& val = (valid && !valid->empty()) ? *valid : train;
  const std::size_t n = train.size();
  const bool full_batch = config.batch_size >= n;

  TrajectoryRecord record;
  record.spec_text = spec.to_string();
  record.spec_digest = spec.digest();
  record.initial = initial;
  record.config = config;

  auto evaluate = [&](const ParamVector& p, std::size_t epoch) {
    EpochMetrics m{epoch, loss_total(spec, p, train).mean, loss_total(spec, p, val).mean};
    return m;
  };

  ParamVector theta = initial;
  ParamVector velocity = ParamVector::zeros(spec.manifest());
  ParamVector last_finite = theta;

  const EpochMetrics first = evaluate(theta, 0);
  require_finite(first.train, 0, last_finite);
  require_finite(first.valid, 0, last_finite);
  record.metrics.push_back(first);
  record.snapshots.push_back({0, theta});
  double best = first.valid;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Full-batch steps keep index order so one step matches grad() exactly.
    if (!full_batch) order = permutation(n, config.seed, epoch);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(config.batch_size, n - start));
      const LossAndGrad lg = loss_and_grad(spec, theta, train, rows);
      require_finite(lg.loss_sum, epoch, last_finite);
      const double count = static_cast<double>(rows.size());
      auto v = velocity.values();
      auto g = lg.gradient.values();
      auto t = theta.values();
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = config.momentum * v[i] - config.learning_rate * (g[i] / count);
        t[i] += v[i];
      }
      if (!theta.all_finite()) {
        throw DivergedError("parameters became non-finite at epoch " + std::to_string(epoch), epoch, last_finite);
      }
    }
    const EpochMetrics m = evaluate(theta, epoch);
    require_finite(m.train, epoch, last_finite);
    require_finite(m.valid, epoch, last_finite);
    last_finite = theta;
    record.metrics.push_back(m);

    const bool improved = m.valid < best;
    if (improved) {
      best = m.valid;
      since_best = 0;
    } else {
      ++since_best;
    }
    const bool last = epoch == config.max_epochs || (config.patience > 0 && since_best >= config.patience);
    if (improved || epoch % config.snapshot_every == 0 || last) {
      record.snapshots.push_back({epoch, theta});
      if (improved) record.solution_index = record.snapshots.size() - 1;
    }
    if (last) break;
  }
  return record;
}

}  // namespace lp
