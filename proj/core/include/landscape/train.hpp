#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "landscape/dataset.hpp"
#include "landscape/error.hpp"
#include "landscape/network.hpp"

namespace lp {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 10;
  /// Stop after this many epochs without validation improvement; 0 disables.
  std::size_t patience = 0;
  std::size_t snapshot_every = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct Snapshot {
  std::size_t epoch = 0;
  ParamVector params;
  bool operator==(const Snapshot&) const = default;
};

/// Mean per-example objectives after an epoch (epoch 0 is the initial point).
struct EpochMetrics {
  std::size_t epoch = 0;
  double train = 0.0;
  double valid = 0.0;
  bool operator==(const EpochMetrics&) const = default;
};

struct TrajectoryRecord {
  std::string spec_text;
  std::uint64_t spec_digest = 0;
  ParamVector initial;
  std::vector<Snapshot> snapshots;
  std::size_t solution_index = 0;
  std::vector<EpochMetrics> metrics;
  TrainConfig config;

  NetworkSpec spec() const { return NetworkSpec::parse(spec_text); }
  const ParamVector& solution() const { return snapshots.at(solution_index).params; }
  /// Metrics row for the given epoch; throws if it was not recorded.
  const EpochMetrics& metrics_at(std::size_t epoch) const;

  /// Every value, including every 64-bit real, is bit-identical.
  bool bitwise_equal(const TrajectoryRecord& other) const;
};

/// Raised when a training objective becomes non-finite.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, std::size_t epoch, ParamVector last_finite)
      : Error(what), epoch_(epoch), last_finite_(std::move(last_finite)) {}

  std::size_t epoch() const noexcept { return epoch_; }
  const ParamVector& last_finite() const noexcept { return last_finite_; }

 private:
  std::size_t epoch_;
  ParamVector last_finite_;
};

/// Weights uniform in (-scale, scale), biases zero.
ParamVector init_params(const NetworkSpec& spec, double scale, std::uint64_t seed);

/// Minibatch SGD with momentum: v <- mu v - eps g, theta <- theta + v, where g
/// is the mean gradient over the minibatch. Minibatch order is a fresh
/// permutation per epoch drawn from stream (seed, epoch).
///
/// A snapshot is taken at epoch 0, every `snapshot_every` epochs, at every
/// epoch that improves the validation objective, and at the final epoch. The
/// solution is the snapshot with the lowest validation objective (earliest on
/// ties). Without a validation split the training objective is used.
TrajectoryRecord sgd_train(const NetworkSpec& spec, const ParamVector& initial, const Dataset& train,
                           const Dataset* valid, const TrainConfig& config);

/// Binary trajectory format: "LPTRAJ1\n", a key=value text header ending in
/// "end\n", little-endian float64 payload, and a little-endian u64 footer
/// holding the byte count that precedes it.
void save_trajectory(const TrajectoryRecord& record, const std::filesystem::path& path);
TrajectoryRecord load_trajectory(const std::filesystem::path& path);
/// As above, additionally requiring the record to belong to `expected`.
TrajectoryRecord load_trajectory(const std::filesystem::path& path, const NetworkSpec& expected);

/// Shortest decimal text that parses back to the same double.
std::string format_double_exact(double v);

}  // namespace lp
