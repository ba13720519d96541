#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "landscape/param_vector.hpp"

namespace lp {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

// Layer descriptors. Affine computes y = x W + b with W stored (in x out), so
// column j of W and entry j of b belong to output unit j.
struct Affine {
  std::size_t in = 0;
  std::size_t out = 0;
  bool bias = true;
  bool operator==(const Affine&) const = default;
};
struct Sigmoid {
  bool operator==(const Sigmoid&) const = default;
};
struct Relu {
  bool operator==(const Relu&) const = default;
};
/// Max over `pieces` consecutive inputs: unit u reads inputs [u*k, u*k+k).
struct Maxout {
  std::size_t pieces = 2;
  bool operator==(const Maxout&) const = default;
};
struct Identity {
  bool operator==(const Identity&) const = default;
};

using Layer = std::variant<Affine, Sigmoid, Relu, Maxout, Identity>;

enum class Loss { SoftmaxCrossEntropy, MeanSquaredError };

std::string_view loss_name(Loss loss);
Loss parse_loss(std::string_view name);

/// Immutable feedforward architecture. Construction validates dimension
/// consistency and builds the parameter manifest ("affine<k>.W", "affine<k>.b").
class NetworkSpec {
 public:
  NetworkSpec(std::vector<Layer> layers, Loss loss);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  Loss loss() const noexcept { return loss_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t param_count() const noexcept { return manifest_->total_size(); }
  const ManifestPtr& manifest() const noexcept { return manifest_; }

  /// Number of affine layers.
  std::size_t affine_count() const noexcept { return affine_layer_index_.size(); }
  /// Position in layers() of the k-th affine layer.
  std::size_t affine_layer_index(std::size_t k) const { return affine_layer_index_.at(k); }

  /// Canonical one-line text form, e.g.
  /// "loss=softmax-cross-entropy layers=affine(10,64),relu,affine(64,2)".
  std::string to_string() const;
  static NetworkSpec parse(std::string_view text);
  /// Layer list only, e.g. "affine(10,64), relu, linear(64,2)".
  static std::vector<Layer> parse_layers(std::string_view text);

  /// FNV-1a 64-bit hash of to_string().
  std::uint64_t digest() const;

  bool operator==(const NetworkSpec& other) const {
    return layers_ == other.layers_ && loss_ == other.loss_;
  }

 private:
  std::vector<Layer> layers_;
  Loss loss_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<std::size_t> affine_layer_index_;
  ManifestPtr manifest_;
};

/// Inputs and targets. Targets are either class labels or a real matrix.
struct Batch {
  Matrix inputs;
  std::variant<std::vector<std::int32_t>, Matrix> targets;

  std::size_t size() const noexcept { return inputs.rows; }
  bool has_labels() const noexcept { return std::holds_alternative<std::vector<std::int32_t>>(targets); }
  const std::vector<std::int32_t>& labels() const { return std::get<std::vector<std::int32_t>>(targets); }
  const Matrix& target_matrix() const { return std::get<Matrix>(targets); }

  /// Throws StructuralError when row counts disagree.
  void validate() const;
};

struct ForwardResult {
  Matrix outputs;
  std::vector<double> losses;
  /// Examples whose loss is non-finite.
  std::vector<bool> invalid;
  std::size_t invalid_count = 0;
};

/// Per-example losses and network outputs. MSE is the mean over output
/// components of the squared error; labels are one-hot encoded for MSE.
ForwardResult forward(const NetworkSpec& spec, const ParamVector& params, const Batch& batch);

struct LossTotal {
  double sum = 0.0;
  double mean = 0.0;
  /// Misclassified examples (argmax, lowest index on ties); labels only.
  std::size_t errors = 0;
  std::size_t count = 0;
};

/// Correctly rounded sum of the per-example losses, so totals do not depend
/// on grouping: a dataset repeated twice sums to exactly twice the original.
/// Throws on an empty dataset.
LossTotal loss_total(const NetworkSpec& spec, const ParamVector& params, const Batch& batch);

/// Gradient of the summed batch loss.
ParamVector grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch);

struct LossAndGrad {
  double loss_sum = 0.0;
  ParamVector gradient;
};

/// Summed loss and its gradient over the listed rows, accumulated in the
/// listed order.
LossAndGrad loss_and_grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch,
                          std::span<const std::size_t> rows);
LossAndGrad loss_and_grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch);

using GradientFn = std::function<ParamVector(const ParamVector&)>;

/// Scalar objective with gradient, used by curvature and flow analyses.
struct Objective {
  std::function<double(const ParamVector&)> value;
  GradientFn gradient;
};

/// Summed-loss objective over `batch`. The batch is captured by reference.
Objective summed_objective(const NetworkSpec& spec, const Batch& batch);

/// Hessian-vector product by central differences of the gradient with
/// h = 1e-4 * max(1, |params|) / max(1e-12, |direction|). A zero direction
/// yields the zero vector.
ParamVector hvp(const GradientFn& gradient, const ParamVector& params, const ParamVector& direction);
ParamVector hvp(const NetworkSpec& spec, const ParamVector& params, const ParamVector& direction,
                const Batch& batch);

/// Scales column `unit` and bias `unit` of affine layer `affine_index` by
/// gamma and divides row `unit` of the next affine layer by gamma. The affine
/// layer must be followed by a ReLU and another affine layer; gamma > 0.
ParamVector rescale_relu(const NetworkSpec& spec, const ParamVector& params, std::size_t affine_index,
                         std::size_t unit, double gamma);

/// Bias-free affine layers with identity activations and MSE loss.
NetworkSpec build_deep_linear_chain(std::span<const std::size_t> dims);

}  // namespace lp
