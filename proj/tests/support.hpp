#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <unistd.h>
#include <vector>

#include "landscape/network.hpp"
#include "landscape/param_vector.hpp"
#include "landscape/rng.hpp"

namespace lp::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("lp_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

inline NetworkSpec scalar_spec() {
  const std::size_t dims[] = {1, 1, 1};
  return build_deep_linear_chain(dims);
}

inline ParamVector scalar_params(double w1, double w2) {
  const NetworkSpec spec = scalar_spec();
  return ParamVector(spec.manifest(), {w1, w2});
}

inline ParamVector random_params(const NetworkSpec& spec, double scale, std::uint64_t seed) {
  CounterRng rng(seed, 99);
  std::vector<double> v(spec.param_count());
  for (auto& x : v) x = scale * rng.normal();
  return ParamVector(spec.manifest(), std::move(v));
}

inline Batch random_batch(const NetworkSpec& spec, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 7);
  Batch b;
  b.inputs = Matrix(n, spec.input_dim());
  for (auto& x : b.inputs.data) x = rng.normal();
  if (spec.loss() == Loss::SoftmaxCrossEntropy) {
    std::vector<std::int32_t> labels(n);
    for (auto& l : labels) l = static_cast<std::int32_t>(rng.below(spec.output_dim()));
    b.targets = std::move(labels);
  } else {
    Matrix t(n, spec.output_dim());
    for (auto& x : t.data) x = rng.normal();
    b.targets = std::move(t);
  }
  return b;
}

/// Straightforward per-example evaluation, written independently of the
/// library's batched implementation.
struct Reference {
  std::vector<std::vector<double>> outputs;
  std::vector<double> losses;
  /// Smallest distance of any ReLU input to 0 or any maxout top-two gap.
  double kink_margin = std::numeric_limits<double>::infinity();
};

inline Reference reference_forward(const NetworkSpec& spec, const ParamVector& params, const Batch& batch) {
  Reference ref;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    std::vector<double> x(batch.inputs.row(r).begin(), batch.inputs.row(r).end());
    std::size_t affine = 0;
    for (const auto& layer : spec.layers()) {
      if (const auto* a = std::get_if<Affine>(&layer)) {
        const auto W = params.segment("affine" + std::to_string(affine) + ".W");
        std::vector<double> y(a->out, 0.0);
        if (a->bias) {
          const auto b = params.segment("affine" + std::to_string(affine) + ".b");
          for (std::size_t j = 0; j < a->out; ++j) y[j] = b[j];
        }
        for (std::size_t i = 0; i < a->in; ++i) {
          for (std::size_t j = 0; j < a->out; ++j) y[j] += x[i] * W[i * a->out + j];
        }
        x = y;
        ++affine;
      } else if (std::holds_alternative<Sigmoid>(layer)) {
        for (auto& v : x) v = 1.0 / (1.0 + std::exp(-v));
      } else if (std::holds_alternative<Relu>(layer)) {
        for (auto& v : x) {
          ref.kink_margin = std::min(ref.kink_margin, std::abs(v));
          v = v > 0.0 ? v : 0.0;
        }
      } else if (const auto* m = std::get_if<Maxout>(&layer)) {
        std::vector<double> y(x.size() / m->pieces);
        for (std::size_t u = 0; u < y.size(); ++u) {
          std::vector<double> pieces(x.begin() + u * m->pieces, x.begin() + (u + 1) * m->pieces);
          std::sort(pieces.begin(), pieces.end());
          ref.kink_margin = std::min(ref.kink_margin, pieces[pieces.size() - 1] - pieces[pieces.size() - 2]);
          y[u] = pieces.back();
        }
        x = y;
      }
    }
    double loss = 0.0;
    if (spec.loss() == Loss::SoftmaxCrossEntropy) {
      const double mx = *std::max_element(x.begin(), x.end());
      double s = 0.0;
      for (double v : x) s += std::exp(v - mx);
      loss = mx + std::log(s) - x[batch.labels()[r]];
    } else {
      for (std::size_t j = 0; j < x.size(); ++j) {
        double t;
        if (batch.has_labels()) {
          t = static_cast<std::size_t>(batch.labels()[r]) == j ? 1.0 : 0.0;
        } else {
          t = batch.target_matrix()(r, j);
        }
        loss += (x[j] - t) * (x[j] - t);
      }
      loss /= static_cast<double>(x.size());
    }
    ref.outputs.push_back(x);
    ref.losses.push_back(loss);
  }
  return ref;
}

/// Central finite differences of a scalar function of the parameters.
inline std::vector<double> fd_gradient(const std::function<double(const ParamVector&)>& f, const ParamVector& p,
                                       double h) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    ParamVector plus = p;
    ParamVector minus = p;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    scale += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12);
}

}  // namespace lp::testing
