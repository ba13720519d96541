#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "landscape/network.hpp"

namespace lp {

enum class SplitTag { Train, Valid, Test };

/// Immutable labelled (or regression) dataset.
struct Dataset {
  Batch examples;
  /// Number of classes for labelled data, 0 for real-valued targets.
  std::size_t classes = 0;
  SplitTag tag = SplitTag::Train;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return size() == 0; }
  operator const Batch&() const noexcept { return examples; }
};

/// n points, classes alternating 0,1,0,...; class 0 is centred at
/// -(separation/2)*1 and class 1 at +(separation/2)*1 with unit variance.
Dataset gen_two_gaussians(std::size_t n, std::size_t dim, double separation, std::uint64_t seed);

/// The single example x = 1, y = 1 of the scalar factored model.
Dataset gen_scalar_regression();

/// Reads an IDX image file (magic 0x00000803) and label file (magic
/// 0x00000801). Pixels are scaled by 1/255.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writes images quantized to bytes (round(x*255), clamped) with shape
/// n x rows x cols; rows * cols must equal the input width.
void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels,
               std::size_t rows, std::size_t cols);

Dataset subset(const Dataset& data, std::span<const std::size_t> indices, SplitTag tag);

struct Splits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

/// Random permutation (seeded) cut into train/valid/test. Fractions must be
/// non-negative and sum to 1 within 1e-9; sizes use the largest-remainder
/// method so they sum to n exactly. Splits may be empty.
Splits split(const Dataset& data, std::array<double, 3> fractions, std::uint64_t seed);

/// Fisher-Yates permutation of [0, n) from a counter-based stream.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, std::uint64_t stream);

}  // namespace lp
