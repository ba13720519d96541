#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lp {

/// A named rows x cols block inside a flat parameter vector.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  bool operator==(const Segment&) const = default;
};

/// Ordered, contiguous, non-overlapping segment layout.
class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t total_size() const noexcept { return total_; }

  /// Throws StructuralError when no segment has this name.
  const Segment& find(std::string_view name) const;

  bool operator==(const Manifest&) const = default;

 private:
  std::vector<Segment> segments_;
  std::size_t total_ = 0;
};

using ManifestPtr = std::shared_ptr<const Manifest>;

/// Flat vector of 64-bit parameters tagged with its layout. Binary arithmetic
/// requires identical manifests and throws StructuralError otherwise.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(ManifestPtr manifest, std::vector<double> values);

  static ParamVector zeros(ManifestPtr manifest);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  const Manifest& manifest() const;
  const ManifestPtr& manifest_ptr() const noexcept { return manifest_; }

  std::span<const double> segment(std::string_view name) const;
  std::span<double> segment(std::string_view name);

  bool same_layout(const ParamVector& other) const;
  /// Throws StructuralError unless same_layout(other).
  void require_same_layout(const ParamVector& other) const;

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator-=(const ParamVector& other);
  ParamVector& operator*=(double scale);

  /// this += scale * other
  ParamVector& axpy(double scale, const ParamVector& other);

  bool all_finite() const noexcept;

  /// Same layout and every value has the identical bit pattern.
  bool bitwise_equal(const ParamVector& other) const;

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.same_layout(b) && a.values_ == b.values_;
  }

 private:
  ManifestPtr manifest_;
  std::vector<double> values_;
};

ParamVector operator+(ParamVector a, const ParamVector& b);
ParamVector operator-(ParamVector a, const ParamVector& b);
ParamVector operator*(double s, ParamVector a);

/// Left-to-right dot product.
double dot(std::span<const double> a, std::span<const double> b);
double dot(const ParamVector& a, const ParamVector& b);
double norm(std::span<const double> a);
double norm(const ParamVector& a);

}  // namespace lp
