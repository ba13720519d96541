#include "landscape/param_vector.hpp"

#include <cmath>
#include <cstring>

#include "landscape/error.hpp"

namespace lp {

Manifest::Manifest(std::vector<Segment> segments) : segments_(std::move(segments)) {
  std::size_t offset = 0;
  for (const auto& s : segments_) {
    if (s.offset != offset) {
      throw StructuralError("manifest segment '" + s.name + "' is not contiguous");
    }
    offset += s.size();
  }
  total_ = offset;
}

const Segment& Manifest::find(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw StructuralError("no parameter segment named '" + std::string(name) + "'");
}

ParamVector::ParamVector(ManifestPtr manifest, std::vector<double> values)
    : manifest_(std::move(manifest)), values_(std::move(values)) {
  if (!manifest_) throw StructuralError("parameter vector without manifest");
  if (manifest_->total_size() != values_.size()) {
    throw StructuralError("parameter count " + std::to_string(values_.size()) +
                          " does not match manifest size " +
                          std::to_string(manifest_->total_size()));
  }
}

ParamVector ParamVector::zeros(ManifestPtr manifest) {
  const std::size_t n = manifest ? manifest->total_size() : 0;
  return ParamVector(std::move(manifest), std::vector<double>(n, 0.0));
}

const Manifest& ParamVector::manifest() const {
  if (!manifest_) throw StructuralError("parameter vector without manifest");
  return *manifest_;
}

std::span<const double> ParamVector::segment(std::string_view name) const {
  const auto& s = manifest().find(name);
  return std::span<const double>(values_).subspan(s.offset, s.size());
}

std::span<double> ParamVector::segment(std::string_view name) {
  const auto& s = manifest().find(name);
  return std::span<double>(values_).subspan(s.offset, s.size());
}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (manifest_ == other.manifest_) return true;
  if (!manifest_ || !other.manifest_) return false;
  return *manifest_ == *other.manifest_;
}

void ParamVector::require_same_layout(const ParamVector& other) const {
  if (!same_layout(other)) throw StructuralError("parameter manifests differ");
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  require_same_layout(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& other) {
  require_same_layout(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

ParamVector& ParamVector::axpy(double scale, const ParamVector& other) {
  require_same_layout(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
  return *this;
}

bool ParamVector::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool ParamVector::bitwise_equal(const ParamVector& other) const {
  return same_layout(other) && values_.size() == other.values_.size() &&
         (values_.empty() ||
          std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0);
}

ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
ParamVector operator*(double s, ParamVector a) { return a *= s; }

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double dot(const ParamVector& a, const ParamVector& b) {
  a.require_same_layout(b);
  return dot(a.values(), b.values());
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }
double norm(const ParamVector& a) { return norm(a.values()); }

}  // namespace lp
