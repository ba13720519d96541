#include "landscape/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <vector>

#include "landscape/error.hpp"
#include "landscape/rng.hpp"

namespace lp {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

struct IdxFile {
  std::vector<std::uint32_t> dims;
  std::vector<unsigned char> bytes;
  std::size_t payload_at = 0;
};

IdxFile parse_idx(const std::filesystem::path& path, std::uint32_t magic) {
  IdxFile f;
  f.bytes = read_all(path);
  const std::string name = path.string();
  if (f.bytes.size() < 4) throw DataError(DataError::Kind::Length, name + ": file too short for an IDX header");
  const std::uint32_t got = read_be32(f.bytes, 0);
  if (got != magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad magic 0x%08x (expected 0x%08x)", got, magic);
    throw DataError(DataError::Kind::Format, name + ": " + buf);
  }
  const std::size_t ndims = magic & 0xffu;
  f.payload_at = 4 + 4 * ndims;
  if (f.bytes.size() < f.payload_at) {
    throw DataError(DataError::Kind::Length, name + ": truncated IDX header");
  }
  std::size_t expected = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    f.dims.push_back(read_be32(f.bytes, 4 + 4 * d));
    expected *= f.dims.back();
  }
  const std::size_t payload = f.bytes.size() - f.payload_at;
  if (payload != expected) {
    throw DataError(DataError::Kind::Length, name + ": header declares " + std::to_string(expected) +
                                                 " payload bytes but file holds " + std::to_string(payload));
  }
  return f;
}

}  // namespace

Dataset gen_two_gaussians(std::size_t n, std::size_t dim, double separation, std::uint64_t seed) {
  if (n < 2) throw DataError(DataError::Kind::Argument, "two-gaussians needs n >= 2");
  if (dim < 1) throw DataError(DataError::Kind::Argument, "two-gaussians needs dim >= 1");
  CounterRng rng(seed, 0x6761757373ULL);
  Dataset data;
  data.classes = 2;
  data.examples.inputs = Matrix(n, dim);
  std::vector<std::int32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::int32_t>(i % 2);
    const double centre = (labels[i] == 0 ? -0.5 : 0.5) * separation;
    for (std::size_t j = 0; j < dim; ++j) data.examples.inputs(i, j) = centre + rng.normal();
  }
  data.examples.targets = std::move(labels);
  return data;
}

Dataset gen_scalar_regression() {
  Dataset data;
  data.examples.inputs = Matrix(1, 1, 1.0);
  data.examples.targets = Matrix(1, 1, 1.0);
  return data;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const IdxFile img = parse_idx(images, kImageMagic);
  const IdxFile lab = parse_idx(labels, kLabelMagic);
  if (img.dims[0] != lab.dims[0]) {
    throw DataError(DataError::Kind::Consistency, images.string() + " holds " + std::to_string(img.dims[0]) +
                                                      " images but " + labels.string() + " holds " +
                                                      std::to_string(lab.dims[0]) + " labels");
  }
  const std::size_t n = img.dims[0];
  const std::size_t d = std::size_t{img.dims[1]} * img.dims[2];
  if (n == 0 || d == 0) throw DataError(DataError::Kind::Length, images.string() + ": empty IDX dataset");
  Dataset data;
  data.examples.inputs = Matrix(n, d);
  for (std::size_t i = 0; i < n * d; ++i) {
    data.examples.inputs.data[i] = static_cast<double>(img.bytes[img.payload_at + i]) / 255.0;
  }
  std::vector<std::int32_t> ys(n);
  std::int32_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ys[i] = lab.bytes[lab.payload_at + i];
    max_label = std::max(max_label, ys[i]);
  }
  data.classes = static_cast<std::size_t>(max_label) + 1;
  data.examples.targets = std::move(ys);
  return data;
}

void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels,
               std::size_t rows, std::size_t cols) {
  if (!data.examples.has_labels()) throw DataError(DataError::Kind::Argument, "IDX export needs labels");
  if (rows * cols != data.examples.inputs.cols) {
    throw DataError(DataError::Kind::Argument, "rows * cols must equal the input width");
  }
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw DataError(DataError::Kind::Io, "cannot write IDX files");
  const auto n = static_cast<std::uint32_t>(data.size());
  write_be32(img, kImageMagic);
  write_be32(img, n);
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  for (double v : data.examples.inputs.data) {
    const double q = std::clamp(std::round(v * 255.0), 0.0, 255.0);
    img.put(static_cast<char>(static_cast<unsigned char>(q)));
  }
  write_be32(lab, kLabelMagic);
  write_be32(lab, n);
  for (auto y : data.examples.labels()) {
    if (y < 0 || y > 255) throw DataError(DataError::Kind::Argument, "label does not fit in a byte");
    lab.put(static_cast<char>(static_cast<unsigned char>(y)));
  }
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices, SplitTag tag) {
  Dataset out;
  out.classes = data.classes;
  out.tag = tag;
  const Matrix& x = data.examples.inputs;
  out.examples.inputs = Matrix(indices.size(), x.cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = x.row(indices[i]);
    std::copy(src.begin(), src.end(), out.examples.inputs.row(i).begin());
  }
  if (data.examples.has_labels()) {
    std::vector<std::int32_t> ys(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) ys[i] = data.examples.labels()[indices[i]];
    out.examples.targets = std::move(ys);
  } else {
    const Matrix& t = data.examples.target_matrix();
    Matrix ts(indices.size(), t.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = t.row(indices[i]);
      std::copy(src.begin(), src.end(), ts.row(i).begin());
    }
    out.examples.targets = std::move(ts);
  }
  return out;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(seed, stream);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  return perm;
}

Splits split(const Dataset& data, std::array<double, 3> fractions, std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw DataError(DataError::Kind::Argument, "split fractions must be finite and non-negative");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError(DataError::Kind::Argument, "split fractions must sum to 1");

  const std::size_t n = data.size();
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double quota = fractions[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(quota));
    remainder[k] = quota - std::floor(quota);
    assigned += sizes[k];
  }
  // Largest remainder first; ties go to the earlier split.
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
    if (fractions[order[k]] > 0.0) {
      ++sizes[order[k]];
      ++assigned;
    }
  }
  while (assigned > n) {
    for (std::size_t k = 3; k-- > 0 && assigned > n;) {
      if (sizes[k] > 0) {
        --sizes[k];
        --assigned;
      }
    }
  }

  const auto perm = permutation(n, seed, 0x73706c6974ULL);
  const std::span<const std::size_t> all(perm);
  Splits out;
  out.train = subset(data, all.subspan(0, sizes[0]), SplitTag::Train);
  out.valid = subset(data, all.subspan(sizes[0], sizes[1]), SplitTag::Valid);
  out.test = subset(data, all.subspan(sizes[0] + sizes[1], sizes[2]), SplitTag::Test);
  return out;
}

}  // namespace lp
