#include "landscape/network.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "landscape/error.hpp"

namespace lp {
namespace {

constexpr std::size_t kChunkRows = 128;

/// Correctly rounded running sum (Shewchuk partials), so a total does not
/// depend on how the terms are grouped.
class ExactSum {
 public:
  void add(double x) {
    if (!std::isfinite(x)) {
      special_ += x;
      return;
    }
    std::size_t used = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[used++] = lo;
      x = hi;
    }
    partials_.resize(used);
    partials_.push_back(x);
  }

  double value() const {
    if (special_ != 0.0 || std::isnan(special_)) return special_;
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
  double special_ = 0.0;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::size_t parse_count(std::string_view s, std::string_view context) {
  const std::string t = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw StructuralError("bad integer '" + t + "' in " + std::string(context));
  }
  return v;
}

struct AffineSlot {
  std::size_t layer = 0;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t w = 0;
  std::size_t b = 0;
  bool has_bias = false;
};

std::vector<AffineSlot> affine_slots(const NetworkSpec& spec) {
  std::vector<AffineSlot> slots;
  const auto& segs = spec.manifest()->segments();
  std::size_t seg = 0;
  for (std::size_t l = 0; l < spec.layers().size(); ++l) {
    if (const auto* a = std::get_if<Affine>(&spec.layers()[l])) {
      AffineSlot s{l, a->in, a->out, segs[seg++].offset, 0, a->bias};
      if (a->bias) s.b = segs[seg++].offset;
      slots.push_back(s);
    }
  }
  return slots;
}

void require_matching(const NetworkSpec& spec, const ParamVector& params) {
  if (params.manifest_ptr() != spec.manifest() &&
      (!params.manifest_ptr() || !(*params.manifest_ptr() == *spec.manifest()))) {
    throw StructuralError("parameter manifest does not match network spec");
  }
}

void require_batch(const NetworkSpec& spec, const Batch& batch) {
  batch.validate();
  if (batch.inputs.cols != spec.input_dim()) {
    throw StructuralError("batch input width " + std::to_string(batch.inputs.cols) +
                          " does not match network input " + std::to_string(spec.input_dim()));
  }
  if (!batch.has_labels() && batch.target_matrix().cols != spec.output_dim()) {
    throw StructuralError("target width does not match network output");
  }
  if (batch.has_labels()) {
    for (auto label : batch.labels()) {
      if (label < 0 || static_cast<std::size_t>(label) >= spec.output_dim()) {
        throw StructuralError("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(spec.output_dim()) + ")");
      }
    }
  }
}

// Evaluates the network over chunks of rows. All reductions over examples run
// in the order rows are supplied, independent of the chunk size.
class Evaluator {
 public:
  Evaluator(const NetworkSpec& spec, const ParamVector& params, const Batch& batch)
      : spec_(spec), params_(params.values()), batch_(batch), slots_(affine_slots(spec)),
        acts_(spec.layers().size() + 1), winners_(spec.layers().size()) {
    require_matching(spec, params);
    require_batch(spec, batch);
    finite_params_ = params.all_finite();
  }

  bool finite_params() const { return finite_params_; }
  const Matrix& output() const { return acts_.back(); }

  void forward_chunk(std::span<const std::size_t> rows) {
    Matrix& x0 = acts_[0];
    x0.rows = rows.size();
    x0.cols = spec_.input_dim();
    x0.data.resize(x0.rows * x0.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = batch_.inputs.row(rows[i]);
      std::copy(src.begin(), src.end(), x0.row(i).begin());
    }
    std::size_t affine = 0;
    for (std::size_t l = 0; l < spec_.layers().size(); ++l) {
      const Matrix& x = acts_[l];
      Matrix& y = acts_[l + 1];
      std::visit(Overloaded{
                     [&](const Affine&) { affine_forward(slots_[affine++], x, y); },
                     [&](const Sigmoid&) {
                       resize(y, x.rows, x.cols);
                       for (std::size_t i = 0; i < x.data.size(); ++i) {
                         y.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
                       }
                     },
                     [&](const Relu&) {
                       resize(y, x.rows, x.cols);
                       for (std::size_t i = 0; i < x.data.size(); ++i) {
                         y.data[i] = x.data[i] > 0.0 || std::isnan(x.data[i]) ? x.data[i] : 0.0;
                       }
                     },
                     [&](const Maxout& m) { maxout_forward(m.pieces, x, y, winners_[l]); },
                     [&](const Identity&) { y = x; },
                 },
                 spec_.layers()[l]);
    }
  }

  /// Loss of chunk row i (example `example`); writes dLoss/dOutput when grad != nullptr.
  double example_loss(std::size_t i, std::size_t example, double* grad) const {
    const auto z = output().row(i);
    const std::size_t k = z.size();
    if (spec_.loss() == Loss::SoftmaxCrossEntropy) {
      const auto label = static_cast<std::size_t>(target_label(example));
      double m = z[0];
      for (std::size_t j = 1; j < k; ++j) m = std::max(m, z[j]);
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += std::exp(z[j] - m);
      const double loss = m + std::log(s) - z[label];
      if (grad) {
        for (std::size_t j = 0; j < k; ++j) grad[j] = std::exp(z[j] - m) / s;
        grad[label] -= 1.0;
      }
      return loss;
    }
    double loss = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double diff = z[j] - target_value(example, j);
      loss += diff * diff;
      if (grad) grad[j] = 2.0 * diff / static_cast<double>(k);
    }
    return loss / static_cast<double>(k);
  }

  /// Accumulates into `out` the parameter gradient for the chunk given dLoss/dOutput.
  void backward_chunk(Matrix delta, std::span<double> out) {
    std::size_t affine = slots_.size();
    Matrix prev;
    for (std::size_t l = spec_.layers().size(); l-- > 0;) {
      const Matrix& x = acts_[l];
      const Matrix& y = acts_[l + 1];
      std::visit(Overloaded{
                     [&](const Affine&) {
                       const AffineSlot& s = slots_[--affine];
                       affine_backward(s, x, delta, out, prev, l > 0);
                     },
                     [&](const Sigmoid&) {
                       prev = std::move(delta);
                       for (std::size_t i = 0; i < prev.data.size(); ++i) {
                         prev.data[i] *= y.data[i] * (1.0 - y.data[i]);
                       }
                     },
                     [&](const Relu&) {
                       prev = std::move(delta);
                       for (std::size_t i = 0; i < prev.data.size(); ++i) {
                         if (!(x.data[i] > 0.0)) prev.data[i] = 0.0;
                       }
                     },
                     [&](const Maxout& m) {
                       resize(prev, x.rows, x.cols);
                       std::fill(prev.data.begin(), prev.data.end(), 0.0);
                       const auto& win = winners_[l];
                       for (std::size_t i = 0; i < y.rows; ++i) {
                         for (std::size_t u = 0; u < y.cols; ++u) {
                           prev(i, u * m.pieces + win[i * y.cols + u]) = delta(i, u);
                         }
                       }
                     },
                     [&](const Identity&) { prev = std::move(delta); },
                 },
                 spec_.layers()[l]);
      delta = std::move(prev);
      prev = Matrix();
    }
  }

  std::int32_t target_label(std::size_t example) const { return batch_.labels()[example]; }

 private:
  static void resize(Matrix& m, std::size_t r, std::size_t c) {
    m.rows = r;
    m.cols = c;
    m.data.resize(r * c);
  }

  double target_value(std::size_t example, std::size_t j) const {
    if (batch_.has_labels()) {
      return static_cast<std::size_t>(batch_.labels()[example]) == j ? 1.0 : 0.0;
    }
    return batch_.target_matrix()(example, j);
  }

  void affine_forward(const AffineSlot& s, const Matrix& x, Matrix& y) const {
    resize(y, x.rows, s.out);
    const double* w = params_.data() + s.w;
    for (std::size_t i = 0; i < x.rows; ++i) {
      double* yr = y.data.data() + i * s.out;
      std::fill(yr, yr + s.out, 0.0);
      const double* xr = x.data.data() + i * s.in;
      for (std::size_t p = 0; p < s.in; ++p) {
        const double xp = xr[p];
        const double* wr = w + p * s.out;
        for (std::size_t q = 0; q < s.out; ++q) yr[q] += xp * wr[q];
      }
      if (s.has_bias) {
        const double* b = params_.data() + s.b;
        for (std::size_t q = 0; q < s.out; ++q) yr[q] += b[q];
      }
    }
  }

  void affine_backward(const AffineSlot& s, const Matrix& x, const Matrix& delta, std::span<double> out,
                       Matrix& prev, bool need_prev) const {
    double* dw = out.data() + s.w;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double* xr = x.data.data() + i * s.in;
      const double* dr = delta.data.data() + i * s.out;
      for (std::size_t p = 0; p < s.in; ++p) {
        const double xp = xr[p];
        double* dwr = dw + p * s.out;
        for (std::size_t q = 0; q < s.out; ++q) dwr[q] += xp * dr[q];
      }
      if (s.has_bias) {
        double* db = out.data() + s.b;
        for (std::size_t q = 0; q < s.out; ++q) db[q] += dr[q];
      }
    }
    if (!need_prev) return;
    resize(prev, x.rows, s.in);
    const double* w = params_.data() + s.w;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double* dr = delta.data.data() + i * s.out;
      double* pr = prev.data.data() + i * s.in;
      for (std::size_t p = 0; p < s.in; ++p) {
        const double* wr = w + p * s.out;
        double acc = 0.0;
        for (std::size_t q = 0; q < s.out; ++q) acc += dr[q] * wr[q];
        pr[p] = acc;
      }
    }
  }

  static void maxout_forward(std::size_t k, const Matrix& x, Matrix& y, std::vector<std::uint32_t>& win) {
    const std::size_t units = x.cols / k;
    resize(y, x.rows, units);
    win.assign(x.rows * units, 0);
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t u = 0; u < units; ++u) {
        const double* piece = x.data.data() + i * x.cols + u * k;
        std::uint32_t best = 0;
        for (std::uint32_t j = 1; j < k; ++j) {
          if (piece[j] > piece[best]) best = j;
        }
        y(i, u) = piece[best];
        win[i * units + u] = best;
      }
    }
  }

  const NetworkSpec& spec_;
  std::span<const double> params_;
  const Batch& batch_;
  std::vector<AffineSlot> slots_;
  std::vector<Matrix> acts_;
  std::vector<std::vector<std::uint32_t>> winners_;
  bool finite_params_ = true;
};

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

std::size_t argmax(std::span<const double> z) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < z.size(); ++j) {
    if (z[j] > z[best]) best = j;
  }
  return best;
}

}  // namespace

std::string_view loss_name(Loss loss) {
  return loss == Loss::SoftmaxCrossEntropy ? "softmax-cross-entropy" : "mean-squared-error";
}

Loss parse_loss(std::string_view name) {
  const std::string n = trim(name);
  if (n == "softmax-cross-entropy" || n == "cross-entropy") return Loss::SoftmaxCrossEntropy;
  if (n == "mean-squared-error" || n == "mse") return Loss::MeanSquaredError;
  throw StructuralError("unknown loss '" + n + "'");
}

NetworkSpec::NetworkSpec(std::vector<Layer> layers, Loss loss) : layers_(std::move(layers)), loss_(loss) {
  std::vector<Segment> segments;
  std::size_t width = 0;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (const auto* a = std::get_if<Affine>(&layer)) {
      if (a->in == 0 || a->out == 0) throw StructuralError("affine layer with zero width");
      if (affine_layer_index_.empty()) {
        input_dim_ = a->in;
      } else if (a->in != width) {
        throw StructuralError("layer " + std::to_string(l) + " expects width " + std::to_string(a->in) +
                              " but receives " + std::to_string(width));
      }
      const std::string name = "affine" + std::to_string(affine_layer_index_.size());
      segments.push_back({name + ".W", offset, a->in, a->out});
      offset += a->in * a->out;
      if (a->bias) {
        segments.push_back({name + ".b", offset, 1, a->out});
        offset += a->out;
      }
      affine_layer_index_.push_back(l);
      width = a->out;
      continue;
    }
    if (affine_layer_index_.empty()) {
      throw StructuralError("activation at layer " + std::to_string(l) + " precedes every affine layer");
    }
    if (const auto* m = std::get_if<Maxout>(&layer)) {
      if (m->pieces < 2) throw StructuralError("maxout requires at least 2 pieces");
      const auto* prev = l > 0 ? std::get_if<Affine>(&layers_[l - 1]) : nullptr;
      if (!prev) throw StructuralError("maxout must directly follow an affine layer");
      if (prev->out % m->pieces != 0) {
        throw StructuralError("maxout pieces " + std::to_string(m->pieces) + " do not divide width " +
                              std::to_string(prev->out));
      }
      width = prev->out / m->pieces;
    }
  }
  if (affine_layer_index_.empty()) throw StructuralError("network has no affine layer");
  output_dim_ = width;
  if (loss_ == Loss::SoftmaxCrossEntropy && output_dim_ < 2) {
    throw StructuralError("softmax cross-entropy needs at least 2 outputs");
  }
  manifest_ = std::make_shared<const Manifest>(std::move(segments));
}

std::string NetworkSpec::to_string() const {
  std::string out = "loss=" + std::string(loss_name(loss_)) + " layers=";
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (l) out += ',';
    std::visit(Overloaded{
                   [&](const Affine& a) {
                     out += (a.bias ? "affine(" : "linear(") + std::to_string(a.in) + "," +
                            std::to_string(a.out) + ")";
                   },
                   [&](const Sigmoid&) { out += "sigmoid"; },
                   [&](const Relu&) { out += "relu"; },
                   [&](const Maxout& m) { out += "maxout(" + std::to_string(m.pieces) + ")"; },
                   [&](const Identity&) { out += "identity"; },
               },
               layers_[l]);
  }
  return out;
}

std::vector<Layer> NetworkSpec::parse_layers(std::string_view text) {
  std::vector<Layer> layers;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    // Split on commas that are not inside parentheses.
    std::size_t end = pos;
    int depth = 0;
    while (end < text.size() && (text[end] != ',' || depth > 0)) {
      if (text[end] == '(') ++depth;
      if (text[end] == ')') --depth;
      ++end;
    }
    const std::string token = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (token.empty()) {
      if (end >= text.size() && layers.empty()) break;
      throw StructuralError("empty layer token in '" + std::string(text) + "'");
    }
    const auto open = token.find('(');
    const std::string head = trim(token.substr(0, open));
    std::vector<std::size_t> args;
    if (open != std::string::npos) {
      const auto close = token.rfind(')');
      if (close == std::string::npos || close < open) throw StructuralError("unbalanced '(' in " + token);
      std::string_view inner(token.data() + open + 1, close - open - 1);
      std::size_t a = 0;
      while (a <= inner.size()) {
        const auto comma = inner.find(',', a);
        const auto piece = inner.substr(a, comma == std::string_view::npos ? inner.size() - a : comma - a);
        args.push_back(parse_count(piece, token));
        if (comma == std::string_view::npos) break;
        a = comma + 1;
      }
    }
    auto want = [&](std::size_t n) {
      if (args.size() != n) {
        throw StructuralError("layer '" + head + "' takes " + std::to_string(n) + " argument(s)");
      }
    };
    if (head == "affine" || head == "linear") {
      want(2);
      layers.emplace_back(Affine{args[0], args[1], head == "affine"});
    } else if (head == "sigmoid") {
      want(0);
      layers.emplace_back(Sigmoid{});
    } else if (head == "relu") {
      want(0);
      layers.emplace_back(Relu{});
    } else if (head == "maxout") {
      want(1);
      layers.emplace_back(Maxout{args[0]});
    } else if (head == "identity") {
      want(0);
      layers.emplace_back(Identity{});
    } else {
      throw StructuralError("unknown layer type '" + head + "'");
    }
    if (end >= text.size()) break;
  }
  return layers;
}

NetworkSpec NetworkSpec::parse(std::string_view text) {
  const std::string t = trim(text);
  if (t.rfind("loss=", 0) != 0) throw StructuralError("network spec must start with 'loss='");
  const auto layers_at = t.find(" layers=");
  if (layers_at == std::string::npos) throw StructuralError("network spec lacks 'layers='");
  const Loss loss = parse_loss(std::string_view(t).substr(5, layers_at - 5));
  return NetworkSpec(parse_layers(std::string_view(t).substr(layers_at + 8)), loss);
}

std::uint64_t NetworkSpec::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_string()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Batch::validate() const {
  const std::size_t n = has_labels() ? labels().size() : target_matrix().rows;
  if (n != inputs.rows) {
    throw StructuralError("batch has " + std::to_string(inputs.rows) + " inputs but " + std::to_string(n) +
                          " targets");
  }
}

ForwardResult forward(const NetworkSpec& spec, const ParamVector& params, const Batch& batch) {
  Evaluator ev(spec, params, batch);
  const std::size_t n = batch.size();
  ForwardResult result;
  result.outputs = Matrix(n, spec.output_dim());
  result.losses.assign(n, 0.0);
  result.invalid.assign(n, false);
  const auto rows = all_rows(n);
  for (std::size_t start = 0; start < n; start += kChunkRows) {
    const auto chunk = std::span<const std::size_t>(rows).subspan(start, std::min(kChunkRows, n - start));
    ev.forward_chunk(chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto src = ev.output().row(i);
      std::copy(src.begin(), src.end(), result.outputs.row(chunk[i]).begin());
      double loss = ev.example_loss(i, chunk[i], nullptr);
      if (!ev.finite_params() && std::isfinite(loss)) loss = std::numeric_limits<double>::quiet_NaN();
      result.losses[chunk[i]] = loss;
      if (!std::isfinite(loss)) {
        result.invalid[chunk[i]] = true;
        ++result.invalid_count;
      }
    }
  }
  return result;
}

LossTotal loss_total(const NetworkSpec& spec, const ParamVector& params, const Batch& batch) {
  if (batch.size() == 0) throw EvaluationError("loss_total on an empty dataset");
  Evaluator ev(spec, params, batch);
  const std::size_t n = batch.size();
  LossTotal total;
  total.count = n;
  ExactSum sum;
  const auto rows = all_rows(n);
  for (std::size_t start = 0; start < n; start += kChunkRows) {
    const auto chunk = std::span<const std::size_t>(rows).subspan(start, std::min(kChunkRows, n - start));
    ev.forward_chunk(chunk);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      sum.add(ev.example_loss(i, chunk[i], nullptr));
      if (batch.has_labels() &&
          argmax(ev.output().row(i)) != static_cast<std::size_t>(ev.target_label(chunk[i]))) {
        ++total.errors;
      }
    }
  }
  total.sum = sum.value();
  if (!ev.finite_params()) total.sum = std::numeric_limits<double>::quiet_NaN();
  total.mean = total.sum / static_cast<double>(n);
  return total;
}

LossAndGrad loss_and_grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch,
                          std::span<const std::size_t> rows) {
  Evaluator ev(spec, params, batch);
  LossAndGrad result{0.0, ParamVector::zeros(spec.manifest())};
  const std::size_t k = spec.output_dim();
  for (std::size_t start = 0; start < rows.size(); start += kChunkRows) {
    const auto chunk = rows.subspan(start, std::min(kChunkRows, rows.size() - start));
    for (auto r : chunk) {
      if (r >= batch.size()) throw StructuralError("row index out of range");
    }
    ev.forward_chunk(chunk);
    Matrix delta(chunk.size(), k);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      result.loss_sum += ev.example_loss(i, chunk[i], delta.data.data() + i * k);
    }
    ev.backward_chunk(std::move(delta), result.gradient.values());
  }
  if (!ev.finite_params()) result.loss_sum = std::numeric_limits<double>::quiet_NaN();
  return result;
}

LossAndGrad loss_and_grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch) {
  const auto rows = all_rows(batch.size());
  return loss_and_grad(spec, params, batch, rows);
}

ParamVector grad(const NetworkSpec& spec, const ParamVector& params, const Batch& batch) {
  return loss_and_grad(spec, params, batch).gradient;
}

Objective summed_objective(const NetworkSpec& spec, const Batch& batch) {
  return Objective{
      [&spec, &batch](const ParamVector& p) { return loss_total(spec, p, batch).sum; },
      [&spec, &batch](const ParamVector& p) { return grad(spec, p, batch); },
  };
}

ParamVector hvp(const GradientFn& gradient, const ParamVector& params, const ParamVector& direction) {
  params.require_same_layout(direction);
  const double dn = norm(direction);
  if (dn == 0.0) return ParamVector::zeros(params.manifest_ptr());
  const double h = 1e-4 * std::max(1.0, norm(params)) / std::max(1e-12, dn);
  ParamVector plus = params;
  plus.axpy(h, direction);
  ParamVector minus = params;
  minus.axpy(-h, direction);
  ParamVector result = gradient(plus);
  result -= gradient(minus);
  result *= 1.0 / (2.0 * h);
  return result;
}

ParamVector hvp(const NetworkSpec& spec, const ParamVector& params, const ParamVector& direction,
                const Batch& batch) {
  require_matching(spec, params);
  return hvp([&](const ParamVector& p) { return grad(spec, p, batch); }, params, direction);
}

ParamVector rescale_relu(const NetworkSpec& spec, const ParamVector& params, std::size_t affine_index,
                         std::size_t unit, double gamma) {
  require_matching(spec, params);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("rescale_relu needs a finite gamma > 0");
  }
  if (affine_index + 1 >= spec.affine_count()) {
    throw StructuralError("rescale_relu: affine layer " + std::to_string(affine_index) + " has no successor");
  }
  const std::size_t l = spec.affine_layer_index(affine_index);
  if (l + 1 >= spec.layers().size() || !std::holds_alternative<Relu>(spec.layers()[l + 1])) {
    throw StructuralError("rescale_relu: affine layer " + std::to_string(affine_index) +
                          " is not followed by relu");
  }
  if (spec.affine_layer_index(affine_index + 1) != l + 2) {
    throw StructuralError("rescale_relu: relu is not followed by an affine layer");
  }
  const auto slots = affine_slots(spec);
  const AffineSlot& cur = slots[affine_index];
  const AffineSlot& next = slots[affine_index + 1];
  if (unit >= cur.out) throw StructuralError("rescale_relu: unit index out of range");

  ParamVector out = params;
  auto v = out.values();
  for (std::size_t p = 0; p < cur.in; ++p) v[cur.w + p * cur.out + unit] *= gamma;
  if (cur.has_bias) v[cur.b + unit] *= gamma;
  for (std::size_t q = 0; q < next.out; ++q) v[next.w + unit * next.out + q] /= gamma;
  return out;
}

NetworkSpec build_deep_linear_chain(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw std::invalid_argument("deep linear chain needs at least 2 widths");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(Affine{dims[i], dims[i + 1], false});
    layers.emplace_back(Identity{});
  }
  return NetworkSpec(std::move(layers), Loss::MeanSquaredError);
}

}  // namespace lp
