#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "landscape/error.hpp"
#include "landscape/network.hpp"
#include "landscape/param_vector.hpp"
#include "landscape/rng.hpp"
#include "support.hpp"

namespace lp {
namespace {

using testing::fd_gradient;
using testing::random_batch;
using testing::random_params;
using testing::reference_forward;
using testing::relative_error;
using testing::scalar_params;
using testing::scalar_spec;

Batch scalar_example() {
  Batch b;
  b.inputs = Matrix(1, 1, 1.0);
  b.targets = Matrix(1, 1, 1.0);
  return b;
}

// Correctly rounded sum, written from the textbook two-sum recurrence and
// used to check totals independently of the library.
double oracle_sum(std::vector<double> xs) {
  std::vector<double> partials;
  for (double x : xs) {
    std::vector<double> next;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) next.push_back(lo);
      x = hi;
    }
    next.push_back(x);
    partials = next;
  }
  // Partials are non-overlapping; recombine from the largest magnitude with
  // the half-way fixup.
  std::size_t n = partials.size();
  if (n == 0) return 0.0;
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0 && partials[n - 1] < 0) || (lo > 0 && partials[n - 1] > 0))) {
    const double y = lo * 2;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

// ---------------------------------------------------------------- ParamVector

TEST(ParamVector, ManifestMustBeContiguous) {
  EXPECT_NO_THROW(Manifest({{"a", 0, 2, 3}, {"b", 6, 1, 3}}));
  EXPECT_THROW(Manifest({{"a", 0, 2, 3}, {"b", 7, 1, 3}}), StructuralError);
  EXPECT_THROW(Manifest({{"a", 0, 2, 3}, {"b", 5, 1, 3}}), StructuralError);
}

TEST(ParamVector, SegmentSizesSumToLength) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(3,4),relu,affine(4,2)");
  std::size_t total = 0;
  for (const auto& s : spec.manifest()->segments()) total += s.size();
  EXPECT_EQ(total, spec.param_count());
  EXPECT_EQ(spec.param_count(), 3u * 4 + 4 + 4 * 2 + 2);
  EXPECT_THROW(ParamVector(spec.manifest(), std::vector<double>(5)), StructuralError);
}

TEST(ParamVector, ArithmeticRequiresIdenticalManifest) {
  const auto a = ParamVector::zeros(std::make_shared<Manifest>(std::vector<Segment>{{"w", 0, 1, 2}}));
  const auto b = ParamVector::zeros(std::make_shared<Manifest>(std::vector<Segment>{{"v", 0, 1, 2}}));
  EXPECT_THROW(a + b, StructuralError);
  const auto c = ParamVector::zeros(std::make_shared<Manifest>(std::vector<Segment>{{"w", 0, 1, 2}}));
  EXPECT_NO_THROW(a + c);
}

TEST(ParamVector, DotAndNorm) {
  const auto m = std::make_shared<Manifest>(std::vector<Segment>{{"w", 0, 1, 2}});
  const ParamVector a(m, {3.0, 4.0});
  EXPECT_EQ(norm(a), 5.0);
  EXPECT_EQ(dot(a, a), 25.0);
  ParamVector b = a;
  b.axpy(-2.0, a);
  EXPECT_EQ(b[0], -3.0);
  EXPECT_EQ(b[1], -4.0);
}

// ---------------------------------------------------------------- NetworkSpec

TEST(NetworkSpec, RejectsInconsistentDimensions) {
  EXPECT_THROW(NetworkSpec({Affine{3, 4}, Relu{}, Affine{5, 2}}, Loss::MeanSquaredError), StructuralError);
  EXPECT_THROW(NetworkSpec({Affine{3, 5}, Maxout{2}, Affine{2, 2}}, Loss::MeanSquaredError), StructuralError);
  EXPECT_THROW(NetworkSpec({Affine{3, 4}, Maxout{1}, Affine{4, 2}}, Loss::MeanSquaredError), StructuralError);
  EXPECT_THROW(NetworkSpec({Relu{}}, Loss::MeanSquaredError), StructuralError);
  EXPECT_NO_THROW(NetworkSpec({Affine{3, 6}, Maxout{3}, Affine{2, 2}}, Loss::MeanSquaredError));
}

TEST(NetworkSpec, TextRoundTripAndDigest) {
  const NetworkSpec spec({Affine{10, 8}, Sigmoid{}, Affine{8, 6}, Maxout{3}, Affine{2, 3, false}, Identity{}},
                         Loss::SoftmaxCrossEntropy);
  const NetworkSpec back = NetworkSpec::parse(spec.to_string());
  EXPECT_EQ(back, spec);
  EXPECT_EQ(back.digest(), spec.digest());
  const NetworkSpec other({Affine{10, 8}, Relu{}, Affine{8, 6}, Maxout{3}, Affine{2, 3, false}, Identity{}},
                          Loss::SoftmaxCrossEntropy);
  EXPECT_NE(other.digest(), spec.digest());
  EXPECT_THROW(NetworkSpec::parse("loss=mse layers=affine(3,x)"), StructuralError);
  EXPECT_THROW(parse_loss("hinge"), StructuralError);
}

// ---------------------------------------------------------------- forward

TEST(Forward, MaxoutTakesLargestPiece) {
  const NetworkSpec spec({Affine{2, 2, false}, Maxout{2}}, Loss::MeanSquaredError);
  ParamVector p(spec.manifest(), {1.0, 0.0, 0.0, 1.0});
  Batch b;
  b.inputs = Matrix(1, 2);
  b.inputs(0, 0) = 1.0;
  b.inputs(0, 1) = -0.5;
  b.targets = Matrix(1, 1);
  const ForwardResult r = forward(spec, p, b);
  EXPECT_EQ(r.outputs(0, 0), 1.0);
}

TEST(Forward, IdentityAffineReturnsInput) {
  const NetworkSpec spec({Affine{3, 3}, Identity{}}, Loss::MeanSquaredError);
  ParamVector p = ParamVector::zeros(spec.manifest());
  auto W = p.segment("affine0.W");
  for (std::size_t i = 0; i < 3; ++i) W[i * 3 + i] = 1.0;
  Batch b;
  b.inputs = Matrix(2, 3);
  b.inputs.data = {0.5, -1.25, 3.0, 7.0, 0.0, -2.0};
  b.targets = Matrix(2, 3);
  const ForwardResult r = forward(spec, p, b);
  EXPECT_EQ(r.outputs.data, b.inputs.data);
}

TEST(Forward, ScalarNetAtSolutionHasZeroLoss) {
  const ForwardResult r = forward(scalar_spec(), scalar_params(1.0, 1.0), scalar_example());
  EXPECT_EQ(r.losses[0], 0.0);
}

TEST(Forward, MismatchedManifestIsStructural) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(2,2)");
  EXPECT_THROW(forward(spec, scalar_params(1, 1), random_batch(spec, 3, 1)), StructuralError);
  Batch bad = random_batch(spec, 3, 1);
  bad.inputs = Matrix(2, 2);
  EXPECT_THROW(forward(spec, ParamVector::zeros(spec.manifest()), bad), StructuralError);
}

TEST(Forward, NonFiniteParameterFlagsEveryExample) {
  const NetworkSpec spec = NetworkSpec::parse("loss=softmax-cross-entropy layers=affine(3,4),relu,affine(4,2)");
  ParamVector p = random_params(spec, 0.5, 3);
  p[5] = std::numeric_limits<double>::quiet_NaN();
  const ForwardResult r = forward(spec, p, random_batch(spec, 4, 2));
  EXPECT_EQ(r.invalid_count, 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(r.invalid[i]);
    EXPECT_TRUE(std::isnan(r.losses[i]));
  }
}

TEST(Forward, MatchesReferenceEvaluation) {
  const char* specs[] = {
      "loss=softmax-cross-entropy layers=affine(5,7),sigmoid,affine(7,3)",
      "loss=mse layers=affine(5,6),relu,affine(6,6),relu,affine(6,2)",
      "loss=softmax-cross-entropy layers=affine(4,9),maxout(3),affine(3,3)",
      "loss=mse layers=affine(4,4),identity,affine(4,1)",
  };
  for (const char* text : specs) {
    const NetworkSpec spec = NetworkSpec::parse(text);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ParamVector p = random_params(spec, 0.7, seed);
      // More rows than one evaluation chunk so chunk boundaries are covered.
      const Batch b = random_batch(spec, 300, seed + 100);
      const ForwardResult r = forward(spec, p, b);
      const auto ref = reference_forward(spec, p, b);
      for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(r.losses[i], ref.losses[i], 1e-12 * std::max(1.0, std::abs(ref.losses[i]))) << text;
        for (std::size_t j = 0; j < spec.output_dim(); ++j) {
          EXPECT_NEAR(r.outputs(i, j), ref.outputs[i][j], 1e-12 * std::max(1.0, std::abs(ref.outputs[i][j])));
        }
      }
    }
  }
}

// ---------------------------------------------------------------- loss_total

TEST(LossTotal, ScalarModelValues) {
  EXPECT_EQ(loss_total(scalar_spec(), scalar_params(0.0, 0.0), scalar_example()).sum, 1.0);
  EXPECT_EQ(loss_total(scalar_spec(), scalar_params(0.5, 0.5), scalar_example()).sum, 0.5625);
}

TEST(LossTotal, EmptyDatasetThrows) {
  Batch empty;
  empty.inputs = Matrix(0, 1);
  empty.targets = Matrix(0, 1);
  EXPECT_THROW(loss_total(scalar_spec(), scalar_params(1, 1), empty), Error);
}

TEST(LossTotal, DuplicatedDatasetDoublesExactly) {
  const NetworkSpec spec = NetworkSpec::parse("loss=softmax-cross-entropy layers=affine(6,8),relu,affine(8,3)");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ParamVector p = random_params(spec, 0.6, seed);
    const Batch b = random_batch(spec, 257, seed);
    Batch twice = b;
    twice.inputs.rows *= 2;
    twice.inputs.data.insert(twice.inputs.data.end(), b.inputs.data.begin(), b.inputs.data.end());
    auto labels = b.labels();
    labels.insert(labels.end(), b.labels().begin(), b.labels().end());
    twice.targets = labels;
    const double single = loss_total(spec, p, b).sum;
    EXPECT_EQ(loss_total(spec, p, twice).sum, 2.0 * single);
    EXPECT_EQ(loss_total(spec, p, twice).mean, loss_total(spec, p, b).mean);
  }
}

TEST(LossTotal, AdditiveOverPartitions) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(3,5),sigmoid,affine(5,2)");
  const ParamVector p = random_params(spec, 1.0, 11);
  const Batch b = random_batch(spec, 200, 12);
  const auto per_example = forward(spec, p, b).losses;
  EXPECT_EQ(loss_total(spec, p, b).sum, oracle_sum(per_example));
  // Any split point: the whole equals the per-example terms of both parts
  // accumulated together.
  for (std::size_t cut : {1u, 77u, 128u, 199u}) {
    std::vector<double> first(per_example.begin(), per_example.begin() + cut);
    std::vector<double> second(per_example.begin() + cut, per_example.end());
    std::vector<double> joined = first;
    joined.insert(joined.end(), second.begin(), second.end());
    EXPECT_EQ(loss_total(spec, p, b).sum, oracle_sum(joined));
  }
}

// ---------------------------------------------------------------- grad

TEST(Grad, ScalarModelAtHalf) {
  const ParamVector g = grad(scalar_spec(), scalar_params(0.5, 0.5), scalar_example());
  // Oracle: central differences of the summed loss.
  const auto f = [&](const ParamVector& p) { return loss_total(scalar_spec(), p, scalar_example()).sum; };
  const auto fd = fd_gradient(f, scalar_params(0.5, 0.5), 1e-6);
  EXPECT_NEAR(fd[0], -0.75, 1e-9);
  EXPECT_NEAR(fd[1], -0.75, 1e-9);
  EXPECT_NEAR(g[0], fd[0], 1e-9);
  EXPECT_NEAR(g[1], fd[1], 1e-9);
}

TEST(Grad, ZeroAtGlobalMinimum) {
  const ParamVector g = grad(scalar_spec(), scalar_params(2.0, 0.5), scalar_example());
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(Grad, DeadReluUnitsGetNoHiddenGradient) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(3,4),relu,affine(4,2)");
  ParamVector p = random_params(spec, 0.5, 5);
  auto b0 = p.segment("affine0.b");
  for (auto& v : b0) v = -100.0;
  const Batch b = random_batch(spec, 20, 6);
  const ParamVector g = grad(spec, p, b);
  for (double v : g.segment("affine0.W")) EXPECT_EQ(v, 0.0);
  for (double v : g.segment("affine0.b")) EXPECT_EQ(v, 0.0);
}

TEST(Grad, MatchesFiniteDifferencesAwayFromKinks) {
  const char* specs[] = {
      "loss=softmax-cross-entropy layers=affine(6,10),sigmoid,affine(10,3)",
      "loss=mse layers=affine(5,8),relu,affine(8,8),relu,affine(8,2)",
      "loss=softmax-cross-entropy layers=affine(5,12),maxout(3),affine(4,3)",
      "loss=mse layers=affine(4,6),identity,linear(6,3)",
  };
  for (const char* text : specs) {
    const NetworkSpec spec = NetworkSpec::parse(text);
    ASSERT_LE(spec.param_count(), 500u);
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 20; ++seed) {
      ASSERT_LT(seed, 200u) << "too many kink-adjacent draws for " << text;
      const ParamVector p = random_params(spec, 0.8, seed);
      const Batch b = random_batch(spec, 4, seed + 1000);
      if (reference_forward(spec, p, b).kink_margin < 1e-4) continue;
      const auto f = [&](const ParamVector& q) { return loss_total(spec, q, b).sum; };
      const auto fd = fd_gradient(f, p, 1e-6);
      const ParamVector g = grad(spec, p, b);
      EXPECT_LT(relative_error(g.values(), fd), 1e-6) << text << " seed " << seed;
      ++checked;
    }
  }
}

TEST(Grad, LossAndGradAgreeWithSeparateCalls) {
  const NetworkSpec spec = NetworkSpec::parse("loss=softmax-cross-entropy layers=affine(4,6),relu,affine(6,3)");
  const ParamVector p = random_params(spec, 0.5, 8);
  const Batch b = random_batch(spec, 150, 9);
  const LossAndGrad lg = loss_and_grad(spec, p, b);
  EXPECT_TRUE(lg.gradient.bitwise_equal(grad(spec, p, b)));
  EXPECT_NEAR(lg.loss_sum, loss_total(spec, p, b).sum, 1e-10 * lg.loss_sum);
}

// ---------------------------------------------------------------- hvp

TEST(Hvp, ScalarModelAtOne) {
  // H of (1 - w1 w2)^2 at (1, 1) is [[2, 2], [2, 2]], so H (1, 0) = (2, 2).
  // Oracle: central differences of the exact gradient formula.
  const auto g = [](double w1, double w2) {
    const double r = 1.0 - w1 * w2;
    return std::array<double, 2>{-2.0 * r * w2, -2.0 * r * w1};
  };
  const double h = 1e-5;
  const auto gp = g(1.0 + h, 1.0);
  const auto gm = g(1.0 - h, 1.0);
  const double o0 = (gp[0] - gm[0]) / (2 * h);
  const double o1 = (gp[1] - gm[1]) / (2 * h);
  EXPECT_NEAR(o0, 2.0, 1e-8);
  EXPECT_NEAR(o1, 2.0, 1e-8);

  const ParamVector d(scalar_spec().manifest(), {1.0, 0.0});
  const ParamVector hv = hvp(scalar_spec(), scalar_params(1.0, 1.0), d, scalar_example());
  EXPECT_NEAR(hv[0], o0, 1e-6);
  EXPECT_NEAR(hv[1], o1, 1e-6);
}

TEST(Hvp, IdentityHessianReturnsDirection) {
  const auto m = std::make_shared<Manifest>(std::vector<Segment>{{"x", 0, 1, 5}});
  const GradientFn g = [](const ParamVector& p) { return p; };
  const ParamVector theta(m, {0.3, -1.0, 2.0, 0.0, 5.0});
  const ParamVector d(m, {1.0, 2.0, -3.0, 0.5, 0.25});
  const ParamVector hv = hvp(g, theta, d);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(hv[i], d[i], 1e-10);
}

TEST(Hvp, ZeroDirectionGivesZero) {
  const ParamVector hv =
      hvp(scalar_spec(), scalar_params(0.3, 0.7), ParamVector::zeros(scalar_spec().manifest()), scalar_example());
  EXPECT_EQ(hv[0], 0.0);
  EXPECT_EQ(hv[1], 0.0);
}

TEST(Hvp, SymmetricBilinearForm) {
  const NetworkSpec spec = NetworkSpec::parse("loss=softmax-cross-entropy layers=affine(4,6),sigmoid,affine(6,3)");
  const Batch b = random_batch(spec, 12, 21);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ParamVector p = random_params(spec, 0.5, seed);
    const ParamVector d = random_params(spec, 1.0, seed + 50);
    const ParamVector e = random_params(spec, 1.0, seed + 90);
    const double de = dot(d, hvp(spec, p, e, b));
    const double ed = dot(e, hvp(spec, p, d, b));
    EXPECT_LE(std::abs(de - ed), 1e-4 * std::max(std::abs(de), std::abs(ed))) << seed;
  }
}

TEST(Hvp, GradientOfSquaredGradientNorm) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(3,5),sigmoid,affine(5,2)");
  const Batch b = random_batch(spec, 6, 31);
  const ParamVector p = random_params(spec, 0.7, 32);
  const ParamVector g = grad(spec, p, b);
  const auto sq = [&](const ParamVector& q) {
    const ParamVector gq = grad(spec, q, b);
    return dot(gq, gq);
  };
  const auto fd = fd_gradient(sq, p, 1e-5);
  ParamVector expected = hvp(spec, p, g, b);
  expected *= 2.0;
  EXPECT_LT(relative_error(fd, expected.values()), 1e-3);
}

// ---------------------------------------------------------------- rescale_relu

TEST(RescaleRelu, UnitGammaIsIdentity) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(3,4),relu,affine(4,2)");
  const ParamVector p = random_params(spec, 0.5, 1);
  EXPECT_TRUE(rescale_relu(spec, p, 0, 2, 1.0).bitwise_equal(p));
}

TEST(RescaleRelu, PreservesFunctionAndChangesParameters) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(5,8),relu,affine(8,6),relu,affine(6,3)");
  const ParamVector p = random_params(spec, 0.6, 2);
  const Batch b = random_batch(spec, 100, 3);
  const ForwardResult before = forward(spec, p, b);
  for (std::size_t layer : {0u, 1u}) {
    for (double gamma : {0.5, 2.0, 10.0}) {
      const ParamVector q = rescale_relu(spec, p, layer, 1, gamma);
      EXPECT_GT(norm(q - p), 0.0);
      const ForwardResult after = forward(spec, q, b);
      for (std::size_t i = 0; i < before.outputs.data.size(); ++i) {
        EXPECT_NEAR(after.outputs.data[i], before.outputs.data[i], 1e-10);
      }
    }
  }
}

TEST(RescaleRelu, InverseCompositionRecoversParameters) {
  const NetworkSpec spec = NetworkSpec::parse("loss=mse layers=affine(3,4),relu,affine(4,2)");
  const ParamVector p = random_params(spec, 0.5, 4);
  const ParamVector back = rescale_relu(spec, rescale_relu(spec, p, 0, 3, 2.0), 0, 3, 0.5);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back[i], p[i], 1e-12);
}

TEST(RescaleRelu, RejectsInvalidRequests) {
  const NetworkSpec relu = NetworkSpec::parse("loss=mse layers=affine(3,4),relu,affine(4,2)");
  const ParamVector p = random_params(relu, 0.5, 5);
  EXPECT_THROW(rescale_relu(relu, p, 0, 0, 0.0), std::invalid_argument);
  EXPECT_THROW(rescale_relu(relu, p, 0, 0, -1.0), std::invalid_argument);
  EXPECT_THROW(rescale_relu(relu, p, 1, 0, 2.0), StructuralError);
  const NetworkSpec sig = NetworkSpec::parse("loss=mse layers=affine(3,4),sigmoid,affine(4,2)");
  EXPECT_THROW(rescale_relu(sig, random_params(sig, 0.5, 6), 0, 0, 2.0), StructuralError);
}

// ---------------------------------------------------------------- deep linear chains

TEST(DeepLinearChain, ScalarModel) {
  const NetworkSpec spec = scalar_spec();
  EXPECT_EQ(spec.param_count(), 2u);
  EXPECT_EQ(spec.loss(), Loss::MeanSquaredError);
  const ForwardResult r = forward(spec, scalar_params(3.0, 0.5), scalar_example());
  EXPECT_EQ(r.outputs(0, 0), 1.5);
}

TEST(DeepLinearChain, TenMatrices) {
  const std::vector<std::size_t> dims = {4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 2};
  const NetworkSpec spec = build_deep_linear_chain(dims);
  EXPECT_EQ(spec.affine_count(), 10u);
  EXPECT_EQ(spec.param_count(), 9u * 16 + 8);
}

TEST(DeepLinearChain, SingleMatrixAndErrors) {
  const std::vector<std::size_t> dims = {3, 2};
  const NetworkSpec spec = build_deep_linear_chain(dims);
  EXPECT_EQ(spec.affine_count(), 1u);
  EXPECT_EQ(spec.param_count(), 6u);
  const std::vector<std::size_t> one = {3};
  EXPECT_THROW(build_deep_linear_chain(one), std::invalid_argument);
}

}  // namespace
}  // namespace lp
