#include <doctest.h>

#include <cmath>
#include <vector>

#include "bifurcate/kernel.hpp"
#include "bifurcate/metrics.hpp"

using namespace bifurcate;
using kernel::NBARModel;

namespace {

NBARModel linear_bar() {
  NBARModel m;
  m.f0 = {kernel::FunctionSpec::Family::Affine, 0.4, 1.0};
  m.f1 = {kernel::FunctionSpec::Family::Affine, 0.3, 0.5};
  m.noise = {kernel::NoiseSpec::Family::Gaussian, 1.0, 0.0};
  m.initial.family = kernel::InitialSpec::Family::Dirac;
  m.initial.x0 = 0.0;
  return m;
}

NBARModel zero_noise_bar() {
  auto m = linear_bar();
  m.noise.sigma = 0.0;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("kernel");

TEST_CASE("declared regularity of the linear model") {
  const auto meta = linear_bar().meta();
  CHECK(meta.r0 == doctest::Approx(0.4));
  CHECK(meta.r1 == doctest::Approx(0.3));
  CHECK(meta.q == doctest::Approx(0.7));
  CHECK(meta.C_noise == doctest::Approx(1.0));
  CHECK(meta.C == doctest::Approx(2.0));  // joint kernel: twice the noise constant
  CHECK(meta.r0 <= meta.q);
  CHECK(meta.r1 <= meta.q);
}

TEST_CASE("declared constants for the other noise families") {
  auto m = linear_bar();
  m.noise = {kernel::NoiseSpec::Family::UniformCentered, 0.0, 0.5};
  CHECK(m.meta().C_noise == doctest::Approx(0.25));
  m.noise = {kernel::NoiseSpec::Family::TruncatedGaussian, 1.0, 2.0};
  CHECK(m.meta().C_noise == doctest::Approx(4.0));
  m.noise = {kernel::NoiseSpec::Family::UniformCentered, 0.0, -1.0};
  CHECK_THROWS_AS(m.meta(), std::invalid_argument);
}

TEST_CASE("deterministic evaluation with zero-variance noise") {
  const auto kern = kernel::nbar_kernel(zero_noise_bar());
  const rng::Source src(1, 0);
  const kernel::NodeRandomness left(src, 2), right(src, 3);
  const auto pair = kern->sample(2.0, left, right);
  CHECK(pair.left == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(pair.right == doctest::Approx(1.1).epsilon(1e-15));
  // pure function of the state
  const auto again = kern->sample(2.0, kernel::NodeRandomness(src, 100),
                                  kernel::NodeRandomness(src, 101));
  CHECK(again.left == pair.left);
  CHECK(again.right == pair.right);
}

TEST_CASE("zero-drift model produces independent standard normals") {
  NBARModel m;
  m.f0 = {kernel::FunctionSpec::Family::Affine, 0.0, 0.0};
  m.f1 = m.f0;
  m.noise = {kernel::NoiseSpec::Family::Gaussian, 1.0, 0.0};
  const auto kern = kernel::nbar_kernel(m);
  const rng::Source src(77, 0);

  const int n = 100000;
  double sl = 0, sr = 0, sll = 0, srr = 0, slr = 0;
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const auto pair =
        kern->sample(3.7, kernel::NodeRandomness(src, 2 * u), kernel::NodeRandomness(src, 2 * u + 1));
    sl += pair.left;
    sr += pair.right;
    sll += pair.left * pair.left;
    srr += pair.right * pair.right;
    slr += pair.left * pair.right;
  }
  CHECK(sl / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sr / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sll / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(srr / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(slr / n - (sl / n) * (sr / n) == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("marginal law of large numbers") {
  const auto kern = kernel::nbar_kernel(linear_bar());
  const rng::Source src(2718, 0);
  const double x = 1.5;
  const int draws = 100000;
  double acc = 0;
  for (int i = 0; i < draws; ++i)
    acc += kern->marginal(0, x, kernel::NodeRandomness(src, static_cast<std::uint64_t>(i)));
  const double tol = 3.0 / std::sqrt(static_cast<double>(draws));
  CHECK(std::abs(acc / draws - (0.4 * x + 1.0)) <= tol);
}

TEST_CASE("marginals reproduce the coordinate laws of the joint draw") {
  const auto kern = kernel::nbar_kernel(linear_bar());
  const rng::Source a(5, 0), b(5, 1);
  const int draws = 50000;
  std::vector<double> joint_left, marg;
  for (int i = 0; i < draws; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    joint_left.push_back(
        kern->sample(0.3, kernel::NodeRandomness(a, 2 * u), kernel::NodeRandomness(a, 2 * u + 1))
            .left);
    marg.push_back(kern->marginal(0, 0.3, kernel::NodeRandomness(b, u)));
  }
  const double dist = metrics::wasserstein(metrics::EmpiricalMeasure(joint_left),
                                           metrics::EmpiricalMeasure(marg), 1.0);
  CHECK(dist < 0.02);  // two-sample W_1 noise floor at this size is ~5e-3
}

TEST_CASE("lineage step with identical branch maps equals either marginal") {
  auto m = linear_bar();
  m.f1 = m.f0;
  const auto kern = kernel::nbar_kernel(m);
  const kernel::LineageKernel lineage(*kern);
  const rng::Source src(11, 3);
  for (std::uint64_t step = 0; step < 200; ++step) {
    const double q = lineage.step(0.9, src, step);
    const double p0 = kern->marginal(0, 0.9, kernel::NodeRandomness(src, step));
    CHECK(q == p0);
  }
}

TEST_CASE("lineage coin is fair") {
  const auto kern = kernel::nbar_kernel(zero_noise_bar());
  const kernel::LineageKernel lineage(*kern);
  const rng::Source src(123, 0);
  // with zero noise the step outcome identifies the branch
  int heads = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = lineage.step(0.0, src, static_cast<std::uint64_t>(i));
    if (v == 1.0) ++heads;  // branch 0 from state 0
    else CHECK(v == 0.5);
  }
  const double freq = static_cast<double>(heads) / n;
  CHECK(freq >= 0.49);
  CHECK(freq <= 0.51);
}

TEST_CASE("long lineage chain reaches the affine fixed point") {
  const auto kern = kernel::nbar_kernel(linear_bar());
  const kernel::LineageKernel lineage(*kern);
  const rng::Source src(31, 0);
  double state = 0;
  const std::uint64_t burn = 1000, steps = 1000000;
  for (std::uint64_t i = 0; i < burn; ++i) state = lineage.step(state, src, i);
  double acc = 0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    state = lineage.step(state, src, burn + i);
    acc += state;
  }
  // fixed point of m -> 0.35 m + 0.75
  CHECK(acc / static_cast<double>(steps) == doctest::Approx(15.0 / 13.0).epsilon(0.01));
}

TEST_CASE("lineage chain mean is Cauchy across doubling horizons for a contraction") {
  auto m = linear_bar();
  m.f1 = m.f0;  // single contraction with factor 0.4
  m.noise = {kernel::NoiseSpec::Family::UniformCentered, 0.0, 1.0};
  const auto kern = kernel::nbar_kernel(m);
  const kernel::LineageKernel lineage(*kern);
  const rng::Source src(99, 0);
  double state = 0, acc = 0;
  std::uint64_t step = 0;
  std::vector<double> horizon_means;
  for (std::uint64_t horizon = 4096; horizon <= 262144; horizon *= 2) {
    while (step < horizon) {
      state = lineage.step(state, src, step++);
      acc += state;
    }
    horizon_means.push_back(acc / static_cast<double>(step));
  }
  for (std::size_t i = 1; i < horizon_means.size(); ++i)
    CHECK(std::abs(horizon_means[i] - horizon_means[i - 1]) < 0.02);
}

TEST_CASE("empirical contraction ratios") {
  // deterministic kernel: exactly the declared factor
  const auto zero_noise = kernel::nbar_kernel(zero_noise_bar());
  const auto det =
      kernel::empirical_contraction(*zero_noise, 0.0, 1.0, kernel::Branch::Type0, 100, 1);
  CHECK(det.ratio == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(det.reference == doctest::Approx(0.4));

  CHECK_THROWS_AS(
      kernel::empirical_contraction(*zero_noise, 1.0, 1.0, kernel::Branch::Type0, 100, 1),
      std::invalid_argument);

  // additive gaussian noise: the coupled ratio is exactly the slope, the
  // two-sample ratio sits within Monte-Carlo error of it
  const auto noisy = kernel::nbar_kernel(linear_bar());
  const auto est =
      kernel::empirical_contraction(*noisy, 0.0, 1.0, kernel::Branch::Type0, 100000, 7);
  CHECK(est.coupled_ratio == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(est.ratio <= 0.4 + 0.02);
  CHECK_FALSE(est.ratio_is_upper_bound);

  // joint branch: only the coupling upper bound is available
  const auto joint =
      kernel::empirical_contraction(*noisy, 0.0, 1.0, kernel::Branch::Joint, 10000, 7);
  CHECK(joint.ratio_is_upper_bound);
  CHECK(joint.ratio == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(joint.reference == doctest::Approx(0.7));
}

TEST_CASE("bounded noise families stay centered and in range") {
  auto m = linear_bar();
  m.noise = {kernel::NoiseSpec::Family::TruncatedGaussian, 1.0, 1.5};
  const auto kern = kernel::nbar_kernel(m);
  const rng::Source src(8, 0);
  double acc = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double v = kern->marginal(0, 0.0, kernel::NodeRandomness(src, static_cast<std::uint64_t>(i)));
    const double eps = v - 1.0;  // f0(0) = 1
    CHECK(std::abs(eps) <= 1.5);
    acc += eps;
  }
  CHECK(std::abs(acc / n) < 0.02);
}

TEST_CASE("diagnostic slope estimate stays at the declared constant") {
  const kernel::FunctionSpec tanh_map{kernel::FunctionSpec::Family::TanhAffine, 2.0, 0.3};
  CHECK(tanh_map.lipschitz() == doctest::Approx(2.0));
  const double measured = kernel::empirical_lipschitz(tanh_map, -4.0, 4.0, 4001);
  CHECK(measured <= 2.0 + 1e-9);
  CHECK(measured == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_SUITE_END();
