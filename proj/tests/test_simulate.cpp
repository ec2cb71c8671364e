#include <doctest.h>

#include <cmath>
#include <vector>

#include "bifurcate/simulate.hpp"

using namespace bifurcate;
using kernel::NBARModel;
using simulate::Functional;

namespace {

NBARModel linear_bar(double sigma = 1.0) {
  NBARModel m;
  m.f0 = {kernel::FunctionSpec::Family::Affine, 0.4, 1.0};
  m.f1 = {kernel::FunctionSpec::Family::Affine, 0.3, 0.5};
  m.noise = {kernel::NoiseSpec::Family::Gaussian, sigma, 0.0};
  m.initial.family = kernel::InitialSpec::Family::Dirac;
  m.initial.x0 = 0.0;
  return m;
}

NBARModel walk_model() {  // f0 = x + 1, f1 = x - 1, no noise, from 0
  NBARModel m;
  m.f0 = {kernel::FunctionSpec::Family::Affine, 1.0, 1.0};
  m.f1 = {kernel::FunctionSpec::Family::Affine, 1.0, -1.0};
  m.noise = {kernel::NoiseSpec::Family::Gaussian, 0.0, 0.0};
  m.initial.family = kernel::InitialSpec::Family::Dirac;
  m.initial.x0 = 0.0;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("simulate");

TEST_CASE("zero model fills the tree with zeros") {
  NBARModel m;
  m.noise.sigma = 0.0;
  const auto kern = kernel::nbar_kernel(m);
  const auto s = simulate::simulate_tree(*kern, 5, rng::Source(1, 0));
  for (tree::NodeId n = 1; n <= s.node_count(); ++n) CHECK(s.value(n) == 0.0);
}

TEST_CASE("deterministic walk matches the hand evaluation") {
  const auto kern = kernel::nbar_kernel(walk_model());
  const auto s = simulate::simulate_tree(*kern, 2, rng::Source(9, 4));
  const std::vector<double> expected = {0, 1, -1, 2, 0, 0, -2};
  REQUIRE(s.node_count() == 7);
  for (tree::NodeId n = 1; n <= 7; ++n)
    CHECK(s.value(n) == doctest::Approx(expected[n - 1]).epsilon(1e-15));

  CHECK(simulate::empirical_mean(s, tree::IndexSet::generation(2), Functional::identity()) ==
        doctest::Approx(0.0));

  const auto slice = s.generation_slice(2);
  REQUIRE(slice.size() == 4);
  CHECK(slice[0] == 2.0);
  CHECK(slice[3] == -2.0);
}

TEST_CASE("simulation is a pure function of kernel, depth and seed") {
  const auto kern = kernel::nbar_kernel(linear_bar());
  const auto a = simulate::simulate_tree(*kern, 8, rng::Source(42, 17));
  const auto b = simulate::simulate_tree(*kern, 8, rng::Source(42, 17));
  const auto c = simulate::simulate_tree(*kern, 8, rng::Source(42, 18));
  bool all_equal = true, any_diff = false;
  for (tree::NodeId n = 1; n <= a.node_count(); ++n) {
    all_equal &= a.value(n) == b.value(n);
    any_diff |= a.value(n) != c.value(n);
  }
  CHECK(all_equal);
  CHECK(any_diff);
  // a deeper tree extends the shallower one: draws depend only on node labels
  const auto deep = simulate::simulate_tree(*kern, 9, rng::Source(42, 17));
  for (tree::NodeId n = 1; n <= a.node_count(); ++n) CHECK(deep.value(n) == a.value(n));
}

TEST_CASE("constant functional averages to itself") {
  const auto kern = kernel::nbar_kernel(linear_bar());
  const auto s = simulate::simulate_tree(*kern, 6, rng::Source(3, 0));
  const auto constant = Functional::node("constant", [](double) { return 2.5; }, 1.0);
  for (const auto& set : {tree::IndexSet::generation(4), tree::IndexSet::subtree(6),
                          tree::IndexSet::explicit_set({1, 5, 44})})
    CHECK(simulate::empirical_mean(s, set, constant) == doctest::Approx(2.5));
}

TEST_CASE("offspring residual vanishes without noise") {
  const auto model = linear_bar(0.0);
  const auto kern = kernel::nbar_kernel(model);
  const auto s = simulate::simulate_tree(*kern, 7, rng::Source(5, 0));
  const auto residual = Functional::offspring_residual(model);
  CHECK(residual.lip == doctest::Approx(1.0));  // max(1, 0.7)
  for (const auto& set : {tree::IndexSet::generation(3), tree::IndexSet::subtree(6)})
    CHECK(simulate::empirical_mean(s, set, residual) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("triple functionals refuse indices whose children are missing") {
  const auto kern = kernel::nbar_kernel(linear_bar());
  const auto s = simulate::simulate_tree(*kern, 3, rng::Source(5, 0));
  const auto residual = Functional::offspring_residual(linear_bar());
  CHECK_NOTHROW(simulate::empirical_mean(s, tree::IndexSet::subtree(2), residual));
  CHECK_THROWS_AS(simulate::empirical_mean(s, tree::IndexSet::subtree(3), residual),
                  std::out_of_range);
  CHECK_THROWS_AS(simulate::empirical_mean(s, tree::IndexSet::generation(4),
                                           Functional::identity()),
                  std::out_of_range);
}

TEST_CASE("exact means of affine models") {
  const auto model = linear_bar();
  // one step by hand: (1 + 0.5) / 2
  CHECK(simulate::expected_mean_affine(model, tree::IndexSet::generation(1)) ==
        doctest::Approx(0.75).epsilon(1e-12));
  // two steps by hand over the four nodes of the generation
  const double g2 =
      ((0.4 * 1.0 + 1.0) + (0.3 * 1.0 + 0.5) + (0.4 * 0.5 + 1.0) + (0.3 * 0.5 + 0.5)) / 4.0;
  CHECK(simulate::expected_mean_affine(model, tree::IndexSet::generation(2)) ==
        doctest::Approx(g2).epsilon(1e-12));
  // subtree: (m_0 + 2 m_1 + 4 m_2) / 7
  CHECK(simulate::expected_mean_affine(model, tree::IndexSet::subtree(2)) ==
        doctest::Approx((0.0 + 2 * 0.75 + 4 * g2) / 7.0).epsilon(1e-12));
  // explicit node: follow the path maps; node 5 is path 0 then 1
  CHECK(simulate::expected_mean_affine(model, tree::IndexSet::explicit_set({5})) ==
        doctest::Approx(0.3 * 1.0 + 0.5).epsilon(1e-12));

  NBARModel zero;
  zero.noise.sigma = 1.0;
  CHECK(simulate::expected_mean_affine(zero, tree::IndexSet::subtree(5)) == 0.0);

  auto curved = model;
  curved.f0.family = kernel::FunctionSpec::Family::TanhAffine;
  CHECK_THROWS_AS(simulate::expected_mean_affine(curved, tree::IndexSet::generation(1)),
                  std::invalid_argument);
}

TEST_CASE("replicate averages converge to the exact affine mean") {
  const auto model = linear_bar();
  const auto kern = kernel::nbar_kernel(model);
  const auto I = tree::IndexSet::generation(6);
  const int R = 1000;
  std::vector<double> means(R);
  for (int rep = 0; rep < R; ++rep) {
    const auto s = simulate::simulate_tree(*kern, 6, rng::Source(271828, static_cast<std::uint64_t>(rep)));
    means[static_cast<std::size_t>(rep)] =
        simulate::empirical_mean(s, I, Functional::identity());
  }
  double avg = 0;
  for (double v : means) avg += v;
  avg /= R;
  double sd = 0;
  for (double v : means) sd += (v - avg) * (v - avg);
  sd = std::sqrt(sd / (R - 1));
  const double exact = simulate::expected_mean_affine(model, I);
  CHECK(std::abs(avg - exact) <= 4.0 * sd / std::sqrt(static_cast<double>(R)));
}

TEST_CASE("defining identity of the chain at desk scale") {
  // the average of f(parent, children) matches the average of the kernel's
  // conditional mean evaluated at the parent
  const auto model = linear_bar();
  const auto kern = kernel::nbar_kernel(model);
  const int R = 4000;
  double lhs = 0, rhs = 0, lhs_sq = 0;
  for (int rep = 0; rep < R; ++rep) {
    const auto s = simulate::simulate_tree(*kern, 1, rng::Source(161803, static_cast<std::uint64_t>(rep)));
    const double g = s.value(2) + s.value(3);
    lhs += g;
    lhs_sq += g * g;
    rhs += (model.f0(s.value(1)) + model.f1(s.value(1)));  // exact conditional mean
  }
  lhs /= R;
  rhs /= R;
  lhs_sq /= R;
  const double se = std::sqrt((lhs_sq - lhs * lhs) / R);
  CHECK(std::abs(lhs - rhs) <= 4.0 * se);
}

TEST_CASE("csv dump layout") {
  const auto kern = kernel::nbar_kernel(walk_model());
  const auto s = simulate::simulate_tree(*kern, 1, rng::Source(0, 2));
  std::string out;
  simulate::dump_csv(s, 2, out);
  CHECK(out == "2,1,0,0\n2,2,1,1\n2,3,1,-1\n");
}

TEST_SUITE_END();
