#include "bifurcate/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "bifurcate/fp_format.hpp"

namespace bifurcate::simulate {

TreeSample::TreeSample(int depth, std::vector<double> values, SeedPair seed)
    : depth_(depth), values_(std::move(values)), seed_(seed) {
  tree::check_generation(depth);
  if (values_.size() != tree::subtree_size(depth) + 1)
    throw std::invalid_argument("value buffer size does not match the depth");
}

std::span<const double> TreeSample::generation_slice(int r) const {
  if (r < 0 || r > depth_) throw std::invalid_argument("generation outside the sample");
  const auto lo = std::uint64_t{1} << r;
  return {values_.data() + lo, lo};
}

TreeSample simulate_tree(const kernel::BifurcatingKernel& kernel, int depth,
                         const rng::Source& src) {
  tree::check_generation(depth);
  const std::uint64_t count = tree::subtree_size(depth);
  std::vector<double> values(count + 1, 0.0);
  values[0] = std::nan("");

  values[1] = kernel.initial_draw(kernel::NodeRandomness(src, 1));
  const std::uint64_t parents = depth == 0 ? 0 : tree::subtree_size(depth - 1);
  for (std::uint64_t k = 1; k <= parents; ++k) {
    const kernel::NodeRandomness left(src, 2 * k);
    const kernel::NodeRandomness right(src, 2 * k + 1);
    const auto pair = kernel.sample(values[k], left, right);
    values[2 * k] = pair.left;
    values[2 * k + 1] = pair.right;
  }
  return TreeSample(depth, std::move(values), SeedPair{src.master(), src.replicate()});
}

Functional Functional::identity() {
  return node("identity", [](double x) { return x; }, 1.0);
}

Functional Functional::node(std::string name, std::function<double(double)> fn, double lip) {
  if (lip <= 0 || !std::isfinite(lip)) throw std::invalid_argument("Lipschitz norm must be positive and finite");
  Functional g;
  g.arity = Arity::Node;
  g.name = std::move(name);
  g.lip = lip;
  g.node_fn = std::move(fn);
  return g;
}

Functional Functional::triple(std::string name,
                              std::function<double(double, double, double)> fn, double lip) {
  if (lip <= 0 || !std::isfinite(lip)) throw std::invalid_argument("Lipschitz norm must be positive and finite");
  Functional g;
  g.arity = Arity::Triple;
  g.name = std::move(name);
  g.lip = lip;
  g.triple_fn = std::move(fn);
  return g;
}

Functional Functional::offspring_residual(const kernel::NBARModel& model) {
  const auto f0 = model.f0;
  const auto f1 = model.f1;
  // l_1 Lipschitz norm: 1 in each offspring coordinate, r0 + r1 in the parent.
  const double lip = std::max(1.0, f0.lipschitz() + f1.lipschitz());
  return triple(
      "offspring_residual",
      [f0, f1](double x, double y, double z) { return y + z - (f0(x) + f1(x)); }, lip);
}

double empirical_mean(const TreeSample& sample, const tree::IndexSet& I,
                      const Functional& g) {
  const std::uint64_t count = sample.node_count();
  if (I.max_node() > count) throw std::out_of_range("index set exceeds the sample");
  double acc = 0;
  if (g.arity == Functional::Arity::Node) {
    I.for_each([&](tree::NodeId i) { acc += g.node_fn(sample.value(i)); });
  } else {
    if (2 * I.max_node() + 1 > count)
      throw std::out_of_range("triple functional needs both children inside the sample");
    I.for_each([&](tree::NodeId i) {
      acc += g.triple_fn(sample.value(i), sample.value(2 * i), sample.value(2 * i + 1));
    });
  }
  return acc / static_cast<double>(I.size());
}

double expected_mean_affine(const kernel::NBARModel& model, const tree::IndexSet& I) {
  if (!model.affine()) throw std::invalid_argument("exact means require an affine model");
  const double slope = 0.5 * (model.f0.a + model.f1.a);
  const double offset = 0.5 * (model.f0.b + model.f1.b);
  const double root_mean = model.initial.mean_value();

  switch (I.kind()) {
    case tree::IndexSet::Kind::Generation:
    case tree::IndexSet::Kind::Subtree: {
      const int m = I.level();
      double gen_mean = root_mean;
      if (I.kind() == tree::IndexSet::Kind::Generation) {
        for (int r = 0; r < m; ++r) gen_mean = slope * gen_mean + offset;
        return gen_mean;
      }
      double acc = gen_mean;  // generation 0, one node
      double weight = 1;
      for (int r = 1; r <= m; ++r) {
        gen_mean = slope * gen_mean + offset;
        weight *= 2;
        acc += weight * gen_mean;
      }
      return acc / static_cast<double>(tree::subtree_size(m));
    }
    case tree::IndexSet::Kind::Explicit: {
      double acc = 0;
      I.for_each([&](tree::NodeId node) {
        double mean = root_mean;
        if (node > 1)
          for (int z : tree::ancestry(node).bits)
            mean = z == 0 ? model.f0.a * mean + model.f0.b : model.f1.a * mean + model.f1.b;
        acc += mean;
      });
      return acc / static_cast<double>(I.size());
    }
  }
  throw std::logic_error("unreachable");
}

void dump_csv(const TreeSample& sample, std::uint64_t replicate, std::string& out) {
  for (std::uint64_t n = 1; n <= sample.node_count(); ++n) {
    out += std::to_string(replicate);
    out += ',';
    out += std::to_string(n);
    out += ',';
    out += std::to_string(tree::generation(n));
    out += ',';
    out += fmt17(sample.value(n));
    out += '\n';
  }
}

}  // namespace bifurcate::simulate
