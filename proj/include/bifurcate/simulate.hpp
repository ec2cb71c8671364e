#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bifurcate/kernel.hpp"
#include "bifurcate/tree.hpp"

// Trajectory generation over the binary tree and additive functionals of the
// sample: sums and empirical means of f(X_i) or f(X_i, X_{2i}, X_{2i+1}) over
// generations and subtrees.

namespace bifurcate::simulate {

struct SeedPair {
  std::uint64_t master = 0;
  std::uint64_t replicate = 0;
};

// One realized trajectory (X_i, i in T_n), stored flat and 1-indexed;
// generation r occupies the contiguous label range [2^r, 2^{r+1}).
class TreeSample {
 public:
  TreeSample(int depth, std::vector<double> values, SeedPair seed);

  int depth() const { return depth_; }
  std::uint64_t node_count() const { return tree::subtree_size(depth_); }
  double value(tree::NodeId n) const { return values_[n]; }
  std::span<const double> generation_slice(int r) const;
  const SeedPair& seed() const { return seed_; }

 private:
  int depth_;
  std::vector<double> values_;  // index 0 unused
  SeedPair seed_;
};

// Generates one trajectory. A pure function of (kernel, depth, source); the
// root draw uses node 1 and every offspring pair draws on its own labels, so
// results are independent of evaluation order.
TreeSample simulate_tree(const kernel::BifurcatingKernel& kernel, int depth,
                         const rng::Source& src);

struct Functional {
  enum class Arity { Node, Triple };

  Arity arity = Arity::Node;
  std::string name;
  double lip = 1.0;  // for triples: w.r.t. the l_1 metric on triples
  std::function<double(double)> node_fn;
  std::function<double(double, double, double)> triple_fn;

  static Functional identity();
  static Functional node(std::string name, std::function<double(double)> fn, double lip);
  static Functional triple(std::string name,
                           std::function<double(double, double, double)> fn, double lip);
  // y + z - (f0(x) + f1(x)): the centered offspring residual of a model.
  static Functional offspring_residual(const kernel::NBARModel& model);
};

// Mean of g over the index set; for triple functionals every index must have
// both children inside the sample.
double empirical_mean(const TreeSample& sample, const tree::IndexSet& I,
                      const Functional& g);

// Exact E[mean of X over I] for affine models, via the one-step affine
// recursion on generation means. Rejects non-affine models.
double expected_mean_affine(const kernel::NBARModel& model, const tree::IndexSet& I);

// CSV dump, one row per node: replicate,node,generation,value.
void dump_csv(const TreeSample& sample, std::uint64_t replicate, std::string& out);

}  // namespace bifurcate::simulate
