#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bifurcate/tree.hpp"

// Closed-form transportation and Gaussian-concentration constants for
// bifurcating Markov chains, and the deviation bounds they imply. All
// functions are pure; branch selection between the critical values r = 1 and
// r = sqrt(2) uses an exact match within 1e-12.

namespace bifurcate::bounds {

enum class Arity { Node, Triple };

inline constexpr double kBranchTol = 1e-12;
inline constexpr double kNearPoleTol = 1e-6;

struct BoundInputs {
  double C = 1.0;   // T_1 constant shared by the initial law and the joint kernel
  double p = 1.0;   // transport order, in [1,2]
  double q = 0.0;   // joint-kernel Wasserstein Lipschitz factor
  double r0 = 0.0;  // type-0 marginal contraction factor
  double r1 = 0.0;  // type-1 marginal contraction factor
  int n = 0;        // generation depth
  double lip = 1.0; // Lipschitz norm of the test function
  Arity arity = Arity::Node;

  double r_sum() const { return r0 + r1; }
  std::uint64_t generation_count() const { return tree::generation_size(n); }
  std::uint64_t subtree_count() const { return tree::subtree_size(n); }
  void validate() const;
};

// Whole-trajectory transport constant; the value can overflow for expanding
// kernels at realistic tree sizes, so the natural log is carried alongside.
struct TransportConstant {
  double value = 0;
  double log_value = 0;
  std::string regime;        // "q<1", "q=1", "q>1"
  bool interpreted = false;  // true on the q>1 branch (growth base read as q)
};

TransportConstant whole_tree_transport_constant(double C, double p, double q,
                                                std::uint64_t N);

// Gaussian-concentration constants for empirical means, at transport order 1.
double gc_generation_mean(const BoundInputs& in);        // node functions over G_n
double gc_generation_triple_mean(const BoundInputs& in); // ancestor-offspring over G_n
double gc_subtree_mean(const BoundInputs& in);           // node functions over T_n
double gc_subtree_triple_mean(const BoundInputs& in);    // ancestor-offspring over T_n

// Warning when r sits near (but not exactly at) a branch pole.
std::optional<std::string> near_pole_warning(double r);

// T_1 constant of the law of one node given the root, along its ancestry.
double path_transport_constant(double C, double r0, double r1,
                               const tree::AncestryPath& path);

struct LimitConstants {
  bool applicable = false;  // requires max(r0, r1) < 1
  double node = 0;          // depth-free constant for a single node
  double triple = 0;        // depth-free constant for an ancestor-offspring triple
};

LimitConstants limit_transport_constants(double C, double q, double r0, double r1);

// One-sided Gaussian tail exp(-t^2 / (2 kappa lip^2)); pass lip = 1 when
// kappa already includes the function's Lipschitz norm.
double gaussian_deviation_bound(double kappa, double lip, double t);

// Tail bound driven by the whole-tree transport constant for a mean over an
// index set of size I.
double transport_deviation_bound(double c_N, std::uint64_t I, double p, double lip,
                                 double t);

// Explicit majorant for |E(subtree mean) - pi(f)| given W_1(initial, pi),
// normalized to lip = 1. Requires r0 + r1 < 2.
double bias_to_invariant(const BoundInputs& in, double w1_nu_pi);

// Everything above for one model, evaluated at node and triple Lipschitz
// norms; the CLI serializes this.
struct BoundSet {
  TransportConstant c_N;
  std::uint64_t N = 0;
  double gamma_n = 0;
  double gamma_prime_n = 0;
  double tau_n = 0;
  double tau_prime_n = 0;
  bool limits_applicable = false;
  double c_infinity = 0;
  double c_prime_infinity = 0;
  std::string regime_r;  // r relative to 1 and sqrt(2)
  std::string warning;
};

BoundSet evaluate_bound_set(const BoundInputs& node_in, double lip_triple);

}  // namespace bifurcate::bounds
