#include "bifurcate/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bifurcate::bounds {

namespace {

const double kSqrt2 = std::numbers::sqrt2;

bool at(double r, double pole) { return std::abs(r - pole) <= kBranchTol; }

}  // namespace

void BoundInputs::validate() const {
  if (C <= 0) throw std::invalid_argument("T_1 constant C must be positive");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("transport order p must lie in [1,2]");
  if (r0 < 0 || r1 < 0 || q < 0) throw std::invalid_argument("contraction factors must be non-negative");
  if (lip <= 0 || !std::isfinite(lip)) throw std::invalid_argument("Lipschitz norm must be positive and finite");
  tree::check_generation(n);
}

TransportConstant whole_tree_transport_constant(double C, double p, double q,
                                                std::uint64_t N) {
  if (C <= 0) throw std::invalid_argument("T_1 constant C must be positive");
  if (q <= 0) throw std::invalid_argument("joint Lipschitz factor q must be positive");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("transport order p must lie in [1,2]");
  if (N == 0) throw std::invalid_argument("tree cardinality must be positive");

  const double nd = static_cast<double>(N);
  TransportConstant out;
  if (q < 1.0 - kBranchTol) {
    out.regime = "q<1";
    out.log_value = std::log(C) + (2.0 / p - 1.0) * std::log(nd) - 2.0 * std::log1p(-q);
  } else if (at(q, 1.0)) {
    out.regime = "q=1";
    out.log_value = std::log(C) + (2.0 - 2.0 / p) + (2.0 / p + 1.0) * std::log(nd);
  } else {
    // The expanding display's growth base is read as q itself.
    out.regime = "q>1";
    out.interpreted = true;
    out.log_value = std::log(C) + std::log(nd + 1.0) +
                    (2.0 / p) * ((q - 1.0) + p * nd * std::log(q) -
                                 std::log(std::pow(q, p) - 1.0));
  }
  out.value = std::exp(out.log_value);
  return out;
}

double gc_generation_mean(const BoundInputs& in) {
  in.validate();
  if (in.arity != Arity::Node) throw std::invalid_argument("generation-mean constant takes node functions");
  const double r = in.r_sum();
  const double gn = static_cast<double>(in.generation_count());
  const double scale = 2.0 * in.C * in.lip * in.lip / gn;
  if (at(r, kSqrt2)) return scale * (in.n + 1);
  const double ratio = r * r / 2.0;
  return scale * (1.0 - std::pow(ratio, in.n + 1)) / (1.0 - ratio);
}

double gc_generation_triple_mean(const BoundInputs& in) {
  in.validate();
  if (in.arity != Arity::Triple) throw std::invalid_argument("triple constant takes triple functions");
  const double r = in.r_sum();
  if (r <= 0) throw std::invalid_argument("triple generation constant needs r0 + r1 > 0");
  const double gn = static_cast<double>(in.generation_count());
  const double front = 2.0 * in.C * (1.0 + in.q) * (1.0 + in.q) * in.lip * in.lip;
  if (at(r, kSqrt2)) return front * (in.n + 2) / gn;
  const double ratio = r * r / 2.0;
  return front / (r * r * gn) * (1.0 - std::pow(ratio, in.n + 2)) / (1.0 - ratio);
}

double gc_subtree_mean(const BoundInputs& in) {
  in.validate();
  if (in.arity != Arity::Node) throw std::invalid_argument("subtree-mean constant takes node functions");
  const double r = in.r_sum();
  const double tn = static_cast<double>(in.subtree_count());
  const double fl2 = in.lip * in.lip;
  if (at(r, 1.0))
    return 2.0 * in.C * fl2 / (tn * tn) * (tn - 0.5 * (in.n + 1));
  if (at(r, kSqrt2))
    return 2.0 * in.C * fl2 / ((r - 1.0) * (r - 1.0) * tn) * (r * r * (in.n + 1) + 1.0);
  const double ratio = r * r / 2.0;
  return 2.0 * in.C * fl2 / ((r - 1.0) * (r - 1.0) * tn) *
         (1.0 + (1.0 - std::pow(ratio, in.n + 1)) / (1.0 - ratio));
}

double gc_subtree_triple_mean(const BoundInputs& in) {
  in.validate();
  if (in.arity != Arity::Triple) throw std::invalid_argument("triple constant takes triple functions");
  const double r = in.r_sum();
  const double tn = static_cast<double>(in.subtree_count());
  const double front = 8.0 * in.C * (1.0 + in.q) * (1.0 + in.q) * in.lip * in.lip;
  if (at(r, 1.0)) return front / (tn * tn) * (2.0 * tn - 0.5 * (in.n + 1));
  if (at(r, kSqrt2))
    return front / tn * (1.0 + (1.0 + r * r * (in.n + 1)) / ((r - 1.0) * (r - 1.0)));
  const double ratio = r * r / 2.0;
  return front / tn *
         (1.0 + (1.0 + r * r * (1.0 - std::pow(ratio, in.n + 1)) / (1.0 - ratio)) /
                    ((r - 1.0) * (r - 1.0)));
}

std::optional<std::string> near_pole_warning(double r) {
  if (!at(r, 1.0) && std::abs(r - 1.0) < kNearPoleTol)
    return "r within 1e-6 of 1; generic branch used";
  if (!at(r, kSqrt2) && std::abs(r - kSqrt2) < kNearPoleTol)
    return "r within 1e-6 of sqrt(2); generic branch used";
  return std::nullopt;
}

double path_transport_constant(double C, double r0, double r1,
                               const tree::AncestryPath& path) {
  if (C <= 0) throw std::invalid_argument("T_1 constant C must be positive");
  if (r0 < 0 || r1 < 0) throw std::invalid_argument("contraction factors must be non-negative");
  double acc = 0;
  const auto depth = path.bits.size();
  for (std::size_t k = 0; k < depth; ++k) {
    const int a_k = path.type1_suffix_counts[k];
    acc += std::pow(r0, 2.0 * (static_cast<double>(k) - a_k)) * std::pow(r1, 2.0 * a_k);
  }
  return C * acc;
}

LimitConstants limit_transport_constants(double C, double q, double r0, double r1) {
  if (C <= 0) throw std::invalid_argument("T_1 constant C must be positive");
  if (r0 < 0 || r1 < 0 || q < 0) throw std::invalid_argument("contraction factors must be non-negative");
  LimitConstants out;
  const double r = std::max(r0, r1);
  if (r >= 1.0) return out;  // not applicable
  out.applicable = true;
  const double denom = 1.0 - r * r;
  out.node = C / denom;
  out.triple = C * (1.0 + (1.0 + q) * (1.0 + q) / denom);
  return out;
}

double gaussian_deviation_bound(double kappa, double lip, double t) {
  if (kappa <= 0) throw std::invalid_argument("concentration constant must be positive");
  if (lip <= 0) throw std::invalid_argument("Lipschitz norm must be positive");
  if (t < 0) throw std::invalid_argument("deviation level must be non-negative");
  return std::exp(-t * t / (2.0 * kappa * lip * lip));
}

double transport_deviation_bound(double c_N, std::uint64_t I, double p, double lip,
                                 double t) {
  if (c_N <= 0) throw std::invalid_argument("transport constant must be positive");
  if (I == 0) throw std::invalid_argument("index set must be non-empty");
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("transport order p must lie in [1,2]");
  if (lip <= 0) throw std::invalid_argument("Lipschitz norm must be positive");
  if (t < 0) throw std::invalid_argument("deviation level must be non-negative");
  const double isz = std::pow(static_cast<double>(I), 2.0 / p);
  return std::exp(-t * t * isz / (2.0 * c_N * lip * lip));
}

double bias_to_invariant(const BoundInputs& in, double w1_nu_pi) {
  in.validate();
  if (w1_nu_pi < 0) throw std::invalid_argument("W_1 distance must be non-negative");
  const double r = in.r_sum();
  if (r >= 2.0) throw std::invalid_argument("bias bound needs r0 + r1 < 2");
  double sum = 0, pw = 1;
  for (int j = 0; j <= in.n; ++j) {
    sum += pw;
    pw *= r;
  }
  return w1_nu_pi * sum / static_cast<double>(in.subtree_count());
}

BoundSet evaluate_bound_set(const BoundInputs& node_in, double lip_triple) {
  BoundInputs node = node_in;
  node.arity = Arity::Node;
  node.validate();
  BoundInputs triple = node;
  triple.arity = Arity::Triple;
  triple.lip = lip_triple;

  BoundSet set;
  set.N = node.subtree_count();
  set.c_N = whole_tree_transport_constant(node.C, node.p, node.q, set.N);
  set.gamma_n = gc_generation_mean(node);
  set.tau_n = gc_subtree_mean(node);
  set.tau_prime_n = gc_subtree_triple_mean(triple);
  const double r = node.r_sum();
  if (r > 0) set.gamma_prime_n = gc_generation_triple_mean(triple);
  const auto limits = limit_transport_constants(node.C, node.q, node.r0, node.r1);
  set.limits_applicable = limits.applicable;
  set.c_infinity = limits.node;
  set.c_prime_infinity = limits.triple;
  if (at(r, 1.0)) set.regime_r = "r=1";
  else if (at(r, kSqrt2)) set.regime_r = "r=sqrt2";
  else set.regime_r = r < 1.0 ? "r<1" : (r < kSqrt2 ? "1<r<sqrt2" : "r>sqrt2");
  if (auto w = near_pole_warning(r)) set.warning = *w;
  return set;
}

}  // namespace bifurcate::bounds
