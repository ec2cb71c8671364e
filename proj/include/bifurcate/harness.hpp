#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/bounds.hpp"
#include "bifurcate/kernel.hpp"
#include "bifurcate/simulate.hpp"
#include "bifurcate/tree.hpp"

// Replicated Monte-Carlo experiments that confront empirical deviations of
// tree empirical means with the theoretical Gaussian concentration constants:
// tail domination, Laplace-transform domination, bias towards the invariant
// law of the random-lineage chain, and two-point Wasserstein contraction.

namespace bifurcate::harness {

enum class Verdict { Dominated, Violated, Inconclusive };
std::string to_string(Verdict v);

// Exact binomial confidence interval.
struct Interval {
  double lo = 0;
  double hi = 1;
};
Interval clopper_pearson(std::uint64_t count, std::uint64_t trials, double confidence);

struct ExperimentSpec {
  kernel::NBARModel model;
  int depth = 0;                      // simulated tree depth
  int replicates = 0;                 // R >= 2
  simulate::Functional functional = simulate::Functional::identity();
  tree::IndexSet index_set = tree::IndexSet::generation(0);
  std::vector<double> sigma_multiples = {0.1, 0.25, 0.5, 1.0, 2.0, 3.0};
  std::uint64_t master_seed = 0;
  int threads = 1;

  void validate() const;
};

struct TailEntry {
  double t = 0;        // absolute deviation level
  double p_hat = 0;    // empirical two-sided tail
  double ci_lo = 0, ci_hi = 0;
  double bound = 0;    // 2 exp(-t^2 / (2 kappa))
  Verdict verdict = Verdict::Inconclusive;
};

struct LaplaceHarnessEntry {
  double t = 0;
  double mgf_hat = 0;   // empirical centered MGF across replicates
  double bound = 0;     // exp(kappa t^2 / 2)
  double slack = 0;     // 3 bootstrap standard errors
  bool evaluable = true;
  Verdict verdict = Verdict::Inconclusive;
};

struct ConcentrationReport {
  std::string check;      // "tail" or "laplace"
  std::string centering;  // "replicate_mean" or "exact_mean"
  double kappa = 0;
  std::string kappa_source;  // which concentration constant was used
  double center = 0;
  double sigma_hat = 0;  // replicate std of the empirical mean
  int replicates = 0;
  std::uint64_t master_seed = 0;
  std::string index_set;
  std::string functional;
  std::vector<TailEntry> tail;
  std::vector<LaplaceHarnessEntry> laplace;

  Verdict overall() const;
};

struct TailCheckResult {
  ConcentrationReport replicate_centered;
  std::optional<ConcentrationReport> exact_centered;  // affine identity / residual only
};

// Concentration constant implied by (index set kind, functional arity) and
// its provenance label.
std::pair<double, std::string> concentration_constant(const ExperimentSpec& spec);

TailCheckResult run_tail_check(const ExperimentSpec& spec);
TailCheckResult run_laplace_check(const ExperimentSpec& spec);

// Replicate values of the empirical mean, one per replicate id.
std::vector<double> replicate_means(const ExperimentSpec& spec);

// Report assembly from precomputed replicate values; lets callers test other
// concentration constants against the same sample.
ConcentrationReport build_tail_report(const ExperimentSpec& spec,
                                      const std::vector<double>& values, double kappa,
                                      const std::string& kappa_source,
                                      const std::string& centering, double center);
ConcentrationReport build_laplace_report(const ExperimentSpec& spec,
                                         const std::vector<double>& values, double kappa,
                                         const std::string& kappa_source,
                                         const std::string& centering, double center,
                                         bool recenter_bootstrap);

struct BiasSettings {
  std::uint64_t chain_steps = 1'000'000;  // post burn-in Q-chain length
  std::uint64_t burn_in = 10'000;
  double chain_start = 0.0;
  std::uint64_t initial_draws = 10'000;  // sample size of the initial law for W_1
};

struct BiasReport {
  int depth = 0;
  int replicates = 0;
  double replicate_mean = 0;  // mean over replicates of the subtree mean
  double replicate_se = 0;
  double pi_estimate = 0;     // long-chain estimate of the invariant mean
  double pi_se = 0;           // batch-means standard error
  double w1_initial_to_pi = 0;
  double bias_bound = 0;      // explicit majorant at the estimated W_1
  double measured_bias = 0;   // |replicate_mean - pi_estimate|
  double allowance = 0;       // 3 combined standard errors
  bool within = false;
};

BiasReport run_bias_check(const kernel::NBARModel& model, int depth, int replicates,
                          const BiasSettings& settings, std::uint64_t master_seed,
                          int threads = 1);

struct ContractionReport {
  double x = 0, x_twin = 0;
  int steps = 0;
  int draws = 0;
  double w1_hat = 0;
  double ratio = 0;           // w1_hat / |x - x_twin|
  double coupled_ratio = 0;   // shared-noise paired estimate
  double theory_ratio = 0;    // ((r0 + r1)/2)^steps
  double mc_halfwidth = 0;    // bootstrap SE plus same-law floor, per unit gap
  bool within = false;        // ratio <= theory + 3 * mc_halfwidth
};

ContractionReport run_contraction_check(const kernel::NBARModel& model, int steps,
                                        double x, double x_twin, int draws,
                                        std::uint64_t master_seed);

}  // namespace bifurcate::harness
