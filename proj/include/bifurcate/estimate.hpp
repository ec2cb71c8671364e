#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bifurcate/kernel.hpp"
#include "bifurcate/simulate.hpp"

// Nonparametric estimation on tree samples: Nadaraya-Watson estimators of the
// autoregression functions along parent-child pairs, the joint
// parent-offspring density estimator, and the two-term deviation bound for
// the pointwise estimation error.

namespace bifurcate::estimate {

// Compactly supported smoothing kernel with declared regularity; the
// integral-one property is verified numerically at construction.
class SmoothingKernel {
 public:
  enum class Shape { Epanechnikov, Triangular, Quartic };

  static SmoothingKernel make(Shape shape);
  static SmoothingKernel parse(const std::string& name);

  double operator()(double u) const;
  Shape shape() const { return shape_; }
  double support() const { return support_; }     // R
  double lipschitz() const { return lipschitz_; } // sup |K'|
  double sup_norm() const { return sup_; }        // K(0) for these families
  std::string name() const;

 private:
  SmoothingKernel(Shape shape, double support, double lipschitz, double sup);
  Shape shape_;
  double support_, lipschitz_, sup_;
};

struct NWPoint {
  double x = 0;
  double estimate = 0;  // NaN when undefined
  bool defined = false;
  double weight_mass = 0;        // normalized denominator
  double drift_component = 0;    // normalized signal part of the error (needs truth)
  double noise_component = 0;    // normalized noise part of the error (needs truth)
  bool diagnostics = false;
};

struct NWFit {
  int target_branch = 0;  // 0 or 1
  double alpha = 0;
  double bandwidth = 0;            // |T_n|^{-alpha} for the sample depth n
  int depth = 0;                   // sample depth
  std::uint64_t effective_count = 0;  // parents actually summed: |T_{n-1}|
  std::string kernel_name;
  std::vector<NWPoint> points;
};

// Kernel-weighted local average of child values against parent values. Sums
// run over parents k with both children inside the sample (the label set
// T_{n-1} of a depth-n sample); the effective count is recorded. Passing the
// true autoregression function enables the drift/noise error decomposition
// diagnostics. Grid points where no parent falls within the kernel window
// carry an explicit undefined marker.
NWFit nw_fit(const simulate::TreeSample& sample, const SmoothingKernel& kernel,
             double alpha, std::span<const double> grid, int target_branch,
             const kernel::FunctionSpec* truth = nullptr);

struct DensityPoint {
  std::array<double, 3> at{};  // (x, y, z)
  double joint_display = 0;    // single-bandwidth normalization, as displayed
  double joint_cubed = 0;      // bandwidth-cubed normalization
  double transition_display = 0;  // joint / weight mass, display normalization
  double transition_cubed = 0;
  double weight_mass = 0;
  bool defined = false;  // weight mass positive
};

struct TransitionDensityFit {
  double alpha = 0;
  double bandwidth = 0;
  int depth = 0;
  std::uint64_t effective_count = 0;
  std::string kernel_name;
  std::vector<DensityPoint> points;
};

// Product-kernel estimate of the joint parent-offspring density and of the
// transition kernel. Both bandwidth normalizations are emitted side by side;
// neither is privileged.
TransitionDensityFit transition_density_fit(const simulate::TreeSample& sample,
                                            const SmoothingKernel& kernel, double alpha,
                                            std::span<const std::array<double, 3>> grid);

struct KernelDeviationBound {
  double deviation = 0;        // r
  double threshold = 0;        // E_N / E_D: deviations must exceed this
  double margin = 0;           // r E_D - E_N
  double noise_rate = 0;       // leading constant of the noise term
  double main_rate = 0;        // leading constant of the signal term
  double quadratic_scale = 0;  // scale of the r^2/h^2 correction
  double drift_lipschitz = 0;  // Lipschitz norm of the windowed drift map
  double subtree_gc_unit = 0;  // subtree GC constant at unit Lipschitz norm
  double bandwidth = 0;
  std::uint64_t tree_size = 0;
  double noise_term = 0;
  double main_term = 0;
  double bound = 0;  // noise_term + main_term, always <= 4
  std::string note = "constants assembled from proof ingredients";
};

// Two-term exponential bound on P(|estimator - truth| > r) with every
// sub-constant reported. Requires r0 + r1 < sqrt(2), alpha < 1/4, a positive
// expected weight mass and r above the threshold; violations are named
// individually.
KernelDeviationBound dev_ker_bound(const kernel::RegularityMeta& meta, double lip_f0,
                                   const SmoothingKernel& kernel, double alpha, int depth,
                                   double r, double expected_weight_mass,
                                   double expected_drift);

struct MomentEstimate {
  double weight_mass_mean = 0;   // E of the normalized denominator at x
  double weight_mass_half99 = 0; // 99% normal-approximation halfwidth
  double drift_mean = 0;         // E of the normalized drift numerator at x
  double drift_half99 = 0;
  int replicates = 0;
};

// Monte-Carlo estimate of the expected denominator (and drift numerator) of
// the estimator at one point, by averaging over independent tree replicates.
MomentEstimate expected_denominator(const kernel::NBARModel& model,
                                    const SmoothingKernel& kernel, double alpha, int depth,
                                    double x, int replicates, std::uint64_t master_seed,
                                    int threads = 1);

}  // namespace bifurcate::estimate
