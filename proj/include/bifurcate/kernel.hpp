#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>

#include "bifurcate/rng.hpp"

// The T-transition probability abstraction: the joint law of a node's two
// offspring given the node's value, with declared Wasserstein regularity
// constants, plus the built-in nonlinear bifurcating autoregressive (NBAR)
// family X_{2k} = f0(X_k) + noise, X_{2k+1} = f1(X_k) + noise'.

namespace bifurcate::kernel {

// Declared regularity of a kernel. Constants are declared by the model
// author, never estimated: downstream bounds consume them as exact.
struct RegularityMeta {
  double r0 = 0;       // W_1 Lipschitz factor of the type-0 marginal
  double r1 = 0;       // W_1 Lipschitz factor of the type-1 marginal
  double q = 0;        // W_1 Lipschitz factor of the joint kernel
  double C = 0;        // T_1 constant valid for the joint kernel and the initial law
  double C_noise = 0;  // T_1 constant of the innovation law (additive models)

  void validate() const;
};

// Randomness bound to one draw site (source already carries master/replicate;
// unit is typically a node label or a chain step).
class NodeRandomness {
 public:
  NodeRandomness(const rng::Source& src, std::uint64_t unit) : src_(&src), unit_(unit) {}

  double normal(std::uint32_t stream) const { return src_->normal(unit_, stream); }
  double uniform(std::uint32_t stream, std::uint32_t round = 0) const {
    return src_->uniform(unit_, stream, round);
  }

 private:
  const rng::Source* src_;
  std::uint64_t unit_;
};

// Stream ids 0..15 are reserved for kernel-internal draws; drivers layering
// extra randomness on the same unit (branch coins, ...) start at 16.
inline constexpr std::uint32_t kStreamNoise = 0;
inline constexpr std::uint32_t kStreamInitial = 1;
inline constexpr std::uint32_t kStreamBranchCoin = 16;

class BifurcatingKernel {
 public:
  struct Offspring {
    double left = 0;
    double right = 0;
  };

  virtual ~BifurcatingKernel() = default;

  // Joint draw of both offspring values. The two randomness handles are bound
  // to the children's labels so that a node family's draw depends only on its
  // own counters.
  virtual Offspring sample(double state, const NodeRandomness& left,
                           const NodeRandomness& right) const = 0;

  // One marginal (branch 0 or 1). Uses the same internal streams as the
  // matching coordinate of sample.
  virtual double marginal(int branch, double state, const NodeRandomness& rnd) const = 0;

  // Draw from the initial law.
  virtual double initial_draw(const NodeRandomness& rnd) const = 0;

  // Mean of the initial law (exact, for moment recursions).
  virtual double initial_mean() const = 0;

  const RegularityMeta& meta() const { return meta_; }
  const std::string& name() const { return name_; }

 protected:
  RegularityMeta meta_;
  std::string name_;
};

// --- NBAR model descriptors ---------------------------------------------

struct FunctionSpec {
  enum class Family { Affine, TanhAffine };
  Family family = Family::Affine;
  double a = 0;  // slope / tanh amplitude
  double b = 0;  // offset

  double operator()(double x) const;
  double lipschitz() const { return std::abs(a); }
  bool affine() const { return family == Family::Affine; }
  std::string describe() const;
};

struct NoiseSpec {
  enum class Family { Gaussian, UniformCentered, TruncatedGaussian };
  Family family = Family::Gaussian;
  double sigma = 0;      // Gaussian / TruncatedGaussian scale
  double halfwidth = 0;  // UniformCentered / TruncatedGaussian support radius

  // Declared T_1 constant: sigma^2 for Gaussian, halfwidth^2 for the two
  // bounded families (a valid upper bound; downstream bounds are monotone in
  // it, so over-estimates are safe).
  double t1_constant() const;
  double draw(const NodeRandomness& rnd, std::uint32_t stream) const;
  void validate() const;
  std::string describe() const;
};

struct InitialSpec {
  enum class Family { Dirac, Gaussian, UniformCentered };
  Family family = Family::Dirac;
  double x0 = 0;         // Dirac location
  double mean = 0;       // Gaussian mean
  double sigma = 0;      // Gaussian scale
  double halfwidth = 0;  // UniformCentered support radius

  double t1_constant() const;  // 0 for Dirac (any positive constant works)
  double mean_value() const;
  double draw(const NodeRandomness& rnd) const;
  void validate() const;
  std::string describe() const;
};

struct NBARModel {
  FunctionSpec f0;
  FunctionSpec f1;
  NoiseSpec noise;
  InitialSpec initial;

  bool affine() const { return f0.affine() && f1.affine(); }

  // r_b = Lipschitz norm of f_b; q = r0 + r1; C covers both the initial law
  // and the joint kernel (the joint inherits twice the noise constant, one
  // per conditionally independent coordinate).
  RegularityMeta meta() const;
  void validate() const;
};

std::unique_ptr<BifurcatingKernel> nbar_kernel(const NBARModel& model);

// One step of the random-lineage chain: flip a fair coin, apply that marginal.
class LineageKernel {
 public:
  explicit LineageKernel(const BifurcatingKernel& kernel) : kernel_(&kernel) {}

  double step(double state, const rng::Source& src, std::uint64_t step_unit) const {
    const NodeRandomness rnd(src, step_unit);
    const int branch = rnd.uniform(kStreamBranchCoin) <= 0.5 ? 0 : 1;
    return kernel_->marginal(branch, state, rnd);
  }

  const BifurcatingKernel& kernel() const { return *kernel_; }

 private:
  const BifurcatingKernel* kernel_;
};

struct ContractionEstimate {
  double ratio = 0;             // primary W_1 ratio estimate
  double coupled_ratio = 0;     // identical-noise coupling (upper bound on W_1)
  bool ratio_is_upper_bound = false;  // true for the joint branch
  double reference = 0;         // declared contraction factor for the branch
};

enum class Branch { Type0 = 0, Type1 = 1, Joint = 2 };

// Monte-Carlo estimate of W_1(kernel at x, kernel at xt) / |x - xt|. For the
// marginal branches this is the exact 1-D two-sample distance; for the joint
// branch only the identical-noise coupling upper bound is available (2-D
// transport is out of scope) and the result is flagged accordingly.
ContractionEstimate empirical_contraction(const BifurcatingKernel& kernel, double x,
                                          double xt, Branch branch, int draws,
                                          std::uint64_t seed);

// Diagnostic only: max slope of f over a uniform grid. Never feeds bounds.
double empirical_lipschitz(const FunctionSpec& f, double lo, double hi, int grid);

}  // namespace bifurcate::kernel
