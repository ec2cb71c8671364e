#include "bifurcate/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bifurcate/metrics.hpp"

namespace bifurcate::kernel {

void RegularityMeta::validate() const {
  if (r0 < 0 || r1 < 0 || q < 0) throw std::invalid_argument("contraction factors must be non-negative");
  if (!(std::isfinite(r0) && std::isfinite(r1) && std::isfinite(q)))
    throw std::invalid_argument("contraction factors must be finite");
  if (r0 > q || r1 > q) throw std::invalid_argument("marginal factors cannot exceed the joint factor");
}

double FunctionSpec::operator()(double x) const {
  switch (family) {
    case Family::Affine: return a * x + b;
    case Family::TanhAffine: return a * std::tanh(x) + b;
  }
  return 0;
}

std::string FunctionSpec::describe() const {
  switch (family) {
    case Family::Affine: return "affine(" + std::to_string(a) + "," + std::to_string(b) + ")";
    case Family::TanhAffine: return "tanh(" + std::to_string(a) + "," + std::to_string(b) + ")";
  }
  return "";
}

void NoiseSpec::validate() const {
  switch (family) {
    case Family::Gaussian:
      if (sigma < 0 || !std::isfinite(sigma)) throw std::invalid_argument("noise sigma must be non-negative");
      break;
    case Family::UniformCentered:
      if (halfwidth <= 0 || !std::isfinite(halfwidth))
        throw std::invalid_argument("uniform noise halfwidth must be positive");
      break;
    case Family::TruncatedGaussian:
      if (sigma <= 0 || halfwidth <= 0)
        throw std::invalid_argument("truncated gaussian needs positive sigma and halfwidth");
      break;
  }
}

double NoiseSpec::t1_constant() const {
  switch (family) {
    case Family::Gaussian: return sigma * sigma;
    case Family::UniformCentered: return halfwidth * halfwidth;
    case Family::TruncatedGaussian: return halfwidth * halfwidth;
  }
  throw std::invalid_argument("noise family without declared T_1 constant");
}

double NoiseSpec::draw(const NodeRandomness& rnd, std::uint32_t stream) const {
  switch (family) {
    case Family::Gaussian:
      return sigma == 0 ? 0.0 : sigma * rnd.normal(stream);
    case Family::UniformCentered:
      return halfwidth * (2.0 * rnd.uniform(stream) - 1.0);
    case Family::TruncatedGaussian: {
      // Rejection; each round advances the counter, keeping the draw a pure
      // function of its address.
      for (std::uint32_t round = 1; round < 4096; ++round) {
        const double u1 = rnd.uniform(stream, 2 * round);
        const double u2 = rnd.uniform(stream, 2 * round + 1);
        const double z =
            sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        if (std::abs(z) <= halfwidth) return z;
      }
      return 0.0;  // unreachable for sane sigma/halfwidth ratios
    }
  }
  return 0;
}

std::string NoiseSpec::describe() const {
  switch (family) {
    case Family::Gaussian: return "gaussian(sigma=" + std::to_string(sigma) + ")";
    case Family::UniformCentered: return "uniform(halfwidth=" + std::to_string(halfwidth) + ")";
    case Family::TruncatedGaussian:
      return "truncated_gaussian(sigma=" + std::to_string(sigma) +
             ",halfwidth=" + std::to_string(halfwidth) + ")";
  }
  return "";
}

void InitialSpec::validate() const {
  switch (family) {
    case Family::Dirac: break;
    case Family::Gaussian:
      if (sigma < 0 || !std::isfinite(sigma)) throw std::invalid_argument("initial sigma must be non-negative");
      break;
    case Family::UniformCentered:
      if (halfwidth <= 0) throw std::invalid_argument("initial halfwidth must be positive");
      break;
  }
}

double InitialSpec::t1_constant() const {
  switch (family) {
    case Family::Dirac: return 0.0;
    case Family::Gaussian: return sigma * sigma;
    case Family::UniformCentered: return halfwidth * halfwidth;
  }
  return 0;
}

double InitialSpec::mean_value() const {
  switch (family) {
    case Family::Dirac: return x0;
    case Family::Gaussian: return mean;
    case Family::UniformCentered: return 0.0;
  }
  return 0;
}

double InitialSpec::draw(const NodeRandomness& rnd) const {
  switch (family) {
    case Family::Dirac: return x0;
    case Family::Gaussian:
      return sigma == 0 ? mean : mean + sigma * rnd.normal(kStreamInitial);
    case Family::UniformCentered:
      return halfwidth * (2.0 * rnd.uniform(kStreamInitial) - 1.0);
  }
  return 0;
}

std::string InitialSpec::describe() const {
  switch (family) {
    case Family::Dirac: return "dirac(" + std::to_string(x0) + ")";
    case Family::Gaussian:
      return "gaussian(mean=" + std::to_string(mean) + ",sigma=" + std::to_string(sigma) + ")";
    case Family::UniformCentered: return "uniform(halfwidth=" + std::to_string(halfwidth) + ")";
  }
  return "";
}

void NBARModel::validate() const {
  noise.validate();
  initial.validate();
  if (!std::isfinite(f0.a) || !std::isfinite(f0.b) || !std::isfinite(f1.a) || !std::isfinite(f1.b))
    throw std::invalid_argument("autoregression coefficients must be finite");
}

RegularityMeta NBARModel::meta() const {
  validate();
  RegularityMeta m;
  m.r0 = f0.lipschitz();
  m.r1 = f1.lipschitz();
  m.q = m.r0 + m.r1;
  m.C_noise = noise.t1_constant();
  // Joint kernel: two conditionally independent coordinates, each T_1(C_noise),
  // so the product satisfies T_1(2 C_noise) for the l_1 metric. The shared C
  // must also cover the initial law. A fully deterministic model declares
  // C = 1: point masses satisfy the inequality at every positive constant.
  m.C = std::max(initial.t1_constant(), 2.0 * m.C_noise);
  if (m.C == 0.0) m.C = 1.0;
  m.validate();
  return m;
}

namespace {

class NBARKernel final : public BifurcatingKernel {
 public:
  explicit NBARKernel(NBARModel model) : model_(std::move(model)) {
    meta_ = model_.meta();
    name_ = "nbar[" + model_.f0.describe() + ";" + model_.f1.describe() + ";" +
            model_.noise.describe() + ";" + model_.initial.describe() + "]";
  }

  Offspring sample(double state, const NodeRandomness& left,
                   const NodeRandomness& right) const override {
    return {model_.f0(state) + model_.noise.draw(left, kStreamNoise),
            model_.f1(state) + model_.noise.draw(right, kStreamNoise)};
  }

  double marginal(int branch, double state, const NodeRandomness& rnd) const override {
    if (branch != 0 && branch != 1) throw std::invalid_argument("branch must be 0 or 1");
    const auto& f = branch == 0 ? model_.f0 : model_.f1;
    return f(state) + model_.noise.draw(rnd, kStreamNoise);
  }

  double initial_draw(const NodeRandomness& rnd) const override {
    return model_.initial.draw(rnd);
  }

  double initial_mean() const override { return model_.initial.mean_value(); }

  const NBARModel& model() const { return model_; }

 private:
  NBARModel model_;
};

}  // namespace

std::unique_ptr<BifurcatingKernel> nbar_kernel(const NBARModel& model) {
  model.validate();
  model.noise.t1_constant();  // rejects families without a declared constant
  return std::make_unique<NBARKernel>(model);
}

ContractionEstimate empirical_contraction(const BifurcatingKernel& kernel, double x,
                                          double xt, Branch branch, int draws,
                                          std::uint64_t seed) {
  if (x == xt) throw std::invalid_argument("states must differ");
  if (draws < 2) throw std::invalid_argument("need at least 2 draws");
  const double gap = std::abs(x - xt);

  const rng::Source at_x(rng::derive_seed(seed, rng::kPurposeContraction), 0);
  const rng::Source at_xt(rng::derive_seed(seed, rng::kPurposeContraction), 1);

  ContractionEstimate out;
  if (branch == Branch::Joint) {
    // Identical randomness at both states couples the pairs; the mean l_1
    // displacement upper-bounds W_1 on the product space.
    double acc = 0;
    for (int i = 0; i < draws; ++i) {
      const NodeRandomness left(at_x, 2 * static_cast<std::uint64_t>(i));
      const NodeRandomness right(at_x, 2 * static_cast<std::uint64_t>(i) + 1);
      const auto a = kernel.sample(x, left, right);
      const auto b = kernel.sample(xt, left, right);
      acc += std::abs(a.left - b.left) + std::abs(a.right - b.right);
    }
    out.coupled_ratio = acc / draws / gap;
    out.ratio = out.coupled_ratio;
    out.ratio_is_upper_bound = true;
    out.reference = kernel.meta().q;
    return out;
  }

  const int b = branch == Branch::Type0 ? 0 : 1;
  std::vector<double> from_x(static_cast<std::size_t>(draws));
  std::vector<double> from_xt(static_cast<std::size_t>(draws));
  double coupled = 0;
  for (int i = 0; i < draws; ++i) {
    const NodeRandomness rx(at_x, static_cast<std::uint64_t>(i));
    const NodeRandomness rxt(at_xt, static_cast<std::uint64_t>(i));
    from_x[static_cast<std::size_t>(i)] = kernel.marginal(b, x, rx);
    from_xt[static_cast<std::size_t>(i)] = kernel.marginal(b, xt, rxt);
    // same-randomness pairing for the coupling diagnostic
    coupled += std::abs(kernel.marginal(b, x, rx) - kernel.marginal(b, xt, rx));
  }
  const metrics::EmpiricalMeasure mx(std::move(from_x));
  const metrics::EmpiricalMeasure mxt(std::move(from_xt));
  out.ratio = metrics::wasserstein(mx, mxt, 1.0) / gap;
  out.coupled_ratio = coupled / draws / gap;
  out.reference = b == 0 ? kernel.meta().r0 : kernel.meta().r1;
  return out;
}

double empirical_lipschitz(const FunctionSpec& f, double lo, double hi, int grid) {
  if (grid < 2 || !(lo < hi)) throw std::invalid_argument("need lo < hi and at least 2 grid points");
  double best = 0;
  double prev_x = lo, prev_y = f(lo);
  for (int i = 1; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / (grid - 1);
    const double y = f(x);
    best = std::max(best, std::abs(y - prev_y) / (x - prev_x));
    prev_x = x;
    prev_y = y;
  }
  return best;
}

}  // namespace bifurcate::kernel
