#include "bifurcate/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bifurcate/bounds.hpp"
#include "bifurcate/parallel.hpp"

namespace bifurcate::estimate {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // 99% two-sided normal quantile

double shape_value(SmoothingKernel::Shape shape, double u) {
  const double a = std::abs(u);
  if (a >= 1.0) return 0.0;
  switch (shape) {
    case SmoothingKernel::Shape::Epanechnikov: return 0.75 * (1.0 - u * u);
    case SmoothingKernel::Shape::Triangular: return 1.0 - a;
    case SmoothingKernel::Shape::Quartic: {
      const double w = 1.0 - u * u;
      return 0.9375 * w * w;
    }
  }
  return 0.0;
}

}  // namespace

SmoothingKernel::SmoothingKernel(Shape shape, double support, double lipschitz, double sup)
    : shape_(shape), support_(support), lipschitz_(lipschitz), sup_(sup) {
  // Simpson check that the kernel integrates to one.
  const int steps = 2000;
  double acc = 0;
  const double hstep = 2.0 * support_ / steps;
  for (int i = 0; i <= steps; ++i) {
    const double u = -support_ + i * hstep;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * shape_value(shape_, u / support_) / support_;
  }
  acc *= hstep / 3.0;
  if (std::abs(acc - 1.0) > 1e-9)
    throw std::logic_error("smoothing kernel does not integrate to 1");
}

SmoothingKernel SmoothingKernel::make(Shape shape) {
  switch (shape) {
    case Shape::Epanechnikov: return SmoothingKernel(shape, 1.0, 1.5, 0.75);
    case Shape::Triangular: return SmoothingKernel(shape, 1.0, 1.0, 1.0);
    case Shape::Quartic:
      // sup |K'| at u = 1/sqrt(3)
      return SmoothingKernel(shape, 1.0, 2.5 / std::sqrt(3.0), 0.9375);
  }
  throw std::invalid_argument("unknown kernel shape");
}

SmoothingKernel SmoothingKernel::parse(const std::string& name) {
  if (name == "epanechnikov") return make(Shape::Epanechnikov);
  if (name == "triangular") return make(Shape::Triangular);
  if (name == "quartic") return make(Shape::Quartic);
  throw std::invalid_argument("unknown smoothing kernel: " + name);
}

double SmoothingKernel::operator()(double u) const {
  return shape_value(shape_, u / support_) / support_;
}

std::string SmoothingKernel::name() const {
  switch (shape_) {
    case Shape::Epanechnikov: return "epanechnikov";
    case Shape::Triangular: return "triangular";
    case Shape::Quartic: return "quartic";
  }
  return "";
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("bandwidth exponent alpha must lie in (0,1)");
}

double bandwidth_for(int depth, double alpha) {
  return std::pow(static_cast<double>(tree::subtree_size(depth)), -alpha);
}

}  // namespace

NWFit nw_fit(const simulate::TreeSample& sample, const SmoothingKernel& kernel,
             double alpha, std::span<const double> grid, int target_branch,
             const kernel::FunctionSpec* truth) {
  check_alpha(alpha);
  if (sample.depth() < 1) throw std::invalid_argument("need a sample of depth >= 1");
  if (target_branch != 0 && target_branch != 1)
    throw std::invalid_argument("target branch must be 0 or 1");

  NWFit fit;
  fit.target_branch = target_branch;
  fit.alpha = alpha;
  fit.depth = sample.depth();
  fit.bandwidth = bandwidth_for(sample.depth(), alpha);
  fit.effective_count = tree::subtree_size(sample.depth() - 1);
  fit.kernel_name = kernel.name();
  fit.points.resize(grid.size());

  const double h = fit.bandwidth;
  const double norm = static_cast<double>(fit.effective_count) * h;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double x = grid[gi];
    double mass = 0, num = 0, drift = 0, noise = 0;
    for (std::uint64_t k = 1; k <= fit.effective_count; ++k) {
      const double w = kernel((sample.value(k) - x) / h);
      if (w == 0.0) continue;
      const double child =
          sample.value(target_branch == 0 ? 2 * k : 2 * k + 1);
      mass += w;
      num += w * child;
      if (truth) {
        drift += w * ((*truth)(sample.value(k)) - (*truth)(x));
        noise += w * (child - (*truth)(sample.value(k)));
      }
    }
    NWPoint& pt = fit.points[gi];
    pt.x = x;
    pt.weight_mass = mass / norm;
    pt.diagnostics = truth != nullptr;
    pt.drift_component = truth ? drift / norm : std::nan("");
    pt.noise_component = truth ? noise / norm : std::nan("");
    if (mass > 0) {
      pt.defined = true;
      pt.estimate = num / mass;
    } else {
      pt.estimate = std::nan("");
    }
  }
  return fit;
}

TransitionDensityFit transition_density_fit(const simulate::TreeSample& sample,
                                            const SmoothingKernel& kernel, double alpha,
                                            std::span<const std::array<double, 3>> grid) {
  check_alpha(alpha);
  if (sample.depth() < 1) throw std::invalid_argument("need a sample of depth >= 1");

  TransitionDensityFit fit;
  fit.alpha = alpha;
  fit.depth = sample.depth();
  fit.bandwidth = bandwidth_for(sample.depth(), alpha);
  fit.effective_count = tree::subtree_size(sample.depth() - 1);
  fit.kernel_name = kernel.name();
  fit.points.resize(grid.size());

  const double h = fit.bandwidth;
  const double count = static_cast<double>(fit.effective_count);
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto& [x, y, z] = grid[gi];
    double triple = 0, mass = 0;
    for (std::uint64_t k = 1; k <= fit.effective_count; ++k) {
      const double wx = kernel((x - sample.value(k)) / h);
      if (wx == 0.0) continue;
      mass += wx;
      const double wy = kernel((y - sample.value(2 * k)) / h);
      if (wy == 0.0) continue;
      const double wz = kernel((z - sample.value(2 * k + 1)) / h);
      triple += wx * wy * wz;
    }
    DensityPoint& pt = fit.points[gi];
    pt.at = grid[gi];
    pt.joint_display = triple / (count * h);
    pt.joint_cubed = triple / (count * h * h * h);
    pt.weight_mass = mass / (count * h);
    pt.defined = mass > 0;
    if (pt.defined) {
      pt.transition_display = pt.joint_display / pt.weight_mass;
      pt.transition_cubed = pt.joint_cubed / pt.weight_mass;
    } else {
      pt.transition_display = std::nan("");
      pt.transition_cubed = std::nan("");
    }
  }
  return fit;
}

KernelDeviationBound dev_ker_bound(const kernel::RegularityMeta& meta, double lip_f0,
                                   const SmoothingKernel& kernel, double alpha, int depth,
                                   double r, double expected_weight_mass,
                                   double expected_drift) {
  const double r_sum = meta.r0 + meta.r1;
  if (!(r_sum < std::sqrt(2.0)))
    throw std::invalid_argument("deviation bound requires r0 + r1 < sqrt(2)");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(alpha < 0.25)) throw std::invalid_argument("deviation bound requires alpha < 1/4");
  if (!(expected_weight_mass > 0))
    throw std::invalid_argument("expected weight mass must be positive");
  if (!(lip_f0 > 0))
    throw std::invalid_argument("autoregression Lipschitz norm must be positive");

  KernelDeviationBound out;
  out.deviation = r;
  out.threshold = expected_drift / expected_weight_mass;
  if (!(r > out.threshold))
    throw std::invalid_argument("deviation level must exceed expected_drift / expected_weight_mass");

  out.bandwidth = bandwidth_for(depth, alpha);
  out.tree_size = tree::subtree_size(depth);
  out.margin = r * expected_weight_mass - expected_drift;

  const double h = out.bandwidth;
  const double tn = static_cast<double>(out.tree_size);
  out.drift_lipschitz =
      kernel.support() * kernel.lipschitz() * lip_f0 + lip_f0 * kernel.sup_norm();

  bounds::BoundInputs unit;
  unit.C = meta.C;
  unit.p = 1.0;
  unit.q = meta.q;
  unit.r0 = meta.r0;
  unit.r1 = meta.r1;
  unit.n = depth;
  unit.lip = 1.0;
  unit.arity = bounds::Arity::Node;
  out.subtree_gc_unit = bounds::gc_subtree_mean(unit);

  const double s2 = out.margin * out.margin;
  if (meta.C_noise > 0) {
    out.noise_rate = kernel.sup_norm() * kernel.sup_norm() / (8.0 * meta.C_noise);
    out.noise_term = 2.0 * std::exp(-out.noise_rate * s2 * tn * h * h);
  } else {
    out.noise_rate = std::numeric_limits<double>::infinity();
    out.noise_term = 0.0;
  }
  const double l0sq = out.drift_lipschitz * out.drift_lipschitz;
  out.main_rate = 1.0 / (16.0 * out.subtree_gc_unit * tn * l0sq);
  out.quadratic_scale = kernel.lipschitz() * kernel.lipschitz() / l0sq;
  out.main_term = 2.0 * std::exp(-out.main_rate * s2 * tn * h * h /
                                 (1.0 + out.quadratic_scale * r * r / (h * h)));
  out.bound = out.noise_term + out.main_term;
  return out;
}

MomentEstimate expected_denominator(const kernel::NBARModel& model,
                                    const SmoothingKernel& kernel, double alpha, int depth,
                                    double x, int replicates, std::uint64_t master_seed,
                                    int threads) {
  check_alpha(alpha);
  if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");
  if (depth < 1) throw std::invalid_argument("need depth >= 1");

  const auto kern = nbar_kernel(model);
  const std::uint64_t seed = rng::derive_seed(master_seed, rng::kPurposeTree);
  const double h = bandwidth_for(depth, alpha);
  const std::uint64_t parents = tree::subtree_size(depth - 1);
  const double norm = static_cast<double>(parents) * h;

  std::vector<double> mass(static_cast<std::size_t>(replicates));
  std::vector<double> drift(static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::uint64_t>(replicates), threads, [&](std::uint64_t rep) {
    const rng::Source src(seed, rep);
    const auto sample = simulate::simulate_tree(*kern, depth, src);
    double m = 0, d = 0;
    for (std::uint64_t k = 1; k <= parents; ++k) {
      const double w = kernel((sample.value(k) - x) / h);
      if (w == 0.0) continue;
      m += w;
      d += w * (model.f0(sample.value(k)) - model.f0(x));
    }
    mass[rep] = m / norm;
    drift[rep] = d / norm;
  });

  auto summarize = [&](const std::vector<double>& v, double& mean, double& half) {
    double acc = 0;
    for (double t : v) acc += t;
    mean = acc / static_cast<double>(v.size());
    double ss = 0;
    for (double t : v) ss += (t - mean) * (t - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    half = kZ99 * sd / std::sqrt(static_cast<double>(v.size()));
  };

  MomentEstimate est;
  est.replicates = replicates;
  summarize(mass, est.weight_mass_mean, est.weight_mass_half99);
  summarize(drift, est.drift_mean, est.drift_half99);
  return est;
}

}  // namespace bifurcate::estimate
