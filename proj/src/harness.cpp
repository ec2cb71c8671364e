#include "bifurcate/harness.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bifurcate/metrics.hpp"
#include "bifurcate/parallel.hpp"

namespace bifurcate::harness {

namespace {

constexpr double kExpGuard = 700.0;

// Compensated summation so that R identical replicate values yield exactly
// their common value as the mean (and a zero spread).
double mean_of(const std::vector<double>& v) {
  double sum = 0, carry = 0;
  for (double x : v) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Dominated: return "dominated";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "";
}

Interval clopper_pearson(std::uint64_t count, std::uint64_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  if (count > trials) throw std::invalid_argument("count exceeds trials");
  if (!(confidence > 0 && confidence < 1)) throw std::invalid_argument("confidence must lie in (0,1)");
  const double alpha = 1.0 - confidence;
  Interval ci;
  const auto k = static_cast<double>(count);
  const auto n = static_cast<double>(trials);
  if (count > 0)
    ci.lo = boost::math::quantile(boost::math::beta_distribution<double>(k, n - k + 1),
                                  alpha / 2);
  if (count < trials)
    ci.hi = boost::math::quantile(boost::math::beta_distribution<double>(k + 1, n - k),
                                  1 - alpha / 2);
  return ci;
}

void ExperimentSpec::validate() const {
  model.validate();
  tree::check_generation(depth);
  if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");
  if (sigma_multiples.empty()) throw std::invalid_argument("deviation grid must be non-empty");
  for (std::size_t i = 0; i < sigma_multiples.size(); ++i) {
    if (sigma_multiples[i] <= 0) throw std::invalid_argument("deviation grid must be positive");
    if (i > 0 && sigma_multiples[i] <= sigma_multiples[i - 1])
      throw std::invalid_argument("deviation grid must be increasing");
  }
  if (index_set.kind() == tree::IndexSet::Kind::Explicit)
    throw std::invalid_argument("concentration checks need a generation or subtree index set");
  const int needed = functional.arity == simulate::Functional::Arity::Triple
                         ? index_set.level() + 1
                         : index_set.level();
  if (needed > depth)
    throw std::invalid_argument("index set (and children, for triples) must fit inside the sample");
}

std::pair<double, std::string> concentration_constant(const ExperimentSpec& spec) {
  const auto meta = spec.model.meta();
  bounds::BoundInputs in;
  in.C = meta.C;
  in.p = 1.0;
  in.q = meta.q;
  in.r0 = meta.r0;
  in.r1 = meta.r1;
  in.n = spec.index_set.level();
  in.lip = spec.functional.lip;

  const bool generation = spec.index_set.kind() == tree::IndexSet::Kind::Generation;
  if (spec.functional.arity == simulate::Functional::Arity::Node) {
    in.arity = bounds::Arity::Node;
    return generation ? std::pair{bounds::gc_generation_mean(in), std::string("gc_generation")}
                      : std::pair{bounds::gc_subtree_mean(in), std::string("gc_subtree")};
  }
  in.arity = bounds::Arity::Triple;
  return generation
             ? std::pair{bounds::gc_generation_triple_mean(in), std::string("gc_generation_triple")}
             : std::pair{bounds::gc_subtree_triple_mean(in), std::string("gc_subtree_triple")};
}

std::vector<double> replicate_means(const ExperimentSpec& spec) {
  spec.validate();
  const auto kern = kernel::nbar_kernel(spec.model);
  const std::uint64_t seed = rng::derive_seed(spec.master_seed, rng::kPurposeTree);
  std::vector<double> values(static_cast<std::size_t>(spec.replicates));
  parallel_for(static_cast<std::uint64_t>(spec.replicates), resolve_threads(spec.threads),
               [&](std::uint64_t rep) {
                 const rng::Source src(seed, rep);
                 const auto sample = simulate::simulate_tree(*kern, spec.depth, src);
                 values[rep] = simulate::empirical_mean(sample, spec.index_set, spec.functional);
               });
  return values;
}

namespace {

// Exact centering is available when the mean of the functional is known in
// closed form: the identity on an affine model, or the offspring residual
// (whose mean vanishes under any model).
std::optional<double> exact_center(const ExperimentSpec& spec) {
  if (spec.functional.arity == simulate::Functional::Arity::Triple &&
      spec.functional.name == "offspring_residual")
    return 0.0;
  if (spec.functional.arity == simulate::Functional::Arity::Node &&
      spec.functional.name == "identity" && spec.model.affine())
    return simulate::expected_mean_affine(spec.model, spec.index_set);
  return std::nullopt;
}

// The deviation grid is sized by the replicate spread; a degenerate spread
// (zero, or pure floating-point dust around the center) falls back to
// sqrt(kappa), the scale the theory itself provides.
double grid_scale(double sigma_hat, double center, double kappa) {
  const double dust = 1e-12 * (1.0 + std::abs(center));
  return sigma_hat > dust ? sigma_hat : std::sqrt(kappa);
}

}  // namespace

ConcentrationReport build_tail_report(const ExperimentSpec& spec,
                                      const std::vector<double>& values, double kappa,
                                      const std::string& kappa_source,
                                      const std::string& centering, double center) {
  ConcentrationReport rep;
  rep.check = "tail";
  rep.centering = centering;
  rep.kappa = kappa;
  rep.kappa_source = kappa_source;
  rep.center = center;
  rep.sigma_hat = sample_std(values, mean_of(values));
  rep.replicates = spec.replicates;
  rep.master_seed = spec.master_seed;
  rep.index_set = spec.index_set.describe();
  rep.functional = spec.functional.name;

  const double scale = grid_scale(rep.sigma_hat, center, kappa);
  for (double mult : spec.sigma_multiples) {
    TailEntry e;
    e.t = mult * scale;
    std::uint64_t count = 0;
    for (double v : values)
      if (std::abs(v - center) >= e.t) ++count;
    e.p_hat = static_cast<double>(count) / spec.replicates;
    const auto ci = clopper_pearson(count, static_cast<std::uint64_t>(spec.replicates), 0.99);
    e.ci_lo = ci.lo;
    e.ci_hi = ci.hi;
    e.bound = 2.0 * bounds::gaussian_deviation_bound(kappa, 1.0, e.t);
    if (e.ci_hi <= e.bound) e.verdict = Verdict::Dominated;
    else if (e.ci_lo > e.bound) e.verdict = Verdict::Violated;
    else e.verdict = Verdict::Inconclusive;
    rep.tail.push_back(e);
  }
  return rep;
}

ConcentrationReport build_laplace_report(const ExperimentSpec& spec,
                                         const std::vector<double>& values, double kappa,
                                         const std::string& kappa_source,
                                         const std::string& centering, double center,
                                         bool recenter_bootstrap) {
  ConcentrationReport rep;
  rep.check = "laplace";
  rep.centering = centering;
  rep.kappa = kappa;
  rep.kappa_source = kappa_source;
  rep.center = center;
  rep.sigma_hat = sample_std(values, mean_of(values));
  rep.replicates = spec.replicates;
  rep.master_seed = spec.master_seed;
  rep.index_set = spec.index_set.describe();
  rep.functional = spec.functional.name;

  const double scale = grid_scale(rep.sigma_hat, center, kappa);
  std::vector<double> ts;
  for (auto it = spec.sigma_multiples.rbegin(); it != spec.sigma_multiples.rend(); ++it)
    ts.push_back(-*it / scale);
  for (double mult : spec.sigma_multiples) ts.push_back(mult / scale);

  auto mgf = [](const std::vector<double>& v, double c, double t) {
    double acc = 0;
    for (double x : v) {
      const double arg = t * (x - c);
      if (arg > kExpGuard) return std::numeric_limits<double>::quiet_NaN();
      acc += std::exp(arg);
    }
    return acc / static_cast<double>(v.size());
  };

  // Bootstrap standard errors of the empirical MGF, shared index draws.
  const int rounds = 200;
  const std::size_t m = values.size();
  std::vector<std::vector<double>> boot(static_cast<std::size_t>(rounds));
  const rng::Source src(rng::derive_seed(spec.master_seed, rng::kPurposeBootstrap), 1);
  std::vector<double> resampled(m);
  for (int b = 0; b < rounds; ++b) {
    for (std::size_t i = 0; i < m; ++i) {
      const double u = src.uniform(static_cast<std::uint64_t>(b), 0,
                                   static_cast<std::uint32_t>(i));
      auto idx = static_cast<std::size_t>(u * static_cast<double>(m));
      if (idx >= m) idx = m - 1;
      resampled[i] = values[idx];
    }
    const double bc = recenter_bootstrap ? mean_of(resampled) : center;
    auto& row = boot[static_cast<std::size_t>(b)];
    row.resize(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) row[k] = mgf(resampled, bc, ts[k]);
  }

  for (std::size_t k = 0; k < ts.size(); ++k) {
    LaplaceHarnessEntry e;
    e.t = ts[k];
    e.mgf_hat = mgf(values, center, e.t);
    const double arg = 0.5 * kappa * e.t * e.t;
    e.bound = arg > kExpGuard ? std::numeric_limits<double>::infinity() : std::exp(arg);
    if (std::isnan(e.mgf_hat)) {
      e.evaluable = false;
      rep.laplace.push_back(e);
      continue;
    }
    double bm = 0, bs = 0;
    int cnt = 0;
    for (const auto& row : boot)
      if (!std::isnan(row[k])) {
        bm += row[k];
        ++cnt;
      }
    if (cnt > 1) {
      bm /= cnt;
      for (const auto& row : boot)
        if (!std::isnan(row[k])) bs += (row[k] - bm) * (row[k] - bm);
      bs = std::sqrt(bs / (cnt - 1));
    }
    e.slack = 3.0 * bs;
    e.verdict = e.mgf_hat <= e.bound + e.slack ? Verdict::Dominated : Verdict::Violated;
    rep.laplace.push_back(e);
  }
  return rep;
}

Verdict ConcentrationReport::overall() const {
  bool inconclusive = false;
  auto fold = [&](Verdict v) {
    if (v == Verdict::Violated) return true;
    if (v == Verdict::Inconclusive) inconclusive = true;
    return false;
  };
  for (const auto& e : tail)
    if (fold(e.verdict)) return Verdict::Violated;
  for (const auto& e : laplace)
    if (e.evaluable && fold(e.verdict)) return Verdict::Violated;
  return inconclusive ? Verdict::Inconclusive : Verdict::Dominated;
}

TailCheckResult run_tail_check(const ExperimentSpec& spec) {
  const auto values = replicate_means(spec);
  const auto [kappa, source] = concentration_constant(spec);
  TailCheckResult result{
      build_tail_report(spec, values, kappa, source, "replicate_mean", mean_of(values)), {}};
  if (const auto exact = exact_center(spec))
    result.exact_centered = build_tail_report(spec, values, kappa, source, "exact_mean", *exact);
  return result;
}

TailCheckResult run_laplace_check(const ExperimentSpec& spec) {
  const auto values = replicate_means(spec);
  const auto [kappa, source] = concentration_constant(spec);
  TailCheckResult result{
      build_laplace_report(spec, values, kappa, source, "replicate_mean", mean_of(values), true),
      {}};
  if (const auto exact = exact_center(spec))
    result.exact_centered =
        build_laplace_report(spec, values, kappa, source, "exact_mean", *exact, false);
  return result;
}

BiasReport run_bias_check(const kernel::NBARModel& model, int depth, int replicates,
                          const BiasSettings& settings, std::uint64_t master_seed,
                          int threads) {
  model.validate();
  const auto meta = model.meta();
  if (meta.r0 + meta.r1 >= 2.0)
    throw std::invalid_argument("bias check needs r0 + r1 < 2");
  if (settings.chain_steps < 100) throw std::invalid_argument("chain too short");

  ExperimentSpec spec;
  spec.model = model;
  spec.depth = depth;
  spec.replicates = replicates;
  spec.functional = simulate::Functional::identity();
  spec.index_set = tree::IndexSet::subtree(depth);
  spec.master_seed = master_seed;
  spec.threads = threads;
  const auto values = replicate_means(spec);

  BiasReport rep;
  rep.depth = depth;
  rep.replicates = replicates;
  rep.replicate_mean = mean_of(values);
  rep.replicate_se =
      sample_std(values, rep.replicate_mean) / std::sqrt(static_cast<double>(replicates));

  // Long random-lineage chain for the invariant mean.
  const auto kern = kernel::nbar_kernel(model);
  const kernel::LineageKernel lineage(*kern);
  const rng::Source chain_src(rng::derive_seed(master_seed, rng::kPurposeChain), 0);
  double state = settings.chain_start;
  for (std::uint64_t i = 0; i < settings.burn_in; ++i) state = lineage.step(state, chain_src, i);
  std::vector<double> chain(settings.chain_steps);
  for (std::uint64_t i = 0; i < settings.chain_steps; ++i) {
    state = lineage.step(state, chain_src, settings.burn_in + i);
    chain[i] = state;
  }
  rep.pi_estimate = mean_of(chain);
  // batch means over 100 batches
  const std::size_t batches = 100;
  const std::size_t bl = chain.size() / batches;
  std::vector<double> bm(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double acc = 0;
    for (std::size_t i = 0; i < bl; ++i) acc += chain[b * bl + i];
    bm[b] = acc / static_cast<double>(bl);
  }
  rep.pi_se = sample_std(bm, mean_of(bm)) / std::sqrt(static_cast<double>(batches));

  // W_1 between the initial law and the chain's empirical law.
  std::vector<double> initial_sample;
  if (model.initial.family == kernel::InitialSpec::Family::Dirac) {
    initial_sample.push_back(model.initial.x0);
  } else {
    const rng::Source init_src(rng::derive_seed(master_seed, rng::kPurposeChain), 1);
    initial_sample.resize(settings.initial_draws);
    for (std::uint64_t i = 0; i < settings.initial_draws; ++i)
      initial_sample[i] = model.initial.draw(kernel::NodeRandomness(init_src, i));
  }
  rep.w1_initial_to_pi = metrics::wasserstein(metrics::EmpiricalMeasure(initial_sample),
                                              metrics::EmpiricalMeasure(chain), 1.0);

  bounds::BoundInputs in;
  in.C = meta.C;
  in.p = 1.0;
  in.q = meta.q;
  in.r0 = meta.r0;
  in.r1 = meta.r1;
  in.n = depth;
  in.lip = 1.0;
  rep.bias_bound = bounds::bias_to_invariant(in, rep.w1_initial_to_pi);
  rep.measured_bias = std::abs(rep.replicate_mean - rep.pi_estimate);
  rep.allowance =
      3.0 * std::sqrt(rep.replicate_se * rep.replicate_se + rep.pi_se * rep.pi_se);
  rep.within = rep.measured_bias <= rep.bias_bound + rep.allowance;
  return rep;
}

ContractionReport run_contraction_check(const kernel::NBARModel& model, int steps,
                                        double x, double x_twin, int draws,
                                        std::uint64_t master_seed) {
  model.validate();
  if (draws < 1000) throw std::invalid_argument("need at least 1000 draws");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  if (x == x_twin) throw std::invalid_argument("states must differ");

  const auto meta = model.meta();
  const auto kern = kernel::nbar_kernel(model);
  const kernel::LineageKernel lineage(*kern);
  const double gap = std::abs(x - x_twin);
  const std::uint64_t seed = rng::derive_seed(master_seed, rng::kPurposeContraction);

  const auto run_chain = [&](double start, std::uint64_t replicate) {
    const rng::Source src(seed, replicate);
    double state = start;
    for (int s = 0; s < steps; ++s)
      state = lineage.step(state, src, static_cast<std::uint64_t>(s));
    return state;
  };

  std::vector<double> from_x(static_cast<std::size_t>(draws));
  std::vector<double> from_twin(static_cast<std::size_t>(draws));
  double coupled = 0;
  for (int c = 0; c < draws; ++c) {
    const auto rep = static_cast<std::uint64_t>(c);
    from_x[static_cast<std::size_t>(c)] = run_chain(x, rep);
    from_twin[static_cast<std::size_t>(c)] =
        run_chain(x_twin, rep + static_cast<std::uint64_t>(draws));
    // same counters at both starts: the shared-noise coupling
    coupled += std::abs(run_chain(x, rep) - run_chain(x_twin, rep));
  }

  ContractionReport rep;
  rep.x = x;
  rep.x_twin = x_twin;
  rep.steps = steps;
  rep.draws = draws;
  rep.w1_hat = metrics::wasserstein(metrics::EmpiricalMeasure(from_x),
                                    metrics::EmpiricalMeasure(from_twin), 1.0);
  rep.ratio = rep.w1_hat / gap;
  rep.coupled_ratio = coupled / draws / gap;
  rep.theory_ratio = std::pow(0.5 * (meta.r0 + meta.r1), steps);

  // MC allowance: bootstrap spread of the two-sample distance plus the
  // same-law floor (the distance between two halves of one sample), per unit
  // gap.
  const rng::Source boot_src(rng::derive_seed(master_seed, rng::kPurposeBootstrap), 2);
  const int rounds = 100;
  std::vector<double> boot_vals(rounds);
  std::vector<double> rx(from_x.size()), rt(from_twin.size());
  for (int b = 0; b < rounds; ++b) {
    for (std::size_t i = 0; i < from_x.size(); ++i) {
      const auto pick = [&](std::uint32_t stream, const std::vector<double>& v) {
        const double u = boot_src.uniform(static_cast<std::uint64_t>(b), stream,
                                          static_cast<std::uint32_t>(i));
        auto idx = static_cast<std::size_t>(u * static_cast<double>(v.size()));
        return v[idx >= v.size() ? v.size() - 1 : idx];
      };
      rx[i] = pick(0, from_x);
      rt[i] = pick(1, from_twin);
    }
    boot_vals[static_cast<std::size_t>(b)] = metrics::wasserstein(
        metrics::EmpiricalMeasure(rx), metrics::EmpiricalMeasure(rt), 1.0);
  }
  const double boot_se = sample_std(boot_vals, mean_of(boot_vals));

  std::vector<double> half_a, half_b;
  half_a.reserve(from_x.size() / 2 + 1);
  half_b.reserve(from_x.size() / 2 + 1);
  for (std::size_t i = 0; i < from_x.size(); ++i)
    (i % 2 == 0 ? half_a : half_b).push_back(from_x[i]);
  const double floor_w1 = metrics::wasserstein(metrics::EmpiricalMeasure(half_a),
                                               metrics::EmpiricalMeasure(half_b), 1.0);

  rep.mc_halfwidth = (boot_se + floor_w1) / gap;
  // last-bit guard: deterministic chains reproduce the geometric rate exactly
  // up to the difference between pow() and iterated products
  rep.within =
      rep.ratio <= rep.theory_ratio + 3.0 * rep.mc_halfwidth + 1e-12 * (1.0 + rep.theory_ratio);
  return rep;
}

}  // namespace bifurcate::harness
