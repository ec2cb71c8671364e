#include "bifurcate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bifurcate/rng.hpp"

namespace bifurcate::metrics {

namespace {
constexpr double kExpGuard = 700.0;  // exp() overflows just above 709
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("empirical measure needs at least one point");
  for (double v : points_)
    if (!std::isfinite(v)) throw std::invalid_argument("empirical measure points must be finite");
  std::sort(points_.begin(), points_.end());
}

double EmpiricalMeasure::mean() const {
  return std::accumulate(points_.begin(), points_.end(), 0.0) /
         static_cast<double>(points_.size());
}

double EmpiricalMeasure::stddev() const {
  const std::size_t m = points_.size();
  if (m < 2) return 0.0;
  const double mu = mean();
  double ss = 0;
  for (double v : points_) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(m - 1));
}

double wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("order p must lie in [1,2]");
  const auto& x = a.points();
  const auto& y = b.points();
  const std::uint64_t m = x.size(), l = y.size();

  if (m == l) {
    double acc = 0;
    for (std::uint64_t i = 0; i < m; ++i) acc += std::pow(std::abs(x[i] - y[i]), p);
    return std::pow(acc / static_cast<double>(m), 1.0 / p);
  }

  if (m > (std::uint64_t{1} << 31) || l > (std::uint64_t{1} << 31))
    throw std::length_error("sample sizes too large for exact unequal-size transport");

  // Quantile functions are step functions with breakpoints i/m and j/l; walk
  // the merged breakpoints with weights expressed over the common denominator
  // m*l so segment lengths are exact.
  const double denom = static_cast<double>(m) * static_cast<double>(l);
  std::uint64_t i = 0, j = 0, pos = 0;
  double acc = 0;
  while (i < m && j < l) {
    const std::uint64_t cut_i = (i + 1) * l;
    const std::uint64_t cut_j = (j + 1) * m;
    const std::uint64_t cut = std::min(cut_i, cut_j);
    const double weight = static_cast<double>(cut - pos) / denom;
    acc += weight * std::pow(std::abs(x[i] - y[j]), p);
    pos = cut;
    if (cut == cut_i) ++i;
    if (cut == cut_j) ++j;
  }
  return std::pow(acc, 1.0 / p);
}

double relative_entropy(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int bins) {
  if (bins < 2) throw std::invalid_argument("need at least 2 bins");
  const double lo = std::min(a.min(), b.min());
  const double hi = std::max(a.max(), b.max());
  if (lo == hi) return 0.0;  // all mass of both measures in one cell

  const double width = (hi - lo) / bins;
  std::vector<double> pa(bins, 0.0), pb(bins, 0.0);
  auto fill = [&](const EmpiricalMeasure& meas, std::vector<double>& out) {
    const double w = 1.0 / static_cast<double>(meas.size());
    for (double v : meas.points()) {
      auto idx = static_cast<std::int64_t>((v - lo) / width);
      idx = std::clamp<std::int64_t>(idx, 0, bins - 1);
      out[static_cast<std::size_t>(idx)] += w;
    }
  };
  fill(a, pa);
  fill(b, pb);

  double h = 0;
  for (int k = 0; k < bins; ++k) {
    if (pa[k] <= 0) continue;
    if (pb[k] <= 0) return std::numeric_limits<double>::infinity();
    h += pa[k] * std::log(pa[k] / pb[k]);
  }
  return std::max(h, 0.0);
}

bool LaplaceCheckReport::all_pass() const {
  for (const auto& e : entries)
    if (e.evaluable && !e.pass) return false;
  return true;
}

std::vector<double> default_t_grid(const EmpiricalMeasure& samples, double lip, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  double sigma = samples.stddev();
  if (sigma <= 0) sigma = 1.0;
  const double tmax = 3.0 / (lip * sigma);
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = -tmax + 2.0 * tmax * static_cast<double>(i) / (points - 1);
  return grid;
}

namespace {

// Mean of exp(t (F_i - center)); NaN when the exponent would overflow.
double laplace_lhs(const std::vector<double>& fvals, double center, double t) {
  double acc = 0;
  for (double f : fvals) {
    const double arg = t * (f - center);
    if (arg > kExpGuard) return std::numeric_limits<double>::quiet_NaN();
    acc += std::exp(arg);
  }
  return acc / static_cast<double>(fvals.size());
}

}  // namespace

LaplaceCheckReport t1_laplace_check(const EmpiricalMeasure& samples, double C,
                                    const LipschitzFunction& test,
                                    const std::vector<double>& t_grid, double slack_override,
                                    std::uint64_t bootstrap_seed, int bootstrap_rounds) {
  if (C <= 0) throw std::invalid_argument("T_1 constant must be positive");
  if (test.lip <= 0) throw std::invalid_argument("Lipschitz constant must be positive");

  const std::size_t m = samples.size();
  std::vector<double> fvals(m);
  for (std::size_t i = 0; i < m; ++i) fvals[i] = test.fn(samples.points()[i]);
  const double center =
      std::accumulate(fvals.begin(), fvals.end(), 0.0) / static_cast<double>(m);

  // Bootstrap replicates of the lhs, shared across the t grid.
  std::vector<std::vector<double>> boot;
  if (slack_override < 0 && bootstrap_rounds > 0) {
    boot.reserve(static_cast<std::size_t>(bootstrap_rounds));
    const rng::Source src(rng::derive_seed(bootstrap_seed, rng::kPurposeBootstrap), 0);
    std::vector<double> resampled(m);
    for (int b = 0; b < bootstrap_rounds; ++b) {
      double sum = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const double u = src.uniform(static_cast<std::uint64_t>(b), 0,
                                     static_cast<std::uint32_t>(i));
        auto idx = static_cast<std::size_t>(u * static_cast<double>(m));
        if (idx >= m) idx = m - 1;
        resampled[i] = fvals[idx];
        sum += resampled[i];
      }
      const double bcenter = sum / static_cast<double>(m);
      std::vector<double> row(t_grid.size());
      for (std::size_t k = 0; k < t_grid.size(); ++k)
        row[k] = laplace_lhs(resampled, bcenter, t_grid[k]);
      boot.push_back(std::move(row));
    }
  }

  LaplaceCheckReport report;
  report.function_name = test.name;
  report.C = C;
  report.lip = test.lip;
  report.entries.reserve(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    LaplaceEntry e;
    e.t = t;
    e.rhs = std::exp(0.5 * C * t * t * test.lip * test.lip);
    e.lhs = laplace_lhs(fvals, center, t);
    if (std::isnan(e.lhs) || !std::isfinite(e.rhs)) {
      e.evaluable = false;
      report.entries.push_back(e);
      continue;
    }
    if (slack_override >= 0) {
      e.slack = slack_override;
    } else if (!boot.empty()) {
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
      e.slack = 3.0 * bs / e.rhs;
    }
    e.pass = e.lhs <= e.rhs * (1.0 + e.slack);
    report.entries.push_back(e);
  }
  return report;
}

std::vector<LaplaceCheckReport> t1_laplace_check(const EmpiricalMeasure& samples, double C,
                                                 const std::vector<LipschitzFunction>& tests,
                                                 const std::vector<double>& t_grid,
                                                 double slack_override,
                                                 std::uint64_t bootstrap_seed,
                                                 int bootstrap_rounds) {
  std::vector<LaplaceCheckReport> out;
  out.reserve(tests.size());
  for (const auto& test : tests)
    out.push_back(t1_laplace_check(samples, C, test, t_grid, slack_override, bootstrap_seed,
                                   bootstrap_rounds));
  return out;
}

GaussianMomentResult gaussian_moment(const EmpiricalMeasure& samples, double delta, double x0) {
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
  GaussianMomentResult res;
  double acc = 0;
  for (double v : samples.points()) {
    const double arg = delta * (v - x0) * (v - x0);
    if (arg > kExpGuard) {
      res.overflow = true;
      res.value = std::numeric_limits<double>::infinity();
      return res;
    }
    acc += std::exp(arg);
  }
  res.value = acc / static_cast<double>(samples.size());
  return res;
}

}  // namespace bifurcate::metrics
