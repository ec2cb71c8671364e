#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Distances and transportation-inequality diagnostics between empirical
// measures on the real line with the absolute-value metric.

namespace bifurcate::metrics {

// Equal-weight sample measure; points kept sorted ascending.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double min() const { return points_.front(); }
  double max() const { return points_.back(); }
  double mean() const;
  double stddev() const;  // sample std, ddof = 1 (0 for a single point)

 private:
  std::vector<double> points_;
};

// Exact L^p optimal transport cost for the 1-D absolute-difference metric,
// p in [1,2]. Equal sizes reduce to the sorted pairing; unequal sizes use the
// quantile-function integral over merged breakpoints (exact rational weights).
double wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p);

// Relative entropy H(a||b) of the two samples binned on a shared uniform grid
// spanning the union of supports. Returns +infinity when a puts mass on a bin
// where b has none.
double relative_entropy(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int bins = 64);

struct LipschitzFunction {
  std::string name;
  std::function<double(double)> fn;
  double lip = 1.0;
};

struct LaplaceEntry {
  double t = 0;
  double lhs = 0;     // empirical mean of exp(t (F - mean F))
  double rhs = 0;     // exp(C t^2 lip^2 / 2)
  double slack = 0;   // relative slack applied to rhs
  bool evaluable = true;
  bool pass = false;  // lhs <= rhs * (1 + slack)
};

struct LaplaceCheckReport {
  std::string function_name;
  double C = 0;
  double lip = 0;
  std::vector<LaplaceEntry> entries;
  bool all_pass() const;
};

// Default grid: `points` values uniform on [-3/(lip*sigma), +3/(lip*sigma)]
// where sigma is the sample std; empirical Laplace transforms are unreliable
// farther out.
std::vector<double> default_t_grid(const EmpiricalMeasure& samples, double lip,
                                   int points = 21);

// Empirical check of the Laplace-transform characterization of T_1(C): for
// each t, compares mean exp(t(F - <F>)) against exp(C t^2 lip^2 / 2). A
// negative slack_override requests the default slack of 3 bootstrap standard
// errors of the left-hand side (relative to rhs). Entries whose exponent
// would overflow are flagged unevaluable rather than failed.
LaplaceCheckReport t1_laplace_check(const EmpiricalMeasure& samples, double C,
                                    const LipschitzFunction& test,
                                    const std::vector<double>& t_grid,
                                    double slack_override = -1.0,
                                    std::uint64_t bootstrap_seed = 0,
                                    int bootstrap_rounds = 100);

std::vector<LaplaceCheckReport> t1_laplace_check(
    const EmpiricalMeasure& samples, double C,
    const std::vector<LipschitzFunction>& tests, const std::vector<double>& t_grid,
    double slack_override = -1.0, std::uint64_t bootstrap_seed = 0,
    int bootstrap_rounds = 100);

struct GaussianMomentResult {
  double value = 0;  // empirical mean of exp(delta (x - x0)^2)
  bool overflow = false;
};

// Empirical Gaussian-integrability moment from the integrability
// characterization of T_1.
GaussianMomentResult gaussian_moment(const EmpiricalMeasure& samples, double delta,
                                     double x0);

}  // namespace bifurcate::metrics
