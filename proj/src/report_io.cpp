#include "bifurcate/report_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bifurcate/fp_format.hpp"

namespace bifurcate::io {

namespace {

std::string jnum(double v) { return std::isfinite(v) ? fmt17(v) : "null"; }

std::string jstr(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

// Minimal ordered JSON builder; keys appear in insertion order.
class Obj {
 public:
  Obj& num(const char* k, double v) { return raw(k, jnum(v)); }
  Obj& integer(const char* k, std::int64_t v) { return raw(k, std::to_string(v)); }
  Obj& uinteger(const char* k, std::uint64_t v) { return raw(k, std::to_string(v)); }
  Obj& str(const char* k, const std::string& v) { return raw(k, jstr(v)); }
  Obj& boolean(const char* k, bool v) { return raw(k, v ? "true" : "false"); }
  Obj& raw(const char* k, const std::string& v) {
    if (!first_) body_ += ',';
    first_ = false;
    body_ += jstr(k);
    body_ += ':';
    body_ += v;
    return *this;
  }
  std::string done() const { return "{" + body_ + "}"; }

 private:
  std::string body_;
  bool first_ = true;
};

template <class T, class Fn>
std::string jarray(const std::vector<T>& items, Fn&& fn) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fn(items[i]);
  }
  out += ']';
  return out;
}

double num_or_nan(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::nan("") : v.get<double>();
}

harness::Verdict verdict_from(const std::string& s) {
  if (s == "dominated") return harness::Verdict::Dominated;
  if (s == "violated") return harness::Verdict::Violated;
  if (s == "inconclusive") return harness::Verdict::Inconclusive;
  throw std::invalid_argument("unknown verdict: " + s);
}

}  // namespace

std::string to_json(const bounds::BoundSet& set, const BoundSetInputs& inputs) {
  Obj in;
  in.num("C", inputs.C)
      .num("p", inputs.p)
      .num("q", inputs.q)
      .num("r0", inputs.r0)
      .num("r1", inputs.r1)
      .integer("n", inputs.n)
      .num("lip_node", inputs.lip_node)
      .num("lip_triple", inputs.lip_triple);
  Obj cn;
  cn.num("value", set.c_N.value)
      .num("log_value", set.c_N.log_value)
      .str("regime", set.c_N.regime)
      .boolean("interpreted", set.c_N.interpreted);
  Obj out;
  out.raw("inputs", in.done())
      .uinteger("N", set.N)
      .raw("c_N", cn.done())
      .num("gamma_n", set.gamma_n)
      .raw("gamma_prime_n", set.gamma_prime_n > 0 ? jnum(set.gamma_prime_n) : "null")
      .num("tau_n", set.tau_n)
      .raw("tau_prime_n", set.tau_prime_n > 0 ? jnum(set.tau_prime_n) : "null")
      .boolean("limits_applicable", set.limits_applicable)
      .raw("c_infinity", set.limits_applicable ? jnum(set.c_infinity) : "null")
      .raw("c_prime_infinity", set.limits_applicable ? jnum(set.c_prime_infinity) : "null")
      .str("regime_r", set.regime_r)
      .str("warning", set.warning);
  return out.done() + "\n";
}

std::string to_table(const bounds::BoundSet& set, const BoundSetInputs& inputs) {
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::string& value, const std::string& note) {
    os << name;
    for (std::size_t i = name.size(); i < 18; ++i) os << ' ';
    os << value;
    if (!note.empty()) {
      for (std::size_t i = value.size(); i < 26; ++i) os << ' ';
      os << note;
    }
    os << '\n';
  };
  row("quantity", "value", "note");
  row("N", std::to_string(set.N), "");
  row("c_N", jnum(set.c_N.value),
      set.c_N.regime + (set.c_N.interpreted ? " (interpreted)" : ""));
  row("log_c_N", jnum(set.c_N.log_value), "");
  row("gamma_n", jnum(set.gamma_n), "lip=" + fmt17(inputs.lip_node));
  row("gamma_prime_n", set.gamma_prime_n > 0 ? jnum(set.gamma_prime_n) : "n/a",
      "lip=" + fmt17(inputs.lip_triple));
  row("tau_n", jnum(set.tau_n), "");
  row("tau_prime_n", set.tau_prime_n > 0 ? jnum(set.tau_prime_n) : "n/a", "");
  row("c_infinity", set.limits_applicable ? jnum(set.c_infinity) : "n/a",
      set.limits_applicable ? "" : "needs max(r0,r1) < 1");
  row("c_prime_infinity", set.limits_applicable ? jnum(set.c_prime_infinity) : "n/a", "");
  row("regime_r", set.regime_r, set.warning);
  return os.str();
}

std::string to_json(const harness::ConcentrationReport& report) {
  Obj out;
  out.str("check", report.check)
      .str("centering", report.centering)
      .num("kappa", report.kappa)
      .str("kappa_source", report.kappa_source)
      .num("center", report.center)
      .num("sigma_hat", report.sigma_hat)
      .integer("replicates", report.replicates)
      .uinteger("master_seed", report.master_seed)
      .str("index_set", report.index_set)
      .str("functional", report.functional)
      .str("overall", harness::to_string(report.overall()));
  out.raw("tail", jarray(report.tail, [](const harness::TailEntry& e) {
            Obj o;
            o.num("t", e.t)
                .num("p_hat", e.p_hat)
                .num("ci_lo", e.ci_lo)
                .num("ci_hi", e.ci_hi)
                .num("bound", e.bound)
                .str("verdict", harness::to_string(e.verdict));
            return o.done();
          }));
  out.raw("laplace", jarray(report.laplace, [](const harness::LaplaceHarnessEntry& e) {
            Obj o;
            o.num("t", e.t)
                .num("mgf_hat", e.mgf_hat)
                .num("bound", e.bound)
                .num("slack", e.slack)
                .boolean("evaluable", e.evaluable)
                .str("verdict", harness::to_string(e.verdict));
            return o.done();
          }));
  return out.done() + "\n";
}

harness::ConcentrationReport parse_concentration_report(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  harness::ConcentrationReport rep;
  rep.check = j.at("check").get<std::string>();
  rep.centering = j.at("centering").get<std::string>();
  rep.kappa = j.at("kappa").get<double>();
  rep.kappa_source = j.at("kappa_source").get<std::string>();
  rep.center = j.at("center").get<double>();
  rep.sigma_hat = j.at("sigma_hat").get<double>();
  rep.replicates = j.at("replicates").get<int>();
  rep.master_seed = j.at("master_seed").get<std::uint64_t>();
  rep.index_set = j.at("index_set").get<std::string>();
  rep.functional = j.at("functional").get<std::string>();
  for (const auto& e : j.at("tail")) {
    harness::TailEntry t;
    t.t = e.at("t").get<double>();
    t.p_hat = e.at("p_hat").get<double>();
    t.ci_lo = e.at("ci_lo").get<double>();
    t.ci_hi = e.at("ci_hi").get<double>();
    t.bound = e.at("bound").get<double>();
    t.verdict = verdict_from(e.at("verdict").get<std::string>());
    rep.tail.push_back(t);
  }
  for (const auto& e : j.at("laplace")) {
    harness::LaplaceHarnessEntry l;
    l.t = e.at("t").get<double>();
    l.mgf_hat = num_or_nan(e, "mgf_hat");
    l.bound = e.at("bound").is_null() ? std::numeric_limits<double>::infinity()
                                      : e.at("bound").get<double>();
    l.slack = e.at("slack").get<double>();
    l.evaluable = e.at("evaluable").get<bool>();
    l.verdict = verdict_from(e.at("verdict").get<std::string>());
    rep.laplace.push_back(l);
  }
  return rep;
}

std::string to_csv(const harness::ConcentrationReport& report) {
  std::string out;
  if (report.check == "tail") {
    out = "t,p_hat,ci_lo,ci_hi,bound,verdict\n";
    for (const auto& e : report.tail)
      out += fmt17(e.t) + "," + fmt17(e.p_hat) + "," + fmt17(e.ci_lo) + "," + fmt17(e.ci_hi) +
             "," + fmt17(e.bound) + "," + harness::to_string(e.verdict) + "\n";
  } else {
    out = "t,mgf_hat,bound,slack,verdict\n";
    for (const auto& e : report.laplace)
      out += fmt17(e.t) + "," + (e.evaluable ? fmt17(e.mgf_hat) : "unevaluable") + "," +
             (std::isfinite(e.bound) ? fmt17(e.bound) : "inf") + "," + fmt17(e.slack) + "," +
             (e.evaluable ? harness::to_string(e.verdict) : "unevaluable") + "\n";
  }
  return out;
}

std::string to_json(const harness::BiasReport& report) {
  Obj out;
  out.integer("depth", report.depth)
      .integer("replicates", report.replicates)
      .num("replicate_mean", report.replicate_mean)
      .num("replicate_se", report.replicate_se)
      .num("pi_estimate", report.pi_estimate)
      .num("pi_se", report.pi_se)
      .num("w1_initial_to_pi", report.w1_initial_to_pi)
      .num("bias_bound", report.bias_bound)
      .num("measured_bias", report.measured_bias)
      .num("allowance", report.allowance)
      .boolean("within", report.within);
  return out.done() + "\n";
}

harness::BiasReport parse_bias_report(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  harness::BiasReport rep;
  rep.depth = j.at("depth").get<int>();
  rep.replicates = j.at("replicates").get<int>();
  rep.replicate_mean = j.at("replicate_mean").get<double>();
  rep.replicate_se = j.at("replicate_se").get<double>();
  rep.pi_estimate = j.at("pi_estimate").get<double>();
  rep.pi_se = j.at("pi_se").get<double>();
  rep.w1_initial_to_pi = j.at("w1_initial_to_pi").get<double>();
  rep.bias_bound = j.at("bias_bound").get<double>();
  rep.measured_bias = j.at("measured_bias").get<double>();
  rep.allowance = j.at("allowance").get<double>();
  rep.within = j.at("within").get<bool>();
  return rep;
}

std::string to_json(const harness::ContractionReport& report) {
  Obj out;
  out.num("x", report.x)
      .num("x_twin", report.x_twin)
      .integer("steps", report.steps)
      .integer("draws", report.draws)
      .num("w1_hat", report.w1_hat)
      .num("ratio", report.ratio)
      .num("coupled_ratio", report.coupled_ratio)
      .num("theory_ratio", report.theory_ratio)
      .num("mc_halfwidth", report.mc_halfwidth)
      .boolean("within", report.within);
  return out.done() + "\n";
}

harness::ContractionReport parse_contraction_report(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  harness::ContractionReport rep;
  rep.x = j.at("x").get<double>();
  rep.x_twin = j.at("x_twin").get<double>();
  rep.steps = j.at("steps").get<int>();
  rep.draws = j.at("draws").get<int>();
  rep.w1_hat = j.at("w1_hat").get<double>();
  rep.ratio = j.at("ratio").get<double>();
  rep.coupled_ratio = j.at("coupled_ratio").get<double>();
  rep.theory_ratio = j.at("theory_ratio").get<double>();
  rep.mc_halfwidth = j.at("mc_halfwidth").get<double>();
  rep.within = j.at("within").get<bool>();
  return rep;
}

std::string to_json(const metrics::LaplaceCheckReport& report) {
  Obj out;
  out.str("function", report.function_name)
      .num("C", report.C)
      .num("lip", report.lip)
      .boolean("all_pass", report.all_pass());
  out.raw("entries", jarray(report.entries, [](const metrics::LaplaceEntry& e) {
            Obj o;
            o.num("t", e.t)
                .num("lhs", e.lhs)
                .num("rhs", e.rhs)
                .num("slack", e.slack)
                .boolean("evaluable", e.evaluable)
                .boolean("pass", e.pass);
            return o.done();
          }));
  return out.done() + "\n";
}

std::string to_json(const NWSidecar& sidecar) {
  Obj out;
  out.str("target", sidecar.target)
      .num("alpha", sidecar.alpha)
      .num("bandwidth", sidecar.bandwidth)
      .integer("depth", sidecar.depth)
      .uinteger("effective_count", sidecar.effective_count)
      .str("kernel", sidecar.kernel)
      .uinteger("seed", sidecar.seed);
  return out.done() + "\n";
}

std::string to_csv(const estimate::NWFit& fit0, const estimate::NWFit& fit1) {
  if (fit0.points.size() != fit1.points.size())
    throw std::invalid_argument("branch fits evaluated on different grids");
  std::string out = "x,f0hat,f1hat,Dtilde,defined\n";
  for (std::size_t i = 0; i < fit0.points.size(); ++i) {
    const auto& a = fit0.points[i];
    const auto& b = fit1.points[i];
    out += fmt17(a.x) + "," + (a.defined ? fmt17(a.estimate) : "undefined") + "," +
           (b.defined ? fmt17(b.estimate) : "undefined") + "," + fmt17(a.weight_mass) + "," +
           (a.defined ? "1" : "0") + "\n";
  }
  return out;
}

std::string to_csv(const estimate::TransitionDensityFit& fit) {
  std::string out = "x,y,z,joint_display,joint_cubed,transition_display,transition_cubed,defined\n";
  for (const auto& pt : fit.points) {
    out += fmt17(pt.at[0]) + "," + fmt17(pt.at[1]) + "," + fmt17(pt.at[2]) + "," +
           fmt17(pt.joint_display) + "," + fmt17(pt.joint_cubed) + "," +
           (pt.defined ? fmt17(pt.transition_display) : "undefined") + "," +
           (pt.defined ? fmt17(pt.transition_cubed) : "undefined") + "," +
           (pt.defined ? "1" : "0") + "\n";
  }
  return out;
}

std::string to_json(const estimate::KernelDeviationBound& bound) {
  Obj out;
  out.num("deviation", bound.deviation)
      .num("threshold", bound.threshold)
      .num("margin", bound.margin)
      .raw("noise_rate", std::isfinite(bound.noise_rate) ? jnum(bound.noise_rate) : jstr("inf"))
      .num("main_rate", bound.main_rate)
      .num("quadratic_scale", bound.quadratic_scale)
      .num("drift_lipschitz", bound.drift_lipschitz)
      .num("subtree_gc_unit", bound.subtree_gc_unit)
      .num("bandwidth", bound.bandwidth)
      .uinteger("tree_size", bound.tree_size)
      .num("noise_term", bound.noise_term)
      .num("main_term", bound.main_term)
      .num("bound", bound.bound)
      .str("note", bound.note);
  return out.done() + "\n";
}

std::string to_json(const estimate::MomentEstimate& est, double x) {
  Obj out;
  out.num("x", x)
      .num("weight_mass_mean", est.weight_mass_mean)
      .num("weight_mass_half99", est.weight_mass_half99)
      .num("drift_mean", est.drift_mean)
      .num("drift_half99", est.drift_half99)
      .integer("replicates", est.replicates);
  return out.done() + "\n";
}

}  // namespace bifurcate::io
