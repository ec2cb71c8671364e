#include "bifurcate/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bifurcate::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct RawConfig {
  std::map<std::string, std::string> entries;  // "section.key" -> value
  mutable std::set<std::string> consumed;

  std::optional<std::string> get(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    consumed.insert(key);
    return it->second;
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : entries)
      if (!consumed.count(key))
        throw std::invalid_argument("unknown configuration key: " + key);
  }
};

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::invalid_argument("line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key or value");
    if (section.empty())
      throw std::invalid_argument("line " + std::to_string(lineno) + ": key outside any [section]");
    const std::string full = section + "." + key;
    if (raw.entries.count(full))
      throw std::invalid_argument("duplicate configuration key: " + full);
    raw.entries[full] = value;
  }
  return raw;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::invalid_argument("key " + key + ": expected a finite number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw std::invalid_argument("key " + key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw std::invalid_argument("key " + key + ": expected a non-negative integer, got '" + v + "'");
  }
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

kernel::FunctionSpec parse_function(const RawConfig& raw, const std::string& prefix) {
  kernel::FunctionSpec f;
  if (const auto fam = raw.get(prefix + ".family")) {
    if (*fam == "linear") f.family = kernel::FunctionSpec::Family::Affine;
    else if (*fam == "tanh") f.family = kernel::FunctionSpec::Family::TanhAffine;
    else throw std::invalid_argument(prefix + ".family must be linear or tanh");
  }
  if (const auto a = raw.get(prefix + ".a")) f.a = to_double(prefix + ".a", *a);
  if (const auto b = raw.get(prefix + ".b")) f.b = to_double(prefix + ".b", *b);
  return f;
}

kernel::NoiseSpec parse_noise(const RawConfig& raw) {
  kernel::NoiseSpec n;
  if (const auto fam = raw.get("model.noise.family")) {
    if (*fam == "gaussian") n.family = kernel::NoiseSpec::Family::Gaussian;
    else if (*fam == "uniform") n.family = kernel::NoiseSpec::Family::UniformCentered;
    else if (*fam == "truncated_gaussian") n.family = kernel::NoiseSpec::Family::TruncatedGaussian;
    else throw std::invalid_argument("model.noise.family must be gaussian, uniform or truncated_gaussian");
  }
  if (const auto s = raw.get("model.noise.sigma")) n.sigma = to_double("model.noise.sigma", *s);
  if (const auto h = raw.get("model.noise.halfwidth")) n.halfwidth = to_double("model.noise.halfwidth", *h);
  n.validate();
  return n;
}

kernel::InitialSpec parse_initial(const RawConfig& raw) {
  kernel::InitialSpec spec;
  if (const auto fam = raw.get("model.initial.family")) {
    if (*fam == "dirac") spec.family = kernel::InitialSpec::Family::Dirac;
    else if (*fam == "gaussian") spec.family = kernel::InitialSpec::Family::Gaussian;
    else if (*fam == "uniform") spec.family = kernel::InitialSpec::Family::UniformCentered;
    else throw std::invalid_argument("model.initial.family must be dirac, gaussian or uniform");
  }
  if (const auto v = raw.get("model.initial.x0")) spec.x0 = to_double("model.initial.x0", *v);
  if (const auto v = raw.get("model.initial.mean")) spec.mean = to_double("model.initial.mean", *v);
  if (const auto v = raw.get("model.initial.sigma")) spec.sigma = to_double("model.initial.sigma", *v);
  if (const auto v = raw.get("model.initial.halfwidth"))
    spec.halfwidth = to_double("model.initial.halfwidth", *v);
  spec.validate();
  return spec;
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (points < 2 || !(lo < hi)) throw std::invalid_argument("grid needs lo < hi and at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return out;
}

Config parse_string(const std::string& text) {
  const RawConfig raw = tokenize(text);
  Config cfg;

  cfg.model.f0 = parse_function(raw, "model.f0");
  cfg.model.f1 = parse_function(raw, "model.f1");
  cfg.model.noise = parse_noise(raw);
  cfg.model.initial = parse_initial(raw);
  cfg.model.validate();

  auto& exp = cfg.experiment;
  if (const auto v = raw.get("experiment.depth")) {
    const auto d = to_int("experiment.depth", *v);
    if (d < 0 || d > tree::kMaxGeneration)
      throw std::invalid_argument("experiment.depth outside [0, 40]");
    exp.depth = static_cast<int>(d);
  }
  if (const auto v = raw.get("experiment.replicates")) {
    const auto r = to_int("experiment.replicates", *v);
    if (r < 2) throw std::invalid_argument("experiment.replicates must be at least 2");
    exp.replicates = static_cast<int>(r);
  }
  if (const auto v = raw.get("experiment.seed")) exp.seed = to_uint("experiment.seed", *v);
  if (const auto v = raw.get("experiment.threads")) {
    const auto t = to_int("experiment.threads", *v);
    if (t < 0) throw std::invalid_argument("experiment.threads must be non-negative");
    exp.threads = static_cast<int>(t);
  }
  if (const auto v = raw.get("experiment.functional")) {
    if (*v != "identity" && *v != "offspring_residual")
      throw std::invalid_argument("experiment.functional must be identity or offspring_residual");
    exp.functional = *v;
  }
  if (const auto v = raw.get("experiment.index")) exp.index = *v;
  if (const auto v = raw.get("experiment.tgrid")) {
    if (*v != "auto") {
      exp.sigma_multiples.clear();
      for (const auto& item : split(*v, ','))
        exp.sigma_multiples.push_back(to_double("experiment.tgrid", item));
      if (exp.sigma_multiples.empty()) throw std::invalid_argument("experiment.tgrid is empty");
    }
  }
  if (const auto v = raw.get("experiment.alpha")) {
    exp.alpha = to_double("experiment.alpha", *v);
    if (!(exp.alpha > 0 && exp.alpha < 1))
      throw std::invalid_argument("experiment.alpha must lie in (0,1)");
  }
  if (const auto v = raw.get("experiment.target")) {
    if (*v != "f0" && *v != "f1" && *v != "transition")
      throw std::invalid_argument("experiment.target must be f0, f1 or transition");
    exp.target = *v;
  }
  if (const auto v = raw.get("experiment.grid")) {
    const auto parts = split(*v, ':');
    if (parts.size() != 3) throw std::invalid_argument("experiment.grid must be lo:hi:points");
    exp.grid.lo = to_double("experiment.grid", parts[0]);
    exp.grid.hi = to_double("experiment.grid", parts[1]);
    exp.grid.points = static_cast<int>(to_int("experiment.grid", parts[2]));
    exp.grid.values();  // validates
  }
  if (const auto v = raw.get("experiment.kernel")) {
    estimate::SmoothingKernel::parse(*v);  // validates
    exp.kernel = *v;
  }
  if (const auto v = raw.get("experiment.checks")) {
    exp.checks = split(*v, ',');
    for (const auto& c : exp.checks)
      if (c != "tail" && c != "laplace" && c != "bias" && c != "contraction")
        throw std::invalid_argument("experiment.checks: unknown check '" + c + "'");
    if (exp.checks.empty()) throw std::invalid_argument("experiment.checks is empty");
  }
  if (const auto v = raw.get("experiment.contraction.x"))
    exp.contraction_x = to_double("experiment.contraction.x", *v);
  if (const auto v = raw.get("experiment.contraction.x_twin"))
    exp.contraction_x_twin = to_double("experiment.contraction.x_twin", *v);
  if (const auto v = raw.get("experiment.contraction.steps")) {
    const auto s = to_int("experiment.contraction.steps", *v);
    if (s < 0) throw std::invalid_argument("experiment.contraction.steps must be non-negative");
    exp.contraction_steps = static_cast<int>(s);
  }
  if (const auto v = raw.get("experiment.contraction.draws")) {
    const auto d = to_int("experiment.contraction.draws", *v);
    if (d < 1000) throw std::invalid_argument("experiment.contraction.draws must be at least 1000");
    exp.contraction_draws = static_cast<int>(d);
  }
  if (const auto v = raw.get("experiment.bias.chain_steps"))
    exp.bias.chain_steps = to_uint("experiment.bias.chain_steps", *v);
  if (const auto v = raw.get("experiment.bias.burn_in"))
    exp.bias.burn_in = to_uint("experiment.bias.burn_in", *v);
  if (const auto v = raw.get("experiment.bias.initial_draws"))
    exp.bias.initial_draws = to_uint("experiment.bias.initial_draws", *v);
  if (const auto v = raw.get("experiment.bias.chain_start"))
    exp.bias.chain_start = to_double("experiment.bias.chain_start", *v);

  auto& b = cfg.bounds;
  if (const auto v = raw.get("bounds.C")) b.C = to_double("bounds.C", *v);
  if (const auto v = raw.get("bounds.p")) b.p = to_double("bounds.p", *v);
  if (const auto v = raw.get("bounds.q")) b.q = to_double("bounds.q", *v);
  if (const auto v = raw.get("bounds.r0")) b.r0 = to_double("bounds.r0", *v);
  if (const auto v = raw.get("bounds.r1")) b.r1 = to_double("bounds.r1", *v);
  if (const auto v = raw.get("bounds.n")) b.n = static_cast<int>(to_int("bounds.n", *v));
  if (const auto v = raw.get("bounds.N")) b.N = to_uint("bounds.N", *v);
  if (const auto v = raw.get("bounds.lip_node")) b.lip_node = to_double("bounds.lip_node", *v);
  if (const auto v = raw.get("bounds.lip_triple")) b.lip_triple = to_double("bounds.lip_triple", *v);

  if (const auto v = raw.get("output.dir")) cfg.output.dir = *v;
  if (const auto v = raw.get("output.format")) {
    if (*v != "csv" && *v != "json") throw std::invalid_argument("output.format must be csv or json");
    cfg.output.format = *v;
  }

  raw.check_all_consumed();

  // Cross-field validation before any simulation starts.
  cfg.index_set();
  cfg.functional();
  return cfg;
}

Config parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

tree::IndexSet Config::index_set() const {
  const auto& idx = experiment.index;
  if (idx.empty()) return tree::IndexSet::subtree(experiment.depth);
  const auto colon = idx.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("experiment.index must be generation:<m> or subtree:<m>");
  const std::string kind = idx.substr(0, colon);
  int m = 0;
  try {
    m = std::stoi(idx.substr(colon + 1));
  } catch (...) {
    throw std::invalid_argument("experiment.index level must be an integer");
  }
  if (kind == "generation") return tree::IndexSet::generation(m);
  if (kind == "subtree") return tree::IndexSet::subtree(m);
  throw std::invalid_argument("experiment.index must be generation:<m> or subtree:<m>");
}

simulate::Functional Config::functional() const {
  if (experiment.functional == "identity") return simulate::Functional::identity();
  return simulate::Functional::offspring_residual(model);
}

estimate::SmoothingKernel Config::smoothing_kernel() const {
  return estimate::SmoothingKernel::parse(experiment.kernel);
}

harness::ExperimentSpec Config::experiment_spec() const {
  harness::ExperimentSpec spec;
  spec.model = model;
  spec.depth = experiment.depth;
  spec.replicates = experiment.replicates;
  spec.functional = functional();
  spec.index_set = index_set();
  spec.sigma_multiples = experiment.sigma_multiples;
  spec.master_seed = experiment.seed;
  spec.threads = experiment.threads;
  spec.validate();
  return spec;
}

}  // namespace bifurcate::config
