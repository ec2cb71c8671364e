// bifurcate: simulation and verification toolkit for bifurcating Markov
// chains on regular binary trees.
//
// Exit codes: 0 success, 2 validation error, 3 a concentration check
// reported a violated bound (so pipelines can gate on it).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bifurcate/config.hpp"
#include "bifurcate/fp_format.hpp"
#include "bifurcate/parallel.hpp"
#include "bifurcate/report_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitViolated = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", [&opts](const CLI::results_t& res) {
    try {
      opts.seed = std::stoull(res[0]);
      return true;
    } catch (...) {
      return false;
    }
  }, "master seed override");
  cmd->add_option("--threads", [&opts](const CLI::results_t& res) {
    try {
      opts.threads = std::stoi(res[0]);
      return true;
    } catch (...) {
      return false;
    }
  }, "worker threads (affects speed only, never results)");
  cmd->add_option("--out", [&opts](const CLI::results_t& res) {
    opts.out_dir = res[0];
    return true;
  }, "output directory");
  cmd->add_option("--format", [&opts](const CLI::results_t& res) {
    opts.format = res[0];
    return true;
  }, "csv or json");
}

bifurcate::config::Config load(const CommonOptions& opts) {
  auto cfg = bifurcate::config::parse_file(opts.config_path);
  if (opts.seed) cfg.experiment.seed = *opts.seed;
  if (opts.threads) cfg.experiment.threads = *opts.threads;
  if (opts.out_dir) cfg.output.dir = *opts.out_dir;
  if (opts.format) {
    if (*opts.format != "csv" && *opts.format != "json")
      throw std::invalid_argument("--format must be csv or json");
    cfg.output.format = *opts.format;
  }
  return cfg;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  std::cout << path.string() << "\n";
}

int cmd_simulate(const CommonOptions& opts, bool dump) {
  const auto cfg = load(opts);
  const auto kern = bifurcate::kernel::nbar_kernel(cfg.model);
  const auto seed =
      bifurcate::rng::derive_seed(cfg.experiment.seed, bifurcate::rng::kPurposeTree);
  const int threads = bifurcate::resolve_threads(cfg.experiment.threads);
  const auto replicates = static_cast<std::uint64_t>(cfg.experiment.replicates);

  std::vector<double> means(replicates);
  std::vector<std::string> chunks(dump ? replicates : 0);
  bifurcate::parallel_for(replicates, threads, [&](std::uint64_t rep) {
    const bifurcate::rng::Source src(seed, rep);
    const auto sample =
        bifurcate::simulate::simulate_tree(*kern, cfg.experiment.depth, src);
    means[rep] = bifurcate::simulate::empirical_mean(
        sample, bifurcate::tree::IndexSet::subtree(cfg.experiment.depth),
        bifurcate::simulate::Functional::identity());
    if (dump) bifurcate::simulate::dump_csv(sample, rep, chunks[rep]);
  });

  if (dump) {
    std::string csv = "replicate,node,generation,value\n";
    for (const auto& chunk : chunks) csv += chunk;
    write_file(cfg.output.dir, "simulate_dump.csv", csv);
  }
  double grand = 0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(replicates);
  std::cout << "replicates=" << replicates << " depth=" << cfg.experiment.depth
            << " subtree_mean=" << bifurcate::fmt17(grand) << "\n";
  return kExitOk;
}

int cmd_bounds(const CommonOptions& opts) {
  const auto cfg = load(opts);
  const auto meta = cfg.model.meta();
  bifurcate::io::BoundSetInputs in;
  in.C = cfg.bounds.C.value_or(meta.C);
  in.p = cfg.bounds.p.value_or(1.0);
  in.q = cfg.bounds.q.value_or(meta.q);
  in.r0 = cfg.bounds.r0.value_or(meta.r0);
  in.r1 = cfg.bounds.r1.value_or(meta.r1);
  in.n = cfg.bounds.n.value_or(cfg.experiment.depth);
  in.lip_node = cfg.bounds.lip_node;
  in.lip_triple = cfg.bounds.lip_triple;

  bifurcate::bounds::BoundInputs bi;
  bi.C = in.C;
  bi.p = in.p;
  bi.q = in.q;
  bi.r0 = in.r0;
  bi.r1 = in.r1;
  bi.n = in.n;
  bi.lip = in.lip_node;
  auto set = bifurcate::bounds::evaluate_bound_set(bi, in.lip_triple);
  if (cfg.bounds.N) {
    set.N = *cfg.bounds.N;
    set.c_N = bifurcate::bounds::whole_tree_transport_constant(in.C, in.p, in.q, set.N);
  }
  if (cfg.output.format == "json")
    std::cout << bifurcate::io::to_json(set, in);
  else
    std::cout << bifurcate::io::to_table(set, in);
  return kExitOk;
}

int cmd_concentration(const CommonOptions& opts, const std::string& check) {
  const auto cfg = load(opts);
  const auto checks =
      check.empty() ? cfg.experiment.checks : std::vector<std::string>{check};
  bool violated = false;

  for (const auto& c : checks) {
    if (c == "tail" || c == "laplace") {
      const auto spec = cfg.experiment_spec();
      const auto result = c == "tail" ? bifurcate::harness::run_tail_check(spec)
                                      : bifurcate::harness::run_laplace_check(spec);
      write_file(cfg.output.dir, c + "_report.json",
                 bifurcate::io::to_json(result.replicate_centered));
      write_file(cfg.output.dir, c + "_summary.csv",
                 bifurcate::io::to_csv(result.replicate_centered));
      if (result.exact_centered) {
        write_file(cfg.output.dir, c + "_report_exact.json",
                   bifurcate::io::to_json(*result.exact_centered));
        write_file(cfg.output.dir, c + "_summary_exact.csv",
                   bifurcate::io::to_csv(*result.exact_centered));
      }
      const auto verdict = result.replicate_centered.overall();
      std::cout << c << ": " << bifurcate::harness::to_string(verdict) << "\n";
      violated |= verdict == bifurcate::harness::Verdict::Violated;
    } else if (c == "bias") {
      const auto report = bifurcate::harness::run_bias_check(
          cfg.model, cfg.experiment.depth, cfg.experiment.replicates, cfg.experiment.bias,
          cfg.experiment.seed, bifurcate::resolve_threads(cfg.experiment.threads));
      write_file(cfg.output.dir, "bias_report.json", bifurcate::io::to_json(report));
      std::cout << "bias: " << (report.within ? "within bound" : "exceeds bound") << "\n";
      violated |= !report.within;
    } else if (c == "contraction") {
      const auto report = bifurcate::harness::run_contraction_check(
          cfg.model, cfg.experiment.contraction_steps, cfg.experiment.contraction_x,
          cfg.experiment.contraction_x_twin, cfg.experiment.contraction_draws,
          cfg.experiment.seed);
      write_file(cfg.output.dir, "contraction_report.json", bifurcate::io::to_json(report));
      std::cout << "contraction: " << (report.within ? "within bound" : "exceeds bound")
                << "\n";
      violated |= !report.within;
    } else {
      throw std::invalid_argument("unknown check: " + c);
    }
  }
  return violated ? kExitViolated : kExitOk;
}

int cmd_estimate(const CommonOptions& opts, const std::string& target_flag) {
  auto cfg = load(opts);
  const std::string target = target_flag.empty() ? cfg.experiment.target : target_flag;
  const auto kern = bifurcate::kernel::nbar_kernel(cfg.model);
  const auto seed =
      bifurcate::rng::derive_seed(cfg.experiment.seed, bifurcate::rng::kPurposeTree);
  const bifurcate::rng::Source src(seed, 0);
  const auto sample = bifurcate::simulate::simulate_tree(*kern, cfg.experiment.depth, src);
  const auto smoothing = cfg.smoothing_kernel();

  if (target == "transition") {
    const auto axis = cfg.experiment.grid.values();
    std::vector<std::array<double, 3>> grid;
    grid.reserve(axis.size());
    for (double x : axis) grid.push_back({x, cfg.model.f0(x), cfg.model.f1(x)});
    const auto fit = bifurcate::estimate::transition_density_fit(
        sample, smoothing, cfg.experiment.alpha, grid);
    write_file(cfg.output.dir, "transition_density.csv", bifurcate::io::to_csv(fit));
    bifurcate::io::NWSidecar side{target, fit.alpha, fit.bandwidth, fit.depth,
                                  fit.effective_count, fit.kernel_name, cfg.experiment.seed};
    write_file(cfg.output.dir, "transition_density.json", bifurcate::io::to_json(side));
    return kExitOk;
  }

  if (target != "f0" && target != "f1")
    throw std::invalid_argument("--target must be f0, f1 or transition");
  const auto grid = cfg.experiment.grid.values();
  const auto fit0 = bifurcate::estimate::nw_fit(sample, smoothing, cfg.experiment.alpha,
                                                grid, 0, &cfg.model.f0);
  const auto fit1 = bifurcate::estimate::nw_fit(sample, smoothing, cfg.experiment.alpha,
                                                grid, 1, &cfg.model.f1);
  write_file(cfg.output.dir, "nw_" + target + ".csv", bifurcate::io::to_csv(fit0, fit1));
  const auto& fit = target == "f0" ? fit0 : fit1;
  bifurcate::io::NWSidecar side{target, fit.alpha, fit.bandwidth, fit.depth,
                                fit.effective_count, fit.kernel_name, cfg.experiment.seed};
  write_file(cfg.output.dir, "nw_" + target + ".json", bifurcate::io::to_json(side));
  return kExitOk;
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<double> values;
  double v = 0;
  while (in >> v) values.push_back(v);
  if (values.empty()) throw std::invalid_argument("no numbers in " + path);
  return values;
}

int cmd_wasserstein(const std::string& file_a, const std::string& file_b, double p) {
  const bifurcate::metrics::EmpiricalMeasure a(read_numbers(file_a));
  const bifurcate::metrics::EmpiricalMeasure b(read_numbers(file_b));
  std::cout << bifurcate::fmt17(bifurcate::metrics::wasserstein(a, b, p)) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation and verification toolkit for bifurcating Markov chains"};
  app.require_subcommand(1);

  CommonOptions sim_opts, bounds_opts, conc_opts, est_opts;
  bool dump = false;
  std::string check, target;
  std::string file_a, file_b;
  double p = 1.0;

  auto* sim = app.add_subcommand("simulate", "generate tree trajectories");
  add_common(sim, sim_opts);
  sim->add_flag("--dump", dump, "write the raw sample CSV");

  auto* bnd = app.add_subcommand("bounds", "print the theoretical constants");
  add_common(bnd, bounds_opts);

  auto* conc = app.add_subcommand("concentration", "run Monte-Carlo bound checks");
  add_common(conc, conc_opts);
  conc->add_option("--check", check, "tail|laplace|bias|contraction (default: config)");

  auto* est = app.add_subcommand("estimate", "Nadaraya-Watson estimation");
  add_common(est, est_opts);
  est->add_option("--target", target, "f0|f1|transition");

  auto* was = app.add_subcommand("wasserstein", "exact 1-D W_p between two sample files");
  was->add_option("fileA", file_a)->required();
  was->add_option("fileB", file_b)->required();
  was->add_option("--p", p, "order in [1,2]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts, dump);
    if (bnd->parsed()) return cmd_bounds(bounds_opts);
    if (conc->parsed()) return cmd_concentration(conc_opts, check);
    if (est->parsed()) return cmd_estimate(est_opts, target);
    if (was->parsed()) return cmd_wasserstein(file_a, file_b, p);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
