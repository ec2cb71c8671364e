#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/estimate.hpp"
#include "bifurcate/harness.hpp"
#include "bifurcate/kernel.hpp"

// Flat, line-oriented experiment configuration: `[section]` headers and
// `key = value` lines, `#` comments. Every field is validated up front and
// unknown keys are errors.

namespace bifurcate::config {

struct GridSpec {
  double lo = -2.0;
  double hi = 2.0;
  int points = 41;
  std::vector<double> values() const;
};

struct ExperimentConfig {
  int depth = 8;
  int replicates = 200;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: resolve from env / hardware
  std::string functional = "identity";
  std::string index = "";  // "generation:<m>" or "subtree:<m>"; default subtree:depth
  std::vector<double> sigma_multiples = {0.1, 0.25, 0.5, 1.0, 2.0, 3.0};
  double alpha = 0.2;
  std::string target = "f0";
  GridSpec grid;
  std::string kernel = "epanechnikov";
  std::vector<std::string> checks = {"tail", "laplace"};
  // contraction check
  double contraction_x = 0.0;
  double contraction_x_twin = 4.0;
  int contraction_steps = 5;
  int contraction_draws = 100'000;
  // bias check
  harness::BiasSettings bias;
};

struct BoundsOverrides {
  std::optional<double> C, p, q, r0, r1;
  std::optional<int> n;
  std::optional<std::uint64_t> N;
  double lip_node = 1.0;
  double lip_triple = 1.0;
};

struct OutputConfig {
  std::string dir = ".";
  std::string format = "csv";  // csv | json
};

struct Config {
  kernel::NBARModel model;
  ExperimentConfig experiment;
  BoundsOverrides bounds;
  OutputConfig output;

  tree::IndexSet index_set() const;          // resolved index set
  simulate::Functional functional() const;   // resolved functional
  estimate::SmoothingKernel smoothing_kernel() const;
  harness::ExperimentSpec experiment_spec() const;
};

Config parse_string(const std::string& text);
Config parse_file(const std::string& path);

}  // namespace bifurcate::config
