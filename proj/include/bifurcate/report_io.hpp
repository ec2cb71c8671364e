#pragma once

#include <string>

#include "bifurcate/bounds.hpp"
#include "bifurcate/estimate.hpp"
#include "bifurcate/harness.hpp"
#include "bifurcate/metrics.hpp"

// Report serialization. JSON is emitted by a deterministic writer (fixed key
// order, every double printed with 17 significant digits so values round-trip
// losslessly); non-finite values become null next to their defined/applicable
// flags. Parsers reconstruct the report structs from the emitted text, so
// every report re-parses under the project's own schema.

namespace bifurcate::io {

struct BoundSetInputs {
  double C = 1, p = 1, q = 0, r0 = 0, r1 = 0;
  int n = 0;
  double lip_node = 1, lip_triple = 1;
};

std::string to_json(const bounds::BoundSet& set, const BoundSetInputs& inputs);
std::string to_table(const bounds::BoundSet& set, const BoundSetInputs& inputs);

std::string to_json(const harness::ConcentrationReport& report);
harness::ConcentrationReport parse_concentration_report(const std::string& text);
std::string to_csv(const harness::ConcentrationReport& report);

std::string to_json(const harness::BiasReport& report);
harness::BiasReport parse_bias_report(const std::string& text);

std::string to_json(const harness::ContractionReport& report);
harness::ContractionReport parse_contraction_report(const std::string& text);

std::string to_json(const metrics::LaplaceCheckReport& report);

struct NWSidecar {
  std::string target;
  double alpha = 0;
  double bandwidth = 0;
  int depth = 0;
  std::uint64_t effective_count = 0;
  std::string kernel;
  std::uint64_t seed = 0;
};

std::string to_json(const NWSidecar& sidecar);
// Columns: x, f0hat, f1hat, Dtilde, defined. The weight mass is common to
// both branches (it only involves parent values).
std::string to_csv(const estimate::NWFit& fit0, const estimate::NWFit& fit1);
std::string to_csv(const estimate::TransitionDensityFit& fit);
std::string to_json(const estimate::KernelDeviationBound& bound);

std::string to_json(const estimate::MomentEstimate& est, double x);

}  // namespace bifurcate::io
