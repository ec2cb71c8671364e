#include <doctest.h>

#include <string>

#include <json.hpp>

#include "bifurcate/config.hpp"
#include "bifurcate/report_io.hpp"

using namespace bifurcate;

namespace {

const char* kFullConfig = R"(
# linear bifurcating autoregression
[model]
f0.family = linear
f0.a = 0.4
f0.b = 1.0
f1.family = linear
f1.a = 0.3
f1.b = 0.5
noise.family = gaussian
noise.sigma = 1.0
initial.family = dirac
initial.x0 = 0.0

[experiment]
depth = 10
replicates = 1000
seed = 42
functional = identity
index = subtree:10
tgrid = auto
alpha = 0.2
target = f0
grid = -1:3:41
kernel = epanechnikov
checks = tail,laplace

[bounds]
C = 1
p = 1
q = 0.5
N = 15

[output]
dir = out
format = json
)";

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("full configuration parses with every field validated") {
  const auto cfg = config::parse_string(kFullConfig);
  CHECK(cfg.model.f0.a == doctest::Approx(0.4));
  CHECK(cfg.model.f1.b == doctest::Approx(0.5));
  CHECK(cfg.model.noise.family == kernel::NoiseSpec::Family::Gaussian);
  CHECK(cfg.experiment.depth == 10);
  CHECK(cfg.experiment.replicates == 1000);
  CHECK(cfg.experiment.seed == 42);
  CHECK(cfg.experiment.grid.points == 41);
  CHECK(cfg.bounds.q.value() == doctest::Approx(0.5));
  CHECK(cfg.bounds.N.value() == 15);
  CHECK(cfg.output.dir == "out");
  CHECK(cfg.output.format == "json");

  const auto spec = cfg.experiment_spec();
  CHECK(spec.index_set.describe() == "subtree:10");
  CHECK(spec.functional.name == "identity");

  // defaults survive a minimal config
  const auto minimal = config::parse_string("[model]\nnoise.sigma = 1\n");
  CHECK(minimal.experiment.depth == 8);
  CHECK(minimal.experiment.sigma_multiples.size() == 6);
  CHECK(minimal.output.format == "csv");
  CHECK(minimal.index_set().describe() == "subtree:8");
}

TEST_CASE("unknown keys and malformed lines are errors") {
  CHECK_THROWS_WITH_AS(config::parse_string("[model]\nnoise.sugma = 1\n"),
                       "unknown configuration key: model.noise.sugma", std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[nonsense]\nkey = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("key = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[model]\nnoise.sigma 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[model]\nnoise.sigma = \n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[model]\nnoise.sigma = 1\nnoise.sigma = 2\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[model]\nnoise.sigma = abc\n"), std::invalid_argument);
}

TEST_CASE("field validation happens before any simulation") {
  CHECK_THROWS_AS(config::parse_string("[experiment]\ndepth = 41\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[experiment]\nreplicates = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[experiment]\nalpha = 1.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[experiment]\ngrid = 3:-1:10\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[experiment]\nindex = column:3\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[experiment]\nchecks = tail,nonsense\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[model]\nnoise.family = cauchy\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[output]\nformat = xml\n"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse_string("[model]\nf0.family = cubic\n"), std::invalid_argument);
}

TEST_CASE("index and functional resolution") {
  auto cfg = config::parse_string("[experiment]\nindex = generation:4\n");
  CHECK(cfg.index_set().describe() == "generation:4");
  cfg = config::parse_string("[experiment]\nfunctional = offspring_residual\ndepth = 5\nindex = subtree:4\n");
  const auto g = cfg.functional();
  CHECK(g.arity == simulate::Functional::Arity::Triple);
  CHECK(g.name == "offspring_residual");
  CHECK_NOTHROW(cfg.experiment_spec());
}

TEST_CASE("tgrid accepts explicit multiples") {
  const auto cfg = config::parse_string("[experiment]\ntgrid = 0.5,1,2\n");
  REQUIRE(cfg.experiment.sigma_multiples.size() == 3);
  CHECK(cfg.experiment.sigma_multiples[2] == doctest::Approx(2.0));
  CHECK_THROWS_AS(config::parse_string("[experiment]\ntgrid = 2,1\n").experiment_spec(),
                  std::invalid_argument);
}

TEST_CASE("emitted reports re-parse and re-emit byte-identically") {
  auto cfg = config::parse_string(kFullConfig);
  cfg.experiment.depth = 5;
  cfg.experiment.replicates = 120;
  cfg.experiment.index = "generation:5";
  auto spec = cfg.experiment_spec();
  spec.threads = 2;

  const auto tail = harness::run_tail_check(spec);
  const auto tail_json = io::to_json(tail.replicate_centered);
  CHECK(io::to_json(io::parse_concentration_report(tail_json)) == tail_json);

  const auto laplace = harness::run_laplace_check(spec);
  const auto laplace_json = io::to_json(laplace.replicate_centered);
  CHECK(io::to_json(io::parse_concentration_report(laplace_json)) == laplace_json);

  harness::BiasSettings settings;
  settings.chain_steps = 20000;
  settings.burn_in = 500;
  const auto bias = harness::run_bias_check(cfg.model, 5, 50, settings, 3, 2);
  const auto bias_json = io::to_json(bias);
  CHECK(io::to_json(io::parse_bias_report(bias_json)) == bias_json);

  const auto contraction = harness::run_contraction_check(cfg.model, 3, 0.0, 4.0, 2000, 5);
  const auto contraction_json = io::to_json(contraction);
  CHECK(io::to_json(io::parse_contraction_report(contraction_json)) == contraction_json);
}

TEST_CASE("laplace criterion reports serialize to JSON") {
  metrics::LaplaceCheckReport report;
  report.function_name = "identity";
  report.C = 1.0;
  report.lip = 1.0;
  report.entries.push_back({0.5, 1.1, 1.2, 0.01, true, true});
  report.entries.push_back({9.0, 0.0, 0.0, 0.0, false, false});
  const auto text = io::to_json(report);
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("function").get<std::string>() == "identity");
  CHECK(j.at("all_pass").get<bool>());
  REQUIRE(j.at("entries").size() == 2);
  CHECK(j.at("entries")[0].at("lhs").get<double>() == doctest::Approx(1.1));
  CHECK_FALSE(j.at("entries")[1].at("evaluable").get<bool>());
}

TEST_CASE("csv summaries carry presentation-ready columns") {
  auto cfg = config::parse_string(kFullConfig);
  cfg.experiment.depth = 4;
  cfg.experiment.replicates = 60;
  cfg.experiment.index = "generation:4";
  auto spec = cfg.experiment_spec();
  const auto tail = harness::run_tail_check(spec);
  const auto csv = io::to_csv(tail.replicate_centered);
  CHECK(csv.rfind("t,p_hat,ci_lo,ci_hi,bound,verdict\n", 0) == 0);
  CHECK(csv.find("dominated") != std::string::npos);
}

TEST_SUITE_END();
