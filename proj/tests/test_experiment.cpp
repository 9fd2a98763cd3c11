#include "retraction_kit/experiment.hpp"

#include <doctest.h>

#include <json.hpp>

#include <sstream>

using namespace rkit;

namespace {

ExperimentConfig retract_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Retract;
  cfg.methods = {"newton"};
  cfg.x = std::vector<double>{1, 0};
  cfg.v = std::vector<double>{0, 0.5};
  return cfg;
}

ErrorCode code_of(const ExperimentConfig& cfg) {
  try {
    run_experiment(cfg);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

//! CSV text with the metadata block removed.
std::string data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("retract row matches the library result") {
  const auto table = run_experiment(retract_config());
  REQUIRE(table.rows.size() == 1);
  const auto& row = table.rows[0];
  CHECK(std::get<std::string>(row[0]) == "newton");
  CHECK(std::get<std::string>(row[1]) == "Converged");
  CHECK(std::get<std::string>(row[5]).rfind("0.894427", 0) == 0);
  CHECK(std::get<std::string>(row[5]).find(";0.447213") != std::string::npos);
}

TEST_CASE("order on the circle reports a third-order slope") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Order;
  cfg.methods = {"projective"};
  const auto table = run_experiment(cfg);
  REQUIRE(table.rows.size() == 1);
  CHECK(std::abs(std::get<double>(table.rows[0][1]) - 3.0) < 0.1);
}

TEST_CASE("configuration errors name the field") {
  auto cfg = retract_config();
  cfg.methods.clear();
  CHECK(code_of(cfg) == ErrorCode::ConfigError);
  try {
    run_experiment(cfg);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("'method'") != std::string::npos);
  }
  cfg = retract_config();
  cfg.methods = {"newton", "bogus"};
  CHECK(code_of(cfg) == ErrorCode::ConfigError);
  cfg = retract_config();
  cfg.manifold = "hyperboloid";
  CHECK(code_of(cfg) == ErrorCode::ConfigError);
  cfg = retract_config();
  cfg.x = std::vector<double>{1, 1};
  CHECK(code_of(cfg) == ErrorCode::ConfigError);
  cfg = retract_config();
  cfg.v = std::vector<double>{1, 0};
  CHECK(code_of(cfg) == ErrorCode::ConfigError);
  ExperimentConfig region;
  region.kind = ExperimentKind::Region;
  region.methods = {"newton"};
  CHECK(code_of(region) == ErrorCode::ConfigError);
  CHECK_THROWS_AS(parse_number_list("1,,2", "v"), Error);
  CHECK(parse_number_list("1, -2.5,3e-1", "v") == std::vector<double>{1, -2.5, 0.3});
}

TEST_CASE("module failures surface as experiment errors") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Order;
  cfg.methods = {"newton"};
  cfg.rungs = 5;
  cfg.t_max = 1e-7;  // every rung falls below the fit window
  CHECK(code_of(cfg) == ErrorCode::ExperimentError);
}

TEST_CASE("retract exit status reflects failed retractions") {
  auto cfg = retract_config();
  cfg.methods = {"orthographic"};
  cfg.v = std::vector<double>{0, 1.2};
  cfg.output = "/dev/null";
  CHECK(run(cfg) != 0);
  cfg.v = std::vector<double>{0, 0.5};
  CHECK(run(cfg) == 0);
}

TEST_CASE("metadata header and json mirror") {
  const auto table = run_experiment(retract_config());
  const std::string csv = to_csv(table);
  CHECK(csv.find("# config_hash: " + config_hash(retract_config())) != std::string::npos);
  CHECK(csv.find("# version: 0.1.0") != std::string::npos);
  CHECK(csv.find("# seed: none") != std::string::npos);
  const auto j = nlohmann::json::parse(to_json(table));
  CHECK(j["metadata"]["experiment"] == "retract");
  CHECK(j["columns"].size() == table.columns.size());
  CHECK(j["rows"][0][0] == "newton");
}

TEST_CASE("config hash tracks result-affecting fields") {
  auto a = retract_config();
  auto b = retract_config();
  CHECK(config_hash(a) == config_hash(b));
  b.c0 = 1e-12;
  CHECK(config_hash(a) != config_hash(b));
  b = retract_config();
  b.output = "elsewhere.csv";
  CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("seeded experiments are reproducible") {
  for (auto kind : {ExperimentKind::Region, ExperimentKind::Cost, ExperimentKind::Lemma, ExperimentKind::Rates}) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.manifold = "ellipse:2,1";
    cfg.seed = 5;
    cfg.base_points = 4;
    cfg.samples = 10;
    cfg.trials = 100;
    cfg.methods = kind == ExperimentKind::Rates ? std::vector<std::string>{"modified-newton", "chord-orthographic"}
                                                : std::vector<std::string>{"newton", "orthographic"};
    CAPTURE(to_string(kind));
    const std::string first = to_csv(run_experiment(cfg));
    const std::string second = to_csv(run_experiment(cfg));
    CHECK(first == second);
    cfg.seed = 6;
    if (kind == ExperimentKind::Cost) CHECK(data_rows(to_csv(run_experiment(cfg))) != data_rows(first));
  }
}

TEST_CASE("experiment names round-trip") {
  for (auto kind : {ExperimentKind::Retract, ExperimentKind::Order, ExperimentKind::Region, ExperimentKind::Cost,
                    ExperimentKind::Rates, ExperimentKind::Lemma, ExperimentKind::Geodesic})
    CHECK(parse_experiment_kind(to_string(kind)) == kind);
  CHECK_FALSE(parse_experiment_kind("plot"));
}

}
