#pragma once

#include "retraction_kit/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace rkit {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ExperimentKind { Retract, Order, Region, Cost, Rates, Lemma, Geodesic };

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Retract;
  std::string manifold = "circle";
  std::vector<std::string> methods;

  double c0 = 1e-10;
  int max_iter = 50;

  //! Base point and tangent; defaults depend on the experiment.
  std::optional<std::vector<double>> x;
  std::optional<std::vector<double>> v;

  // order
  double t_max = 0.2;
  double t_ratio = 0.5;
  int rungs = 8;
  std::string reference = "auto";  // auto | analytic | numeric

  // region
  int base_points = 32;
  int directions = 2;
  //! region default: 12 magnitudes evenly spaced in [0.1, 3.0];
  //! rates default: 0.4, 0.2, 0.1, 0.05.
  std::vector<double> magnitudes;

  // cost
  int samples = 100;
  double max_magnitude = 0.5;

  // geodesic
  int n_steps = 100;

  // lemma; lemma_c == 0 draws (n, c) per trial with n <= lemma_n.
  int lemma_n = 8;
  int lemma_c = 0;
  int trials = 10000;

  double oblique_angle_deg = 30.0;

  std::optional<std::uint64_t> seed;

  std::string output;  // empty: stdout
  std::string format = "csv";
};

//! Throws Error(ConfigError) naming the offending field.
void validate(const ExperimentConfig& cfg);

//! Stable 64-bit FNV-1a digest (hex) of every field that affects results.
std::string config_hash(const ExperimentConfig& cfg);

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

//! Runs the configured experiment. Module failures surface as
//! Error(ExperimentError); invalid configurations as Error(ConfigError).
Table run_experiment(const ExperimentConfig& cfg);

//! `#`-prefixed metadata lines, a header row, then one line per data row.
std::string to_csv(const Table& table);
//! {"metadata": {...}, "columns": [...], "rows": [[...], ...]}
std::string to_json(const Table& table);

//! Runs, formats and writes to cfg.output (stdout when empty). Returns the
//! process exit status and prints diagnostics to stderr on failure.
int run(const ExperimentConfig& cfg);

//! Parses comma-separated decimals; throws Error(ConfigError) naming `field`.
std::vector<double> parse_number_list(std::string_view text, std::string_view field);

}  // namespace rkit
