#include "retraction_kit/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct RawOptions {
  std::vector<std::string> methods;
  std::string x, v, magnitudes;
  std::optional<std::uint64_t> seed;
};

void split_methods(std::vector<std::string>& methods) {
  std::vector<std::string> out;
  for (const auto& entry : methods) {
    std::size_t start = 0;
    while (start <= entry.size()) {
      const std::size_t comma = std::min(entry.find(',', start), entry.size());
      if (comma > start) out.push_back(entry.substr(start, comma - start));
      start = comma + 1;
    }
  }
  methods = std::move(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retractions onto constraint manifolds F^-1(0): experiments and diagnostics"};
  app.set_version_flag("--version", std::string(rkit::kToolVersion));
  app.set_config("--config", "", "TOML or INI file with option values; command-line flags win");
  app.require_subcommand(1);

  rkit::ExperimentConfig cfg;
  RawOptions raw;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--manifold", cfg.manifold, "Built-in manifold, e.g. circle, sphere:4, ellipse:2,1")
        ->capture_default_str();
    sub->add_option("--c0", cfg.c0, "Step-norm stopping threshold")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "Iteration cap per retraction")->capture_default_str();
    sub->add_option("--seed", raw.seed, "Base seed for random experiments");
    sub->add_option("--output,-o", cfg.output, "Output file (stdout when omitted)");
    sub->add_option("--format", cfg.format, "csv or json")->capture_default_str();
  };
  const auto add_methods = [&](CLI::App* sub, std::string fallback) {
    sub->add_option("--method,-m", raw.methods, "Retraction method(s); repeat or comma-separate")
        ->default_str(fallback);
    sub->callback([&raw, fallback] {
      if (raw.methods.empty()) raw.methods = {fallback};
    });
  };
  const auto add_point = [&](CLI::App* sub, bool needs_v) {
    sub->add_option("--x", raw.x, "Base point, comma-separated (default: reference point)");
    auto* opt = sub->add_option("--v", raw.v, "Tangent vector, comma-separated");
    if (needs_v) opt->required();
  };

  auto* retract = app.add_subcommand("retract", "Retract one tangent vector");
  add_common(retract);
  add_methods(retract, "newton");
  add_point(retract, true);
  retract->add_option("--oblique-angle", cfg.oblique_angle_deg, "Oblique tilt in degrees")->capture_default_str();

  auto* order = app.add_subcommand("order", "Estimate approximation order against the exponential map");
  add_common(order);
  add_methods(order, "newton,orthographic,projective");
  add_point(order, false);
  order->add_option("--t-max", cfg.t_max)->capture_default_str();
  order->add_option("--t-ratio", cfg.t_ratio)->capture_default_str();
  order->add_option("--rungs", cfg.rungs)->capture_default_str();
  order->add_option("--reference", cfg.reference, "auto, analytic or numeric")->capture_default_str();
  order->add_option("--oblique-angle", cfg.oblique_angle_deg)->capture_default_str();

  auto* region = app.add_subcommand("region", "Scan convergence regions over tangent magnitudes");
  add_common(region);
  add_methods(region, "newton,orthographic");
  region->add_option("--base-points", cfg.base_points)->capture_default_str();
  region->add_option("--directions", cfg.directions, "Random directions per base point")->capture_default_str();
  region->add_option("--magnitudes", raw.magnitudes, "Ascending magnitudes, comma-separated");
  region->add_option("--oblique-angle", cfg.oblique_angle_deg)->capture_default_str();

  auto* cost = app.add_subcommand("cost", "Compare iteration counts and solver operations");
  add_common(cost);
  add_methods(cost, "newton,orthographic");
  cost->add_option("--samples", cfg.samples)->capture_default_str();
  cost->add_option("--max-magnitude", cfg.max_magnitude)->capture_default_str();
  cost->add_option("--oblique-angle", cfg.oblique_angle_deg)->capture_default_str();

  auto* rates = app.add_subcommand("rates", "Linear-rate exponents of the frozen-Jacobian methods");
  add_common(rates);
  add_methods(rates, "modified-newton,chord-orthographic");
  add_point(rates, false);
  rates->add_option("--magnitudes", raw.magnitudes, "At least four magnitudes, comma-separated");

  auto* lemma = app.add_subcommand("lemma", "Check the pseudoinverse versus augmented-inverse norm bound");
  add_common(lemma);
  lemma->add_option("--n", cfg.lemma_n, "Ambient dimension (maximum when --c is 0)")->capture_default_str();
  lemma->add_option("--c", cfg.lemma_c, "Codimension; 0 draws (n, c) per trial")->capture_default_str();
  lemma->add_option("--trials", cfg.trials)->capture_default_str();

  auto* geodesic = app.add_subcommand("geodesic", "Integrate a geodesic numerically");
  add_common(geodesic);
  add_point(geodesic, true);
  geodesic->add_option("--n-steps", cfg.n_steps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    cfg.kind = *rkit::parse_experiment_kind(chosen->get_name());
    split_methods(raw.methods);
    cfg.methods = raw.methods;
    cfg.seed = raw.seed;
    if (!raw.x.empty()) cfg.x = rkit::parse_number_list(raw.x, "x");
    if (!raw.v.empty()) cfg.v = rkit::parse_number_list(raw.v, "v");
    if (!raw.magnitudes.empty()) cfg.magnitudes = rkit::parse_number_list(raw.magnitudes, "magnitudes");
  } catch (const rkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rkit::run(cfg);
}
