#include "retraction_kit/experiment.hpp"

#include "retraction_kit/analysis.hpp"
#include "retraction_kit/builtin.hpp"
#include "retraction_kit/rates.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace rkit {

namespace {

[[noreturn]] void config_error(std::string_view field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + std::string(field) + "': " + what);
}

std::string join(const std::vector<double>& values, char sep = ';') {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
    if (i) out += sep;
    out.append(buf, res.ptr);
  }
  return out;
}

std::string join(const Vec& v) { return join(std::vector<double>(v.data(), v.data() + v.size())); }

bool is_stochastic(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Region:
    case ExperimentKind::Cost:
    case ExperimentKind::Lemma: return true;
    case ExperimentKind::Order:
    case ExperimentKind::Rates:
    case ExperimentKind::Retract:
    case ExperimentKind::Geodesic: return false;
  }
  return true;
}

bool uses_methods(ExperimentKind kind) {
  return kind != ExperimentKind::Lemma && kind != ExperimentKind::Geodesic;
}

std::vector<Method> resolve_methods(const ExperimentConfig& cfg) {
  std::vector<Method> out;
  for (const auto& name : cfg.methods) {
    const auto m = parse_method(name);
    if (!m) config_error("method", "unknown method '" + name + "'");
    out.push_back(*m);
  }
  return out;
}

template <typename Scalar = double>
ConstraintMap<Scalar> resolve_manifold(const ExperimentConfig& cfg) {
  try {
    return make_builtin<Scalar>(cfg.manifold);
  } catch (const Error& e) {
    config_error("manifold", e.what());
  }
}

template <typename Scalar>
VectorX<Scalar> to_vector(const std::vector<double>& values) {
  VectorX<Scalar> out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Index>(i)) = Scalar(values[i]);
  return out;
}

template <typename Scalar>
ManifoldPoint<Scalar> resolve_point(const ConstraintMap<Scalar>& F, const ExperimentConfig& cfg) {
  try {
    if (cfg.x) return ManifoldPoint<Scalar>::on(F, to_vector<Scalar>(*cfg.x));
    return ManifoldPoint<Scalar>::on(F, *F.reference_point());
  } catch (const Error& e) {
    config_error("x", e.what());
  }
}

template <typename Scalar>
TangentVector<Scalar> resolve_tangent(const ConstraintMap<Scalar>& F,
                                      const ManifoldPoint<Scalar>& x,
                                      const ExperimentConfig& cfg) {
  try {
    return TangentVector<Scalar>::at(F, x, to_vector<Scalar>(*cfg.v));
  } catch (const Error& e) {
    config_error("v", e.what());
  }
}

//! Unit tangent from the first coordinate axis with a nonzero tangent part.
Tangent default_tangent(const Manifold& F, const Point& x) {
  for (Index i = 0; i < F.ambient_dim(); ++i) {
    const Vec t = tangent_project(F, x, Vec(Vec::Unit(F.ambient_dim(), i))).dir;
    if (t.norm() > 1e-6) return Tangent{x, t / t.norm()};
  }
  throw Error(ErrorCode::RankDeficient, "no tangent direction at the base point");
}

RetractionConfig retraction_config(const ExperimentConfig& cfg) {
  RetractionConfig rc;
  rc.c0 = cfg.c0;
  rc.max_iter = cfg.max_iter;
  return rc;
}

MethodOptions method_options(const ExperimentConfig& cfg) {
  return MethodOptions{cfg.oblique_angle_deg * std::numbers::pi / 180.0};
}

std::vector<double> region_magnitudes(const ExperimentConfig& cfg) {
  if (!cfg.magnitudes.empty()) return cfg.magnitudes;
  std::vector<double> m;
  for (int i = 0; i < 12; ++i) m.push_back(0.1 + (3.0 - 0.1) * i / 11.0);
  return m;
}

std::vector<double> rate_magnitudes(const ExperimentConfig& cfg) {
  if (!cfg.magnitudes.empty()) return cfg.magnitudes;
  return {0.4, 0.2, 0.1, 0.05};
}

Table run_retract(const ExperimentConfig& cfg) {
  const auto F = resolve_manifold(cfg);
  const auto x = resolve_point(F, cfg);
  const auto v = resolve_tangent(F, x, cfg);
  Table t;
  t.columns = {"method", "status", "iterations", "solver_ops", "residual", "point", "history_label", "history"};
  for (Method m : resolve_methods(cfg)) {
    const auto r = retract(m, F, v, retraction_config(cfg), method_options(cfg));
    const double residual = F.residual(r.last_iterate);
    t.rows.push_back({std::string(to_string(m)), std::string(to_string(r.status)),
                      std::int64_t{r.iterations}, r.solver_ops, residual, join(r.last_iterate),
                      r.history_label, join(r.residual_history)});
  }
  return t;
}

Table run_order(const ExperimentConfig& cfg) {
  const auto F = resolve_manifold(cfg);
  const auto x = resolve_point(F, cfg);
  const Tangent v = cfg.v ? resolve_tangent(F, x, cfg) : default_tangent(F, x);
  Reference ref = has_analytic_exp(F.kind()) ? Reference::Analytic : Reference::Numeric;
  if (cfg.reference == "analytic") ref = Reference::Analytic;
  if (cfg.reference == "numeric") ref = Reference::Numeric;
  if (ref == Reference::Analytic && !has_analytic_exp(F.kind()))
    config_error("reference", "no analytic exponential map for " + F.name());
  const auto ladder = geometric_ladder(cfg.t_max, cfg.t_ratio, cfg.rungs);
  Table t;
  t.columns = {"method", "slope", "intercept", "r_squared", "leading_constant", "rungs_used", "ladder_t", "ladder_d"};
  for (Method m : resolve_methods(cfg)) {
    const auto est = estimate_order(F, v, m, ladder, ref, retraction_config(cfg), method_options(cfg));
    std::vector<double> ts, ds;
    for (const auto& [ti, di] : est.ladder) {
      ts.push_back(ti);
      ds.push_back(di);
    }
    t.rows.push_back({std::string(to_string(m)), est.slope, est.intercept, est.r_squared,
                      est.leading_constant(), std::int64_t{est.rungs_used}, join(ts), join(ds)});
  }
  return t;
}

Table run_region(const ExperimentConfig& cfg, Table& t) {
  const auto F = resolve_manifold(cfg);
  const auto methods = resolve_methods(cfg);
  const auto bases = sample_points(F, static_cast<std::size_t>(cfg.base_points), derive_seed(*cfg.seed, 11));
  const auto scan = scan_region(F, methods, bases, cfg.directions, region_magnitudes(cfg),
                                retraction_config(cfg), derive_seed(*cfg.seed, 12), method_options(cfg));
  t.columns = {"magnitude", "method", "converged", "cells"};
  for (std::size_t k = 0; k < scan.magnitudes.size(); ++k)
    for (std::size_t m = 0; m < methods.size(); ++m)
      t.rows.push_back({scan.magnitudes[k], std::string(to_string(methods[m])),
                        std::int64_t{scan.converged[m][k]}, std::int64_t{scan.cells_per_bucket}});
  for (std::size_t m = 0; m < methods.size(); ++m)
    t.metadata.emplace_back(std::string("anomalies.") + to_string(methods[m]),
                            std::to_string(scan.anomalies[m]));
  const auto has = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  if (has(Method::Newton) && has(Method::Orthographic))
    t.metadata.emplace_back("orthographic_only_cells",
                            std::to_string(scan.exclusive_successes(Method::Orthographic, Method::Newton)));
  return t;
}

Table run_cost(const ExperimentConfig& cfg) {
  const auto F = resolve_manifold(cfg);
  const auto samples = sample_tangents(F, static_cast<std::size_t>(cfg.samples), cfg.max_magnitude, *cfg.seed);
  const auto profile = profile_cost(F, samples, retraction_config(cfg), resolve_methods(cfg), method_options(cfg));
  Table t;
  t.columns = {"method", "samples", "converged", "matched", "failure_rate", "mean_iterations",
               "max_iterations", "mean_solver_ops", "mean_ops_per_iteration", "pair_violations"};
  for (const auto& c : profile.per_method)
    t.rows.push_back({std::string(to_string(c.method)), std::int64_t{c.samples}, std::int64_t{c.converged},
                      std::int64_t{profile.matched}, c.failure_rate, c.mean_iterations,
                      std::int64_t{c.max_iterations}, c.mean_solver_ops, c.mean_ops_per_iteration,
                      std::int64_t{profile.pair_violations}});
  return t;
}

Table run_rates(const ExperimentConfig& cfg) {
  using LD = long double;
  const auto F = resolve_manifold<LD>(cfg);
  // Without an explicit point, step once from the reference point so the
  // base avoids the symmetric points where the linear contraction term of
  // the chord method vanishes.
  const auto Fd = resolve_manifold(cfg);
  const Point xd = cfg.x ? resolve_point(Fd, cfg) : [&] {
    const Point ref = resolve_point(Fd, cfg);
    return newton_retraction(Fd, default_tangent(Fd, ref)).point.value();
  }();
  const auto x = newton_limit(F, VectorX<LD>(xd.coords.cast<LD>())).point.value();
  const VectorX<LD> dir = cfg.v ? resolve_tangent(F, x, cfg).dir
                                : VectorX<LD>(default_tangent(Fd, xd).dir.cast<LD>());
  Table t;
  t.columns = {"method", "exponent", "r_squared", "magnitudes", "contraction"};
  for (Method m : resolve_methods(cfg)) {
    if (m != Method::ModifiedNewton && m != Method::ChordOrthographic)
      config_error("method", "rates only apply to modified-newton and chord-orthographic");
    const auto est = estimate_rate_exponent(F, x, dir, m, rate_magnitudes(cfg));
    t.rows.push_back({std::string(to_string(m)), est.exponent, est.r_squared, join(est.magnitudes),
                      join(est.contraction)});
  }
  return t;
}

Table run_lemma(const ExperimentConfig& cfg) {
  if (cfg.lemma_c != 0 && !(cfg.lemma_c >= 1 && cfg.lemma_c < cfg.lemma_n))
    config_error("c", "need 1 <= c < n");
  const auto report = cfg.lemma_c == 0 ? lemma_ajnf_sweep(cfg.lemma_n, cfg.trials, *cfg.seed)
                                       : lemma_ajnf_trial(cfg.lemma_n, cfg.lemma_c, cfg.trials, *cfg.seed);
  Table t;
  t.columns = {"n", "c", "trials", "violations", "max_gap", "skipped"};
  t.rows.push_back({std::int64_t{cfg.lemma_n}, cfg.lemma_c == 0 ? Cell{std::string("sweep")} : Cell{std::int64_t{cfg.lemma_c}},
                    std::int64_t{report.trials}, std::int64_t{report.violations}, report.max_gap,
                    std::int64_t{report.skipped}});
  return t;
}

Table run_geodesic(const ExperimentConfig& cfg) {
  const auto F = resolve_manifold(cfg);
  const auto x = resolve_point(F, cfg);
  const auto v = resolve_tangent(F, x, cfg);
  const auto g = exp_numeric(F, v, cfg.n_steps);
  double analytic_error = std::numeric_limits<double>::quiet_NaN();
  if (has_analytic_exp(F.kind()))
    analytic_error = geodesic_distance(F, g.endpoint.coords, exp_analytic(F, v).coords);
  Table t;
  t.columns = {"n_steps", "endpoint", "end_velocity", "end_speed", "max_drift", "max_speed_drift", "analytic_error"};
  t.rows.push_back({std::int64_t{g.steps}, join(g.endpoint.coords), join(g.end_velocity),
                    g.end_velocity.norm(), g.max_drift, g.max_speed_drift, analytic_error});
  return t;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Retract: return "retract";
    case ExperimentKind::Order: return "order";
    case ExperimentKind::Region: return "region";
    case ExperimentKind::Cost: return "cost";
    case ExperimentKind::Rates: return "rates";
    case ExperimentKind::Lemma: return "lemma";
    case ExperimentKind::Geodesic: return "geodesic";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::Retract, ExperimentKind::Order, ExperimentKind::Region, ExperimentKind::Cost,
                 ExperimentKind::Rates, ExperimentKind::Lemma, ExperimentKind::Geodesic})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

std::vector<double> parse_number_list(std::string_view text, std::string_view field) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string_view token = text.substr(start, comma - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    double value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
      config_error(field, "'" + std::string(token) + "' is not a decimal number");
    out.push_back(value);
    start = comma + 1;
  }
  return out;
}

void validate(const ExperimentConfig& cfg) {
  if (uses_methods(cfg.kind)) {
    if (cfg.methods.empty()) config_error("method", "at least one method is required");
    resolve_methods(cfg);
  }
  const auto F = resolve_manifold(cfg);
  if (!(cfg.c0 > 0.0)) config_error("c0", "must be positive");
  if (cfg.max_iter < 1) config_error("max-iter", "must be positive");
  if (cfg.format != "csv" && cfg.format != "json") config_error("format", "must be csv or json");
  if (is_stochastic(cfg) && !cfg.seed) config_error("seed", "required for this experiment");
  if (cfg.x && cfg.x->size() != static_cast<std::size_t>(F.ambient_dim()))
    config_error("x", "expected " + std::to_string(F.ambient_dim()) + " components");
  if (cfg.v && cfg.v->size() != static_cast<std::size_t>(F.ambient_dim()))
    config_error("v", "expected " + std::to_string(F.ambient_dim()) + " components");
  if ((cfg.kind == ExperimentKind::Retract || cfg.kind == ExperimentKind::Geodesic) && !cfg.v)
    config_error("v", "required for " + std::string(to_string(cfg.kind)));
  if (cfg.reference != "auto" && cfg.reference != "analytic" && cfg.reference != "numeric")
    config_error("reference", "must be auto, analytic or numeric");
  if (!(cfg.t_max > 0.0)) config_error("t-max", "must be positive");
  if (!(cfg.t_ratio > 0.0 && cfg.t_ratio < 1.0)) config_error("t-ratio", "must lie in (0, 1)");
  if (cfg.rungs < 5) config_error("rungs", "at least 5 rungs are required");
  if (cfg.base_points < 1) config_error("base-points", "must be positive");
  if (cfg.directions < 1) config_error("directions", "must be positive");
  for (std::size_t i = 0; i < cfg.magnitudes.size(); ++i)
    if (!(cfg.magnitudes[i] > 0.0)) config_error("magnitudes", "must be positive");
  if (cfg.kind == ExperimentKind::Region)
    for (std::size_t i = 1; i < cfg.magnitudes.size(); ++i)
      if (!(cfg.magnitudes[i] > cfg.magnitudes[i - 1])) config_error("magnitudes", "must be ascending");
  if (cfg.kind == ExperimentKind::Rates && !cfg.magnitudes.empty() && cfg.magnitudes.size() < 4)
    config_error("magnitudes", "rates need at least 4 magnitudes");
  if (cfg.samples < 1) config_error("samples", "must be positive");
  if (!(cfg.max_magnitude > 0.0)) config_error("max-magnitude", "must be positive");
  if (cfg.n_steps < 1) config_error("n-steps", "must be positive");
  if (cfg.lemma_n < 2) config_error("n", "must be at least 2");
  if (cfg.trials < 1) config_error("trials", "must be positive");
  const bool oblique = std::find(cfg.methods.begin(), cfg.methods.end(), "oblique") != cfg.methods.end();
  if (oblique && F.codim() != 1) config_error("method", "oblique needs a codimension-one manifold");
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const auto list = [](const std::vector<double>& v) { return join(v, ','); };
  os << "kind=" << to_string(cfg.kind) << ";manifold=" << cfg.manifold << ";methods=";
  for (const auto& m : cfg.methods) os << m << ',';
  os << ";c0=" << join({cfg.c0}) << ";max_iter=" << cfg.max_iter;
  os << ";x=" << (cfg.x ? list(*cfg.x) : "-") << ";v=" << (cfg.v ? list(*cfg.v) : "-");
  os << ";ladder=" << list({cfg.t_max, cfg.t_ratio}) << ',' << cfg.rungs << ";reference=" << cfg.reference;
  os << ";grid=" << cfg.base_points << ',' << cfg.directions << ";magnitudes=" << list(cfg.magnitudes);
  os << ";samples=" << cfg.samples << ',' << join({cfg.max_magnitude}) << ";n_steps=" << cfg.n_steps;
  os << ";lemma=" << cfg.lemma_n << ',' << cfg.lemma_c << ',' << cfg.trials;
  os << ";oblique=" << join({cfg.oblique_angle_deg});
  os << ";seed=" << (cfg.seed ? std::to_string(*cfg.seed) : "-");
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Table run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Table t;
  try {
    switch (cfg.kind) {
      case ExperimentKind::Retract: t = run_retract(cfg); break;
      case ExperimentKind::Order: t = run_order(cfg); break;
      case ExperimentKind::Region: run_region(cfg, t); break;
      case ExperimentKind::Cost: t = run_cost(cfg); break;
      case ExperimentKind::Rates: t = run_rates(cfg); break;
      case ExperimentKind::Lemma: t = run_lemma(cfg); break;
      case ExperimentKind::Geodesic: t = run_geodesic(cfg); break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ExperimentError, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ExperimentError, e.what());
  }
  std::vector<std::pair<std::string, std::string>> header = {
      {"tool", "retraction_kit"},
      {"version", std::string(kToolVersion)},
      {"experiment", to_string(cfg.kind)},
      {"manifold", cfg.kind == ExperimentKind::Lemma ? std::string("none") : cfg.manifold},
      {"config_hash", config_hash(cfg)},
      {"seed", cfg.seed ? std::to_string(*cfg.seed) : "none"},
  };
  header.insert(header.end(), t.metadata.begin(), t.metadata.end());
  t.metadata = std::move(header);
  return t;
}

int run(const ExperimentConfig& cfg) {
  try {
    const Table table = run_experiment(cfg);
    const std::string text = cfg.format == "json" ? to_json(table) : to_csv(table);
    if (cfg.output.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.output, std::ios::binary);
      if (!out) throw Error(ErrorCode::ConfigError, "field 'output': cannot open " + cfg.output);
      out << text;
    }
    // Exit status reflects retraction failures in retract runs.
    if (cfg.kind == ExperimentKind::Retract)
      for (const auto& row : table.rows)
        if (std::get<std::string>(row[1]) != "Converged") return 3;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  }
}

}  // namespace rkit
