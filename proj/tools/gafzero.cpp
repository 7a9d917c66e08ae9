#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gafzero/config.hpp"
#include "gafzero/gafzero.hpp"
#include "gafzero/oracles.hpp"

using namespace gafzero;
using config::ConfigError;
using nlohmann::json;

namespace {

enum class Kind { Literal, Int, Real, IntList, Flag };

struct Key {
  const char* name;
  Kind kind;
  const char* help;
};

const std::map<std::string, std::vector<Key>>& command_keys() {
  static const std::map<std::string, std::vector<Key>> keys = {
      {"simulate",
       {{"ensemble", Kind::Literal, "ensemble literal, e.g. su2:128"},
        {"domain", Kind::Literal, "domain literal, e.g. disk:fs:1.0"},
        {"test_function", Kind::Literal, "test function literal, e.g. bump:0.5"},
        {"trials", Kind::Int, "number of trials"},
        {"seed", Kind::Int, "random stream seed"},
        {"workers", Kind::Int, "worker threads (default GAFZERO_WORKERS or all cores)"},
        {"method", Kind::Literal, "roots | argument"},
        {"out", Kind::Literal, "output path (.json or .csv)"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
      {"predict",
       {{"theorem", Kind::Literal, "number | volume | smooth | count (default: all that apply)"},
        {"ensemble", Kind::Literal, "ensemble literal"},
        {"N", Kind::Int, "degree"},
        {"domain", Kind::Literal, "domain literal"},
        {"test_function", Kind::Literal, "test function literal"},
        {"m", Kind::Int, "complex dimension"},
        {"boundary_volume", Kind::Real, "boundary volume for the volume-variance formula"},
        {"out", Kind::Literal, "output path"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
      {"bipotential",
       {{"ensemble", Kind::Literal, "ensemble literal"},
        {"domain", Kind::Literal, "domain literal (count variance)"},
        {"test_function", Kind::Literal, "test function literal (smooth variance)"},
        {"nodes", Kind::Int, "boundary nodes (0 = default)"},
        {"mode", Kind::Literal, "offset | local"},
        {"resolution", Kind::Real, "smooth quadrature resolution multiplier"},
        {"out", Kind::Literal, "output path"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
      {"kernel-check",
       {{"ensemble", Kind::Literal, "ensemble literal (family used; N overridden by Ns)"},
        {"Ns", Kind::IntList, "comma separated degrees"},
        {"bound", Kind::Real, "scan bound on |u|, |v|"},
        {"b", Kind::Real, "off-diagonal distance factor"},
        {"out", Kind::Literal, "output path"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
      {"normality",
       {{"ensemble", Kind::Literal, "ensemble literal"},
        {"test_function", Kind::Literal, "test function literal"},
        {"trials", Kind::Int, "samples per seed"},
        {"seed", Kind::Int, "first seed"},
        {"seeds", Kind::Int, "number of seeds"},
        {"workers", Kind::Int, "worker threads"},
        {"standardization", Kind::Literal, "bipotential | empirical"},
        {"out", Kind::Literal, "output path"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
      {"sweep",
       {{"ensemble", Kind::Literal, "ensemble literal (family used; N overridden by Ns)"},
        {"Ns", Kind::IntList, "comma separated degrees"},
        {"domain", Kind::Literal, "domain literal"},
        {"test_function", Kind::Literal, "test function literal"},
        {"dilate", Kind::Flag, "flat model on sqrt(N)-dilates of the domain"},
        {"trials", Kind::Int, "trials per N"},
        {"seed", Kind::Int, "random stream seed"},
        {"workers", Kind::Int, "worker threads"},
        {"method", Kind::Literal, "roots | argument"},
        {"out", Kind::Literal, "output path"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
      {"selftest", {{"out", Kind::Literal, "output path"},
        {"format", Kind::Literal, "json | csv (default from the --out suffix)"}}},
  };
  return keys;
}

json literal_value(const std::string& s) {
  if (!s.empty() && (s.front() == '{' || s.front() == '[')) {
    try {
      return json::parse(s);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad JSON literal: ") + e.what());
    }
  }
  return s;
}

int get_int(const json& cfg, const char* key, int def) {
  if (!cfg.contains(key)) return def;
  const json& v = cfg[key];
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) return config::to_int(v.get<std::string>());
  throw ConfigError(std::string("field '") + key + "' must be an integer");
}

double get_real(const json& cfg, const char* key, double def) {
  if (!cfg.contains(key)) return def;
  return config::number(cfg, key);
}

std::string get_str(const json& cfg, const char* key, const std::string& def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return cfg[key].get<std::string>();
}

std::vector<int> get_int_list(const json& cfg, const char* key, std::vector<int> def) {
  if (!cfg.contains(key)) return def;
  const json& v = cfg[key];
  std::vector<int> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw ConfigError(std::string("field '") + key + "' must hold integers");
      out.push_back(x.get<int>());
    }
  } else if (v.is_string()) {
    for (const auto& s : config::split(v.get<std::string>(), ',')) out.push_back(config::to_int(s));
  } else {
    throw ConfigError(std::string("field '") + key + "' must be a list");
  }
  if (out.empty()) throw ConfigError(std::string("field '") + key + "' is empty");
  for (int n : out)
    if (n < 1) throw ConfigError("degrees must be >= 1");
  return out;
}

ZeroMethod get_method(const json& cfg) {
  const std::string m = get_str(cfg, "method", "roots");
  if (m == "roots") return ZeroMethod::Roots;
  if (m == "argument") return ZeroMethod::ArgumentPrinciple;
  throw ConfigError("method must be roots or argument");
}

std::uint64_t get_seed(const json& cfg) {
  const int s = get_int(cfg, "seed", 1);
  if (s < 0) throw ConfigError("seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

std::int64_t get_trials(const json& cfg, int def) {
  const int t = get_int(cfg, "trials", def);
  if (t < 100) throw ConfigError("trials must be >= 100");
  return t;
}

json summary_json(const MomentSummary& s) {
  return {{"n_trials", s.n_trials},   {"n_degenerate", s.n_degenerate}, {"mean", s.mean},
          {"variance", s.variance},   {"stderr_mean", s.stderr_mean},   {"stderr_variance", s.stderr_variance}};
}

json prediction_json(const Prediction& p) {
  return {{"theorem", to_string(p.theorem)}, {"N", p.N},
          {"m", p.m},                        {"constant", p.constant},
          {"geometric_factor", p.geometric_factor}, {"leading_value", p.leading_value},
          {"remainder_exponent", p.remainder_exponent}};
}

/// Result table plus scalar fields; written as JSON, or CSV with the config in comment lines.
struct Report {
  json meta;
  json result = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void write(const std::string& out, const std::string& format) const {
    const bool csv = format.empty() ? out.size() > 4 && out.substr(out.size() - 4) == ".csv" : format == "csv";
    std::string text;
    if (csv) {
      text += "# version: " + meta["version"].get<std::string>() + "\n";
      text += "# config: " + meta["config"].dump() + "\n";
      if (!result.empty()) text += "# result: " + result.dump() + "\n";
      for (std::size_t i = 0; i < columns.size(); ++i) text += (i ? "," : "") + columns[i];
      text += "\n";
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
          text += i ? "," : "";
          text += r[i].is_string() ? r[i].get<std::string>() : r[i].dump();
        }
        text += "\n";
      }
    } else {
      json j = meta;
      j["result"] = result;
      if (!columns.empty()) {
        json table = json::array();
        for (const auto& r : rows) {
          json row;
          for (std::size_t i = 0; i < columns.size(); ++i) row[columns[i]] = r[i];
          table.push_back(row);
        }
        j["table"] = table;
      }
      text = j.dump(2) + "\n";
    }
    if (out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out);
      if (!f) throw ConfigError("cannot open output file " + out);
      f << text;
    }
  }
};

EnsembleSpec ensemble_for_domain(const json& cfg, const Domain& d) {
  if (!cfg.contains("ensemble")) throw ConfigError("missing field 'ensemble'");
  const EnsembleSpec e = config::resolve_truncation(config::parse_ensemble(cfg["ensemble"]), d.chart_extent());
  if (e.geometry().kind != d.geometry().kind) throw ConfigError("domain geometry does not match the ensemble");
  return e;
}

double test_function_radius(const TestFunction& f) {
  const double r = std::abs(f.center()) + f.support_radius();
  return f.geometry().kind == MetricKind::Hyperbolic ? std::min(r, 0.999) : r;
}

void cmd_simulate(const json& cfg, Report& rep) {
  const std::int64_t trials = get_trials(cfg, 10000);
  const std::uint64_t seed = get_seed(cfg);
  const int workers = get_int(cfg, "workers", 0);
  rep.columns = {"N", "n_trials", "n_degenerate", "mean", "var", "stderr_mean", "stderr_var", "expected_mean", "prediction",
                 "ratio"};
  if (cfg.contains("domain") == cfg.contains("test_function"))
    throw ConfigError("simulate needs exactly one of domain or test_function");
  if (cfg.contains("domain")) {
    const Domain d = config::parse_domain(cfg["domain"]);
    const EnsembleSpec e = ensemble_for_domain(cfg, d);
    const auto s = run_count_experiment(e, d, trials, seed, workers, {get_method(cfg), 0.0, 0});
    const Prediction p = predicted_number_variance(e.N, d);
    rep.result = {{"ensemble", config::ensemble_json(e)}, {"summary", summary_json(s)},
                  {"expected_mean", expected_count(e, d)}, {"prediction", prediction_json(p)}};
    rep.rows.push_back({e.N, s.n_trials, s.n_degenerate, s.mean, s.variance, s.stderr_mean, s.stderr_variance,
                        expected_count(e, d), p.leading_value, s.variance / p.leading_value});
    return;
  }
  if (!cfg.contains("ensemble")) throw ConfigError("missing field 'ensemble'");
  EnsembleSpec e = config::parse_ensemble(cfg["ensemble"]);
  const TestFunction phi = config::parse_test_function(cfg["test_function"], e.geometry());
  e = config::resolve_truncation(e, test_function_radius(phi));
  const auto s = run_smooth_experiment(e, phi, trials, seed, workers);
  const Prediction p = predicted_smooth_variance(e.N, 1, phi.ddbar_norm_sq());
  const double mean = expected_linear_statistic(e, phi);
  rep.result = {{"ensemble", config::ensemble_json(e)}, {"summary", summary_json(s)}, {"expected_mean", mean},
                {"prediction", prediction_json(p)}};
  rep.rows.push_back({e.N, s.n_trials, s.n_degenerate, s.mean, s.variance, s.stderr_mean, s.stderr_variance, mean,
                      p.leading_value, s.variance / p.leading_value});
}

void cmd_predict(const json& cfg, Report& rep) {
  std::optional<EnsembleSpec> e;
  if (cfg.contains("ensemble")) e = config::parse_ensemble(cfg["ensemble"]);
  const int N = get_int(cfg, "N", e ? e->N : 0);
  if (N < 1) throw ConfigError("predict needs N or an ensemble");
  const std::string th = get_str(cfg, "theorem", "");
  if (!th.empty() && th != "number" && th != "volume" && th != "smooth" && th != "count")
    throw ConfigError("theorem must be number, volume, smooth or count");
  auto want = [&](const char* t) { return th.empty() || th == t; };
  json preds = json::array();
  rep.columns = {"theorem", "N", "m", "constant", "geometric_factor", "leading_value"};
  auto add = [&](const Prediction& p) {
    preds.push_back(prediction_json(p));
    rep.rows.push_back({to_string(p.theorem), p.N, p.m, p.constant, p.geometric_factor, p.leading_value});
  };
  if (cfg.contains("domain")) {
    const Domain d = config::parse_domain(cfg["domain"]);
    if (want("number")) add(predicted_number_variance(N, d));
    if (want("count")) add(predicted_expected_count(EnsembleSpec::su2(N), d));
    rep.result["area"] = area(d);
    rep.result["boundary_length"] = boundary_length(d);
    rep.result["expected_count"] = N * area(d) / kPi;
  }
  if (cfg.contains("boundary_volume") && want("volume")) add(predicted_volume_variance(N, get_int(cfg, "m", 1), get_real(cfg, "boundary_volume", 0.0)));
  if (cfg.contains("test_function") && want("smooth")) {
    const GeometryModel g = e ? e->geometry() : GeometryModel::flat();
    const TestFunction phi = config::parse_test_function(cfg["test_function"], g);
    add(predicted_smooth_variance(N, 1, phi.ddbar_norm_sq()));
    rep.result["laplacian_form"] = predicted_smooth_variance_laplacian(N, phi.laplacian_norm_sq());
  }
  if (preds.empty()) throw ConfigError("nothing to predict: give a domain, boundary_volume or test_function matching --theorem");
  rep.result["predictions"] = preds;
  rep.result["nu"] = {nu(1), nu(2), nu(3)};
  rep.result["kappa"] = {kappa(1), kappa(2), kappa(3)};
}

void cmd_bipotential(const json& cfg, Report& rep) {
  if (cfg.contains("domain") == cfg.contains("test_function"))
    throw ConfigError("bipotential needs exactly one of domain or test_function");
  VarianceEstimate v;
  if (cfg.contains("domain")) {
    const Domain d = config::parse_domain(cfg["domain"]);
    const EnsembleSpec e = ensemble_for_domain(cfg, d);
    const std::string mode = get_str(cfg, "mode", "offset");
    if (mode != "offset" && mode != "local") throw ConfigError("mode must be offset or local");
    v = variance_count(e, d, {mode == "offset" ? QuadratureMode::OffsetGrids : QuadratureMode::LocalRefinement,
                              get_int(cfg, "nodes", 0)});
    rep.result["prediction"] = prediction_json(predicted_number_variance(e.N, d));
  } else {
    if (!cfg.contains("ensemble")) throw ConfigError("missing field 'ensemble'");
    EnsembleSpec e = config::parse_ensemble(cfg["ensemble"]);
    const TestFunction phi = config::parse_test_function(cfg["test_function"], e.geometry());
    e = config::resolve_truncation(e, test_function_radius(phi));
    v = variance_smooth(e, phi, {get_real(cfg, "resolution", 1.0)});
    rep.result["prediction"] = prediction_json(predicted_smooth_variance(e.N, 1, phi.ddbar_norm_sq()));
  }
  rep.result["value"] = v.value;
  rep.result["imag"] = v.imag;
  rep.result["error_estimate"] = v.error_estimate;
  rep.columns = {"level", "value", "delta"};
  for (std::size_t i = 0; i < v.refinement.size(); ++i)
    rep.rows.push_back({v.refinement[i].nodes, v.refinement[i].value,
                        i ? v.refinement[i].value - v.refinement[i - 1].value : 0.0});
}

void cmd_kernel_check(const json& cfg, Report& rep) {
  if (!cfg.contains("ensemble")) throw ConfigError("missing field 'ensemble'");
  const EnsembleSpec base = config::parse_ensemble(cfg["ensemble"]);
  const auto Ns = get_int_list(cfg, "Ns", {16, 64, 256});
  const double bound = get_real(cfg, "bound", 2.0), b = get_real(cfg, "b", 2.0);
  if (!(bound > 0.0) || !(b > 0.0)) throw ConfigError("bound and b must be positive");
  rep.columns = {"N", "scaling_residual_max", "offdiagonal_max", "threshold_distance", "N_pow_minus_b2_half", "kernel_mass"};
  for (int N : Ns) {
    const EnsembleSpec e = EnsembleSpec::make(base.family, N, std::max(1, base.truncation));
    const auto s = scaling_residual_scan(e, 0.0, bound);
    const auto o = offdiagonal_decay_scan(e, b);
    rep.rows.push_back({N, s.max_abs, o.max_kernel, o.threshold_distance, std::pow(N, -0.5 * b * b), kernel_mass(e, 0.0)});
  }
}

void cmd_normality(const json& cfg, Report& rep) {
  if (!cfg.contains("ensemble") || !cfg.contains("test_function"))
    throw ConfigError("normality needs ensemble and test_function");
  EnsembleSpec e = config::parse_ensemble(cfg["ensemble"]);
  const TestFunction phi = config::parse_test_function(cfg["test_function"], e.geometry());
  e = config::resolve_truncation(e, test_function_radius(phi));
  const std::int64_t trials = get_trials(cfg, 2000);
  const std::uint64_t seed = get_seed(cfg);
  const int seeds = get_int(cfg, "seeds", 10);
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  const std::string stdz = get_str(cfg, "standardization", "bipotential");
  if (stdz != "bipotential" && stdz != "empirical") throw ConfigError("standardization must be bipotential or empirical");
  std::optional<std::pair<double, double>> ms;
  if (stdz == "bipotential") ms = std::make_pair(expected_linear_statistic(e, phi), std::sqrt(variance_smooth(e, phi).value));
  rep.columns = {"seed", "n_samples", "ks_statistic", "critical_value_5pct", "p_value", "pass", "mean_used", "sd_used"};
  int passes = 0;
  for (int k = 0; k < seeds; ++k) {
    std::vector<double> x;
    run_smooth_experiment(e, phi, trials, seed + k, get_int(cfg, "workers", 0), &x);
    const auto r = normality_test(x, ms);
    passes += r.passes();
    rep.rows.push_back({seed + k, r.n_samples, r.ks_statistic, r.critical_value_5pct, r.p_value, r.passes(), r.mean_used, r.sd_used});
  }
  rep.result = {{"ensemble", config::ensemble_json(e)}, {"standardization", stdz}, {"passes", passes}, {"seeds", seeds}};
}

void cmd_sweep(const json& cfg, Report& rep) {
  if (!cfg.contains("ensemble")) throw ConfigError("missing field 'ensemble'");
  const EnsembleSpec base = config::parse_ensemble(cfg["ensemble"]);
  SweepConfig sc;
  sc.family = base.family;
  sc.Ns = get_int_list(cfg, "Ns", {16, 64, 256});
  if (cfg.contains("domain")) sc.domain = config::parse_domain(cfg["domain"]);
  if (cfg.contains("test_function")) sc.test_function = config::parse_test_function(cfg["test_function"], base.geometry());
  sc.dilate = cfg.value("dilate", false);
  sc.n_trials = get_trials(cfg, 10000);
  sc.seed = get_seed(cfg);
  sc.workers = get_int(cfg, "workers", 0);
  sc.method = get_method(cfg);
  if (sc.domain && sc.domain->geometry().kind != base.geometry().kind)
    throw ConfigError("domain geometry does not match the ensemble");
  const auto rows = variance_vs_N_sweep(sc);
  rep.columns = {"N", "n_trials", "mean", "var", "stderr_mean", "stderr_var", "prediction", "ratio", "normalized"};
  for (const auto& r : rows)
    rep.rows.push_back({r.N, r.summary.n_trials, r.summary.mean, r.summary.variance, r.summary.stderr_mean,
                        r.summary.stderr_variance, r.predicted, r.summary.variance / r.predicted, r.normalized});
  rep.result["constant"] = sc.domain ? nu(1) : kappa(1);
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Check> run_selftest() {
  std::vector<Check> out;
  auto add = [&](std::string name, bool pass, const std::string& detail) { out.push_back({std::move(name), pass, detail}); };
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  for (int m = 1; m <= 3; ++m) {
    const double r = rel(nu(m), oracle::nu_integral(m));
    add("nu_" + std::to_string(m) + " closed form vs radial integral", r < 1e-8, std::to_string(r));
  }
  for (int m = 1; m <= 2; ++m) {
    const double r = rel(kappa(m), oracle::kappa_integral(m));
    add("kappa_" + std::to_string(m) + " closed form vs radial integral", r < 1e-8, std::to_string(r));
  }
  {
    const double r = std::abs(zeta(1.5) - zeta_eta(1.5));
    add("zeta(3/2) two methods", r < 1e-12, std::to_string(r));
  }
  {
    const double r = std::abs(oracle::mean_log_modulus() + 0.5 * std::numbers::egamma);
    add("mean log|c| = -gamma/2", r < 1e-10, std::to_string(r));
  }
  {
    double worst = 0.0;
    for (const EnsembleSpec& e : {EnsembleSpec::su2(7), EnsembleSpec::bf(5, 10), EnsembleSpec::su11(6, 10)}) {
      KernelEvaluator k(e);
      for (int i = 0; i < 20; ++i) {
        const cplx z = std::polar(0.6 * (i % 5 + 1) / 5.0, 0.37 * i), w = std::polar(0.5 * ((i + 2) % 5 + 1) / 5.0, 1.1 * i);
        worst = std::max(worst, rel(k.normalized(z, w), oracle::kernel_basis_sum(e, z, w)));
      }
    }
    add("normalized kernel vs basis sum", worst < 1e-10, std::to_string(worst));
  }
  {
    const auto est = pair_log_moment(0.5, 1000000, 7);
    const double z = std::abs(est.value - pair_log_moment_exact(0.5)) / est.stderr_;
    add("pair log moment identity at t=0.5 (1e6 draws)", z < 4.0, std::to_string(z) + " stderr");
  }
  {
    const auto phi = TestFunction::gaussian_bump(0.2, 0.5, GeometryModel::flat());
    const double r = rel(variance_smooth(EnsembleSpec::bf(16, 10), phi).value, oracle::bf_smooth_variance(16, 0.5));
    add("smooth variance quadrature vs flat reduction", r < 1e-8, std::to_string(r));
  }
  {
    const auto d = Domain::disk(0.0, 1.0, GeometryModel::fubini_study());
    const auto e = EnsembleSpec::su2(8);
    const double q = variance_count(e, d).value;
    const auto s = run_count_experiment(e, d, 40000, 11, 0);
    const double z = std::abs(s.variance - q) / s.stderr_variance;
    add("count variance Monte Carlo vs quadrature (SU2 N=8)", z < 4.0, std::to_string(z) + " stderr");
    const double zm = std::abs(s.mean - expected_count(e, d)) / s.stderr_mean;
    add("count mean vs N area / pi", zm < 4.0, std::to_string(zm) + " stderr");
  }
  return out;
}

void cmd_selftest(const json&, Report& rep, bool& ok) {
  const auto checks = run_selftest();
  rep.columns = {"check", "pass", "detail"};
  ok = true;
  for (const auto& c : checks) {
    ok = ok && c.pass;
    rep.rows.push_back({c.name, c.pass, c.detail});
    std::cerr << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
  }
  rep.result["all_passed"] = ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero statistics of Gaussian random polynomials on the sphere, plane and disk"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  std::map<std::string, std::string> config_path;
  std::map<std::string, bool> flags;
  const std::map<std::string, std::string> about = {
      {"simulate", "Monte Carlo zero count or linear statistic"},
      {"predict", "leading-order variance predictions"},
      {"bipotential", "variance by bipotential quadrature"},
      {"kernel-check", "scaling residual and off-diagonal decay scans"},
      {"normality", "Kolmogorov-Smirnov test of standardized linear statistics"},
      {"sweep", "Monte Carlo variance across degrees"},
      {"selftest", "internal consistency checks"}};
  for (const auto& [cmd, keys] : command_keys()) {
    CLI::App* sub = app.add_subcommand(cmd, about.at(cmd));
    sub->add_option("--config", config_path[cmd], "JSON run config; flags override its fields");
    for (const Key& k : keys) {
      const std::string flag = std::string("--") + k.name;
      if (k.kind == Kind::Flag) opts[cmd][k.name] = sub->add_flag(flag, flags[cmd + "." + k.name], k.help);
      else opts[cmd][k.name] = sub->add_option(flag, raw[cmd][k.name], k.help);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    json cfg = json::object();
    if (!config_path[cmd].empty()) {
      std::ifstream f(config_path[cmd]);
      if (!f) throw ConfigError("cannot read config file " + config_path[cmd]);
      try {
        f >> cfg;
      } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
      }
      if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
      if (cfg.contains("command") && cfg["command"] != cmd) throw ConfigError("config is for a different command");
      cfg.erase("command");
    }
    std::set<std::string> allowed;
    for (const Key& k : command_keys().at(cmd)) {
      allowed.insert(k.name);
      if (opts[cmd][k.name]->count() == 0) continue;
      const std::string& v = raw[cmd][k.name];
      switch (k.kind) {
        case Kind::Literal: cfg[k.name] = literal_value(v); break;
        case Kind::Int: cfg[k.name] = config::to_int(v); break;
        case Kind::Real: cfg[k.name] = config::to_double(v); break;
        case Kind::IntList: cfg[k.name] = v; break;
        case Kind::Flag: cfg[k.name] = flags[cmd + "." + k.name]; break;
      }
    }
    config::check_keys(cfg, allowed, "run config");
    const std::string out = get_str(cfg, "out", "");
    const std::string format = get_str(cfg, "format", "");
    if (!format.empty() && format != "json" && format != "csv") throw ConfigError("format must be json or csv");
    json resolved = cfg;
    resolved.erase("out");
    resolved.erase("format");
    resolved["command"] = cmd;
    Report rep;
    rep.meta = {{"version", std::string("gafzero ") + kVersion}, {"config", resolved}};
    bool ok = true;
    if (cmd == "simulate") cmd_simulate(cfg, rep);
    else if (cmd == "predict") cmd_predict(cfg, rep);
    else if (cmd == "bipotential") cmd_bipotential(cfg, rep);
    else if (cmd == "kernel-check") cmd_kernel_check(cfg, rep);
    else if (cmd == "normality") cmd_normality(cfg, rep);
    else if (cmd == "sweep") cmd_sweep(cfg, rep);
    else if (cmd == "selftest") cmd_selftest(cfg, rep, ok);
    rep.write(out, format);
    return ok ? 0 : 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
