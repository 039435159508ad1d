#include "lpdist/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpdist/clt_theory.hpp"
#include "lpdist/errors.hpp"
#include "lpdist/ldp_rate.hpp"
#include "lpdist/stats.hpp"

namespace lpdist {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed six decimals with trailing zeros trimmed: 0.25, 1.333333, 0.222222.
std::string fmt_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string domain_name(DomainKind d) {
  return d == DomainKind::BallBoundary ? "boundary" : "interior";
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Sample: return "sample";
    case Command::CltCheck: return "clt-check";
    case Command::SphereExact: return "sphere-exact";
    case Command::Rate: return "rate";
    case Command::Tail: return "tail";
    default: return "help";
  }
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json tolerances_for(Command c) {
  switch (c) {
    case Command::SphereExact:
      return json{{"sphere_cdf_abs", 1e-10}, {"reg_inc_beta_abs", 1e-12}};
    case Command::Rate:
      return json{{"mgf_quadrature_rel", 1e-9},
                  {"cube_quadrature_rel", 1e-11},
                  {"golden_section_argument", 1e-7},
                  {"conjugate_escape_threshold", 1e4}};
    case Command::CltCheck:
      return json{{"decision_margin_se", 10.0}};
    default:
      return json::object();
  }
}

json config_echo(const RunConfig& cfg) {
  json j{{"command", command_name(cfg.command)}, {"p", cfg.p.to_string()}};
  switch (cfg.command) {
    case Command::Sample:
    case Command::CltCheck:
      j["n"] = cfg.n;
      j["domain"] = domain_name(cfg.domain);
      j["trials"] = cfg.trials;
      j["seed"] = cfg.seed;
      j["workers"] = cfg.workers;
      break;
    case Command::SphereExact:
      j.erase("p");
      j["n"] = cfg.n;
      if (cfg.t) j["t"] = *cfg.t;
      break;
    case Command::Rate:
      j["domain"] = domain_name(cfg.domain);
      j["workers"] = cfg.workers;
      if (cfg.z_point) {
        j["z"] = *cfg.z_point;
      } else {
        j["z_min"] = cfg.z_min;
        j["z_max"] = cfg.z_max;
        j["steps"] = cfg.steps;
      }
      break;
    case Command::Tail:
      j["n"] = cfg.n;
      j["domain"] = domain_name(cfg.domain);
      j["trials"] = cfg.trials;
      j["seed"] = cfg.seed;
      j["workers"] = cfg.workers;
      j["z"] = cfg.z_list;
      break;
    default:
      break;
  }
  if (!cfg.csv_path.empty()) j["csv"] = cfg.csv_path;
  if (!cfg.json_path.empty()) j["json"] = cfg.json_path;
  return j;
}

json make_manifest(const RunConfig& cfg, double wall_seconds) {
  return json{{"version", kVersion},
              {"timestamp_utc", iso8601_utc_now()},
              {"wall_clock_seconds", wall_seconds},
              {"config", config_echo(cfg)},
              {"tolerances", tolerances_for(cfg.command)}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

// CSV outputs carry their manifest in a sidecar file; JSON reports embed it.
void write_csv_with_manifest(const RunConfig& cfg, const std::string& csv,
                             double wall_seconds) {
  write_text_file(cfg.csv_path, csv);
  write_text_file(cfg.csv_path + ".manifest.json",
                  make_manifest(cfg, wall_seconds).dump(2) + "\n");
}

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

int run_sample(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const SampleBatch batch =
      run_batch(cfg.p, cfg.n, cfg.domain, cfg.trials, cfg.seed, cfg.workers);
  const MomentSummary m = empirical_moments(batch);
  if (!cfg.csv_path.empty()) {
    std::string csv = "trial,value\n";
    for (uint64_t i = 0; i < batch.values.size(); ++i) {
      csv += std::to_string(i);
      csv += ',';
      csv += fmt17(batch.values[i]);
      csv += '\n';
    }
    write_csv_with_manifest(cfg, csv, elapsed_seconds(start));
  }
  std::cout << "p=" << cfg.p.to_string() << " n=" << cfg.n
            << " domain=" << domain_name(cfg.domain) << " trials=" << cfg.trials
            << " seed=" << cfg.seed << " mean=" << fmt17(m.mean)
            << " variance=" << fmt17(m.variance) << "\n";
  return 0;
}

int run_clt_check(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const CltReport r =
      clt_report(cfg.p, cfg.n, cfg.domain, cfg.trials, cfg.seed, cfg.workers);

  std::cout << "p=" << cfg.p.to_string() << " n=" << cfg.n
            << " domain=" << domain_name(cfg.domain) << " trials=" << cfg.trials
            << " seed=" << cfg.seed << "\n";
  std::cout << "center=" << fmt17(r.constants.center)
            << " sigma2=" << fmt17(r.constants.sigma2);
  if (r.constants.sigma2_alternate) {
    std::cout << " sigma2_alternate=" << fmt17(*r.constants.sigma2_alternate);
  }
  std::cout << "\n";
  std::cout << "mean_t=" << fmt17(r.mean_t) << " se_mean_t=" << fmt17(r.se_mean_t)
            << " center_ok=" << (r.center_ok ? "yes" : "no") << "\n";
  std::cout << "var_z=" << fmt17(r.var_z) << " se_var_z=" << fmt17(r.se_var_z)
            << " ks=" << fmt17(r.ks_vs_theory);
  if (r.ks_vs_alternate) {
    std::cout << " ks_alternate=" << fmt17(*r.ks_vs_alternate)
              << " decision=" << r.sigma2_decision
              << " margin_se=" << fmt17(r.decision_margin_se);
  }
  std::cout << "\n";

  if (!cfg.json_path.empty()) {
    json theory{{"p", cfg.p.to_string()},
                {"center", r.constants.center},
                {"sigma2", r.constants.sigma2},
                {"sigma2_alternate", r.constants.sigma2_alternate
                                         ? json(*r.constants.sigma2_alternate)
                                         : json(nullptr)}};
    json empirical{{"n", r.n},
                   {"domain", domain_name(r.domain)},
                   {"trials", r.trials},
                   {"seed", r.seed},
                   {"mean_t", r.mean_t},
                   {"se_mean_t", r.se_mean_t},
                   {"mean_z", r.mean_z},
                   {"var_z", r.var_z},
                   {"se_var_z", r.se_var_z},
                   {"center_ok", r.center_ok},
                   {"sigma2_decision", r.sigma2_decision},
                   {"decision_margin_se", r.decision_margin_se}};
    json doc{{"theory", theory},
             {"empirical", empirical},
             {"ks", r.ks_vs_theory},
             {"ks_alternate", r.ks_vs_alternate ? json(*r.ks_vs_alternate) : json(nullptr)},
             {"manifest", make_manifest(cfg, elapsed_seconds(start))}};
    write_text_file(cfg.json_path, doc.dump(2) + "\n");
  }
  return 0;
}

int run_sphere_exact(const RunConfig& cfg) {
  const double mean = sphere_mean(cfg.n);
  const double var = sphere_variance(cfg.n);
  std::string line;
  if (cfg.t) {
    line += "cdf=" + fmt_fixed6(sphere_cdf(cfg.n, *cfg.t)) + " ";
  }
  line += "mean=" + fmt_fixed6(mean) + " var=" + fmt_fixed6(var);
  std::cout << line << "\n";
  if (!cfg.json_path.empty()) {
    json doc{{"n", cfg.n},
             {"mean", mean},
             {"variance", var},
             {"manifest", make_manifest(cfg, 0.0)}};
    if (cfg.t) {
      doc["t"] = *cfg.t;
      doc["cdf"] = sphere_cdf(cfg.n, *cfg.t);
    }
    write_text_file(cfg.json_path, doc.dump(2) + "\n");
  }
  return 0;
}

// Pointwise rate dispatch shared by the rate command's single-z mode.
ExtendedReal rate_at(const PIndex& p, DomainKind domain, double z, RateInfo* info) {
  if (p.is_inf()) return cube_rate(z, info);
  if (domain == DomainKind::BallBoundary) return rate_boundary(p.finite(), z, info);
  return rate_ball(p.finite(), z, info);
}

int run_rate(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.z_point) {
    RateInfo info;
    const ExtendedReal r = rate_at(cfg.p, cfg.domain, *cfg.z_point, &info);
    std::cout << "z=" << fmt17(*cfg.z_point) << " rate=" << r.to_string()
              << " inner_argmin=" << fmt17(info.inner_argmin)
              << " converged=" << (info.converged ? 1 : 0) << "\n";
    return info.converged ? 0 : 1;
  }

  const RateCurve curve =
      rate_curve(cfg.p, cfg.domain, cfg.z_min, cfg.z_max, cfg.steps, cfg.workers);
  std::string csv = "z,rate,inner_argmin,converged\n";
  bool all_converged = true;
  for (size_t i = 0; i < curve.z_grid.size(); ++i) {
    csv += fmt17(curve.z_grid[i]);
    csv += ',';
    csv += curve.rates[i].to_string();
    csv += ',';
    csv += fmt17(curve.inner_argmin[i]);
    csv += ',';
    csv += curve.converged[i] ? '1' : '0';
    csv += '\n';
    if (!curve.converged[i]) all_converged = false;
  }
  if (!cfg.csv_path.empty()) {
    write_csv_with_manifest(cfg, csv, elapsed_seconds(start));
    std::cout << "wrote " << cfg.csv_path << " (" << curve.z_grid.size() << " points)\n";
  } else {
    std::cout << csv;
  }
  if (!all_converged) {
    std::cerr << "rate: one or more grid points did not converge (see the"
                 " converged column)\n";
    return 1;
  }
  return 0;
}

int run_tail(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<TailEstimate> est = empirical_tail_rates(
      cfg.p, cfg.n, cfg.domain, cfg.z_list, cfg.trials, cfg.seed, cfg.workers);
  std::string csv = "z,rate,hits,censored\n";
  for (const TailEstimate& e : est) {
    std::cout << "z=" << fmt17(e.z) << " rate=" << fmt17(e.rate) << " hits=" << e.hits
              << " censored=" << (e.censored ? 1 : 0) << "\n";
    csv += fmt17(e.z);
    csv += ',';
    csv += fmt17(e.rate);
    csv += ',';
    csv += std::to_string(e.hits);
    csv += ',';
    csv += e.censored ? '1' : '0';
    csv += '\n';
  }
  if (!cfg.csv_path.empty()) {
    write_csv_with_manifest(cfg, csv, elapsed_seconds(start));
  }
  return 0;
}

PIndex parse_p_flag(const std::string& text) {
  try {
    return parse_pindex(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--p: ") + e.what());
  }
}

DomainKind parse_domain_flag(const std::string& text) {
  if (text == "boundary") return DomainKind::BallBoundary;
  if (text == "interior") return DomainKind::BallInterior;
  throw UsageError("--domain: expected 'boundary' or 'interior', got '" + text + "'");
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& argv) {
  CLI::App app{"Distance statistics of random points in l_p^n balls: exact"
               " samplers, CLT constants, the exact sphere law, and numerical"
               " large-deviation rate functions."};
  app.name("lpdist");
  app.require_subcommand(0, 1);

  std::string p_text = "2";
  std::string domain_text;
  RunConfig cfg;
  double t_value = 0.0;
  double z_value = 0.0;

  CLI::App* sample = app.add_subcommand(
      "sample", "Draw the normalized pair distance repeatedly; optional CSV output");
  sample->add_option("--p", p_text, "norm exponent: real >= 1 or 'inf'")->required();
  sample->add_option("--n", cfg.n, "dimension")->required();
  sample->add_option("--domain", domain_text, "boundary | interior")->required();
  sample->add_option("--trials", cfg.trials, "number of draws")->required();
  sample->add_option("--seed", cfg.seed, "stream seed (default 0)");
  sample->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
  sample->add_option("--csv", cfg.csv_path, "write trial,value rows here");

  CLI::App* clt = app.add_subcommand(
      "clt-check", "Compare a batch against the limiting normal law");
  clt->add_option("--p", p_text, "norm exponent: real >= 1 or 'inf'")->required();
  clt->add_option("--n", cfg.n, "dimension")->required();
  clt->add_option("--domain", domain_text, "boundary | interior")->required();
  clt->add_option("--trials", cfg.trials, "number of draws (>= 100)")->required();
  clt->add_option("--seed", cfg.seed, "stream seed (default 0)");
  clt->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
  clt->add_option("--json", cfg.json_path, "write the full report here");

  CLI::App* sphere = app.add_subcommand(
      "sphere-exact", "Exact distance law on the Euclidean unit sphere");
  sphere->add_option("--n", cfg.n, "dimension (>= 2)")->required();
  CLI::Option* t_opt = sphere->add_option("--t", t_value, "evaluate the CDF at this point");
  sphere->add_option("--json", cfg.json_path, "write the values here");

  CLI::App* rate = app.add_subcommand(
      "rate", "Large-deviation rate function on a grid or at a single point");
  rate->add_option("--p", p_text, "norm exponent: real >= 2 or 'inf'")->required();
  rate->add_option("--domain", domain_text, "boundary | interior")->required();
  CLI::Option* z_opt = rate->add_option("--z", z_value, "single evaluation point");
  rate->add_option("--z-min", cfg.z_min, "grid start");
  rate->add_option("--z-max", cfg.z_max, "grid end");
  rate->add_option("--steps", cfg.steps, "grid size (>= 2)");
  rate->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
  rate->add_option("--csv", cfg.csv_path, "write z,rate,inner_argmin,converged rows here");

  CLI::App* tail = app.add_subcommand(
      "tail", "Empirical tail-decay rate -ln P(T >= z)/n on a shared sample");
  tail->add_option("--p", p_text, "norm exponent: real >= 1 or 'inf'")->required();
  tail->add_option("--n", cfg.n, "dimension")->required();
  tail->add_option("--domain", domain_text, "boundary | interior")->required();
  tail->add_option("--z", cfg.z_list, "threshold(s), each > 0")->required();
  tail->add_option("--trials", cfg.trials, "number of draws")->required();
  tail->add_option("--seed", cfg.seed, "stream seed (default 0)");
  tail->add_option("--workers", cfg.workers, "worker threads (default: all cores)");
  tail->add_option("--csv", cfg.csv_path, "write z,rate,hits,censored rows here");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    cfg.command = Command::Help;
    cfg.help_text = app.help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (sample->parsed()) cfg.command = Command::Sample;
  else if (clt->parsed()) cfg.command = Command::CltCheck;
  else if (sphere->parsed()) cfg.command = Command::SphereExact;
  else if (rate->parsed()) cfg.command = Command::Rate;
  else if (tail->parsed()) cfg.command = Command::Tail;
  else {
    cfg.command = Command::Help;
    cfg.help_text = app.help();
    return cfg;
  }

  if (cfg.command != Command::SphereExact) cfg.p = parse_p_flag(p_text);
  if (!domain_text.empty()) cfg.domain = parse_domain_flag(domain_text);
  if (*t_opt) cfg.t = t_value;
  if (*z_opt) cfg.z_point = z_value;

  if (const char* env = std::getenv("LPDIST_WORKERS")) {
    char* end = nullptr;
    const long w = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || w < 1) {
      throw UsageError("LPDIST_WORKERS: expected a positive integer, got '" +
                       std::string(env) + "'");
    }
    cfg.workers = static_cast<int>(w);
  }
  if (cfg.workers < 0) throw UsageError("--workers: must be positive");

  // Validate against the target operation's preconditions now, so a bad
  // request can never leave partial output behind.
  switch (cfg.command) {
    case Command::Sample:
    case Command::Tail:
      if (cfg.n < 1) throw UsageError("--n: dimension must be >= 1");
      if (cfg.trials < 1) throw UsageError("--trials: must be >= 1");
      break;
    case Command::CltCheck:
      if (cfg.n < 1) throw UsageError("--n: dimension must be >= 1");
      if (cfg.trials < 100) throw UsageError("--trials: the report needs >= 100 draws");
      break;
    case Command::SphereExact:
      if (cfg.n < 2) throw UsageError("--n: the sphere law needs n >= 2");
      break;
    case Command::Rate: {
      if (!cfg.p.is_inf() && cfg.p.finite() < 2.0) {
        throw UsageError("--p: LDP requires p ≥ 2 (no rate function exists below 2)");
      }
      if (cfg.p.is_inf() && cfg.domain == DomainKind::BallBoundary) {
        throw UsageError("--domain: no boundary rate function is available for p=inf;"
                         " use --domain interior");
      }
      if (!cfg.z_point) {
        if (cfg.steps < 2) throw UsageError("--steps: need >= 2 grid points (or pass --z)");
        if (!(cfg.z_min < cfg.z_max)) throw UsageError("--z-min/--z-max: need z-min < z-max");
      }
      break;
    }
    default:
      break;
  }
  if (cfg.command == Command::Tail) {
    for (double z : cfg.z_list) {
      if (!(z > 0.0)) throw UsageError("--z: thresholds must be positive");
    }
  }
  const double work = static_cast<double>(cfg.trials) * static_cast<double>(cfg.n);
  if ((cfg.command == Command::Sample || cfg.command == Command::CltCheck) &&
      work > kSampleBudget) {
    throw UsageError("--trials: trials*n exceeds the stored-batch budget (" +
                     fmt17(kSampleBudget) + "); use the tail command's streaming path");
  }
  return cfg;
}

int run_command(const RunConfig& cfg) {
  try {
    switch (cfg.command) {
      case Command::Help:
        std::cout << cfg.help_text;
        return 0;
      case Command::Sample:
        return run_sample(cfg);
      case Command::CltCheck:
        return run_clt_check(cfg);
      case Command::SphereExact:
        return run_sphere_exact(cfg);
      case Command::Rate:
        return run_rate(cfg);
      case Command::Tail:
        return run_tail(cfg);
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << " (iterations=" << e.iterations
              << ", residual=" << e.residual << ")\n";
    return 1;
  } catch (const UsageError&) {
    throw;  // parse-stage errors belong to the caller
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace lpdist
