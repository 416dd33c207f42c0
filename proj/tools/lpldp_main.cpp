// lpldp: command-line front end. Subcommands:
//   rate        - evaluate rate functions on a w-grid (CSV / JSON)
//   mc          - Monte Carlo tail estimates and direction diagnostics (JSONL)
//   variational - solve the annealed variational problem (JSON document)
//   selftest    - run the acceptance criteria battery
// Exit codes: 0 success, 1 validation error, 2 solver failure, 3 selftest
// failure. LP_LDP_THREADS is the fallback for --threads.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpldp/legendre.hpp"
#include "lpldp/mc.hpp"
#include "lpldp/measures.hpp"
#include "lpldp/mgf.hpp"
#include "lpldp/rates.hpp"
#include "lpldp/selftest.hpp"

namespace {

using nlohmann::json;
using namespace lpldp;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
  }
  if (pos != s.size() || std::isnan(v))
    throw std::invalid_argument(std::string(what) + ": cannot parse number '" + s + "'");
  return v;
}

PExponent parse_p(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return PExponent::infinity();
  return PExponent(to_double(s, "--p"));
}

std::vector<double> parse_w_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) return {to_double(parts[0], "--w")};
  if (parts.size() != 3)
    throw std::invalid_argument("--w: expected a single value or start:stop:step");
  const double a = to_double(parts[0], "--w");
  const double b = to_double(parts[1], "--w");
  const double st = to_double(parts[2], "--w");
  if (!(st > 0.0)) throw std::invalid_argument("--w: step must be > 0");
  if (b < a) throw std::invalid_argument("--w: stop must be >= start");
  const long k = std::lround(std::floor((b - a) / st + 1e-9));
  std::vector<double> out;
  out.reserve(std::size_t(k) + 1);
  for (long i = 0; i <= k; ++i) out.push_back(a + st * double(i));
  return out;
}

std::vector<int> parse_n_list(const std::string& s) {
  std::vector<int> out;
  for (const std::string& tok : split(s, ',')) {
    const double v = to_double(tok, "--n");
    const double rv = std::round(v);
    if (!(v >= 1.0) || v > 1e8 || std::fabs(v - rv) > 1e-6 * std::max(1.0, std::fabs(v)))
      throw std::invalid_argument("--n: '" + tok + "' is not an integer in [1, 1e8]");
    out.push_back(int(rv));
  }
  return out;
}

long long parse_reps(const std::string& s) {
  const double v = to_double(s, "--reps");
  const double rv = std::round(v);
  if (!(v >= 1.0) || v > 1e12 || std::fabs(v - rv) > 1e-6 * std::max(1.0, std::fabs(v)))
    throw std::invalid_argument("--reps: '" + s + "' is not an integer in [1, 1e12]");
  return static_cast<long long>(rv);
}

MeasureSpec parse_nu(const std::string& s) {
  if (s.empty() || s == "mu2") return MeasureSpec::generalized_normal(PExponent(2.0));
  if (s.rfind("dirac:", 0) == 0) return MeasureSpec::dirac(to_double(s.substr(6), "--nu"));
  if (s.rfind("uniform:", 0) == 0) {
    const auto parts = split(s.substr(8), ':');
    if (parts.size() != 2) throw std::invalid_argument("--nu: expected uniform:<a>:<b>");
    return MeasureSpec::uniform_interval(to_double(parts[0], "--nu"), to_double(parts[1], "--nu"));
  }
  if (s[0] == '{') return MeasureSpec::from_json(s);
  throw std::invalid_argument("--nu: expected mu2 | dirac:<x> | uniform:<a>:<b> | JSON measure");
}

MeasureSpec parse_gamma(const std::string& s) {
  if (s == "uniform") return MeasureSpec::uniform_interval(-1.0, 1.0);
  if (!s.empty() && s[0] == '{') return MeasureSpec::from_json(s);
  throw std::invalid_argument("--gamma: expected 'uniform' or a JSON measure");
}

SpeedSpec parse_speed(const std::string& s) {
  if (s == "n") return SpeedSpec::linear_n();
  if (s == "nsl" || s == "n/sqrt(log(n))") return SpeedSpec::n_over_sqrt_log_n();
  if (s.rfind("n^", 0) == 0) return SpeedSpec::power(to_double(s.substr(2), "--speed"));
  if (s.rfind("power:", 0) == 0) return SpeedSpec::power(to_double(s.substr(6), "--speed"));
  throw std::invalid_argument("--speed: expected n | n^<r> | n/sqrt(log(n))");
}

RateKind parse_kind(const std::string& s, const MeasureSpec& nu, double c) {
  if (s == "annealed") return RateKind::annealed();
  if (s == "quenched") return RateKind::quenched(nu);
  if (s == "cramer") return RateKind::cramer();
  if (s == "j2") return RateKind::j2();
  if (s == "quenched_p1") return RateKind::quenched_p1(c);
  if (s == "e1") return RateKind::e1_projection();
  if (s == "annealed_sub2") return RateKind::annealed_sub2();
  throw std::invalid_argument(
      "--kind: expected annealed | quenched | cramer | j2 | quenched_p1 | e1 | annealed_sub2");
}

DirectionSequence parse_dir(const std::string& s, std::uint64_t seed) {
  DirectionSequence d;
  if (s == "typical")
    d = DirectionSequence::typical(seed);
  else if (s == "column_coupled")
    d = DirectionSequence::column_coupled(seed);
  else if (s == "iota")
    d = DirectionSequence::iota();
  else if (s == "e1")
    d = DirectionSequence::e1();
  else if (s == "random_each_rep")
    d = DirectionSequence::random_each_rep(seed);
  else
    throw std::invalid_argument(
        "--dir: expected typical | column_coupled | iota | e1 | random_each_rep");
  d.seed = seed;  // replication streams key off the seed for every kind
  return d;
}

std::vector<double> parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw std::invalid_argument("--grid: expected min:max:points");
  const double lo = to_double(parts[0], "--grid");
  const double hi = to_double(parts[1], "--grid");
  const double np = to_double(parts[2], "--grid");
  const int n = int(std::round(np));
  if (!(hi > lo) || n < 3 || n > 100000)
    throw std::invalid_argument("--grid: need min < max and 3 <= points <= 1e5");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[std::size_t(i)] = lo + (hi - lo) * double(i) / double(n - 1);
  return x;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open output file: " + path);
  f << text;
  f.flush();
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

json jnum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// Scale weights by exp(-lam x^2) with the smallest lam >= 0 putting the
// second moment at or below 1, mirroring the solver's feasibility projection.
MeasureSpec unit_m2_grid_measure(const std::vector<double>& x, std::vector<double> m) {
  auto m2of = [&](double lam) {
    double s = 0.0, q = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double wj = m[j] * std::exp(-lam * x[j] * x[j]);
      s += wj;
      q += wj * x[j] * x[j];
    }
    return q / s;
  };
  double lam = 0.0;
  if (m2of(0.0) > 1.0) {
    double lo = 0.0, hi = 1e-4;
    while (m2of(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (m2of(mid) > 1.0 ? lo : hi) = mid;
    }
    lam = hi;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    m[j] *= std::exp(-lam * x[j] * x[j]);
    s += m[j];
  }
  for (double& v : m) v /= s;
  return MeasureSpec::grid_discrete(x, std::move(m));
}

MeasureSpec discretized_mu2(const std::vector<double>& x) {
  const double dx = x[1] - x[0];
  std::vector<double> m(x.size());
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    m[j] = normal_cdf(x[j] + dx / 2.0) - normal_cdf(x[j] - dx / 2.0);
    s += m[j];
  }
  for (double& v : m) v /= s;
  return unit_m2_grid_measure(x, std::move(m));
}

MeasureSpec discretized_spread_witness(const std::vector<double>& x) {
  const double dx = x[1] - x[0];
  const double s3 = std::sqrt(3.0);
  std::vector<double> m(x.size());
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = std::max(x[j] - dx / 2.0, -s3);
    const double hi = std::min(x[j] + dx / 2.0, s3);
    m[j] = std::max(0.0, hi - lo);
    s += m[j];
  }
  for (double& v : m) v /= s;
  return unit_m2_grid_measure(x, std::move(m));
}

// I_q(nu) + entropy cost for the p = inf objective with coordinate law gamma.
double quenched_inf_objective(const MeasureSpec& gamma, const MeasureSpec& nu, double w) {
  const double h = entropy_h(nu);
  if (!std::isfinite(h)) return kInf;
  if (w != 0.0) {
    const double reach = gamma.support_radius() * nu.abs_moment(1.0);
    if (std::fabs(w) >= reach) return kInf;
  }
  const FunctionalPtr f = make_psi_gamma_nu(gamma, nu);
  const LegendreResult lr = conjugate(*f, {w});
  if (lr.status == LegendreResult::Status::infinite) return kInf;
  return lr.value + h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"large-deviation rate functions for random projections of l^p balls"};
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();  // accept --seed / --threads after the subcommand name too

  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads,
                 "worker threads (0: LP_LDP_THREADS env, then logical cores)");
  app.add_option("--seed", seed, "master RNG seed (every seeded command is bit-reproducible)");

  // ---- rate -------------------------------------------------------------
  auto* rate_cmd = app.add_subcommand("rate", "evaluate rate functions on a w-grid");
  rate_cmd->configurable();
  std::string r_p = "2", r_w = "0:0.95:0.05", r_nu = "mu2", r_speed, r_format = "csv", r_out;
  std::vector<std::string> r_kinds;
  double r_c = 1.0;
  bool r_mixed = false;
  rate_cmd->add_option("--p", r_p, "exponent p (>= 1, or 'inf')");
  rate_cmd
      ->add_option("--kind", r_kinds,
                   "rate kind (repeatable): annealed quenched cramer j2 quenched_p1 e1 "
                   "annealed_sub2")
      ->required();
  rate_cmd->add_option("--nu", r_nu, "direction law for quenched: mu2 | dirac:<x> | "
                                     "uniform:<a>:<b> | JSON");
  rate_cmd->add_option("--c", r_c, "scale constant for quenched_p1 (> 0)");
  rate_cmd->add_option("--w", r_w, "w-grid start:stop:step, or a single value");
  rate_cmd->add_option("--speed", r_speed, "override speed: n | n^<r> | n/sqrt(log(n))");
  rate_cmd->add_flag("--allow-mixed-speed", r_mixed,
                     "allow co-plotting curves living at different speeds");
  rate_cmd->add_option("--format", r_format, "csv | json");
  rate_cmd->add_option("--out", r_out, "output file (default stdout)");
  // A subcommand named both on the command line and as a config-file section
  // gets its callback invoked once per trigger; run the work only once.
  bool rate_ran = false, mc_ran = false, var_ran = false, st_ran = false;
  rate_cmd->callback([&]() {
    if (std::exchange(rate_ran, true)) return;
    const PExponent p = parse_p(r_p);
    const MeasureSpec nu = parse_nu(r_nu);
    const std::vector<double> wg = parse_w_grid(r_w);
    std::optional<SpeedSpec> ov;
    if (!r_speed.empty()) ov = parse_speed(r_speed);
    if (r_format != "csv" && r_format != "json")
      throw std::invalid_argument("--format: expected csv or json");
    std::vector<RateKind> kinds;
    std::vector<SpeedSpec> speeds;
    for (const std::string& ks : r_kinds) {
      kinds.push_back(parse_kind(ks, nu, r_c));
      speeds.push_back(ov ? *ov : SpeedSpec::for_kind(kinds.back(), p));
    }
    for (std::size_t i = 1; i < speeds.size(); ++i)
      if (!(speeds[i] == speeds[0]) && !r_mixed)
        throw std::invalid_argument("curves live at different speeds (" + speeds[0].label() +
                                    " vs " + speeds[i].label() +
                                    "); pass --allow-mixed-speed to co-plot them");
    std::vector<RateCurve> curves;
    for (std::size_t i = 0; i < kinds.size(); ++i)
      curves.push_back(rate_curve(p, kinds[i], wg, speeds[i]));
    write_output(r_out, r_format == "csv" ? rate_curve_csv(curves) : rate_curve_json(curves));
  });

  // ---- mc ---------------------------------------------------------------
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo tail estimates and diagnostics");
  mc_cmd->configurable();
  std::string m_p = "2", m_n = "100", m_dir = "typical", m_method = "direct", m_check, m_out;
  std::string m_reps = "100000";
  double m_w = 0.0, m_r = 2.0;
  bool m_gc = false;
  mc_cmd->add_option("--p", m_p, "exponent p (>= 1, or 'inf')");
  mc_cmd->add_option("--w", m_w, "tail threshold: estimates P(W >= w)");
  mc_cmd->add_option("--n", m_n, "dimension grid, comma list (scientific notation ok)");
  mc_cmd->add_option("--reps", m_reps, "replications per n (scientific notation ok)");
  mc_cmd->add_option("--dir", m_dir,
                     "direction sequence: typical | column_coupled | iota | e1 | random_each_rep");
  mc_cmd->add_option("--method", m_method, "direct | tilted");
  mc_cmd->add_flag("--gc", m_gc, "emit the direction Glivenko-Cantelli report instead");
  mc_cmd->add_option("--r", m_r, "Wasserstein order for --gc (> 0)");
  mc_cmd->add_option("--check", m_check, "diagnostic check: max-scaling");
  mc_cmd->add_option("--out", m_out, "output file (default stdout)");
  mc_cmd->callback([&]() {
    if (std::exchange(mc_ran, true)) return;
    const std::vector<int> ns = parse_n_list(m_n);
    const DirectionSequence dir = parse_dir(m_dir, seed);
    if (!m_check.empty()) {
      if (m_check != "max-scaling")
        throw std::invalid_argument("--check: only 'max-scaling' is supported");
      const std::vector<double> v = max_coordinate_scaling(ns, dir);
      json doc;
      doc["schema"] = "lp-ldp.max-scaling.v1";
      doc["dir"] = dir.label();
      doc["seed"] = seed;
      doc["n"] = ns;
      json vals = json::array();
      for (double y : v) vals.push_back(jnum(y));
      doc["max_abs_coord_sqrt_n_over_log_n"] = vals;
      write_output(m_out, doc.dump(2) + "\n");
      return;
    }
    if (m_gc) {
      write_output(m_out, gc_report_json(gc_report(ns, dir, m_r)));
      return;
    }
    const PExponent p = parse_p(m_p);
    const long long reps = parse_reps(m_reps);
    const auto est = estimate_tail(p, m_w, ns, dir, reps, m_method, threads);
    write_output(m_out, mc_estimates_jsonl(est, p, dir.label(), seed));
  });

  // ---- variational ------------------------------------------------------
  auto* var_cmd =
      app.add_subcommand("variational", "solve the annealed variational problem over "
                                        "direction laws");
  var_cmd->configurable();
  std::string v_p, v_gamma, v_grid, v_out;
  double v_w = 0.0;
  var_cmd->add_option("--p", v_p, "exponent p in [2, inf) for the finite-p objective");
  var_cmd->add_option("--gamma", v_gamma,
                      "compact coordinate law for the p = inf objective: uniform | JSON");
  var_cmd->add_option("--w", v_w, "projection value")->required();
  var_cmd->add_option("--grid", v_grid, "discretization grid min:max:points (default -6:6:241)");
  var_cmd->add_option("--out", v_out, "output file (default stdout)");
  var_cmd->callback([&]() {
    if (std::exchange(var_ran, true)) return;
    if (v_p.empty() == v_gamma.empty())
      throw std::invalid_argument("variational: pass exactly one of --p / --gamma");
    const std::vector<double> x = v_grid.empty() ? default_grid() : parse_grid(v_grid);
    json doc;
    doc["schema"] = "lp-ldp.variational.v1";
    doc["w"] = v_w;
    VariationalSolution vs;
    if (!v_p.empty()) {
      const PExponent p = parse_p(v_p);
      vs = variational_annealed(p, v_w, x);
      doc["p"] = p.is_inf() ? json("inf") : json(p.value());
    } else {
      const MeasureSpec gamma = parse_gamma(v_gamma);
      vs = variational_annealed_gamma(gamma, v_w, x);
      doc["gamma"] = json::parse(gamma.to_json());
      doc["objective_at_discretized_mu2"] =
          jnum(quenched_inf_objective(gamma, discretized_mu2(x), v_w));
      doc["objective_at_spread_witness"] =
          jnum(quenched_inf_objective(gamma, discretized_spread_witness(x), v_w));
    }
    doc["value"] = jnum(vs.value);
    doc["kkt_residual"] = vs.kkt_residual;
    doc["objective_trace"] = vs.objective_trace;
    doc["minimizer"] = json::parse(vs.minimizer.to_json());
    write_output(v_out, doc.dump(2) + "\n");
  });

  // ---- selftest ----------------------------------------------------------
  auto* st_cmd = app.add_subcommand("selftest", "run the acceptance criteria battery");
  st_cmd->configurable();
  std::string s_only;
  bool s_fault = false;
  int st_code = 0;
  st_cmd->add_option("--only", s_only, "run only criteria whose name contains this substring");
  st_cmd->add_flag("--inject-quadrature-fault", s_fault, "perturb one quadrature weight")
      ->group("");
  st_cmd->callback([&]() {
    if (std::exchange(st_ran, true)) return;
    if (!s_only.empty()) {
      bool any = false;
      for (const std::string& nm : lpldp::selftest::criterion_names())
        any = any || nm.find(s_only) != std::string::npos;
      if (!any)
        throw std::invalid_argument("selftest --only: no criterion matches '" + s_only + "'");
    }
    st_code = lpldp::selftest::run_all(s_only, threads, s_fault, std::cout);
  });

  try {
    app.parse(argc, argv);
    return st_code;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}
