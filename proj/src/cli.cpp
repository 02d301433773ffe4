#include "ruelle/cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ruelle/convexity.hpp"
#include "ruelle/flows.hpp"
#include "ruelle/orbits.hpp"
#include "ruelle/toric.hpp"

namespace ruelle {

namespace {

QuadratureSpec quadrature(const RunConfig& c) {
  if (!(c.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "--tol must be > 0");
  QuadratureSpec q;
  q.rel_tol = c.tol;
  return q;
}

Json base_config(const RunConfig& c, const MomentRegion& region) {
  Json j;
  j["command"] = c.command;
  if (!c.check.empty()) j["check"] = c.check;
  j["region"] = region_to_json(region);
  return j;
}

Provenance toric_provenance(const Estimate& e) {
  return e.closed_form ? Provenance::ClosedForm : Provenance::Quadrature;
}

void put(Report& r, const std::string& name, const Estimate& e) {
  r.quantity(name, e.value, toric_provenance(e), e.error);
}

// Largest simplex lattice resolution with at most `target` points.
int dump_resolution(int n, long target) {
  auto count = [&](int m) {
    double c = 1.0;
    for (int q = 1; q < n; ++q) c = c * (m + q) / q;
    return c;
  };
  int m = 1;
  while (count(m + 1) <= double(target)) ++m;
  return m;
}

void dump_profile(const RunConfig& c, const MomentRegion& region) {
  if (c.dump.empty()) return;
  std::ostringstream os;
  write_profile_csv(region, dump_resolution(region.dim(), 2000), os);
  write_atomic(c.dump, os.str());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Report cmd_toric(const RunConfig& c) {
  const MomentRegion region = load_region(c.region);
  const QuadratureSpec q = quadrature(c);
  Json config = base_config(c, region);
  config["tol"] = c.tol;
  Report r("toric", config);
  put(r, "ruelle", ruelle_invariant_toric(region, q));
  put(r, "volume", volume_toric(region, q));
  const LaplacianEstimate s = laplacian_functional(region, q);
  put(r, "laplacian", s);
  r.flag("laplacian_non_integrable", s.non_integrable_hessian);
  const MonotonicityResult mono = is_strictly_monotone(region);
  r.flag("strictly_monotone", mono.monotone);
  const ConcavityResult conc = concavity_certificate(region, 2000, c.seed);
  r.flag("concave", conc.concave);
  if (conc.concave) {
    const SystoleResult sys = systole_concave(region);
    r.quantity("systole", sys.value,
               region.kind() == RegionKind::Ellipsoid ? Provenance::ClosedForm
                                                      : Provenance::Optimization);
    r.quantity("systole_brackets", sys.evaluated);
    r.flag("systole_complete", sys.complete);
  }
  dump_profile(c, region);
  return r;
}

Report cmd_estimate_flow(const RunConfig& c) {
  const MomentRegion region = load_region(c.region);
  if (c.T < 0.0) throw Error(ErrorCode::InvalidArgument, "--T must be >= 0");
  if (c.samples < 1) throw Error(ErrorCode::InvalidArgument, "--samples must be >= 1");
  Json config = base_config(c, region);
  config["T"] = c.T;
  config["samples"] = c.samples;
  config["seed"] = c.seed;
  config["tol"] = c.tol;
  Report r("estimate-flow", config);
  const ToricField field(region);
  const Estimate toric = ruelle_invariant_toric(region, quadrature(c));
  put(r, "ruelle_toric", toric);
  if (c.T == 0.0) {
    r.attach("diagnostic", "T = 0: no flow integrated, estimate omitted");
    return r;
  }
  const RuelleEstimate est = ruelle_estimate(field, c.T, c.samples, c.seed);
  r.quantity("estimate", est.estimate, Provenance::MonteCarlo, est.stderr_);
  r.quantity("mean_density", est.mean_density, Provenance::MonteCarlo,
             est.density_stderr);
  r.quantity("volume", est.volume,
             est.volume_stderr > 0 ? Provenance::MonteCarlo : Provenance::Quadrature,
             est.volume_stderr);
  r.quantity("discretization", est.discretization, Provenance::MonteCarlo);
  for (std::size_t i = 0; i < est.convergence.size(); ++i) {
    const auto& p = est.convergence[i];
    const std::string key = "estimate_T" + std::to_string(i + 1) + "of" +
                            std::to_string(est.convergence.size());
    r.quantity(key, p.estimate, Provenance::MonteCarlo, p.stderr_);
  }
  r.quantity("samples", est.samples);
  r.quantity("attempts", est.attempts);
  r.quantity("failed_samples", est.failed_samples);
  const double spread = 3.0 * std::hypot(est.stderr_, est.discretization * est.volume) +
                        toric.error;
  const double gap = std::abs(est.estimate - toric.value);
  r.quantity("gap_in_stderr", est.stderr_ > 0 ? gap / est.stderr_ : 0.0,
             Provenance::MonteCarlo);
  r.assertion("agrees_with_toric", gap <= spread,
              "|estimate - toric| = " + fmt(gap) + ", allowed " + fmt(spread));

  if (!c.dump.empty()) {
    Vector z;
    long draws = 0;
    if (sample_domain(field, c.seed, 0, 200, z, draws)) {
      IntegratorOptions io;
      const double dt = automatic_step(field, z, io);
      io.record_every = std::max(1L, long(std::ceil(c.T / dt / 1000.0)));
      std::ostringstream os;
      write_trajectory_csv(integrate_cocycle(field, z, c.T, dt, io), os);
      write_atomic(c.dump, os.str());
    }
  }
  return r;
}

Report cmd_counterexample(const RunConfig& c) {
  const MomentRegion base = load_region(c.region);
  Json config = base_config(c, base);
  config["C_target"] = c.c_target;
  config["epsilon"] = c.epsilon;
  config["seed"] = c.seed;
  config["tol"] = c.tol;
  Report r("counterexample", config);
  CounterexampleOptions opts;
  opts.seed = c.seed;
  opts.quadrature.rel_tol = std::min(c.tol, 1e-7);
  const CounterexampleSpec spec = build_counterexample(base, c.c_target, c.epsilon, opts);
  const CounterexampleReport& v = spec.report;
  r.quantity("A", spec.A, Provenance::Optimization);
  r.quantity("B", spec.B, Provenance::Exact);
  r.quantity("collar", spec.delta, Provenance::Exact);
  r.quantity("volume_base", v.volume_base, Provenance::Quadrature);
  r.quantity("volume", v.volume, Provenance::Quadrature, v.volume_error);
  r.quantity("ruelle", v.ruelle, Provenance::Quadrature, v.ruelle_error);
  r.quantity("ruelle_tail_bound", v.tail_bound, Provenance::ClosedForm);
  r.quantity("systole_base", v.systole_base, Provenance::Optimization);
  r.quantity("systole", v.systole, Provenance::Optimization);
  r.quantity("concavity_chords", v.concavity_chords);
  r.flag("unchanged", spec.unchanged);
  r.flag("systole_complete", v.systole_complete);
  r.assertion("volume_within_epsilon", v.volume_ok);
  r.assertion("ruelle_at_least_target", v.ruelle_ok);
  r.assertion("systole_not_decreased", v.systole_ok);
  r.assertion("ruelle_above_tail_bound", v.tail_ok);
  r.assertion("contains_base", v.contains_base);
  r.assertion("concave", v.concave);
  r.attach("counterexample", counterexample_to_json(spec));
  dump_profile(c, spec.result);
  return r;
}

Report cmd_check(const RunConfig& c) {
  const MomentRegion region = load_region(c.region);
  Json config = base_config(c, region);
  if (c.check == "main-inequality") {
    config["tol"] = c.tol;
    Report r("check", config);
    const InequalityReport m = check_main_inequality(region, quadrature(c));
    const bool closed = region.kind() == RegionKind::Ellipsoid;
    const Provenance p = closed && m.ruelle_error == 0.0 ? Provenance::ClosedForm
                                                          : Provenance::Quadrature;
    r.quantity("ruelle", m.ruelle, p, m.ruelle_error);
    r.quantity("systole", m.systole, Provenance::ClosedForm);
    r.quantity("volume", m.volume, p, m.volume_error);
    r.quantity("log_constant", m.constant.log_value, Provenance::ClosedForm);
    r.quantity("constant", m.constant.value, Provenance::ClosedForm);
    r.quantity("log_lhs", m.log_lhs, p);
    r.quantity("log_rhs", m.log_rhs, p);
    r.quantity("log_margin", m.margin, p);
    r.flag("overflowing_constant", m.constant.overflowing);
    r.assertion("satisfied", m.satisfied);
    return r;
  }
  if (c.check == "sandwich") {
    if (c.outer.empty()) throw Error(ErrorCode::InvalidArgument, "sandwich needs --outer");
    const MomentRegion outer = load_region(c.outer);
    config["outer"] = region_to_json(outer);
    if (c.L) config["L"] = *c.L;
    config["tol"] = c.tol;
    config["seed"] = c.seed;
    Report r("check", config);
    SandwichOptions opts;
    opts.seed = c.seed;
    opts.quadrature = quadrature(c);
    const SandwichReport s = sandwich_check(region, outer, c.L, opts);
    r.quantity("laplacian_inner", s.laplacian_inner, Provenance::Quadrature,
               s.laplacian_inner_error);
    r.quantity("laplacian_outer", s.laplacian_outer, Provenance::Quadrature,
               s.laplacian_outer_error);
    r.quantity("L", s.L, c.L ? Provenance::Exact : Provenance::Optimization);
    r.quantity("L_computed", s.L_computed, Provenance::Optimization);
    r.quantity("log_factor", s.log_factor, Provenance::ClosedForm);
    r.quantity("log_ratio", s.log_ratio, Provenance::Quadrature);
    r.quantity("grid_points", s.grid_points);
    r.assertion("holds", s.holds);
    return r;
  }
  if (c.check == "trace-bound") {
    if (!(c.T > 0.0)) throw Error(ErrorCode::InvalidArgument, "trace-bound needs --T > 0");
    config["T"] = c.T;
    config["samples"] = c.samples;
    config["seed"] = c.seed;
    Report r("check", config);
    const ToricField field(region);
    const TraceBoundReport t = trace_bound_check(field, c.T, c.samples, c.seed);
    r.quantity("ruelle", t.ruelle.estimate, Provenance::MonteCarlo, t.ruelle.stderr_);
    r.quantity("trace_integral", t.trace_integral, Provenance::MonteCarlo, t.trace_stderr);
    r.quantity("bound", t.bound, Provenance::MonteCarlo, t.bound_stderr);
    r.quantity("min_eigenvalue", t.min_eigenvalue, Provenance::MonteCarlo);
    r.assertion("holds", t.holds);
    return r;
  }
  if (c.check == "dyn-convexity") {
    config["t_max"] = c.t_max;
    Report r("check", config);
    const int n = region.dim();
    const MonotonicityResult mono = is_strictly_monotone(region);
    r.flag("strictly_monotone", mono.monotone);
    if (!mono.monotone) {
      r.assertion("strictly_monotone", false, "gradient component " +
                                                  std::to_string(mono.component) +
                                                  " is not positive");
      return r;
    }
    const OrbitEnumeration e = enumerate_orbits(region, c.t_max);
    long violations = 0, min_index = std::numeric_limits<long>::max();
    for (const auto& rec : e.records) {
      const IndexResult idx = lcz_toric_orbit(rec, region);
      if (!idx.unbounded) min_index = std::min(min_index, idx.value);
      if (!idx.at_least(n)) ++violations;
    }
    r.quantity("orbits", long(e.records.size()));
    r.quantity("candidates", e.candidates);
    r.quantity("threshold", long(n));
    if (!e.records.empty() && min_index != std::numeric_limits<long>::max()) {
      r.quantity("min_index_bound", min_index);
    }
    r.quantity("violations", violations);
    r.flag("truncated", e.truncated);
    r.assertion("indices_at_least_n", violations == 0);
    return r;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown check '" + c.check + "'");
}

Report cmd_orbits(const RunConfig& c) {
  const MomentRegion region = load_region(c.region);
  Json config = base_config(c, region);
  config["t_max"] = c.t_max;
  Report r("orbits", config);
  const OrbitEnumeration e = enumerate_orbits(region, c.t_max);
  Json list = Json::array();
  for (const auto& rec : e.records) {
    Json o;
    o["period"] = rec.period;
    o["support"] = rec.support;
    std::vector<double> x(rec.moment_point.data(),
                          rec.moment_point.data() + rec.moment_point.size());
    o["moment_point"] = x;
    Json rot = Json::array();
    for (int j = 0; j < rec.rotation.size(); ++j) {
      if (std::isfinite(rec.rotation(j))) {
        rot.push_back(rec.rotation(j));
      } else {
        rot.push_back("+inf");
      }
    }
    o["rotation"] = rot;
    o["family"] = rec.family;
    const IndexResult h = lcz_toric_orbit(rec, region);
    o["lcz"] = h.value;
    o["lcz_exact"] = h.exact;
    o["lcz_unbounded"] = h.unbounded;
    list.push_back(std::move(o));
  }
  r.quantity("orbits", long(e.records.size()));
  r.quantity("candidates", e.candidates);
  r.flag("truncated", e.truncated);
  r.attach("orbits", std::move(list));
  if (!c.dump.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "period,support_size,lcz\n";
    for (const auto& rec : e.records) {
      os << rec.period << "," << rec.support.size() << ","
         << lcz_toric_orbit(rec, region).value << "\n";
    }
    write_atomic(c.dump, os.str());
  }
  return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  RunConfig c;
  CLI::App app{"Ruelle invariant and systolic inequalities for toric domains"};
  app.require_subcommand(1);
  auto common = [&](CLI::App* sub) {
    sub->add_option("--region", c.region, "region spec: JSON file or inline JSON")
        ->required();
    sub->add_option("--tol", c.tol, "quadrature relative tolerance");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "report path (default stdout)");
    sub->add_option("--format", c.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--dump", c.dump, "CSV side output");
    sub->add_flag("--timing", c.timing, "include wall time (breaks determinism)");
  };
  auto flow = [&](CLI::App* sub) {
    sub->add_option("--T", c.T, "flow time");
    sub->add_option("--samples", c.samples, "Monte-Carlo samples");
  };

  CLI::App* toric = app.add_subcommand("toric", "closed-form and quadrature invariants");
  common(toric);
  CLI::App* est = app.add_subcommand("estimate-flow", "Monte-Carlo flow estimate of Ru");
  common(est);
  flow(est);
  CLI::App* cx = app.add_subcommand("counterexample", "concave region with large Ru");
  common(cx);
  cx->add_option("--C", c.c_target, "target Ruelle invariant");
  cx->add_option("--epsilon", c.epsilon, "volume allowance");
  CLI::App* check = app.add_subcommand("check", "run a named check");
  common(check);
  flow(check);
  check->add_option("name", c.check, "main-inequality, sandwich, trace-bound, dyn-convexity")
      ->required()
      ->check(CLI::IsMember({"main-inequality", "sandwich", "trace-bound", "dyn-convexity"}));
  check->add_option("--outer", c.outer, "outer region for sandwich");
  check->add_option("--L", c.L, "sandwich constant (default: computed)");
  check->add_option("--tmax", c.t_max, "orbit period cutoff");
  CLI::App* orbits = app.add_subcommand("orbits", "closed orbits and their indices");
  common(orbits);
  orbits->add_option("--tmax", c.t_max, "orbit period cutoff");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  }
  c.command = app.get_subcommands().front()->get_name();

  try {
    const auto t0 = std::chrono::steady_clock::now();
    Report report = c.command == "toric"          ? cmd_toric(c)
                    : c.command == "estimate-flow" ? cmd_estimate_flow(c)
                    : c.command == "counterexample" ? cmd_counterexample(c)
                    : c.command == "check"          ? cmd_check(c)
                                                    : cmd_orbits(c);
    if (c.timing) {
      report.set_wall_time(std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count());
    }
    const std::string text = report.render(c.format);
    if (c.out.empty()) {
      out << text;
    } else {
      write_atomic(c.out, text);
    }
    return report.passed() ? 0 : 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ruelle
