#pragma once

// Executes scenarios and renders their results.

#include "steerkit/cli/scenario.hpp"
#include "steerkit/closedform.hpp"
#include "steerkit/covariance.hpp"
#include "steerkit/dynamics.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/model.hpp"
#include "steerkit/montecarlo.hpp"
#include "steerkit/parallel.hpp"
#include "steerkit/steering.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace steerkit::cli {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct Column {
  std::string name;
  std::string unit;
};

struct RunRecord {
  Scenario scenario;
  std::string scenario_digest;
  std::string version = tool_version;
  double wall_time_s = 0.0;
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
  // Validation modes: whether every point met the tolerance.
  bool passed = true;
  json summary = json::object();
};

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

// A parameter point: either concrete reduced parameters or a dimensionless
// point (G = 1). Physical inputs are reduced once up front.
struct Point {
  ParamsKind kind = ParamsKind::Dimensionless;
  ReducedParams reduced;
  DimensionlessPoint dimensionless;
};

namespace runner_detail {

// Derived quantities that also admit tau = 0 (r = 0).
inline DerivedQuantities quantities_at(const ReducedParams& rp) {
  ReducedParams probe = rp;
  if (!(probe.tau > 0.0)) probe.tau = 1.0;
  DerivedQuantities dq = derived_quantities(probe);
  dq.tau = rp.tau;
  dq.r = dq.G * rp.tau;
  return dq;
}

}  // namespace runner_detail

inline Point base_point(const Scenario& s, std::vector<std::string>& warnings) {
  Point p;
  p.kind = s.params.kind == ParamsKind::Dimensionless ? ParamsKind::Dimensionless : ParamsKind::Reduced;
  if (s.params.kind == ParamsKind::Dimensionless) {
    p.dimensionless = s.params.dimensionless;
  } else if (s.params.kind == ParamsKind::Reduced) {
    p.reduced = s.params.reduced;
  } else {
    const WorkingPoint wp = s.params.couplings
                                ? working_point_from_couplings(s.params.physical, (*s.params.couplings)[0],
                                                               (*s.params.couplings)[1])
                                : derive_working_point(s.params.physical);
    p.reduced = reduce(s.params.physical, wp);
    for (const auto& w : p.reduced.warnings) warnings.push_back(w);
    p.reduced.warnings.clear();
  }
  return p;
}

inline void apply(Point& p, const std::string& variable, double v) {
  if (p.kind == ParamsKind::Dimensionless) {
    auto& d = p.dimensionless;
    if (variable == "r" || variable == "tau") d.r = v;
    else if (variable == "n") d.n = v;
    else if (variable == "n0") d.n0 = v;
    else if (variable == "gamma_over_G") d.gamma_over_G = v;
    else if (variable == "G1_over_G2") d.G1_over_G2 = v;
    else fail(ErrorKind::ConfigError, "cannot set '" + variable + "'");
    return;
  }
  auto& rp = p.reduced;
  if (variable == "tau") {
    rp.tau = v;
  } else if (variable == "r") {
    rp.tau = v / runner_detail::quantities_at(rp).G;
  } else if (variable == "n") {
    rp.n = v;
  } else if (variable == "n0") {
    rp.n0 = v;
  } else if (variable == "gamma_over_G") {
    // Keep the couplings; set gamma so that gamma / (G1 + G2 - gamma) = v.
    const DerivedQuantities dq = runner_detail::quantities_at(ReducedParams{rp.g1, rp.g2, rp.kappa, rp.Delta, 0.0,
                                                                            rp.n0, rp.n, rp.tau, {}});
    rp.gamma = (dq.G1 + dq.G2) * v / (1.0 + v);
  } else if (variable == "G1_over_G2") {
    const double total = rp.g1 * rp.g1 + rp.g2 * rp.g2;
    rp.g1 = std::sqrt(total * v / (1.0 + v));
    rp.g2 = std::sqrt(total / (1.0 + v));
  } else {
    fail(ErrorKind::ConfigError, "cannot set '" + variable + "'");
  }
}

inline DerivedQuantities closed_quantities(const Point& p) {
  if (p.kind == ParamsKind::Dimensionless)
    return dimensionless_quantities(p.dimensionless.gamma_over_G, p.dimensionless.G1_over_G2, p.dimensionless.r);
  return runner_detail::quantities_at(p.reduced);
}

inline double point_n0(const Point& p) { return p.kind == ParamsKind::Dimensionless ? p.dimensionless.n0 : p.reduced.n0; }
inline double point_n(const Point& p) { return p.kind == ParamsKind::Dimensionless ? p.dimensionless.n : p.reduced.n; }

inline ReducedParams oracle_params(const Point& p) {
  if (p.kind == ParamsKind::Dimensionless) return reduced_from_dimensionless(p.dimensionless);
  return p.reduced;
}

struct OracleEvaluation {
  OutputCovariance oc;
  DerivedQuantities dq;
};

// Output covariance over (Am_out, A1_out, A2_out, Bt_m, W_out, U_out).
inline OracleEvaluation oracle_covariance(const Point& p, OracleModel model, double tol) {
  const ReducedParams rp = oracle_params(p);
  const DerivedQuantities dq = derived_quantities(rp);
  const LinearModel lm = model == OracleModel::Full ? build_full_model(rp) : build_reduced_model(rp);
  const OutputCovariance oc = propagate_output_covariance(lm, output_kernels(dq), rp.tau, {tol});
  return {collective_transform(oc, dq), dq};
}

inline std::string physicality_warning(const OutputCovariance& oc) {
  const double nu = min_canonical_symplectic_eigenvalue(oc);
  if (nu >= vacuum_variance - 1e-9) return {};
  std::ostringstream msg;
  msg.precision(12);
  msg << "covariance violates the uncertainty bound (symplectic eigenvalue " << nu << ")";
  return msg.str();
}

namespace runner_detail {

inline std::string unit_of(const std::string& variable, ParamsKind kind) {
  if (variable == "tau") return kind == ParamsKind::Dimensionless ? "1/G" : "s";
  return "1";
}

inline double relative_error(double value, double reference) {
  const double scale = std::abs(reference);
  return scale > 0.0 ? std::abs(value - reference) / scale : std::abs(value - reference);
}

inline std::string label_suffix(const std::string& label) { return label.empty() ? "" : "[" + label + "]"; }

struct PointOutcome {
  std::vector<double> row;
  std::vector<std::string> warnings;
  json extra;
};

// Evaluates every point in parallel; a failing point becomes a NaN row.
template <class Eval>
void evaluate_points(RunRecord& rec, std::size_t count, unsigned threads,
                     const std::function<std::string(std::size_t)>& describe, Eval&& eval) {
  std::vector<PointOutcome> out(count);
  const std::size_t width = rec.columns.size();
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      out[i] = eval(i);
    } catch (const Error& e) {
      out[i].row.assign(width, nan_value);
      out[i].warnings.push_back(describe(i) + ": " + e.what());
    }
  });
  for (auto& o : out) {
    rec.rows.push_back(std::move(o.row));
    for (auto& w : o.warnings) rec.warnings.push_back(std::move(w));
  }
}

}  // namespace runner_detail

inline std::vector<double> sweep_values(const Scenario& s) { return s.sweep ? s.sweep->values() : std::vector<double>{}; }

namespace runner_detail {

inline std::string point_name(const Scenario& s, std::size_t i, double x) {
  std::ostringstream msg;
  msg.precision(12);
  msg << "point " << i;
  if (s.sweep) msg << " (" << s.sweep->variable << " = " << x << ")";
  return msg.str();
}

inline void run_curve(const Scenario& s, const Point& base, RunRecord& rec, unsigned threads) {
  const auto xs = sweep_values(s);
  const auto& var = s.sweep->variable;
  std::vector<Series> series = s.series.empty() ? std::vector<Series>{Series{}} : s.series;
  const bool closed = s.engine != Engine::Oracle;
  const bool oracle = s.engine != Engine::ClosedForm;
  rec.columns.push_back({var, unit_of(var, base.kind)});
  for (const auto& ser : series) {
    const std::string sfx = label_suffix(ser.label);
    if (closed)
      for (const char* c : {"E_mW", "E_m1", "E_m2"}) rec.columns.push_back({c + sfx, "1"});
    if (oracle)
      for (const char* c : {"E_mW_oracle", "E_m1_oracle", "E_m2_oracle"}) rec.columns.push_back({c + sfx, "1"});
  }
  evaluate_points(
      rec, xs.size(), threads, [&](std::size_t i) { return point_name(s, i, xs[i]); },
      [&](std::size_t i) {
        PointOutcome o;
        o.row.push_back(xs[i]);
        for (const auto& ser : series) {
          Point p = base;
          for (const auto& [k, v] : ser.set) apply(p, k, v);
          apply(p, var, xs[i]);
          if (closed) {
            const DerivedQuantities dq = closed_quantities(p);
            o.row.push_back(steering_collective(dq, point_n0(p), point_n(p)));
            o.row.push_back(steering_single(dq, point_n0(p), point_n(p), 1));
            o.row.push_back(steering_single(dq, point_n0(p), point_n(p), 2));
          }
          if (oracle) {
            try {
              const auto ev = oracle_covariance(p, s.oracle_model, s.tolerances.integrator);
              for (const char* party : {"W_out", "A1_out", "A2_out"})
                o.row.push_back(steering_product(ev.oc, mirror_output_label, party).E_value);
              const std::string w = physicality_warning(ev.oc);
              if (!w.empty()) o.warnings.push_back(point_name(s, i, xs[i]) + ": " + w);
            } catch (const Error& e) {
              o.row.insert(o.row.end(), 3, nan_value);
              o.warnings.push_back(point_name(s, i, xs[i]) + " oracle" + label_suffix(ser.label) + ": " + e.what());
            }
          }
        }
        return o;
      });
}

inline void run_heatmap(const Scenario& s, const Point& base, RunRecord& rec, unsigned threads) {
  const auto xs = s.sweep->values();
  const auto ys = s.sweep2->values();
  const bool closed = s.engine != Engine::Oracle;
  const bool oracle = s.engine != Engine::ClosedForm;
  rec.columns = {{s.sweep->variable, unit_of(s.sweep->variable, base.kind)},
                 {s.sweep2->variable, unit_of(s.sweep2->variable, base.kind)}};
  if (closed) rec.columns.push_back({"E_mW", "1"});
  if (oracle) rec.columns.push_back({"E_mW_oracle", "1"});
  const std::size_t nx = xs.size();
  evaluate_points(
      rec, nx * ys.size(), threads,
      [&](std::size_t i) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "point " << i << " (" << s.sweep->variable << " = " << xs[i % nx] << ", " << s.sweep2->variable
            << " = " << ys[i / nx] << ")";
        return msg.str();
      },
      [&](std::size_t i) {
        PointOutcome o;
        Point p = base;
        apply(p, s.sweep->variable, xs[i % nx]);
        apply(p, s.sweep2->variable, ys[i / nx]);
        o.row = {xs[i % nx], ys[i / nx]};
        if (closed) o.row.push_back(steering_collective(closed_quantities(p), point_n0(p), point_n(p)));
        if (oracle) {
          const auto ev = oracle_covariance(p, s.oracle_model, s.tolerances.integrator);
          o.row.push_back(steering_product(ev.oc, mirror_output_label, "W_out").E_value);
        }
        return o;
      });
  std::vector<double> grid(rec.rows.size());
  for (std::size_t i = 0; i < rec.rows.size(); ++i) grid[i] = rec.rows[i][2];
  json contour = json::array();
  for (const auto& c : contour_crossings(xs, ys, grid)) contour.push_back({c.r, c.gamma_over_G});
  rec.summary["contour_E_half"] = contour;
}

inline void run_threshold(const Scenario& s, const Point& base, RunRecord& rec, unsigned threads) {
  const bool swept = s.sweep.has_value();
  const auto xs = swept ? s.sweep->values() : std::vector<double>{nan_value};
  rec.columns = {{"gamma_over_G", "1"}, {"n0", "1"},    {"n_threshold", "1"}, {"bracket_lo", "1"},
                 {"bracket_hi", "1"},   {"sup_r", "1"}, {"sup_E", "1"}};
  evaluate_points(
      rec, xs.size(), threads, [&](std::size_t i) { return point_name(s, i, xs[i]); },
      [&](std::size_t i) {
        Point p = base;
        if (swept) apply(p, s.sweep->variable, xs[i]);
        const double g = closed_quantities(p).gamma_over_G();
        const double n0 = point_n0(p);
        PointOutcome o;
        try {
          const ThresholdResult t = noise_threshold(g, n0, s.tolerances.r_max, s.tolerances.threshold);
          o.row = {g, n0, t.value, t.bracket.first, t.bracket.second, t.sup_location, t.sup_E};
        } catch (const Error& e) {
          o.row = {g, n0, nan_value, nan_value, nan_value, nan_value, nan_value};
          o.warnings.push_back(point_name(s, i, xs[i]) + ": " + e.what());
        }
        return o;
      });
}

inline std::vector<double> points_or_base(const Scenario& s) {
  return s.sweep ? s.sweep->values() : std::vector<double>{nan_value};
}

inline void run_validate_oracle(const Scenario& s, const Point& base, RunRecord& rec, unsigned threads) {
  const auto xs = points_or_base(s);
  const double tol = s.tolerances.relative.value_or(1e-6);
  rec.columns = {{s.sweep ? s.sweep->variable : "point", s.sweep ? unit_of(s.sweep->variable, base.kind) : "1"},
                 {"max_rel_error", "1"},
                 {"E_mW_closedform", "1"},
                 {"E_mW_oracle", "1"},
                 {"var_Xm_closedform", "1"},
                 {"var_Xm_oracle", "1"}};
  evaluate_points(
      rec, xs.size(), threads, [&](std::size_t i) { return point_name(s, i, xs[i]); },
      [&](std::size_t i) {
        Point p = base;
        if (s.sweep) apply(p, s.sweep->variable, xs[i]);
        const auto ev = oracle_covariance(p, OracleModel::Reduced, s.tolerances.integrator);
        const DerivedQuantities& dq = ev.dq;
        const double n0 = point_n0(p), n = point_n(p);
        const MomentSet ms = moment_set(dq, n0, n);
        const auto& oc = ev.oc;
        const std::string m = mirror_output_label;
        auto X = [](const std::string& l) { return QuadratureSelector::X(l); };
        auto P = [](const std::string& l) { return QuadratureSelector::P(l); };
        const double e_w = steering_product(oc, m, "W_out").E_value;
        const std::vector<std::pair<double, double>> pairs{
            {ms.var_Xm_out, oc.covariance(X(m), X(m))},
            {ms.var_X1_out, oc.covariance(X("A1_out"), X("A1_out"))},
            {ms.var_X2_out, oc.covariance(X("A2_out"), X("A2_out"))},
            {ms.var_XW_out, oc.covariance(X("W_out"), X("W_out"))},
            {ms.cov_Xm_P1, oc.covariance(X(m), P("A1_out"))},
            {ms.cov_Xm_P2, oc.covariance(X(m), P("A2_out"))},
            {ms.cov_Xm_PW, oc.covariance(X(m), P("W_out"))},
            {steering_collective(dq, n0, n), e_w},
            {steering_single(dq, n0, n, 1), steering_product(oc, m, "A1_out").E_value},
            {steering_single(dq, n0, n, 2), steering_product(oc, m, "A2_out").E_value}};
        double worst = 0.0;
        for (const auto& [c, o] : pairs) worst = std::max(worst, relative_error(c, o));
        PointOutcome out;
        out.row = {s.sweep ? xs[i] : 0.0, worst, pairs[7].first, e_w, ms.var_Xm_out, pairs[0].second};
        if (!(worst <= tol)) {
          std::ostringstream msg;
          msg << point_name(s, i, xs[i]) << ": relative discrepancy " << worst << " exceeds " << tol;
          out.warnings.push_back(msg.str());
        }
        const std::string w = physicality_warning(oc);
        if (!w.empty()) out.warnings.push_back(point_name(s, i, xs[i]) + ": " + w);
        return out;
      });
  double worst = 0.0;
  bool complete = true;
  for (const auto& r : rec.rows) {
    if (std::isnan(r[1])) complete = false;
    else worst = std::max(worst, r[1]);
  }
  rec.passed = complete && worst <= tol;
  rec.summary["max_rel_error"] = worst;
  rec.summary["tolerance"] = tol;
}

inline void run_validate_adiabatic(const Scenario& s, const Point& base, RunRecord& rec, unsigned threads) {
  const auto xs = points_or_base(s);
  const double tol = s.tolerances.relative.value_or(5e-2);
  rec.columns = {{s.sweep ? s.sweep->variable : "point", s.sweep ? unit_of(s.sweep->variable, base.kind) : "1"},
                 {"max_rel_error", "1"},
                 {"var_Xm_full", "1"},
                 {"var_Xm_reduced", "1"},
                 {"E_mW_full", "1"},
                 {"E_mW_reduced", "1"}};
  evaluate_points(
      rec, xs.size(), threads, [&](std::size_t i) { return point_name(s, i, xs[i]); },
      [&](std::size_t i) {
        Point p = base;
        if (s.sweep) apply(p, s.sweep->variable, xs[i]);
        const auto full = oracle_covariance(p, OracleModel::Full, s.tolerances.integrator);
        const auto red = oracle_covariance(p, OracleModel::Reduced, s.tolerances.integrator);
        // Entries are compared relative to max(|reduced|, vacuum variance).
        const Eigen::MatrixXd diff = (full.oc.sigma - red.oc.sigma).cwiseAbs();
        const Eigen::MatrixXd scale = red.oc.sigma.cwiseAbs().cwiseMax(vacuum_variance);
        const double worst = diff.cwiseQuotient(scale).maxCoeff();
        PointOutcome out;
        const auto X = QuadratureSelector::X(mirror_output_label);
        out.row = {s.sweep ? xs[i] : 0.0,
                   worst,
                   full.oc.covariance(X, X),
                   red.oc.covariance(X, X),
                   steering_product(full.oc, mirror_output_label, "W_out").E_value,
                   steering_product(red.oc, mirror_output_label, "W_out").E_value};
        if (!(worst <= tol)) {
          std::ostringstream msg;
          msg << point_name(s, i, xs[i]) << ": relative discrepancy " << worst << " exceeds " << tol;
          out.warnings.push_back(msg.str());
        }
        for (const auto* oc : {&full.oc, &red.oc}) {
          const std::string w = physicality_warning(*oc);
          if (!w.empty()) out.warnings.push_back(point_name(s, i, xs[i]) + ": " + w);
        }
        return out;
      });
  double worst = 0.0;
  bool complete = true;
  for (const auto& r : rec.rows) {
    if (std::isnan(r[1])) complete = false;
    else worst = std::max(worst, r[1]);
  }
  rec.passed = complete && worst <= tol;
  rec.summary["max_rel_error"] = worst;
  rec.summary["tolerance"] = tol;
}

inline void run_working_point(const Scenario& s, RunRecord& rec) {
  const auto& ph = s.params.physical;
  const WorkingPoint wp = s.params.couplings
                              ? working_point_from_couplings(ph, (*s.params.couplings)[0], (*s.params.couplings)[1])
                              : derive_working_point(ph);
  ReducedParams rp = reduce(ph, wp);
  for (const auto& w : rp.warnings) rec.warnings.push_back(w);
  const DerivedQuantities dq = derived_quantities(rp);
  rec.columns = {{"alpha1_re", "1"}, {"alpha1_im", "1"}, {"alpha2_re", "1"}, {"alpha2_im", "1"},
                 {"x_s", "1"},       {"p_s", "1"},       {"Delta1", "rad/s"}, {"Delta2", "rad/s"},
                 {"g1", "rad/s"},    {"g2", "rad/s"},    {"kappa", "rad/s"}, {"Delta", "rad/s"},
                 {"G1", "rad/s"},    {"G2", "rad/s"},    {"G", "rad/s"},     {"delta", "rad/s"},
                 {"phi", "rad"},     {"gamma_over_G", "1"}, {"r", "1"}};
  rec.rows.push_back({wp.alpha1.real(), wp.alpha1.imag(), wp.alpha2.real(), wp.alpha2.imag(), wp.x_s, wp.p_s,
                      wp.Delta1, wp.Delta2, wp.g1, wp.g2, rp.kappa, rp.Delta, dq.G1, dq.G2, dq.G, dq.delta, dq.phi,
                      dq.gamma_over_G(), dq.r});
  rec.summary["G1_over_2pi_Hz"] = dq.G1 / two_pi;
  rec.summary["G2_over_2pi_Hz"] = dq.G2 / two_pi;
}

inline void run_cross_correlation(const Scenario& s, const Point& base, RunRecord& rec, unsigned threads,
                                  std::uint64_t seed) {
  const auto xs = s.sweep->values();
  const bool closed = s.engine != Engine::Oracle;
  const bool oracle = s.engine != Engine::ClosedForm;
  const bool mc = oracle && s.trajectories > 0;
  rec.columns = {{s.sweep->variable, unit_of(s.sweep->variable, base.kind)}};
  if (closed) rec.columns.push_back({"C_closedform", "1"});
  if (oracle) rec.columns.push_back({"C_oracle", "1"});
  if (mc) {
    rec.columns.push_back({"C_montecarlo", "1"});
    rec.columns.push_back({"C_montecarlo_se", "1"});
  }
  auto eval = [&](std::size_t i, unsigned mc_threads) {
    Point p = base;
    apply(p, s.sweep->variable, xs[i]);
    PointOutcome o;
    o.row.push_back(xs[i]);
    if (closed) o.row.push_back(cross_correlation(closed_quantities(p), point_n0(p), point_n(p)));
    if (oracle) {
      const ReducedParams rp = oracle_params(p);
      const DerivedQuantities dq = derived_quantities(rp);
      const LinearModel lm = s.oracle_model == OracleModel::Full ? build_full_model(rp) : build_reduced_model(rp);
      const auto kernels = standard_kernels({"A1_out", "A2_out"}, dq);
      const auto det = propagate_output_covariance(lm, kernels, rp.tau, {s.tolerances.integrator});
      o.row.push_back(std::abs(cross_moment(det, "A1_out", "A2_out").value));
      if (mc) {
        MonteCarloOptions mo;
        mo.threads = mc_threads;
        const auto est = monte_carlo_output_covariance(lm, kernels, rp.tau, s.trajectories, seed + 1000003ull * i, mo);
        const CrossMoment cm = cross_moment(est, "A1_out", "A2_out");
        o.row.push_back(std::abs(cm.value));
        o.row.push_back(cm.abs_standard_error);
      }
    }
    return o;
  };
  if (mc) {
    // Trajectories are parallelized inside each point instead.
    evaluate_points(
        rec, xs.size(), 1, [&](std::size_t i) { return point_name(s, i, xs[i]); },
        [&](std::size_t i) { return eval(i, threads); });
  } else {
    evaluate_points(
        rec, xs.size(), threads, [&](std::size_t i) { return point_name(s, i, xs[i]); },
        [&](std::size_t i) { return eval(i, 1); });
  }
}

}  // namespace runner_detail

inline RunRecord run(const Scenario& s, const RunOptions& opts = {}) {
  validate(s);
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.scenario = s;
  rec.scenario_digest = scenario_digest(s);
  const unsigned threads = std::max(1u, opts.threads);
  const std::uint64_t seed = opts.seed.value_or(s.seed);
  using namespace runner_detail;
  if (s.mode == Mode::WorkingPoint) {
    run_working_point(s, rec);
  } else {
    const Point base = base_point(s, rec.warnings);
    switch (s.mode) {
      case Mode::Curve: run_curve(s, base, rec, threads); break;
      case Mode::Heatmap: run_heatmap(s, base, rec, threads); break;
      case Mode::NThreshold: run_threshold(s, base, rec, threads); break;
      case Mode::ValidateOracle: run_validate_oracle(s, base, rec, threads); break;
      case Mode::ValidateAdiabatic: run_validate_adiabatic(s, base, rec, threads); break;
      case Mode::CrossCorrelation: run_cross_correlation(s, base, rec, threads, seed); break;
      case Mode::WorkingPoint: break;
    }
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline bool is_validation(Mode m) { return m == Mode::ValidateOracle || m == Mode::ValidateAdiabatic; }

// CSV with '#' comment lines for provenance; no wall time, so identical runs
// give identical bytes.
inline void write_csv(const RunRecord& rec, std::ostream& os) {
  os << "# steerkit " << rec.version << "\n";
  os << "# scenario_digest " << rec.scenario_digest << "\n";
  os << "# scenario " << rec.scenario.name << " mode " << to_string(rec.scenario.mode) << " engine "
     << to_string(rec.scenario.engine) << "\n";
  if (is_validation(rec.scenario.mode)) {
    os << "# status " << (rec.passed ? "pass" : "fail") << " max_rel_error "
       << format_number(rec.summary.value("max_rel_error", nan_value)) << " tolerance "
       << format_number(rec.summary.value("tolerance", nan_value)) << "\n";
  }
  for (const auto& w : rec.warnings) {
    std::string line = w;
    for (char& c : line)
      if (c == '\n' || c == '\r') c = ' ';
    os << "# warning: " << line << "\n";
  }
  for (std::size_t c = 0; c < rec.columns.size(); ++c)
    os << (c ? "," : "") << csv_field(rec.columns[c].name + " (" + rec.columns[c].unit + ")");
  os << "\n";
  for (const auto& row : rec.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
    os << "\n";
  }
}

inline json record_json(const RunRecord& rec) {
  json j;
  j["tool"] = "steerkit";
  j["version"] = rec.version;
  j["scenario_digest"] = rec.scenario_digest;
  j["scenario"] = emit_scenario(rec.scenario);
  j["wall_time_s"] = rec.wall_time_s;
  json cols = json::array();
  for (const auto& c : rec.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
  j["columns"] = cols;
  json rows = json::array();
  for (const auto& r : rec.rows) {
    json row = json::array();
    for (double v : r) row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["warnings"] = rec.warnings;
  j["status"] = rec.passed ? "pass" : "fail";
  j["summary"] = rec.summary;
  return j;
}

}  // namespace steerkit::cli
