#pragma once

// Runners behind the CLI subcommands. Each takes a validated ExperimentConfig
// and produces a JSON document plus any SVG figures; nothing here touches the
// filesystem, so the runners are directly testable and the CLI stays thin.

#include "lpspec/config.hpp"
#include "lpspec/discrete.hpp"
#include "lpspec/quasimode.hpp"
#include "lpspec/svg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace lpspec {

using json = nlohmann::ordered_json;

struct RunArtifacts {
  json doc;
  std::vector<std::pair<std::string, std::string>> svgs;  // filename, content
  bool all_pass = true;
};

namespace detail {

inline json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline FigureSpec figure_spec_for(const ExperimentConfig& cfg, FigureKind kind, double p) {
  if (cfg.x_max > cfg.x_min && cfg.y_max > cfg.y_min) {
    FigureSpec f;
    f.kind = kind;
    f.x_min = cfg.x_min;
    f.x_max = cfg.x_max;
    f.y_min = cfg.y_min;
    f.y_max = cfg.y_max;
    f.resolution = cfg.resolution;
    return f;
  }
  return FigureSpec::framed(kind, cfg.params, p, cfg.resolution);
}

inline std::vector<double> slice_positions(const ExperimentConfig& cfg) {
  if (!cfg.a_list.empty()) return cfg.a_list;
  std::vector<double> as;
  for (const Interval& iv : cfg.params.alpha_sq_range) {
    if (iv.is_point()) {
      as.push_back(iv.lo);
      continue;
    }
    for (int k = 0; k < 5; ++k) as.push_back(iv.lo + (iv.hi - iv.lo) * double(k) / 4.0);
  }
  return as;
}

}  // namespace detail

inline RunArtifacts run_region(const ExperimentConfig& cfg) {
  const SpectralParams& sp = cfg.params;
  const double p = cfg.p_list.front();

  RunArtifacts out;
  out.doc["seed"] = cfg.seed;
  out.doc["n"] = sp.n;
  out.doc["p"] = p;
  out.doc["alpha0"] = sp.alpha0;
  out.doc["alpha1"] = sp.alpha1;
  json intervals = json::array();
  for (const Interval& iv : sp.alpha_sq_range) intervals.push_back(json::array({iv.lo, iv.hi}));
  out.doc["alphaSqIntervals"] = intervals;
  json slices = json::array();
  for (double A : detail::slice_positions(cfg)) {
    const Parabola s = lp_slice(A, sp.n, p);
    slices.push_back(json{{"A", A}, {"width", s.width}, {"vertex", s.vertex}});
  }
  out.doc["slices"] = slices;
  if (p == 2.0)
    out.doc["envelopeSlope"] = nullptr;  // slices degenerate to rays, no envelope
  else
    out.doc["envelopeSlope"] = envelope_slope(p);

  const FigureKind kind = figure_kind_from_string(cfg.figure);
  const FigureData fig = make_figure(sp, p, detail::figure_spec_for(cfg, kind, p));
  out.svgs.emplace_back(to_string(kind) + ".svg", to_svg(fig));
  return out;
}

inline RunArtifacts run_quasimode(const ExperimentConfig& cfg) {
  const int n = cfg.metric.n();
  std::vector<double> a_list = cfg.a_list;
  if (a_list.empty()) {
    const double a1 = cfg.metric.profile.alpha1();
    a_list = {a1 * a1};
  }
  const BumpChoice choice = (cfg.bump == "constant" || cfg.metric.profile.is_constant())
                                ? BumpChoice::ConstantOne
                                : BumpChoice::FromProfile;
  QuadratureOptions qopts;
  qopts.ny = cfg.quad_ny;

  RunArtifacts out;
  out.all_pass = true;
  json rows = json::array();
  for (double p : cfg.p_list)
    for (double A : a_list)
      for (double eps : cfg.epsilon_list)
        for (double L : cfg.length_list)
          for (double s : cfg.s_list) {
            json row;
            row["p"] = p;
            row["A"] = A;
            row["epsilon"] = eps;
            row["L"] = L;
            try {
              const QuasimodeSpec spec = QuasimodeSpec::make(n, p, A, eps, s, L);
              const Quasimode qm = make_quasimode(cfg.metric, spec, choice);
              const double need = coupling_threshold(qm);
              if (!(L > need))
                throw CouplingError("L = " + std::to_string(L) +
                                    " does not exceed the coupling threshold " +
                                    std::to_string(need));
              const ResidualReport rep = residual(qm, cfg.metric, 3.0, qopts);
              row["lambda"] = detail::complex_json(rep.lambda);
              row["Lambda"] = detail::complex_json(rep.Lambda);
              json norms;
              norms["F"] = rep.norm_F;
              norms["terms"] = rep.term_norms;
              norms["total"] = rep.total_norm;
              row["norms"] = norms;
              row["ratio"] = rep.ratio;
              row["pass"] = rep.pass;
              out.all_pass = out.all_pass && rep.pass;
            } catch (const std::exception& e) {
              row["error"] = std::string(e.what());
              row["pass"] = false;
              out.all_pass = false;
            }
            rows.push_back(std::move(row));
          }
  out.doc["seed"] = cfg.seed;
  out.doc["rows"] = rows;
  out.doc["allPass"] = out.all_pass;
  return out;
}

inline RunArtifacts run_volume(const ExperimentConfig& cfg) {
  if (cfg.radius_list.size() < 3)
    throw ConfigError("volume: need at least 3 increasing R values");
  const int n = cfg.metric.n();
  const double alpha1 = cfg.metric.profile.alpha1();

  BallVolumeOptions opts;
  opts.ny = cfg.quad_ny;
  const double kappa_hat = volume_growth_rate(cfg.metric, cfg.radius_list, opts);
  const double target = double(n) * alpha1;

  RunArtifacts out;
  out.doc["seed"] = cfg.seed;
  out.doc["kappaHat"] = kappa_hat;
  out.doc["target"] = target;
  out.doc["relError"] = std::abs(kappa_hat - target) / target;

  json fit = json::array();
  for (double R : cfg.radius_list)
    fit.push_back(json{{"R", R}, {"logVolume", std::log(ball_volume(cfg.metric, R, opts))}});
  out.doc["fit"] = fit;
  out.doc["fitWindow"] =
      json::array({cfg.radius_list[cfg.radius_list.size() / 2], cfg.radius_list.back()});

  // Comparison-ODE upper bound on log Vol(R); with an empty perturbation band
  // the bound grows at exactly n (alpha1 + vol_epsilon).
  const double gamma = alpha1 + cfg.vol_epsilon;
  json bound = json::array();
  for (double R : cfg.radius_list) {
    const SturmLiouvilleResult sl = sturm_liouville_compare(0.0, 0.0, gamma, gamma, R, n);
    bound.push_back(json{{"R", R}, {"logVolBound", sl.log_vol_bound}});
  }
  out.doc["sturmLiouville"] = json{{"gamma", gamma}, {"curve", bound}};
  return out;
}

inline RunArtifacts run_spectrum_bottom(const ExperimentConfig& cfg) {
  const int n = cfg.metric.n();
  const double a0 = cfg.metric.profile.alpha0();
  const double target = 0.25 * double(n) * double(n) * a0 * a0;
  const double u_top = cfg.u_max_list.back();

  RunArtifacts out;
  out.doc["seed"] = cfg.seed;
  json trend = json::array();
  double lambda1_hat = 0.0;
  for (double u_max : cfg.u_max_list) {
    // keep the u step fixed across the trend so domain growth is the only
    // variable; the configured nu applies to the largest domain
    const int nu = std::max(3, int(std::lround(double(cfg.nu - 1) * u_max / u_top)) + 1);
    const CollarGrid grid = CollarGrid::make(u_max, nu, cfg.ny, n);
    const DiscreteOperator op = assemble_operator(cfg.metric, grid);
    const EigenResult er = smallest_eigenvalue(op);
    if (!(er.residual < 1e-6))
      throw std::runtime_error("bottom: eigensolver stalled at u_max = " +
                               std::to_string(u_max) + " (dim " +
                               std::to_string(op.matrix.rows()) + ", residual " +
                               std::to_string(er.residual) + ", restarts " +
                               std::to_string(er.restarts) + ")");
    trend.push_back(json{{"uMax", u_max},
                         {"lambda1", er.value},
                         {"nu", nu},
                         {"ny", cfg.ny},
                         {"dim", op.matrix.rows()},
                         {"residual", er.residual},
                         {"restarts", er.restarts},
                         {"basis", er.basis}});
    lambda1_hat = er.value;
  }
  out.doc["lambda1Hat"] = lambda1_hat;
  out.doc["target"] = target;
  out.doc["relError"] = std::abs(lambda1_hat - target) / target;
  out.doc["trend"] = trend;
  return out;
}

// Runs every stage on one config and bundles the documents; emits the full
// set of figure kinds since the bundle is meant as a complete record.
inline RunArtifacts run_report(const ExperimentConfig& cfg) {
  RunArtifacts region = run_region(cfg);
  RunArtifacts quasi = run_quasimode(cfg);
  RunArtifacts volume = run_volume(cfg);
  RunArtifacts bottom = run_spectrum_bottom(cfg);

  RunArtifacts out;
  out.doc["seed"] = cfg.seed;
  out.doc["region"] = region.doc;
  out.doc["quasimode"] = quasi.doc;
  out.doc["volume"] = volume.doc;
  out.doc["bottom"] = bottom.doc;
  out.all_pass = region.all_pass && quasi.all_pass && volume.all_pass && bottom.all_pass;

  const double p = cfg.p_list.front();
  for (FigureKind kind : {FigureKind::L1Region, FigureKind::LpFamily, FigureKind::Envelope,
                          FigureKind::L1Both, FigureKind::LpBoth}) {
    const FigureData fig = make_figure(cfg.params, p, detail::figure_spec_for(cfg, kind, p));
    out.svgs.emplace_back(to_string(kind) + ".svg", to_svg(fig));
  }
  return out;
}

}  // namespace lpspec
