#include <cmath>
#include <functional>
#include <sstream>

#include "nash/error.hpp"
#include "nash/reduction.hpp"

namespace nash {

namespace {

using LiftFn = std::function<bool(const Vec&, Vec&, Mat*)>;

/// The system a procedure works on, with its lift into a symbolic parent.
struct View {
  const ControlSystem* sys = nullptr;
  std::shared_ptr<const NashSystem> base;
  LiftFn lift;
  GeneralizedInput prior;
  std::shared_ptr<const LocalRealization> parent;
};

View identity_view(const NashSystem& sys) {
  View v;
  auto base = std::make_shared<NashSystem>(sys);
  v.base = base;
  v.sys = base.get();
  v.lift = [n = sys.dim()](const Vec& z, Vec& x, Mat* jac) {
    x = z;
    if (jac) *jac = Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return true;
  };
  return v;
}

View chart_view(const LocalRealization& chart) {
  if (chart.kind() != LocalRealization::Kind::Chart || !chart.base())
    raise(ErrorCode::InvalidArgument, "observability reduction needs a symbolic system or a chart realization");
  View v;
  auto owned = std::make_shared<LocalRealization>(chart);
  v.parent = owned;
  v.sys = owned.get();
  v.base = chart.base();
  v.lift = [owned](const Vec& z, Vec& x, Mat* jac) { return owned->lift(z, x, jac); };
  v.prior = chart.shift();
  return v;
}

ReachOptions reach_options(const ReductionOptions& opts) {
  ReachOptions ro;
  ro.rank = opts.rank;
  ro.flow = opts.flow;
  ro.seed = opts.seed;
  return ro;
}

std::size_t sample_count(const ReductionOptions& opts, std::size_t d) {
  return opts.fit_samples ? opts.fit_samples : fit_sample_count(d, opts.fit.degree_bound);
}

double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// A fitted relation T = target(x) against Phi(x), with a printable name.
struct Fitted {
  std::string name;
  PolynomialRelation relation;
};

double min_scaled_derivative(const std::vector<Fitted>& rels, const std::vector<double>& targets, const Vec& phi,
                             std::size_t& worst) {
  double lo = std::numeric_limits<double>::infinity();
  std::span<const double> ps(phi.data(), static_cast<std::size_t>(phi.size()));
  for (std::size_t i = 0; i < rels.size(); ++i) {
    double g = std::abs(rels[i].relation.scaled_d_dT(targets[i], ps));
    if (!std::isfinite(g)) g = 0.0;
    if (g < lo) {
      lo = g;
      worst = i;
    }
  }
  return lo;
}

/// Rejection sampling of a shift with T_u < epsilon. `evaluate` maps the
/// terminal state to (targets, Phi) and returns false when it is unusable.
GeneralizedInput find_shift(const ControlSystem& sys, double epsilon, std::size_t attempts, std::uint64_t seed,
                            const FlowOptions& flow, const std::vector<Fitted>& rels, double floor,
                            const std::function<bool(const Vec&, std::vector<double>&, Vec&)>& evaluate,
                            Vec& terminal) {
  const std::size_t k = std::max<std::size_t>(1, sys.dim());
  auto words = sample_inputs(sys.alphabet(), k, epsilon, attempts, seed);
  double best = -1.0;
  std::size_t worst_rel = 0;
  for (const auto& u : words) {
    if (!(u.total_time() < epsilon)) continue;
    Trajectory t = try_flow(sys, sys.initial_state(), u, flow);
    if (!t.success) continue;
    std::vector<double> targets;
    Vec phi;
    if (!evaluate(t.terminal, targets, phi)) continue;
    std::size_t worst = 0;
    double g = rels.empty() ? std::numeric_limits<double>::infinity()
                            : min_scaled_derivative(rels, targets, phi, worst);
    if (g >= floor) {
      terminal = t.terminal;
      return u;
    }
    if (g > best) {
      best = g;
      worst_rel = worst;
    }
  }
  std::ostringstream msg;
  msg << "no shift with T_u < " << epsilon << " among " << attempts << " attempts keeps every dQ/dT above "
      << floor;
  if (!rels.empty()) msg << "; vanishing relation for " << rels[worst_rel].name << " (best |dQ/dT| = " << best << ")";
  raise(ErrorCode::NoValidShiftInput, msg.str());
}

void run_gate(LocalRealization& red, const ResponseOracle& oracle, const ReductionOptions& opts) {
  if (!opts.gate) return;
  VerifyOptions vo = opts.verify;
  vo.flow = opts.flow;
  auto rep = verify_local_realization(red, oracle, vo);
  red.gate_deviation = rep.max_deviation;
  if (!rep.pass) {
    std::ostringstream msg;
    msg << "reduced system deviates from the shifted response: max deviation " << rep.max_deviation << " (tol "
        << rep.tol << "), " << rep.accepted << " of " << rep.trials << " words accepted";
    raise(ErrorCode::VerificationFailed, msg.str());
  }
}

LocalRealization observability_core(const View& view, const ResponseOracle& oracle, double epsilon,
                                    const ReductionOptions& opts) {
  const ControlSystem& V = *view.sys;
  const NashSystem& base = *view.base;
  const std::size_t dv = V.dim(), n = base.dim();
  const ReachOptions ro = reach_options(opts);

  auto reach = estimate_reachable_trdeg(V, ro);
  if (reach.estimated_trdeg != dv)
    raise(ErrorCode::NotReachableInput, "reachable trdeg " + std::to_string(reach.estimated_trdeg) +
                                            " is below the state dimension " + std::to_string(dv));

  ObsAlgebraBasis alg;
  try {
    alg = generate_obs_algebra(base, opts.depth ? opts.depth : n);
  } catch (const ExpressionBlowupError& e) {
    alg = e.partial();
  }
  const std::size_t m = alg.generators.size();
  std::vector<std::vector<CompiledExpr>> grads(m);
  for (std::size_t g = 0; g < m; ++g)
    for (const auto& e : gradient(alg.generators[g].expr)) grads[g].emplace_back(e);

  auto rank_points = reachable_samples(V, V.initial_state(), 6, 2 * dv, 0.5, opts.seed + 5, opts.flow);
  std::vector<Mat> jacs;
  for (const auto& y : rank_points) {
    Vec x;
    Mat dl;
    if (!view.lift(y, x, &dl)) continue;
    Mat gx(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t g = 0; g < m; ++g)
      for (std::size_t j = 0; j < n; ++j)
        gx(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)) = grads[g][j](x.data());
    jacs.push_back(gx * dl);
  }
  if (jacs.empty()) raise(ErrorCode::DomainExit, "no reachable sample lifts into the parent system");
  auto rank = rank_report(jacs, opts.rank);
  const std::size_t d = rank.estimated_trdeg;
  if (d == 0) raise(ErrorCode::DegenerateSamples, "observation algebra is constant on reachable points");

  std::vector<CompiledExpr> phi;
  std::vector<ObsGenerator> coords;
  for (auto b : rank.basis_indices) {
    phi.emplace_back(alg.generators[b].expr);
    coords.push_back(alg.generators[b]);
  }

  const auto& alphabet = base.alphabet();
  std::vector<CompiledExpr> targets;
  std::vector<std::string> names;
  for (std::size_t a = 0; a < alphabet.size(); ++a) {
    const auto& f = base.field_exprs(a);
    for (std::size_t i = 0; i < d; ++i) {
      targets.emplace_back(lie_derivative(std::span<const NashExpr>(f.data(), f.size()), coords[i].expr));
      names.push_back("f_" + alphabet.name(a) + " phi_" + std::to_string(i + 1));
    }
  }
  for (std::size_t j = 0; j < base.num_outputs(); ++j) {
    targets.emplace_back(base.readout_exprs()[j]);
    names.push_back("h_" + std::to_string(j + 1));
  }

  auto eval_at = [&](const Vec& y, std::vector<double>& tv, Vec& pv) {
    Vec x;
    if (!view.lift(y, x, nullptr)) return false;
    pv.resize(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) pv[static_cast<Eigen::Index>(i)] = phi[i](x.data());
    tv.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) tv[t] = targets[t](x.data());
    return pv.allFinite();
  };

  const std::size_t N = sample_count(opts, d);
  auto pts = reachable_samples(V, V.initial_state(), N, 2 * dv, opts.sample_budget, opts.seed + 17, opts.flow);
  Mat basis(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
  std::vector<std::vector<double>> tvals(targets.size(), std::vector<double>(N));
  for (std::size_t s = 0; s < N; ++s) {
    std::vector<double> tv;
    Vec pv;
    if (!eval_at(pts[s], tv, pv)) raise(ErrorCode::DomainExit, "fit sample fell outside the parent's domain");
    basis.row(static_cast<Eigen::Index>(s)) = pv.transpose();
    for (std::size_t t = 0; t < targets.size(); ++t) tvals[t][s] = tv[t];
  }

  std::vector<double> t0;
  Vec p0;
  if (!eval_at(V.initial_state(), t0, p0)) raise(ErrorCode::DomainExit, "initial state does not lift");
  std::vector<Fitted> rels;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    FitOptions fo = opts.fit;
    std::vector<double> pref{t0[t]};
    for (Eigen::Index i = 0; i < p0.size(); ++i) pref.push_back(p0[i]);
    fo.preferred = pref;
    auto q = fit_relation(tvals[t], basis, fo);
    if (!q)
      raise(ErrorCode::FitFailure, names[t] + " admits no relation against the basis within degree " +
                                       std::to_string(opts.fit.degree_bound));
    rels.push_back({names[t], std::move(*q)});
  }

  Vec ybar;
  const std::size_t attempts = opts.shift_attempts ? opts.shift_attempts : 10 * std::max<std::size_t>(1, dv);
  GeneralizedInput u = find_shift(V, epsilon, attempts, opts.seed + 31, opts.flow, rels,
                                  opts.implicit.derivative_floor, eval_at, ybar);
  std::vector<double> tbar;
  Vec y0;
  eval_at(ybar, tbar, y0);

  double r_max = 0.0;
  for (Eigen::Index s = 0; s < basis.rows(); ++s) r_max = std::max(r_max, distance(basis.row(s).transpose(), y0));
  std::vector<double> z0(y0.data(), y0.data() + d);
  std::vector<ImplicitMap> maps;
  for (std::size_t t = 0; t < rels.size(); ++t) {
    maps.emplace_back(rels[t].relation, z0, tbar[t], opts.implicit);
    maps.back().estimate_radius(r_max, opts.seed + t);
  }
  std::vector<std::vector<ImplicitMap>> fields(alphabet.size());
  for (std::size_t a = 0; a < alphabet.size(); ++a)
    for (std::size_t i = 0; i < d; ++i) fields[a].push_back(maps[a * d + i]);
  std::vector<ImplicitMap> readout(maps.begin() + static_cast<std::ptrdiff_t>(alphabet.size() * d), maps.end());

  auto red = LocalRealization::observed(alphabet, std::move(fields), std::move(readout), y0, concat(view.prior, u));
  red.coordinate_generators = std::move(coords);
  red.parent_chart = view.parent;

  auto post_reach = estimate_reachable_trdeg(red, ro);
  ObservabilityOptions oo;
  oo.rank = opts.rank;
  oo.flow = opts.flow;
  oo.seed = opts.seed;
  auto post_obs = estimate_observability_rank(red, oo);
  if (post_reach.estimated_trdeg != d || post_obs.estimated_trdeg != d)
    raise(ErrorCode::VerificationFailed, "reduced system of dimension " + std::to_string(d) + " has reachable trdeg " +
                                             std::to_string(post_reach.estimated_trdeg) + " and observability rank " +
                                             std::to_string(post_obs.estimated_trdeg));
  run_gate(red, oracle, opts);
  return red;
}

}  // namespace

LocalRealization reachability_reduce(const NashSystem& sys, const ResponseOracle& oracle, double epsilon,
                                     const ReductionOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorCode::InvalidArgument, "epsilon must be positive");
  const std::size_t n = sys.dim();
  const ReachOptions ro = reach_options(opts);
  auto rep = estimate_reachable_trdeg(sys, ro);
  const std::size_t d = rep.estimated_trdeg;
  if (d == 0) raise(ErrorCode::DegenerateSamples, "reachable set is a single point");
  const auto basis_idx = rep.basis_indices;
  std::vector<bool> in_basis(n, false);
  for (auto b : basis_idx) in_basis[b] = true;

  const std::size_t N = sample_count(opts, d);
  auto pts = reachable_samples(sys, sys.x0(), N, 2 * n, opts.sample_budget, opts.seed + 17, opts.flow);
  Mat basis(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t j = 0; j < d; ++j)
      basis(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = pts[s][static_cast<Eigen::Index>(basis_idx[j])];

  auto project = [&](const Vec& x) {
    Vec z(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) z[static_cast<Eigen::Index>(j)] = x[static_cast<Eigen::Index>(basis_idx[j])];
    return z;
  };
  const Vec z_init = project(sys.x0());

  std::vector<Fitted> rels;
  std::vector<std::size_t> lifted;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_basis[i]) continue;
    std::vector<double> target(N);
    for (std::size_t s = 0; s < N; ++s) target[s] = pts[s][static_cast<Eigen::Index>(i)];
    FitOptions fo = opts.fit;
    std::vector<double> pref{sys.x0()[static_cast<Eigen::Index>(i)]};
    for (Eigen::Index j = 0; j < z_init.size(); ++j) pref.push_back(z_init[j]);
    fo.preferred = pref;
    auto q = fit_relation(target, basis, fo);
    if (!q)
      raise(ErrorCode::FitFailure, "x" + std::to_string(i + 1) + " admits no relation against the basis within degree " +
                                       std::to_string(opts.fit.degree_bound));
    rels.push_back({"x" + std::to_string(i + 1), std::move(*q)});
    lifted.push_back(i);
  }

  auto eval_at = [&](const Vec& x, std::vector<double>& tv, Vec& pv) {
    pv = project(x);
    tv.clear();
    for (auto i : lifted) tv.push_back(x[static_cast<Eigen::Index>(i)]);
    return true;
  };
  Vec xbar;
  const std::size_t attempts = opts.shift_attempts ? opts.shift_attempts : 10 * n;
  GeneralizedInput u = find_shift(sys, epsilon, attempts, opts.seed + 31, opts.flow, rels,
                                  opts.implicit.derivative_floor, eval_at, xbar);
  const Vec z0 = project(xbar);

  double r_max = 0.0;
  for (Eigen::Index s = 0; s < basis.rows(); ++s) r_max = std::max(r_max, distance(basis.row(s).transpose(), z0));
  std::vector<double> zs(z0.data(), z0.data() + d);
  std::vector<std::optional<ImplicitMap>> lifts(n);
  for (std::size_t r = 0; r < rels.size(); ++r) {
    ImplicitMap map(rels[r].relation, zs, xbar[static_cast<Eigen::Index>(lifted[r])], opts.implicit);
    map.estimate_radius(r_max, opts.seed + r);
    lifts[lifted[r]] = std::move(map);
  }

  auto red = LocalRealization::chart(std::make_shared<NashSystem>(sys), basis_idx, std::move(lifts), z0, u);
  auto post = estimate_reachable_trdeg(red, ro);
  if (post.estimated_trdeg != d)
    raise(ErrorCode::VerificationFailed, "chart of dimension " + std::to_string(d) + " has reachable trdeg " +
                                             std::to_string(post.estimated_trdeg));
  run_gate(red, oracle, opts);
  return red;
}

LocalRealization observability_reduce(const NashSystem& sys, const ResponseOracle& oracle, double epsilon,
                                      const ReductionOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (opts.restrict_to_reachable) {
    auto reach = estimate_reachable_trdeg(sys, reach_options(opts));
    if (reach.estimated_trdeg < sys.dim()) {
      auto chart = reachability_reduce(sys, oracle, epsilon / 2, opts);
      return observability_core(chart_view(chart), oracle, epsilon / 2, opts);
    }
  }
  return observability_core(identity_view(sys), oracle, epsilon, opts);
}

LocalRealization observability_reduce(const LocalRealization& chart, const ResponseOracle& oracle, double epsilon,
                                      const ReductionOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorCode::InvalidArgument, "epsilon must be positive");
  return observability_core(chart_view(chart), oracle, epsilon, opts);
}

LocalRealization minimize(const NashSystem& sys, const ResponseOracle& oracle, double epsilon,
                          const ReductionOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorCode::InvalidArgument, "epsilon must be positive");
  auto chart = reachability_reduce(sys, oracle, epsilon / 2, opts);
  auto red = observability_core(chart_view(chart), oracle, epsilon / 2, opts);
  red.set_provenance(Provenance::Minimized);
  ResponseOptions rsp;
  rsp.rank = opts.rank;
  rsp.seed = opts.seed;
  auto resp = estimate_response_trdeg(oracle, rsp);
  if (resp.estimated_trdeg != red.dim())
    raise(ErrorCode::VerificationFailed, "minimized dimension " + std::to_string(red.dim()) +
                                             " differs from the response trdeg " +
                                             std::to_string(resp.estimated_trdeg));
  return red;
}

NashSystem resymbolize(const LocalRealization& red, unsigned degree, std::size_t samples, std::uint64_t seed) {
  const std::size_t d = red.dim();
  auto pts = reachable_samples(red, red.initial_state(), samples, 2 * d, 0.5, seed);
  std::vector<std::vector<unsigned>> monos;
  std::vector<unsigned> e(d, 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i == d) {
      monos.push_back(e);
      return;
    }
    for (unsigned k = 0; k <= left; ++k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
    e[i] = 0;
  };
  rec(0, degree);
  const Vec c = red.initial_state();
  Mat design(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(monos.size()));
  for (std::size_t s = 0; s < pts.size(); ++s)
    for (std::size_t mi = 0; mi < monos.size(); ++mi) {
      double v = 1.0;
      for (std::size_t i = 0; i < d; ++i) v *= std::pow(pts[s][static_cast<Eigen::Index>(i)], monos[mi][i]);
      design(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(mi)) = v;
    }
  auto qr = design.colPivHouseholderQr();
  auto to_expr = [&](const Vec& values) {
    Vec coef = qr.solve(values);
    std::vector<Term> terms;
    const double scale = std::max(1.0, coef.lpNorm<Eigen::Infinity>());
    for (std::size_t mi = 0; mi < monos.size(); ++mi) {
      double cv = coef[static_cast<Eigen::Index>(mi)];
      if (std::abs(cv) < 1e-10 * scale) continue;
      Term t{rational_from_double(std::round(cv * 1e12) / 1e12), {}};
      for (auto k : monos[mi]) t.exps.emplace_back(k);
      terms.push_back(std::move(t));
    }
    return NashExpr::from_terms(d, std::move(terms));
  };
  std::vector<std::vector<NashExpr>> fields(red.alphabet().size());
  for (std::size_t a = 0; a < red.alphabet().size(); ++a) {
    std::vector<Vec> comps(d, Vec(static_cast<Eigen::Index>(pts.size())));
    for (std::size_t s = 0; s < pts.size(); ++s) {
      Vec dz;
      if (!red.field(a, pts[s], dz)) raise(ErrorCode::DomainExit, "field undefined at a sample");
      for (std::size_t i = 0; i < d; ++i) comps[i][static_cast<Eigen::Index>(s)] = dz[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t i = 0; i < d; ++i) fields[a].push_back(to_expr(comps[i]));
  }
  std::vector<NashExpr> readout;
  std::vector<Vec> outs(red.num_outputs(), Vec(static_cast<Eigen::Index>(pts.size())));
  for (std::size_t s = 0; s < pts.size(); ++s) {
    Vec y = red.readout(pts[s]);
    for (std::size_t j = 0; j < outs.size(); ++j) outs[j][static_cast<Eigen::Index>(s)] = y[static_cast<Eigen::Index>(j)];
  }
  for (const auto& o : outs) readout.push_back(to_expr(o));
  return NashSystem(Box::unbounded(d), red.alphabet(), std::move(fields), std::move(readout), c);
}

}  // namespace nash
