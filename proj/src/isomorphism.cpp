#include <cmath>

#include "nash/error.hpp"
#include "nash/minimality.hpp"

namespace nash {

namespace {

std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Vec eval_maps(const std::vector<ImplicitMap>& maps, const Vec& x) {
  Vec out(static_cast<Eigen::Index>(maps.size()));
  for (std::size_t j = 0; j < maps.size(); ++j) {
    if (!maps[j].within(as_span(x))) raise(ErrorCode::DomainExit, "point outside the isomorphism's validity region");
    out[static_cast<Eigen::Index>(j)] = maps[j].solve(as_span(x));
  }
  return out;
}

Mat jacobian_of(const std::vector<ImplicitMap>& maps, const Vec& x) {
  Vec q = eval_maps(maps, x);
  const auto n = static_cast<Eigen::Index>(x.size());
  Mat jac(static_cast<Eigen::Index>(maps.size()), n);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < maps.size(); ++j) {
    maps[j].gradient(as_span(x), q[static_cast<Eigen::Index>(j)], g);
    for (Eigen::Index i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(j), i) = g[static_cast<std::size_t>(i)];
  }
  return jac;
}

double max_distance(const Mat& rows, const Vec& c) {
  double r = 0.0;
  for (Eigen::Index s = 0; s < rows.rows(); ++s) r = std::max(r, (rows.row(s).transpose() - c).norm());
  return r;
}

}  // namespace

Vec LocalIsomorphism::apply(const Vec& x) const { return eval_maps(forward, x); }
Vec LocalIsomorphism::inverse(const Vec& z) const { return eval_maps(backward, z); }
Mat LocalIsomorphism::apply_jacobian(const Vec& x) const { return jacobian_of(forward, x); }
Mat LocalIsomorphism::inverse_jacobian(const Vec& z) const { return jacobian_of(backward, z); }

LocalIsomorphism construct_isomorphism(const ControlSystem& sys1, const ControlSystem& sys2,
                                       const ResponseOracle& oracle, double epsilon,
                                       const IsomorphismOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (sys1.dim() != sys2.dim())
    raise(ErrorCode::DimensionMismatch, "systems have dimensions " + std::to_string(sys1.dim()) + " and " +
                                            std::to_string(sys2.dim()));
  if (!(sys1.alphabet() == sys2.alphabet())) raise(ErrorCode::AlphabetMismatch, "systems use different alphabets");
  const std::size_t n = sys1.dim();

  if (opts.require_minimal) {
    MinimalityOptions mo;
    mo.rank = opts.rank;
    mo.flow = opts.flow;
    mo.seed = opts.seed;
    for (const ControlSystem* s : {&sys1, &sys2}) {
      auto v = check_minimality(*s, oracle, mo);
      if (v.verdict != Verdict::Minimal) {
        std::string why = v.witnesses.empty() ? "" : ": " + v.witnesses.front();
        raise(ErrorCode::InvalidArgument, std::string(s == &sys1 ? "first" : "second") + " system is " +
                                              verdict_name(v.verdict) + why);
      }
    }
  }

  const std::size_t N = opts.fit_samples ? opts.fit_samples : fit_sample_count(n, opts.fit.degree_bound);
  Mat X1(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
  Mat X2(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
  std::size_t got = 0;
  for (std::size_t batch = 0; got < N; ++batch) {
    if (batch > 20) raise(ErrorCode::DomainExit, "too few sampled words are admissible for both systems");
    auto words = sample_inputs(sys1.alphabet(), 2 * n, opts.sample_budget, N, opts.seed + 17 + 1000003 * batch);
    for (const auto& w : words) {
      if (got >= N) break;
      Trajectory a = try_flow(sys1, sys1.initial_state(), w, opts.flow);
      Trajectory b = try_flow(sys2, sys2.initial_state(), w, opts.flow);
      if (!a.success || !b.success) continue;
      X1.row(static_cast<Eigen::Index>(got)) = a.terminal.transpose();
      X2.row(static_cast<Eigen::Index>(got)) = b.terminal.transpose();
      ++got;
    }
  }

  auto fit_all = [&](const Mat& target, const Mat& basis, const Vec& t0, const Vec& b0, const char* name) {
    std::vector<PolynomialRelation> rels;
    for (std::size_t j = 0; j < n; ++j) {
      FitOptions fo = opts.fit;
      std::vector<double> pref{t0[static_cast<Eigen::Index>(j)]};
      for (Eigen::Index i = 0; i < b0.size(); ++i) pref.push_back(b0[i]);
      fo.preferred = pref;
      const Vec col = target.col(static_cast<Eigen::Index>(j));
      auto q = fit_relation(std::vector<double>(col.data(), col.data() + col.size()), basis, fo);
      if (!q)
        raise(ErrorCode::FitFailure, std::string(name) + " coordinate " + std::to_string(j + 1) +
                                         " admits no relation within degree " + std::to_string(opts.fit.degree_bound));
      rels.push_back(std::move(*q));
    }
    return rels;
  };
  auto Q = fit_all(X2, X1, sys2.initial_state(), sys1.initial_state(), "second system");
  auto R = fit_all(X1, X2, sys1.initial_state(), sys2.initial_state(), "first system");

  const std::size_t attempts = opts.shift_attempts ? opts.shift_attempts : 10 * n;
  auto words = sample_inputs(sys1.alphabet(), n, epsilon, attempts, opts.seed + 31);
  std::optional<GeneralizedInput> shift;
  Vec xb1, xb2;
  double best = -1.0;
  for (const auto& u : words) {
    if (!(u.total_time() < epsilon)) continue;
    Trajectory a = try_flow(sys1, sys1.initial_state(), u, opts.flow);
    Trajectory b = try_flow(sys2, sys2.initial_state(), u, opts.flow);
    if (!a.success || !b.success) continue;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      lo = std::min(lo, std::abs(Q[j].scaled_d_dT(b.terminal[static_cast<Eigen::Index>(j)], as_span(a.terminal))));
      lo = std::min(lo, std::abs(R[j].scaled_d_dT(a.terminal[static_cast<Eigen::Index>(j)], as_span(b.terminal))));
    }
    if (!std::isfinite(lo)) lo = 0.0;
    best = std::max(best, lo);
    if (lo >= opts.implicit.derivative_floor) {
      shift = u;
      xb1 = a.terminal;
      xb2 = b.terminal;
      break;
    }
  }
  if (!shift)
    raise(ErrorCode::NoValidShiftInput, "no shift with T_u < " + std::to_string(epsilon) +
                                            " keeps every dQ/dT above the floor (best " + std::to_string(best) + ")");

  LocalIsomorphism iso;
  iso.base1 = xb1;
  iso.base2 = xb2;
  iso.shift = *shift;
  const double r1 = max_distance(X1, xb1), r2 = max_distance(X2, xb2);
  std::vector<double> z1(xb1.data(), xb1.data() + n), z2(xb2.data(), xb2.data() + n);
  for (std::size_t j = 0; j < n; ++j) {
    iso.forward.emplace_back(Q[j], z1, xb2[static_cast<Eigen::Index>(j)], opts.implicit);
    iso.forward.back().estimate_radius(r1, opts.seed + j);
    iso.backward.emplace_back(R[j], z2, xb1[static_cast<Eigen::Index>(j)], opts.implicit);
    iso.backward.back().estimate_radius(r2, opts.seed + n + j);
  }
  iso.radius = std::numeric_limits<double>::infinity();
  for (const auto& m : iso.forward) iso.radius = std::min(iso.radius, m.radius());

  iso.jacobian = iso.apply_jacobian(xb1);
  Eigen::JacobiSVD<Mat> svd(iso.jacobian);
  const auto& sv = svd.singularValues();
  iso.condition_number = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
  if (!std::isfinite(iso.condition_number) || iso.condition_number > 1e12)
    raise(ErrorCode::NotBijective, "Jacobian of the forward map is singular at the base point (condition " +
                                       std::to_string(iso.condition_number) + ")");

  std::size_t checked = 0;
  for (Eigen::Index s = 0; s < X1.rows(); ++s) {
    Vec x = X1.row(s).transpose();
    if ((x - xb1).norm() >= iso.radius) continue;
    Vec back;
    try {
      back = iso.inverse(iso.apply(x));
    } catch (const Error&) {
      continue;
    }
    ++checked;
    iso.round_trip = std::max(iso.round_trip, (back - x).lpNorm<Eigen::Infinity>());
  }
  if (checked == 0) raise(ErrorCode::NotBijective, "no construction sample lies inside both validity regions");
  if (!(iso.round_trip <= opts.iso_tol))
    raise(ErrorCode::NotBijective, "round trip residual " + std::to_string(iso.round_trip) + " exceeds " +
                                       std::to_string(opts.iso_tol));
  return iso;
}

IsomorphismReport verify_isomorphism(const LocalIsomorphism& iso, const ControlSystem& sys1,
                                     const ControlSystem& sys2, const IsoVerifyOptions& opts) {
  IsomorphismReport rep;
  rep.tol = opts.tol;
  const std::size_t n = iso.dim();
  auto probes = reachable_samples(sys1, iso.base1, opts.probes, 2 * n, opts.budget, opts.seed, opts.flow);
  double radius = 0.0;
  for (const auto& x : probes) {
    Vec z, back;
    try {
      z = iso.apply(x);
      back = iso.inverse(z);
    } catch (const Error&) {
      continue;
    }
    ++rep.probes;
    radius = std::max(radius, (x - iso.base1).norm());
    rep.round_trip = std::max(rep.round_trip, (back - x).norm());

    Mat dxi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    bool fd_ok = true;
    for (std::size_t i = 0; i < n && fd_ok; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double h = opts.fd_step * (1.0 + std::abs(x[ii]));
      Vec xp = x, xm = x;
      xp[ii] += h;
      xm[ii] -= h;
      try {
        dxi.col(ii) = (iso.apply(xp) - iso.apply(xm)) / (2 * h);
      } catch (const Error&) {
        fd_ok = false;
      }
    }
    if (!fd_ok) {
      rep.pushforward = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t a = 0; a < sys1.alphabet().size(); ++a) {
        Vec f1, f2;
        if (!sys1.field(a, x, f1) || !sys2.field(a, z, f2)) {
          rep.pushforward = std::numeric_limits<double>::infinity();
          continue;
        }
        rep.pushforward = std::max(rep.pushforward, (dxi * f1 - f2).norm());
      }
    }
    try {
      rep.readout = std::max(rep.readout, (sys2.readout(z) - sys1.readout(x)).norm());
    } catch (const Error&) {
      rep.readout = std::numeric_limits<double>::infinity();
    }
  }

  auto words = sample_inputs(sys1.alphabet(), 4, opts.budget, opts.words, opts.seed + 1);
  for (const auto& v : words) {
    Trajectory a = try_flow(sys1, iso.base1, v, opts.flow);
    Trajectory b = try_flow(sys2, iso.base2, v, opts.flow);
    if (!a.success || !b.success) continue;
    Vec z;
    try {
      z = iso.apply(a.terminal);
    } catch (const Error&) {
      continue;
    }
    ++rep.words;
    rep.intertwining = std::max(rep.intertwining, (z - b.terminal).norm());
  }

  const Mat prod = iso.inverse_jacobian(iso.base2) * iso.apply_jacobian(iso.base1);
  rep.jacobian_round_trip = (prod - Mat::Identity(prod.rows(), prod.cols())).norm();

  const bool enough_probes = 2 * rep.probes >= opts.probes;
  const bool enough_words = 2 * rep.words >= opts.words;
  rep.pass_round_trip = enough_probes && rep.round_trip <= opts.tol;
  rep.pass_pushforward = enough_probes && rep.pushforward <= opts.tol;
  rep.pass_readout = enough_probes && rep.readout <= opts.tol;
  rep.pass_intertwining = enough_words && rep.intertwining <= opts.tol;
  rep.pass = rep.pass_round_trip && rep.pass_pushforward && rep.pass_readout && rep.pass_intertwining;
  if (rep.pass) rep.probed_radius = radius;
  return rep;
}

}  // namespace nash
