#include <cmath>
#include <random>

#include "nash/error.hpp"
#include "nash/reduction.hpp"

namespace nash {

namespace {

enum class NewtonStatus { Converged, Diverged, Vanished };

NewtonStatus newton_iterate(const PolynomialRelation& q, std::span<const double> z, double& t,
                            const ImplicitOptions& opts) {
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    double d = q.scaled_d_dT(t, z);
    if (!std::isfinite(d)) return NewtonStatus::Diverged;
    if (std::abs(d) < opts.derivative_floor) return NewtonStatus::Vanished;
    double step = q.evaluate(t, z) / q.d_dT(t, z);
    if (!std::isfinite(step)) return NewtonStatus::Diverged;
    t -= step;
    if (std::abs(step) <= 4e-16 * (1.0 + std::abs(t))) break;
  }
  if (!std::isfinite(t)) return NewtonStatus::Diverged;
  // One polishing step settles the last bit.
  double d = q.d_dT(t, z);
  if (d != 0.0 && std::isfinite(d)) {
    double s = q.evaluate(t, z) / d;
    if (std::isfinite(s)) t -= s;
  }
  return q.relative_residual(t, z) <= opts.newton_tol ? NewtonStatus::Converged : NewtonStatus::Diverged;
}

}  // namespace

ImplicitMap::ImplicitMap(PolynomialRelation q, std::vector<double> z_star, double q_star, ImplicitOptions opts)
    : q_(std::move(q)), z_star_(std::move(z_star)), q_star_(q_star), opts_(opts) {
  if (z_star_.size() != q_.num_basis()) raise(ErrorCode::ArityMismatch, "base point has wrong dimension");
  double d0 = q_.scaled_d_dT(q_star_, z_star_);
  if (!(std::abs(d0) >= opts_.derivative_floor))
    raise(ErrorCode::DerivativeVanished, "|dQ/dT| = " + std::to_string(std::abs(d0)) + " at the base point");
  double t = q_star_;
  if (newton_iterate(q_, z_star_, t, opts_) != NewtonStatus::Converged || std::abs(t - q_star_) > 1e-6 * (1.0 + std::abs(q_star_)))
    raise(ErrorCode::InvalidArgument, "base point does not lie on the relation");
  q_star_ = t;
  init_predictor();
}

ImplicitMap ImplicitMap::restore(PolynomialRelation q, std::vector<double> z_star, double q_star, ImplicitOptions opts,
                                 double radius) {
  if (z_star.size() != q.num_basis()) raise(ErrorCode::ArityMismatch, "base point has wrong dimension");
  ImplicitMap m;
  m.q_ = std::move(q);
  m.z_star_ = std::move(z_star);
  m.q_star_ = q_star;
  m.opts_ = opts;
  m.radius_ = radius;
  m.init_predictor();
  return m;
}

void ImplicitMap::init_predictor() {
  base_sign_ = q_.scaled_d_dT(q_star_, z_star_) > 0 ? 1.0 : -1.0;
  predictor_.assign(z_star_.size(), 0.0);
  gradient(z_star_, q_star_, predictor_);
}

void ImplicitMap::gradient(std::span<const double> z, double q, std::span<double> out) const {
  q_.d_dbasis(q, z, out);
  double dt = q_.d_dT(q, z);
  for (auto& v : out) v = -v / dt;
}

bool ImplicitMap::newton(std::span<const double> z, double& q) const {
  auto st = newton_iterate(q_, z, q, opts_);
  if (st == NewtonStatus::Vanished)
    raise(ErrorCode::DerivativeVanished, "|dQ/dT| fell below the floor during Newton iteration");
  return st == NewtonStatus::Converged && q_.scaled_d_dT(q, z) * base_sign_ > 0;
}

double ImplicitMap::solve(std::span<const double> z) const {
  if (z.size() != z_star_.size()) raise(ErrorCode::ArityMismatch, "implicit map evaluated with wrong dimension");
  double q = q_star_;
  for (std::size_t i = 0; i < z.size(); ++i) q += predictor_[i] * (z[i] - z_star_[i]);
  bool vanished = false;
  try {
    if (newton(z, q)) return q;
  } catch (const Error&) {
    vanished = true;
  }
  // Continuation from the base keeps the branch through (q*, z*).
  std::vector<double> zj(z.size()), prev(z_star_), g(z.size());
  for (std::size_t steps : {8, 64}) {
    double qj = q_star_;
    prev = z_star_;
    bool ok = true;
    for (std::size_t j = 1; j <= steps && ok; ++j) {
      double s = static_cast<double>(j) / static_cast<double>(steps);
      for (std::size_t i = 0; i < z.size(); ++i) zj[i] = z_star_[i] + s * (z[i] - z_star_[i]);
      gradient(prev, qj, g);
      for (std::size_t i = 0; i < z.size(); ++i) qj += g[i] * (zj[i] - prev[i]);
      try {
        ok = newton(zj, qj);
      } catch (const Error&) {
        vanished = true;
        ok = false;
      }
      prev = zj;
    }
    if (ok) return qj;
  }
  if (vanished) raise(ErrorCode::DerivativeVanished, "|dQ/dT| fell below the floor along the continuation path");
  raise(ErrorCode::NewtonDiverged, "Newton continuation failed; the point left the implicit-function neighborhood");
}

void ImplicitMap::estimate_radius(double r_max, std::uint64_t seed) {
  if (!(r_max > 0.0)) raise(ErrorCode::InvalidArgument, "probe radius must be positive");
  const std::size_t d = z_star_.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double fail = std::numeric_limits<double>::infinity();
  const std::size_t rays = d == 1 ? 2 : opts_.probe_rays;
  std::vector<double> dir(d), z(d);
  for (std::size_t r = 0; r < rays; ++r) {
    if (d == 1) {
      dir[0] = r % 2 == 0 ? 1.0 : -1.0;
    } else {
      double nrm = 0.0;
      for (auto& v : dir) {
        v = nd(rng);
        nrm += v * v;
      }
      nrm = std::sqrt(nrm);
      for (auto& v : dir) v /= nrm;
    }
    constexpr int kSteps = 32;
    for (int j = 1; j <= kSteps; ++j) {
      double t = 2.0 * r_max * j / kSteps;
      for (std::size_t i = 0; i < d; ++i) z[i] = z_star_[i] + t * dir[i];
      try {
        solve(z);
      } catch (const Error&) {
        fail = std::min(fail, t);
        break;
      }
    }
  }
  radius_ = std::min(r_max, 0.5 * fail);
}

bool ImplicitMap::within(std::span<const double> z) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += (z[i] - z_star_[i]) * (z[i] - z_star_[i]);
  return std::sqrt(acc) <= radius_;
}

}  // namespace nash
