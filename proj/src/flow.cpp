// Dormand-Prince 5(4) with FSAL and Hairer's 4th-order continuous extension.

#include <algorithm>
#include <cmath>
#include <functional>

#include "nash/error.hpp"
#include "nash/system.hpp"

namespace nash {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

using Rhs = std::function<bool(const Vec&, Vec&)>;
using InsideFn = std::function<bool(const Vec&)>;

struct SegmentResult {
  FlowStatus status = FlowStatus::Ok;
  std::size_t steps = 0;
};

Vec dense_eval(const std::vector<Vec>& rc, double theta) {
  double th1 = 1.0 - theta;
  return rc[0] + theta * (rc[1] + th1 * (rc[2] + theta * (rc[3] + th1 * rc[4])));
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double tol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    double sk = tol + tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double r = err[i] / sk;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

double initial_step(const Rhs& rhs, const Vec& y0, const Vec& f0, double span, double tol) {
  const double n = static_cast<double>(y0.size());
  double dy = 0.0, df = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    double sk = tol + tol * std::abs(y0[i]);
    dy += (y0[i] / sk) * (y0[i] / sk);
    df += (f0[i] / sk) * (f0[i] / sk);
  }
  dy = std::sqrt(dy / n);
  df = std::sqrt(df / n);
  double h0 = (dy < 1e-10 || df < 1e-10) ? 1e-6 : 0.01 * dy / df;
  h0 = std::min(h0, span);
  Vec y1 = y0 + h0 * f0;
  Vec f1;
  if (!rhs(y1, f1)) return std::min(span, h0 * 1e-2);
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    double sk = tol + tol * std::abs(y0[i]);
    d2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  d2 = std::sqrt(d2 / n) / h0;
  double m = std::max(df, d2);
  double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
  return std::min({100.0 * h0, h1, span});
}

/// Integrates y over signed duration T. `arc` is the elapsed |time| before
/// this segment, used to stamp dense steps.
SegmentResult integrate_segment(const Rhs& rhs, const InsideFn& inside, Vec& y, double T,
                                double tol, std::size_t max_steps, double arc,
                                std::vector<DenseStep>* dense, std::size_t x_dim) {
  SegmentResult res;
  if (T == 0.0) return res;
  const double dir = T > 0 ? 1.0 : -1.0;
  const double span = std::abs(T);
  Vec f0;
  if (!rhs(y, f0)) {
    res.status = inside(y) ? FlowStatus::BlowUp : FlowStatus::DomainExit;
    return res;
  }
  double h = dir * initial_step(rhs, y, f0, span, tol);
  double t = 0.0;
  bool rejected_last = false;
  bool stage_outside = false;
  Vec k2, k3, k4, k5, k6, k7, ys;

  auto eval_stage = [&](const Vec& at, Vec& k) {
    if (rhs(at, k)) return true;
    if (!inside(at)) stage_outside = true;
    return false;
  };

  while (dir * (T - t) > 0.0) {
    if (res.steps >= max_steps) {
      res.status = FlowStatus::BlowUp;
      return res;
    }
    double remaining = T - t;
    if (std::abs(remaining) <= 1e-15 * span) break;
    if (dir * (t + h - T) > 0.0 || std::abs(remaining - h) < 1e-12 * std::abs(h)) h = remaining;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)) && std::abs(h) < std::abs(remaining)) {
      res.status = stage_outside ? FlowStatus::DomainExit : FlowStatus::BlowUp;
      return res;
    }

    bool ok = eval_stage(y + h * (a21 * f0), k2) &&
              eval_stage(y + h * (a31 * f0 + a32 * k2), k3) &&
              eval_stage(y + h * (a41 * f0 + a42 * k2 + a43 * k3), k4) &&
              eval_stage(y + h * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4), k5) &&
              eval_stage(y + h * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    if (ok) {
      ys = y + h * (a71 * f0 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      ok = eval_stage(ys, k7);
    }
    if (!ok) {
      h *= 0.25;
      rejected_last = true;
      continue;
    }
    Vec err = h * (e1 * f0 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = error_norm(err, y, ys, tol);
    if (!std::isfinite(en)) {
      h *= 0.25;
      rejected_last = true;
      continue;
    }
    if (en <= 1.0) {
      std::vector<Vec> rc(5);
      rc[0] = y;
      rc[1] = ys - y;
      rc[2] = h * f0 - rc[1];
      rc[3] = rc[1] - h * k7 - rc[2];
      rc[4] = h * (d1 * f0 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      for (int j = 1; j <= 8; ++j) {
        if (!inside(dense_eval(rc, j / 9.0))) {
          res.status = FlowStatus::DomainExit;
          return res;
        }
      }
      if (!inside(ys)) {
        res.status = FlowStatus::DomainExit;
        return res;
      }
      if (dense) {
        DenseStep step{arc + std::abs(t), std::abs(h), {}};
        step.coeffs.reserve(5);
        for (auto& c : rc) step.coeffs.push_back(c.head(static_cast<Eigen::Index>(x_dim)));
        dense->push_back(std::move(step));
      }
      t += h;
      y = ys;
      f0 = k7;
      ++res.steps;
      double fac = en == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
      if (rejected_last) fac = std::min(fac, 1.0);
      rejected_last = false;
      h *= fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      rejected_last = true;
    }
  }
  return res;
}

}  // namespace

Vec DenseStep::at(double t) const {
  double theta = h > 0 ? (t - t0) / h : 0.0;
  return dense_eval(coeffs, std::clamp(theta, 0.0, 1.0));
}

Vec Trajectory::state_at(double t) const {
  if (steps.empty()) raise(ErrorCode::InvalidArgument, "trajectory has no dense output");
  auto it = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double v, const DenseStep& s) { return v < s.t0; });
  if (it != steps.begin()) --it;
  return it->at(t);
}

Trajectory try_flow(const ControlSystem& sys, const Vec& x, const GeneralizedInput& u,
                    const FlowOptions& opts) {
  check_word(sys.alphabet(), u);
  Trajectory traj;
  traj.breakpoints.push_back(0.0);
  Vec y = x;
  if (!sys.inside(y)) {
    traj.status = FlowStatus::DomainExit;
    traj.terminal = y;
    return traj;
  }
  double arc = 0.0;
  for (const auto& seg : u.word()) {
    const std::size_t letter = seg.letter;
    Rhs rhs = [&](const Vec& s, Vec& ds) { return sys.field(letter, s, ds); };
    InsideFn in = [&](const Vec& s) { return sys.inside(s); };
    auto r = integrate_segment(rhs, in, y, seg.duration, opts.tol, opts.max_steps, arc,
                               opts.store_dense ? &traj.steps : nullptr,
                               static_cast<std::size_t>(x.size()));
    traj.num_steps += r.steps;
    if (r.status != FlowStatus::Ok) {
      traj.status = r.status;
      traj.terminal = y;
      return traj;
    }
    arc += std::abs(seg.duration);
    traj.breakpoints.push_back(arc);
  }
  traj.terminal = y;
  traj.success = true;
  traj.status = FlowStatus::Ok;
  return traj;
}

Trajectory flow(const ControlSystem& sys, const Vec& x, const GeneralizedInput& u,
                const FlowOptions& opts) {
  Trajectory traj = try_flow(sys, x, u, opts);
  if (traj.status == FlowStatus::DomainExit)
    raise(ErrorCode::DomainExit, "trajectory left the state space; input is not admissible");
  if (traj.status == FlowStatus::BlowUp)
    raise(ErrorCode::BlowUp, "step size underflow or step limit exceeded");
  return traj;
}

Sensitivity flow_sensitivity(const ControlSystem& sys, const Vec& x, const GeneralizedInput& u,
                             const FlowOptions& opts) {
  check_word(sys.alphabet(), u);
  const auto n = static_cast<Eigen::Index>(sys.dim());
  const std::size_t k = u.size();
  Sensitivity out;
  out.terminal = x;
  if (!sys.inside(x)) {
    out.status = FlowStatus::DomainExit;
    return out;
  }
  std::vector<Mat> transitions;
  std::vector<Vec> end_fields;
  transitions.reserve(k);
  end_fields.reserve(k);
  Vec y(n + n * n);
  Vec state = x;
  for (const auto& seg : u.word()) {
    const std::size_t letter = seg.letter;
    y.head(n) = state;
    Eigen::Map<Mat>(y.data() + n, n, n).setIdentity();
    Mat jac;
    Vec fx;
    Rhs rhs = [&](const Vec& s, Vec& ds) {
      Vec xs = s.head(n);
      if (!sys.field(letter, xs, fx) || !sys.field_jacobian(letter, xs, jac)) return false;
      ds.resize(s.size());
      ds.head(n) = fx;
      Eigen::Map<const Mat> m(s.data() + n, n, n);
      Eigen::Map<Mat>(ds.data() + n, n, n) = jac * m;
      return true;
    };
    InsideFn in = [&](const Vec& s) { return sys.inside(s.head(n)); };
    auto r = integrate_segment(rhs, in, y, seg.duration, opts.tol, opts.max_steps, 0.0, nullptr,
                               static_cast<std::size_t>(n));
    if (r.status != FlowStatus::Ok) {
      out.status = r.status;
      out.terminal = y.head(n);
      return out;
    }
    state = y.head(n);
    transitions.emplace_back(Eigen::Map<const Mat>(y.data() + n, n, n));
    Vec f_end;
    if (!sys.field(letter, state, f_end)) {
      out.status = FlowStatus::DomainExit;
      out.terminal = state;
      return out;
    }
    end_fields.push_back(std::move(f_end));
  }
  out.terminal = state;
  out.d_durations.resize(n, static_cast<Eigen::Index>(k));
  Mat later = Mat::Identity(n, n);
  for (std::size_t i = k; i-- > 0;) {
    out.d_durations.col(static_cast<Eigen::Index>(i)) = later * end_fields[i];
    later = later * transitions[i];
  }
  out.d_initial = later;
  out.success = true;
  out.status = FlowStatus::Ok;
  return out;
}

}  // namespace nash
