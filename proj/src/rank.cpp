#include <algorithm>
#include <cmath>
#include <limits>

#include "nash/analysis.hpp"

namespace nash {

namespace {

Mat normalized_rows(const Mat& j) {
  Mat out = j;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double nrm = out.row(i).norm();
    if (nrm > 0.0 && std::isfinite(nrm)) out.row(i) /= nrm;
  }
  return out;
}

std::vector<double> singular_values(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

std::size_t count_above(const std::vector<double>& s, double cut) {
  std::size_t r = 0;
  for (double v : s)
    if (v > cut) ++r;
  return r;
}

}  // namespace

RankEvidence numerical_rank(const Mat& jacobian, const RankOptions& opts) {
  RankEvidence ev;
  if (!jacobian.allFinite()) raise(ErrorCode::IllConditioned, "non-finite Jacobian entry");
  ev.singular_values = singular_values(normalized_rows(jacobian));
  const double inf = std::numeric_limits<double>::infinity();
  if (ev.singular_values.empty() || ev.singular_values.front() == 0.0) {
    ev.rank = 0;
    ev.gap = inf;
    return ev;
  }
  const double smax = ev.singular_values.front();
  ev.rank = count_above(ev.singular_values, opts.rank_tol * smax);
  if (ev.rank == ev.singular_values.size() || ev.singular_values[ev.rank] == 0.0)
    ev.gap = inf;
  else
    ev.gap = ev.singular_values[ev.rank - 1] / ev.singular_values[ev.rank];
  // Below this floor the cut sits inside rounding noise and proves nothing.
  const double floor = std::numeric_limits<double>::epsilon() *
                       static_cast<double>(std::max(jacobian.rows(), jacobian.cols()));
  ev.confident = ev.gap >= opts.gap_ratio && opts.rank_tol >= floor;
  return ev;
}

std::size_t exact_rank(const std::vector<std::vector<Rational>>& rows) {
  auto m = rows;
  std::size_t rank = 0;
  const std::size_t cols = m.empty() ? 0 : m.front().size();
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && sgn(m[piv][c]) == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (sgn(m[r][c]) == 0) continue;
      Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

namespace {

/// Rows taken in order whenever they raise the numerical rank.
std::vector<std::size_t> greedy_basis(const Mat& jac, std::size_t target, const RankOptions& opts) {
  std::vector<std::size_t> chosen;
  if (target == 0) return chosen;
  Mat norm = normalized_rows(jac);
  auto full = singular_values(norm);
  const double cut = opts.rank_tol * (full.empty() ? 0.0 : full.front());
  for (Eigen::Index i = 0; i < norm.rows() && chosen.size() < target; ++i) {
    Mat sub(static_cast<Eigen::Index>(chosen.size() + 1), norm.cols());
    for (std::size_t k = 0; k < chosen.size(); ++k)
      sub.row(static_cast<Eigen::Index>(k)) = norm.row(static_cast<Eigen::Index>(chosen[k]));
    sub.row(static_cast<Eigen::Index>(chosen.size())) = norm.row(i);
    if (count_above(singular_values(sub), cut) == chosen.size() + 1)
      chosen.push_back(static_cast<std::size_t>(i));
  }
  return chosen;
}

}  // namespace

TranscendenceReport rank_report(const std::vector<Mat>& jacobians, const RankOptions& opts) {
  TranscendenceReport rep;
  rep.rank_tolerance = opts.rank_tol;
  rep.gap_ratio = opts.gap_ratio;
  if (jacobians.empty()) raise(ErrorCode::InvalidArgument, "no Jacobian samples");
  rep.num_generators = static_cast<std::size_t>(jacobians.front().rows());
  rep.ambient_dim = static_cast<std::size_t>(jacobians.front().cols());
  for (const auto& j : jacobians) rep.samples.push_back(numerical_rank(j, opts));
  std::size_t best = 0;
  for (std::size_t s = 1; s < rep.samples.size(); ++s) {
    const auto &a = rep.samples[s], &b = rep.samples[best];
    if (a.rank > b.rank || (a.rank == b.rank && a.gap > b.gap)) best = s;
  }
  rep.best_sample = best;
  rep.estimated_trdeg = rep.samples[best].rank;
  rep.low_confidence = !rep.samples[best].confident;
  rep.basis_indices = greedy_basis(jacobians[best], rep.estimated_trdeg, opts);
  if (rep.basis_indices.size() != rep.estimated_trdeg) {
    rep.low_confidence = true;
    rep.notes.push_back("greedy basis shorter than the rank");
  }
  return rep;
}

PointSampler box_sampler(const Box& domain, std::vector<double> center, double spread) {
  if (center.size() != domain.dim()) raise(ErrorCode::ArityMismatch, "sampler center has wrong dimension");
  return [domain, center, spread](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> p(center.size());
    Vec v(static_cast<Eigen::Index>(center.size()));
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (std::size_t i = 0; i < center.size(); ++i) {
        double s = spread * std::max(1.0, std::abs(center[i]));
        if (domain.positive[i]) s = std::min(s, 0.9 * center[i]);
        p[i] = center[i] + s * u(rng);
        v[static_cast<Eigen::Index>(i)] = p[i];
      }
      if (domain.contains(v)) return p;
    }
    return center;
  };
}

}  // namespace nash
