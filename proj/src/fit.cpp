#include <algorithm>
#include <cmath>

#include "nash/analysis.hpp"

namespace nash {

namespace {

/// Exponent vectors over nv variables with e_0 <= max_t and total <= deg.
std::vector<std::vector<unsigned>> monomials(std::size_t nv, unsigned deg, unsigned max_t) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> cur(nv, 0);
  auto rec = [&](auto&& self, std::size_t k, unsigned left) -> void {
    if (k == nv) {
      out.push_back(cur);
      return;
    }
    unsigned cap = k == 0 ? std::min(left, max_t) : left;
    for (unsigned e = 0; e <= cap; ++e) {
      cur[k] = e;
      self(self, k + 1, left - e);
    }
    cur[k] = 0;
  };
  rec(rec, 0, deg);
  return out;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

double mono(const std::vector<double>& u, const std::vector<unsigned>& e) {
  double v = 1.0;
  for (std::size_t k = 0; k < e.size(); ++k)
    for (unsigned p = 0; p < e[k]; ++p) v *= u[k];
  return v;
}

}  // namespace

std::size_t fit_sample_count(std::size_t num_basis, unsigned degree_bound) {
  auto m = static_cast<std::size_t>(binomial(num_basis + 1 + degree_bound, num_basis + 1));
  return 4 * m + 8;
}

std::optional<PolynomialRelation> fit_relation(const std::vector<double>& target, const Mat& basis,
                                               const FitOptions& opts) {
  const std::size_t N = target.size();
  const std::size_t d = static_cast<std::size_t>(basis.cols());
  const std::size_t nv = d + 1;
  if (static_cast<std::size_t>(basis.rows()) != N)
    raise(ErrorCode::ArityMismatch, "target and basis sample counts differ");
  if (N < 4) raise(ErrorCode::InvalidArgument, "at least 4 samples are needed");
  if (!(opts.fit_tol > 0.0)) raise(ErrorCode::InvalidArgument, "fit_tol must be positive");
  if (opts.validation_stride < 2) raise(ErrorCode::InvalidArgument, "validation stride must be at least 2");

  std::vector<double> center(nv), scale(nv);
  auto column = [&](std::size_t k, std::size_t s) { return k == 0 ? target[s] : basis(Eigen::Index(s), Eigen::Index(k - 1)); };
  for (std::size_t k = 0; k < nv; ++k) {
    double lo = column(k, 0), hi = lo;
    for (std::size_t s = 0; s < N; ++s) {
      double v = column(k, s);
      if (!std::isfinite(v)) raise(ErrorCode::IllConditioned, "non-finite sample value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    center[k] = 0.5 * (lo + hi);
    scale[k] = 0.5 * (hi - lo);
    if (!(scale[k] > 1e-14 * std::max(1.0, std::abs(center[k])))) {
      if (k == 0) {
        PolynomialRelation q(d, {[&] { std::vector<unsigned> e(nv, 0); e[0] = 1; return e; }()}, {1.0}, center,
                             std::vector<double>(nv, 1.0));
        return q;
      }
      raise(ErrorCode::IllConditioned, "basis function " + std::to_string(k) + " is constant on the samples");
    }
  }

  std::vector<std::vector<double>> u(N, std::vector<double>(nv));
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t k = 0; k < nv; ++k) u[s][k] = (column(k, s) - center[k]) / scale[k];
  std::vector<std::size_t> fit_rows, val_rows;
  for (std::size_t s = 0; s < N; ++s)
    (s % opts.validation_stride == opts.validation_stride - 1 ? val_rows : fit_rows).push_back(s);

  std::vector<double> pref_u;
  if (opts.preferred) {
    if (opts.preferred->size() != nv) raise(ErrorCode::ArityMismatch, "preferred point has wrong length");
    for (std::size_t k = 0; k < nv; ++k) pref_u.push_back(((*opts.preferred)[k] - center[k]) / scale[k]);
  }

  for (unsigned deg = 1; deg <= opts.degree_bound; ++deg) {
    for (unsigned mt = 1; mt <= deg; ++mt) {
      auto monos = monomials(nv, deg, mt);
      const auto m = static_cast<Eigen::Index>(monos.size());
      if (fit_rows.size() < 3 * monos.size()) return std::nullopt;
      Mat A(static_cast<Eigen::Index>(fit_rows.size()), m);
      for (std::size_t r = 0; r < fit_rows.size(); ++r)
        for (Eigen::Index c = 0; c < m; ++c)
          A(static_cast<Eigen::Index>(r), c) = mono(u[fit_rows[r]], monos[static_cast<std::size_t>(c)]);
      Vec norms(m);
      for (Eigen::Index c = 0; c < m; ++c) {
        norms[c] = A.col(c).norm();
        if (!(norms[c] > 0.0)) raise(ErrorCode::IllConditioned, "monomial column vanishes on the samples");
        A.col(c) /= norms[c];
      }
      Eigen::HouseholderQR<Mat> qr(A);
      Mat R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
      Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullV);
      const Vec& sv = svd.singularValues();
      const double smax = sv[0];
      if (!(sv[m - 1] < opts.fit_tol * smax)) continue;
      std::vector<Eigen::Index> null_cols;
      for (Eigen::Index i = 0; i < m; ++i)
        if (sv[i] < opts.fit_tol * smax) null_cols.push_back(i);
      Mat Nsp(m, static_cast<Eigen::Index>(null_cols.size()));
      for (std::size_t i = 0; i < null_cols.size(); ++i)
        Nsp.col(static_cast<Eigen::Index>(i)) = svd.matrixV().col(null_cols[i]);

      // A null direction with no T-part is a relation among the basis alone.
      std::vector<Eigen::Index> trows;
      for (Eigen::Index c = 0; c < m; ++c)
        if (monos[static_cast<std::size_t>(c)][0] > 0) trows.push_back(c);
      Mat Tpart(static_cast<Eigen::Index>(trows.size()), Nsp.cols());
      for (std::size_t i = 0; i < trows.size(); ++i) Tpart.row(static_cast<Eigen::Index>(i)) = Nsp.row(trows[i]);
      Eigen::JacobiSVD<Mat> tsvd(Tpart);
      const Vec& ts = tsvd.singularValues();
      if (ts.size() < Nsp.cols() || ts[ts.size() - 1] < 1e-6)
        raise(ErrorCode::IllConditioned, "basis functions are algebraically dependent on the samples");

      Vec v = Nsp.col(Nsp.cols() - 1);
      if (Nsp.cols() > 1 && !pref_u.empty()) {
        Vec g(m);
        for (Eigen::Index c = 0; c < m; ++c) {
          const auto& e = monos[static_cast<std::size_t>(c)];
          if (e[0] == 0) {
            g[c] = 0.0;
            continue;
          }
          auto e1 = e;
          e1[0] -= 1;
          g[c] = static_cast<double>(e[0]) * mono(pref_u, e1) / norms[c];
        }
        Vec proj = Nsp * (Nsp.transpose() * g);
        if (proj.norm() > 1e-12) v = proj / proj.norm();
      }
      std::vector<double> coef(static_cast<std::size_t>(m));
      double mx = 0.0;
      for (Eigen::Index c = 0; c < m; ++c) {
        coef[static_cast<std::size_t>(c)] = v[c] / norms[c];
        mx = std::max(mx, std::abs(coef[static_cast<std::size_t>(c)]));
      }
      for (auto& c : coef) {
        c /= mx;
        if (std::abs(c) < 1e-13) c = 0.0;
      }
      PolynomialRelation q(d, monos, coef, center, scale);
      if (q.degree_in_T() == 0) continue;
      double worst = 0.0;
      for (std::size_t s : val_rows) {
        std::vector<double> b(d);
        for (std::size_t k = 0; k < d; ++k) b[k] = column(k + 1, s);
        worst = std::max(worst, q.relative_residual(target[s], b));
      }
      if (!(worst < opts.fit_tol)) continue;
      q.residual = worst;
      q.singular_ratio = sv[m - 1] / smax;
      return q;
    }
  }
  return std::nullopt;
}

}  // namespace nash
