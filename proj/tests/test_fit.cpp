#include <doctest.h>

#include <cmath>
#include <random>

#include "nash/analysis.hpp"
#include "nash/error.hpp"
#include "support.hpp"

using namespace nash;
using namespace testsupport;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = u(rng);
  return out;
}

Mat column(const std::vector<double>& v) {
  Mat m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return m;
}

double coeff(const std::map<std::vector<unsigned>, double>& m, std::vector<unsigned> e) {
  auto it = m.find(e);
  return it == m.end() ? 0.0 : it->second;
}

/// Exact null space of a rational matrix with one-dimensional kernel.
std::vector<Rational> exact_null_vector(std::vector<std::vector<Rational>> a) {
  const std::size_t cols = a.front().size();
  std::vector<std::size_t> pivcol;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < a.size(); ++c) {
    std::size_t p = row;
    while (p < a.size() && sgn(a[p][c]) == 0) ++p;
    if (p == a.size()) continue;
    std::swap(a[p], a[row]);
    Rational inv = 1 / a[row][c];
    for (auto& v : a[row]) v *= inv;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == row || sgn(a[r][c]) == 0) continue;
      Rational f = a[r][c];
      for (std::size_t k = 0; k < cols; ++k) a[r][k] -= f * a[row][k];
    }
    pivcol.push_back(c);
    ++row;
  }
  std::vector<bool> is_piv(cols, false);
  for (auto c : pivcol) is_piv[c] = true;
  std::size_t freec = 0;
  while (is_piv[freec]) ++freec;
  std::vector<Rational> v(cols, Rational(0));
  v[freec] = 1;
  for (std::size_t r = 0; r < pivcol.size(); ++r) v[pivcol[r]] = -a[r][freec];
  return v;
}

}  // namespace

TEST_CASE("identity relation") {
  auto phi = uniform(40, -2, 3, 1);
  auto q = fit_relation(phi, column(phi));
  REQUIRE(q);
  CHECK(q->total_degree() == 1);
  CHECK(q->degree_in_T() == 1);
  auto e = q->expanded();
  CHECK(std::abs(std::abs(coeff(e, {1, 0})) - 1.0) < 1e-9);
  CHECK(std::abs(coeff(e, {1, 0}) + coeff(e, {0, 1})) < 1e-9);
  CHECK(std::abs(coeff(e, {0, 0})) < 1e-9);
  CHECK(q->residual < 1e-7);
}

TEST_CASE("square relation matches a brute-force rational null space") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> num(-40, 40);
  std::vector<double> xs, ts;
  std::vector<std::vector<Rational>> rows;
  // Degree-2 monomials in (T, T1): 1, T1, T1^2, T, T T1, T^2.
  for (int s = 0; s < 50; ++s) {
    Rational x(num(rng), 16);
    x.canonicalize();
    Rational t = x * x;
    xs.push_back(x.get_d());
    ts.push_back(t.get_d());
    rows.push_back({Rational(1), x, x * x, t, t * x, t * t});
  }
  // The kernel over these points contains T - T1^2 and (T - T1^2) is the only
  // degree-2 relation, so the rational kernel is one-dimensional.
  auto nv = exact_null_vector(rows);
  CHECK(nv[3] == -nv[2]);
  CHECK(nv[0] == 0);
  CHECK(nv[1] == 0);
  CHECK(nv[4] == 0);
  CHECK(nv[5] == 0);

  auto q = fit_relation(ts, column(xs));
  REQUIRE(q);
  CHECK(q->total_degree() == 2);
  CHECK(q->degree_in_T() == 1);
  auto e = q->expanded();
  double t = coeff(e, {1, 0});
  CHECK(std::abs(std::abs(t) - 1.0) < 1e-8);
  double ratio = coeff(e, {0, 2}) / t;
  CHECK(ratio * nv[3].get_d() == doctest::Approx(nv[2].get_d()).epsilon(1e-8));
  CHECK(std::abs(coeff(e, {0, 1})) < 1e-8);
  CHECK(std::abs(coeff(e, {0, 0})) < 1e-8);
}

TEST_CASE("diagonal samples give x2 = x1") {
  auto sys = diag();
  auto words = sample_inputs(sys.alphabet(), 3, 1.0, 60, 8);
  std::vector<double> x1, x2;
  for (const auto& w : words) {
    auto t = flow(sys, sys.x0(), w).terminal;
    x1.push_back(t[0]);
    x2.push_back(t[1]);
  }
  auto q = fit_relation(x2, column(x1));
  REQUIRE(q);
  CHECK(q->total_degree() == 1);
  auto e = q->expanded();
  CHECK(std::abs(coeff(e, {1, 0}) + coeff(e, {0, 1})) < 1e-7);
  CHECK(q->residual < 1e-7);
}

TEST_CASE("power-law relation T^2 - T1") {
  auto xs = uniform(60, 0.5, 2.0, 9);
  std::vector<double> g;
  for (double v : xs) g.push_back(std::sqrt(v));
  auto q = fit_relation(g, column(xs));
  REQUIRE(q);
  CHECK(q->degree_in_T() == 2);
  CHECK(q->total_degree() == 2);
  auto e = q->expanded();
  CHECK(coeff(e, {0, 1}) / coeff(e, {2, 0}) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("independent data has no relation") {
  auto a = uniform(400, -1, 1, 10), b = uniform(400, -1, 1, 11);
  Mat basis = column(a);
  auto none = fit_relation(b, basis);
  CHECK_FALSE(none.has_value());
  // Cross-consistency with the rank estimator: {x1, x2} is independent.
  CHECK(estimate_trdeg({x(2, 0), x(2, 1)}, box_sampler(Box::unbounded(2), {0, 0}, 1.0)).estimated_trdeg == 2);
}

TEST_CASE("random polynomial relations are recovered and validated on held-out samples") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> cf(-3, 3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    int c1 = cf(rng), c2 = cf(rng), c3 = cf(rng);
    if (c1 == 0) c1 = 1;
    std::size_t n = fit_sample_count(2, 3);
    std::vector<double> t(n);
    Mat basis(static_cast<Eigen::Index>(n), 2);
    for (std::size_t s = 0; s < n; ++s) {
      double a = u(rng), b = u(rng);
      basis(static_cast<Eigen::Index>(s), 0) = a;
      basis(static_cast<Eigen::Index>(s), 1) = b;
      t[s] = c1 * a * b + c2 * b * b + c3;
    }
    FitOptions o;
    o.degree_bound = 3;
    auto q = fit_relation(t, basis, o);
    REQUIRE(q);
    CHECK(q->total_degree() == 2);
    CHECK(q->residual < o.fit_tol);
    // Held-out residual recomputed independently.
    for (std::size_t s = 3; s < n; s += 4) {
      std::vector<double> b{basis(static_cast<Eigen::Index>(s), 0), basis(static_cast<Eigen::Index>(s), 1)};
      CHECK(q->relative_residual(t[s], b) < o.fit_tol);
    }
  }
}

TEST_CASE("relation derivatives match finite differences") {
  auto xs = uniform(60, 0.5, 2.0, 13);
  std::vector<double> g;
  for (double v : xs) g.push_back(v * v * v);
  auto q = fit_relation(g, column(xs));
  REQUIRE(q);
  for (double z : {0.7, 1.1, 1.8}) {
    double t = z * z * z, h = 1e-6;
    std::vector<double> b{z};
    double fd_t = (q->evaluate(t + h, b) - q->evaluate(t - h, b)) / (2 * h);
    CHECK(q->d_dT(t, b) == doctest::Approx(fd_t).epsilon(1e-6));
    std::vector<double> bp{z + h}, bm{z - h};
    double fd_b = (q->evaluate(t, bp) - q->evaluate(t, bm)) / (2 * h);
    std::vector<double> grad(1);
    q->d_dbasis(t, b, grad);
    CHECK(grad[0] == doctest::Approx(fd_b).epsilon(1e-6));
  }
}

TEST_CASE("fit error paths") {
  auto a = uniform(40, -1, 1, 14);
  auto bad = a;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(fit_relation(bad, column(a)), Error);
  std::vector<double> constant(40, 2.0);
  try {
    fit_relation(a, column(constant));
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
  }
  // Dependent basis (x, x^2).
  Mat dep(40, 2);
  for (int s = 0; s < 40; ++s) {
    dep(s, 0) = a[static_cast<std::size_t>(s)];
    dep(s, 1) = a[static_cast<std::size_t>(s)] * a[static_cast<std::size_t>(s)];
  }
  auto b = uniform(40, -1, 1, 15);
  try {
    fit_relation(b, dep);
    FAIL("expected IllConditioned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
  }
  // A constant target is the relation T - c.
  auto q = fit_relation(constant, column(a));
  REQUIRE(q);
  std::vector<double> p{0.3};
  CHECK(q->evaluate(2.0, p) == 0.0);
  CHECK(q->d_dT(2.0, p) != 0.0);
}
