#include <cmath>
#include <limits>

#include "doctest.h"
#include "nash/error.hpp"
#include "nash/reduction.hpp"

using namespace nash;

namespace {

PolynomialRelation rel(std::size_t d, std::vector<std::vector<unsigned>> e, std::vector<double> c) {
  return PolynomialRelation(d, std::move(e), std::move(c));
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("explicit relation returns its argument") {
  ImplicitMap m(rel(1, {{1, 0}, {0, 1}}, {1.0, -1.0}), {0.3}, 0.3);
  for (double z : {-5.0, -0.1, 0.0, 2.5, 40.0}) {
    std::vector<double> zz{z};
    CHECK(m(zz) == doctest::Approx(z).epsilon(1e-13));
  }
}

TEST_CASE("square root branch follows the base point") {
  ImplicitMap m(rel(1, {{2, 0}, {0, 1}}, {1.0, -1.0}), {1.0}, 1.0);
  std::vector<double> z{4.0};
  CHECK(m(z) == doctest::Approx(2.0).epsilon(1e-12));
  ImplicitMap neg(rel(1, {{2, 0}, {0, 1}}, {1.0, -1.0}), {1.0}, -1.0);
  CHECK(neg(z) == doctest::Approx(-2.0).epsilon(1e-12));
  // far enough that the linear predictor lands near the other branch
  std::vector<double> far{100.0};
  CHECK(m(far) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("product relation") {
  ImplicitMap m(rel(2, {{1, 0, 0}, {0, 1, 1}}, {1.0, -1.0}), {1.0, 1.0}, 1.0);
  std::vector<double> z{3.0, 2.0};
  CHECK(m(z) == doctest::Approx(6.0).epsilon(1e-12));
  std::vector<double> g(2);
  m.gradient(z, 6.0, g);
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(3.0));
}

TEST_CASE("residual stays within the Newton tolerance") {
  auto q = rel(2, {{3, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 2}}, {1.0, 1.0, -1.0, -0.5});
  ImplicitMap m(q, {2.0, 0.0}, 1.0);
  for (double a : {1.5, 2.5, 3.0})
    for (double b : {-0.5, 0.0, 0.7}) {
      std::vector<double> z{a, b};
      double t = m(z);
      CHECK(std::abs(q.evaluate(t, z)) <= 1e-12 * (1.0 + std::abs(a) + b * b));
    }
}

TEST_CASE("error paths") {
  auto sq = rel(1, {{2, 0}, {0, 1}}, {1.0, -1.0});
  CHECK(code_of([&] { ImplicitMap(sq, {0.0}, 0.0); }) == ErrorCode::DerivativeVanished);
  CHECK(code_of([&] { ImplicitMap(sq, {1.0}, 1.5); }) == ErrorCode::InvalidArgument);
  ImplicitMap m(sq, {1.0}, 1.0);
  // continuation toward z < 0 runs into the fold at z = 0
  std::vector<double> beyond{-1.0};
  CHECK(code_of([&] { (void)m(beyond); }) == ErrorCode::DerivativeVanished);
  std::vector<double> nan{std::numeric_limits<double>::quiet_NaN()};
  CHECK(code_of([&] { (void)m(nan); }) == ErrorCode::NewtonDiverged);
}

TEST_CASE("radius probing stops short of the fold") {
  ImplicitMap m(rel(1, {{2, 0}, {0, 1}}, {1.0, -1.0}), {1.0}, 1.0);
  m.estimate_radius(2.0);
  // the nearest failure is z = 0, one unit away
  CHECK(m.radius() == doctest::Approx(0.5).epsilon(0.15));
  std::vector<double> in{1.3}, out{0.2};
  CHECK(m.within(in));
  CHECK_FALSE(m.within(out));

  ImplicitMap lin(rel(1, {{1, 0}, {0, 1}}, {1.0, -1.0}), {0.0}, 0.0);
  lin.estimate_radius(3.0);
  CHECK(lin.radius() == doctest::Approx(3.0));
}
