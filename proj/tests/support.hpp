#pragma once

#include <cmath>
#include <initializer_list>
#include <memory>
#include <utility>
#include <vector>

#include "nash/expr.hpp"
#include "nash/system.hpp"

namespace testsupport {

using nash::NashExpr;
using nash::Rational;

struct T {
  double c;
  std::vector<int> e;
};

/// Polynomial in n variables from (coefficient, integer exponents) pairs.
inline NashExpr poly(std::size_t n, std::initializer_list<T> terms) {
  std::vector<nash::Term> ts;
  for (const auto& t : terms) {
    nash::Term term{nash::rational_from_double(t.c), {}};
    for (int e : t.e) term.exps.emplace_back(e);
    term.exps.resize(n, Rational(0));
    ts.push_back(std::move(term));
  }
  return NashExpr::from_terms(n, std::move(ts));
}

inline NashExpr x(std::size_t n, std::size_t i) { return NashExpr::variable(n, i); }

inline nash::InputAlphabet pm_alphabet() { return nash::InputAlphabet({"a0", "a1"}, {{1.0}, {-1.0}}); }

inline nash::Vec vec(std::initializer_list<double> v) {
  nash::Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

/// f_a = alpha * x, h = x, x0 = 1.
inline nash::NashSystem lin1() {
  auto a = pm_alphabet();
  return nash::NashSystem(nash::Box::unbounded(1), a, {{x(1, 0)}, {-x(1, 0)}}, {x(1, 0)}, vec({1.0}));
}

inline nash::NashSystem diag() {
  return nash::NashSystem(nash::Box::unbounded(2), pm_alphabet(), {{x(2, 0), x(2, 1)}, {-x(2, 0), -x(2, 1)}},
                          {x(2, 0) + x(2, 1)}, vec({1.0, 1.0}));
}

inline nash::NashSystem unobserved() {
  return nash::NashSystem(nash::Box::unbounded(2), pm_alphabet(),
                          {{x(2, 0), x(2, 1)}, {-x(2, 0), x(2, 1).scaled(2)}}, {x(2, 0)}, vec({1.0, 2.0}));
}

inline nash::NashSystem lin1_plus_unobserved() {
  return nash::NashSystem(nash::Box::unbounded(2), pm_alphabet(), {{x(2, 0), x(2, 1)}, {-x(2, 0), -x(2, 1)}},
                          {x(2, 0)}, vec({1.0, 2.0}));
}

inline nash::NashSystem redundant3() {
  return nash::NashSystem(nash::Box::unbounded(3), pm_alphabet(),
                          {{x(3, 0), x(3, 1), x(3, 2)}, {-x(3, 0), -x(3, 1), -x(3, 2)}},
                          {x(3, 0) + x(3, 1)}, vec({1.0, 1.0, 1.0}));
}

/// Diagonal pair plus an independent unobserved coordinate.
inline nash::NashSystem diag_plus_unobserved() {
  return nash::NashSystem(nash::Box::unbounded(3), pm_alphabet(),
                          {{x(3, 0), x(3, 1), x(3, 2)}, {-x(3, 0), -x(3, 1), x(3, 2).scaled(2)}},
                          {x(3, 0) + x(3, 1)}, vec({1.0, 1.0, 2.0}));
}

inline NashExpr sqrt_x() {
  return NashExpr::monomial(Rational(1), {Rational(1, 2)}, nash::DomainFlag::PositiveOrthant);
}

inline nash::NashSystem power_law() {
  auto s = sqrt_x();
  auto xv = NashExpr::variable(1, 0, nash::DomainFlag::PositiveOrthant);
  return nash::NashSystem(nash::Box::positive_orthant(1), pm_alphabet(), {{s}, {-s}}, {xv}, vec({1.0}));
}

inline nash::NashSystem cubing() {
  auto z = NashExpr::variable(1, 0, nash::DomainFlag::PositiveOrthant);
  auto h = NashExpr::monomial(Rational(1), {Rational(1, 3)}, nash::DomainFlag::PositiveOrthant);
  return nash::NashSystem(nash::Box::positive_orthant(1), pm_alphabet(), {{z.scaled(3)}, {z.scaled(-3)}}, {h},
                          vec({1.0}));
}

/// f_a = (a A1 + A2) x, A1 = [[1,2],[0,-1]], A2 = [[0,1],[-1,0]], h = x1.
inline nash::NashSystem bilinear() {
  auto f = [](double a) {
    return std::vector<NashExpr>{poly(2, {{a, {1, 0}}, {2 * a + 1, {0, 1}}}),
                                 poly(2, {{-1, {1, 0}}, {-a, {0, 1}}})};
  };
  return nash::NashSystem(nash::Box::unbounded(2), pm_alphabet(), {f(1), f(-1)}, {x(2, 0)}, vec({1.0, 0.5}));
}

/// Companion form x' = A x + b alpha, y = x1.
inline nash::NashSystem linear(std::size_t n) {
  std::vector<double> last;
  if (n == 1) last = {-1};
  if (n == 2) last = {-2, -3};
  if (n == 3) last = {-1, -2, -3};
  auto field = [&](double a) {
    std::vector<NashExpr> f;
    for (std::size_t i = 0; i + 1 < n; ++i) f.push_back(x(n, i + 1));
    NashExpr l = NashExpr::constant(n, nash::rational_from_double(a));
    for (std::size_t j = 0; j < n; ++j) l += x(n, j).scaled(nash::rational_from_double(last[j]));
    f.push_back(l);
    return f;
  };
  return nash::NashSystem(nash::Box::unbounded(n), pm_alphabet(), {field(1), field(-1)}, {x(n, 0)},
                          nash::Vec::Zero(static_cast<Eigen::Index>(n)));
}

/// z = M x with M = [[1,1],[0,2]] applied to the bilinear system.
inline nash::NashSystem bilinear_chart() {
  // x = M^{-1} z = (z1 - z2/2, z2/2); A' = M A M^{-1}.
  auto f = [](double a) {
    Eigen::Matrix2d A;
    A << a, 2 * a + 1, -1, -a;
    Eigen::Matrix2d M;
    M << 1, 1, 0, 2;
    Eigen::Matrix2d B = M * A * M.inverse();
    return std::vector<NashExpr>{poly(2, {{B(0, 0), {1, 0}}, {B(0, 1), {0, 1}}}),
                                 poly(2, {{B(1, 0), {1, 0}}, {B(1, 1), {0, 1}}})};
  };
  return nash::NashSystem(nash::Box::unbounded(2), pm_alphabet(), {f(1), f(-1)},
                          {poly(2, {{1, {1, 0}}, {-0.5, {0, 1}}})}, vec({1.5, 1.0}));
}

template <class S>
std::shared_ptr<const nash::ControlSystem> share(S sys) {
  return std::make_shared<S>(std::move(sys));
}

}  // namespace testsupport
