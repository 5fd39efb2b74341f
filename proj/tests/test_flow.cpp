#include <doctest.h>

#include <cmath>
#include <random>

#include "nash/error.hpp"
#include "nash/system.hpp"
#include "support.hpp"

using namespace nash;
using namespace testsupport;

TEST_CASE("exponential closed form") {
  auto sys = lin1();
  GeneralizedInput u;
  u.append(0, std::log(2.0));
  auto traj = flow(sys, sys.x0(), u);
  CHECK(std::abs(traj.terminal[0] - 2.0) < 1e-9);
  CHECK(traj.success);
  CHECK(flow(sys, sys.x0(), GeneralizedInput{}).terminal == sys.x0());
}

TEST_CASE("power-law closed form") {
  // x' = sqrt(x), x(0) = 1  =>  x(t) = (1 + t/2)^2.
  auto sys = power_law();
  GeneralizedInput u;
  u.append(0, 0.8);
  CHECK(std::abs(flow(sys, sys.x0(), u).terminal[0] - 1.96) < 1e-9);
}

TEST_CASE("backward flow and reversal") {
  auto sys = bilinear();
  auto words = sample_inputs(sys.alphabet(), 5, 1.0, 50, 4);
  for (const auto& u : words) {
    auto fwd = flow(sys, sys.x0(), u).terminal;
    auto back = flow(sys, fwd, reverse(u)).terminal;
    CHECK((back - sys.x0()).norm() < 1e-9);
    auto loop = flow(sys, sys.x0(), concat(u, reverse(u))).terminal;
    CHECK((loop - sys.x0()).norm() < 1e-7);
  }
}

TEST_CASE("semigroup property") {
  auto sys = bilinear();
  auto us = sample_inputs(sys.alphabet(), 4, 1.0, 100, 8);
  auto vs = sample_inputs(sys.alphabet(), 4, 1.0, 100, 9);
  FlowOptions opts;
  for (std::size_t i = 0; i < us.size(); ++i) {
    auto two = flow(sys, flow(sys, sys.x0(), us[i]).terminal, vs[i]).terminal;
    auto one = flow(sys, sys.x0(), concat(us[i], vs[i])).terminal;
    CHECK((two - one).norm() <= 2 * opts.tol * std::max(1.0, one.norm()));
  }
}

TEST_CASE("domain exit and blow-up") {
  // x' = -sqrt(x) reaches 0 at t = 2.
  auto sys = power_law();
  GeneralizedInput u;
  u.append(1, 3.0);
  auto t = try_flow(sys, sys.x0(), u);
  CHECK_FALSE(t.success);
  CHECK(t.status == FlowStatus::DomainExit);
  try {
    flow(sys, sys.x0(), u);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainExit);
  }
  // x' = x^2 blows up at t = 1 from x = 1.
  auto sq = NashSystem(Box::unbounded(1), pm_alphabet(), {{poly(1, {{1, {2}}})}, {poly(1, {{-1, {2}}})}},
                       {x(1, 0)}, vec({1.0}));
  GeneralizedInput b;
  b.append(0, 2.0);
  auto tb = try_flow(sq, sq.x0(), b);
  CHECK_FALSE(tb.success);
  CHECK(tb.status == FlowStatus::BlowUp);
}

TEST_CASE("dense output") {
  auto sys = lin1();
  FlowOptions opts;
  opts.store_dense = true;
  GeneralizedInput u;
  u.append(0, 1.0).append(1, 0.5);
  auto traj = flow(sys, sys.x0(), u, opts);
  REQUIRE(traj.breakpoints.size() == 3);
  CHECK(traj.breakpoints[2] == doctest::Approx(1.5));
  for (double t : {0.1, 0.37, 0.9, 1.2, 1.45}) {
    double expected = t <= 1.0 ? std::exp(t) : std::exp(1.0 - (t - 1.0));
    CHECK(std::abs(traj.state_at(t)[0] - expected) < 1e-7);
  }
}

TEST_CASE("sensitivities match finite differences") {
  auto sys = bilinear();
  auto words = sample_inputs(sys.alphabet(), 4, 1.0, 10, 21, true);
  FlowOptions tight;
  tight.tol = 1e-13;
  for (const auto& u : words) {
    auto s = flow_sensitivity(sys, sys.x0(), u, tight);
    REQUIRE(s.success);
    CHECK((s.terminal - flow(sys, sys.x0(), u, tight).terminal).norm() < 1e-10);
    const double h = 1e-5;
    for (std::size_t i = 0; i < u.size(); ++i) {
      auto wp = u.word(), wm = u.word();
      wp[i].duration += h;
      wm[i].duration -= h;
      Vec fd = (flow(sys, sys.x0(), GeneralizedInput(wp), tight).terminal -
                flow(sys, sys.x0(), GeneralizedInput(wm), tight).terminal) /
               (2 * h);
      CHECK((fd - s.d_durations.col(static_cast<Eigen::Index>(i))).norm() < 1e-6);
    }
    for (Eigen::Index j = 0; j < 2; ++j) {
      Vec xp = sys.x0(), xm = sys.x0();
      xp[j] += h;
      xm[j] -= h;
      Vec fd = (flow(sys, xp, u, tight).terminal - flow(sys, xm, u, tight).terminal) / (2 * h);
      CHECK((fd - s.d_initial.col(j)).norm() < 1e-6);
    }
  }
}

TEST_CASE("system validation") {
  auto a = pm_alphabet();
  CHECK_THROWS_AS(NashSystem(Box::unbounded(1), a, {{x(1, 0)}}, {x(1, 0)}, vec({1.0})), Error);
  CHECK_THROWS_AS(NashSystem(Box::unbounded(1), a, {{x(1, 0)}, {x(1, 0)}}, {x(2, 0)}, vec({1.0})), Error);
  CHECK_THROWS_AS(NashSystem(Box::unbounded(1), a, {{sqrt_x()}, {sqrt_x()}}, {x(1, 0)}, vec({1.0})), Error);
  CHECK_THROWS_AS(
      NashSystem(Box::positive_orthant(1), a, {{sqrt_x()}, {sqrt_x()}}, {sqrt_x()}, vec({-1.0})), Error);
}

TEST_CASE("state_to_output") {
  auto sys = diag();
  auto one = NashExpr::constant(2, Rational(1));
  auto diff = x(2, 0) - x(2, 1);
  for (const auto& u : sample_inputs(sys.alphabet(), 4, 1.0, 20, 3)) {
    CHECK(state_to_output(sys, one, u) == 1.0);
    CHECK(std::abs(state_to_output(sys, diff, u)) < 1e-9);
  }
  CHECK(state_to_output(sys, x(2, 0), GeneralizedInput{}) == 1.0);
}
