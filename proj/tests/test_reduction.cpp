#include <cmath>

#include "doctest.h"
#include "nash/error.hpp"
#include "nash/reduction.hpp"
#include "support.hpp"

using namespace nash;
using namespace testsupport;

namespace {

ResponseOracle oracle_of(const NashSystem& sys) { return ResponseOracle::from_system(share(sys)); }

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

void check_realizes(const LocalRealization& red, const ResponseOracle& oracle, double epsilon) {
  CHECK(red.shift().total_time() < epsilon);
  auto rep = verify_local_realization(red, oracle);
  CHECK(rep.pass);
  CHECK(rep.max_deviation <= 1e-6);
  CHECK(rep.accepted >= 50);
}

}  // namespace

TEST_CASE("reachability reduction of the diagonal pair") {
  auto sys = diag();
  auto o = oracle_of(sys);
  for (double eps : {0.1, 0.01}) {
    auto red = reachability_reduce(sys, o, eps);
    CHECK(red.dim() == 1);
    CHECK(red.kind() == LocalRealization::Kind::Chart);
    CHECK(red.provenance() == Provenance::ReachReduced);
    check_realizes(red, o, eps);
    // the lifted coordinate equals the basis coordinate on the reachable set
    Vec x;
    REQUIRE(red.lift(red.initial_state(), x));
    CHECK(x[0] == doctest::Approx(x[1]).epsilon(1e-10));
    CHECK(red.gate_deviation <= 1e-6);
  }
}

TEST_CASE("reachability reduction keeps reachable systems whole") {
  auto sys = lin1();
  auto o = oracle_of(sys);
  auto red = reachability_reduce(sys, o, 0.1);
  CHECK(red.dim() == 1);
  check_realizes(red, o, 0.1);

  auto u = unobserved();
  auto ru = reachability_reduce(u, oracle_of(u), 0.1);
  CHECK(ru.dim() == 2);
}

TEST_CASE("redundant coordinates collapse to one") {
  auto sys = redundant3();
  auto o = oracle_of(sys);
  auto red = reachability_reduce(sys, o, 0.1);
  CHECK(red.dim() == 1);
  CHECK(estimate_reachable_trdeg(red).estimated_trdeg == 1);
  check_realizes(red, o, 0.1);
}

TEST_CASE("observability reduction drops the unobserved coordinate") {
  auto sys = unobserved();
  auto o = oracle_of(sys);
  auto red = observability_reduce(sys, o, 0.1);
  CHECK(red.dim() == 1);
  CHECK(red.kind() == LocalRealization::Kind::Observed);
  CHECK(red.provenance() == Provenance::ObsReduced);
  REQUIRE(red.coordinate_generators.size() == 1);
  CHECK(red.coordinate_generators[0].word.empty());
  CHECK(estimate_reachable_trdeg(red).estimated_trdeg == 1);
  CHECK(estimate_observability_rank(red).estimated_trdeg == 1);
  check_realizes(red, o, 0.1);
}

TEST_CASE("power-law relations are fitted at low degree") {
  auto sys = power_law();
  auto o = oracle_of(sys);
  auto red = observability_reduce(sys, o, 0.1);
  CHECK(red.dim() == 1);
  for (const auto& f : red.field_maps())
    for (const auto& m : f) CHECK(m.relation().total_degree() <= 2);
  for (const auto& m : red.readout_maps()) CHECK(m.relation().total_degree() == 1);
  // f_a phi = a sqrt(x) satisfies T^2 - T1 = 0
  CHECK(red.field_maps()[0][0].relation().degree_in_T() == 2);
  check_realizes(red, o, 0.1);
}

TEST_CASE("observability reduction requires reachable input") {
  auto sys = lin1_plus_unobserved();
  auto o = oracle_of(sys);
  CHECK(code_of([&] { (void)observability_reduce(sys, o, 0.1); }) == ErrorCode::NotReachableInput);
  ReductionOptions opts;
  opts.restrict_to_reachable = true;
  auto red = observability_reduce(sys, o, 0.1, opts);
  CHECK(red.dim() == 1);
  CHECK(red.parent_chart != nullptr);
  check_realizes(red, o, 0.1);
}

TEST_CASE("minimize reaches the response trdeg") {
  for (auto sys : {redundant3(), diag_plus_unobserved()}) {
    auto o = oracle_of(sys);
    auto red = minimize(sys, o, 0.1);
    CHECK(red.dim() == 1);
    CHECK(red.provenance() == Provenance::Minimized);
    CHECK(red.dim() == estimate_response_trdeg(o).estimated_trdeg);
    check_realizes(red, o, 0.1);
  }
}

TEST_CASE("minimize leaves minimal systems at their dimension") {
  for (auto sys : {lin1(), bilinear()}) {
    auto o = oracle_of(sys);
    auto red = minimize(sys, o, 0.1);
    CHECK(red.dim() == sys.dim());
    check_realizes(red, o, 0.1);
  }
}

TEST_CASE("verification harness") {
  auto sys = diag();
  auto o = oracle_of(sys);
  auto self = verify_local_realization(sys, GeneralizedInput{}, o);
  CHECK(self.pass);
  CHECK(self.max_deviation <= 2e-10);
  CHECK(self.accepted == 100);

  auto bad = sys.with_readout({x(2, 0) + x(2, 1) + NashExpr::constant(2, Rational(1, 10))});
  auto rep = verify_local_realization(bad, GeneralizedInput{}, o);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_deviation == doctest::Approx(0.1).epsilon(1e-6));
  CHECK_FALSE(rep.failures.empty());
}

TEST_CASE("gate rejects a realization of the wrong response") {
  auto sys = diag();
  auto other = sys.with_readout({x(2, 0).scaled(3)});
  CHECK(code_of([&] { (void)reachability_reduce(sys, oracle_of(other), 0.1); }) == ErrorCode::VerificationFailed);
  ReductionOptions opts;
  opts.gate = false;
  CHECK(reachability_reduce(sys, oracle_of(other), 0.1, opts).dim() == 1);
}

TEST_CASE("shift sampling reports a vanishing relation") {
  // x2 = x1^2 on the reachable set; normalized coefficients never reach a
  // floor of 1e3
  auto a = pm_alphabet();
  auto x1 = x(2, 0), x2 = x(2, 1);
  NashSystem sys(Box::unbounded(2), a, {{x1, x2.scaled(2)}, {-x1, x2.scaled(-2)}}, {x1}, vec({1.0, 1.0}));
  ReductionOptions opts;
  opts.implicit.derivative_floor = 1e3;
  try {
    (void)reachability_reduce(sys, oracle_of(sys), 0.1, opts);
    FAIL("expected NoValidShiftInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoValidShiftInput);
    CHECK(std::string(e.what()).find("x2") != std::string::npos);
  }
}

TEST_CASE("degree bound exhaustion is a fit failure") {
  // x2 = x1^3 needs degree 3
  auto a = pm_alphabet();
  auto x1 = x(2, 0), x2 = x(2, 1);
  NashSystem sys(Box::unbounded(2), a, {{x1, x2.scaled(3)}, {-x1, x2.scaled(-3)}}, {x1 + x2}, vec({1.0, 1.0}));
  ReductionOptions opts;
  opts.fit.degree_bound = 2;
  CHECK(code_of([&] { (void)reachability_reduce(sys, oracle_of(sys), 0.1, opts); }) == ErrorCode::FitFailure);
  opts.fit.degree_bound = 3;
  CHECK(reachability_reduce(sys, oracle_of(sys), 0.1, opts).dim() == 1);
}

TEST_CASE("resymbolized chart is close to the original dynamics") {
  auto sys = diag();
  auto red = reachability_reduce(sys, oracle_of(sys), 0.1);
  auto sym = resymbolize(red, 2);
  CHECK(sym.dim() == 1);
  Vec z = red.initial_state(), a, b;
  REQUIRE(red.field(0, z, a));
  REQUIRE(sym.field(0, z, b));
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-8));
  CHECK(sym.readout(z)[0] == doctest::Approx(red.readout(z)[0]).epsilon(1e-8));
}
