#include <cmath>

#include "doctest.h"
#include "nash/error.hpp"
#include "nash/minimality.hpp"
#include "support.hpp"

using namespace nash;
using namespace testsupport;

namespace {

ResponseOracle oracle_of(const NashSystem& sys) { return ResponseOracle::from_system(share(sys)); }

bool has_witness(const MinimalityVerdict& v, const std::string& text) {
  for (const auto& w : v.witnesses)
    if (w.find(text) != std::string::npos) return true;
  return false;
}

std::vector<Vec> probe_points(const ControlSystem& sys, const Vec& x, std::size_t count) {
  return reachable_samples(sys, x, count, 2 * sys.dim(), 0.5, 11);
}

}  // namespace

TEST_CASE("minimality verdicts") {
  auto v = check_minimality(lin1(), oracle_of(lin1()));
  CHECK(v.verdict == Verdict::Minimal);
  CHECK(v.trdeg_response == 1);
  CHECK(v.reachable_trdeg == std::optional<std::size_t>(1));
  CHECK(v.trdeg_obs_sigma == std::optional<std::size_t>(1));
  CHECK(v.realizes_oracle);

  auto d = check_minimality(diag(), oracle_of(diag()));
  CHECK(d.verdict == Verdict::NotMinimal);
  CHECK(d.dim_sigma == 2);
  CHECK(d.trdeg_response == 1);
  CHECK(has_witness(d, "response trdeg"));
}

TEST_CASE("absurd rank tolerance is inconclusive") {
  MinimalityOptions opts;
  opts.rank.rank_tol = 1e-20;
  auto v = check_minimality(lin1(), oracle_of(lin1()), opts);
  CHECK(v.verdict == Verdict::Inconclusive);
  CHECK(v.low_confidence);
  CHECK(has_witness(v, "LOW_CONFIDENCE"));
}

TEST_CASE("characterizations agree on the catalog systems") {
  struct Case {
    NashSystem sys;
    Verdict expected;
  };
  std::vector<Case> cases{{lin1(), Verdict::Minimal},
                          {diag(), Verdict::NotMinimal},
                          {unobserved(), Verdict::NotMinimal},
                          {lin1_plus_unobserved(), Verdict::NotMinimal},
                          {redundant3(), Verdict::NotMinimal},
                          {diag_plus_unobserved(), Verdict::NotMinimal},
                          {power_law(), Verdict::Minimal},
                          {cubing(), Verdict::Minimal},
                          {bilinear(), Verdict::Minimal},
                          {bilinear_chart(), Verdict::Minimal},
                          {linear(1), Verdict::Minimal},
                          {linear(2), Verdict::Minimal},
                          {linear(3), Verdict::Minimal}};
  for (const auto& c : cases) {
    auto v = check_minimality(c.sys, oracle_of(c.sys));
    CHECK(v.verdict == c.expected);
    const bool c1 = v.trdeg_response == v.dim_sigma;
    const bool c23 = *v.reachable_trdeg == v.dim_sigma && *v.trdeg_obs_sigma == v.dim_sigma;
    CHECK(c1 == c23);
  }
}

TEST_CASE("table oracles only evaluate the dimension test") {
  auto sys = lin1();
  auto table = std::make_shared<ResponseTable>(tabulate(sys, 2, 0.05, 8));
  auto v = check_minimality(sys, ResponseOracle::from_table(table));
  CHECK_FALSE(v.reachable_trdeg.has_value());
  CHECK_FALSE(v.trdeg_obs_sigma.has_value());
  CHECK(v.realizes_oracle);
  CHECK(v.verdict == Verdict::Minimal);
}

TEST_CASE("a system that does not realize the oracle is inconclusive") {
  auto v = check_minimality(lin1(), oracle_of(cubing().with_readout({x(1, 0)})));
  CHECK_FALSE(v.realizes_oracle);
  CHECK(v.verdict == Verdict::Inconclusive);
}

TEST_CASE("cubing chart isomorphism") {
  auto s1 = lin1();
  auto s2 = cubing();
  auto o = oracle_of(s1);
  auto iso = construct_isomorphism(s1, s2, o, 0.1);
  CHECK(iso.shift.total_time() < 0.1);
  CHECK(iso.base2[0] == doctest::Approx(std::pow(iso.base1[0], 3)).epsilon(1e-10));
  for (const auto& x : probe_points(s1, iso.base1, 30)) {
    if ((x - iso.base1).norm() >= iso.radius) continue;
    CHECK(std::abs(iso.apply(x)[0] - std::pow(x[0], 3)) <= 1e-6);
  }
  auto rep = verify_isomorphism(iso, s1, s2);
  CHECK(rep.pass);
  CHECK(rep.probes >= 50);
  CHECK(rep.words >= 25);
  CHECK(rep.jacobian_round_trip <= 1e-5);
  CHECK(rep.probed_radius > 0.0);

  // the reverse construction inverts the forward one
  auto back = construct_isomorphism(s2, s1, o, 0.1);
  for (const auto& x : probe_points(s1, iso.base1, 20)) {
    Vec z;
    try {
      z = iso.apply(x);
      CHECK((back.apply(z) - x).norm() <= 1e-5);
      CHECK((back.inverse(x) - z).norm() <= 1e-5);
    } catch (const Error&) {
    }
  }
}

TEST_CASE("self isomorphism is the identity") {
  auto s = bilinear();
  auto iso = construct_isomorphism(s, s, oracle_of(s), 0.1);
  for (const auto& x : probe_points(s, iso.base1, 30)) {
    if ((x - iso.base1).norm() >= iso.radius) continue;
    CHECK((iso.apply(x) - x).norm() <= 1e-8);
  }
  auto rep = verify_isomorphism(iso, s, s);
  CHECK(rep.pass);
  CHECK(rep.intertwining <= 1e-8);
}

TEST_CASE("linear chart is recovered at degree one") {
  auto s1 = bilinear();
  auto s2 = bilinear_chart();
  auto iso = construct_isomorphism(s1, s2, oracle_of(s1), 0.1);
  Eigen::Matrix2d M;
  M << 1, 1, 0, 2;
  for (const auto& m : iso.forward) CHECK(m.relation().total_degree() == 1);
  CHECK((iso.jacobian - M).norm() <= 1e-8);
  for (const auto& x : probe_points(s1, iso.base1, 30)) {
    if ((x - iso.base1).norm() >= iso.radius) continue;
    CHECK((iso.apply(x) - M * x).norm() <= 1e-8);
  }
  CHECK(verify_isomorphism(iso, s1, s2).pass);
}

TEST_CASE("perturbed readout fails the readout check") {
  auto s1 = lin1();
  auto h = NashExpr::monomial(Rational(1), {Rational(1, 3)}, DomainFlag::PositiveOrthant);
  auto s2 = cubing().with_readout({h + NashExpr::constant(1, Rational(1, 100), DomainFlag::PositiveOrthant)});
  IsomorphismOptions opts;
  opts.require_minimal = false;
  auto iso = construct_isomorphism(s1, s2, oracle_of(s1), 0.1, opts);
  auto rep = verify_isomorphism(iso, s1, s2);
  CHECK(rep.pass_round_trip);
  CHECK(rep.pass_pushforward);
  CHECK_FALSE(rep.pass_readout);
  CHECK(rep.readout == doctest::Approx(0.01).epsilon(1e-6));
  CHECK_FALSE(rep.pass);
}

TEST_CASE("isomorphism errors") {
  try {
    (void)construct_isomorphism(lin1(), bilinear(), oracle_of(lin1()), 0.1);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  try {
    (void)construct_isomorphism(diag(), bilinear(), oracle_of(diag()), 0.1);
    FAIL("expected a minimality failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}
