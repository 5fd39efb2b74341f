#include <doctest.h>

#include <cmath>

#include "nash/error.hpp"
#include "nash/system.hpp"
#include "support.hpp"

using namespace nash;
using namespace testsupport;

TEST_CASE("system oracle responses") {
  auto o = ResponseOracle::from_system(share(lin1()));
  GeneralizedInput u;
  u.append(0, std::log(2.0));
  CHECK(std::abs(o.respond(u)[0] - 2.0) < 1e-9);
  CHECK(o.respond(GeneralizedInput{})[0] == 1.0);
  GeneralizedInput v;
  v.append(0, 1).append(1, 1);
  CHECK(std::abs(o.respond(v)[0] - 1.0) < 1e-7);
  GeneralizedInput neg;
  neg.append(0, -1.0);
  CHECK(std::abs(o.respond(neg)[0] - std::exp(-1.0)) < 1e-9);
}

TEST_CASE("shifted oracles") {
  auto o = ResponseOracle::from_system(share(bilinear()));
  auto words = sample_inputs(o.alphabet(), 3, 0.5, 20, 6);
  auto same = o.shifted(GeneralizedInput{});
  for (const auto& w : words) CHECK(same.respond(w) == o.respond(w));

  auto l = ResponseOracle::from_system(share(lin1()));
  GeneralizedInput u;
  u.append(0, std::log(2.0));
  CHECK(std::abs(l.shifted(u).respond(GeneralizedInput{})[0] - 2.0) < 1e-9);

  GeneralizedInput s;
  s.append(0, 0.3).append(1, 0.2).append(0, 0.1);
  auto back = o.shifted(s).shifted(reverse(s));
  for (const auto& w : words) CHECK((back.respond(w) - o.respond(w)).norm() < 1e-7);
}

TEST_CASE("response identities for generalized inputs") {
  auto o = ResponseOracle::from_system(share(bilinear()));
  GeneralizedInput a, b;
  a.append(0, 0.3).append(1, 0.4);
  b.append(0, 0.3).append(1, 0.0).append(1, 0.1).append(1, 0.3);
  CHECK((o.respond(a) - o.respond(b)).norm() < 2e-10);
}

TEST_CASE("table oracle") {
  auto sys = lin1();
  auto table = std::make_shared<ResponseTable>(tabulate(sys, 2, 0.1, 4));
  auto o = ResponseOracle::from_table(table);
  GeneralizedInput u;
  u.append(0, 0.2).append(1, 0.1);
  CHECK(std::abs(o.respond(u)[0] - std::exp(0.1)) < 1e-9);
  CHECK(o.respond(GeneralizedInput{})[0] == 1.0);
  GeneralizedInput mid;
  mid.append(0, 0.15);
  double lin = 0.5 * (std::exp(0.1) + std::exp(0.2));
  CHECK(std::abs(o.respond(mid)[0] - lin) < 1e-9);
  GeneralizedInput far;
  far.append(0, 0.5);
  CHECK_THROWS_AS(o.respond(far), Error);
  GeneralizedInput neg;
  neg.append(0, -0.1);
  CHECK_THROWS_AS(o.respond(neg), Error);
  GeneralizedInput three;
  three.append(0, 0.1).append(0, 0.1).append(0, 0.1);
  CHECK_THROWS_AS(o.respond(three), Error);
  GeneralizedInput p;
  p.append(0, 0.1);
  auto shifted = o.shifted(p);
  GeneralizedInput q;
  q.append(1, 0.2);
  CHECK(std::abs(shifted.respond(q)[0] - std::exp(-0.1)) < 1e-9);
  CHECK_THROWS_AS(table->set_word({0}, {vec({1.0})}), Error);
}
