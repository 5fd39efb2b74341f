#include <doctest.h>

#include <cmath>

#include "nash/error.hpp"
#include "nash/inputs.hpp"
#include "support.hpp"

using namespace nash;

namespace {

GeneralizedInput word(std::initializer_list<Segment> s) { return GeneralizedInput(std::vector<Segment>(s)); }

}  // namespace

TEST_CASE("concat") {
  GeneralizedInput e;
  auto v = word({{1, 0.5}});
  CHECK(concat(e, v) == v);
  CHECK(concat(v, e) == v);
  auto aa = concat(word({{0, 1}}), word({{0, 2}}));
  CHECK(aa.size() == 2);
  CHECK(aa.total_time() == 3.0);
  CHECK(concat(word({{0, 1}, {1, 2}}), word({{0, 0.5}})) == word({{0, 1}, {1, 2}, {0, 0.5}}));
  auto a = testsupport::pm_alphabet();
  CHECK_THROWS_AS(concat(a, word({{0, 1}}), word({{2, 1}})), Error);
}

TEST_CASE("reverse") {
  CHECK(reverse(GeneralizedInput{}).empty());
  CHECK(reverse(word({{0, 1}})) == word({{0, -1}}));
  CHECK(reverse(word({{0, 1}, {1, 2}})) == word({{1, -2}, {0, -1}}));
  CHECK_FALSE(reverse(word({{0, 1}})).is_pwc());
}

TEST_CASE("word algebra properties") {
  auto a = testsupport::pm_alphabet();
  auto us = sample_inputs(a, 4, 1.0, 30, 5);
  for (std::size_t i = 0; i + 2 < us.size(); ++i) {
    const auto &u = us[i], &v = us[i + 1], &w = us[i + 2];
    CHECK(concat(concat(u, v), w) == concat(u, concat(v, w)));
    CHECK(std::abs(concat(u, v).total_time() - (u.total_time() + v.total_time())) < 1e-15);
    CHECK(reverse(u).total_time() == doctest::Approx(-u.total_time()).epsilon(1e-15));
    CHECK(reverse(reverse(u)) == u);
    CHECK(reverse(concat(u, v)) == concat(reverse(v), reverse(u)));
  }
}

TEST_CASE("sample_inputs contract") {
  auto a = testsupport::pm_alphabet();
  auto one = sample_inputs(a, 1, 1.0, 1, 7);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].size() == 1);
  CHECK(one[0][0].duration > 0.0);
  CHECK(one[0][0].duration <= 1.0);
  for (const auto& u : sample_inputs(a, 3, 0.3, 5, 9)) {
    CHECK(u.total_time() < 0.3);
    CHECK(u.size() >= 1);
    CHECK(u.size() <= 3);
    CHECK(u.is_pwc());
  }
  CHECK(sample_inputs(a, 3, 0.3, 5, 9) == sample_inputs(a, 3, 0.3, 5, 9));
  CHECK_FALSE(sample_inputs(a, 3, 0.3, 5, 9) == sample_inputs(a, 3, 0.3, 5, 10));
  for (const auto& u : sample_inputs(a, 4, 1.0, 10, 2, true)) CHECK(u.size() == 4);
  CHECK_THROWS_AS(sample_inputs(a, 0, 1.0, 1, 1), Error);
  CHECK_THROWS_AS(sample_inputs(a, 1, 0.0, 1, 1), Error);
}

TEST_CASE("alphabet validation") {
  CHECK_THROWS_AS(InputAlphabet({}, {}), Error);
  CHECK_THROWS_AS(InputAlphabet({"a", "b"}, {{1.0}, {1.0}}), Error);
  CHECK_THROWS_AS(InputAlphabet({"a", "a"}, {{1.0}, {2.0}}), Error);
  CHECK_THROWS_AS(InputAlphabet({"a", "b"}, {{1.0}, {2.0, 3.0}}), Error);
  auto a = testsupport::pm_alphabet();
  CHECK(a.index_of("a1") == 1);
  CHECK_THROWS_AS(a.index_of("zz"), Error);
}
