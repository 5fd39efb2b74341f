#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nash/error.hpp"
#include "nash/experiments.hpp"
#include "support.hpp"

using namespace nash;
using namespace testsupport;

namespace fs = std::filesystem;

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

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nash_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<GeneralizedInput> probe_words(const InputAlphabet& a) {
  return sample_inputs(a, 3, 0.4, 10, 77);
}

}  // namespace

TEST_CASE("expressions serialize as exact term lists") {
  NashExpr e = poly(2, {{3, {2, 0}}, {-0.5, {0, 1}}});
  Json j = expr_to_json(e);
  CHECK(j[0].contains("coeff"));
  CHECK(expr_to_json(expr_from_json(j, 2)) == j);

  Json half = Json::parse(R"([{"coeff":"3/2","exps":["-1/2"]}])");
  NashExpr g = expr_from_json(half, 1);
  CHECK(g.eval(std::vector<double>{4.0}) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(expr_to_json(g)[0]["coeff"] == "3/2");
  CHECK(expr_to_json(g)[0]["exps"][0] == "-1/2");
}

TEST_CASE("malformed expressions raise ParseError") {
  CHECK(code_of([] { expr_from_json(Json::parse(R"([{"coeff":"1/0","exps":["1"]}])"), 1); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { expr_from_json(Json::parse(R"([{"exps":["1"]}])"), 1); }) == ErrorCode::ParseError);
  CHECK(code_of([] { expr_from_json(Json::parse(R"({"coeff":"1"})"), 1); }) == ErrorCode::ParseError);
}

TEST_CASE("systems round-trip and keep their flows bit-identical") {
  for (const auto& sys : {lin1(), diag(), power_law(), cubing(), bilinear(), bilinear_chart(), linear(3)}) {
    Json j = system_to_json(sys, "s");
    NashSystem back = system_from_json(j);
    CHECK(system_to_json(back, "s") == j);
    for (const auto& u : probe_words(sys.alphabet())) {
      auto a = try_flow(sys, sys.x0(), u);
      auto b = try_flow(back, back.initial_state(), u);
      REQUIRE(a.success == b.success);
      if (a.success) CHECK((a.terminal.array() == b.terminal.array()).all());
    }
  }
}

TEST_CASE("system file errors") {
  Json j = system_to_json(lin1(), "lin1");
  Json missing = j;
  missing.erase("x0");
  CHECK(code_of([&] { system_from_json(missing); }) == ErrorCode::ParseError);
  Json bad_x0 = j;
  bad_x0["x0"] = {1.0, 2.0};
  CHECK_THROWS_AS(system_from_json(bad_x0), Error);

  fs::path dir = scratch("files");
  std::ofstream(dir / "broken.json") << "{ \"n\": 1,";
  CHECK(code_of([&] { read_json_file((dir / "broken.json").string()); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_json_file((dir / "absent.json").string()); }) == ErrorCode::ParseError);

  write_json_file((dir / "lin1.json").string(), j);
  CHECK(system_to_json(load_system((dir / "lin1.json").string()), "lin1") == j);
  CHECK(system_name(j, "fallback") == "lin1");
}

TEST_CASE("words round-trip exactly") {
  auto a = pm_alphabet();
  GeneralizedInput u;
  u.append(0, 0.1).append(1, -0.30000000000000004).append(0, 1e-17);
  Json j = word_to_json(a, u);
  CHECK(j[1][0] == "a1");
  GeneralizedInput back = word_from_json(a, j);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].letter == u[i].letter);
    CHECK(back[i].duration == u[i].duration);
  }
  CHECK(code_of([&] { word_from_json(a, Json::parse(R"([["a7", 0.1]])")); }) == ErrorCode::AlphabetMismatch);
  CHECK(alphabet_to_json(alphabet_from_json(alphabet_to_json(a))) == alphabet_to_json(a));
}

TEST_CASE("response tables round-trip") {
  auto sys = lin1();
  ResponseTable t = tabulate(sys, 2, 0.05, 6);
  Json j = table_to_json(t);
  ResponseTable back = table_from_json(j);
  CHECK(table_to_json(back) == j);
  GeneralizedInput u;
  u.append(0, 0.1).append(1, 0.2);
  CHECK(back.lookup(u)[0] == t.lookup(u)[0]);
  auto oracle = oracle_from_json(j);
  CHECK(!oracle.is_system());
  CHECK(oracle.respond(u)[0] == t.lookup(u)[0]);
}

TEST_CASE("chart realizations reload with bit-identical responses") {
  auto sys = diag();
  auto base = std::make_shared<NashSystem>(sys);
  auto red = reachability_reduce(sys, oracle_of(sys), 0.1);
  Json j = realization_to_json(red);
  CHECK(j["provenance"] == "REACH_REDUCED");
  LocalRealization back = realization_from_json(j, base);
  CHECK(realization_to_json(back) == j);
  CHECK(back.dim() == red.dim());
  for (const auto& u : probe_words(sys.alphabet())) {
    auto a = try_flow(red, red.initial_state(), u);
    auto b = try_flow(back, back.initial_state(), u);
    REQUIRE(a.success == b.success);
    if (a.success) CHECK(red.readout(a.terminal)[0] == back.readout(b.terminal)[0]);
  }
  CHECK(code_of([&] { realization_from_json(j); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("observed realizations reload with bit-identical responses") {
  auto sys = unobserved();
  auto red = observability_reduce(sys, oracle_of(sys), 0.1);
  Json j = realization_to_json(red);
  LocalRealization back = realization_from_json(j, std::make_shared<NashSystem>(sys));
  CHECK(realization_to_json(back) == j);
  for (const auto& u : probe_words(sys.alphabet())) {
    auto a = try_flow(red, red.initial_state(), u);
    auto b = try_flow(back, back.initial_state(), u);
    REQUIRE(a.success == b.success);
    if (a.success) CHECK(red.readout(a.terminal)[0] == back.readout(b.terminal)[0]);
  }
}

TEST_CASE("isomorphisms reload exactly") {
  auto s1 = lin1();
  auto s2 = cubing();
  auto iso = construct_isomorphism(s1, s2, oracle_of(s1), 0.1);
  Json j = isomorphism_to_json(s1.alphabet(), iso);
  LocalIsomorphism back = isomorphism_from_json(s1.alphabet(), j);
  CHECK(isomorphism_to_json(s1.alphabet(), back) == j);
  for (double x : {0.9, 1.0, 1.2}) {
    CHECK(back.apply(vec({x}))[0] == iso.apply(vec({x}))[0]);
    CHECK(back.inverse(vec({x * x * x}))[0] == iso.inverse(vec({x * x * x}))[0]);
  }
}

TEST_CASE("exact Kalman ranks of affine systems") {
  CHECK(kalman_ranks(lin1()).product == 1);
  auto d = kalman_ranks(diag());
  CHECK(d.controllability == 1);
  CHECK(d.observability == 1);
  CHECK(d.product == 1);
  CHECK(kalman_ranks(bilinear()).product == 2);
  for (std::size_t n = 1; n <= 3; ++n) CHECK(kalman_ranks(linear(n)).product == n);
  auto u = kalman_ranks(unobserved());
  CHECK(u.controllability == 2);
  CHECK(u.observability == 1);
  CHECK(u.product == 1);
  CHECK(code_of([] { kalman_ranks(power_law()); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("catalog loading keeps broken entries and the harness reports them") {
  fs::path dir = scratch("catalog");
  write_json_file((dir / "lin1.json").string(), system_to_json(lin1(), "SYS-LIN1"));
  write_json_file((dir / "redundant3.json").string(), system_to_json(redundant3(), "SYS-REDUNDANT3"));
  std::ofstream(dir / "zz_corrupt.json") << "{\"n\": 2, \"fields\": ";
  auto cat = load_catalog(dir.string());
  REQUIRE(cat.size() == 3);
  CHECK(cat[0].system.has_value());
  CHECK(cat[0].name == "SYS-LIN1");
  CHECK(!cat[2].system.has_value());
  CHECK(cat[2].error.find("ParseError") != std::string::npos);

  RunConfig cfg;
  auto r = run_experiment("A4", dir.string(), cfg);
  CHECK(!r.pass);
  bool found = false;
  for (const auto& row : r.evidence["systems"])
    if (row["file"] == "zz_corrupt.json") found = row["pass"] == false && row.contains("error");
  CHECK(found);

  CHECK(code_of([&] { run_experiment("A9", dir.string(), cfg); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { load_catalog((dir / "nope").string()); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("run config validation and echo") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rank_tol = 0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
  RunConfig d;
  CHECK(d.to_json()["tolerances"]["flow"] == 1e-10);
  CHECK(d.reduction().verify.trials == 100);
}
