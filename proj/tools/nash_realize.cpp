// nash-realize: command-line surface over the realization library.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "nash/config.hpp"
#include "nash/error.hpp"
#include "nash/experiments.hpp"
#include "nash/version.hpp"

using namespace nash;

namespace {

struct Common {
  RunConfig cfg;
  std::optional<std::size_t> depth;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.cfg.seed, "random seed");
  sub->add_option("--tol-flow", c.cfg.flow_tol, "integrator tolerance");
  sub->add_option("--tol-rank", c.cfg.rank_tol, "relative rank cut");
  sub->add_option("--tol-fit", c.cfg.fit_tol, "relation fit tolerance");
  sub->add_option("--tol-newton", c.cfg.newton_tol, "Newton residual tolerance");
  sub->add_option("--tol-iso", c.cfg.iso_tol, "isomorphism check tolerance");
  sub->add_option("--tol-floor", c.cfg.derivative_floor, "minimum |dQ/dT| for implicit maps");
  sub->add_option("--depth", c.depth, "observation algebra depth (default: state dimension)");
  sub->add_option("--degree-bound", c.cfg.degree_bound, "maximum relation degree");
  sub->add_option("--epsilon", c.cfg.epsilon, "time budget for the shift input");
  sub->add_option("--trials", c.cfg.trials, "verification words / probes");
  sub->add_option("--budget", c.cfg.budget, "total time of sampled words");
  sub->add_option("--out", c.out, "also write the report to FILE");
}

std::string text_or_file(const std::string& s) {
  if (s.empty() || s[0] != '@') return s;
  std::ifstream in(s.substr(1));
  if (!in) raise(ErrorCode::ParseError, "cannot read " + s.substr(1));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json parse_json_text(const std::string& s) {
  try {
    return Json::parse(s);
  } catch (const std::exception& e) {
    raise(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

ResponseOracle oracle_for(const NashSystem& sys, const RunConfig& cfg) {
  return ResponseOracle::from_system(std::make_shared<NashSystem>(sys), cfg.flow());
}

Json reduction_payload(const NashSystem& sys, const LocalRealization& red, const VerificationReport& rep) {
  return {{"dim", red.dim()},
          {"input_dim", sys.dim()},
          {"shift", word_to_json(sys.alphabet(), red.shift())},
          {"shift_time", red.shift().total_time()},
          {"gate_deviation", red.gate_deviation},
          {"verification", verification_to_json(sys.alphabet(), rep)},
          {"realization", realization_to_json(red)}};
}

/// Result of one command: verdict string, payload and whether it counts as success.
struct Outcome {
  std::string verdict;
  Json payload;
  bool ok = false;
};

int finish(const std::string& command, const Common& c, Json inputs, const std::function<Outcome()>& body) {
  Json report = {{"command", command}, {"version", kVersion}, {"config", c.cfg.to_json()}, {"inputs", inputs}};
  if (c.depth) report["config"]["depth"] = *c.depth;
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    c.cfg.validate();
    Outcome o = body();
    report["verdict"] = o.verdict;
    report["payload"] = o.payload;
    code = o.ok ? 0 : 1;
  } catch (const Error& e) {
    report["verdict"] = "ERROR";
    report["error"] = {{"code", error_name(e.code())}, {"message", e.what()}};
    code = 2;
  } catch (const std::exception& e) {
    report["verdict"] = "ERROR";
    report["error"] = {{"code", "Internal"}, {"message", e.what()}};
    code = 2;
  }
  report["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  std::cout << report.dump(2) << "\n";
  if (!c.out.empty()) {
    try {
      write_json_file(c.out, report);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Realization theory toolkit for Nash (power-law) control systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common c;
  std::string sys_file, sys2_file, input = "[]", csv, artifact, catalog = "catalog";
  std::size_t csv_samples = 50;
  bool restrict_reach = false;
  std::vector<std::string> only;

  auto* sim = app.add_subcommand("simulate", "integrate a system along an input word");
  sim->add_option("system", sys_file, "system JSON")->required();
  sim->add_option("--input", input, "word JSON, e.g. [[\"a0\",0.5]], or @FILE");
  sim->add_option("--csv", csv, "write sampled states to FILE");
  sim->add_option("--samples", csv_samples, "CSV rows")->check(CLI::PositiveNumber);

  auto* ana = app.add_subcommand("analyze", "reachability, observability and trdeg verdicts");
  ana->add_option("system", sys_file, "system JSON")->required();

  auto* rr = app.add_subcommand("reduce-reach", "reachability reduction");
  rr->add_option("system", sys_file, "system JSON")->required();
  rr->add_option("--artifact", artifact, "write the realization JSON to FILE");

  auto* ro = app.add_subcommand("reduce-obs", "observability reduction");
  ro->add_option("system", sys_file, "system JSON")->required();
  ro->add_flag("--restrict", restrict_reach, "reduce to the reachable set first when needed");
  ro->add_option("--artifact", artifact, "write the realization JSON to FILE");

  auto* mn = app.add_subcommand("minimize", "reachability then observability reduction");
  mn->add_option("system", sys_file, "system JSON")->required();
  mn->add_option("--artifact", artifact, "write the realization JSON to FILE");

  auto* cmp = app.add_subcommand("compare", "construct and verify a local isomorphism");
  cmp->add_option("system1", sys_file, "first system JSON")->required();
  cmp->add_option("system2", sys2_file, "second system JSON")->required();
  cmp->add_option("--artifact", artifact, "write the isomorphism JSON to FILE");

  auto* acc = app.add_subcommand("acceptance", "run the acceptance experiments");
  acc->add_option("--catalog", catalog, "catalog directory");
  acc->add_option("--only", only, "experiment ids to run");

  for (auto* s : {sim, ana, rr, ro, mn, cmp, acc}) add_common(s, c);

  CLI11_PARSE(app, argc, argv);
  if (c.depth) c.cfg.depth = *c.depth;

  auto write_artifact = [&](const Json& j) {
    if (!artifact.empty()) write_json_file(artifact, j);
  };

  if (sim->parsed()) {
    return finish("simulate", c, {{"system", sys_file}, {"input", input}}, [&] {
      NashSystem sys = load_system(sys_file);
      GeneralizedInput u = word_from_json(sys.alphabet(), parse_json_text(text_or_file(input)));
      FlowOptions fo = c.cfg.flow();
      fo.store_dense = !csv.empty();
      Trajectory t = flow(sys, sys.x0(), u, fo);
      if (!csv.empty()) {
        std::ofstream f(csv);
        if (!f) raise(ErrorCode::InvalidArgument, "cannot write " + csv);
        f << "t";
        for (std::size_t i = 0; i < sys.dim(); ++i) f << ",x" << i + 1;
        f << "\n";
        const double total = t.breakpoints.empty() ? 0.0 : t.breakpoints.back();
        char buf[32];
        for (std::size_t k = 0; k < csv_samples; ++k) {
          const double at = csv_samples == 1 ? total : total * k / (csv_samples - 1);
          Vec x = total == 0.0 ? sys.x0() : t.state_at(at);
          std::snprintf(buf, sizeof buf, "%.17g", at);
          f << buf;
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x[i]);
            f << "," << buf;
          }
          f << "\n";
        }
      }
      return Outcome{"success", trajectory_to_json(sys, u, t), true};
    });
  }

  if (ana->parsed()) {
    return finish("analyze", c, {{"system", sys_file}}, [&] {
      NashSystem sys = load_system(sys_file);
      const std::size_t n = sys.dim();
      const std::size_t depth = c.depth ? *c.depth : n;
      auto reach = estimate_reachable_trdeg(sys, c.cfg.reach());
      auto obs = estimate_obs_trdeg(sys, depth, c.cfg.trdeg());
      ResponseOptions ro_opts = c.cfg.response();
      ro_opts.depth = depth;
      auto resp = estimate_response_trdeg(oracle_for(sys, c.cfg), ro_opts);
      Json p = {{"dim", n},
                {"depth", depth},
                {"reachable", reach.estimated_trdeg == n},
                {"reachable_trdeg", reach.estimated_trdeg},
                {"observable", obs.estimated_trdeg == n},
                {"obs_trdeg", obs.estimated_trdeg},
                {"response_trdeg", resp.estimated_trdeg},
                {"low_confidence", reach.low_confidence || obs.low_confidence || resp.low_confidence},
                {"reach_report", report_to_json(reach)},
                {"obs_report", report_to_json(obs)},
                {"response_report", report_to_json(resp)}};
      return Outcome{"success", p, true};
    });
  }

  if (rr->parsed() || ro->parsed() || mn->parsed()) {
    const std::string name = rr->parsed() ? "reduce-reach" : ro->parsed() ? "reduce-obs" : "minimize";
    return finish(name, c, {{"system", sys_file}}, [&] {
      NashSystem sys = load_system(sys_file);
      auto o = oracle_for(sys, c.cfg);
      ReductionOptions opts = c.cfg.reduction();
      opts.restrict_to_reachable = restrict_reach;
      LocalRealization red = rr->parsed()   ? reachability_reduce(sys, o, c.cfg.epsilon, opts)
                             : ro->parsed() ? observability_reduce(sys, o, c.cfg.epsilon, opts)
                                            : minimize(sys, o, c.cfg.epsilon, opts);
      auto rep = verify_local_realization(red, o, c.cfg.verify());
      write_artifact(realization_to_json(red));
      const bool ok = rep.pass && red.shift().total_time() < c.cfg.epsilon;
      return Outcome{ok ? "PASS" : "FAIL", reduction_payload(sys, red, rep), ok};
    });
  }

  if (cmp->parsed()) {
    return finish("compare", c, {{"system1", sys_file}, {"system2", sys2_file}}, [&] {
      NashSystem s1 = load_system(sys_file);
      NashSystem s2 = load_system(sys2_file);
      auto iso = construct_isomorphism(s1, s2, oracle_for(s1, c.cfg), c.cfg.epsilon, c.cfg.isomorphism());
      auto rep = verify_isomorphism(iso, s1, s2, c.cfg.iso_verify());
      Json j = isomorphism_to_json(s1.alphabet(), iso);
      write_artifact(j);
      Json p = {{"dim", iso.dim()},
                {"shift_time", iso.shift.total_time()},
                {"report", iso_report_to_json(rep)},
                {"isomorphism", j}};
      return Outcome{rep.pass ? "PASS" : "FAIL", p, rep.pass};
    });
  }

  // acceptance
  return finish("acceptance", c, {{"catalog", catalog}, {"only", only}}, [&] {
    std::vector<std::string> ids = only.empty() ? experiment_ids() : only;
    Json rows = Json::array();
    bool all = true;
    for (const auto& id : ids) {
      ExperimentResult r = run_experiment(id, catalog, c.cfg);
      std::fprintf(stderr, "%s %s %.2fs %s\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds, r.summary.c_str());
      all = all && r.pass;
      rows.push_back(experiment_to_json(r, false));
    }
    return Outcome{all ? "PASS" : "FAIL", {{"experiments", rows}}, all};
  });
}
