#include <cmath>
#include <random>

#include "nash/error.hpp"
#include "nash/minimality.hpp"

namespace nash {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Minimal:
      return "MINIMAL";
    case Verdict::NotMinimal:
      return "NOT_MINIMAL";
    case Verdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

namespace {

/// Words on the table grid, so the comparison does not pick up interpolation
/// error.
VerificationReport verify_on_grid(const ControlSystem& sys, const ResponseOracle& oracle, const VerifyOptions& vo) {
  const ResponseTable& table = *oracle.table();
  VerificationReport rep;
  rep.trials = vo.trials;
  rep.tol = vo.tol;
  const std::size_t L = std::max<std::size_t>(1, std::min(vo.max_letters, table.max_letters()));
  std::mt19937_64 rng(vo.seed);
  std::uniform_int_distribution<std::size_t> letter(0, sys.alphabet().size() - 1);
  for (std::size_t t = 0; t < vo.trials; ++t) {
    const std::size_t k = 1 + rng() % L;
    const auto max_steps = static_cast<std::size_t>(std::floor(vo.budget / (static_cast<double>(k) * table.step()) + 1e-9));
    GeneralizedInput v;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t s = std::min(max_steps == 0 ? 0 : 1 + rng() % max_steps, table.points());
      v.append(letter(rng), table.step() * static_cast<double>(s));
    }
    Vec expected;
    try {
      expected = oracle.respond(v);
    } catch (const Error&) {
      ++rep.rejected;
      continue;
    }
    Trajectory tr = try_flow(sys, sys.initial_state(), v, vo.flow);
    if (!tr.success) {
      ++rep.rejected;
      continue;
    }
    ++rep.accepted;
    double dev = (sys.readout(tr.terminal) - expected).lpNorm<Eigen::Infinity>();
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > vo.tol && rep.failures.size() < 10) rep.failures.push_back(v);
  }
  rep.pass = rep.max_deviation <= vo.tol && 2 * rep.accepted >= vo.trials;
  return rep;
}

}  // namespace

MinimalityVerdict check_minimality(const ControlSystem& sys, const ResponseOracle& oracle,
                                   const MinimalityOptions& opts) {
  MinimalityVerdict v;
  const std::size_t n = sys.dim();
  v.dim_sigma = n;
  bool failed = false;

  VerifyOptions vo = opts.verify;
  vo.flow = opts.flow;
  VerificationReport real = oracle.is_system() ? verify_local_realization(sys, GeneralizedInput{}, oracle, vo)
                                               : verify_on_grid(sys, oracle, vo);
  v.realizes_oracle = real.pass;
  v.realization_deviation = real.max_deviation;
  if (!real.pass) v.witnesses.push_back("system does not realize the oracle (max deviation " +
                                        std::to_string(real.max_deviation) + ")");

  ResponseOptions ro;
  ro.rank = opts.rank;
  ro.seed = opts.seed;
  try {
    v.response_report = estimate_response_trdeg(oracle, ro);
    v.trdeg_response = v.response_report.estimated_trdeg;
    v.low_confidence |= v.response_report.low_confidence;
  } catch (const Error& e) {
    failed = true;
    v.witnesses.push_back(std::string("response trdeg: ") + e.what());
  }

  if (oracle.is_system()) {
    ReachOptions reach;
    reach.rank = opts.rank;
    reach.flow = opts.flow;
    reach.seed = opts.seed;
    try {
      v.reach_report = estimate_reachable_trdeg(sys, reach);
      v.reachable_trdeg = v.reach_report->estimated_trdeg;
      v.low_confidence |= v.reach_report->low_confidence;
    } catch (const Error& e) {
      failed = true;
      v.witnesses.push_back(std::string("reachable trdeg: ") + e.what());
    }
    try {
      if (const auto* nash_sys = dynamic_cast<const NashSystem*>(&sys)) {
        TrdegOptions to;
        to.rank = opts.rank;
        to.seed = opts.seed;
        v.obs_report = estimate_obs_trdeg(*nash_sys, opts.depth ? opts.depth : n, to);
      } else {
        ObservabilityOptions oo;
        oo.depth = opts.depth;
        oo.rank = opts.rank;
        oo.flow = opts.flow;
        oo.seed = opts.seed;
        v.obs_report = estimate_observability_rank(sys, oo);
      }
      v.trdeg_obs_sigma = v.obs_report->estimated_trdeg;
      v.low_confidence |= v.obs_report->low_confidence;
    } catch (const Error& e) {
      failed = true;
      v.witnesses.push_back(std::string("observation trdeg: ") + e.what());
    }
  }

  if (v.low_confidence) v.witnesses.push_back("LOW_CONFIDENCE rank evidence");
  const bool c1 = v.trdeg_response == n;
  if (!c1) v.witnesses.push_back("dim " + std::to_string(n) + " != response trdeg " + std::to_string(v.trdeg_response));
  if (v.reachable_trdeg && *v.reachable_trdeg != n)
    v.witnesses.push_back("reachable trdeg " + std::to_string(*v.reachable_trdeg) + " < dim");
  if (v.trdeg_obs_sigma && *v.trdeg_obs_sigma != n)
    v.witnesses.push_back("observation trdeg " + std::to_string(*v.trdeg_obs_sigma) + " < dim");

  if (failed || v.low_confidence || !real.pass) {
    v.verdict = Verdict::Inconclusive;
  } else if (!oracle.is_system()) {
    v.verdict = c1 ? Verdict::Minimal : Verdict::NotMinimal;
  } else {
    const bool c23 = *v.reachable_trdeg == n && *v.trdeg_obs_sigma == n;
    if (c1 == c23) {
      v.verdict = c1 ? Verdict::Minimal : Verdict::NotMinimal;
    } else {
      v.verdict = Verdict::Inconclusive;
      v.witnesses.push_back("characterizations disagree");
    }
  }
  return v;
}

}  // namespace nash
