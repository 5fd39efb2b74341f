#include <cmath>
#include <limits>

#include "nash/error.hpp"
#include "nash/parallel.hpp"
#include "nash/reduction.hpp"

namespace nash {

std::vector<Vec> reachable_samples(const ControlSystem& sys, const Vec& x, std::size_t count,
                                   std::size_t max_letters, double budget, std::uint64_t seed,
                                   const FlowOptions& flow) {
  std::vector<Vec> out;
  out.reserve(count);
  std::size_t batch = 0;
  while (out.size() < count) {
    if (batch > 20) raise(ErrorCode::DomainExit, "too few sampled words stay inside the state space");
    auto words = sample_inputs(sys.alphabet(), max_letters, budget, count, seed + 1000003 * batch++);
    for (const auto& w : words) {
      if (out.size() >= count) break;
      Trajectory t = try_flow(sys, x, w, flow);
      if (t.success) out.push_back(t.terminal);
    }
  }
  return out;
}

VerificationReport verify_local_realization(const ControlSystem& red, const GeneralizedInput& shift,
                                            const ResponseOracle& oracle, const VerifyOptions& opts) {
  VerificationReport rep;
  rep.trials = opts.trials;
  rep.tol = opts.tol;
  std::optional<ResponseOracle> target;
  try {
    target = oracle.shifted(shift);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DomainExit && e.code() != ErrorCode::BlowUp && e.code() != ErrorCode::OffGrid) throw;
    rep.rejected = opts.trials;
    return rep;
  }
  auto words = sample_inputs(red.alphabet(), opts.max_letters, opts.budget, opts.trials, opts.seed);
  const Vec x0 = red.initial_state();
  // -1: rejected by one of the two sides
  std::vector<double> dev(words.size(), -1.0);
  parallel_for(words.size(), [&](std::size_t i) {
    Vec expected;
    try {
      expected = target->respond(words[i]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DomainExit && e.code() != ErrorCode::BlowUp && e.code() != ErrorCode::OffGrid) throw;
      return;
    }
    Trajectory t = try_flow(red, x0, words[i], opts.flow);
    if (!t.success) return;
    Vec got;
    try {
      got = red.readout(t.terminal);
    } catch (const Error&) {
      return;
    }
    if (got.size() != expected.size()) return;
    double d = (got - expected).lpNorm<Eigen::Infinity>();
    dev[i] = std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
  });
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (dev[i] < 0.0) {
      ++rep.rejected;
      continue;
    }
    ++rep.accepted;
    rep.max_deviation = std::max(rep.max_deviation, dev[i]);
    if (dev[i] > opts.tol && rep.failures.size() < 10) rep.failures.push_back(words[i]);
  }
  rep.pass = rep.max_deviation <= opts.tol && 2 * rep.accepted >= opts.trials;
  return rep;
}

VerificationReport verify_local_realization(const LocalRealization& red, const ResponseOracle& oracle,
                                            const VerifyOptions& opts) {
  return verify_local_realization(red, red.shift(), oracle, opts);
}

}  // namespace nash
