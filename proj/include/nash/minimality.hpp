#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nash/analysis.hpp"
#include "nash/reduction.hpp"

namespace nash {

enum class Verdict { Minimal, NotMinimal, Inconclusive };
std::string verdict_name(Verdict v);

struct MinimalityOptions {
  RankOptions rank;
  FlowOptions flow;
  std::size_t depth = 0;  // 0: dim
  VerifyOptions verify;
  std::uint64_t seed = 1;
};

struct MinimalityVerdict {
  std::size_t dim_sigma = 0;
  std::size_t trdeg_response = 0;
  std::optional<std::size_t> trdeg_obs_sigma;  // empty: NOT_EVALUATED
  std::optional<std::size_t> reachable_trdeg;   // empty: NOT_EVALUATED
  bool realizes_oracle = false;
  double realization_deviation = 0.0;
  bool low_confidence = false;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> witnesses;

  TranscendenceReport response_report;
  std::optional<TranscendenceReport> reach_report;
  std::optional<TranscendenceReport> obs_report;
};

/// Evaluates dim = trdeg of the response algebra, reachability and
/// observability independently and cross-checks them. For table oracles only
/// the first is evaluated.
MinimalityVerdict check_minimality(const ControlSystem& sys, const ResponseOracle& oracle,
                                   const MinimalityOptions& opts = {});

struct IsomorphismOptions {
  RankOptions rank;
  FitOptions fit;
  ImplicitOptions implicit;
  FlowOptions flow;
  double iso_tol = 1e-6;
  std::size_t fit_samples = 0;  // 0: enough for the degree bound
  double sample_budget = 1.0;
  std::size_t shift_attempts = 0;  // 0: 10 n
  bool require_minimal = true;
  std::uint64_t seed = 1;
};

/// xi1 : X1 -> X2 near x1 and its inverse xi2, one implicit map per
/// coordinate.
struct LocalIsomorphism {
  std::vector<ImplicitMap> forward;
  std::vector<ImplicitMap> backward;
  Vec base1;
  Vec base2;
  GeneralizedInput shift;
  double radius = 0.0;
  Mat jacobian;  // D xi1 at base1
  double condition_number = 0.0;
  double round_trip = 0.0;  // max |xi2(xi1(x)) - x| over the construction probes

  std::size_t dim() const noexcept { return forward.size(); }
  /// Throw DomainExit outside the validity region.
  Vec apply(const Vec& x) const;
  Vec inverse(const Vec& z) const;
  Mat apply_jacobian(const Vec& x) const;
  Mat inverse_jacobian(const Vec& z) const;
};

LocalIsomorphism construct_isomorphism(const ControlSystem& sys1, const ControlSystem& sys2,
                                       const ResponseOracle& oracle, double epsilon,
                                       const IsomorphismOptions& opts = {});

struct IsoVerifyOptions {
  std::size_t probes = 100;
  std::size_t words = 50;
  double budget = 0.5;
  double tol = 1e-6;
  double fd_step = 1e-5;
  std::uint64_t seed = 3;
  FlowOptions flow;
};

struct IsomorphismReport {
  std::size_t probes = 0;  // points used for checks (a)-(c)
  std::size_t words = 0;   // accepted words for check (d)
  double round_trip = 0.0;     // (a) |xi2(xi1(x)) - x|
  double pushforward = 0.0;    // (b) |D xi1 f1 - f2(xi1)|
  double readout = 0.0;        // (c) |h2(xi1) - h1|
  double intertwining = 0.0;   // (d) |xi1(x1(v)) - x2(v)|
  double jacobian_round_trip = 0.0;  // |D xi2 D xi1 - I| at the base point
  double probed_radius = 0.0;
  double tol = 0.0;
  bool pass_round_trip = false;
  bool pass_pushforward = false;
  bool pass_readout = false;
  bool pass_intertwining = false;
  bool pass = false;
};

IsomorphismReport verify_isomorphism(const LocalIsomorphism& iso, const ControlSystem& sys1,
                                     const ControlSystem& sys2, const IsoVerifyOptions& opts = {});

}  // namespace nash
