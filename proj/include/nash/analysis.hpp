#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nash/error.hpp"
#include "nash/expr.hpp"
#include "nash/relation.hpp"
#include "nash/system.hpp"

namespace nash {

/// One generator of the observation algebra: the Lie derivative
/// f_{a_k} ... f_{a_1} h_j. `word` lists the letters in application order,
/// a_1 first.
struct ObsGenerator {
  NashExpr expr;
  std::size_t output = 0;
  std::vector<std::size_t> word;
};

struct ObsAlgebraBasis {
  std::vector<ObsGenerator> generators;
  std::size_t depth = 0;
  std::size_t pruned = 0;  // zero, constant or scalar-multiple derivatives dropped

  std::vector<NashExpr> exprs() const;
};

/// Thrown when a Lie derivative exceeds the term cap; carries what was
/// generated before the cap was hit.
class ExpressionBlowupError : public Error {
 public:
  ExpressionBlowupError(const std::string& what, ObsAlgebraBasis partial)
      : Error(ErrorCode::ExpressionBlowup, what), partial_(std::move(partial)) {}
  const ObsAlgebraBasis& partial() const noexcept { return partial_; }

 private:
  ObsAlgebraBasis partial_;
};

/// Breadth-first over words of length <= depth. Readout components are kept
/// even when constant; derived generators that are zero, constant or a
/// scalar multiple of an earlier one are pruned.
ObsAlgebraBasis generate_obs_algebra(const NashSystem& sys, std::size_t depth,
                                     std::size_t term_cap = 20000);

struct RankOptions {
  double rank_tol = 1e-8;
  double gap_ratio = 1e6;
};

/// Numerical rank of one Jacobian.
struct RankEvidence {
  std::vector<double> singular_values;  // descending; empty for exact ranks
  std::size_t rank = 0;
  double gap = 0.0;  // sigma_r / sigma_{r+1}; infinity when nothing was cut
  bool confident = true;
  bool exact = false;
};

RankEvidence numerical_rank(const Mat& jacobian, const RankOptions& opts);
/// Rank over the rationals by fraction-free elimination.
std::size_t exact_rank(const std::vector<std::vector<Rational>>& rows);

struct TranscendenceReport {
  std::size_t estimated_trdeg = 0;
  std::size_t ambient_dim = 0;
  std::size_t num_generators = 0;
  std::vector<std::vector<double>> sample_points;
  std::vector<RankEvidence> samples;
  double rank_tolerance = 0.0;
  double gap_ratio = 0.0;
  std::vector<std::size_t> basis_indices;
  std::size_t best_sample = 0;
  bool low_confidence = false;
  std::string method;
  std::vector<std::string> notes;
};

/// Rank report over Jacobians (rows: generators, columns: variables) taken
/// at several samples. The basis is chosen greedily, in generator order, at
/// the sample with the largest rank.
TranscendenceReport rank_report(const std::vector<Mat>& jacobians, const RankOptions& opts);

using PointSampler = std::function<std::vector<double>(std::mt19937_64&)>;

/// Uniform points in [center - spread, center + spread] clipped into the
/// domain (positive coordinates stay positive).
PointSampler box_sampler(const Box& domain, std::vector<double> center, double spread);

enum class RankArithmetic { Auto, Float };

struct TrdegOptions {
  RankOptions rank;
  std::size_t samples = 6;
  std::uint64_t seed = 1;
  RankArithmetic arithmetic = RankArithmetic::Auto;
};

/// Generic Jacobian rank of the generators. With Auto arithmetic and
/// polynomial generators, sample points are rounded to short rationals and the
/// rank is computed exactly.
TranscendenceReport estimate_trdeg(const std::vector<NashExpr>& generators, const PointSampler& sampler,
                                   const TrdegOptions& opts = {});

enum class SensitivityMode { Variational, FiniteDifference };

struct ReachOptions {
  std::size_t letters = 0;  // 0: 2n
  std::size_t samples = 6;
  double budget = 0.5;
  double fd_step = 1e-5;
  SensitivityMode mode = SensitivityMode::Variational;
  RankOptions rank;
  FlowOptions flow;
  std::uint64_t seed = 1;
  std::size_t retry_cap = 50;
};

/// Rank of d x(T_u; x0, u) / d(t_1..t_k) over sampled words with exactly k
/// letters. Basis indices refer to coordinate functions.
TranscendenceReport estimate_reachable_trdeg(const ControlSystem& sys, const ReachOptions& opts = {},
                                             std::optional<Vec> start = std::nullopt);

enum class DerivativeRoute { Auto, Exact, FiniteDifference };

struct ResponseOptions {
  std::size_t depth = 0;    // 0: n for system oracles, table capacity otherwise
  std::size_t letters = 0;  // 0: 2n for system oracles, table capacity otherwise
  std::size_t samples = 6;
  double budget = 0.5;
  double fd_step = 1e-3;
  DerivativeRoute route = DerivativeRoute::Auto;
  RankOptions rank;
  std::uint64_t seed = 1;
  std::size_t retry_cap = 50;
};

/// trdeg of the algebra generated by iterated D_a of the response components,
/// as the rank of their Jacobians in the switching durations. For oracles
/// backed by a symbolic system the derivatives are Lie derivatives composed
/// with variational sensitivities; otherwise they are finite differences on
/// the oracle (grid stencils for tables).
TranscendenceReport estimate_response_trdeg(const ResponseOracle& oracle, const ResponseOptions& opts = {});

struct ObservabilityOptions {
  std::size_t depth = 0;  // 0: dim
  std::size_t probes = 0;  // 0: 4 * dim
  std::size_t samples = 4;
  double budget = 0.5;
  RankOptions rank;
  FlowOptions flow;
  std::uint64_t seed = 1;
};

/// Rank on reachable points of d/dx of h(x(T_v; x, v)) stacked over random
/// words v (including the empty one). Works for any ControlSystem; for
/// symbolic systems it agrees with the rank of the Lie tower.
TranscendenceReport estimate_observability_rank(const ControlSystem& sys, const ObservabilityOptions& opts = {});

/// Symbolic observation-algebra trdeg on the state space, sampled in a box
/// around x0.
TranscendenceReport estimate_obs_trdeg(const NashSystem& sys, std::size_t depth, const TrdegOptions& opts,
                                       double spread = 0.5);

struct FitOptions {
  unsigned degree_bound = 6;
  double fit_tol = 1e-7;
  std::size_t validation_stride = 4;
  /// Tie-break point (T, T_1..T_d) for several null vectors.
  std::optional<std::vector<double>> preferred;
};

/// Samples needed for a fit over d basis functions up to the degree bound
/// (3x the largest monomial count plus a validation quarter).
std::size_t fit_sample_count(std::size_t num_basis, unsigned degree_bound);

/// Minimal-degree polynomial Q with Q(target_s, basis_s) = 0 on the samples.
/// basis is samples x d. Returns nullopt when the degree bound is exhausted.
std::optional<PolynomialRelation> fit_relation(const std::vector<double>& target, const Mat& basis,
                                               const FitOptions& opts = {});

}  // namespace nash
