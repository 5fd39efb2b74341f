#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nash/analysis.hpp"
#include "nash/relation.hpp"
#include "nash/system.hpp"

namespace nash {

struct ImplicitOptions {
  double newton_tol = 1e-12;
  std::size_t max_iter = 50;
  double derivative_floor = 1e-6;
  std::size_t probe_rays = 16;
};

/// T = G(z) defined by Q(T, z) = 0 through the base point (q*, z*).
class ImplicitMap {
 public:
  /// Throws DerivativeVanished if |dQ/dT| at the base is below the floor and
  /// InvalidArgument if the base point is not on the relation.
  ImplicitMap(PolynomialRelation q, std::vector<double> z_star, double q_star, ImplicitOptions opts = {});
  /// Rebuilds a serialized map as-is: no polishing of q*, radius kept.
  static ImplicitMap restore(PolynomialRelation q, std::vector<double> z_star, double q_star, ImplicitOptions opts,
                             double radius);

  /// Newton from a first-order predictor, falling back to continuation from
  /// the base point. Throws NewtonDiverged or DerivativeVanished.
  double solve(std::span<const double> z) const;
  double operator()(std::span<const double> z) const { return solve(z); }
  /// dG/dz at z, given q = G(z).
  void gradient(std::span<const double> z, double q, std::span<double> out) const;

  /// Probes rays out to 2 r_max; the radius becomes min(r_max, half the
  /// distance to the nearest failure).
  void estimate_radius(double r_max, std::uint64_t seed = 1);
  void set_radius(double r) { radius_ = r; }
  double radius() const noexcept { return radius_; }
  bool within(std::span<const double> z) const;

  const PolynomialRelation& relation() const noexcept { return q_; }
  const std::vector<double>& z_star() const noexcept { return z_star_; }
  double q_star() const noexcept { return q_star_; }
  const ImplicitOptions& options() const noexcept { return opts_; }
  std::size_t dim() const noexcept { return z_star_.size(); }

 private:
  ImplicitMap() = default;
  void init_predictor();
  bool newton(std::span<const double> z, double& q) const;

  PolynomialRelation q_;
  std::vector<double> z_star_;
  double q_star_ = 0.0;
  ImplicitOptions opts_;
  std::vector<double> predictor_;
  double base_sign_ = 1.0;
  double radius_ = std::numeric_limits<double>::infinity();
};

/// Convenience wrapper matching the operation name.
inline double implicit_solve(const ImplicitMap& map, std::span<const double> z) { return map.solve(z); }

enum class Provenance { ReachReduced, ObsReduced, Minimized };
std::string provenance_name(Provenance p);

/// Reduced system built from implicit maps.
///
/// A chart realization (from the reachability procedure) lives on V with a
/// lift G : V -> X into the state space of the symbolic parent; its fields
/// are f^V = DPhi(G) f(G), where Phi picks the basis coordinates. An
/// observed realization (from the observability procedure) has fields and
/// readout given directly by implicit maps in the new coordinates.
class LocalRealization final : public ControlSystem {
 public:
  enum class Kind { Chart, Observed };

  static LocalRealization chart(std::shared_ptr<const NashSystem> base, std::vector<std::size_t> basis,
                                std::vector<std::optional<ImplicitMap>> lifts, Vec x0, GeneralizedInput shift);
  static LocalRealization observed(InputAlphabet alphabet, std::vector<std::vector<ImplicitMap>> fields,
                                   std::vector<ImplicitMap> readout, Vec x0, GeneralizedInput shift);

  std::size_t dim() const override { return static_cast<std::size_t>(x0_.size()); }
  std::size_t num_outputs() const override;
  const InputAlphabet& alphabet() const override { return alphabet_; }
  Vec initial_state() const override { return x0_; }
  bool field(std::size_t letter, const Vec& z, Vec& dz) const override;
  bool field_jacobian(std::size_t letter, const Vec& z, Mat& jac) const override;
  Vec readout(const Vec& z) const override;
  Mat readout_jacobian(const Vec& z) const override;
  bool inside(const Vec& z) const override;

  Kind kind() const noexcept { return kind_; }
  Provenance provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }
  const GeneralizedInput& shift() const noexcept { return shift_; }

  // Chart data.
  const std::shared_ptr<const NashSystem>& base() const noexcept { return base_; }
  const std::vector<std::size_t>& basis() const noexcept { return basis_; }
  const std::vector<std::optional<ImplicitMap>>& lifts() const noexcept { return lifts_; }
  /// x = G(z) and optionally DG(z). false outside the validity region.
  bool lift(const Vec& z, Vec& x, Mat* jac = nullptr) const;

  // Observed data.
  const std::vector<std::vector<ImplicitMap>>& field_maps() const noexcept { return fields_; }
  const std::vector<ImplicitMap>& readout_maps() const noexcept { return readout_; }

  /// Provenance of an observed realization's coordinates: generator i of
  /// the parent's observation algebra (output, Lie word).
  std::vector<ObsGenerator> coordinate_generators;
  /// Chart the observed realization was reduced from, when there was one.
  std::shared_ptr<const LocalRealization> parent_chart;
  /// Verification evidence from the built-in gate.
  double gate_deviation = 0.0;

 private:
  LocalRealization() = default;
  bool eval_map(const ImplicitMap& m, const Vec& z, double& q) const;

  Kind kind_ = Kind::Chart;
  Provenance provenance_ = Provenance::ReachReduced;
  InputAlphabet alphabet_;
  Vec x0_;
  GeneralizedInput shift_;
  std::shared_ptr<const NashSystem> base_;
  std::vector<std::size_t> basis_;
  std::vector<std::optional<ImplicitMap>> lifts_;
  std::vector<std::vector<ImplicitMap>> fields_;
  std::vector<ImplicitMap> readout_;
};

struct VerifyOptions {
  std::size_t trials = 100;
  double budget = 0.5;
  std::size_t max_letters = 4;
  double tol = 1e-6;
  std::uint64_t seed = 2;
  FlowOptions flow;
};

struct VerificationReport {
  std::size_t trials = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;  // words leaving either system's domain
  double max_deviation = 0.0;
  std::vector<GeneralizedInput> failures;  // accepted words above tol (first 10)
  double tol = 0.0;
  bool pass = false;
};

/// Compares respond(shift_oracle(oracle, shift), v) with the output of red
/// along v. Passes when the max deviation is within tol and at least half of
/// the words were accepted by both sides.
VerificationReport verify_local_realization(const ControlSystem& red, const GeneralizedInput& shift,
                                            const ResponseOracle& oracle, const VerifyOptions& opts = {});
VerificationReport verify_local_realization(const LocalRealization& red, const ResponseOracle& oracle,
                                            const VerifyOptions& opts = {});

struct ReductionOptions {
  RankOptions rank;
  FitOptions fit;
  ImplicitOptions implicit;
  VerifyOptions verify;
  FlowOptions flow;
  std::size_t depth = 0;          // observation algebra depth; 0: dim
  std::size_t fit_samples = 0;    // 0: enough for the degree bound
  double sample_budget = 1.0;     // time budget of words producing fit samples
  std::size_t shift_attempts = 0;  // 0: 10 n
  bool restrict_to_reachable = false;
  bool gate = true;
  std::uint64_t seed = 1;
};

/// Terminal states of `count` admissible sampled words from x.
std::vector<Vec> reachable_samples(const ControlSystem& sys, const Vec& x, std::size_t count,
                                   std::size_t max_letters, double budget, std::uint64_t seed,
                                   const FlowOptions& flow = {});

LocalRealization reachability_reduce(const NashSystem& sys, const ResponseOracle& oracle, double epsilon,
                                     const ReductionOptions& opts = {});

/// Works on a symbolic system or on a chart realization. Throws
/// NotReachableInput if the input is not semi-algebraically reachable,
/// unless restrict_to_reachable is set, in which case a reachability
/// reduction with epsilon/2 runs first.
LocalRealization observability_reduce(const NashSystem& sys, const ResponseOracle& oracle, double epsilon,
                                      const ReductionOptions& opts = {});
LocalRealization observability_reduce(const LocalRealization& chart, const ResponseOracle& oracle,
                                      double epsilon, const ReductionOptions& opts = {});

LocalRealization minimize(const NashSystem& sys, const ResponseOracle& oracle, double epsilon,
                          const ReductionOptions& opts = {});

/// Best-effort polynomial regression of the fields and readout of a reduced
/// system around its initial state. Never used for verification.
NashSystem resymbolize(const LocalRealization& red, unsigned degree = 3, std::size_t samples = 200,
                       std::uint64_t seed = 1);

}  // namespace nash
