#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nash/expr.hpp"
#include "nash/inputs.hpp"

namespace nash {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Numeric view of a control system x' = f_a(x), y = h(x) over a finite
/// alphabet. Implemented by symbolic Nash systems and by the evaluator-backed
/// reduced realizations, so flows and rank estimators serve both.
class ControlSystem {
 public:
  virtual ~ControlSystem() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t num_outputs() const = 0;
  virtual const InputAlphabet& alphabet() const = 0;
  virtual Vec initial_state() const = 0;

  /// false where the field is undefined (outside the domain, evaluator failed).
  virtual bool field(std::size_t letter, const Vec& x, Vec& dx) const = 0;
  virtual bool field_jacobian(std::size_t letter, const Vec& x, Mat& jac) const = 0;
  /// Throw DomainExit outside the domain.
  virtual Vec readout(const Vec& x) const = 0;
  virtual Mat readout_jacobian(const Vec& x) const = 0;

  virtual bool inside(const Vec& x) const = 0;
};

/// Open box with optional infinite bounds; coordinates flagged positive must
/// also be strictly positive.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> positive;

  static Box unbounded(std::size_t n);
  static Box positive_orthant(std::size_t n);

  std::size_t dim() const noexcept { return lower.size(); }
  bool contains(const Vec& x) const;
};

/// The quadruple (X, f, h, x0) with power-law right-hand sides.
class NashSystem final : public ControlSystem {
 public:
  /// fields[a] holds the n components of f_a. Validates arities, the domain
  /// flags against the positivity mask, and that x0 lies strictly inside.
  NashSystem(Box domain, InputAlphabet alphabet, std::vector<std::vector<NashExpr>> fields,
             std::vector<NashExpr> readout, Vec x0);

  std::size_t dim() const override { return n_; }
  std::size_t num_outputs() const override { return readout_.size(); }
  const InputAlphabet& alphabet() const override { return alphabet_; }
  Vec initial_state() const override { return x0_; }

  bool field(std::size_t letter, const Vec& x, Vec& dx) const override;
  bool field_jacobian(std::size_t letter, const Vec& x, Mat& jac) const override;
  Vec readout(const Vec& x) const override;
  Mat readout_jacobian(const Vec& x) const override;
  bool inside(const Vec& x) const override { return domain_.contains(x); }

  const Box& domain() const noexcept { return domain_; }
  const std::vector<NashExpr>& field_exprs(std::size_t letter) const { return fields_.at(letter); }
  const std::vector<NashExpr>& readout_exprs() const noexcept { return readout_; }
  const Vec& x0() const noexcept { return x0_; }

  /// Same dynamics, different initial state.
  NashSystem with_initial_state(Vec x0) const;
  /// Same dynamics with readout replaced (used for fault injection in tests).
  NashSystem with_readout(std::vector<NashExpr> readout) const;

 private:
  std::size_t n_;
  Box domain_;
  InputAlphabet alphabet_;
  std::vector<std::vector<NashExpr>> fields_;
  std::vector<NashExpr> readout_;
  Vec x0_;

  std::vector<std::vector<CompiledExpr>> cfields_;
  std::vector<std::vector<CompiledExpr>> cjac_;  // [letter][i*n+j] = d f_i / d x_j
  std::vector<CompiledExpr> creadout_;
  std::vector<CompiledExpr> creadout_jac_;  // [j*n+i]
};

struct FlowOptions {
  double tol = 1e-10;
  std::size_t max_steps = 200000;
  bool store_dense = false;
};

enum class FlowStatus { Ok, DomainExit, BlowUp };

/// One accepted integration step with its continuous extension.
struct DenseStep {
  double t0;
  double h;
  std::vector<Vec> coeffs;

  Vec at(double t) const;
};

struct Trajectory {
  std::vector<double> breakpoints;  // cumulative switching times, starting at 0
  std::vector<DenseStep> steps;     // populated when FlowOptions::store_dense
  Vec terminal;
  bool success = false;
  FlowStatus status = FlowStatus::BlowUp;
  std::size_t num_steps = 0;

  /// Dense state at absolute time t along the word; requires stored steps.
  Vec state_at(double t) const;
};

/// Integrates segment by segment, backward for negative durations. Throws
/// DomainExit or BlowUp.
Trajectory flow(const ControlSystem& sys, const Vec& x, const GeneralizedInput& u,
                const FlowOptions& opts = {});
/// Non-throwing variant; inspect `success` and `status`.
Trajectory try_flow(const ControlSystem& sys, const Vec& x, const GeneralizedInput& u,
                    const FlowOptions& opts = {});

/// Terminal state plus derivatives of it with respect to the switching
/// durations and the initial state, from the variational equations.
struct Sensitivity {
  Vec terminal;
  Mat d_durations;  // n x k
  Mat d_initial;    // n x n
  bool success = false;
  FlowStatus status = FlowStatus::BlowUp;
};

Sensitivity flow_sensitivity(const ControlSystem& sys, const Vec& x, const GeneralizedInput& u,
                             const FlowOptions& opts = {});

/// Response table over a uniform duration grid {0, step, ..., points*step}
/// for every stored letter word. Between grid nodes responses are
/// multilinearly interpolated.
class ResponseTable {
 public:
  ResponseTable(InputAlphabet alphabet, std::size_t outputs, double step, std::size_t points);

  const InputAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_outputs() const noexcept { return outputs_; }
  double step() const noexcept { return step_; }
  std::size_t points() const noexcept { return points_; }
  std::size_t max_letters() const noexcept;

  /// values are ordered row-major over the grid, first letter slowest.
  void set_word(std::vector<std::size_t> letters, std::vector<Vec> values);
  const std::map<std::vector<std::size_t>, std::vector<Vec>>& words() const noexcept {
    return words_;
  }
  bool has_word(const std::vector<std::size_t>& letters) const { return words_.count(letters) > 0; }

  /// Throws OffGrid for unknown words or durations outside the grid.
  Vec lookup(const GeneralizedInput& u) const;

 private:
  InputAlphabet alphabet_;
  std::size_t outputs_;
  double step_;
  std::size_t points_;
  std::map<std::vector<std::size_t>, std::vector<Vec>> words_;
};

/// Tabulates every word with at most `max_letters` letters.
ResponseTable tabulate(const ControlSystem& sys, std::size_t max_letters, double step,
                       std::size_t points, const FlowOptions& opts = {});

/// Input-output map u -> p(u), backed either by a system (negative durations
/// allowed) or by a table (nonnegative grid durations only).
class ResponseOracle {
 public:
  static ResponseOracle from_system(std::shared_ptr<const ControlSystem> sys,
                                    const FlowOptions& opts = {});
  static ResponseOracle from_table(std::shared_ptr<const ResponseTable> table);

  bool is_system() const noexcept { return static_cast<bool>(system_); }
  const ControlSystem* system() const noexcept { return system_.get(); }
  const std::shared_ptr<const ControlSystem>& system_ptr() const noexcept { return system_; }
  const ResponseTable* table() const noexcept { return table_.get(); }
  const Vec& start_state() const noexcept { return start_; }
  const GeneralizedInput& prefix() const noexcept { return prefix_; }
  const FlowOptions& flow_options() const noexcept { return opts_; }

  const InputAlphabet& alphabet() const;
  std::size_t num_outputs() const;

  Vec respond(const GeneralizedInput& u) const;
  /// p_u : v -> p(uv).
  ResponseOracle shifted(const GeneralizedInput& u) const;

 private:
  ResponseOracle() = default;

  std::shared_ptr<const ControlSystem> system_;
  Vec start_;
  std::shared_ptr<const ResponseTable> table_;
  GeneralizedInput prefix_;
  FlowOptions opts_;
};

inline ResponseOracle shift_oracle(const ResponseOracle& oracle, const GeneralizedInput& u) {
  return oracle.shifted(u);
}

/// g(x(T_u; x0, u)).
double state_to_output(const NashSystem& sys, const NashExpr& g, const GeneralizedInput& u,
                       const FlowOptions& opts = {});

}  // namespace nash
