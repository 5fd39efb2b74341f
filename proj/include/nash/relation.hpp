#pragma once

#include <map>
#include <span>
#include <vector>

namespace nash {

/// Polynomial Q(T, T_1, ..., T_d) with floating coefficients.
///
/// Stored in affinely normalized variables u_k = (v_k - center_k) / scale_k,
/// which is the form the fitter works in; coefficients are scaled so the
/// largest magnitude is 1. Variable 0 is T.
class PolynomialRelation {
 public:
  PolynomialRelation() = default;
  PolynomialRelation(std::size_t num_basis, std::vector<std::vector<unsigned>> exponents,
                     std::vector<double> coefficients, std::vector<double> center = {},
                     std::vector<double> scale = {});

  std::size_t num_basis() const noexcept { return num_basis_; }
  std::size_t num_vars() const noexcept { return num_basis_ + 1; }
  const std::vector<std::vector<unsigned>>& exponents() const noexcept { return exponents_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  const std::vector<double>& center() const noexcept { return center_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

  unsigned total_degree() const noexcept;
  unsigned degree_in_T() const noexcept;

  double evaluate(double t, std::span<const double> basis) const;
  /// dQ/dT in original units.
  double d_dT(double t, std::span<const double> basis) const;
  /// dQ/du_0 in normalized units; this is what the derivative floor is
  /// compared against, so the floor does not depend on the data's units.
  double scaled_d_dT(double t, std::span<const double> basis) const;
  /// dQ/dT_i (i = 1..d) in original units, written to out[0..d-1].
  void d_dbasis(double t, std::span<const double> basis, std::span<double> out) const;
  /// |Q| / sum_m |c_m u^m|, a unit-free residual.
  double relative_residual(double t, std::span<const double> basis) const;

  /// Coefficients in the original variables, normalized to max |c| = 1;
  /// entries below 1e-12 are dropped.
  std::map<std::vector<unsigned>, double> expanded() const;

  /// Max relative residual on held-out samples (set by the fitter).
  double residual = 0.0;
  /// Smallest relative singular value of the fitting matrix.
  double singular_ratio = 0.0;

 private:
  void normalized(double t, std::span<const double> basis, std::vector<double>& u) const;

  std::size_t num_basis_ = 0;
  std::vector<std::vector<unsigned>> exponents_;
  std::vector<double> coefficients_;
  std::vector<double> center_;
  std::vector<double> scale_;
};

}  // namespace nash
