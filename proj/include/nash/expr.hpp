#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace nash {

using Rational = mpq_class;

Rational parse_rational(const std::string& text);
/// Always "p/q", including integers ("3/1").
std::string format_rational(const Rational& value);
/// The exact binary value of a finite double.
Rational rational_from_double(double value);

enum class DomainFlag { AllReal, PositiveOrthant };

struct Term {
  Rational coeff;
  std::vector<Rational> exps;
};

/// Finite sum of power-law monomials c * x1^e1 * ... * xn^en with rational
/// coefficients and exponents.
///
/// Values are kept canonical: terms are ordered by exponent vector, no two
/// terms share an exponent vector and no coefficient is zero. An AllReal
/// expression is a polynomial (all exponents are nonnegative integers);
/// anything with fractional or negative exponents lives on the positive
/// orthant. Arithmetic and differentiation re-canonicalize, so structural
/// equality is mathematical equality within the class.
class NashExpr {
 public:
  explicit NashExpr(std::size_t nvars = 1, DomainFlag flag = DomainFlag::AllReal);

  static NashExpr constant(std::size_t nvars, const Rational& c,
                           DomainFlag flag = DomainFlag::AllReal);
  /// Coordinate function x_i (0-based).
  static NashExpr variable(std::size_t nvars, std::size_t i,
                           DomainFlag flag = DomainFlag::AllReal);
  static NashExpr monomial(const Rational& c, std::vector<Rational> exps,
                           DomainFlag flag = DomainFlag::AllReal);
  /// Merges duplicate exponent vectors and drops zero terms. Throws
  /// InvalidExpression if an AllReal expression gets a non-polynomial exponent.
  static NashExpr from_terms(std::size_t nvars, std::vector<Term> terms,
                             DomainFlag flag = DomainFlag::AllReal);
  /// Like from_terms, but picks PositiveOrthant when any exponent needs it.
  static NashExpr from_terms_auto(std::size_t nvars, std::vector<Term> terms);

  std::size_t nvars() const noexcept { return nvars_; }
  DomainFlag domain() const noexcept { return flag_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  std::vector<Term> terms() const;

  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const;
  /// All exponents are nonnegative integers.
  bool is_polynomial() const;
  /// Coordinates that appear with a fractional or negative exponent; these
  /// must be strictly positive for the expression to be defined.
  std::vector<bool> positivity_requirements() const;

  double eval(std::span<const double> x) const;
  Rational eval_exact(std::span<const Rational> x) const;

  NashExpr diff(std::size_t i) const;

  NashExpr operator-() const;
  NashExpr& operator+=(const NashExpr& other);
  NashExpr& operator-=(const NashExpr& other);
  NashExpr& operator*=(const NashExpr& other);
  NashExpr scaled(const Rational& factor) const;
  NashExpr pow(unsigned k) const;

  friend NashExpr operator+(NashExpr a, const NashExpr& b) { return a += b; }
  friend NashExpr operator-(NashExpr a, const NashExpr& b) { return a -= b; }
  friend NashExpr operator*(NashExpr a, const NashExpr& b) { return a *= b; }

  bool operator==(const NashExpr& other) const;
  bool operator!=(const NashExpr& other) const { return !(*this == other); }

  /// c with *this == c * other, if one exists (both nonzero).
  std::optional<Rational> ratio_to(const NashExpr& other) const;

  std::string to_string() const;

 private:
  struct ExpLess {
    bool operator()(const std::vector<Rational>& a, const std::vector<Rational>& b) const;
  };
  using TermMap = std::map<std::vector<Rational>, Rational, ExpLess>;

  void check_compatible(const NashExpr& other) const;
  void validate() const;

  std::size_t nvars_;
  DomainFlag flag_;
  TermMap terms_;
};

NashExpr lie_derivative(std::span<const NashExpr> field, const NashExpr& g);
std::vector<NashExpr> gradient(const NashExpr& g);

/// Float evaluator with exponents pre-converted; used on hot paths (flows,
/// Jacobians). Returns NaN instead of throwing where the expression is
/// undefined, so integrators can reject a step without unwinding.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const NashExpr& e);

  double operator()(const double* x) const noexcept;

 private:
  struct Factor {
    std::size_t var;
    double exponent;
    int int_exponent;
    bool integral;
  };
  struct CTerm {
    double coeff;
    std::vector<Factor> factors;
  };
  std::vector<CTerm> terms_;
};

}  // namespace nash
