#include "nash/relation.hpp"

#include <algorithm>
#include <cmath>

#include "nash/error.hpp"

namespace nash {

namespace {

double ipow(double b, unsigned e) {
  double r = 1.0;
  while (e) {
    if (e & 1U) r *= b;
    b *= b;
    e >>= 1U;
  }
  return r;
}

double binom(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

PolynomialRelation::PolynomialRelation(std::size_t num_basis, std::vector<std::vector<unsigned>> exponents,
                                       std::vector<double> coefficients, std::vector<double> center,
                                       std::vector<double> scale)
    : num_basis_(num_basis),
      exponents_(std::move(exponents)),
      coefficients_(std::move(coefficients)),
      center_(std::move(center)),
      scale_(std::move(scale)) {
  if (center_.empty()) center_.assign(num_vars(), 0.0);
  if (scale_.empty()) scale_.assign(num_vars(), 1.0);
  if (exponents_.size() != coefficients_.size() || center_.size() != num_vars() || scale_.size() != num_vars())
    raise(ErrorCode::InvalidArgument, "relation arrays have inconsistent sizes");
  for (const auto& e : exponents_)
    if (e.size() != num_vars()) raise(ErrorCode::InvalidArgument, "relation exponent vector has wrong length");
  for (double s : scale_)
    if (!(s > 0.0) || !std::isfinite(s)) raise(ErrorCode::IllConditioned, "relation scale must be positive");
  bool nonzero = false;
  for (double c : coefficients_) nonzero = nonzero || c != 0.0;
  if (!nonzero) raise(ErrorCode::InvalidArgument, "relation must be nonzero");
}

unsigned PolynomialRelation::total_degree() const noexcept {
  unsigned d = 0;
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    if (coefficients_[m] == 0.0) continue;
    unsigned s = 0;
    for (unsigned e : exponents_[m]) s += e;
    d = std::max(d, s);
  }
  return d;
}

unsigned PolynomialRelation::degree_in_T() const noexcept {
  unsigned d = 0;
  for (std::size_t m = 0; m < exponents_.size(); ++m)
    if (coefficients_[m] != 0.0) d = std::max(d, exponents_[m][0]);
  return d;
}

void PolynomialRelation::normalized(double t, std::span<const double> basis, std::vector<double>& u) const {
  if (basis.size() != num_basis_) raise(ErrorCode::ArityMismatch, "relation evaluated with wrong basis size");
  u.resize(num_vars());
  u[0] = (t - center_[0]) / scale_[0];
  for (std::size_t k = 0; k < num_basis_; ++k) u[k + 1] = (basis[k] - center_[k + 1]) / scale_[k + 1];
}

double PolynomialRelation::evaluate(double t, std::span<const double> basis) const {
  std::vector<double> u;
  normalized(t, basis, u);
  double acc = 0.0;
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    double term = coefficients_[m];
    for (std::size_t k = 0; k < u.size(); ++k) term *= ipow(u[k], exponents_[m][k]);
    acc += term;
  }
  return acc;
}

double PolynomialRelation::scaled_d_dT(double t, std::span<const double> basis) const {
  std::vector<double> u;
  normalized(t, basis, u);
  double acc = 0.0;
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    const unsigned e0 = exponents_[m][0];
    if (e0 == 0) continue;
    double term = coefficients_[m] * static_cast<double>(e0) * ipow(u[0], e0 - 1);
    for (std::size_t k = 1; k < u.size(); ++k) term *= ipow(u[k], exponents_[m][k]);
    acc += term;
  }
  return acc;
}

double PolynomialRelation::d_dT(double t, std::span<const double> basis) const {
  return scaled_d_dT(t, basis) / scale_[0];
}

void PolynomialRelation::d_dbasis(double t, std::span<const double> basis, std::span<double> out) const {
  if (out.size() != num_basis_) raise(ErrorCode::ArityMismatch, "gradient buffer has wrong size");
  std::vector<double> u;
  normalized(t, basis, u);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    for (std::size_t i = 1; i < u.size(); ++i) {
      const unsigned ei = exponents_[m][i];
      if (ei == 0) continue;
      double term = coefficients_[m] * static_cast<double>(ei) * ipow(u[i], ei - 1);
      for (std::size_t k = 0; k < u.size(); ++k)
        if (k != i) term *= ipow(u[k], exponents_[m][k]);
      out[i - 1] += term / scale_[i];
    }
  }
}

double PolynomialRelation::relative_residual(double t, std::span<const double> basis) const {
  std::vector<double> u;
  normalized(t, basis, u);
  double acc = 0.0, mag = 0.0;
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    double term = coefficients_[m];
    for (std::size_t k = 0; k < u.size(); ++k) term *= ipow(u[k], exponents_[m][k]);
    acc += term;
    mag += std::abs(term);
  }
  return mag > 0.0 ? std::abs(acc) / mag : std::abs(acc);
}

std::map<std::vector<unsigned>, double> PolynomialRelation::expanded() const {
  std::map<std::vector<unsigned>, double> out;
  const std::size_t nv = num_vars();
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    if (coefficients_[m] == 0.0) continue;
    // Product over variables of sum_j C(e,j) v^j (-c)^(e-j) / s^e.
    std::map<std::vector<unsigned>, double> partial{{std::vector<unsigned>(nv, 0), coefficients_[m]}};
    for (std::size_t k = 0; k < nv; ++k) {
      const unsigned e = exponents_[m][k];
      if (e == 0) continue;
      std::map<std::vector<unsigned>, double> next;
      for (const auto& [exps, c] : partial)
        for (unsigned j = 0; j <= e; ++j) {
          auto key = exps;
          key[k] = j;
          next[key] += c * binom(e, j) * ipow(-center_[k], e - j) / ipow(scale_[k], e);
        }
      partial = std::move(next);
    }
    for (const auto& [exps, c] : partial) out[exps] += c;
  }
  double mx = 0.0;
  for (const auto& [e, c] : out) mx = std::max(mx, std::abs(c));
  std::map<std::vector<unsigned>, double> trimmed;
  if (mx == 0.0) return trimmed;
  for (const auto& [e, c] : out)
    if (std::abs(c) / mx >= 1e-12) trimmed[e] = c / mx;
  return trimmed;
}

}  // namespace nash
