#include "nash/expr.hpp"

#include <cmath>
#include <limits>
#include <regex>
#include <sstream>

#include "nash/error.hpp"

namespace nash {

Rational parse_rational(const std::string& text) {
  static const std::regex form(R"(\s*[+-]?[0-9]+(/[0-9]+)?\s*)");
  if (!std::regex_match(text, form)) raise(ErrorCode::ParseError, "not a rational: '" + text + "'");
  Rational r;
  std::string trimmed;
  for (char c : text)
    if (c != ' ' && c != '\t' && c != '+') trimmed.push_back(c);
  if (r.set_str(trimmed, 10) != 0) raise(ErrorCode::ParseError, "not a rational: '" + text + "'");
  if (r.get_den() == 0) raise(ErrorCode::ParseError, "zero denominator: '" + text + "'");
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) raise(ErrorCode::InvalidArgument, "non-finite value");
  return Rational(value);
}

namespace {

bool is_nonneg_integer(const Rational& q) { return q.get_den() == 1 && sgn(q) >= 0; }

DomainFlag join(DomainFlag a, DomainFlag b) {
  return (a == DomainFlag::PositiveOrthant || b == DomainFlag::PositiveOrthant)
             ? DomainFlag::PositiveOrthant
             : DomainFlag::AllReal;
}

Rational rational_pow(const Rational& base, long e) {
  Rational result = 1;
  Rational b = e >= 0 ? base : Rational(1) / base;
  unsigned long k = e >= 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-e);
  while (k) {
    if (k & 1UL) result *= b;
    b *= b;
    k >>= 1;
  }
  return result;
}

}  // namespace

bool NashExpr::ExpLess::operator()(const std::vector<Rational>& a,
                                   const std::vector<Rational>& b) const {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    int c = cmp(a[i], b[i]);
    if (c != 0) return c < 0;
  }
  return a.size() < b.size();
}

NashExpr::NashExpr(std::size_t nvars, DomainFlag flag) : nvars_(nvars), flag_(flag) {
  if (nvars == 0) raise(ErrorCode::InvalidExpression, "nvars must be positive");
}

NashExpr NashExpr::constant(std::size_t nvars, const Rational& c, DomainFlag flag) {
  NashExpr e(nvars, flag);
  if (sgn(c) != 0) e.terms_.emplace(std::vector<Rational>(nvars, Rational(0)), c);
  return e;
}

NashExpr NashExpr::variable(std::size_t nvars, std::size_t i, DomainFlag flag) {
  if (i >= nvars) raise(ErrorCode::InvalidArgument, "variable index out of range");
  std::vector<Rational> exps(nvars, Rational(0));
  exps[i] = 1;
  return monomial(Rational(1), std::move(exps), flag);
}

NashExpr NashExpr::monomial(const Rational& c, std::vector<Rational> exps, DomainFlag flag) {
  std::size_t n = exps.size();
  return from_terms(n, {Term{c, std::move(exps)}}, flag);
}

NashExpr NashExpr::from_terms(std::size_t nvars, std::vector<Term> terms, DomainFlag flag) {
  NashExpr e(nvars, flag);
  for (auto& t : terms) {
    if (t.exps.size() != nvars) raise(ErrorCode::ArityMismatch, "term arity differs from nvars");
    for (auto& q : t.exps) q.canonicalize();
    t.coeff.canonicalize();
    auto [it, inserted] = e.terms_.try_emplace(t.exps, t.coeff);
    if (!inserted) it->second += t.coeff;
    if (sgn(it->second) == 0) e.terms_.erase(it);
  }
  e.validate();
  return e;
}

NashExpr NashExpr::from_terms_auto(std::size_t nvars, std::vector<Term> terms) {
  bool poly = true;
  for (const auto& t : terms)
    for (const auto& q : t.exps)
      if (!is_nonneg_integer(q)) poly = false;
  return from_terms(nvars, std::move(terms),
                    poly ? DomainFlag::AllReal : DomainFlag::PositiveOrthant);
}

void NashExpr::validate() const {
  if (flag_ != DomainFlag::AllReal) return;
  for (const auto& [exps, c] : terms_)
    for (const auto& q : exps)
      if (!is_nonneg_integer(q))
        raise(ErrorCode::InvalidExpression,
              "AllReal expression with non-polynomial exponent " + format_rational(q));
}

std::vector<Term> NashExpr::terms() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& [exps, c] : terms_) out.push_back(Term{c, exps});
  return out;
}

bool NashExpr::is_constant() const {
  for (const auto& [exps, c] : terms_)
    for (const auto& q : exps)
      if (sgn(q) != 0) return false;
  return true;
}

bool NashExpr::is_polynomial() const {
  for (const auto& [exps, c] : terms_)
    for (const auto& q : exps)
      if (!is_nonneg_integer(q)) return false;
  return true;
}

std::vector<bool> NashExpr::positivity_requirements() const {
  std::vector<bool> need(nvars_, false);
  for (const auto& [exps, c] : terms_)
    for (std::size_t i = 0; i < nvars_; ++i)
      if (!is_nonneg_integer(exps[i])) need[i] = true;
  return need;
}

double NashExpr::eval(std::span<const double> x) const {
  if (x.size() != nvars_) raise(ErrorCode::ArityMismatch, "point dimension differs from nvars");
  if (flag_ == DomainFlag::PositiveOrthant) {
    auto need = positivity_requirements();
    for (std::size_t i = 0; i < nvars_; ++i)
      if (need[i] && !(x[i] > 0.0))
        raise(ErrorCode::DomainViolation,
              "coordinate " + std::to_string(i + 1) + " must be strictly positive");
  }
  return CompiledExpr(*this)(x.data());
}

Rational NashExpr::eval_exact(std::span<const Rational> x) const {
  if (x.size() != nvars_) raise(ErrorCode::ArityMismatch, "point dimension differs from nvars");
  Rational sum = 0;
  for (const auto& [exps, c] : terms_) {
    Rational term = c;
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (sgn(exps[i]) == 0) continue;
      if (exps[i].get_den() != 1)
        raise(ErrorCode::ExactnessUnavailable, "fractional exponent " + format_rational(exps[i]));
      if (sgn(exps[i]) < 0 && sgn(x[i]) == 0)
        raise(ErrorCode::DomainViolation, "negative power of zero coordinate");
      term *= rational_pow(x[i], exps[i].get_num().get_si());
    }
    sum += term;
  }
  return sum;
}

NashExpr NashExpr::diff(std::size_t i) const {
  if (i >= nvars_) raise(ErrorCode::InvalidArgument, "differentiation index out of range");
  NashExpr out(nvars_, flag_);
  for (const auto& [exps, c] : terms_) {
    if (sgn(exps[i]) == 0) continue;
    std::vector<Rational> e = exps;
    Rational coeff = c * e[i];
    e[i] -= 1;
    auto [it, inserted] = out.terms_.try_emplace(std::move(e), coeff);
    if (!inserted) {
      it->second += coeff;
      if (sgn(it->second) == 0) out.terms_.erase(it);
    }
  }
  return out;
}

void NashExpr::check_compatible(const NashExpr& other) const {
  if (other.nvars_ != nvars_) raise(ErrorCode::ArityMismatch, "expressions have different nvars");
}

NashExpr NashExpr::operator-() const { return scaled(Rational(-1)); }

NashExpr& NashExpr::operator+=(const NashExpr& other) {
  check_compatible(other);
  flag_ = join(flag_, other.flag_);
  for (const auto& [exps, c] : other.terms_) {
    auto [it, inserted] = terms_.try_emplace(exps, c);
    if (!inserted) {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
  }
  return *this;
}

NashExpr& NashExpr::operator-=(const NashExpr& other) { return *this += -other; }

NashExpr& NashExpr::operator*=(const NashExpr& other) {
  check_compatible(other);
  NashExpr out(nvars_, join(flag_, other.flag_));
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : other.terms_) {
      std::vector<Rational> e(nvars_);
      for (std::size_t i = 0; i < nvars_; ++i) e[i] = ea[i] + eb[i];
      Rational c = ca * cb;
      auto [it, inserted] = out.terms_.try_emplace(std::move(e), c);
      if (!inserted) {
        it->second += c;
        if (sgn(it->second) == 0) out.terms_.erase(it);
      }
    }
  }
  *this = std::move(out);
  return *this;
}

NashExpr NashExpr::scaled(const Rational& factor) const {
  NashExpr out(nvars_, flag_);
  if (sgn(factor) == 0) return out;
  for (const auto& [exps, c] : terms_) out.terms_.emplace(exps, c * factor);
  return out;
}

NashExpr NashExpr::pow(unsigned k) const {
  NashExpr result = constant(nvars_, Rational(1), flag_);
  NashExpr base = *this;
  while (k) {
    if (k & 1U) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

bool NashExpr::operator==(const NashExpr& other) const {
  if (nvars_ != other.nvars_ || terms_.size() != other.terms_.size()) return false;
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  for (; a != terms_.end(); ++a, ++b) {
    if (ExpLess{}(a->first, b->first) || ExpLess{}(b->first, a->first)) return false;
    if (a->second != b->second) return false;
  }
  return true;
}

std::optional<Rational> NashExpr::ratio_to(const NashExpr& other) const {
  if (nvars_ != other.nvars_ || is_zero() || other.is_zero()) return std::nullopt;
  if (terms_.size() != other.terms_.size()) return std::nullopt;
  std::optional<Rational> ratio;
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  for (; a != terms_.end(); ++a, ++b) {
    if (ExpLess{}(a->first, b->first) || ExpLess{}(b->first, a->first)) return std::nullopt;
    Rational r = a->second / b->second;
    if (ratio && *ratio != r) return std::nullopt;
    ratio = r;
  }
  return ratio;
}

std::string NashExpr::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [exps, c] : terms_) {
    if (!first) os << (sgn(c) < 0 ? " - " : " + ");
    else if (sgn(c) < 0) os << "-";
    first = false;
    Rational mag = abs(c);
    bool any = false;
    std::ostringstream mono;
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (sgn(exps[i]) == 0) continue;
      if (any) mono << "*";
      any = true;
      mono << "x" << (i + 1);
      if (exps[i] != 1) {
        if (exps[i].get_den() == 1 && sgn(exps[i]) > 0) mono << "^" << exps[i].get_str();
        else mono << "^(" << exps[i].get_str() << ")";
      }
    }
    if (!any) os << mag.get_str();
    else if (mag == 1) os << mono.str();
    else os << mag.get_str() << "*" << mono.str();
  }
  return os.str();
}

NashExpr lie_derivative(std::span<const NashExpr> field, const NashExpr& g) {
  if (field.size() != g.nvars())
    raise(ErrorCode::ArityMismatch, "vector field length differs from nvars");
  NashExpr out(g.nvars(), g.domain());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i].nvars() != g.nvars())
      raise(ErrorCode::ArityMismatch, "vector field component has different nvars");
    NashExpr d = g.diff(i);
    if (d.is_zero() || field[i].is_zero()) continue;
    out += field[i] * d;
  }
  return out;
}

std::vector<NashExpr> gradient(const NashExpr& g) {
  std::vector<NashExpr> out;
  out.reserve(g.nvars());
  for (std::size_t i = 0; i < g.nvars(); ++i) out.push_back(g.diff(i));
  return out;
}

CompiledExpr::CompiledExpr(const NashExpr& e) {
  for (const auto& t : e.terms()) {
    CTerm ct{t.coeff.get_d(), {}};
    for (std::size_t i = 0; i < t.exps.size(); ++i) {
      const Rational& q = t.exps[i];
      if (sgn(q) == 0) continue;
      bool integral = q.get_den() == 1 && abs(q) <= 64;
      ct.factors.push_back(
          Factor{i, q.get_d(), integral ? static_cast<int>(q.get_num().get_si()) : 0, integral});
    }
    terms_.push_back(std::move(ct));
  }
}

namespace {
double ipow(double b, int e) {
  bool inv = e < 0;
  unsigned k = static_cast<unsigned>(inv ? -e : e);
  double r = 1.0;
  while (k) {
    if (k & 1U) r *= b;
    b *= b;
    k >>= 1;
  }
  return inv ? 1.0 / r : r;
}
}  // namespace

double CompiledExpr::operator()(const double* x) const noexcept {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (const auto& f : t.factors) {
      double b = x[f.var];
      if (f.integral) {
        v *= ipow(b, f.int_exponent);
      } else {
        if (!(b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        v *= std::pow(b, f.exponent);
      }
    }
    sum += v;
  }
  return sum;
}

}  // namespace nash
