#include "nash/system.hpp"

#include <cmath>

#include "nash/error.hpp"

namespace nash {

Box Box::unbounded(std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box{std::vector<double>(n, -inf), std::vector<double>(n, inf), std::vector<bool>(n, false)};
}

Box Box::positive_orthant(std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box{std::vector<double>(n, 0.0), std::vector<double>(n, inf), std::vector<bool>(n, true)};
}

bool Box::contains(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != lower.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    double v = x[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(v)) return false;
    if (!(v > lower[i]) || !(v < upper[i])) return false;
    if (positive[i] && !(v > 0.0)) return false;
  }
  return true;
}

namespace {

void check_expr(const NashExpr& e, std::size_t n, const Box& box, const std::string& what) {
  if (e.nvars() != n) raise(ErrorCode::ArityMismatch, what + " has nvars != n");
  auto need = e.positivity_requirements();
  for (std::size_t i = 0; i < n; ++i)
    if (need[i] && !box.positive[i])
      raise(ErrorCode::InvalidExpression,
            what + " needs x" + std::to_string(i + 1) + " > 0 but the domain allows x" +
                std::to_string(i + 1) + " <= 0");
}

}  // namespace

NashSystem::NashSystem(Box domain, InputAlphabet alphabet, std::vector<std::vector<NashExpr>> fields,
                       std::vector<NashExpr> readout, Vec x0)
    : n_(static_cast<std::size_t>(x0.size())),
      domain_(std::move(domain)),
      alphabet_(std::move(alphabet)),
      fields_(std::move(fields)),
      readout_(std::move(readout)),
      x0_(std::move(x0)) {
  if (n_ == 0) raise(ErrorCode::InvalidArgument, "state dimension must be positive");
  if (domain_.dim() != n_ || domain_.upper.size() != n_ || domain_.positive.size() != n_)
    raise(ErrorCode::ArityMismatch, "domain dimension differs from n");
  for (std::size_t i = 0; i < n_; ++i)
    if (!(domain_.lower[i] < domain_.upper[i]))
      raise(ErrorCode::InvalidArgument, "empty domain interval for x" + std::to_string(i + 1));
  if (alphabet_.size() == 0) raise(ErrorCode::InvalidArgument, "empty alphabet");
  if (fields_.size() != alphabet_.size())
    raise(ErrorCode::ArityMismatch, "one vector field per letter is required");
  if (readout_.empty()) raise(ErrorCode::InvalidArgument, "readout must have at least one component");
  for (std::size_t a = 0; a < fields_.size(); ++a) {
    if (fields_[a].size() != n_)
      raise(ErrorCode::ArityMismatch, "field '" + alphabet_.name(a) + "' must have n components");
    for (std::size_t i = 0; i < n_; ++i)
      check_expr(fields_[a][i], n_, domain_,
                 "field '" + alphabet_.name(a) + "' component " + std::to_string(i + 1));
  }
  for (std::size_t j = 0; j < readout_.size(); ++j)
    check_expr(readout_[j], n_, domain_, "readout component " + std::to_string(j + 1));
  if (!domain_.contains(x0_)) raise(ErrorCode::InvalidArgument, "x0 must lie strictly inside the domain");

  cfields_.resize(fields_.size());
  cjac_.resize(fields_.size());
  for (std::size_t a = 0; a < fields_.size(); ++a) {
    for (std::size_t i = 0; i < n_; ++i) {
      cfields_[a].emplace_back(fields_[a][i]);
      for (std::size_t j = 0; j < n_; ++j) cjac_[a].emplace_back(fields_[a][i].diff(j));
    }
  }
  for (const auto& h : readout_) {
    creadout_.emplace_back(h);
    for (std::size_t i = 0; i < n_; ++i) creadout_jac_.emplace_back(h.diff(i));
  }
}

bool NashSystem::field(std::size_t letter, const Vec& x, Vec& dx) const {
  if (!domain_.contains(x)) return false;
  const auto& f = cfields_.at(letter);
  dx.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    double v = f[i](x.data());
    if (!std::isfinite(v)) return false;
    dx[static_cast<Eigen::Index>(i)] = v;
  }
  return true;
}

bool NashSystem::field_jacobian(std::size_t letter, const Vec& x, Mat& jac) const {
  if (!domain_.contains(x)) return false;
  const auto& jf = cjac_.at(letter);
  const auto n = static_cast<Eigen::Index>(n_);
  jac.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = jf[static_cast<std::size_t>(i * n + j)](x.data());
      if (!std::isfinite(v)) return false;
      jac(i, j) = v;
    }
  return true;
}

Vec NashSystem::readout(const Vec& x) const {
  if (!domain_.contains(x)) raise(ErrorCode::DomainExit, "readout evaluated outside the domain");
  Vec y(static_cast<Eigen::Index>(readout_.size()));
  for (std::size_t j = 0; j < readout_.size(); ++j) y[static_cast<Eigen::Index>(j)] = creadout_[j](x.data());
  return y;
}

Mat NashSystem::readout_jacobian(const Vec& x) const {
  if (!domain_.contains(x)) raise(ErrorCode::DomainExit, "readout evaluated outside the domain");
  const auto r = static_cast<Eigen::Index>(readout_.size());
  const auto n = static_cast<Eigen::Index>(n_);
  Mat jac(r, n);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      jac(j, i) = creadout_jac_[static_cast<std::size_t>(j * n + i)](x.data());
  return jac;
}

NashSystem NashSystem::with_initial_state(Vec x0) const {
  return NashSystem(domain_, alphabet_, fields_, readout_, std::move(x0));
}

NashSystem NashSystem::with_readout(std::vector<NashExpr> readout) const {
  return NashSystem(domain_, alphabet_, fields_, std::move(readout), x0_);
}

double state_to_output(const NashSystem& sys, const NashExpr& g, const GeneralizedInput& u,
                       const FlowOptions& opts) {
  if (g.nvars() != sys.dim()) raise(ErrorCode::ArityMismatch, "g must have nvars = n");
  Trajectory traj = flow(sys, sys.x0(), u, opts);
  std::vector<double> x(traj.terminal.data(), traj.terminal.data() + traj.terminal.size());
  return g.eval(x);
}

}  // namespace nash
