#include <cmath>

#include "nash/error.hpp"
#include "nash/reduction.hpp"

namespace nash {

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::ReachReduced:
      return "REACH_REDUCED";
    case Provenance::ObsReduced:
      return "OBS_REDUCED";
    case Provenance::Minimized:
      return "MINIMIZED";
  }
  return "UNKNOWN";
}

LocalRealization LocalRealization::chart(std::shared_ptr<const NashSystem> base, std::vector<std::size_t> basis,
                                         std::vector<std::optional<ImplicitMap>> lifts, Vec x0,
                                         GeneralizedInput shift) {
  if (!base) raise(ErrorCode::InvalidArgument, "chart needs a parent system");
  const std::size_t n = base->dim(), d = basis.size();
  if (lifts.size() != n) raise(ErrorCode::ArityMismatch, "one lift entry per parent coordinate is required");
  if (static_cast<std::size_t>(x0.size()) != d) raise(ErrorCode::ArityMismatch, "x0 must have one entry per basis coordinate");
  std::vector<bool> in_basis(n, false);
  for (auto b : basis) {
    if (b >= n || in_basis[b]) raise(ErrorCode::InvalidArgument, "basis indices must be distinct coordinates");
    in_basis[b] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (in_basis[i] && lifts[i]) raise(ErrorCode::InvalidArgument, "basis coordinates are lifted by projection");
    if (!in_basis[i] && !lifts[i]) raise(ErrorCode::InvalidArgument, "non-basis coordinate lacks an implicit map");
    if (lifts[i] && lifts[i]->dim() != d) raise(ErrorCode::ArityMismatch, "implicit map has wrong dimension");
  }
  LocalRealization r;
  r.kind_ = Kind::Chart;
  r.provenance_ = Provenance::ReachReduced;
  r.alphabet_ = base->alphabet();
  r.base_ = std::move(base);
  r.basis_ = std::move(basis);
  r.lifts_ = std::move(lifts);
  r.x0_ = std::move(x0);
  r.shift_ = std::move(shift);
  return r;
}

LocalRealization LocalRealization::observed(InputAlphabet alphabet, std::vector<std::vector<ImplicitMap>> fields,
                                            std::vector<ImplicitMap> readout, Vec x0, GeneralizedInput shift) {
  const auto d = static_cast<std::size_t>(x0.size());
  if (fields.size() != alphabet.size()) raise(ErrorCode::ArityMismatch, "one field per letter is required");
  for (const auto& f : fields) {
    if (f.size() != d) raise(ErrorCode::ArityMismatch, "field must have d components");
    for (const auto& m : f)
      if (m.dim() != d) raise(ErrorCode::ArityMismatch, "implicit map has wrong dimension");
  }
  if (readout.empty()) raise(ErrorCode::InvalidArgument, "readout must have at least one component");
  for (const auto& m : readout)
    if (m.dim() != d) raise(ErrorCode::ArityMismatch, "implicit map has wrong dimension");
  LocalRealization r;
  r.kind_ = Kind::Observed;
  r.provenance_ = Provenance::ObsReduced;
  r.alphabet_ = std::move(alphabet);
  r.fields_ = std::move(fields);
  r.readout_ = std::move(readout);
  r.x0_ = std::move(x0);
  r.shift_ = std::move(shift);
  return r;
}

std::size_t LocalRealization::num_outputs() const {
  return kind_ == Kind::Chart ? base_->num_outputs() : readout_.size();
}

bool LocalRealization::eval_map(const ImplicitMap& m, const Vec& z, double& q) const {
  std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
  if (!m.within(zs)) return false;
  try {
    q = m.solve(zs);
  } catch (const Error&) {
    return false;
  }
  return std::isfinite(q);
}

bool LocalRealization::lift(const Vec& z, Vec& x, Mat* jac) const {
  if (kind_ != Kind::Chart) raise(ErrorCode::InvalidArgument, "only chart realizations have a lift");
  if (static_cast<std::size_t>(z.size()) != dim() || !z.allFinite()) return false;
  const std::size_t n = base_->dim(), d = dim();
  x.resize(static_cast<Eigen::Index>(n));
  if (jac) jac->setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    x[static_cast<Eigen::Index>(basis_[j])] = z[static_cast<Eigen::Index>(j)];
    if (jac) (*jac)(static_cast<Eigen::Index>(basis_[j]), static_cast<Eigen::Index>(j)) = 1.0;
  }
  std::vector<double> g(d);
  for (std::size_t i = 0; i < n; ++i) {
    if (!lifts_[i]) continue;
    double q = 0.0;
    if (!eval_map(*lifts_[i], z, q)) return false;
    x[static_cast<Eigen::Index>(i)] = q;
    if (jac) {
      lifts_[i]->gradient(std::span<const double>(z.data(), d), q, g);
      for (std::size_t j = 0; j < d; ++j) (*jac)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[j];
    }
  }
  return true;
}

bool LocalRealization::inside(const Vec& z) const {
  if (static_cast<std::size_t>(z.size()) != dim() || !z.allFinite()) return false;
  if (kind_ == Kind::Chart) {
    Vec x;
    return lift(z, x) && base_->inside(x);
  }
  std::span<const double> zs(z.data(), dim());
  for (const auto& f : fields_)
    for (const auto& m : f)
      if (!m.within(zs)) return false;
  for (const auto& m : readout_)
    if (!m.within(zs)) return false;
  return true;
}

bool LocalRealization::field(std::size_t letter, const Vec& z, Vec& dz) const {
  const std::size_t d = dim();
  dz.resize(static_cast<Eigen::Index>(d));
  if (kind_ == Kind::Chart) {
    Vec x, fx;
    if (!lift(z, x) || !base_->field(letter, x, fx)) return false;
    for (std::size_t j = 0; j < d; ++j) dz[static_cast<Eigen::Index>(j)] = fx[static_cast<Eigen::Index>(basis_[j])];
    return true;
  }
  if (!inside(z)) return false;
  for (std::size_t i = 0; i < d; ++i) {
    double q = 0.0;
    if (!eval_map(fields_.at(letter)[i], z, q)) return false;
    dz[static_cast<Eigen::Index>(i)] = q;
  }
  return true;
}

bool LocalRealization::field_jacobian(std::size_t letter, const Vec& z, Mat& jac) const {
  const std::size_t d = dim();
  if (kind_ == Kind::Chart) {
    Vec x;
    Mat dg, df;
    if (!lift(z, x, &dg) || !base_->field_jacobian(letter, x, df)) return false;
    Mat full = df * dg;
    jac.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) jac.row(static_cast<Eigen::Index>(j)) = full.row(static_cast<Eigen::Index>(basis_[j]));
    return true;
  }
  jac.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::vector<double> g(d);
  for (std::size_t i = 0; i < d; ++i) {
    double q = 0.0;
    const auto& m = fields_.at(letter)[i];
    if (!eval_map(m, z, q)) return false;
    m.gradient(std::span<const double>(z.data(), d), q, g);
    for (std::size_t j = 0; j < d; ++j) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[j];
  }
  return true;
}

Vec LocalRealization::readout(const Vec& z) const {
  if (kind_ == Kind::Chart) {
    Vec x;
    if (!lift(z, x)) raise(ErrorCode::DomainExit, "readout evaluated outside the chart");
    return base_->readout(x);
  }
  if (!inside(z)) raise(ErrorCode::DomainExit, "readout evaluated outside the validity region");
  Vec y(static_cast<Eigen::Index>(readout_.size()));
  for (std::size_t j = 0; j < readout_.size(); ++j) {
    double q = 0.0;
    if (!eval_map(readout_[j], z, q)) raise(ErrorCode::DomainExit, "readout implicit map failed");
    y[static_cast<Eigen::Index>(j)] = q;
  }
  return y;
}

Mat LocalRealization::readout_jacobian(const Vec& z) const {
  const std::size_t d = dim();
  if (kind_ == Kind::Chart) {
    Vec x;
    Mat dg;
    if (!lift(z, x, &dg)) raise(ErrorCode::DomainExit, "readout evaluated outside the chart");
    return base_->readout_jacobian(x) * dg;
  }
  Mat jac(static_cast<Eigen::Index>(readout_.size()), static_cast<Eigen::Index>(d));
  std::vector<double> g(d);
  for (std::size_t j = 0; j < readout_.size(); ++j) {
    double q = 0.0;
    if (!eval_map(readout_[j], z, q)) raise(ErrorCode::DomainExit, "readout implicit map failed");
    readout_[j].gradient(std::span<const double>(z.data(), d), q, g);
    for (std::size_t i = 0; i < d; ++i) jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g[i];
  }
  return jac;
}

}  // namespace nash
