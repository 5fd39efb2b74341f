#include <algorithm>
#include <cmath>
#include <limits>

#include "nash/analysis.hpp"

namespace nash {

namespace {

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

/// Words used as rank samples: the first cycles through the alphabet so that
/// a single sample already sees every letter.
std::vector<GeneralizedInput> rank_words(const InputAlphabet& alphabet, std::size_t k, double budget,
                                         std::size_t count, std::uint64_t seed) {
  auto words = sample_inputs(alphabet, k, budget, count, seed, true);
  if (!words.empty()) {
    GeneralizedInput rr;
    for (std::size_t i = 0; i < k; ++i) rr.append(i % alphabet.size(), words[0][i].duration);
    words[0] = rr;
  }
  return words;
}

struct WordStream {
  const InputAlphabet& alphabet;
  std::size_t k;
  double budget;
  std::uint64_t seed;
  std::vector<GeneralizedInput> pending;
  std::size_t drawn = 0;

  GeneralizedInput next() {
    if (drawn == 0 && pending.empty()) pending = rank_words(alphabet, k, budget, 1, seed);
    if (pending.empty()) pending = sample_inputs(alphabet, k, budget, 1, seed + 7919 * drawn, true);
    GeneralizedInput u = pending.back();
    pending.pop_back();
    ++drawn;
    return u;
  }
};

void degenerate_check(const TranscendenceReport& rep, bool any_nonconstant) {
  if (!any_nonconstant) return;
  for (const auto& s : rep.samples)
    if (s.rank > 0) return;
  raise(ErrorCode::DegenerateSamples, "every sample point gave rank 0 for non-constant generators");
}

Rational round_rational(double v) {
  Rational r(static_cast<long>(std::llround(v * 1024.0)), 1024);
  r.canonicalize();
  return r;
}

}  // namespace

TranscendenceReport estimate_trdeg(const std::vector<NashExpr>& generators, const PointSampler& sampler,
                                   const TrdegOptions& opts) {
  if (generators.empty()) raise(ErrorCode::InvalidArgument, "no generators");
  const std::size_t n = generators.front().nvars();
  for (const auto& g : generators)
    if (g.nvars() != n) raise(ErrorCode::ArityMismatch, "generators must share nvars");
  bool polynomial = true, any_nonconstant = false;
  for (const auto& g : generators) {
    polynomial = polynomial && g.is_polynomial();
    any_nonconstant = any_nonconstant || !g.is_constant();
  }
  std::vector<std::vector<NashExpr>> grads;
  for (const auto& g : generators) grads.push_back(gradient(g));

  std::mt19937_64 rng(opts.seed);
  const bool exact = polynomial && opts.arithmetic == RankArithmetic::Auto;
  TranscendenceReport rep;
  if (exact) {
    rep.method = "exact-jacobian";
    rep.rank_tolerance = 0.0;
    rep.gap_ratio = opts.rank.gap_ratio;
    rep.num_generators = generators.size();
    rep.ambient_dim = n;
    std::vector<std::vector<std::vector<Rational>>> mats;
    for (std::size_t s = 0; s < opts.samples; ++s) {
      auto p = sampler(rng);
      std::vector<Rational> q;
      for (double v : p) q.push_back(round_rational(v));
      std::vector<double> qd;
      for (const auto& v : q) qd.push_back(v.get_d());
      rep.sample_points.push_back(qd);
      std::vector<std::vector<Rational>> rows;
      for (const auto& gr : grads) {
        std::vector<Rational> row;
        for (const auto& c : gr) row.push_back(c.eval_exact(q));
        rows.push_back(std::move(row));
      }
      RankEvidence ev;
      ev.exact = true;
      ev.rank = exact_rank(rows);
      ev.gap = std::numeric_limits<double>::infinity();
      rep.samples.push_back(ev);
      mats.push_back(std::move(rows));
    }
    std::size_t best = 0;
    for (std::size_t s = 1; s < rep.samples.size(); ++s)
      if (rep.samples[s].rank > rep.samples[best].rank) best = s;
    rep.best_sample = best;
    rep.estimated_trdeg = rep.samples[best].rank;
    std::vector<std::vector<Rational>> chosen;
    for (std::size_t i = 0; i < mats[best].size() && rep.basis_indices.size() < rep.estimated_trdeg; ++i) {
      chosen.push_back(mats[best][i]);
      if (exact_rank(chosen) == chosen.size())
        rep.basis_indices.push_back(i);
      else
        chosen.pop_back();
    }
    degenerate_check(rep, any_nonconstant);
    return rep;
  }

  std::vector<std::vector<CompiledExpr>> cgrads;
  for (const auto& gr : grads) {
    std::vector<CompiledExpr> row;
    for (const auto& c : gr) row.emplace_back(c);
    cgrads.push_back(std::move(row));
  }
  std::vector<Mat> jacs;
  std::vector<std::vector<double>> points;
  std::size_t attempts = 0;
  while (jacs.size() < opts.samples) {
    if (++attempts > 20 * opts.samples + 20)
      raise(ErrorCode::DegenerateSamples, "sampler keeps producing points where generators are undefined");
    auto p = sampler(rng);
    Mat j(static_cast<Eigen::Index>(generators.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < cgrads.size(); ++r)
      for (std::size_t c = 0; c < n; ++c)
        j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cgrads[r][c](p.data());
    if (!j.allFinite()) continue;
    jacs.push_back(std::move(j));
    points.push_back(std::move(p));
  }
  rep = rank_report(jacs, opts.rank);
  rep.method = "float-jacobian";
  rep.sample_points = std::move(points);
  degenerate_check(rep, any_nonconstant);
  return rep;
}

TranscendenceReport estimate_reachable_trdeg(const ControlSystem& sys, const ReachOptions& opts,
                                             std::optional<Vec> start) {
  const Vec x0 = start ? *start : sys.initial_state();
  const std::size_t n = sys.dim();
  const std::size_t k = opts.letters ? opts.letters : 2 * n;
  WordStream words{sys.alphabet(), k, opts.budget, opts.seed, {}};
  std::vector<Mat> jacs;
  std::vector<std::vector<double>> points;
  std::size_t failures = 0;
  while (jacs.size() < opts.samples) {
    GeneralizedInput u = words.next();
    Mat j;
    Vec terminal;
    if (opts.mode == SensitivityMode::Variational) {
      Sensitivity s = flow_sensitivity(sys, x0, u, opts.flow);
      if (!s.success) {
        if (++failures > opts.retry_cap)
          raise(ErrorCode::DomainExit, "sampled words keep leaving the state space");
        continue;
      }
      j = s.d_durations;
      terminal = s.terminal;
    } else {
      Trajectory base = try_flow(sys, x0, u, opts.flow);
      bool ok = base.success;
      j.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < k && ok; ++i) {
        auto wp = u.word(), wm = u.word();
        wp[i].duration += opts.fd_step;
        wm[i].duration -= opts.fd_step;
        Trajectory tp = try_flow(sys, x0, GeneralizedInput(wp), opts.flow);
        Trajectory tm = try_flow(sys, x0, GeneralizedInput(wm), opts.flow);
        ok = tp.success && tm.success;
        if (ok) j.col(static_cast<Eigen::Index>(i)) = (tp.terminal - tm.terminal) / (2 * opts.fd_step);
      }
      if (!ok) {
        if (++failures > opts.retry_cap)
          raise(ErrorCode::DomainExit, "sampled words keep leaving the state space");
        continue;
      }
      terminal = base.terminal;
    }
    jacs.push_back(std::move(j));
    points.push_back(to_std(terminal));
  }
  auto rep = rank_report(jacs, opts.rank);
  rep.method = opts.mode == SensitivityMode::Variational ? "variational-sensitivity" : "finite-difference";
  rep.sample_points = std::move(points);
  if (failures) rep.notes.push_back(std::to_string(failures) + " sampled words resampled after leaving the domain");
  return rep;
}

namespace {

/// Letter words of length <= depth, shortest first.
std::vector<std::vector<std::size_t>> all_words(std::size_t letters, std::size_t depth) {
  std::vector<std::vector<std::size_t>> out{{}};
  std::vector<std::vector<std::size_t>> level{{}};
  for (std::size_t d = 1; d <= depth; ++d) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& w : level)
      for (std::size_t a = 0; a < letters; ++a) {
        auto v = w;
        v.push_back(a);
        next.push_back(v);
      }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return out;
}

using RespondFn = std::function<Vec(const GeneralizedInput&)>;

/// Stencil value of D_{w_L} ... D_{w_1} p at u. Forward stencils use suffix
/// durations {0, h, 2h} (table grids); central stencils use {-h, h}.
Vec stencil(const RespondFn& p, const GeneralizedInput& u, const std::vector<std::size_t>& w, double h,
            bool forward, std::size_t r) {
  const std::size_t L = w.size();
  if (L == 0) return p(u);
  const std::size_t base = forward ? 3 : 2;
  std::size_t total = 1;
  for (std::size_t i = 0; i < L; ++i) total *= base;
  Vec acc = Vec::Zero(static_cast<Eigen::Index>(r));
  const double fw[3] = {-1.5, 2.0, -0.5};
  for (std::size_t idx = 0; idx < total; ++idx) {
    GeneralizedInput v = u;
    double weight = 1.0;
    std::size_t rem = idx;
    for (std::size_t i = 0; i < L; ++i) {
      std::size_t c = rem % base;
      rem /= base;
      if (forward) {
        v.append(w[i], h * static_cast<double>(c));
        weight *= fw[c] / h;
      } else {
        double s = c == 0 ? -1.0 : 1.0;
        v.append(w[i], s * h);
        weight *= s / (2 * h);
      }
    }
    acc += weight * p(v);
  }
  return acc;
}

struct FdRows {
  Mat jac;
  double error = 0.0;  // Frobenius norm of the Richardson difference
};

/// Jacobian of all stencil generators with respect to the prefix durations,
/// by central differences at steps s and 2s combined by Richardson.
FdRows fd_jacobian(const RespondFn& p, const GeneralizedInput& u, const std::vector<std::vector<std::size_t>>& words,
                   double hd, bool forward, double s, std::size_t r) {
  const auto rows = static_cast<Eigen::Index>(words.size() * r);
  const auto k = static_cast<Eigen::Index>(u.size());
  auto values = [&](const GeneralizedInput& prefix) {
    Vec out(rows);
    for (std::size_t g = 0; g < words.size(); ++g)
      out.segment(static_cast<Eigen::Index>(g * r), static_cast<Eigen::Index>(r)) =
          stencil(p, prefix, words[g], hd, forward, r);
    return out;
  };
  Mat j1(rows, k), j2(rows, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    auto shifted = [&](double d) {
      auto w = u.word();
      w[static_cast<std::size_t>(i)].duration += d;
      return GeneralizedInput(w);
    };
    j1.col(i) = (values(shifted(s)) - values(shifted(-s))) / (2 * s);
    j2.col(i) = (values(shifted(2 * s)) - values(shifted(-2 * s))) / (4 * s);
  }
  FdRows out;
  out.jac = (4.0 * j1 - j2) / 3.0;
  out.error = (j1 - j2).norm();
  return out;
}

TranscendenceReport finalize_fd(std::vector<Mat>& jacs, std::vector<double>& errors, const RankOptions& base) {
  // The cut is widened to the Richardson error so truncation terms cannot pose
  // as extra rank.
  double worst = 0.0;
  double smax = 0.0;
  for (std::size_t s = 0; s < jacs.size(); ++s) {
    Eigen::JacobiSVD<Mat> svd(jacs[s]);
    if (svd.singularValues().size()) smax = std::max(smax, svd.singularValues()[0]);
    worst = std::max(worst, errors[s]);
  }
  RankOptions opts = base;
  if (smax > 0.0) opts.rank_tol = std::max(base.rank_tol, 10.0 * worst / smax);
  // Rows in these Jacobians are not normalized away from noise, so zero out
  // rows that are pure noise.
  for (auto& j : jacs)
    for (Eigen::Index i = 0; i < j.rows(); ++i)
      if (j.row(i).norm() <= 10.0 * worst) j.row(i).setZero();
  auto rep = rank_report(jacs, opts);
  if (opts.rank_tol > base.rank_tol) {
    rep.notes.push_back("rank cut widened to the finite-difference error estimate");
    rep.samples[rep.best_sample].confident = rep.samples[rep.best_sample].gap >= base.gap_ratio;
    rep.low_confidence = !rep.samples[rep.best_sample].confident;
  }
  return rep;
}

}  // namespace

TranscendenceReport estimate_response_trdeg(const ResponseOracle& oracle, const ResponseOptions& opts) {
  const auto& alphabet = oracle.alphabet();
  const std::size_t r = oracle.num_outputs();
  const NashSystem* nash = oracle.is_system() ? dynamic_cast<const NashSystem*>(oracle.system()) : nullptr;
  bool symbolic = nash && opts.route != DerivativeRoute::FiniteDifference;
  if (opts.route == DerivativeRoute::Exact && !nash)
    raise(ErrorCode::InvalidArgument, "exact derivatives need a symbolic system oracle");

  if (symbolic) {
    const std::size_t n = nash->dim();
    const std::size_t depth = opts.depth ? opts.depth : n;
    const std::size_t k = opts.letters ? opts.letters : 2 * n;
    auto basis = generate_obs_algebra(*nash, depth);
    std::vector<std::vector<CompiledExpr>> grads;
    for (const auto& g : basis.generators) {
      std::vector<CompiledExpr> row;
      for (std::size_t i = 0; i < n; ++i) row.emplace_back(g.expr.diff(i));
      grads.push_back(std::move(row));
    }
    WordStream words{alphabet, k, opts.budget, opts.seed, {}};
    std::vector<Mat> jacs;
    std::vector<std::vector<double>> points;
    std::size_t failures = 0;
    while (jacs.size() < opts.samples) {
      GeneralizedInput u = words.next();
      Sensitivity s = flow_sensitivity(*nash, oracle.start_state(), u, oracle.flow_options());
      Mat grad(static_cast<Eigen::Index>(grads.size()), static_cast<Eigen::Index>(n));
      bool ok = s.success;
      for (std::size_t g = 0; ok && g < grads.size(); ++g)
        for (std::size_t i = 0; i < n; ++i)
          grad(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i)) = grads[g][i](s.terminal.data());
      if (!ok || !grad.allFinite()) {
        if (++failures > opts.retry_cap) raise(ErrorCode::DomainExit, "sampled words keep leaving the state space");
        continue;
      }
      jacs.push_back(grad * s.d_durations);
      points.push_back(to_std(s.terminal));
    }
    bool any_nonconstant = false;
    for (const auto& g : basis.generators) any_nonconstant = any_nonconstant || !g.expr.is_constant();
    auto rep = rank_report(jacs, opts.rank);
    rep.method = "lie-variational";
    rep.sample_points = std::move(points);
    if (!any_nonconstant) rep.notes.push_back("response map is constant");
    return rep;
  }

  auto words = all_words(alphabet.size(), 0);
  std::vector<Mat> jacs;
  std::vector<double> errors;
  std::vector<std::vector<double>> points;
  TranscendenceReport rep;
  if (oracle.is_system()) {
    const ControlSystem& sys = *oracle.system();
    const std::size_t n = sys.dim();
    const std::size_t depth = opts.depth ? opts.depth : n;
    const std::size_t k = opts.letters ? opts.letters : 2 * n;
    words = all_words(alphabet.size(), depth);
    FlowOptions tight = oracle.flow_options();
    tight.tol = std::min(tight.tol, 1e-13);
    const Vec x0 = oracle.start_state();
    RespondFn p = [&](const GeneralizedInput& v) { return sys.readout(flow(sys, x0, v, tight).terminal); };
    WordStream stream{alphabet, k, opts.budget, opts.seed, {}};
    std::size_t failures = 0;
    while (jacs.size() < opts.samples) {
      GeneralizedInput u = stream.next();
      try {
        auto fd = fd_jacobian(p, u, words, opts.fd_step, false, opts.fd_step, r);
        jacs.push_back(fd.jac);
        errors.push_back(fd.error);
        std::vector<double> t;
        for (const auto& seg : u.word()) t.push_back(seg.duration);
        points.push_back(t);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DomainExit && e.code() != ErrorCode::BlowUp) throw;
        if (++failures > opts.retry_cap) throw;
      }
    }
  } else {
    const ResponseTable& table = *oracle.table();
    const std::size_t cap = table.max_letters() - std::min(table.max_letters(), oracle.prefix().size());
    const std::size_t depth = opts.depth ? opts.depth : (cap >= 2 ? 1 : 0);
    const std::size_t k = opts.letters ? opts.letters : (cap > depth ? cap - depth : 0);
    if (k == 0 || k + depth > cap)
      raise(ErrorCode::OffGrid, "table holds words of at most " + std::to_string(cap) +
                                    " letters after the prefix; need " + std::to_string(k + depth));
    if (table.points() < 4)
      raise(ErrorCode::OffGrid, "table grid needs at least 4 steps for the difference stencils");
    words = all_words(alphabet.size(), depth);
    const double s = table.step();
    RespondFn p = [&](const GeneralizedInput& v) { return oracle.respond(v); };
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> node(2, table.points() - 2);
    std::uniform_int_distribution<std::size_t> letter(0, alphabet.size() - 1);
    for (std::size_t smp = 0; smp < opts.samples; ++smp) {
      GeneralizedInput u;
      for (std::size_t i = 0; i < k; ++i)
        u.append(smp == 0 ? i % alphabet.size() : letter(rng), s * static_cast<double>(node(rng)));
      auto fd = fd_jacobian(p, u, words, s, true, s, r);
      jacs.push_back(fd.jac);
      errors.push_back(fd.error);
      std::vector<double> t;
      for (const auto& seg : u.word()) t.push_back(seg.duration);
      points.push_back(t);
    }
  }
  rep = finalize_fd(jacs, errors, opts.rank);
  rep.method = "finite-difference";
  rep.sample_points = std::move(points);
  return rep;
}

TranscendenceReport estimate_observability_rank(const ControlSystem& sys, const ObservabilityOptions& opts) {
  const std::size_t n = sys.dim();
  const std::size_t depth = opts.depth ? opts.depth : n;
  const std::size_t probes = opts.probes ? opts.probes : 4 * n;
  auto probe_words = sample_inputs(sys.alphabet(), depth, opts.budget, probes, opts.seed ^ 0x9e3779b97f4a7c15ULL);
  probe_words.insert(probe_words.begin(), GeneralizedInput{});
  auto starts = sample_inputs(sys.alphabet(), std::max<std::size_t>(1, n), opts.budget, 20 * opts.samples + 20,
                              opts.seed);
  std::vector<Mat> jacs;
  std::vector<std::vector<double>> points;
  for (const auto& w : starts) {
    if (jacs.size() >= opts.samples) break;
    Vec x = jacs.empty() ? sys.initial_state() : Vec();
    if (!jacs.empty()) {
      Trajectory t = try_flow(sys, sys.initial_state(), w, opts.flow);
      if (!t.success) continue;
      x = t.terminal;
    }
    std::vector<Mat> blocks;
    for (const auto& v : probe_words) {
      Sensitivity s = flow_sensitivity(sys, x, v, opts.flow);
      if (!s.success) continue;
      Mat hj;
      try {
        hj = sys.readout_jacobian(s.terminal);
      } catch (const Error&) {
        continue;
      }
      blocks.push_back(hj * s.d_initial);
    }
    Eigen::Index rows = 0;
    for (const auto& b : blocks) rows += b.rows();
    if (rows == 0) continue;
    Mat j(rows, static_cast<Eigen::Index>(n));
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
      j.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    jacs.push_back(std::move(j));
    points.push_back(to_std(x));
  }
  if (jacs.empty()) raise(ErrorCode::DegenerateSamples, "no reachable sample point admitted the probe words");
  auto rep = rank_report(jacs, opts.rank);
  rep.method = "flow-observability";
  rep.sample_points = std::move(points);
  return rep;
}

TranscendenceReport estimate_obs_trdeg(const NashSystem& sys, std::size_t depth, const TrdegOptions& opts,
                                       double spread) {
  auto basis = generate_obs_algebra(sys, depth);
  auto sampler = box_sampler(sys.domain(), to_std(sys.x0()), spread);
  return estimate_trdeg(basis.exprs(), sampler, opts);
}

}  // namespace nash
