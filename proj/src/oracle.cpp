#include <cmath>

#include "nash/error.hpp"
#include "nash/system.hpp"

namespace nash {

ResponseTable::ResponseTable(InputAlphabet alphabet, std::size_t outputs, double step,
                             std::size_t points)
    : alphabet_(std::move(alphabet)), outputs_(outputs), step_(step), points_(points) {
  if (!(step > 0.0)) raise(ErrorCode::InvalidArgument, "table step must be positive");
  if (outputs == 0) raise(ErrorCode::InvalidArgument, "table needs at least one output");
}

std::size_t ResponseTable::max_letters() const noexcept {
  std::size_t m = 0;
  for (const auto& [letters, values] : words_) m = std::max(m, letters.size());
  return m;
}

void ResponseTable::set_word(std::vector<std::size_t> letters, std::vector<Vec> values) {
  std::size_t expected = 1;
  for (std::size_t i = 0; i < letters.size(); ++i) expected *= points_ + 1;
  for (auto a : letters)
    if (a >= alphabet_.size()) raise(ErrorCode::AlphabetMismatch, "table letter outside alphabet");
  if (values.size() != expected)
    raise(ErrorCode::InvalidArgument, "table grid must be rectangular: expected " +
                                          std::to_string(expected) + " entries");
  for (const auto& v : values)
    if (static_cast<std::size_t>(v.size()) != outputs_)
      raise(ErrorCode::InvalidArgument, "table entry has wrong output dimension");
  words_[std::move(letters)] = std::move(values);
}

Vec ResponseTable::lookup(const GeneralizedInput& u) const {
  std::vector<std::size_t> letters;
  letters.reserve(u.size());
  for (const auto& s : u.word()) letters.push_back(s.letter);
  auto it = words_.find(letters);
  if (it == words_.end()) raise(ErrorCode::OffGrid, "table has no entry for this letter word");
  const std::size_t k = letters.size();
  const double tmax = step_ * static_cast<double>(points_);
  std::vector<std::size_t> base(k);
  std::vector<double> weight(k);
  for (std::size_t i = 0; i < k; ++i) {
    double t = u[i].duration;
    if (t < -1e-12 * step_ || t > tmax + 1e-12 * step_)
      raise(ErrorCode::OffGrid, "duration outside the tabulated grid");
    double s = std::clamp(t / step_, 0.0, static_cast<double>(points_));
    if (points_ == 0) {
      base[i] = 0;
      weight[i] = 0.0;
      continue;
    }
    double fl = std::floor(s);
    std::size_t i0 = std::min(static_cast<std::size_t>(fl), points_ - 1);
    base[i] = i0;
    weight[i] = s - static_cast<double>(i0);
  }
  Vec out = Vec::Zero(static_cast<Eigen::Index>(outputs_));
  const auto& vals = it->second;
  for (std::size_t corner = 0; corner < (std::size_t{1} << k); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < k; ++i) {
      bool up = (corner >> (k - 1 - i)) & 1U;
      double wi = up ? weight[i] : 1.0 - weight[i];
      w *= wi;
      flat = flat * (points_ + 1) + base[i] + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    out += w * vals.at(flat);
  }
  return out;
}

ResponseTable tabulate(const ControlSystem& sys, std::size_t max_letters, double step,
                       std::size_t points, const FlowOptions& opts) {
  ResponseTable table(sys.alphabet(), sys.num_outputs(), step, points);
  const std::size_t a = sys.alphabet().size();
  const Vec x0 = sys.initial_state();
  for (std::size_t k = 0; k <= max_letters; ++k) {
    std::size_t nwords = 1, ngrid = 1;
    for (std::size_t i = 0; i < k; ++i) {
      nwords *= a;
      ngrid *= points + 1;
    }
    for (std::size_t w = 0; w < nwords; ++w) {
      std::vector<std::size_t> letters(k);
      std::size_t rem = w;
      for (std::size_t i = k; i-- > 0;) {
        letters[i] = rem % a;
        rem /= a;
      }
      std::vector<Vec> values;
      values.reserve(ngrid);
      for (std::size_t g = 0; g < ngrid; ++g) {
        GeneralizedInput u;
        std::size_t r = g;
        std::vector<std::size_t> idx(k);
        for (std::size_t i = k; i-- > 0;) {
          idx[i] = r % (points + 1);
          r /= points + 1;
        }
        for (std::size_t i = 0; i < k; ++i) u.append(letters[i], step * static_cast<double>(idx[i]));
        values.push_back(sys.readout(flow(sys, x0, u, opts).terminal));
      }
      table.set_word(std::move(letters), std::move(values));
    }
  }
  return table;
}

ResponseOracle ResponseOracle::from_system(std::shared_ptr<const ControlSystem> sys,
                                           const FlowOptions& opts) {
  if (!sys) raise(ErrorCode::InvalidArgument, "null system");
  ResponseOracle o;
  o.start_ = sys->initial_state();
  o.system_ = std::move(sys);
  o.opts_ = opts;
  return o;
}

ResponseOracle ResponseOracle::from_table(std::shared_ptr<const ResponseTable> table) {
  if (!table) raise(ErrorCode::InvalidArgument, "null table");
  ResponseOracle o;
  o.table_ = std::move(table);
  return o;
}

const InputAlphabet& ResponseOracle::alphabet() const {
  return system_ ? system_->alphabet() : table_->alphabet();
}

std::size_t ResponseOracle::num_outputs() const {
  return system_ ? system_->num_outputs() : table_->num_outputs();
}

Vec ResponseOracle::respond(const GeneralizedInput& u) const {
  if (system_) {
    Trajectory traj = flow(*system_, start_, u, opts_);
    return system_->readout(traj.terminal);
  }
  if (!u.is_pwc()) raise(ErrorCode::OffGrid, "table oracles only accept nonnegative durations");
  return table_->lookup(concat(prefix_, u));
}

ResponseOracle ResponseOracle::shifted(const GeneralizedInput& u) const {
  ResponseOracle o = *this;
  if (system_) {
    o.start_ = flow(*system_, start_, u, opts_).terminal;
  } else {
    if (!u.is_pwc()) raise(ErrorCode::OffGrid, "table oracles only accept nonnegative durations");
    o.prefix_ = concat(prefix_, u);
    (void)table_->lookup(o.prefix_);
  }
  return o;
}

}  // namespace nash
