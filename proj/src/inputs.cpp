#include "nash/inputs.hpp"

#include <random>
#include <set>

#include "nash/error.hpp"

namespace nash {

InputAlphabet::InputAlphabet(std::vector<std::string> names, std::vector<std::vector<double>> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.empty()) raise(ErrorCode::InvalidArgument, "input alphabet must be nonempty");
  if (names_.size() != values_.size())
    raise(ErrorCode::InvalidArgument, "alphabet names and values differ in length");
  std::set<std::string> seen_names;
  std::set<std::vector<double>> seen_values;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (values_[i].size() != values_.front().size() || values_[i].empty())
      raise(ErrorCode::InvalidArgument, "input values must share a positive dimension");
    if (!seen_names.insert(names_[i]).second)
      raise(ErrorCode::InvalidArgument, "duplicate letter name '" + names_[i] + "'");
    if (!seen_values.insert(values_[i]).second)
      raise(ErrorCode::InvalidArgument, "letters must be pairwise distinct");
  }
}

std::size_t InputAlphabet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  raise(ErrorCode::AlphabetMismatch, "unknown letter '" + name + "'");
}

double GeneralizedInput::total_time() const noexcept {
  double t = 0.0;
  for (const auto& s : word_) t += s.duration;
  return t;
}

bool GeneralizedInput::is_pwc() const noexcept {
  for (const auto& s : word_)
    if (s.duration < 0.0) return false;
  return true;
}

GeneralizedInput concat(const GeneralizedInput& u, const GeneralizedInput& v) {
  std::vector<Segment> w = u.word();
  w.insert(w.end(), v.word().begin(), v.word().end());
  return GeneralizedInput(std::move(w));
}

GeneralizedInput concat(const InputAlphabet& alphabet, const GeneralizedInput& u,
                        const GeneralizedInput& v) {
  check_word(alphabet, u);
  check_word(alphabet, v);
  return concat(u, v);
}

GeneralizedInput reverse(const GeneralizedInput& u) {
  std::vector<Segment> w;
  w.reserve(u.size());
  for (auto it = u.word().rbegin(); it != u.word().rend(); ++it)
    w.push_back({it->letter, -it->duration});
  return GeneralizedInput(std::move(w));
}

void check_word(const InputAlphabet& alphabet, const GeneralizedInput& u) {
  for (const auto& s : u.word())
    if (s.letter >= alphabet.size())
      raise(ErrorCode::AlphabetMismatch, "letter index " + std::to_string(s.letter) +
                                             " outside alphabet of size " +
                                             std::to_string(alphabet.size()));
}

std::vector<GeneralizedInput> sample_inputs(const InputAlphabet& alphabet, std::size_t max_letters,
                                            double time_budget, std::size_t count,
                                            std::uint64_t seed, bool exact_length) {
  if (!(time_budget > 0.0)) raise(ErrorCode::InvalidArgument, "time budget must be positive");
  if (max_letters == 0) raise(ErrorCode::InvalidArgument, "max_letters must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(1, max_letters);
  std::uniform_int_distribution<std::size_t> letter(0, alphabet.size() - 1);
  const double cap = time_budget / static_cast<double>(max_letters);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<GeneralizedInput> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t k = exact_length ? max_letters : length(rng);
    GeneralizedInput u;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t a = letter(rng);
      // unit() is in [0,1), so 1 - unit() lands in (0,1].
      double t = cap * (1.0 - unit(rng));
      u.append(a, t);
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace nash
