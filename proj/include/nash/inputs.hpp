#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nash {

/// Finite set U of input values, each a named vector in R^m.
class InputAlphabet {
 public:
  InputAlphabet() = default;
  InputAlphabet(std::vector<std::string> names, std::vector<std::vector<double>> values);

  std::size_t size() const noexcept { return names_.size(); }
  std::size_t value_dim() const noexcept { return values_.empty() ? 0 : values_.front().size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<double>& value(std::size_t i) const { return values_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  /// Throws AlphabetMismatch for unknown names.
  std::size_t index_of(const std::string& name) const;

  bool operator==(const InputAlphabet&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
};

struct Segment {
  std::size_t letter;
  double duration;

  bool operator==(const Segment&) const = default;
};

/// Word (a1,t1)...(ak,tk) over an alphabet. Durations may be negative
/// (backward flow); a word with nonnegative durations is an ordinary
/// piecewise-constant input. Adjacent equal letters are never merged.
class GeneralizedInput {
 public:
  GeneralizedInput() = default;
  explicit GeneralizedInput(std::vector<Segment> word) : word_(std::move(word)) {}

  const std::vector<Segment>& word() const noexcept { return word_; }
  std::size_t size() const noexcept { return word_.size(); }
  bool empty() const noexcept { return word_.empty(); }
  const Segment& operator[](std::size_t i) const { return word_[i]; }

  double total_time() const noexcept;
  /// All durations are nonnegative.
  bool is_pwc() const noexcept;

  GeneralizedInput& append(std::size_t letter, double duration) {
    word_.push_back({letter, duration});
    return *this;
  }

  bool operator==(const GeneralizedInput&) const = default;

 private:
  std::vector<Segment> word_;
};

GeneralizedInput concat(const GeneralizedInput& u, const GeneralizedInput& v);
/// Alphabet-checked concatenation: every letter index must lie in `alphabet`.
GeneralizedInput concat(const InputAlphabet& alphabet, const GeneralizedInput& u,
                        const GeneralizedInput& v);
/// (a_k,-t_k)...(a_1,-t_1); u followed by reverse(u) flows back to the start.
GeneralizedInput reverse(const GeneralizedInput& u);

void check_word(const InputAlphabet& alphabet, const GeneralizedInput& u);

/// N i.i.d. words, each with a uniformly drawn number of letters in [1, k]
/// (exactly k if `exact_length`), uniform letters and durations uniform in
/// (0, budget/k]. Deterministic in `seed`.
std::vector<GeneralizedInput> sample_inputs(const InputAlphabet& alphabet, std::size_t max_letters,
                                            double time_budget, std::size_t count,
                                            std::uint64_t seed, bool exact_length = false);

}  // namespace nash
