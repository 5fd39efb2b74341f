#include "nash/analysis.hpp"

namespace nash {

std::vector<NashExpr> ObsAlgebraBasis::exprs() const {
  std::vector<NashExpr> out;
  out.reserve(generators.size());
  for (const auto& g : generators) out.push_back(g.expr);
  return out;
}

ObsAlgebraBasis generate_obs_algebra(const NashSystem& sys, std::size_t depth, std::size_t term_cap) {
  ObsAlgebraBasis basis;
  basis.depth = depth;
  std::vector<std::size_t> frontier;
  for (std::size_t j = 0; j < sys.num_outputs(); ++j) {
    basis.generators.push_back({sys.readout_exprs()[j], j, {}});
    frontier.push_back(j);
  }
  for (std::size_t level = 1; level <= depth && !frontier.empty(); ++level) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      for (std::size_t a = 0; a < sys.alphabet().size(); ++a) {
        const ObsGenerator parent = basis.generators[idx];
        NashExpr d = lie_derivative(sys.field_exprs(a), parent.expr);
        if (d.num_terms() > term_cap)
          throw ExpressionBlowupError("Lie derivative exceeds " + std::to_string(term_cap) + " terms at depth " +
                                          std::to_string(level),
                                      basis);
        if (d.is_zero() || d.is_constant()) {
          ++basis.pruned;
          continue;
        }
        bool dup = false;
        for (const auto& g : basis.generators)
          if (!g.expr.is_constant() && d.ratio_to(g.expr)) {
            dup = true;
            break;
          }
        if (dup) {
          ++basis.pruned;
          continue;
        }
        auto word = parent.word;
        word.push_back(a);
        basis.generators.push_back({std::move(d), parent.output, std::move(word)});
        next.push_back(basis.generators.size() - 1);
      }
    }
    frontier = std::move(next);
  }
  return basis;
}

}  // namespace nash
