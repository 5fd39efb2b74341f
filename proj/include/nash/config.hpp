#pragma once

#include <cstdint>

#include "nash/analysis.hpp"
#include "nash/io.hpp"
#include "nash/minimality.hpp"
#include "nash/parallel.hpp"
#include "nash/reduction.hpp"

namespace nash {

/// Shared run settings for the CLI and the experiment harness.
struct RunConfig {
  std::uint64_t seed = 1;
  double flow_tol = 1e-10;
  double rank_tol = 1e-8;
  double fit_tol = 1e-7;
  double newton_tol = 1e-12;
  double iso_tol = 1e-6;
  double derivative_floor = 1e-6;
  std::size_t depth = 0;  // 0: state dimension
  unsigned degree_bound = 6;
  double epsilon = 0.1;
  std::size_t trials = 100;
  double budget = 0.5;

  /// Throws InvalidArgument unless every tolerance is positive.
  void validate() const;

  FlowOptions flow() const;
  RankOptions rank() const;
  FitOptions fit() const;
  ImplicitOptions implicit() const;
  VerifyOptions verify() const;
  ReductionOptions reduction() const;
  ReachOptions reach() const;
  ResponseOptions response() const;
  ObservabilityOptions observability() const;
  TrdegOptions trdeg() const;
  MinimalityOptions minimality() const;
  IsomorphismOptions isomorphism() const;
  IsoVerifyOptions iso_verify() const;

  Json to_json() const;
};

}  // namespace nash
