#include "nash/config.hpp"
#include "nash/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "nash/error.hpp"

namespace nash {

void RunConfig::validate() const {
  const std::pair<const char*, double> tols[] = {{"flow tol", flow_tol},     {"rank tol", rank_tol},
                                                 {"fit tol", fit_tol},       {"newton tol", newton_tol},
                                                 {"iso tol", iso_tol},       {"derivative floor", derivative_floor},
                                                 {"epsilon", epsilon},       {"budget", budget}};
  for (const auto& [name, v] : tols)
    if (!(v > 0.0)) raise(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
  if (trials == 0) raise(ErrorCode::InvalidArgument, "trial count must be positive");
}

FlowOptions RunConfig::flow() const {
  FlowOptions f;
  f.tol = flow_tol;
  return f;
}

RankOptions RunConfig::rank() const {
  RankOptions r;
  r.rank_tol = rank_tol;
  return r;
}

FitOptions RunConfig::fit() const {
  FitOptions f;
  f.degree_bound = degree_bound;
  f.fit_tol = fit_tol;
  return f;
}

ImplicitOptions RunConfig::implicit() const {
  ImplicitOptions o;
  o.newton_tol = newton_tol;
  o.derivative_floor = derivative_floor;
  return o;
}

VerifyOptions RunConfig::verify() const {
  VerifyOptions v;
  v.trials = trials;
  v.budget = budget;
  v.flow = flow();
  v.seed = seed + 1;
  return v;
}

ReductionOptions RunConfig::reduction() const {
  ReductionOptions r;
  r.rank = rank();
  r.fit = fit();
  r.implicit = implicit();
  r.verify = verify();
  r.flow = flow();
  r.depth = depth;
  r.seed = seed;
  return r;
}

ReachOptions RunConfig::reach() const {
  ReachOptions r;
  r.rank = rank();
  r.flow = flow();
  r.budget = budget;
  r.seed = seed;
  return r;
}

ResponseOptions RunConfig::response() const {
  ResponseOptions r;
  r.rank = rank();
  r.depth = depth;
  r.budget = budget;
  r.seed = seed;
  return r;
}

ObservabilityOptions RunConfig::observability() const {
  ObservabilityOptions o;
  o.rank = rank();
  o.flow = flow();
  o.depth = depth;
  o.budget = budget;
  o.seed = seed;
  return o;
}

TrdegOptions RunConfig::trdeg() const {
  TrdegOptions t;
  t.rank = rank();
  t.seed = seed;
  return t;
}

MinimalityOptions RunConfig::minimality() const {
  MinimalityOptions m;
  m.rank = rank();
  m.flow = flow();
  m.depth = depth;
  m.verify = verify();
  m.seed = seed;
  return m;
}

IsomorphismOptions RunConfig::isomorphism() const {
  IsomorphismOptions o;
  o.rank = rank();
  o.fit = fit();
  o.implicit = implicit();
  o.flow = flow();
  o.iso_tol = iso_tol;
  o.seed = seed;
  return o;
}

IsoVerifyOptions RunConfig::iso_verify() const {
  IsoVerifyOptions o;
  o.probes = trials;
  o.words = std::max<std::size_t>(1, trials / 2);
  o.budget = budget;
  o.tol = iso_tol;
  o.flow = flow();
  o.seed = seed + 2;
  return o;
}

Json RunConfig::to_json() const {
  return {{"seed", seed},
          {"tolerances",
           {{"flow", flow_tol},
            {"rank", rank_tol},
            {"fit", fit_tol},
            {"newton", newton_tol},
            {"iso", iso_tol},
            {"derivative_floor", derivative_floor}}},
          {"depth", depth},
          {"degree_bound", degree_bound},
          {"epsilon", epsilon},
          {"trials", trials},
          {"budget", budget}};
}

unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NASH_REALIZE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(thread_cap(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace nash
