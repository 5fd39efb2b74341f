#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nash/config.hpp"

namespace nash {

struct CatalogEntry {
  std::string file;
  std::string name;
  std::optional<NashSystem> system;
  std::optional<std::size_t> expected_response_trdeg;
  std::string error;  // set when the file failed to load
};

/// Every *.json system file in the directory, sorted by file name. Files that
/// fail to parse are kept with their error.
std::vector<CatalogEntry> load_catalog(const std::string& dir);

/// Exact rank of the product of the observability and tangent Kalman
/// matrices of a system whose fields are affine and readout linear in x.
/// Throws InvalidArgument for other systems.
struct KalmanRanks {
  std::size_t controllability = 0;
  std::size_t observability = 0;
  std::size_t product = 0;
};
KalmanRanks kalman_ranks(const NashSystem& sys);

struct ExperimentResult {
  std::string id;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string summary;
  Json evidence;
};

std::vector<std::string> experiment_ids();
ExperimentResult run_experiment(const std::string& id, const std::string& catalog_dir, const RunConfig& cfg);
Json experiment_to_json(const ExperimentResult& r, bool with_timing = true);

}  // namespace nash
