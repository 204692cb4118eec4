#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bimgt/graph.hpp"
#include "bimgt/mia.hpp"
#include "bimgt/selection.hpp"

namespace bimgt {

inline const std::vector<std::int64_t> kDefaultBudgets = {2000, 6000, 10000, 14000, 18000, 22000, 26000};

/// Everything needed to reproduce one budget sweep. The key-value file uses
/// exactly these member names as keys ("key = value", '#' comments, lists
/// comma-separated).
struct ExperimentConfig {
  std::string graph;
  bool directed = false;
  std::string dataset;  // defaults to the graph file's stem
  std::string probability = "wc";
  double theta = kDefaultTheta;
  std::int64_t cost_lo = kDefaultCostLo;
  std::int64_t cost_hi = kDefaultCostHi;
  std::string cost_file;                 // overrides the interval when set
  std::optional<std::uint64_t> cost_seed;  // defaults to a stream of seed
  std::vector<std::int64_t> budgets = kDefaultBudgets;
  std::vector<Method> methods = {Method::kBimgt, Method::kBimgtc, Method::kRand, Method::kMdh,
                                 Method::kMcch};
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint32_t repetitions = 1;
  std::optional<std::uint64_t> tau_cap;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double resolution = 1.0;
  bool timing = true;
  bool parallel_cells = false;
  std::string output_csv;
  std::string output_json;
  std::string seeds_dir;

  /// Throws ValidationError.
  void validate() const;

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Accepts either a bare config object or a results document with a
  /// "config" member.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;

  /// Sets one key from its text form; throws ValidationError on unknown keys.
  void set(std::string_view key, std::string_view value);

  std::string dataset_tag() const;
  std::uint64_t resolved_cost_seed() const;
};

/// Seeds of the randomized stages, all derived from the master seed.
struct StageSeeds {
  std::uint64_t probability;
  std::uint64_t costs;
  std::uint64_t shapley;
  std::uint64_t communities;
  std::uint64_t random_baseline;

  static StageSeeds from_master(std::uint64_t master);
};

struct ResultRow {
  std::string dataset;
  Method method = Method::kBimgt;
  std::int64_t budget = 0;
  double spread = 0.0;
  std::size_t seed_count = 0;
  std::int64_t cost = 0;
  double select_ms = 0.0;
  double shapley_ms = 0.0;
  std::string seeds_file;
};

struct RunStats {
  std::size_t cache_builds = 0;
  std::size_t shapley_runs = 0;
  std::size_t community_runs = 0;
  std::uint64_t permutations = 0;
  std::uint64_t permutation_bound = 0;
  double range = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  RunStats stats;
  bool partial = false;
  std::string error;
};

/// A failed stage; the message is prefixed with the stage name. input_error()
/// is set when the cause was bad input (validation or parse failure).
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(std::string stage, const std::string& what, bool input_error = false)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), input_error_(input_error) {}
  const std::string& stage() const { return stage_; }
  bool input_error() const { return input_error_; }

 private:
  std::string stage_;
  bool input_error_;
};

/// Loads the graph once, assigns probabilities and costs, builds one MIIA
/// cache, computes Shapley values once, then evaluates every (method, budget)
/// cell. Rows are ordered by method (config order) then budget. Outputs named
/// in the config are written; on failure the rows gathered so far are written
/// with a partial marker and ExperimentError is thrown.
ExperimentResult run_experiment(const ExperimentConfig& config);

enum class ResultFormat { kCsv, kJson };

inline constexpr const char* kCsvHeader = "dataset,method,budget,spread,seeds,cost,select_ms,shapley_ms";

std::string format_results(const ExperimentResult& result, ResultFormat format);
void emit_results(const ExperimentResult& result, ResultFormat format, const std::filesystem::path& path);

}  // namespace bimgt
