#include "bimgt/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "bimgt/community.hpp"
#include "bimgt/errors.hpp"
#include "bimgt/parallel.hpp"
#include "bimgt/rng.hpp"
#include "bimgt/shapley.hpp"
#include "text.hpp"

namespace bimgt {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("key '" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

template <typename T>
T parse_value(std::string_view key, std::string_view v) {
  auto x = detail::parse_number<T>(v);
  if (!x) throw ValidationError("key '" + std::string(key) + "': bad number '" + std::string(v) + "'");
  return *x;
}

std::string join_budgets(const std::vector<std::int64_t>& budgets) {
  std::string out;
  for (std::size_t i = 0; i < budgets.size(); ++i) out += (i ? "," : "") + std::to_string(budgets[i]);
  return out;
}

std::string join_methods(const std::vector<Method>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    out += (i ? "," : "") + std::string(method_name(methods[i]));
  }
  return out;
}

std::string format_ms(double ms) {
  // Millisecond timings are reported to microsecond resolution.
  return detail::format_double(std::round(ms * 1000.0) / 1000.0);
}

}  // namespace

// --- config -------------------------------------------------------------------

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const auto v = detail::trim(raw);
  if (key == "graph") graph = v;
  else if (key == "directed") directed = parse_bool(key, v);
  else if (key == "dataset") dataset = v;
  else if (key == "probability") probability = v;
  else if (key == "theta") theta = parse_value<double>(key, v);
  else if (key == "cost_lo") cost_lo = parse_value<std::int64_t>(key, v);
  else if (key == "cost_hi") cost_hi = parse_value<std::int64_t>(key, v);
  else if (key == "cost_file") cost_file = v;
  else if (key == "cost_seed") {
    if (v.empty()) cost_seed.reset();
    else cost_seed = parse_value<std::uint64_t>(key, v);
  } else if (key == "budgets") {
    budgets.clear();
    for (auto item : detail::split(v, ',')) budgets.push_back(parse_value<std::int64_t>(key, item));
  } else if (key == "methods") {
    methods.clear();
    for (auto item : detail::split(v, ',')) methods.push_back(parse_method(item));
  } else if (key == "epsilon") epsilon = parse_value<double>(key, v);
  else if (key == "delta") delta = parse_value<double>(key, v);
  else if (key == "repetitions") repetitions = parse_value<std::uint32_t>(key, v);
  else if (key == "tau_cap") {
    if (v.empty() || v == "none") tau_cap.reset();
    else tau_cap = parse_value<std::uint64_t>(key, v);
  } else if (key == "seed") seed = parse_value<std::uint64_t>(key, v);
  else if (key == "workers") workers = parse_value<unsigned>(key, v);
  else if (key == "resolution") resolution = parse_value<double>(key, v);
  else if (key == "timing") timing = parse_bool(key, v);
  else if (key == "parallel_cells") parallel_cells = parse_bool(key, v);
  else if (key == "output_csv") output_csv = v;
  else if (key == "output_json") output_json = v;
  else if (key == "seeds_dir") seeds_dir = v;
  else throw ValidationError("unknown config key '" + std::string(key) + "'");
}

void ExperimentConfig::validate() const {
  if (graph.empty()) throw ValidationError("config: 'graph' is required");
  ProbabilityScheme::parse(probability);
  if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("config: theta must lie in (0, 1]");
  if (cost_file.empty() && (cost_lo < 1 || cost_hi < cost_lo)) {
    throw ValidationError("config: cost interval must satisfy 1 <= cost_lo <= cost_hi");
  }
  if (budgets.empty()) throw ValidationError("config: budgets must not be empty");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] <= 0) throw ValidationError("config: budgets must be positive");
    if (i > 0 && budgets[i] <= budgets[i - 1]) {
      throw ValidationError("config: budgets must be strictly increasing");
    }
  }
  if (methods.empty()) throw ValidationError("config: methods must not be empty");
  if (!(epsilon > 0.0)) throw ValidationError("config: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("config: delta must lie in (0, 1)");
  if (repetitions == 0) throw ValidationError("config: repetitions must be positive");
  if (tau_cap && *tau_cap == 0) throw ValidationError("config: tau_cap must be positive");
  if (!(resolution > 0.0)) throw ValidationError("config: resolution must be positive");
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') return;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    c.set(detail::trim(body.substr(0, eq)), body.substr(eq + 1));
  });
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  const auto body = detail::trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      return from_json(nlohmann::json::parse(body));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
  return parse(text);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["graph"] = graph;
  j["directed"] = directed;
  j["dataset"] = dataset_tag();
  j["probability"] = probability;
  j["theta"] = theta;
  j["cost_lo"] = cost_lo;
  j["cost_hi"] = cost_hi;
  j["cost_file"] = cost_file;
  j["cost_seed"] = resolved_cost_seed();
  j["budgets"] = budgets;
  auto& m = j["methods"] = nlohmann::ordered_json::array();
  for (auto method : methods) m.push_back(method_name(method));
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  j["repetitions"] = repetitions;
  j["tau_cap"] = tau_cap ? nlohmann::ordered_json(*tau_cap) : nlohmann::ordered_json(nullptr);
  j["seed"] = seed;
  j["workers"] = workers;
  j["resolution"] = resolution;
  j["timing"] = timing;
  j["parallel_cells"] = parallel_cells;
  j["output_csv"] = output_csv;
  j["output_json"] = output_json;
  j["seeds_dir"] = seeds_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  const auto& j = doc.contains("config") ? doc.at("config") : doc;
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) {
      c.set(key, "");
    } else if (value.is_string()) {
      c.set(key, value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      c.set(key, joined);
    } else if (value.is_number_float()) {
      c.set(key, detail::format_double(value.get<double>()));
    } else {
      c.set(key, value.dump());
    }
  }
  return c;
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  auto line = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + '\n'; };
  line("graph", graph);
  line("directed", directed ? "true" : "false");
  line("dataset", dataset_tag());
  line("probability", probability);
  line("theta", detail::format_double(theta));
  line("cost_lo", std::to_string(cost_lo));
  line("cost_hi", std::to_string(cost_hi));
  line("cost_file", cost_file);
  line("cost_seed", std::to_string(resolved_cost_seed()));
  line("budgets", join_budgets(budgets));
  line("methods", join_methods(methods));
  line("epsilon", detail::format_double(epsilon));
  line("delta", detail::format_double(delta));
  line("repetitions", std::to_string(repetitions));
  line("tau_cap", tau_cap ? std::to_string(*tau_cap) : "none");
  line("seed", std::to_string(seed));
  line("workers", std::to_string(workers));
  line("resolution", detail::format_double(resolution));
  line("timing", timing ? "true" : "false");
  line("parallel_cells", parallel_cells ? "true" : "false");
  line("output_csv", output_csv);
  line("output_json", output_json);
  line("seeds_dir", seeds_dir);
  return out;
}

std::string ExperimentConfig::dataset_tag() const {
  if (!dataset.empty()) return dataset;
  return std::filesystem::path(graph).stem().string();
}

std::uint64_t ExperimentConfig::resolved_cost_seed() const {
  return cost_seed ? *cost_seed : StageSeeds::from_master(seed).costs;
}

StageSeeds StageSeeds::from_master(std::uint64_t master) {
  return {derive_seed(master, 1), derive_seed(master, 2), derive_seed(master, 3),
          derive_seed(master, 4), derive_seed(master, 5)};
}

// --- run ----------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.config = config;
  std::string stage = "config";

  auto flush = [&] {
    if (!config.output_csv.empty()) emit_results(result, ResultFormat::kCsv, config.output_csv);
    if (!config.output_json.empty()) emit_results(result, ResultFormat::kJson, config.output_json);
  };

  try {
    config.validate();
    const auto seeds = StageSeeds::from_master(config.seed);
    const auto workers = resolve_workers(config.workers);

    stage = "load";
    const auto topology = load_edge_list(config.graph, config.directed);
    if (topology.node_count() == 0) throw ValidationError("graph has no nodes");

    stage = "probabilities";
    const auto graph = assign_probabilities(topology, ProbabilityScheme::parse(config.probability, seeds.probability));

    stage = "costs";
    const auto costs = config.cost_file.empty()
                           ? assign_costs(graph, config.cost_lo, config.cost_hi, config.resolved_cost_seed())
                           : load_costs(graph, config.cost_file);

    stage = "cache";
    const auto cache = build_miia_cache(graph, config.theta, workers);
    ++result.stats.cache_builds;

    const bool wants_shapley = std::any_of(config.methods.begin(), config.methods.end(), [](Method m) {
      return m == Method::kBimgt || m == Method::kBimgtc;
    });
    std::vector<double> phi;
    double shapley_ms = 0.0;
    if (wants_shapley) {
      stage = "shapley";
      const auto start = Clock::now();
      BimGame game(graph, cache);
      const auto range = aggregate_range(graph);
      const auto plan = SamplingPlan::make(config.epsilon, config.delta, range, config.tau_cap, config.repetitions);
      phi = estimate_shapley(game, plan, seeds.shapley, workers).phi;
      shapley_ms = elapsed_ms(start);
      ++result.stats.shapley_runs;
      result.stats.range = range;
      result.stats.permutations = plan.permutations;
      result.stats.permutation_bound = plan.bound;
    }

    std::optional<CommunityPartition> partition;
    double community_ms = 0.0;
    if (std::find(config.methods.begin(), config.methods.end(), Method::kBimgtc) != config.methods.end()) {
      stage = "communities";
      const auto start = Clock::now();
      partition = detect_communities(graph, seeds.communities, config.resolution);
      community_ms = elapsed_ms(start);
      ++result.stats.community_runs;
    }

    struct Cell {
      Method method;
      std::int64_t budget;
    };
    std::vector<Cell> cells;
    for (auto m : config.methods) {
      for (auto b : config.budgets) cells.push_back({m, b});
    }
    std::vector<std::optional<ResultRow>> slots(cells.size());
    std::vector<std::string> failures(cells.size());

    auto run_cell = [&](std::size_t i) {
      const auto [method, budget] = cells[i];
      const auto start = Clock::now();
      SeedSet set;
      switch (method) {
        case Method::kBimgt: set = select_bimgt(graph, costs, static_cast<double>(budget), phi); break;
        case Method::kBimgtc:
          set = select_bimgtc(graph, costs, static_cast<double>(budget), phi, *partition);
          break;
        default:
          set = select_baseline(graph, costs, static_cast<double>(budget), method,
                                derive_seed(seeds.random_baseline, static_cast<std::uint64_t>(budget)));
      }
      double select_ms = elapsed_ms(start);
      if (method == Method::kBimgtc) select_ms += community_ms;
      // Cells may run concurrently, so sigma stays single-threaded here.
      set.spread = sigma(cache, set.seeds, 1);
      ResultRow row;
      row.dataset = config.dataset_tag();
      row.method = method;
      row.budget = budget;
      row.spread = set.spread;
      row.seed_count = set.seeds.size();
      row.cost = set.total_cost;
      const bool uses_phi = method == Method::kBimgt || method == Method::kBimgtc;
      row.select_ms = config.timing ? select_ms : 0.0;
      row.shapley_ms = config.timing && uses_phi ? shapley_ms : 0.0;
      if (!config.seeds_dir.empty()) {
        const auto file = std::filesystem::path(config.seeds_dir) /
                          (std::string(method_name(method)) + "_" + std::to_string(budget) + ".json");
        write_seed_set(graph, set, file);
        row.seeds_file = file.string();
      }
      slots[i] = std::move(row);
    };

    auto guarded = [&](std::size_t i) {
      try {
        run_cell(i);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    };
    if (config.parallel_cells) {
      parallel_for(cells.size(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
        for (auto i = begin; i < end; ++i) guarded(i);
      });
    } else {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        guarded(i);
        if (!failures[i].empty()) break;
      }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!failures[i].empty()) {
        stage = "select:" + std::string(method_name(cells[i].method)) + ":" + std::to_string(cells[i].budget);
        throw std::runtime_error(failures[i]);
      }
      if (slots[i]) result.rows.push_back(std::move(*slots[i]));
    }
  } catch (const std::exception& e) {
    result.partial = true;
    result.error = stage + ": " + e.what();
    try {
      flush();
    } catch (...) {
    }
    const bool input = dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e);
    throw ExperimentError(stage, e.what(), input);
  }

  try {
    flush();
  } catch (const std::exception& e) {
    throw ExperimentError("emit", e.what());
  }
  return result;
}

// --- output -------------------------------------------------------------------

std::string format_results(const ExperimentResult& result, ResultFormat format) {
  if (result.rows.empty() && !result.partial) throw DomainError("no result rows to emit");
  if (format == ResultFormat::kCsv) {
    std::string out = std::string(kCsvHeader) + '\n';
    for (const auto& r : result.rows) {
      out += r.dataset + ',' + std::string(method_name(r.method)) + ',' + std::to_string(r.budget) + ',' +
             detail::format_double(r.spread) + ',' + std::to_string(r.seed_count) + ',' +
             std::to_string(r.cost) + ',' + format_ms(r.select_ms) + ',' + format_ms(r.shapley_ms) + '\n';
    }
    if (result.partial) out += "# partial: " + result.error + '\n';
    return out;
  }
  nlohmann::ordered_json j;
  j["status"] = result.partial ? "partial" : "complete";
  if (result.partial) j["error"] = result.error;
  j["config"] = result.config.to_json();
  j["stats"] = {{"cache_builds", result.stats.cache_builds},
                {"shapley_runs", result.stats.shapley_runs},
                {"community_runs", result.stats.community_runs},
                {"permutations", result.stats.permutations},
                {"permutation_bound", result.stats.permutation_bound},
                {"range", result.stats.range}};
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["dataset"] = r.dataset;
    row["method"] = method_name(r.method);
    row["budget"] = r.budget;
    row["spread"] = r.spread;
    row["seeds"] = r.seed_count;
    row["cost"] = r.cost;
    row["select_ms"] = std::round(r.select_ms * 1000.0) / 1000.0;
    row["shapley_ms"] = std::round(r.shapley_ms * 1000.0) / 1000.0;
    row["seeds_file"] = r.seeds_file;
    rows.push_back(std::move(row));
  }
  return j.dump(2) + '\n';
}

void emit_results(const ExperimentResult& result, ResultFormat format, const std::filesystem::path& path) {
  detail::write_file(path, format_results(result, format));
}

}  // namespace bimgt
