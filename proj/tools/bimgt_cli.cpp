// bimgt: budgeted influence maximization with Shapley-value seed selection.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bimgt/community.hpp"
#include "bimgt/errors.hpp"
#include "bimgt/experiment.hpp"
#include "bimgt/graph.hpp"
#include "bimgt/mia.hpp"
#include "bimgt/rng.hpp"
#include "bimgt/selection.hpp"
#include "bimgt/shapley.hpp"

namespace {

using namespace bimgt;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct GraphOptions {
  std::string path;
  bool directed = false;
  std::string probability = "wc";
  std::uint64_t seed = 1;
  double theta = kDefaultTheta;
  unsigned workers = 1;

  void attach(CLI::App* app, bool with_probability = true) {
    app->add_option("-g,--graph", path, "Edge-list file")->required();
    app->add_flag("--directed", directed, "Treat edges as directed");
    app->add_option("--seed", seed, "Master RNG seed");
    if (with_probability) {
      app->add_option("-p,--probability", probability, "uniform:<p> | trivalency | wc");
      app->add_option("--theta", theta, "MIIA path-probability threshold");
      app->add_option("-j,--workers", workers, "Worker threads (0 = all cores)");
    }
  }

  StageSeeds seeds() const { return StageSeeds::from_master(seed); }

  Graph load() const {
    return assign_probabilities(load_edge_list(path, directed),
                                ProbabilityScheme::parse(probability, seeds().probability));
  }
};

struct CostOptions {
  std::string file;
  std::int64_t lo = kDefaultCostLo;
  std::int64_t hi = kDefaultCostHi;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--cost-file", file, "'identifier,cost' file");
    app->add_option("--cost-lo", lo, "Lower end of the generated cost interval");
    app->add_option("--cost-hi", hi, "Upper end of the generated cost interval");
    app->add_option("--cost-seed", seed, "Seed for generated costs");
  }

  CostAssignment make(const Graph& graph, const StageSeeds& seeds) const {
    if (!file.empty()) return load_costs(graph, file);
    return assign_costs(graph, lo, hi, seed ? *seed : seeds.costs);
  }
};

struct SamplingOptions {
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint32_t repetitions = 1;
  std::optional<std::uint64_t> tau_cap;

  void attach(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Additive error bound");
    app->add_option("--delta", delta, "Failure probability");
    app->add_option("--repetitions", repetitions, "Evaluations per permutation");
    app->add_option("--tau-cap", tau_cap, "Hard cap on the permutation count");
  }
};

std::vector<double> compute_phi(const Graph& graph, const MiiaCache& cache, const SamplingOptions& s,
                                std::uint64_t seed, unsigned workers, SamplingPlan* plan_out = nullptr) {
  BimGame game(graph, cache);
  auto plan = SamplingPlan::make(s.epsilon, s.delta, aggregate_range(graph), s.tau_cap, s.repetitions);
  if (plan_out) *plan_out = plan;
  return estimate_shapley(game, plan, seed, workers).phi;
}

int run(int argc, char** argv) {
  CLI::App app{"Budgeted influence maximization with Shapley-value seed selection"};
  app.require_subcommand(1);

  // shapley
  GraphOptions sh_graph;
  SamplingOptions sh_sampling;
  std::string sh_out;
  bool sh_exact = false;
  auto* sh = app.add_subcommand("shapley", "Estimate per-node Shapley values");
  sh_graph.attach(sh);
  sh_sampling.attach(sh);
  sh->add_option("-o,--out", sh_out, "Output 'identifier,phi' file")->required();
  sh->add_flag("--exact", sh_exact, "Exact enumeration (at most 10 nodes)");

  // select
  GraphOptions se_graph;
  SamplingOptions se_sampling;
  CostOptions se_costs;
  std::string se_method = "BIMGT";
  double se_budget = 0;
  std::string se_phi;
  std::string se_partition;
  std::string se_out;
  auto* se = app.add_subcommand("select", "Select seeds with one method and one budget");
  se_graph.attach(se);
  se_sampling.attach(se);
  se_costs.attach(se);
  se->add_option("-m,--method", se_method, "BIMGT | BIMGTC | RAND | MDH | MCCH");
  se->add_option("-b,--budget", se_budget, "Budget")->required();
  se->add_option("--shapley", se_phi, "Precomputed 'identifier,phi' file");
  se->add_option("--communities", se_partition, "Precomputed 'identifier,community' file");
  se->add_option("-o,--out", se_out, "Output seed-set record (JSON)");

  // experiment
  std::string ex_config;
  std::string ex_csv;
  std::string ex_json;
  auto* ex = app.add_subcommand("experiment", "Run a full budget sweep from a config file");
  ex->add_option("-c,--config", ex_config, "Key-value config file or results JSON")->required();
  ex->add_option("--csv", ex_csv, "Override output_csv");
  ex->add_option("--json", ex_json, "Override output_json");

  // communities
  GraphOptions co_graph;
  double co_resolution = 1.0;
  std::string co_out;
  auto* co = app.add_subcommand("communities", "Detect communities with the Louvain method");
  co_graph.attach(co, false);
  co->add_option("--resolution", co_resolution, "Modularity resolution");
  co->add_option("-o,--out", co_out, "Output 'identifier,community' file");

  // evaluate
  GraphOptions ev_graph;
  std::string ev_seeds;
  auto* ev = app.add_subcommand("evaluate", "Expected MIA spread of a seed file");
  ev_graph.attach(ev);
  ev->add_option("-s,--seeds", ev_seeds, "Seed record or one identifier per line")->required();

  // miia (debug)
  GraphOptions mi_graph;
  std::string mi_root;
  auto* mi = app.add_subcommand("miia", "Print one node's arborescence");
  mi_graph.attach(mi);
  mi->add_option("-r,--root", mi_root, "Root identifier")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (sh->parsed()) {
    const auto graph = sh_graph.load();
    const auto cache = build_miia_cache(graph, sh_graph.theta, sh_graph.workers);
    std::vector<double> phi;
    if (sh_exact) {
      phi = exact_shapley(BimGame(graph, cache));
    } else {
      SamplingPlan plan;
      phi = compute_phi(graph, cache, sh_sampling, sh_graph.seeds().shapley, sh_graph.workers, &plan);
      std::cerr << "permutations " << plan.permutations << " (bound " << plan.bound << ", range "
                << plan.range << ")\n";
    }
    write_shapley(graph, phi, sh_out);
    return 0;
  }

  if (se->parsed()) {
    const auto graph = se_graph.load();
    const auto seeds = se_graph.seeds();
    const auto costs = se_costs.make(graph, seeds);
    const auto cache = build_miia_cache(graph, se_graph.theta, se_graph.workers);
    const auto method = parse_method(se_method);
    SeedSet set;
    if (method == Method::kBimgt || method == Method::kBimgtc) {
      const auto phi = se_phi.empty()
                           ? compute_phi(graph, cache, se_sampling, seeds.shapley, se_graph.workers)
                           : load_shapley(graph, se_phi);
      if (method == Method::kBimgt) {
        set = select_bimgt(graph, costs, se_budget, phi);
      } else {
        const auto partition = se_partition.empty() ? detect_communities(graph, seeds.communities)
                                                    : load_partition(graph, se_partition);
        set = select_bimgtc(graph, costs, se_budget, phi, partition);
      }
    } else {
      set = select_baseline(graph, costs, se_budget, method,
                            derive_seed(seeds.random_baseline, static_cast<std::uint64_t>(se_budget)));
    }
    set.spread = sigma(graph, cache, set.seeds, se_graph.workers);
    if (!se_out.empty()) write_seed_set(graph, set, se_out);
    std::cout << method_name(set.method) << " budget=" << se_budget << " seeds=" << set.seeds.size()
              << " cost=" << set.total_cost << " spread=" << set.spread << '\n';
    return 0;
  }

  if (ex->parsed()) {
    auto config = ExperimentConfig::load(ex_config);
    if (!ex_csv.empty()) config.output_csv = ex_csv;
    if (!ex_json.empty()) config.output_json = ex_json;
    config.validate();
    const auto result = run_experiment(config);
    if (config.output_csv.empty() && config.output_json.empty()) {
      std::cout << format_results(result, ResultFormat::kCsv);
    }
    return 0;
  }

  if (co->parsed()) {
    const auto graph = load_edge_list(co_graph.path, co_graph.directed);
    const auto partition = detect_communities(graph, co_graph.seeds().communities, co_resolution);
    if (!co_out.empty()) write_partition(graph, partition, co_out);
    std::cout << "communities=" << partition.count() << " modularity=" << partition.modularity << '\n';
    return 0;
  }

  if (ev->parsed()) {
    const auto graph = ev_graph.load();
    const auto cache = build_miia_cache(graph, ev_graph.theta, ev_graph.workers);
    const auto seeds = load_seed_ids(graph, ev_seeds);
    std::cout << sigma(graph, cache, seeds, ev_graph.workers) << '\n';
    return 0;
  }

  if (mi->parsed()) {
    const auto graph = mi_graph.load();
    const auto root = graph.find(mi_root);
    if (!root) throw ValidationError("unknown node '" + mi_root + "'");
    std::cout << dump_miia(graph, build_miia(graph, *root, mi_graph.theta));
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bimgt::ExperimentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.input_error() ? kExitValidation : kExitRuntime;
  } catch (const bimgt::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const bimgt::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const bimgt::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
