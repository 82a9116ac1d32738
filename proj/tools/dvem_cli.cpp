// Command-line front end for the location ranking engine.
//
// Subcommands:
//   validate  check a dataset against the domain invariants
//   cluster   extract candidate locations and write them out
//   rank      run a ranker (dvem, gvr or visnn) over a dataset
//   eval      score a rankings file against ground truth
//   gen       expand a synthetic scenario spec into a dataset
//   oracle    cross-check the engine against the brute-force scorer
//
// Exit codes: 0 ok, 1 usage, 2 parse error, 3 validation failure,
// 4 bad configuration, 5 internal error, 6 engine/oracle mismatch.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dvem/dvem.hpp"

namespace fs = std::filesystem;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::string profile;
  std::optional<int> a, b, theta, top_n;
  std::optional<double> delta, min_ini_score, cluster_radius_km, log_base;
  std::optional<std::string> grouping;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--profile", args.profile, "named preset: geo-constrained or geo-unconstrained");
  cmd->add_option("--a", args.a, "distinctiveness region parameter (0 = per element)");
  cmd->add_option("--b", args.b, "matching region parameter (0 = all elements)");
  cmd->add_option("--theta", args.theta, "location-frequency cutoff");
  cmd->add_option("--delta", args.delta, "score smoothing scale");
  cmd->add_option("--top-n", args.top_n, "candidate list cutoff");
  cmd->add_option("--min-ini-score", args.min_ini_score, "drop correspondences scored below this");
  cmd->add_option("--radius", args.cluster_radius_km, "geo-clustering radius in km");
  cmd->add_option("--log-base", args.log_base, "logarithm base for distinctiveness weights");
  cmd->add_option("--grouping", args.grouping, "location grouping: auto, label or geo");
}

// Precedence: defaults < profile < config file < explicit flags.
void resolve_config(const ConfigArgs& args, dvem::Config& config, dvem::EvalConfig& eval) {
  if (!args.profile.empty()) config = dvem::profile_by_name(args.profile);
  if (!args.config_path.empty()) dvem::io::load_config_file(args.config_path, config, eval);
  if (args.a) config.distinct_grid = *args.a;
  if (args.b) config.match_grid = *args.b;
  if (args.theta) config.freq_cutoff = *args.theta;
  if (args.delta) config.smooth_delta = *args.delta;
  if (args.top_n) config.top_n = *args.top_n;
  if (args.min_ini_score) config.min_ini_score = *args.min_ini_score;
  if (args.cluster_radius_km) config.cluster_radius_km = *args.cluster_radius_km;
  if (args.log_base) config.log_base = *args.log_base;
  if (args.grouping) config.grouping = dvem::io::grouping_by_name(*args.grouping);
  config.validate();
}

struct EvalArgs {
  std::optional<std::string> protocol;
  std::optional<double> r_eval;
  std::vector<int> k_values;
};

void add_eval_options(CLI::App* cmd, EvalArgs& args) {
  cmd->add_option("--protocol", args.protocol, "evaluation protocol: label or radius");
  cmd->add_option("--r-eval", args.r_eval, "hit radius in km (radius protocol)");
  cmd->add_option("--k", args.k_values, "hit-rate cutoffs, e.g. --k 1 5 10");
}

void resolve_eval(const EvalArgs& args, dvem::EvalConfig& eval) {
  if (args.protocol) eval.protocol = dvem::protocol_by_name(*args.protocol);
  if (args.r_eval) eval.r_eval_km = *args.r_eval;
  if (!args.k_values.empty()) eval.k_values = args.k_values;
  eval.validate();
}

int run_validate(const dvem::io::DatasetPaths& paths) {
  dvem::Dataset dataset;
  dvem::io::LoadOptions options;
  options.strict_references = false;  // collect everything into one report
  dvem::io::for_each_query_block(
      paths, [&](dvem::QueryData&& block) { dataset.queries.push_back(std::move(block)); }, options);
  const dvem::ValidationReport report = dvem::validate_dataset(dataset);
  if (report.accepted()) {
    std::cout << "dataset accepted: " << dataset.queries.size() << " queries\n";
    return 0;
  }
  std::cout << report.to_string();
  std::cout << report.violations.size() << " violation(s)\n";
  return static_cast<int>(dvem::Errc::kValidation);
}

int run_cluster(const dvem::io::DatasetPaths& paths, const ConfigArgs& config_args,
                const std::string& out_path) {
  dvem::Config config;
  dvem::EvalConfig eval;
  resolve_config(config_args, config, eval);
  std::vector<std::pair<std::string, std::vector<dvem::CandidateLocation>>> per_query;
  dvem::io::for_each_query_block(paths, [&](dvem::QueryData&& block) {
    const auto candidates = dvem::select_candidates(block.images, config.top_n);
    per_query.emplace_back(block.meta.query_id,
                           dvem::extract_locations(candidates, config.grouping, config.cluster_radius_km));
  });
  dvem::io::write_locations(out_path, per_query);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int run_rank(const dvem::io::DatasetPaths& paths, const ConfigArgs& config_args,
             const EvalArgs& eval_args, const std::string& method_name, const std::string& out_dir,
             bool with_eval, int workers, const std::string& dump_clouds,
             const std::string& dump_heatmap) {
  dvem::Config config;
  dvem::EvalConfig eval;
  resolve_config(config_args, config, eval);
  resolve_eval(eval_args, eval);
  const dvem::Method method = dvem::method_by_name(method_name);

  const dvem::Dataset dataset = dvem::io::load(paths);
  const auto output = dvem::run_pipeline(dataset, method, config, out_dir,
                                         with_eval ? std::optional(eval) : std::nullopt, workers);
  std::cout << "wrote " << output.rankings_path << '\n';
  std::cout << "wrote " << output.estimates_path << '\n';
  std::cout << "wrote " << output.locations_path << '\n';
  if (output.report) {
    for (const auto& [k, rate] : output.report->hit_rate) {
      std::cout << "HR@" << k << " = " << dvem::io::format_double(rate) << '\n';
    }
    std::cout << output.report->no_estimate << " query(ies) without estimate\n";
  }

  if (!dump_clouds.empty() || !dump_heatmap.empty()) {
    std::ofstream clouds_out, heatmap_out;
    if (!dump_clouds.empty()) {
      clouds_out.open(dump_clouds, std::ios::trunc);
      clouds_out << "query_id,location_id,element_x,element_y,m,max_w\n";
    }
    if (!dump_heatmap.empty()) {
      heatmap_out.open(dump_heatmap, std::ios::trunc);
      heatmap_out << "query_id,region_x,region_y,n_r,w_geo\n";
    }
    for (const dvem::QueryData& query : dataset.queries) {
      const auto candidates = dvem::select_candidates(query.images, config.top_n);
      if (candidates.empty()) continue;
      const auto locations =
          dvem::extract_locations(candidates, config.grouping, config.cluster_radius_km);
      const auto clouds = dvem::build_clouds(locations, query.correspondences, config);
      if (clouds_out.is_open()) {
        dvem::io::write_cloud_dump(clouds_out, query.meta.query_id, clouds);
      }
      if (heatmap_out.is_open()) {
        const auto grid =
            dvem::RegionGrid::build(query.meta.width, query.meta.height, config.distinct_grid);
        const auto distinct =
            dvem::build_distinctiveness(grid, clouds, config.freq_cutoff, config.log_base);
        dvem::io::write_heatmap_dump(heatmap_out, query.meta.query_id, distinct);
      }
    }
  }
  return 0;
}

int run_eval(const std::string& queries_path, const std::string& locations_path,
             const std::string& rankings_path, const EvalArgs& eval_args,
             const std::string& out_dir) {
  dvem::EvalConfig eval;
  resolve_eval(eval_args, eval);

  std::vector<dvem::QueryMeta> queries;
  {
    dvem::io::LineReader reader(queries_path);
    std::string line;
    while (reader.next(line)) {
      queries.push_back(dvem::io::parse_query_line(line, reader.path(), reader.line_no()));
    }
  }
  const auto locations = dvem::io::read_locations(locations_path);
  const auto rows = dvem::io::read_rankings(rankings_path);

  std::vector<dvem::RankedQuery> ranked_queries;
  for (const dvem::QueryMeta& meta : queries) {
    dvem::RankedQuery rq;
    rq.query = &meta;
    const std::vector<dvem::CandidateLocation>* per_query = nullptr;
    for (const auto& [qid, locs] : locations) {
      if (qid == meta.query_id) {
        per_query = &locs;
        break;
      }
    }
    for (const dvem::io::RankingRow& row : rows) {
      if (row.query_id != meta.query_id) continue;
      const dvem::CandidateLocation* loc = nullptr;
      if (per_query) {
        for (const dvem::CandidateLocation& candidate : *per_query) {
          if (candidate.location_id == row.location_id) {
            loc = &candidate;
            break;
          }
        }
      }
      if (!loc) {
        throw dvem::Error(dvem::Errc::kValidation,
                          "ranked location " + row.location_id + " of query " + row.query_id +
                              " is missing from " + locations_path);
      }
      rq.ranked.push_back(*loc);
    }
    ranked_queries.push_back(std::move(rq));
  }

  const dvem::EvalReport report = dvem::evaluate(ranked_queries, eval);
  fs::create_directories(out_dir);
  const std::string report_path = (fs::path(out_dir) / "report.csv").string();
  const std::string detail_path = (fs::path(out_dir) / "detail.csv").string();
  dvem::io::write_eval_report(report_path, detail_path, report);
  for (const auto& [k, rate] : report.hit_rate) {
    std::cout << "HR@" << k << " = " << dvem::io::format_double(rate) << '\n';
  }
  std::cout << report.no_estimate << " query(ies) without estimate\n";
  std::cout << "wrote " << report_path << '\n';
  return 0;
}

int run_gen(const std::string& spec_path, const std::string& out_dir, int count) {
  if (count < 1) throw dvem::Error(dvem::Errc::kUsage, "--count must be >= 1");
  dvem::ScenarioSpec spec = dvem::io::load_scenario_file(spec_path);
  std::vector<dvem::QueryData> queries;
  for (int i = 0; i < count; ++i) {
    dvem::ScenarioSpec varied = spec;
    varied.seed = spec.seed + static_cast<std::uint64_t>(i);
    if (count > 1) varied.query_id.clear();  // default per-seed ids keep queries distinct
    queries.push_back(dvem::generate(varied).data);
  }
  fs::create_directories(out_dir);
  dvem::io::DatasetPaths paths{(fs::path(out_dir) / "queries.tsv").string(),
                               (fs::path(out_dir) / "images.tsv").string(),
                               (fs::path(out_dir) / "correspondences.tsv").string()};
  dvem::io::write_dataset(paths, queries);
  std::cout << "wrote " << paths.queries << '\n';
  std::cout << "wrote " << paths.images << '\n';
  std::cout << "wrote " << paths.correspondences << '\n';
  return 0;
}

int run_oracle(const dvem::io::DatasetPaths& paths, const ConfigArgs& config_args,
               double tolerance) {
  dvem::Config config;
  dvem::EvalConfig eval;
  resolve_config(config_args, config, eval);

  const dvem::Dataset dataset = dvem::io::load(paths);
  std::size_t checked = 0;
  double worst = 0.0;
  for (const dvem::QueryData& query : dataset.queries) {
    const auto ranking = dvem::rank_one(query, dvem::Method::kDvem, config);
    const auto reference =
        dvem::oracle_rank(query.meta, query.correspondences, ranking.locations, config);
    if (reference.size() != ranking.ranked.size()) {
      throw dvem::Error(dvem::Errc::kMismatch,
                        "query " + query.meta.query_id + ": ranking sizes differ");
    }
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (reference[i].location_id != ranking.ranked[i].location_id) {
        throw dvem::Error(dvem::Errc::kMismatch,
                          "query " + query.meta.query_id + ": rank " + std::to_string(i + 1) +
                              " is " + ranking.ranked[i].location_id + " but the oracle says " +
                              reference[i].location_id);
      }
      const double engine = ranking.ranked[i].score;
      const double expected = reference[i].score;
      const double scale = std::max({std::abs(engine), std::abs(expected), 1.0});
      const double rel = std::abs(engine - expected) / scale;
      worst = std::max(worst, rel);
      if (rel > tolerance) {
        throw dvem::Error(dvem::Errc::kMismatch,
                          "query " + query.meta.query_id + ": score of " +
                              ranking.ranked[i].location_id + " differs by " +
                              dvem::io::format_double(rel) + " (relative)");
      }
    }
    ++checked;
  }
  std::cout << "oracle agreement over " << checked
            << " query(ies), max relative difference " << dvem::io::format_double(worst) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geo-distinctive visual element matching: location ranking over verified correspondences"};
  app.require_subcommand(1);

  dvem::io::DatasetPaths paths;
  auto add_dataset_options = [&paths](CLI::App* cmd) {
    cmd->add_option("--queries", paths.queries, "queries file")->required();
    cmd->add_option("--images", paths.images, "ranked candidate images file")->required();
    cmd->add_option("--correspondences", paths.correspondences, "correspondences file")->required();
  };

  ConfigArgs config_args;
  EvalArgs eval_args;

  CLI::App* validate = app.add_subcommand("validate", "check a dataset against the invariants");
  add_dataset_options(validate);

  CLI::App* cluster = app.add_subcommand("cluster", "extract candidate locations");
  std::string cluster_out = "locations.tsv";
  cluster->add_option("--queries", paths.queries, "queries file")->required();
  cluster->add_option("--images", paths.images, "ranked candidate images file")->required();
  cluster->add_option("--out", cluster_out, "output locations file");
  add_config_options(cluster, config_args);

  CLI::App* rank = app.add_subcommand("rank", "rank candidate locations per query");
  std::string method = "dvem";
  std::string out_dir = "out";
  std::string dump_clouds, dump_heatmap;
  bool with_eval = false;
  int workers = 1;
  add_dataset_options(rank);
  rank->add_option("--method", method, "dvem, gvr or visnn");
  rank->add_option("--out-dir", out_dir, "output directory");
  rank->add_flag("--eval", with_eval, "also evaluate against ground truth");
  rank->add_option("--workers", workers, "worker threads across queries");
  rank->add_option("--dump-clouds", dump_clouds, "write per-element cloud diagnostics CSV");
  rank->add_option("--dump-heatmap", dump_heatmap, "write per-region distinctiveness CSV");
  add_config_options(rank, config_args);
  add_eval_options(rank, eval_args);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a rankings file");
  std::string eval_queries, eval_locations, eval_rankings, eval_out = "out";
  eval_cmd->add_option("--queries", eval_queries, "queries file")->required();
  eval_cmd->add_option("--locations", eval_locations, "locations file")->required();
  eval_cmd->add_option("--rankings", eval_rankings, "rankings file")->required();
  eval_cmd->add_option("--out-dir", eval_out, "output directory");
  add_eval_options(eval_cmd, eval_args);

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset from a scenario spec");
  std::string spec_path, gen_out = "out";
  int gen_count = 1;
  gen->add_option("--spec", spec_path, "scenario spec JSON")->required();
  gen->add_option("--out-dir", gen_out, "output directory");
  gen->add_option("--count", gen_count, "number of scenarios (seeds increment from the spec's)");

  CLI::App* oracle = app.add_subcommand("oracle", "cross-check the engine against the brute-force scorer");
  double tolerance = 1e-9;
  add_dataset_options(oracle);
  oracle->add_option("--tolerance", tolerance, "maximum relative score difference");
  add_config_options(oracle, config_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(dvem::Errc::kUsage);
  }

  try {
    if (validate->parsed()) return run_validate(paths);
    if (cluster->parsed()) return run_cluster(paths, config_args, cluster_out);
    if (rank->parsed()) {
      return run_rank(paths, config_args, eval_args, method, out_dir, with_eval, workers,
                      dump_clouds, dump_heatmap);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_queries, eval_locations, eval_rankings, eval_args, eval_out);
    }
    if (gen->parsed()) return run_gen(spec_path, gen_out, gen_count);
    if (oracle->parsed()) return run_oracle(paths, config_args, tolerance);
  } catch (const dvem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return static_cast<int>(dvem::Errc::kInternal);
  }
  return static_cast<int>(dvem::Errc::kUsage);
}
