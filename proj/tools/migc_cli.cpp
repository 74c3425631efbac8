// migc: build querying trees and run the benchmark scenarios from the
// command line, or serve the session API.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "migc/coders.hpp"
#include "migc/io.hpp"
#include "migc/scenarios/battleship.hpp"
#include "migc/scenarios/coding_bench.hpp"
#include "migc/scenarios/dna.hpp"
#include "migc/service.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw migc::Error(migc::ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
  if (!f) throw migc::Error(migc::ErrorCode::InvalidArgument, "write failed for " + path);
}

/// Bench outputs land in a directory; "-" streams every file to stdout.
std::string in_dir(const std::string& dir, const char* name) {
  return dir == "-" ? "-" : (fs::path(dir) / name).string();
}

void emit(const std::string& dir, const char* name, const std::string& text) {
  const std::string path = in_dir(dir, name);
  write_text(path, text);
  if (path != "-") std::cerr << "wrote " << path << "\n";
}

migc::SearchBudget parse_budget(const std::string& mode, std::uint64_t limit) {
  migc::SearchBudget b;
  b.exact_state_limit = limit;
  if (mode == "exact") {
    b.mode = migc::SearchMode::exact;
  } else if (mode == "heuristic") {
    b.mode = migc::SearchMode::heuristic;
  } else {
    b.mode = migc::SearchMode::automatic;
  }
  return b;
}

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-information-gain querying trees and benchmarks"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, std::string& out, const std::string& out_help) {
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", out, out_help)->capture_default_str();
  };

  // build
  std::string dist_path, queries_path, coder_name = "migc", dot_path, budget_mode = "automatic";
  std::size_t arity = 2;
  std::uint64_t state_limit = std::uint64_t{1} << 24;
  bool allow_zero = false;
  auto* build = app.add_subcommand("build", "Build a querying tree for one instance");
  build->add_option("--dist", dist_path, "Distribution JSON file")->required()->check(CLI::ExistingFile);
  build->add_option("--queries", queries_path, "Query set JSON file (default: unconstrained)")
      ->check(CLI::ExistingFile);
  build->add_option("--coder", coder_name, "migc | gbsc | huffman | shannon | bruteforce")->capture_default_str();
  build->add_option("--d", arity, "Arity when --queries is absent")->capture_default_str();
  build->add_option("--dot", dot_path, "Also write the tree as DOT");
  build->add_flag("--allow-zero", allow_zero, "Drop zero-mass symbols instead of rejecting them");
  build->add_option("--budget", budget_mode, "Partition search: automatic | exact | heuristic")
      ->check(CLI::IsMember({"automatic", "exact", "heuristic"}))
      ->capture_default_str();
  build->add_option("--state-limit", state_limit, "Exact partition search limit on D^k")->capture_default_str();
  std::string build_out = "-";
  add_common(build, build_out, "Output JSON file, - for stdout");

  // bench-coding
  migc::BenchConfig coding;
  auto* bench_coding = app.add_subcommand("bench-coding", "Huffman / MIGC / Shannon lengths on random sources");
  bench_coding->add_option("--d", coding.arity, "Arity")->capture_default_str()->check(CLI::Range(2, 64));
  bench_coding->add_option("--n-min", coding.n_min, "Smallest alphabet")->capture_default_str();
  bench_coding->add_option("--n-max", coding.n_max, "Largest alphabet")->capture_default_str();
  bench_coding->add_option("--samples", coding.samples_per_n, "Samples per alphabet size")->capture_default_str();
  bench_coding->add_option("--workers", common.workers, "Worker threads, 0 = all cores")->capture_default_str();
  std::string coding_out = ".";
  add_common(bench_coding, coding_out, "Output directory for fig5.csv and gaps.csv");

  // bench-dna
  std::size_t exons = 6, dna_samples = 1000;
  auto* bench_dna = app.add_subcommand("bench-dna", "Two-gene interval probing benchmark");
  bench_dna->add_option("--exons", exons, "Number of exons")->capture_default_str();
  bench_dna->add_option("--samples", dna_samples, "Random target distributions")->capture_default_str();
  bench_dna->add_option("--workers", common.workers, "Worker threads, 0 = all cores")->capture_default_str();
  std::string dna_out = ".";
  add_common(bench_dna, dna_out, "Output directory for dna.csv");

  // bench-battleship
  migc::BattleshipConfig ship;
  std::size_t games = 100;
  std::string stop = "identify", layouts_path;
  auto* bench_ship = app.add_subcommand("bench-battleship", "Three-outcome battleship self-play");
  bench_ship->add_option("--games", games, "Games to play")->capture_default_str();
  bench_ship->add_option("--layouts", ship.layout_count, "Sampled layouts")->capture_default_str();
  bench_ship->add_option("--stop", stop, "identify | sink")
      ->check(CLI::IsMember({"identify", "sink"}))
      ->capture_default_str();
  bench_ship->add_option("--rows", ship.rows, "Board rows")->capture_default_str();
  bench_ship->add_option("--cols", ship.cols, "Board columns")->capture_default_str();
  bench_ship->add_flag("--dedup", ship.dedup, "Reject repeated boards while sampling");
  bench_ship->add_option("--layouts-out", layouts_path, "Also write the sampled layouts as JSON");
  bench_ship->add_option("--workers", common.workers, "Worker threads, 0 = all cores")->capture_default_str();
  std::string ship_out = ".";
  add_common(bench_ship, ship_out, "Output directory for battleship.csv and traces.csv");

  // serve
  int port = 8080;
  std::string host = "0.0.0.0";
  long ttl = 3600;
  auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
  serve->add_option("--port", port, "Listen port")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--ttl", ttl, "Idle session lifetime in seconds")->capture_default_str();
  serve->add_option("--seed", common.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error code=UsageError message=\"" << e.what() << "\"\n";
    return 1;
  }

  std::cerr << "seed=" << common.seed << "\n";
  try {
    if (*build) {
      const migc::Json dist_json = migc::load_json_file(dist_path);
      const migc::Json qset_json =
          queries_path.empty() ? migc::Json{{"d", arity}, {"unconstrained", true}} : migc::load_json_file(queries_path);
      const migc::Instance inst = migc::instance_from_json(dist_json, qset_json, {.allow_zero = allow_zero});
      const auto parsed = migc::parse_coder(coder_name);
      if (!parsed) throw migc::Error(migc::ErrorCode::InvalidArgument, "unknown coder '" + coder_name + "'");
      const migc::Coder coder = *parsed;
      const migc::CodedTree built =
          migc::build_tree(coder, inst.dist, inst.qset, parse_budget(budget_mode, state_limit));
      if (const migc::TreeVerdict v = migc::tree_validate(built.tree, inst.dist, inst.qset); !v) {
        throw migc::Error(migc::ErrorCode::InvalidTree, v.reason);
      }
      const migc::Json out{{"coder", std::string(migc::to_string(coder))},
                           {"d", inst.qset.arity()},
                           {"tree", migc::tree_to_json(built.tree)},
                           {"report", migc::report_to_json(built.report, inst.dist)}};
      write_text(build_out, out.dump(2) + "\n");
      if (!dot_path.empty()) write_text(dot_path, migc::tree_to_dot(built.tree, inst.dist));
      std::cerr << "expected_length=" << migc::format_real(built.report.expected_length)
                << " entropy=" << migc::format_real(built.report.entropy_base_d) << "\n";
    } else if (*bench_coding) {
      coding.seed = common.seed;
      coding.workers = common.workers;
      const migc::CodingBenchResult r = migc::bench_coding(coding);
      emit(coding_out, "fig5.csv", migc::coding_means_csv(r));
      emit(coding_out, "gaps.csv", migc::coding_gaps_csv(r));
    } else if (*bench_dna) {
      const migc::DnaBenchResult r = migc::dna_bench(exons, dna_samples, common.seed, {}, common.workers);
      emit(dna_out, "dna.csv", migc::dna_csv(r));
      std::cerr << "mean_migc=" << migc::format_real(r.mean_migc)
                << " mean_bruteforce=" << migc::format_real(r.mean_bruteforce)
                << " mean_gbsc=" << migc::format_real(r.mean_gbsc) << "\n";
    } else if (*bench_ship) {
      ship.seed = common.seed;
      ship.stop_rule = migc::parse_stop_rule(stop);
      if (!layouts_path.empty()) write_text(layouts_path, migc::layouts_to_json(migc::battleship_layouts(ship)).dump() + "\n");
      const migc::BattleshipBenchResult r = migc::battleship_bench(ship, games, common.workers);
      emit(ship_out, "battleship.csv", migc::battleship_csv(r));
      emit(ship_out, "traces.csv", migc::traces_csv(r));
      std::cerr << "mean_tries=" << migc::format_real(r.mean_tries) << "\n";
    } else if (*serve) {
      migc::Service service(migc::ServiceOptions{.idle_ttl = std::chrono::seconds(ttl)});
      httplib::Server server;
      migc::register_routes(server, service);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << host << ":" << port << std::endl;
      if (!server.listen(host, port)) {
        throw migc::Error(migc::ErrorCode::InvalidArgument, "cannot listen on " + host + ":" + std::to_string(port));
      }
      g_server = nullptr;
    }
  } catch (const migc::Error& e) {
    std::cerr << "error code=" << e.code_name() << " message=\"" << e.what() << "\"\n";
    const bool infeasible =
        e.code() == migc::ErrorCode::InfeasibleQuerySet || e.code() == migc::ErrorCode::ImpossibleFleet;
    return infeasible ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error code=InternalError message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}
