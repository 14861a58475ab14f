// Copyright 2026 The coopadmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// coopadmm: simulate, bench and validate subcommands.

#include <coopadmm/coopadmm.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace coopadmm;

namespace {

std::ofstream open_out(const fs::path & path)
{
  std::ofstream os(path);
  if (!os) { throw Error("cannot write " + path.string()); }
  return os;
}

int cmd_simulate(const std::string & file, const std::string & mode_name, const std::string & out_dir,
  std::optional<double> duration, std::size_t workers, bool trace)
{
  const Scenario sc = load_scenario(file);
  const SolverMode mode = parse_solver_mode(mode_name);
  fs::create_directories(out_dir);
  const std::string stem = sc.name + "_" + to_string(mode);

  SimulationOptions opt;
  opt.workers = workers;
  std::ofstream trace_os;
  if (trace) {
    trace_os = open_out(fs::path(out_dir) / (stem + "_trace.txt"));
    opt.trace = [&](int cycle, const TraceEntry & e) {
      trace_os << "cycle=" << cycle << ' ';
      write_trace_line(trace_os, e);
    };
  }
  const SimulationRun run = run_simulation(sc, mode, duration.value_or(sc.params.sim_duration), opt);

  auto csv = open_out(fs::path(out_dir) / (stem + "_trajectories.csv"));
  write_trajectories_csv(csv, run);
  auto json = open_out(fs::path(out_dir) / (stem + "_summary.json"));
  write_summary_json(json, run);

  std::cout << sc.name << " [" << to_string(mode) << "]: " << run.num_cycles() << " cycles, min distance "
            << fmt9(run.overall_min_distance()) << " m, " << run.violations.size()
            << " safety violations, " << fmt9(run.wall_seconds) << " s\n";
  if (run.capped_cycles() > 0) {
    std::cerr << "warning: ADMM hit max_iters in " << run.capped_cycles()
              << " cycles; the last consensus iterate was applied\n";
  }
  std::cout << "wrote " << (fs::path(out_dir) / (stem + "_trajectories.csv")).string() << " and "
            << (fs::path(out_dir) / (stem + "_summary.json")).string() << '\n';
  return 0;
}

int cmd_bench(const std::vector<int> & sizes, const std::string & out_dir, int cycles, std::uint64_t seed,
  std::size_t workers)
{
  for (const int n : sizes) {
    if (n < 1) { throw ParameterError("sizes must be >= 1"); }
  }
  fs::create_directories(out_dir);
  BenchOptions opt;
  opt.cycles = cycles;
  opt.seed = seed;
  opt.workers = workers;
  opt.progress = [](int N) { std::cerr << "bench: N=" << N << " done\n"; };
  const auto records = run_benchmark(sizes, opt);
  const BenchSummary summary = summarize_bench(records);

  auto rec_os = open_out(fs::path(out_dir) / "bench_records.csv");
  write_bench_records_csv(rec_os, records);
  auto sum_os = open_out(fs::path(out_dir) / "bench_summary.csv");
  write_bench_summary_csv(sum_os, summary);
  print_bench_summary(std::cout, summary);
  return 0;
}

int cmd_validate(const std::string & file)
{
  const Scenario sc = load_scenario(file);
  std::cout << file << ": ok (" << sc.name << ", " << sc.vehicles.size() << " vehicles, d_perc "
            << fmt9(sc.perception_distance()) << " m)\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Cooperative multi-vehicle trajectory planning with consensus ADMM"};
  app.require_subcommand(1);

  std::string scenario_file, mode = "parallel_admm", out_dir = "out";
  std::optional<double> duration;
  std::size_t workers = 0;
  bool trace = false;
  auto * sim = app.add_subcommand("simulate", "Run a closed-loop simulation");
  sim->add_option("scenario", scenario_file, "Scenario file")->required();
  sim->add_option("--mode", mode, "parallel_admm or centralized")
    ->check(CLI::IsMember({"parallel_admm", "centralized"}));
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--duration", duration, "Simulated seconds (default: scenario sim_duration)");
  sim->add_option("--workers", workers, "Worker threads (default: COOPADMM_WORKERS or hardware)");
  sim->add_flag("--trace", trace, "Write the per-iteration ADMM trace");

  std::vector<int> sizes{4, 8, 16, 32, 64, 100};
  int cycles = 10;
  std::uint64_t seed = 0;
  std::size_t bench_workers = 1;
  std::string bench_out = "out";
  auto * bench = app.add_subcommand("bench", "Scaling benchmark, parallel ADMM vs centralized");
  bench->add_option("--sizes", sizes, "Vehicle counts")->delimiter(',');
  bench->add_option("--out", bench_out, "Output directory");
  bench->add_option("--cycles", cycles, "Receding-horizon cycles per size");
  bench->add_option("--seed", seed, "Scenario seed");
  bench->add_option("--workers", bench_workers, "Worker threads for ADMM (0 = default)");

  std::string validate_file;
  auto * val = app.add_subcommand("validate", "Check a scenario file");
  val->add_option("scenario", validate_file, "Scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) { return cmd_simulate(scenario_file, mode, out_dir, duration, workers, trace); }
    if (*bench) { return cmd_bench(sizes, bench_out, cycles, seed, bench_workers); }
    if (*val) { return cmd_validate(validate_file); }
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
