#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsn/election_game.hpp"
#include "wsn/experiment.hpp"

namespace {

struct Range {
  double start;
  double stop;
  double step;
};

Range parse_range(const std::string& text, double default_step) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = text.find(':', pos);
    parts.push_back(std::stod(text.substr(pos, colon - pos)));
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() > 3) throw CLI::ValidationError("range", "expected start[:stop[:step]]");
  Range r{parts[0], parts.size() > 1 ? parts[1] : parts[0], parts.size() > 2 ? parts[2] : default_step};
  if (r.step <= 0.0 || r.stop < r.start) throw CLI::ValidationError("range", "empty range '" + text + "'");
  return r;
}

std::vector<double> expand(const Range& r) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((r.stop - r.start) / r.step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(r.start + static_cast<double>(i) * r.step);
  return out;
}

void print_groups(const wsn::AggregateReport& report) {
  std::printf("%-44s %5s %9s %11s %9s %8s %8s\n", "scenario", "runs", "lifetime", "throughput",
              "attacks", "timely", "eff");
  for (const auto& g : report.groups) {
    std::printf("%-44s %2d/%-2d %9.1f %11.1f %9.1f %8.4f %8.4f\n", g.scenario.c_str(), g.completed,
                g.completed + g.failed, g.lifetime.mean, g.throughput.mean, g.total_attacks.mean,
                g.timely_rate.mean, g.effective_energy_rate.mean);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure clustering simulator for wireless sensor networks"};
  app.require_subcommand(1);

  std::string plan_path;
  std::string out_dir;
  unsigned jobs = 0;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Run every scenario, mode and seed of a plan");
  run->add_option("plan", plan_path, "Plan file (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, std::string("Output directory (default $") + wsn::kOutDirEnv + " or ./out)");
  run->add_option("--jobs,-j", jobs, "Parallel runs (default: hardware threads)");
  run->add_flag("--verbose,-v", verbose, "Log each finished run");

  std::string report_path;
  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "Write plot-data CSVs from a report");
  plot->add_option("report", report_path, "report.json written by run")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_dir, "Directory for the CSVs (default: <report dir>/plots)");

  std::string n_range = "2:10";
  std::string w_range = "6";
  std::string t_range = "0:1:0.1";
  auto* sweep = app.add_subcommand("sweep-ess", "Tabulate the equilibrium head probability");
  sweep->add_option("--n", n_range, "Player count range start[:stop[:step]]")->capture_default_str();
  sweep->add_option("--w", w_range, "Energy ratio range")->capture_default_str();
  sweep->add_option("--tavr", t_range, "Average suspicious trust range")->capture_default_str();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a plan without running it");
  validate->add_option("plan", validate_path, "Plan file (INI)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto plan = wsn::load_plan(plan_path);
      wsn::ExecuteOptions opts;
      opts.out_dir = wsn::resolve_out_dir(out_dir);
      opts.jobs = jobs;
      opts.quiet = !verbose;
      const auto report = wsn::execute(plan, opts);
      wsn::emit_plots(report, opts.out_dir / "plots");
      print_groups(report);
      for (const auto& r : report.runs) {
        if (!r.ok) std::fprintf(stderr, "run %s seed %llu failed: %s\n", r.scenario.c_str(),
                                static_cast<unsigned long long>(r.seed), r.error.c_str());
      }
      std::printf("report: %s\n", (opts.out_dir / "report.json").string().c_str());
      return report.all_ok() ? 0 : 1;
    }
    if (*plot) {
      const auto report = wsn::read_report_json(report_path);
      const std::filesystem::path dir =
          plot_dir.empty() ? std::filesystem::path(report_path).parent_path() / "plots" : std::filesystem::path(plot_dir);
      for (const auto& p : wsn::emit_plots(report, dir)) std::printf("%s\n", p.string().c_str());
      return 0;
    }
    if (*sweep) {
      std::printf("n,w,t_avr,p2_raw,p2\n");
      for (double n : expand(parse_range(n_range, 1.0))) {
        for (double w : expand(parse_range(w_range, 1.0))) {
          for (double t : expand(parse_range(t_range, 0.1))) {
            const wsn::GameContext ctx{static_cast<int>(n), w, t};
            const auto raw = wsn::ess_probability_raw(ctx);
            const auto p = wsn::ess_probability(ctx);
            std::printf("%d,%.10g,%.10g,", ctx.n_players, w, t);
            if (raw) std::printf("%.17g", *raw);
            std::printf(",");
            if (p) std::printf("%.17g", *p);
            std::printf("\n");
          }
        }
      }
      return 0;
    }
    if (*validate) {
      const auto plan = wsn::load_plan(validate_path);
      const auto scenarios = plan.scenarios();
      std::printf("plan %s: %zu scenarios x %zu seeds = %zu runs\n", plan.name.c_str(),
                  scenarios.size(), plan.seeds.size(), plan.run_count());
      for (const auto& s : scenarios) std::printf("  %s\n", s.name.c_str());
      return 0;
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
  return 0;
}
