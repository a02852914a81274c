#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "wsn/experiment.hpp"
#include "wsn/sim_engine.hpp"

using namespace wsn;

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

constexpr const char* kSmallPlan = R"(
[scenario]
node_count = 20
area = 50x50
max_rounds = 400

[experiment]
name = tiny
seeds = 1:3
modes = egscfo, baseline
malicious_fractions = 0.1, 0.2
)";

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("empty plan yields the default scenario") {
  const auto plan = parse_plan("");
  CHECK(plan.seeds == std::vector<std::uint64_t>{1});
  CHECK(plan.modes == std::vector<ProtocolMode>{ProtocolMode::kEgscfo});
  const auto s = plan.scenarios();
  REQUIRE(s.size() == 1);
  CHECK(s[0].node_count == 100);
  CHECK(s[0].width == 100.0);
  CHECK(s[0].height == 100.0);
  CHECK(s[0].malicious_fraction == 0.2);
  CHECK(s[0].p_int == 0.07);
  CHECK(s[0].radio.e_elec == 50e-9);
  CHECK(s[0].name == "plan-egscfo-mf20-100x100-n100");
}

TEST_CASE("reference parameter names are accepted verbatim and converted to SI") {
  const auto plan = parse_plan(R"(
[ScenarioConfig]
E_0 = 1.5
[game]
p_int = 0.1
N_NCH = 3
w = 4
[RadioParams]
E_elec_nJ_per_bit = 40
eps_fs_pJ_per_bit_m2 = 12
eps_amp_pJ_per_bit_m4 = 0.002
E_DA_nJ_per_bit = 6
E_h_nJ_per_bit = 4
E_m_nJ_per_s = 20
D_m_s = 8
[channel]
alpha_0 = 2
alpha_1 = 8
[outlier]
d_m = 0.04
d_mbg = 0.2
T_s = 30
[attack]
P_DP = 0.3
P_DL = 0.1
D_m = 5
[noise]
P_LOS = 0.25
P_DEL = 0.15
)");
  const auto& b = plan.base;
  CHECK(b.initial_energy == 1.5);
  CHECK(b.p_int == 0.1);
  CHECK(b.n_nch == 3);
  CHECK(b.w == 4.0);
  CHECK(b.radio.e_elec == doctest::Approx(40e-9));
  CHECK(b.radio.eps_fs == doctest::Approx(12e-12));
  CHECK(b.radio.eps_amp == doctest::Approx(0.002e-12));
  CHECK(b.radio.e_da == doctest::Approx(6e-9));
  CHECK(b.radio.e_h == doctest::Approx(4e-9));
  CHECK(b.radio.e_m == doctest::Approx(20e-9));
  CHECK(b.radio.d_max_overhear == 8.0);
  CHECK(b.channel.alpha_bad == 2.0);
  CHECK(b.channel.alpha_good == 8.0);
  CHECK(b.outlier.d_m == 0.04);
  CHECK(b.outlier.d_mbg == 0.2);
  CHECK(b.outlier.t_s == 30);
  CHECK(b.attack.p_dp == 0.3);
  CHECK(b.attack.p_dl == 0.1);
  CHECK(b.attack.d_max == 5.0);
  CHECK(b.noise.p_los == 0.25);
  CHECK(b.noise.p_del == 0.15);
}

TEST_CASE("parse and validation errors") {
  try {
    parse_plan("[scenario]\nnode_count = 50\nbogus_key = 1\n", "p.ini");
    FAIL("expected a parse error");
  } catch (const PlanParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("scenario.bogus_key") != std::string::npos);
    CHECK(msg.find("p.ini:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_plan("[nowhere]\nx = 1\n"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("[scenario]\nnode_count = lots\n"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("[scenario\n"), PlanParseError);
  CHECK_THROWS_AS(parse_plan("[experiment]\nmodes = egscfo, leach\n"), PlanParseError);

  CHECK_THROWS_AS(parse_plan("[scenario]\nmalicious_fraction = 1.0\n"), PlanValidationError);
  try {
    parse_plan("[scenario]\nnode_count = 2\n[attack]\nP_DP = 2\n[experiment]\nseeds = 1, 1\n");
    FAIL("expected a validation error");
  } catch (const PlanValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("node_count") != std::string::npos);
    CHECK(msg.find("P_DP") != std::string::npos);
    CHECK(msg.find("seeds") != std::string::npos);
  }
}

TEST_CASE("sweeps expand to labelled scenarios") {
  const auto plan = parse_plan(R"(
[experiment]
seeds = 1, 2, 3
modes = egscfo, fuzzy-only
areas = 100x100, 200x200
node_counts = 100
)");
  const auto s = plan.scenarios();
  CHECK(s.size() == 4);
  CHECK(plan.run_count() == 12);
  std::set<std::string> names;
  for (const auto& c : s) names.insert(c.name);
  CHECK(names.size() == 4);
  CHECK(names.count("plan-fuzzy-only-mf20-200x200-n100") == 1);
}

TEST_CASE("the shipped default plan spells out the built-in defaults") {
  auto shipped = load_plan(std::filesystem::path(WSN_SOURCE_DIR) / "configs" / "default.ini");
  auto empty = parse_plan("");
  shipped.base.max_rounds = empty.base.max_rounds = 300;
  const auto dir = testing::scratch_dir("default-plan");
  RunRecord runs[2] = {Simulation(empty.scenarios()[0]).run(), Simulation(shipped.scenarios()[0]).run()};
  write_rounds_csv(runs[0], dir / "empty.csv");
  write_rounds_csv(runs[1], dir / "shipped.csv");
  CHECK(testing::slurp(dir / "empty.csv") == testing::slurp(dir / "shipped.csv"));
}

TEST_CASE("load_plan names the plan after the file") {
  const auto dir = testing::scratch_dir("plan-load");
  testing::spit(dir / "grid.ini", "[experiment]\nseeds = 4\n");
  const auto plan = load_plan(dir / "grid.ini");
  CHECK(plan.name == "grid");
  CHECK(plan.seeds == std::vector<std::uint64_t>{4});
  CHECK_THROWS_AS(load_plan(dir / "missing.ini"), PlanParseError);
}

TEST_CASE("describe computes mean and sample deviation") {
  const auto s = describe({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  CHECK(s.mean == 5.0);
  CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(describe({3.5}).stddev == 0.0);
  CHECK(describe({}).n == 0);
}

TEST_CASE("execute writes raw runs, a report and plot data that match") {
  const auto plan = parse_plan(kSmallPlan);
  const auto dir = testing::scratch_dir("execute");
  ExecuteOptions opts;
  opts.out_dir = dir / "a";
  opts.jobs = 2;
  const auto report = execute(plan, opts);
  REQUIRE(report.runs.size() == 12);
  CHECK(report.all_ok());
  REQUIRE(report.groups.size() == 4);

  // Aggregates recomputed from the raw CSVs.
  for (const auto& g : report.groups) {
    CHECK(g.completed == 3);
    std::vector<double> lifetime, timely, attacks;
    std::vector<std::vector<double>> cycles;
    for (const auto& r : report.runs) {
      if (r.scenario != g.scenario) continue;
      const auto rows = read_rounds_csv(opts.out_dir / r.rounds_csv);
      const auto s = summarize(rows, g.benign_count);
      lifetime.push_back(static_cast<double>(s.lifetime));
      timely.push_back(s.timely_rate);
      attacks.push_back(static_cast<double>(s.drop_attacks + s.delay_attacks));
      const auto cm = cycle_metrics(rows, 50);
      for (std::size_t i = 0; i < cm.size(); ++i) {
        if (cycles.size() <= i) cycles.resize(i + 1);
        cycles[i].push_back(cm[i].avg_malicious_clusters);
      }
    }
    CHECK(describe(lifetime).mean == g.lifetime.mean);
    CHECK(describe(lifetime).stddev == g.lifetime.stddev);
    CHECK(describe(timely).mean == g.timely_rate.mean);
    CHECK(describe(attacks).mean == g.total_attacks.mean);
    REQUIRE(cycles.size() == g.cycles.size());
    for (std::size_t i = 0; i < cycles.size(); ++i) CHECK(describe(cycles[i]).mean == g.cycles[i].mean);
  }

  // The report on disk reproduces the in-memory aggregates.
  const auto back = read_report_json(opts.out_dir / "report.json");
  REQUIRE(back.groups.size() == report.groups.size());
  for (std::size_t i = 0; i < back.groups.size(); ++i) {
    CHECK(back.groups[i].scenario == report.groups[i].scenario);
    CHECK(back.groups[i].lifetime.mean == report.groups[i].lifetime.mean);
    CHECK(back.groups[i].effective_energy_rate.stddev == report.groups[i].effective_energy_rate.stddev);
    CHECK(back.groups[i].cycles.size() == report.groups[i].cycles.size());
  }

  const auto files = emit_plots(back, dir / "plots");
  CHECK(files.size() == 8);
  const auto mc = read_csv(dir / "plots" / "malicious_clusters_vs_cycle.csv");
  std::size_t expected_rows = 1;
  for (const auto& g : report.groups) expected_rows += g.cycles.size();
  CHECK(mc.size() == expected_rows);
  const auto lt = read_csv(dir / "plots" / "lifetime.csv");
  REQUIRE(lt.size() == 5);
  CHECK(lt[0][6] == "mean");
  CHECK(std::stod(lt[1][6]) == report.groups[0].lifetime.mean);

  // Same plan again: byte-identical raw files, single-threaded this time.
  ExecuteOptions again = opts;
  again.out_dir = dir / "b";
  again.jobs = 1;
  const auto second = execute(plan, again);
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    CHECK(testing::slurp(opts.out_dir / report.runs[i].rounds_csv) ==
          testing::slurp(again.out_dir / second.runs[i].rounds_csv));
  }
  CHECK(testing::slurp(opts.out_dir / "report.json") == testing::slurp(again.out_dir / "report.json"));
}

TEST_CASE("one-seed plan aggregates equal the single run") {
  auto plan = parse_plan("[scenario]\nnode_count = 12\narea = 40x40\nmax_rounds = 200\n");
  const auto dir = testing::scratch_dir("one-seed");
  const auto report = execute(plan, {dir, 1, true});
  REQUIRE(report.runs.size() == 1);
  const auto& r = report.runs[0];
  const auto& g = report.groups[0];
  CHECK(g.lifetime.mean == static_cast<double>(r.summary.lifetime));
  CHECK(g.throughput.mean == static_cast<double>(r.summary.throughput));
  CHECK(g.timely_rate.mean == r.summary.timely_rate);
  CHECK(g.timely_rate.stddev == 0.0);
  CHECK(g.cycles.size() == r.cycles.size());
  CHECK(emit_plots(report, dir / "plots").size() == 8);
  CHECK(read_csv(dir / "plots" / "malicious_clusters_vs_cycle.csv").size() == r.cycles.size() + 1);
}

TEST_CASE("failed runs are recorded and the rest continue") {
  auto plan = parse_plan("[scenario]\nnode_count = 12\narea = 40x40\nmax_rounds = 100\n[experiment]\nseeds = 1:2\n");
  const auto dir = testing::scratch_dir("failure");
  plan.base.fuzzy_sets = dir / "does-not-exist.json";
  const auto report = execute(plan, {dir, 1, true});
  CHECK_FALSE(report.all_ok());
  CHECK(report.runs.size() == 2);
  CHECK(report.groups[0].failed == 2);
  CHECK(report.groups[0].completed == 0);
  CHECK_FALSE(report.runs[0].error.empty());
}

TEST_CASE("output directory resolution") {
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_out_dir("") == "out");
  ::setenv(kOutDirEnv, "/tmp/from-env", 1);
  CHECK(resolve_out_dir("") == "/tmp/from-env");
  CHECK(resolve_out_dir("cli") == "cli");
  ::unsetenv(kOutDirEnv);
}

}  // TEST_SUITE
