#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "test_support.hpp"
#include "wsn/sim_engine.hpp"

using namespace wsn;

namespace {

ScenarioConfig small_config(std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.name = "unit";
  c.seed = seed;
  c.node_count = 30;
  c.width = 60;
  c.height = 60;
  return c;
}

void make_heads(Simulation& sim, std::initializer_list<NodeId> ids) {
  for (NodeId id : ids) sim.node(id).role = Role::kHead;
}

OutlierState converged_state(double high, double low) {
  OutlierState s;
  s.active = true;
  s.converged = true;
  s.av_htg = high;
  s.av_ltg = low;
  return s;
}

}  // namespace

TEST_SUITE("sim_engine") {

TEST_CASE("setup places the configured number of malicious nodes") {
  ScenarioConfig c;
  Simulation sim(c);
  int bad = 0;
  for (const auto& n : sim.nodes()) {
    bad += n.malicious;
    CHECK(n.position.x >= 0.0);
    CHECK(n.position.x <= c.width);
    CHECK(n.residual == c.initial_energy);
  }
  CHECK(bad == 20);

  c.malicious_fraction = 0.0;
  Simulation clean(c);
  for (const auto& n : clean.nodes()) CHECK_FALSE(n.malicious);

  Simulation again(ScenarioConfig{});
  for (std::size_t i = 0; i < sim.nodes().size(); ++i) {
    CHECK(sim.nodes()[i].position.x == again.nodes()[i].position.x);
    CHECK(sim.nodes()[i].malicious == again.nodes()[i].malicious);
  }
}

TEST_CASE("config validation lists every problem") {
  ScenarioConfig c;
  c.malicious_fraction = 1.0;
  c.node_count = 2;
  c.attack.p_dp = 0.8;
  c.attack.p_dl = 0.5;
  const auto v = c.violations();
  CHECK(v.size() == 3);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(Simulation{c}, ConfigError);
  CHECK(ScenarioConfig{}.violations().empty());
  CHECK(ScenarioConfig{}.base_station().x == 125.0);
  CHECK(ScenarioConfig{}.broadcast_distance() == doctest::Approx(std::sqrt(2.0) * 100.0));
  CHECK(parse_mode("fuzzy-only") == ProtocolMode::kFuzzyOnly);
  CHECK_THROWS_AS(parse_mode("leach"), ConfigError);
}

TEST_CASE("first-round head count follows p_int") {
  ScenarioConfig c;
  double total = 0.0;
  constexpr int kSeeds = 1000;
  for (int s = 1; s <= kSeeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    Simulation sim(c);
    total += static_cast<double>(sim.elect_heads(0).size());
  }
  CHECK(total / kSeeds == doctest::Approx(7.0).epsilon(1.0 / 7.0));
}

TEST_CASE("heads sit out the eligibility window; dead nodes never declare") {
  ScenarioConfig c = small_config();
  c.p_int = 0.5;
  Simulation sim(c);
  sim.node(3).alive = false;
  std::map<NodeId, Round> last;
  for (Round r = 0; r < 20; ++r) {
    for (NodeId h : sim.elect_heads(r)) {
      CHECK(h != 3);
      if (last.count(h)) CHECK(r - last[h] > eligibility_window(0.5));
      last[h] = r;
    }
  }
}

TEST_CASE("hand-traced four-node rounds") {
  // Heads 0 (benign) and 3 (malicious, always drops); members 1 and 2.
  ScenarioConfig c;
  c.mode = ProtocolMode::kEgscfo;
  c.ideal_channel = true;
  c.attack.p_dp = 1.0;
  c.attack.p_dl = 0.0;
  const std::vector<Position> pos{{50, 50}, {40, 50}, {50, 90}, {50, 80}};
  Simulation sim(c, pos, {false, false, false, true}, TraceOptions{false, true, 0});

  make_heads(sim, {0, 3});
  const auto clusters = sim.join_clusters({0, 3}, 0);
  CHECK(clusters.heads == std::vector<NodeId>{0, 3});
  CHECK(clusters.members.at(0) == std::vector<NodeId>{1});
  CHECK(clusters.members.at(3) == std::vector<NodeId>{2});
  CHECK(clusters.idle.empty());

  const auto transfer = sim.transfer_phase(clusters, 0);
  REQUIRE(transfer.forwards.size() == 2);
  CHECK(transfer.forwards[0].outcome == ForwardOutcome::kClean);
  CHECK(transfer.forwards[1].outcome == ForwardOutcome::kDropped);
  REQUIRE(transfer.observations.size() == 2);
  CHECK(transfer.observations[0].outcome == Outcome::kDelivered);
  CHECK(transfer.observations[1].outcome == Outcome::kDropped);

  sim.trust_update_phase(transfer, 0);
  const auto m = sim.collect_metrics(clusters, transfer, 0);

  // Join: member tx of 300 bits over 10 m, head rx of 300 bits.
  const double join_tx = 300 * 50e-9 + 300 * 10e-12 * 100;  // 1.53e-5
  const double join_rx = 300 * 55e-9;                       // 1.65e-5
  // Data: member tx of 3000 bits over 10 m, head rx.
  const double data_tx = 3000 * 50e-9 + 3000 * 10e-12 * 100;  // 1.53e-4
  const double data_rx = 3000 * 55e-9;                        // 1.65e-4
  // Head 0 forwards 75 m to the base station at (125, 50): free-space branch.
  const double forward = 3000 * 50e-9 + 3000 * 10e-12 * 75 * 75;  // 3.1875e-4
  // Member 1 overhears an immediate forward for 0.1 s; member 2 waits D_m.
  const double watch_ok = 0.1 * 10e-9 + 3000 * 5e-9;
  const double watch_drop = 10 * 10e-9;

  CHECK(m.heads == 2);
  CHECK(m.malicious_heads == 1);
  CHECK(m.malicious_cluster_count == 1);
  CHECK(m.drop_attacks == 1);
  CHECK(m.delay_attacks == 0);
  CHECK(m.packets_generated == 2);
  CHECK(m.packets_delivered == 1);
  CHECK(m.packets_delivered_timely == 1);
  CHECK(m.alive_count == 4);
  CHECK(m.alive_benign_count == 3);
  const double total = 2 * (join_tx + join_rx) + 2 * (data_tx + data_rx) + forward + watch_ok + watch_drop;
  CHECK(m.energy_spent_total == doctest::Approx(total).epsilon(1e-12));
  CHECK(m.energy_spent_effective == doctest::Approx(data_tx + data_rx + forward).epsilon(1e-12));

  CHECK(sim.nodes()[1].residual == doctest::Approx(2.0 - join_tx - data_tx - watch_ok).epsilon(1e-14));
  CHECK(sim.nodes()[0].residual == doctest::Approx(2.0 - join_rx - data_rx - forward).epsilon(1e-14));
  CHECK(sim.nodes()[3].residual == doctest::Approx(2.0 - join_rx - data_rx).epsilon(1e-14));

  const FuzzyTrustSystem fls;
  CHECK(sim.nodes()[1].ledger.trust(0) == fls.evaluate_trust(0.0, 0.0));
  CHECK(sim.nodes()[2].ledger.trust(3) == fls.evaluate_trust(1.0, 0.0));
  CHECK_FALSE(sim.nodes()[2].outlier.active);
  CHECK(sim.nodes()[2].past_heads == std::deque<NodeId>{3});

  // Next round both members hold evidence on their previous head, so rule (a)
  // swaps them onto the untouched one even though it is farther.
  make_heads(sim, {0, 3});
  sim.node(1).role = Role::kIdle;
  sim.node(2).role = Role::kIdle;
  const auto second = sim.join_clusters({0, 3}, 1);
  CHECK(second.members.at(0) == std::vector<NodeId>{2});
  CHECK(second.members.at(3) == std::vector<NodeId>{1});
  const auto m2 = sim.collect_metrics(second, TransferResult{}, 1);
  CHECK(m2.malicious_heads == 1);
  CHECK(m2.malicious_cluster_count == 1);
}

TEST_CASE("gated joining prefers trusted heads, then degrades") {
  ScenarioConfig c;
  c.ideal_channel = true;
  const std::vector<Position> pos{{50, 50}, {40, 50}, {70, 50}, {0, 0}};
  Simulation sim(c, pos, {false, false, false, false});
  auto& member = sim.node(1);
  member.outlier = converged_state(0.9, 0.3);
  member.ledger.record(0).trust = 0.35;  // nearer, suspicious
  member.ledger.record(2).trust = 0.88;  // farther, trusted
  sim.node(3).alive = false;
  make_heads(sim, {0, 2});
  auto clusters = sim.join_clusters({0, 2}, 5);
  CHECK(clusters.members.at(2) == std::vector<NodeId>{1});
  CHECK(clusters.degraded_joins == 0);

  // Both suspicious and the member is ineligible: degraded join to the
  // higher-trust candidate.
  member.ledger.record(2).trust = 0.4;
  member.policy.last_head_round = 4;
  make_heads(sim, {0, 2});
  member.role = Role::kIdle;
  clusters = sim.join_clusters({0, 2}, 5);
  CHECK(clusters.members.at(2) == std::vector<NodeId>{1});
  CHECK(clusters.degraded_joins == 1);
  CHECK(clusters.self_declared.empty());

  // Eligible instead: it declares itself head.
  member.policy.last_head_round.reset();
  make_heads(sim, {0, 2});
  member.role = Role::kIdle;
  clusters = sim.join_clusters({0, 2}, 5);
  CHECK(clusters.self_declared == std::vector<NodeId>{1});
  CHECK(sim.nodes()[1].role == Role::kHead);

  // Unconverged nodes prefer the nearest untouched head.
  Simulation fresh(c, pos, {false, false, false, false});
  fresh.node(1).ledger.record(0).trust = 0.9;
  fresh.node(3).alive = false;
  make_heads(fresh, {0, 2});
  clusters = fresh.join_clusters({0, 2}, 0);
  CHECK(clusters.members.at(2) == std::vector<NodeId>{1});
}

TEST_CASE("suspicious heads are never asked for recommendations") {
  ScenarioConfig c;
  c.ideal_channel = true;
  const std::vector<Position> pos{{50, 50}, {40, 50}, {60, 60}, {10, 10}};
  Simulation sim(c, pos, {false, false, false, false});
  auto& member = sim.node(1);
  member.outlier = converged_state(0.9, 0.3);
  member.ledger.record(0).trust = 0.35;
  sim.node(0).ledger.record(2).trust = 0.7;
  sim.node(0).ledger.record(3).trust = 0.6;

  TransferResult t;
  t.observations.push_back({1, 0, Outcome::kDropped});
  sim.trust_update_phase(t, 0);
  CHECK(sim.nodes()[1].ledger.find(2) == nullptr);
  CHECK(sim.nodes()[1].ledger.find(3) == nullptr);

  // A trusted head shares its positive entries.
  Simulation sim2(c, pos, {false, false, false, false});
  auto& m2 = sim2.node(1);
  m2.outlier = converged_state(0.9, 0.3);
  m2.ledger.record(0).trust = 0.95;
  sim2.node(0).ledger.record(2).trust = 0.7;
  TransferResult t2;
  t2.observations.push_back({1, 0, Outcome::kDelivered});
  sim2.trust_update_phase(t2, 0);
  const double t_ik = sim2.nodes()[1].ledger.trust(0);
  CHECK(sim2.nodes()[1].ledger.trust(2) == doctest::Approx(t_ik * 0.7));
}

TEST_CASE("detector waits for three interacted nodes") {
  ScenarioConfig c;
  const std::vector<Position> pos{{50, 50}, {40, 50}, {60, 60}, {10, 10}};
  Simulation sim(c, pos, {false, false, false, false});
  for (NodeId h : {0u, 2u}) {
    TransferResult t;
    t.observations.push_back({1, h, Outcome::kDelivered});
    sim.trust_update_phase(t, 0);
  }
  CHECK_FALSE(sim.nodes()[1].outlier.active);
  TransferResult t;
  t.observations.push_back({1, 3, Outcome::kDropped});
  sim.trust_update_phase(t, 1);
  CHECK(sim.nodes()[1].outlier.active);
  CHECK(sim.nodes()[1].past_heads == std::deque<NodeId>{0, 2, 3});
}

TEST_CASE("clean network on an ideal channel sees no attacks") {
  ScenarioConfig c = small_config(4);
  c.malicious_fraction = 0.0;
  c.ideal_channel = true;
  c.max_rounds = 300;
  Simulation sim(c);
  const auto rec = sim.run();
  for (const auto& m : rec.rounds) {
    CHECK(m.drop_attacks == 0);
    CHECK(m.delay_attacks == 0);
    CHECK(m.packets_delivered_timely == m.packets_generated);
  }
  for (const auto& n : sim.nodes()) {
    for (const auto& [id, r] : n.ledger.records()) {
      CHECK(r.counters.dropped == 0);
      CHECK(r.counters.delayed == 0);
    }
  }
}

TEST_CASE("always-dropping heads deliver nothing and drive DPR to one") {
  ScenarioConfig c;
  c.ideal_channel = true;
  c.attack.p_dp = 1.0;
  c.attack.p_dl = 0.0;
  const std::vector<Position> pos{{50, 50}, {40, 50}, {60, 50}, {50, 60}};
  Simulation sim(c, pos, {true, false, false, false});
  for (Round r = 0; r < 20; ++r) {
    make_heads(sim, {0});
    for (NodeId id : {1u, 2u, 3u}) sim.node(id).role = Role::kIdle;
    const auto clusters = sim.join_clusters({0}, r);
    REQUIRE(clusters.members.at(0).size() == 3);
    const auto t = sim.transfer_phase(clusters, r);
    sim.trust_update_phase(t, r);
    const auto m = sim.collect_metrics(clusters, t, r);
    CHECK(m.packets_delivered_timely == 0);
    CHECK(m.drop_attacks == 1);
  }
  const auto& rec = *sim.nodes()[2].ledger.find(0);
  CHECK(evidence_rates(rec.counters).dpr == 1.0);
}

TEST_CASE("per-node energy ledger balances over a full run") {
  ScenarioConfig c = small_config(2);
  Simulation sim(c, TraceOptions{false, true, 0});
  const auto rec = sim.run();
  double logged_total = 0.0;
  for (const auto& n : sim.nodes()) {
    double sum = 0.0;
    for (const auto& e : n.energy_log) {
      CHECK(e.joules >= 0.0);
      sum += e.joules;
    }
    const double spent = n.initial_energy - n.residual;
    CHECK(std::abs(spent - sum) <= 1e-12 * n.initial_energy);
    logged_total += sum;
  }
  double metric_total = 0.0;
  for (const auto& m : rec.rounds) metric_total += m.energy_spent_total;
  CHECK(metric_total == doctest::Approx(logged_total).epsilon(1e-12));
}

TEST_CASE("runs are deterministic and CSV round-trips") {
  const auto dir = testing::scratch_dir("sim-determinism");
  ScenarioConfig c = small_config(11);
  const auto a = Simulation(c).run();
  const auto b = Simulation(c).run();
  write_rounds_csv(a, dir / "a.csv");
  write_rounds_csv(b, dir / "b.csv");
  write_summary_json(a, dir / "a.json");
  write_summary_json(b, dir / "b.json");
  CHECK(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));
  CHECK(testing::slurp(dir / "a.json") == testing::slurp(dir / "b.json"));

  const auto rows = read_rounds_csv(dir / "a.csv");
  REQUIRE(rows.size() == a.rounds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].energy_spent_total == a.rounds[i].energy_spent_total);
    CHECK(rows[i].energy_spent_effective == a.rounds[i].energy_spent_effective);
    CHECK(rows[i].packets_delivered == a.rounds[i].packets_delivered);
    CHECK(rows[i].converged_count == a.rounds[i].converged_count);
  }
  const auto s = summarize(rows, c.node_count - c.malicious_count());
  CHECK(s.lifetime == a.summary.lifetime);
  CHECK(s.throughput == a.summary.throughput);
  CHECK(s.energy_total == a.summary.energy_total);
  CHECK(s.timely_rate == a.summary.timely_rate);

  ScenarioConfig other = c;
  other.seed = 12;
  write_rounds_csv(Simulation(other).run(), dir / "c.csv");
  CHECK(testing::slurp(dir / "a.csv") != testing::slurp(dir / "c.csv"));
}

TEST_CASE("summary and cycle arithmetic") {
  std::vector<RoundMetrics> rounds(5);
  for (int i = 0; i < 5; ++i) {
    rounds[i].round = i;
    rounds[i].alive_benign_count = i < 3 ? 8 : 7;
    rounds[i].packets_generated = 10;
    rounds[i].packets_delivered_timely = 8;
    rounds[i].packets_delivered = 9;
    rounds[i].malicious_cluster_count = i;
    rounds[i].drop_attacks = 1;
    rounds[i].energy_spent_total = 1.0;
    rounds[i].energy_spent_effective = 0.5;
  }
  const auto s = summarize(rounds, 8);
  CHECK(s.rounds == 5);
  CHECK(s.lifetime == 3);
  CHECK(s.throughput == 45);
  CHECK(s.timely_rate == doctest::Approx(0.8));
  CHECK(s.effective_energy_rate == doctest::Approx(0.5));
  const auto cycles = cycle_metrics(rounds, 2);
  REQUIRE(cycles.size() == 3);
  CHECK(cycles[0].avg_malicious_clusters == 0.5);
  CHECK(cycles[1].avg_malicious_clusters == 2.5);
  CHECK(cycles[2].rounds == 1);
  CHECK(cycles[2].drop_attacks == 1);
}

TEST_CASE("trace options record nodes and ledgers") {
  ScenarioConfig c = small_config(3);
  c.max_rounds = 40;
  Simulation sim(c, TraceOptions{true, false, 10});
  const auto rec = sim.run();
  CHECK(rec.node_trace.size() == 40 * 30);
  CHECK_FALSE(rec.trust_trace.empty());
  CHECK(rec.summary.hit_round_cap);
  const auto dir = testing::scratch_dir("sim-trace");
  write_node_trace_csv(rec, dir / "n.csv");
  write_trust_trace_csv(rec, dir / "t.csv");
  CHECK(testing::slurp(dir / "n.csv").rfind("round,node,role", 0) == 0);
}

}  // TEST_SUITE
