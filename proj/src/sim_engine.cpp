#include "wsn/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "wsn/rng.hpp"

namespace wsn {

namespace {

constexpr std::uint64_t kSetupStream = 0;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(ProtocolMode mode) {
  switch (mode) {
    case ProtocolMode::kEgscfo: return "egscfo";
    case ProtocolMode::kFuzzyOnly: return "fuzzy-only";
    case ProtocolMode::kBaseline: return "baseline";
  }
  return "?";
}

ProtocolMode parse_mode(const std::string& text) {
  if (text == "egscfo") return ProtocolMode::kEgscfo;
  if (text == "fuzzy-only" || text == "fuzzy_only") return ProtocolMode::kFuzzyOnly;
  if (text == "baseline") return ProtocolMode::kBaseline;
  throw ConfigError("unknown mode '" + text + "' (expected egscfo, fuzzy-only or baseline)");
}

const char* to_string(Role role) {
  switch (role) {
    case Role::kIdle: return "idle";
    case Role::kHead: return "head";
    case Role::kMember: return "member";
  }
  return "?";
}

Position ScenarioConfig::base_station() const {
  if (bs_position) return *bs_position;
  return {width + bs_offset, height / 2.0};
}

double ScenarioConfig::broadcast_distance() const {
  return broadcast_radius ? *broadcast_radius : std::hypot(width, height);
}

int ScenarioConfig::malicious_count() const {
  return static_cast<int>(std::floor(malicious_fraction * node_count + 1e-9));
}

std::vector<std::string> ScenarioConfig::violations() const {
  std::vector<std::string> out;
  auto fail = [&](const std::string& msg) { out.push_back(msg); };
  auto prob = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  if (!(width > 0.0) || !(height > 0.0)) fail("scenario.width and scenario.height must be > 0");
  if (node_count < 4) fail("scenario.node_count must be >= 4");
  if (!(malicious_fraction >= 0.0 && malicious_fraction < 1.0)) {
    fail("scenario.malicious_fraction must lie in [0, 1)");
  }
  if (!(initial_energy > 0.0)) fail("scenario.initial_energy must be > 0");
  if (packet_bits <= 0) fail("scenario.packet_bits must be > 0");
  if (control_bits <= 0) fail("scenario.control_bits must be > 0");
  if (n_nch < 1) fail("scenario.N_NCH must be >= 1");
  if (!(p_int > 0.0 && p_int <= 1.0)) fail("scenario.p_int must lie in (0, 1]");
  if (!(w > 1.0)) fail("game.w must be > 1");
  if (rounds_per_cycle < 1) fail("scenario.rounds_per_cycle must be >= 1");
  if (broadcast_radius && !(*broadcast_radius > 0.0)) fail("scenario.broadcast_radius must be > 0");
  if (!(immediate_overhear_s > 0.0 && immediate_overhear_s <= radio.d_max_overhear)) {
    fail("scenario.immediate_overhear_s must lie in (0, D_m]");
  }
  if (past_heads_cap < 1) fail("scenario.past_heads_cap must be >= 1");
  if (max_rounds < 1) fail("scenario.max_rounds must be >= 1");
  for (auto& v : radio.violations()) out.push_back(v);
  for (auto& v : channel.violations()) out.push_back(v);
  for (auto& v : outlier.violations()) out.push_back(v);
  prob(attack.p_dp, "attack.P_DP");
  prob(attack.p_dl, "attack.P_DL");
  if (attack.p_dp + attack.p_dl > 1.0 + 1e-12) fail("attack.P_DP + attack.P_DL must be <= 1");
  if (!(attack.d_max > 0.0)) fail("attack.D_m must be > 0");
  prob(noise.p_los, "noise.P_LOS");
  prob(noise.p_del, "noise.P_DEL");
  return out;
}

void ScenarioConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid scenario '" + name + "':";
  for (const auto& line : v) msg += "\n  " + line;
  throw ConfigError(msg);
}

Simulation::Simulation(ScenarioConfig config, TraceOptions trace)
    : config_(std::move(config)), trace_(trace) {
  config_.validate();
  auto setup = make_stream(config_.seed, kSetupStream);
  const auto n = static_cast<std::size_t>(config_.node_count);
  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes_[i].position = {uniform01(setup) * config_.width, uniform01(setup) * config_.height};
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(setup, i + 1)]);
  }
  for (int k = 0; k < config_.malicious_count(); ++k) nodes_[order[k]].malicious = true;
  init_common();
}

Simulation::Simulation(ScenarioConfig config, const std::vector<Position>& positions,
                       const std::vector<bool>& malicious, TraceOptions trace)
    : config_(std::move(config)), trace_(trace) {
  if (positions.size() != malicious.size()) {
    throw ConfigError("positions and malicious flags differ in length");
  }
  config_.node_count = static_cast<int>(positions.size());
  config_.validate();
  nodes_.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    nodes_[i].position = positions[i];
    nodes_[i].malicious = malicious[i];
  }
  init_common();
}

void Simulation::init_common() {
  fls_ = config_.fuzzy_sets
             ? std::make_shared<const FuzzyTrustSystem>(FuzzySetDefinitions::load(*config_.fuzzy_sets))
             : std::make_shared<const FuzzyTrustSystem>();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    n.id = static_cast<NodeId>(i);
    n.initial_energy = config_.initial_energy;
    n.residual = config_.initial_energy;
    n.policy.p_ch = config_.p_int;
    n.policy.p_int = config_.p_int;
    n.ledger = TrustLedger(config_.evidence_window);
    n.rng = make_stream(config_.seed, i + 1);
  }
  const auto n = nodes_.size();
  p2_.assign(n, config_.p_int);
  n_players_.assign(n, 1);
  t_avr_.assign(n, 1.0);
  declared_.assign(n, false);
}

bool Simulation::finished() const {
  if (round_ >= config_.max_rounds) return true;
  return std::none_of(nodes_.begin(), nodes_.end(),
                      [](const NodeState& n) { return n.alive && !n.malicious; });
}

bool Simulation::spend(NodeState& n, double joules, EnergyUse use, Round r, bool effective) {
  if (!n.alive) return false;
  const bool enough = joules < n.residual;
  const double used = enough ? joules : n.residual;
  n.residual = enough ? n.residual - joules : 0.0;
  if (!enough) n.alive = false;
  round_energy_ += used;
  if (effective) round_effective_ += used;
  if (trace_.energy_events) n.energy_log.push_back({r, use, used});
  return enough;
}

Classification Simulation::classify_for(const NodeState& observer, NodeId target) const {
  if (config_.mode != ProtocolMode::kEgscfo) return Classification::kUnknown;
  return classify(observer.ledger.trust(target), observer.outlier);
}

GameContext Simulation::game_context(const NodeState& n) const {
  GameContext ctx;
  ctx.w = config_.w;
  ctx.n_players = 1;
  for (NodeId h : n.past_heads) {
    if (nodes_[h].alive && classify_for(n, h) != Classification::kSuspicious) ++ctx.n_players;
  }
  double sum = 0.0;
  int count = 0;
  for (const auto& [target, rec] : n.ledger.records()) {
    if (classify_for(n, target) == Classification::kSuspicious) {
      sum += rec.trust;
      ++count;
    }
  }
  ctx.t_avr = count > 0 ? sum / count : 1.0;
  return ctx;
}

void Simulation::update_head_probabilities() {
  for (auto& n : nodes_) {
    if (!n.alive) continue;
    if (config_.mode == ProtocolMode::kBaseline) {
      n.policy.p_ch = config_.p_int;
      p2_[n.id] = config_.p_int;
      continue;
    }
    const GameContext ctx = game_context(n);
    n_players_[n.id] = ctx.n_players;
    t_avr_[n.id] = ctx.t_avr;
    if (auto p = ess_probability(ctx)) n.policy.p_ch = *p;
    p2_[n.id] = n.policy.p_ch;
  }
}

std::vector<NodeId> Simulation::elect_heads(Round r) {
  std::vector<NodeId> heads;
  const double radius = config_.broadcast_distance();
  for (auto& n : nodes_) {
    n.role = Role::kIdle;
    n.head.reset();
    declared_[n.id] = false;
  }
  for (auto& n : nodes_) {
    if (!n.alive) continue;
    const auto th = election_threshold(n.policy, r);
    if (!th) continue;
    if (uniform01(n.rng) >= *th) continue;
    n.policy.last_head_round = r;
    declared_[n.id] = true;
    if (!spend(n, tx_energy(config_.control_bits, radius, config_.radio), EnergyUse::kControl, r)) {
      continue;
    }
    n.role = Role::kHead;
    heads.push_back(n.id);
  }
  return heads;
}

ClusterAssignment Simulation::join_clusters(const std::vector<NodeId>& heads, Round r) {
  ClusterAssignment out;
  const double radius = config_.broadcast_distance();
  std::vector<NodeId> elected;
  for (NodeId h : heads) {
    if (nodes_[h].alive && nodes_[h].role == Role::kHead) elected.push_back(h);
  }

  auto nearest_first = [&](const NodeState& n, std::vector<NodeId> pool) {
    std::stable_sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) {
      return distance(n.position, nodes_[a].position) < distance(n.position, nodes_[b].position);
    });
    return pool;
  };
  auto nearest_k = [&](const std::vector<NodeId>& ranked) {
    return std::vector<NodeId>(
        ranked.begin(), ranked.begin() + std::min<std::size_t>(ranked.size(), config_.n_nch));
  };
  auto first_where = [](const std::vector<NodeId>& pool, auto pred) -> std::optional<NodeId> {
    for (NodeId h : pool) {
      if (pred(h)) return h;
    }
    return std::nullopt;
  };

  // Rules (a) and (b) over a ranked pool; `gated` selects (b).
  auto pick = [&](const NodeState& n, const std::vector<NodeId>& ranked, bool gated,
                  bool widened) -> std::optional<NodeId> {
    auto trusted = [&](NodeId h) { return classify_for(n, h) == Classification::kTrusted; };
    auto untouched = [&](NodeId h) { return n.ledger.trust(h) == 0.0; };
    if (config_.mode == ProtocolMode::kBaseline) {
      return ranked.empty() ? std::nullopt : std::optional<NodeId>(ranked.front());
    }
    const auto pool = widened && gated ? ranked : nearest_k(ranked);
    if (gated) {
      auto c = first_where(pool, trusted);
      return c ? c : first_where(pool, untouched);
    }
    auto c = first_where(pool, untouched);
    if (c) return c;
    std::optional<NodeId> best;
    for (NodeId h : pool) {
      if (!best || n.ledger.trust(h) > n.ledger.trust(*best)) best = h;
    }
    return best;
  };

  std::vector<std::optional<NodeId>> choice(nodes_.size());
  std::vector<NodeId> unplaced;
  for (auto& n : nodes_) {
    if (!n.alive || n.role == Role::kHead || declared_[n.id]) continue;
    const bool gated = config_.mode == ProtocolMode::kEgscfo && n.outlier.converged;
    choice[n.id] = pick(n, nearest_first(n, elected), gated, false);
    if (choice[n.id]) continue;
    if (n.policy.eligible(r)) {
      n.policy.last_head_round = r;
      declared_[n.id] = true;
      if (spend(n, tx_energy(config_.control_bits, radius, config_.radio), EnergyUse::kControl, r)) {
        n.role = Role::kHead;
        out.self_declared.push_back(n.id);
      }
      continue;
    }
    unplaced.push_back(n.id);
  }

  // Ineligible nodes without an acceptable elected head look at every head of
  // the round, self-declared ones included, before degrading.
  std::vector<NodeId> all_heads = elected;
  for (NodeId s : out.self_declared) all_heads.push_back(s);
  for (NodeId id : unplaced) {
    const auto& n = nodes_[id];
    const bool gated = config_.mode == ProtocolMode::kEgscfo && n.outlier.converged;
    const auto ranked = nearest_first(n, all_heads);
    choice[id] = pick(n, ranked, gated, true);
    if (choice[id]) continue;
    std::optional<NodeId> best;
    for (NodeId h : nearest_k(ranked)) {
      if (!best || n.ledger.trust(h) > n.ledger.trust(*best)) best = h;
    }
    choice[id] = best;
    if (best) ++out.degraded_joins;
  }

  for (auto& n : nodes_) {
    if (!n.alive || n.role == Role::kHead || declared_[n.id]) continue;
    if (!choice[n.id]) {
      out.idle.push_back(n.id);
      continue;
    }
    const NodeId hid = *choice[n.id];
    auto& head = nodes_[hid];
    const double d = distance(n.position, head.position);
    if (!spend(n, tx_energy(config_.control_bits, d, config_.radio), EnergyUse::kControl, r)) continue;
    if (!spend(head, rx_energy(config_.control_bits, config_.radio), EnergyUse::kControl, r)) continue;
    n.role = Role::kMember;
    n.head = hid;
    out.members[hid].push_back(n.id);
  }

  out.heads = all_heads;
  std::sort(out.heads.begin(), out.heads.end());
  return out;
}

TransferResult Simulation::transfer_phase(const ClusterAssignment& clusters, Round r) {
  TransferResult out;
  const Position bs = config_.base_station();
  const double bits = config_.packet_bits;
  const auto& radio = config_.radio;
  const bool monitoring = config_.mode != ProtocolMode::kBaseline;

  for (NodeId hid : clusters.heads) {
    auto& head = nodes_[hid];
    if (!head.alive || head.role != Role::kHead) continue;

    // Chain energy is only known to be effective once the forward outcome is.
    double chain = 0.0;
    std::vector<NodeId> delivered_to_head;
    auto it = clusters.members.find(hid);
    if (it != clusters.members.end()) {
      for (NodeId mid : it->second) {
        auto& m = nodes_[mid];
        if (!m.alive) continue;
        if (!m.malicious) ++out.packets_generated;
        const double tx = tx_energy(bits, distance(m.position, head.position), radio);
        const double before = round_energy_;
        if (!spend(m, tx, EnergyUse::kDataTx, r)) continue;
        if (!head.alive) continue;
        const bool received = spend(head, rx_energy(bits, radio), EnergyUse::kDataRx, r);
        chain += round_energy_ - before;
        if (received) delivered_to_head.push_back(mid);
      }
    }
    if (!head.alive) continue;

    ForwardEvent ev{hid, ForwardOutcome::kClean, ChannelState::kGood, 0.0,
                    static_cast<int>(delivered_to_head.size()), false};
    if (head.malicious && !delivered_to_head.empty()) {
      if (uniform01(head.rng) < config_.attack.p_dp) {
        ev.outcome = ForwardOutcome::kDropped;
        ev.attack = true;
      } else if (uniform01(head.rng) < config_.attack.p_dl) {
        ev.outcome = ForwardOutcome::kMaliciousDelay;
        ev.delay = config_.attack.d_max * (1.0 - uniform01(head.rng));
        ev.attack = true;
      }
    }
    if (!config_.ideal_channel) ev.channel = sample_channel(config_.channel, head.rng).state;
    if (ev.outcome == ForwardOutcome::kClean && ev.channel == ChannelState::kBad &&
        uniform01(head.rng) < config_.noise.p_del) {
      ev.outcome = ForwardOutcome::kRetransmitted;
      ev.delay = 0.5 * radio.d_max_overhear;
    }

    bool sent = true;
    if (ev.outcome != ForwardOutcome::kDropped) {
      const double fwd = tx_energy(bits, distance(head.position, bs), radio);
      const int copies = ev.outcome == ForwardOutcome::kRetransmitted ? 2 : 1;
      const bool timely = ev.outcome != ForwardOutcome::kMaliciousDelay && !delivered_to_head.empty();
      for (int c = 0; c < copies && sent; ++c) {
        sent = spend(head, fwd, EnergyUse::kForward, r, timely);
      }
      if (!sent) ev.outcome = ForwardOutcome::kNotSent;
    }
    if (ev.outcome == ForwardOutcome::kDropped) ++out.drop_attacks;
    if (ev.outcome == ForwardOutcome::kMaliciousDelay) ++out.delay_attacks;

    const bool arrived = ev.outcome == ForwardOutcome::kClean ||
                         ev.outcome == ForwardOutcome::kRetransmitted ||
                         ev.outcome == ForwardOutcome::kMaliciousDelay;
    const bool on_time = arrived && ev.outcome != ForwardOutcome::kMaliciousDelay;
    if (arrived) {
      if (on_time) round_effective_ += chain;
      for (NodeId mid : delivered_to_head) {
        if (nodes_[mid].malicious) continue;
        ++out.packets_delivered;
        if (on_time) ++out.packets_delivered_timely;
      }
    }
    out.forwards.push_back(ev);

    if (!monitoring) continue;
    for (NodeId mid : delivered_to_head) {
      auto& m = nodes_[mid];
      if (!m.alive) continue;
      Outcome seen = Outcome::kDelivered;
      std::optional<double> overheard;
      switch (ev.outcome) {
        case ForwardOutcome::kDropped:
        case ForwardOutcome::kNotSent:
          seen = Outcome::kDropped;
          break;
        case ForwardOutcome::kMaliciousDelay:
          seen = Outcome::kDelayed;
          if (ev.delay <= radio.d_max_overhear) overheard = ev.delay;
          break;
        case ForwardOutcome::kRetransmitted:
          seen = Outcome::kDelayed;
          overheard = ev.delay;
          break;
        case ForwardOutcome::kClean:
          if (ev.channel == ChannelState::kBad && uniform01(m.rng) < config_.noise.p_los) {
            seen = Outcome::kUnobserved;
          } else {
            overheard = config_.immediate_overhear_s;
          }
          break;
      }
      spend(m, monitor_energy(overheard, bits, radio), EnergyUse::kMonitor, r);
      out.observations.push_back({mid, hid, seen});
    }
  }

  for (NodeId iid : clusters.idle) {
    auto& n = nodes_[iid];
    if (!n.alive) continue;
    if (!n.malicious) ++out.packets_generated;
    if (spend(n, tx_energy(bits, distance(n.position, bs), radio), EnergyUse::kDataTx, r, true) &&
        !n.malicious) {
      ++out.packets_delivered;
      ++out.packets_delivered_timely;
    }
  }
  return out;
}

void Simulation::trust_update_phase(const TransferResult& transfer, Round r) {
  if (config_.mode == ProtocolMode::kBaseline) return;
  const bool gating = config_.mode == ProtocolMode::kEgscfo;

  std::vector<const Observation*> ordered;
  for (const auto& obs : transfer.observations) ordered.push_back(&obs);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Observation* a, const Observation* b) { return a->member < b->member; });

  for (const Observation* obs : ordered) {
    auto& m = nodes_[obs->member];
    const NodeId hid = obs->head;
    m.ledger.observe(hid, obs->outcome);
    m.ledger.refresh(hid, *fls_, r);

    if (gating && m.outlier.converged && classify_for(m, hid) == Classification::kTrusted) {
      const double t_ik = m.ledger.trust(hid);
      for (const auto& [target, t_kj] : nodes_[hid].ledger.positive_entries()) {
        if (target == m.id || target == hid) continue;
        m.ledger.merge(target, t_ik, t_kj, r);
      }
    }

    if (gating) {
      const auto ts = m.ledger.trust_set();
      std::size_t interacted = 0;
      for (const auto& [target, rec] : m.ledger.records()) {
        if (rec.counters.observed > 0) ++interacted;
      }
      if (!m.outlier.active && interacted >= kMinInteractions && ts.size() > 1) {
        if (auto seeded = activate(ts, m.rng)) m.outlier = *seeded;
      }
      if (m.outlier.active && ts.size() > 1) {
        m.outlier = iterate_round(m.outlier, ts, config_.outlier).first;
        m.outlier = check_convergence(m.outlier, config_.outlier);
      }
    }

    auto& past = m.past_heads;
    past.erase(std::remove(past.begin(), past.end(), hid), past.end());
    past.push_back(hid);
    while (past.size() > static_cast<std::size_t>(config_.past_heads_cap)) past.pop_front();
  }
}

RoundMetrics Simulation::collect_metrics(const ClusterAssignment& clusters,
                                         const TransferResult& transfer, Round r) {
  RoundMetrics m;
  m.round = r;
  for (NodeId h : clusters.heads) {
    if (!nodes_[h].malicious) continue;
    ++m.malicious_heads;
    auto it = clusters.members.find(h);
    if (it != clusters.members.end() && !it->second.empty()) ++m.malicious_cluster_count;
  }
  m.heads = static_cast<int>(clusters.heads.size());
  m.drop_attacks = transfer.drop_attacks;
  m.delay_attacks = transfer.delay_attacks;
  m.packets_generated = transfer.packets_generated;
  m.packets_delivered_timely = transfer.packets_delivered_timely;
  m.packets_delivered = transfer.packets_delivered;
  m.energy_spent_total = round_energy_;
  m.energy_spent_effective = std::min(round_effective_, round_energy_);
  m.degraded_joins = clusters.degraded_joins;
  m.self_declared = static_cast<int>(clusters.self_declared.size());
  for (const auto& n : nodes_) {
    if (!n.alive) continue;
    ++m.alive_count;
    if (!n.malicious) ++m.alive_benign_count;
    if (n.outlier.converged) ++m.converged_count;
  }
  return m;
}

void Simulation::reset_round_accumulators() {
  round_energy_ = 0.0;
  round_effective_ = 0.0;
}

RoundMetrics Simulation::step() {
  const Round r = round_;
  reset_round_accumulators();
  update_head_probabilities();
  const auto heads = elect_heads(r);
  const auto clusters = join_clusters(heads, r);
  const auto transfer = transfer_phase(clusters, r);
  trust_update_phase(transfer, r);
  const RoundMetrics m = collect_metrics(clusters, transfer, r);
  ++round_;
  return m;
}

RunRecord Simulation::run() {
  RunRecord rec;
  rec.config = config_;
  while (!finished()) {
    const Round r = round_;
    rec.rounds.push_back(step());
    if (trace_.nodes) {
      for (const auto& n : nodes_) {
        rec.node_trace.push_back({r, n.id, n.role, n.energy(), n_players_[n.id], t_avr_[n.id],
                                  p2_[n.id], declared_[n.id], n.outlier.av_htg, n.outlier.av_ltg,
                                  n.outlier.streak, n.outlier.converged});
      }
    }
    if (trace_.trust_every > 0 && (r + 1) % trace_.trust_every == 0) {
      for (const auto& n : nodes_) {
        for (const auto& [target, tr] : n.ledger.records()) {
          double dpr = std::nan(""), dlr = std::nan("");
          if (tr.counters.observed > 0) {
            const auto rates = evidence_rates(tr.counters);
            dpr = rates.dpr;
            dlr = rates.dlr;
          }
          rec.trust_trace.push_back({r, n.id, target, tr.trust, dpr, dlr});
        }
      }
    }
  }
  int benign = 0;
  for (const auto& n : nodes_) benign += n.malicious ? 0 : 1;
  rec.summary = summarize(rec.rounds, benign);
  rec.summary.hit_round_cap = round_ >= config_.max_rounds &&
                              std::any_of(nodes_.begin(), nodes_.end(), [](const NodeState& n) {
                                return n.alive && !n.malicious;
                              });
  rec.cycles = cycle_metrics(rec.rounds, config_.rounds_per_cycle);
  return rec;
}

RunSummary summarize(const std::vector<RoundMetrics>& rounds, int benign_count) {
  RunSummary s;
  s.rounds = static_cast<Round>(rounds.size());
  s.lifetime = s.rounds;
  for (const auto& m : rounds) {
    if (m.alive_benign_count < benign_count) {
      s.lifetime = m.round;
      break;
    }
  }
  for (const auto& m : rounds) {
    s.throughput += m.packets_delivered;
    s.drop_attacks += m.drop_attacks;
    s.delay_attacks += m.delay_attacks;
    s.packets_generated += m.packets_generated;
    s.packets_delivered_timely += m.packets_delivered_timely;
    s.energy_total += m.energy_spent_total;
    s.energy_effective += m.energy_spent_effective;
    s.malicious_clusters += m.malicious_cluster_count;
    s.degraded_joins += m.degraded_joins;
  }
  s.timely_rate = s.packets_generated > 0
                      ? static_cast<double>(s.packets_delivered_timely) / s.packets_generated
                      : 0.0;
  s.effective_energy_rate = s.energy_total > 0.0 ? s.energy_effective / s.energy_total : 0.0;
  return s;
}

std::vector<CycleMetrics> cycle_metrics(const std::vector<RoundMetrics>& rounds, int rounds_per_cycle) {
  std::vector<CycleMetrics> out;
  for (const auto& m : rounds) {
    const int c = static_cast<int>(m.round / rounds_per_cycle);
    while (static_cast<int>(out.size()) <= c) {
      out.push_back({static_cast<int>(out.size()), 0, 0.0, 0, 0});
    }
    auto& cm = out[c];
    ++cm.rounds;
    cm.avg_malicious_clusters += m.malicious_cluster_count;
    cm.drop_attacks += m.drop_attacks;
    cm.delay_attacks += m.delay_attacks;
  }
  for (auto& cm : out) {
    if (cm.rounds > 0) cm.avg_malicious_clusters /= cm.rounds;
  }
  return out;
}

std::string run_stem(const ScenarioConfig& config) {
  return config.name + "-" + std::to_string(config.seed);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_rounds_csv(const RunRecord& record, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << kRoundsCsvHeader << '\n';
  for (const auto& m : record.rounds) {
    f << m.round << ',' << m.heads << ',' << m.malicious_heads << ',' << m.malicious_cluster_count
      << ',' << m.drop_attacks << ',' << m.delay_attacks << ',' << m.packets_generated << ','
      << m.packets_delivered_timely << ',' << m.packets_delivered << ','
      << fmt_double(m.energy_spent_total) << ',' << fmt_double(m.energy_spent_effective) << ','
      << m.alive_benign_count << ',' << m.alive_count << ',' << m.degraded_joins << ','
      << m.self_declared << ',' << m.converged_count << '\n';
  }
}

std::vector<RoundMetrics> read_rounds_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(f, line);
  if (line != kRoundsCsvHeader) throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<RoundMetrics> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 16) throw std::runtime_error(path.string() + ": bad row '" + line + "'");
    RoundMetrics m;
    m.round = std::stoll(cells[0]);
    m.heads = std::stoi(cells[1]);
    m.malicious_heads = std::stoi(cells[2]);
    m.malicious_cluster_count = std::stoi(cells[3]);
    m.drop_attacks = std::stoi(cells[4]);
    m.delay_attacks = std::stoi(cells[5]);
    m.packets_generated = std::stoi(cells[6]);
    m.packets_delivered_timely = std::stoi(cells[7]);
    m.packets_delivered = std::stoi(cells[8]);
    m.energy_spent_total = std::stod(cells[9]);
    m.energy_spent_effective = std::stod(cells[10]);
    m.alive_benign_count = std::stoi(cells[11]);
    m.alive_count = std::stoi(cells[12]);
    m.degraded_joins = std::stoi(cells[13]);
    m.self_declared = std::stoi(cells[14]);
    m.converged_count = std::stoi(cells[15]);
    out.push_back(m);
  }
  return out;
}

void write_summary_json(const RunRecord& record, const std::filesystem::path& path) {
  const auto& s = record.summary;
  const auto& c = record.config;
  nlohmann::ordered_json j;
  j["scenario"] = c.name;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["node_count"] = c.node_count;
  j["malicious_count"] = c.malicious_count();
  j["malicious_fraction"] = c.malicious_fraction;
  j["width"] = c.width;
  j["height"] = c.height;
  j["rounds"] = s.rounds;
  j["lifetime"] = s.lifetime;
  j["throughput"] = s.throughput;
  j["drop_attacks"] = s.drop_attacks;
  j["delay_attacks"] = s.delay_attacks;
  j["packets_generated"] = s.packets_generated;
  j["packets_delivered_timely"] = s.packets_delivered_timely;
  j["timely_rate"] = s.timely_rate;
  j["energy_total_J"] = s.energy_total;
  j["energy_effective_J"] = s.energy_effective;
  j["effective_energy_rate"] = s.effective_energy_rate;
  j["malicious_clusters"] = s.malicious_clusters;
  j["degraded_joins"] = s.degraded_joins;
  j["hit_round_cap"] = s.hit_round_cap;
  auto cycles = nlohmann::ordered_json::array();
  for (const auto& cm : record.cycles) {
    cycles.push_back({{"cycle", cm.cycle},
                      {"rounds", cm.rounds},
                      {"avg_malicious_clusters", cm.avg_malicious_clusters},
                      {"drop_attacks", cm.drop_attacks},
                      {"delay_attacks", cm.delay_attacks}});
  }
  j["cycles"] = std::move(cycles);
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_node_trace_csv(const RunRecord& record, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << "round,node,role,energy_J,n_players,t_avr,p2,declared,av_htg,av_ltg,streak,converged\n";
  for (const auto& t : record.node_trace) {
    f << t.round << ',' << t.node << ',' << to_string(t.role) << ',' << fmt_double(t.energy) << ','
      << t.n_players << ',' << fmt_double(t.t_avr) << ',' << fmt_double(t.p2) << ','
      << (t.declared ? 1 : 0) << ',' << fmt_double(t.av_htg) << ',' << fmt_double(t.av_ltg) << ','
      << t.streak << ',' << (t.converged ? 1 : 0) << '\n';
  }
}

void write_trust_trace_csv(const RunRecord& record, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << "round,observer,target,trust,dpr,dlr\n";
  for (const auto& t : record.trust_trace) {
    f << t.round << ',' << t.observer << ',' << t.target << ',' << fmt_double(t.trust) << ',';
    if (!std::isnan(t.dpr)) f << fmt_double(t.dpr);
    f << ',';
    if (!std::isnan(t.dlr)) f << fmt_double(t.dlr);
    f << '\n';
  }
}

}  // namespace wsn
