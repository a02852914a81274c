#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsn/election_game.hpp"
#include "wsn/fuzzy_trust.hpp"
#include "wsn/outlier_detection.hpp"
#include "wsn/phys_layer.hpp"
#include "wsn/trust_ledger.hpp"

namespace wsn {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AttackProfile {
  double p_dp = 0.2;
  double p_dl = 0.2;
  double d_max = 10.0;  // s, longest malicious delay
};

struct NoiseProfile {
  double p_los = 0.2;
  double p_del = 0.2;
};

enum class ProtocolMode { kEgscfo, kFuzzyOnly, kBaseline };

const char* to_string(ProtocolMode mode);
ProtocolMode parse_mode(const std::string& text);

struct ScenarioConfig {
  std::string name = "scenario";
  ProtocolMode mode = ProtocolMode::kEgscfo;
  std::uint64_t seed = 1;

  double width = 100.0;
  double height = 100.0;
  int node_count = 100;
  double malicious_fraction = 0.2;
  /// Base station; defaults to (width + bs_offset, height / 2).
  std::optional<Position> bs_position;
  double bs_offset = 25.0;

  double initial_energy = 2.0;  // J
  int packet_bits = 3000;
  int control_bits = 300;
  int n_nch = 2;
  double p_int = 0.07;
  double w = 6.0;
  int rounds_per_cycle = 50;
  /// Election broadcast radius; defaults to the deployment diagonal.
  std::optional<double> broadcast_radius;
  /// Overhearing time charged for an immediate forward.
  double immediate_overhear_s = 0.1;
  int past_heads_cap = 20;
  /// 0 keeps cumulative evidence; otherwise rates use the last N outcomes.
  std::size_t evidence_window = 0;
  Round max_rounds = 200000;
  /// Forces every channel sample to the good state.
  bool ideal_channel = false;

  RadioParams radio;
  ChannelModel channel;
  OutlierThresholds outlier;
  AttackProfile attack;
  NoiseProfile noise;
  std::optional<std::filesystem::path> fuzzy_sets;

  Position base_station() const;
  double broadcast_distance() const;
  int malicious_count() const;
  /// Empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;
};

enum class Role { kIdle, kHead, kMember };

const char* to_string(Role role);

enum class EnergyUse { kControl, kDataTx, kDataRx, kForward, kMonitor };

struct EnergyEvent {
  Round round;
  EnergyUse use;
  double joules;
};

struct NodeState {
  NodeId id = 0;
  Position position;
  double initial_energy = 0.0;
  double residual = 0.0;
  bool alive = true;
  bool malicious = false;
  Role role = Role::kIdle;
  std::optional<NodeId> head;  // this round's head when a member
  ElectionPolicy policy;
  TrustLedger ledger;
  OutlierState outlier;
  /// Most recent distinct heads joined, newest last.
  std::deque<NodeId> past_heads;
  std::mt19937_64 rng;
  std::vector<EnergyEvent> energy_log;  // filled only when tracing energy

  double energy() const { return residual; }
};

/// How a head's fused forward to the base station went.
enum class ForwardOutcome { kClean, kRetransmitted, kDropped, kMaliciousDelay, kNotSent };

struct ForwardEvent {
  NodeId head;
  ForwardOutcome outcome;
  ChannelState channel;
  double delay;          // s
  int member_packets;    // member packets the head held
  bool attack;           // malicious drop or delay
};

struct Observation {
  NodeId member;
  NodeId head;
  Outcome outcome;
};

struct ClusterAssignment {
  std::vector<NodeId> heads;  // ascending, elected and self-declared
  std::vector<NodeId> self_declared;
  /// Members per head, ascending.
  std::map<NodeId, std::vector<NodeId>> members;
  /// Alive nodes with no head to join; they send straight to the base station.
  std::vector<NodeId> idle;
  int degraded_joins = 0;
};

struct TransferResult {
  std::vector<ForwardEvent> forwards;
  std::vector<Observation> observations;
  int packets_generated = 0;         // by non-malicious senders
  int packets_delivered_timely = 0;  // of those generated
  int packets_delivered = 0;         // of those generated, reaching the base station
  int drop_attacks = 0;
  int delay_attacks = 0;
};

struct RoundMetrics {
  Round round = 0;
  int heads = 0;
  int malicious_heads = 0;
  int malicious_cluster_count = 0;
  int drop_attacks = 0;
  int delay_attacks = 0;
  int packets_generated = 0;
  int packets_delivered_timely = 0;
  int packets_delivered = 0;
  double energy_spent_total = 0.0;
  double energy_spent_effective = 0.0;
  int alive_benign_count = 0;
  int alive_count = 0;
  int degraded_joins = 0;
  int self_declared = 0;
  int converged_count = 0;
};

struct CycleMetrics {
  int cycle = 0;
  int rounds = 0;
  double avg_malicious_clusters = 0.0;
  long long drop_attacks = 0;
  long long delay_attacks = 0;
};

struct RunSummary {
  Round rounds = 0;
  /// Rounds completed before the first non-malicious node died.
  Round lifetime = 0;
  long long throughput = 0;
  long long drop_attacks = 0;
  long long delay_attacks = 0;
  long long packets_generated = 0;
  long long packets_delivered_timely = 0;
  double timely_rate = 0.0;
  double energy_total = 0.0;
  double energy_effective = 0.0;
  double effective_energy_rate = 0.0;
  long long malicious_clusters = 0;
  long long degraded_joins = 0;
  bool hit_round_cap = false;
};

/// One row of the optional per-node trace.
struct NodeTraceRow {
  Round round;
  NodeId node;
  Role role;
  double energy;
  int n_players;
  double t_avr;
  double p2;
  bool declared;
  double av_htg;
  double av_ltg;
  int streak;
  bool converged;
};

struct TrustTraceRow {
  Round round;
  NodeId observer;
  NodeId target;
  double trust;
  double dpr;
  double dlr;
};

struct TraceOptions {
  bool nodes = false;
  bool energy_events = false;
  /// Ledger snapshots every N rounds; 0 disables.
  int trust_every = 0;
};

struct RunRecord {
  ScenarioConfig config;
  std::vector<RoundMetrics> rounds;
  std::vector<CycleMetrics> cycles;
  RunSummary summary;
  std::vector<NodeTraceRow> node_trace;
  std::vector<TrustTraceRow> trust_trace;
};

/// Round-based protocol simulation. Deterministic in (config, seed): one RNG
/// stream for setup and one per node.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config, TraceOptions trace = {});
  /// Builds the world from explicit positions and malicious flags instead of
  /// random deployment.
  Simulation(ScenarioConfig config, const std::vector<Position>& positions,
             const std::vector<bool>& malicious, TraceOptions trace = {});

  const ScenarioConfig& config() const { return config_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  NodeState& node(NodeId id) { return nodes_.at(id); }
  const FuzzyTrustSystem& fuzzy() const { return *fls_; }
  Round round() const { return round_; }
  bool finished() const;

  /// Per-node ESS update ahead of the election.
  void update_head_probabilities();
  std::vector<NodeId> elect_heads(Round r);
  ClusterAssignment join_clusters(const std::vector<NodeId>& heads, Round r);
  TransferResult transfer_phase(const ClusterAssignment& clusters, Round r);
  void trust_update_phase(const TransferResult& transfer, Round r);
  RoundMetrics collect_metrics(const ClusterAssignment& clusters, const TransferResult& transfer,
                               Round r);

  RoundMetrics step();
  RunRecord run();

  GameContext game_context(const NodeState& n) const;
  Classification classify_for(const NodeState& observer, NodeId target) const;

 private:
  void init_common();
  bool spend(NodeState& n, double joules, EnergyUse use, Round r, bool effective = false);
  void reset_round_accumulators();

  ScenarioConfig config_;
  TraceOptions trace_;
  std::shared_ptr<const FuzzyTrustSystem> fls_;
  std::vector<NodeState> nodes_;
  Round round_ = 0;

  // Per-round accumulators, reset by step().
  double round_energy_ = 0.0;
  double round_effective_ = 0.0;
  std::vector<double> p2_;
  std::vector<int> n_players_;
  std::vector<double> t_avr_;
  std::vector<bool> declared_;
};

RunSummary summarize(const std::vector<RoundMetrics>& rounds, int benign_count);
std::vector<CycleMetrics> cycle_metrics(const std::vector<RoundMetrics>& rounds, int rounds_per_cycle);

/// `<name>-<seed>` file stem for a run.
std::string run_stem(const ScenarioConfig& config);

void write_rounds_csv(const RunRecord& record, const std::filesystem::path& path);
void write_summary_json(const RunRecord& record, const std::filesystem::path& path);
void write_node_trace_csv(const RunRecord& record, const std::filesystem::path& path);
void write_trust_trace_csv(const RunRecord& record, const std::filesystem::path& path);

std::vector<RoundMetrics> read_rounds_csv(const std::filesystem::path& path);

inline constexpr const char* kRoundsCsvHeader =
    "round,heads,malicious_heads,malicious_clusters,drop_attacks,delay_attacks,packets_generated,"
    "packets_delivered_timely,packets_delivered,energy_total_J,energy_effective_J,alive_benign,"
    "alive,degraded_joins,self_declared,converged";

}  // namespace wsn
