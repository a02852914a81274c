#pragma once

#include <optional>

#include "wsn/trust_ledger.hpp"

namespace wsn {

/// The node's view of its head-election game.
struct GameContext {
  int n_players = 1;   // the node plus its past non-malicious heads
  double w = 6.0;      // head/member energy multiple
  double t_avr = 1.0;  // mean trust of neighbours detected as malicious
};

struct PayoffParameters {
  double v;  // value of a secure service
  double c;  // extra cost of serving as head
  double z;  // population loss when nobody declares
};

struct ExpectedPayoffs {
  double declare;
  double not_declare;
  double population;
};

inline constexpr double kMinHeadProbability = 0.01;
inline constexpr double kMaxHeadProbability = 0.99;

PayoffParameters payoff_parameters(const GameContext& ctx);

ExpectedPayoffs expected_payoffs(double p, const PayoffParameters& params, int n);

/// dp/dt of the declaring share under replicator dynamics.
double replicator_derivative(double p, const PayoffParameters& params, int n);

/// Interior equilibrium of the replicator dynamics, unclamped. nullopt when
/// fewer than two players take part.
std::optional<double> ess_probability_raw(const GameContext& ctx);

/// Equilibrium clamped to [kMinHeadProbability, kMaxHeadProbability].
std::optional<double> ess_probability(const GameContext& ctx);

/// Rounds a node sits out after serving: floor(1 / p_ch).
int eligibility_window(double p_ch);

struct ElectionPolicy {
  double p_ch = 0.07;
  double p_int = 0.07;
  std::optional<Round> last_head_round;

  bool eligible(Round r) const;
};

/// Head-election threshold for round r; nullopt when the node served as head
/// within the last eligibility window.
std::optional<double> election_threshold(const ElectionPolicy& policy, Round r);

}  // namespace wsn
