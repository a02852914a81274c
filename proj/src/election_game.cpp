#include "wsn/election_game.hpp"

#include <algorithm>
#include <cmath>

namespace wsn {

PayoffParameters payoff_parameters(const GameContext& ctx) {
  return {ctx.w, ctx.w - 1.0, static_cast<double>(ctx.n_players) * (1.0 - ctx.t_avr)};
}

ExpectedPayoffs expected_payoffs(double p, const PayoffParameters& params, int n) {
  const double nobody = std::pow(1.0 - p, n - 1);
  ExpectedPayoffs e{};
  e.declare = params.v - params.c;
  e.not_declare = (1.0 - nobody) * params.v - nobody * params.z;
  e.population = p * e.declare + (1.0 - p) * e.not_declare;
  return e;
}

double replicator_derivative(double p, const PayoffParameters& params, int n) {
  return p * (1.0 - p) * (std::pow(1.0 - p, n - 1) * (params.v + params.z) - params.c);
}

std::optional<double> ess_probability_raw(const GameContext& ctx) {
  if (ctx.n_players < 2) return std::nullopt;
  const double ratio = (ctx.w - 1.0) / (ctx.w + ctx.n_players * (1.0 - ctx.t_avr));
  return 1.0 - std::pow(ratio, 1.0 / (ctx.n_players - 1));
}

std::optional<double> ess_probability(const GameContext& ctx) {
  auto p = ess_probability_raw(ctx);
  if (!p) return std::nullopt;
  return std::clamp(*p, kMinHeadProbability, kMaxHeadProbability);
}

int eligibility_window(double p_ch) {
  // 1/0.1 lands a hair under 10 in binary; absorb that before flooring.
  return std::max(1, static_cast<int>(std::floor(1.0 / p_ch + 1e-9)));
}

bool ElectionPolicy::eligible(Round r) const {
  return !last_head_round || r - *last_head_round > eligibility_window(p_ch);
}

std::optional<double> election_threshold(const ElectionPolicy& policy, Round r) {
  if (!policy.eligible(r)) return std::nullopt;
  const int window = eligibility_window(policy.p_ch);
  const double denom = 1.0 - policy.p_ch * static_cast<double>(r % window);
  if (denom <= 0.0) return 1.0;
  return std::min(1.0, policy.p_ch / denom);
}

}  // namespace wsn
