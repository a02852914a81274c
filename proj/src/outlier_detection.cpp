#include "wsn/outlier_detection.hpp"

#include <cmath>
#include <utility>

#include "wsn/rng.hpp"

namespace wsn {

std::vector<std::string> OutlierThresholds::violations() const {
  std::vector<std::string> out;
  if (!(d_m > 0.0)) out.emplace_back("outlier.d_m must be > 0");
  if (!(d_mbg > d_m)) out.emplace_back("outlier.d_mbg must exceed outlier.d_m");
  if (t_s < 2) out.emplace_back("outlier.T_s must be much bigger than 1");
  return out;
}

std::optional<OutlierState> activate_with(std::span<const double> ts, std::size_t first,
                                          std::size_t second) {
  if (ts.size() < 2 || first == second || first >= ts.size() || second >= ts.size()) {
    return std::nullopt;
  }
  const double a = ts[first];
  const double b = ts[second];
  OutlierState s;
  s.active = true;
  // Equal draws keep their order: the first one seeds the high group.
  s.av_htg = a >= b ? a : b;
  s.av_ltg = a >= b ? b : a;
  s.last_av_htg = s.av_htg;
  s.last_av_ltg = s.av_ltg;
  return s;
}

std::optional<OutlierState> activate(std::span<const double> ts, std::mt19937_64& rng) {
  if (ts.size() < 2) return std::nullopt;
  const std::size_t first = uniform_index(rng, ts.size());
  std::size_t second = uniform_index(rng, ts.size() - 1);
  if (second >= first) ++second;
  return activate_with(ts, first, second);
}

namespace {

double mean_or(const std::vector<double>& v, double fallback) {
  if (v.empty()) return fallback;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

std::pair<OutlierState, TrustPartition> iterate_round(OutlierState state, std::span<const double> ts,
                                                      const OutlierThresholds& thresholds) {
  state.last_av_htg = state.av_htg;
  state.last_av_ltg = state.av_ltg;
  double high = state.av_htg;
  double low = state.av_ltg;
  TrustPartition part;
  int it = 0;
  while (it < kMaxLloydIterations) {
    ++it;
    part.htg.clear();
    part.ltg.clear();
    for (double v : ts) {
      if (std::abs(v - high) <= std::abs(v - low)) {
        part.htg.push_back(v);
      } else {
        part.ltg.push_back(v);
      }
    }
    // An empty group keeps its mean from before this iteration.
    const double next_high = mean_or(part.htg, high);
    const double next_low = mean_or(part.ltg, low);
    const bool settled =
        std::abs(next_high - high) < thresholds.d_m && std::abs(next_low - low) < thresholds.d_m;
    high = next_high;
    low = next_low;
    if (settled) break;
  }
  if (high < low) {
    std::swap(high, low);
    std::swap(part.htg, part.ltg);
  }
  state.av_htg = high;
  state.av_ltg = low;
  state.iterations = it;
  return {state, part};
}

OutlierState check_convergence(OutlierState state, const OutlierThresholds& thresholds) {
  const bool steady = std::abs(state.av_htg - state.last_av_htg) < thresholds.d_m &&
                      std::abs(state.av_ltg - state.last_av_ltg) < thresholds.d_m;
  const bool separated = state.av_htg - state.av_ltg > thresholds.d_mbg;
  state.streak = steady && separated ? state.streak + 1 : 0;
  if (state.streak > thresholds.t_s) state.converged = true;
  return state;
}

Classification classify(double trust, const OutlierState& state) {
  if (trust == 0.0 || !state.converged) return Classification::kUnknown;
  return std::abs(trust - state.av_htg) <= std::abs(trust - state.av_ltg) ? Classification::kTrusted
                                                                          : Classification::kSuspicious;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kTrusted: return "trusted";
    case Classification::kSuspicious: return "suspicious";
    case Classification::kUnknown: return "unknown";
  }
  return "?";
}

}  // namespace wsn
