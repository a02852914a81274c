#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wsn {

/// Thresholds of the two-group detector. `d_m` here is the mean-shift
/// tolerance, unrelated to the radio's overhearing window.
struct OutlierThresholds {
  double d_m = 0.05;
  double d_mbg = 0.1;
  int t_s = 60;

  /// Empty when valid; otherwise one message per violated constraint.
  std::vector<std::string> violations() const;
};

struct OutlierState {
  double av_htg = 0.0;
  double av_ltg = 0.0;
  double last_av_htg = 0.0;
  double last_av_ltg = 0.0;
  bool active = false;
  bool converged = false;
  int streak = 0;
  /// Lloyd iterations used by the most recent round.
  int iterations = 0;
};

struct TrustPartition {
  std::vector<double> htg;
  std::vector<double> ltg;
};

enum class Classification { kTrusted, kSuspicious, kUnknown };

/// Iterations allowed within one round before giving up on the fixpoint.
inline constexpr int kMaxLloydIterations = 100;

/// A node starts its detector only after interacting with more than two
/// nodes; callers check this before activate().
inline constexpr std::size_t kMinInteractions = 3;

/// Seeds the group means from two distinct positions of `ts`. nullopt when
/// `ts` holds fewer than two values.
std::optional<OutlierState> activate(std::span<const double> ts, std::mt19937_64& rng);

/// Same, with the two draw positions supplied (first drawn goes to HTG on a
/// tie).
std::optional<OutlierState> activate_with(std::span<const double> ts, std::size_t first,
                                          std::size_t second);

/// One round of two-means over the trust set, starting from the state's
/// current means. The previous means move to last_av_* for the convergence
/// check.
std::pair<OutlierState, TrustPartition> iterate_round(OutlierState state, std::span<const double> ts,
                                                      const OutlierThresholds& thresholds);

OutlierState check_convergence(OutlierState state, const OutlierThresholds& thresholds);

Classification classify(double trust, const OutlierState& state);

const char* to_string(Classification c);

}  // namespace wsn
