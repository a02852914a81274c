#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wsn {

/// First-order radio constants, in SI units (J/bit, J/bit/m^2, J/bit/m^4,
/// J/s, s). Defaults are the reference parameter set.
struct RadioParams {
  double e_elec = 50e-9;
  double eps_fs = 10e-12;
  double eps_amp = 0.0013e-12;
  double e_da = 5e-9;
  double e_h = 5e-9;
  double e_m = 10e-9;
  double d_max_overhear = 10.0;

  std::vector<std::string> violations() const;
};

/// Two-state channel: rate of the bad state and of the good state.
struct ChannelModel {
  double alpha_bad = 3.0;
  double alpha_good = 7.0;

  double p_bad() const { return alpha_bad / (alpha_bad + alpha_good); }
  double p_good() const { return alpha_good / (alpha_bad + alpha_good); }
  std::vector<std::string> violations() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

/// Distance where the free-space and multipath amplifier terms meet.
double crossover_distance(const RadioParams& params);

double tx_energy(double bits, double d, const RadioParams& params);
double rx_energy(double bits, const RadioParams& params);

/// Monitoring cost for one k-bit packet. `overhear_duration` is empty when
/// the packet was never overheard; otherwise it must lie in (0, D_m].
double monitor_energy(std::optional<double> overhear_duration, double bits,
                      const RadioParams& params);

enum class ChannelState { kBad, kGood };

struct ChannelSample {
  ChannelState state;
  double holding_time;  // s, diagnostic only
};

ChannelSample sample_channel(const ChannelModel& model, std::mt19937_64& rng);

}  // namespace wsn
