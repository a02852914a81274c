#include "wsn/phys_layer.hpp"

#include <cmath>
#include <stdexcept>

#include "wsn/rng.hpp"

namespace wsn {

std::vector<std::string> RadioParams::violations() const {
  std::vector<std::string> out;
  auto need = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string("radio.") + name + " must be > 0");
  };
  need(e_elec, "E_elec_nJ_per_bit");
  need(eps_fs, "eps_fs_pJ_per_bit_m2");
  need(eps_amp, "eps_amp_pJ_per_bit_m4");
  need(e_da, "E_DA_nJ_per_bit");
  need(e_h, "E_h_nJ_per_bit");
  need(e_m, "E_m_nJ_per_s");
  need(d_max_overhear, "D_m_s");
  return out;
}

std::vector<std::string> ChannelModel::violations() const {
  std::vector<std::string> out;
  if (!(alpha_bad > 0.0)) out.emplace_back("channel.alpha_0 must be > 0");
  if (!(alpha_good > 0.0)) out.emplace_back("channel.alpha_1 must be > 0");
  return out;
}

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double crossover_distance(const RadioParams& params) {
  return std::sqrt(params.eps_fs / params.eps_amp);
}

double tx_energy(double bits, double d, const RadioParams& params) {
  if (d < crossover_distance(params)) {
    return bits * params.e_elec + bits * params.eps_fs * d * d;
  }
  return bits * params.e_elec + bits * params.eps_amp * d * d * d * d;
}

double rx_energy(double bits, const RadioParams& params) {
  return bits * params.e_elec + bits * params.e_da;
}

double monitor_energy(std::optional<double> overhear_duration, double bits,
                      const RadioParams& params) {
  if (!overhear_duration) return params.d_max_overhear * params.e_m;
  if (!(*overhear_duration > 0.0) || *overhear_duration > params.d_max_overhear) {
    throw std::domain_error("overhear duration outside (0, D_m]");
  }
  return *overhear_duration * params.e_m + bits * params.e_h;
}

ChannelSample sample_channel(const ChannelModel& model, std::mt19937_64& rng) {
  const ChannelState state = uniform01(rng) < model.p_bad() ? ChannelState::kBad : ChannelState::kGood;
  const double rate = state == ChannelState::kBad ? model.alpha_bad : model.alpha_good;
  return {state, exponential(rng, rate)};
}

}  // namespace wsn
