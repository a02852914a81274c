#include <doctest.h>

#include <cmath>
#include <random>

#include "wsn/phys_layer.hpp"

using namespace wsn;

TEST_SUITE("phys_layer") {

TEST_CASE("crossover distance") {
  const RadioParams p;
  CHECK(crossover_distance(p) == doctest::Approx(87.7058).epsilon(1e-6));
  RadioParams eq;
  eq.eps_amp = eq.eps_fs;
  CHECK(crossover_distance(eq) == 1.0);
}

TEST_CASE("transmit, receive and monitoring energy") {
  const RadioParams p;
  CHECK(tx_energy(3000, 50, p) == doctest::Approx(2.25e-4).epsilon(1e-12));
  CHECK(tx_energy(3000, 100, p) == doctest::Approx(5.4e-4).epsilon(1e-12));
  CHECK(tx_energy(0, 70, p) == 0.0);
  CHECK(rx_energy(3000, p) == doctest::Approx(1.65e-4).epsilon(1e-12));
  CHECK(rx_energy(0, p) == 0.0);
  CHECK(monitor_energy(std::nullopt, 3000, p) == doctest::Approx(1.0e-7).epsilon(1e-12));
  CHECK(monitor_energy(1.0, 3000, p) == doctest::Approx(1.501e-5).epsilon(1e-12));
  CHECK(monitor_energy(1e-12, 0, p) < 1e-19);
  CHECK_THROWS(monitor_energy(0.0, 3000, p));
  CHECK_THROWS(monitor_energy(10.5, 3000, p));
}

TEST_CASE("transmit energy is continuous at the crossover") {
  const RadioParams p;
  const double d0 = crossover_distance(p);
  const double fs = 3000 * p.e_elec + 3000 * p.eps_fs * d0 * d0;
  const double mp = 3000 * p.e_elec + 3000 * p.eps_amp * d0 * d0 * d0 * d0;
  CHECK(std::abs(fs - mp) / fs < 1e-12);
  const double below = tx_energy(3000, std::nextafter(d0, 0.0), p);
  const double at = tx_energy(3000, d0, p);
  CHECK(std::abs(at - below) / at < 1e-12);
}

TEST_CASE("channel stationary distribution") {
  const ChannelModel m;
  CHECK(m.p_bad() == doctest::Approx(0.3));
  CHECK(ChannelModel{2.0, 2.0}.p_bad() == 0.5);
  std::mt19937_64 rng(5);
  int bad = 0;
  constexpr int kN = 200000;
  double hold = 0.0;
  for (int i = 0; i < kN; ++i) {
    const auto s = sample_channel(m, rng);
    bad += s.state == ChannelState::kBad;
    CHECK(s.holding_time >= 0.0);
    hold += s.holding_time;
  }
  CHECK(bad / double(kN) == doctest::Approx(0.3).epsilon(0.03));
  CHECK(hold > 0.0);
}

TEST_CASE("parameter validation") {
  CHECK(RadioParams{}.violations().empty());
  RadioParams bad;
  bad.e_elec = 0.0;
  bad.d_max_overhear = -1.0;
  CHECK(bad.violations().size() == 2);
  CHECK(ChannelModel{0.0, 1.0}.violations().size() == 1);
}

}  // TEST_SUITE
