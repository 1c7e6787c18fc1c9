#include "duality/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>

namespace duality {
namespace {

constexpr int kAliceTargets[] = {kSystem};
constexpr int kBobTargets[] = {kControl, kAncilla};

double joint_probability(const StateVector& state, const Projector& alice, const Projector& bob) {
  Vector v = apply_operator(state.amplitudes(), state.num_qubits(), alice.matrix(), kAliceTargets);
  v = apply_operator(v, state.num_qubits(), bob.matrix(), kBobTargets);
  return std::max(0.0, state.amplitudes().dot(v).real());
}

void check_pair(std::pair<double, double> pair, const char* what) {
  if (!std::isfinite(pair.first) || !std::isfinite(pair.second) ||
      std::abs(pair.first - pair.second) < 1e-12) {
    throw std::invalid_argument(std::string("degenerate ") + what + " pair");
  }
}

}  // namespace

void NoiseParams::validate() const {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("visibility must lie in [0, 1]");
  }
  if (!(background >= 0.0 && background <= 1.0)) {
    throw std::invalid_argument("background must lie in [0, 1]");
  }
}

StateVector initial_state(double delta) {
  Vector v = Vector::Zero(8);
  const double r = 1.0 / std::sqrt(2.0);
  v(0b101) = r;                          // |V>_S |H V>_CA
  v(0b110) = std::polar(r, delta);       // |V>_S |V H>_CA
  return StateVector(std::move(v));
}

StateVector particle_state(double phi) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector v(2);
  v << r, -std::polar(r, phi);
  return StateVector(std::move(v));
}

StateVector wave_state(double phi) {
  const Complex global = std::polar(1.0, phi / 2.0);
  Vector v(2);
  v << global * (-kI * std::sin(phi / 2.0)), global * std::cos(phi / 2.0);
  return StateVector(std::move(v));
}

GateOp control_circular_map() {
  Matrix m(2, 2);
  m.col(0) = polarization_ket(Polarization::R);
  m.col(1) = polarization_ket(Polarization::L);
  return GateOp(std::move(m), "C:H->R,V->L");
}

GateOp ancilla_circular_map() {
  Matrix m(2, 2);
  m.col(0) = polarization_ket(Polarization::L);
  m.col(1) = polarization_ket(Polarization::R);
  return GateOp(std::move(m), "A:H->L,V->R");
}

StateVector final_state(double phi, double delta) {
  StateVector s = initial_state(delta);
  s = apply_gate(s, hadamard(), {kSystem});
  s = apply_gate(s, phase_shifter(phi), {kSystem});
  s = apply_gate(s, controlled_hadamard(), {kControl, kSystem});
  s = apply_gate(s, control_circular_map(), {kControl});
  s = apply_gate(s, ancilla_circular_map(), {kAncilla});
  return s;
}

Projector alice_projector(double theta1, Sign sign) {
  Vector v(2);
  if (sign == Sign::plus) {
    v << std::cos(theta1), std::sin(theta1);
  } else {
    v << -std::sin(theta1), std::cos(theta1);
  }
  return Projector::onto(v);
}

Vector bob_ket(double theta2) {
  return std::cos(theta2) * bell_state(BellLabel::phi_minus).amplitudes() +
         std::sin(theta2) * bell_state(BellLabel::psi_plus).amplitudes();
}

Projector bob_projector(double theta2, Sign sign) {
  return Projector::onto(bob_ket(sign == Sign::plus ? theta2 : theta2 + kPi / 2.0));
}

OutcomeDistribution apply_noise(const OutcomeDistribution& ideal, const NoiseParams& noise) {
  noise.validate();
  const double keep = (1.0 - noise.background) * noise.visibility;
  const double uniform = (1.0 - keep) * 0.25;
  return {keep * ideal.pp + uniform, keep * ideal.pm + uniform, keep * ideal.mp + uniform,
          keep * ideal.mm + uniform};
}

OutcomeDistribution coincidence_probabilities(const ExperimentConfig& config) {
  config.noise.validate();
  const StateVector state = final_state(config.phi, config.delta);
  OutcomeDistribution d;
  d.pp = joint_probability(state, alice_projector(config.theta1, Sign::plus),
                           bob_projector(config.theta2, Sign::plus));
  d.pm = joint_probability(state, alice_projector(config.theta1, Sign::plus),
                           bob_projector(config.theta2, Sign::minus));
  d.mp = joint_probability(state, alice_projector(config.theta1, Sign::minus),
                           bob_projector(config.theta2, Sign::plus));
  d.mm = joint_probability(state, alice_projector(config.theta1, Sign::minus),
                           bob_projector(config.theta2, Sign::minus));
  // Post-selection on a detected Bob outcome. For delta = pi/4 the CA part of
  // the final state lies in span{phi-, psi+} and this total is already 1.
  const double total = d.total();
  if (!(total > 0.0)) throw std::domain_error("no coincidences at this setting");
  d = {d.pp / total, d.pm / total, d.mp / total, d.mm / total};
  return config.noise.ideal() ? d : apply_noise(d, config.noise);
}

double correlation(const ExperimentConfig& config) {
  return coincidence_probabilities(config).correlation();
}

double chsh(double phi, std::pair<double, double> theta1_pair,
            std::pair<double, double> theta2_pair, const NoiseParams& noise, double delta) {
  check_pair(theta1_pair, "theta1");
  check_pair(theta2_pair, "theta2");
  auto e = [&](double t1, double t2) {
    return correlation({.phi = phi, .delta = delta, .theta1 = t1, .theta2 = t2, .noise = noise});
  };
  const auto [a, a2] = theta1_pair;
  const auto [b, b2] = theta2_pair;
  return std::abs(e(a, b) + e(a, b2) - e(a2, b) + e(a2, b2));
}

double chsh_best_placement(double phi, std::pair<double, double> theta1_pair,
                           std::pair<double, double> theta2_pair, const NoiseParams& noise,
                           double delta) {
  check_pair(theta1_pair, "theta1");
  check_pair(theta2_pair, "theta2");
  const std::array<double, 2> t1{theta1_pair.first, theta1_pair.second};
  const std::array<double, 2> t2{theta2_pair.first, theta2_pair.second};
  std::array<double, 4> e{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      e[2 * i + j] = correlation(
          {.phi = phi, .delta = delta, .theta1 = t1[i], .theta2 = t2[j], .noise = noise});
    }
  }
  const double sum = e[0] + e[1] + e[2] + e[3];
  double best = 0.0;
  for (double v : e) best = std::max(best, std::abs(sum - 2.0 * v));
  return best;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  return g;
}

double CorrelationSurface::min() const { return *std::min_element(values.begin(), values.end()); }
double CorrelationSurface::max() const { return *std::max_element(values.begin(), values.end()); }

CorrelationSurface correlation_surface(double theta1, const std::vector<double>& theta2_grid,
                                       const std::vector<double>& phi_grid,
                                       const NoiseParams& noise, double delta) {
  if (theta2_grid.empty() || phi_grid.empty()) {
    throw std::invalid_argument("correlation surface grids must be nonempty");
  }
  CorrelationSurface s{theta1, theta2_grid, phi_grid, {}};
  s.values.reserve(theta2_grid.size() * phi_grid.size());
  for (double t2 : theta2_grid) {
    for (double phi : phi_grid) {
      s.values.push_back(correlation(
          {.phi = phi, .delta = delta, .theta1 = theta1, .theta2 = t2, .noise = noise}));
    }
  }
  return s;
}

CorrelationSurface correlation_surface(double theta1, int theta2_points, int phi_points,
                                       const NoiseParams& noise) {
  return correlation_surface(theta1, linear_grid(-kPi / 2.0, kPi / 2.0, theta2_points),
                             linear_grid(0.0, 2.0 * kPi, phi_points), noise);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a golden-ratio combination of seed and index.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

OutcomeCounts sample_counts(const OutcomeDistribution& distribution, std::int64_t total,
                            std::uint64_t seed) {
  if (total < 1) throw std::invalid_argument("sample_counts needs a positive total");
  const std::array<double, 4> p = distribution.as_array();
  double mass = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("outcome probabilities must be finite and nonnegative");
    }
    mass += x;
  }
  if (!(mass > 0.0)) throw std::invalid_argument("outcome distribution has zero mass");

  boost::random::mt19937_64 engine(seed);
  std::array<std::int64_t, 4> n{};
  std::int64_t remaining = total;
  double remaining_mass = mass;
  for (int k = 0; k < 3 && remaining > 0; ++k) {
    const double q = remaining_mass > 0.0 ? std::clamp(p[k] / remaining_mass, 0.0, 1.0) : 0.0;
    if (q >= 1.0) {
      n[k] = remaining;
    } else if (q > 0.0) {
      boost::random::binomial_distribution<std::int64_t, double> draw(remaining, q);
      n[k] = draw(engine);
    }
    remaining -= n[k];
    remaining_mass -= p[k];
  }
  n[3] = remaining;
  return {n[0], n[1], n[2], n[3]};
}

}  // namespace duality
