#pragma once

// Qubit-level model of the entanglement-controlled interferometer.
//
// Register order is (S, C, A): the system photon sent through the
// interferometer, the control photon driving the controlled Hadamard, and the
// ancilla photon entangled with the control.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "duality/qstate.hpp"

namespace duality {

inline constexpr int kSystem = 0;
inline constexpr int kControl = 1;
inline constexpr int kAncilla = 2;

inline constexpr double kDefaultDelta = kPi / 4.0;

enum class Sign { plus, minus };

inline int sign_value(Sign s) { return s == Sign::plus ? 1 : -1; }

/// Phenomenological imperfection model. `visibility` multiplies every
/// correlation; `background` is the fraction of uniformly distributed
/// accidental coincidences.
struct NoiseParams {
  double visibility = 1.0;
  double background = 0.0;

  /// Throws std::invalid_argument when either parameter is outside [0, 1].
  void validate() const;
  bool ideal() const { return visibility == 1.0 && background == 0.0; }
};

struct ExperimentConfig {
  double phi = 0.0;
  double delta = kDefaultDelta;
  double theta1 = 0.0;
  double theta2 = 0.0;
  NoiseParams noise;
};

/// Joint (Alice, Bob) outcome probabilities, first sign Alice's.
struct OutcomeDistribution {
  double pp = 0.0;
  double pm = 0.0;
  double mp = 0.0;
  double mm = 0.0;

  double correlation() const { return pp - pm - mp + mm; }
  double total() const { return pp + pm + mp + mm; }
  std::array<double, 4> as_array() const { return {pp, pm, mp, mm}; }
};

StateVector initial_state(double delta);

/// (|H> - e^{i phi}|V>)/sqrt2: H/V statistics independent of phi.
StateVector particle_state(double phi);
/// e^{i phi/2}(-i sin(phi/2)|H> + cos(phi/2)|V>): H/V statistics follow phi.
StateVector wave_state(double phi);

/// Local rotation on C taking |H> -> |R>, |V> -> |L>.
GateOp control_circular_map();
/// Local rotation on A taking |V> -> |R>, |H> -> |L>.
GateOp ancilla_circular_map();

/// Gate-by-gate evolution: Hadamard and phase shifter on S, controlled
/// Hadamard with C as control and S as target, then the circular maps on C
/// and A.
StateVector final_state(double phi, double delta = kDefaultDelta);

/// cos(theta1)|H> + sin(theta1)|V> for +, its orthogonal complement for -.
Projector alice_projector(double theta1, Sign sign);

/// cos(theta2)|phi-> + sin(theta2)|psi+> on (C, A).
Vector bob_ket(double theta2);
/// + projects onto bob_ket(theta2), - onto bob_ket(theta2 + pi/2).
Projector bob_projector(double theta2, Sign sign);

/// Applies the noise model to an ideal distribution:
/// p' = (1 - beta) [V p + (1 - V) u] + beta u with u uniform, so the
/// correlation scales as (1 - beta) V E.
OutcomeDistribution apply_noise(const OutcomeDistribution& ideal, const NoiseParams& noise);

/// Born-rule coincidence probabilities from final_state, renormalized over
/// the four detected outcome classes, then degraded by `config.noise`.
OutcomeDistribution coincidence_probabilities(const ExperimentConfig& config);

double correlation(const ExperimentConfig& config);

/// S = |E(a, b) + E(a, b') - E(a', b) + E(a', b')| with
/// (a, a') = theta1_pair and (b, b') = theta2_pair taken in the given order.
/// Throws when either pair is degenerate.
double chsh(double phi, std::pair<double, double> theta1_pair,
            std::pair<double, double> theta2_pair, const NoiseParams& noise = {},
            double delta = kDefaultDelta);

/// Largest |S| over the four placements of the minus sign among the four
/// correlations, i.e. over every relabelling of the two setting pairs.
double chsh_best_placement(double phi, std::pair<double, double> theta1_pair,
                           std::pair<double, double> theta2_pair, const NoiseParams& noise = {},
                           double delta = kDefaultDelta);

/// Uniform grid of `count` points covering [lo, hi] inclusive.
std::vector<double> linear_grid(double lo, double hi, int count);

struct CorrelationSurface {
  double theta1 = 0.0;
  std::vector<double> theta2;
  std::vector<double> phi;
  /// Row-major: values[i * phi.size() + j] = E(theta2[i], phi[j]).
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * phi.size() + j]; }
  double min() const;
  double max() const;
};

/// Default grids span theta2 in [-pi/2, pi/2] and phi in [0, 2pi].
CorrelationSurface correlation_surface(double theta1, const std::vector<double>& theta2_grid,
                                       const std::vector<double>& phi_grid,
                                       const NoiseParams& noise = {},
                                       double delta = kDefaultDelta);
CorrelationSurface correlation_surface(double theta1, int theta2_points = 9, int phi_points = 9,
                                       const NoiseParams& noise = {});

struct OutcomeCounts {
  std::int64_t pp = 0;
  std::int64_t pm = 0;
  std::int64_t mp = 0;
  std::int64_t mm = 0;

  std::int64_t total() const { return pp + pm + mp + mm; }
  bool operator==(const OutcomeCounts&) const = default;
};

/// Seed of the `index`-th independent stream derived from a base seed.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// Multinomial draw of `total` events by sequential binomial conditioning on
/// a 64-bit Mersenne Twister seeded with `seed`. Throws when total < 1.
OutcomeCounts sample_counts(const OutcomeDistribution& distribution, std::int64_t total,
                            std::uint64_t seed);

}  // namespace duality
