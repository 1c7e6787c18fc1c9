#pragma once

// Objective hidden-variable models for the system photon.
//
// Every strategy carries a wave/particle tag, which fixes the system's H/V
// statistics (e_w or e_p), and a deterministic Bob outcome per setting. One
// weight vector is shared by all settings. Outcome s = 0 is Alice's |V>.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duality/circuit.hpp"

namespace duality::hv {

enum class Tag { particle = 0, wave = 1 };

std::string to_string(Tag tag);

struct Setting {
  double theta2 = 0.0;
  double phi = 0.0;
  bool operator==(const Setting&) const = default;
};

/// Nonempty, finite and pairwise distinct.
using SettingsList = std::vector<Setting>;
void validate_settings(const SettingsList& settings);

/// q(s, b) indexed s * 2 + b with b = 0 for Bob's + and 1 for -.
using JointDistribution = std::array<double, 4>;

inline int joint_index(int s, Sign b) { return s * 2 + (b == Sign::plus ? 0 : 1); }

struct HVStrategy {
  Tag tag = Tag::particle;
  std::vector<Sign> bob_outcomes;
  bool operator==(const HVStrategy&) const = default;
};

/// Weights must be nonnegative and sum to 1 within 1e-12.
struct HVModel {
  std::vector<HVStrategy> strategies;
  std::vector<double> weights;

  /// Throws std::invalid_argument on a broken invariant or when a strategy
  /// does not define an outcome for each of `num_settings` settings.
  void validate(std::size_t num_settings) const;
};

std::array<double, 2> particle_stats();
std::array<double, 2> wave_stats(double phi);

/// Born-rule q(s, b) from final_state(phi) with Alice in H/V and Bob using
/// bob_projector(theta2, +/-).
JointDistribution quantum_joint(double theta2, double phi);

/// Same with Bob's pair cos(theta2)|phi-> +/- i sin(theta2)|psi+>. Throws
/// std::domain_error unless the pair is orthogonal (theta2 = pi/4 + k pi/2).
JointDistribution orthogonal_pair_joint(double theta2, double phi);

/// p(s, b | k) = sum_l w_l [b_l(k) = b] e_{tag_l}(s; phi_k).
std::vector<JointDistribution> predicted_joint(const HVModel& model, const SettingsList& settings);

inline constexpr std::size_t kMaxSettings = 16;

/// All 2 * 2^n strategies: particle before wave, then outcome bits with
/// setting 0 most significant and + as 0.
std::vector<HVStrategy> enumerate_strategies(std::size_t num_settings);

enum class Arithmetic { automatic, exact, floating };

struct FeasibilityResult {
  bool feasible = false;
  /// Present when feasible; only strategies with positive weight.
  std::optional<HVModel> witness;
  /// Smallest achievable max-over-settings total-variation distance.
  double residual = 0.0;
  bool exact = false;
};

inline constexpr double kFeasibilityTolerance = 1e-9;

/// Decides whether some objective model reproduces every target. Exact
/// rational arithmetic is used when every coefficient and target entry is a
/// small-denominator rational (automatic mode, at most 8 settings).
/// Throws std::invalid_argument on more than kMaxSettings settings or on a
/// target that is not a distribution.
FeasibilityResult feasibility(const std::vector<JointDistribution>& targets,
                              const SettingsList& settings,
                              Arithmetic arithmetic = Arithmetic::automatic);

/// quantum_joint evaluated on every setting.
std::vector<JointDistribution> quantum_targets(const SettingsList& settings);

/// max |S| over the 16 deterministic local assignments (a, a', b, b').
double chsh_local_bound();

/// Joint distributions p(a, b | theta1, theta2) for a two-party scenario,
/// index [alice setting][bob setting], entries ordered pp, pm, mp, mm.
using LocalTargets = std::vector<std::vector<OutcomeDistribution>>;

struct LocalResult {
  bool local = false;
  double residual = 0.0;
  /// Witness weights over deterministic (alice bits, bob bits) strategies.
  std::vector<std::pair<std::uint32_t, double>> witness;
};

/// LP membership test in the local polytope with deterministic strategies
/// assigning an outcome to each Alice and each Bob setting.
LocalResult check_local(const LocalTargets& targets);

/// Quantum targets for Alice at theta1 in {0, pi/4} and Bob at each entry of
/// `settings`, which must share one phi.
LocalTargets quantum_local_targets(const SettingsList& settings,
                                   const std::vector<double>& theta1 = {0.0, kPi / 4.0});

}  // namespace duality::hv
