#include "duality/hv.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace duality;
using namespace duality::hv;

namespace {

HVModel random_model(std::mt19937_64& rng, std::size_t n) {
  const auto all = enumerate_strategies(n);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  HVModel m;
  const std::size_t k = 1 + pick(rng) % 5;
  double sum = 0;
  for (std::size_t i = 0; i < k; ++i) {
    m.strategies.push_back(all[pick(rng)]);
    m.weights.push_back(u(rng));
    sum += m.weights.back();
  }
  for (double& w : m.weights) w /= sum;
  return m;
}

SettingsList random_settings(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> t(-kPi / 2, kPi / 2);
  std::uniform_real_distribution<double> p(0, 2 * kPi);
  SettingsList s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({t(rng), p(rng)});
  return s;
}

std::vector<std::array<double, 4>> as_arrays(const std::vector<JointDistribution>& q) {
  return {q.begin(), q.end()};
}

std::vector<double> phis(const SettingsList& s) {
  std::vector<double> out;
  for (const auto& x : s) out.push_back(x.phi);
  return out;
}

}  // namespace

TEST(Stats, ParticleAndWave) {
  EXPECT_DOUBLE_EQ(particle_stats()[0], 0.5);
  EXPECT_DOUBLE_EQ(particle_stats()[1], 0.5);
  for (double phi : linear_grid(0, 2 * kPi, 13)) {
    const auto w = wave_stats(phi);
    EXPECT_NEAR(w[0] + w[1], 1.0, 1e-15);
    EXPECT_NEAR(w[0], std::norm(oracle::w_state(phi)(1)), 1e-14);
  }
  EXPECT_NEAR(wave_stats(0)[0], 1.0, 1e-15);
  EXPECT_NEAR(wave_stats(kPi)[0], 0.0, 1e-15);
}

TEST(Stats, StatesMatchDefinitions) {
  for (double phi : linear_grid(0, 2 * kPi, 9)) {
    EXPECT_NEAR(std::norm(particle_state(phi)[1]), particle_stats()[0], 1e-14);
    EXPECT_NEAR(std::norm(wave_state(phi)[1]), wave_stats(phi)[0], 1e-14);
  }
}

TEST(Settings, Validation) {
  EXPECT_THROW(validate_settings({}), std::invalid_argument);
  EXPECT_THROW(validate_settings({{0, 1}, {0, 1}}), std::invalid_argument);
  EXPECT_THROW(validate_settings({{std::nan(""), 1}}), std::invalid_argument);
  EXPECT_NO_THROW(validate_settings({{0, 1}, {0, 2}}));
}

TEST(Strategies, EnumerationOrder) {
  const auto s = enumerate_strategies(2);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s[0].tag, Tag::particle);
  EXPECT_EQ(s[4].tag, Tag::wave);
  EXPECT_EQ(s[1].bob_outcomes, (std::vector<Sign>{Sign::plus, Sign::minus}));
  EXPECT_EQ(s[2].bob_outcomes, (std::vector<Sign>{Sign::minus, Sign::plus}));
  EXPECT_THROW(enumerate_strategies(kMaxSettings + 1), std::invalid_argument);
  EXPECT_EQ(to_string(Tag::wave), "wave");
}

TEST(Model, ValidationRejectsBrokenWeights) {
  HVModel m;
  m.strategies = enumerate_strategies(1);
  m.weights = {0.5, 0.5, 0.1, -0.1};
  EXPECT_THROW(m.validate(1), std::invalid_argument);
  m.weights = {0.5, 0.5, 0.1, 0.0};
  EXPECT_THROW(m.validate(1), std::invalid_argument);
  m.weights = {0.25, 0.25, 0.25, 0.25};
  EXPECT_NO_THROW(m.validate(1));
  EXPECT_THROW(m.validate(2), std::invalid_argument);
  m.weights.pop_back();
  EXPECT_THROW(m.validate(1), std::invalid_argument);
  EXPECT_THROW(predicted_joint(m, {{0, 1}}), std::invalid_argument);
}

TEST(Model, PredictedJointFactorizes) {
  HVModel m;
  m.strategies = {{Tag::particle, {Sign::plus}}, {Tag::wave, {Sign::minus}}};
  m.weights = {0.3, 0.7};
  const double phi = 1.1;
  const auto q = predicted_joint(m, {{0.2, phi}})[0];
  const auto w = wave_stats(phi);
  EXPECT_NEAR(q[joint_index(0, Sign::plus)], 0.3 * 0.5, 1e-15);
  EXPECT_NEAR(q[joint_index(1, Sign::plus)], 0.3 * 0.5, 1e-15);
  EXPECT_NEAR(q[joint_index(0, Sign::minus)], 0.7 * w[0], 1e-15);
  EXPECT_NEAR(q[joint_index(1, Sign::minus)], 0.7 * w[1], 1e-15);
}

TEST(Quantum, JointMatchesBornRule) {
  for (double t : linear_grid(-kPi / 2, kPi / 2, 7)) {
    for (double phi : linear_grid(0, 2 * kPi, 7)) {
      const auto q = quantum_joint(t, phi);
      const Vector psi = final_state(phi).amplitudes();
      double sum = 0;
      for (int s = 0; s < 2; ++s) {
        for (Sign b : {Sign::plus, Sign::minus}) {
          const double tb = b == Sign::plus ? t : t + kPi / 2;
          const Vector ket = kron(polarization_ket(s == 0 ? Polarization::V : Polarization::H), bob_ket(tb));
          const double expect = std::norm(ket.dot(psi));
          EXPECT_NEAR(q[joint_index(s, b)], expect, 1e-12);
          sum += q[joint_index(s, b)];
        }
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Quantum, OrthogonalPairBasisOnlyWhenOrthogonal) {
  EXPECT_THROW(orthogonal_pair_joint(0.0, 1.0), std::domain_error);
  const auto q = orthogonal_pair_joint(kPi / 4, 1.0);
  EXPECT_NEAR(q[0] + q[1] + q[2] + q[3], 1.0, 1e-12);
}

TEST(Feasibility, SingleSettingAtQuarterTurnIsInfeasible) {
  const SettingsList s{{0.0, kPi / 2}};
  const auto r = feasibility(quantum_targets(s), s);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.residual, 0.5, 1e-12);
  EXPECT_FALSE(r.witness.has_value());
  const auto f = feasibility(quantum_targets(s), s, Arithmetic::floating);
  EXPECT_FALSE(f.feasible);
  EXPECT_FALSE(f.exact);
  EXPECT_NEAR(f.residual, 0.5, 1e-9);
}

TEST(Feasibility, ChshSettingsAreInfeasible) {
  const SettingsList s{{kPi / 8, 3 * kPi / 2}, {3 * kPi / 8, 3 * kPi / 2}};
  const auto r = feasibility(quantum_targets(s), s);
  EXPECT_FALSE(r.feasible);
  EXPECT_GT(r.residual, 0.3);
}

TEST(Feasibility, SomeSettingsAdmitModels) {
  // Objective models exist away from the quarter-turn phase.
  const SettingsList s{{kPi / 6, kPi / 6}};
  const auto r = feasibility(quantum_targets(s), s);
  ASSERT_TRUE(r.feasible);
  ASSERT_TRUE(r.witness.has_value());
  const auto back = predicted_joint(*r.witness, s)[0];
  const auto q = quantum_targets(s)[0];
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(back[i], q[i], 1e-9);

  for (const Setting& one : {Setting{0.0, 3 * kPi / 2}, Setting{0.0, 0.0}, Setting{-kPi / 4, 1.0}}) {
    const SettingsList single{one};
    EXPECT_TRUE(feasibility(quantum_targets(single), single).feasible) << one.theta2 << "," << one.phi;
  }

  const SettingsList a{{kPi / 4, 1.3}};
  const auto ra = feasibility({orthogonal_pair_joint(kPi / 4, 1.3)}, a);
  EXPECT_TRUE(ra.feasible);
}

TEST(Feasibility, ExactModeRationalTargets) {
  HVModel m;
  m.strategies = {{Tag::particle, {Sign::plus, Sign::minus}}, {Tag::wave, {Sign::minus, Sign::minus}}};
  m.weights = {0.25, 0.75};
  const SettingsList s{{0.1, 0.0}, {0.2, kPi}};
  const auto r = feasibility(predicted_joint(m, s), s, Arithmetic::exact);
  EXPECT_TRUE(r.feasible);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.residual, 0.0);
}

TEST(Feasibility, RejectsBadInput) {
  const SettingsList s{{0, 1}};
  EXPECT_THROW(feasibility({{0.5, 0.5, 0.5, 0.5}}, s), std::invalid_argument);
  EXPECT_THROW(feasibility({{-0.1, 0.6, 0.25, 0.25}}, s), std::invalid_argument);
  EXPECT_THROW(feasibility({}, s), std::invalid_argument);
  SettingsList many;
  for (std::size_t i = 0; i <= kMaxSettings; ++i) many.push_back({0.01 * i, 1.0});
  std::vector<JointDistribution> t(many.size(), {0.25, 0.25, 0.25, 0.25});
  EXPECT_THROW(feasibility(t, many), std::invalid_argument);
}

// Property: targets generated by any objective model are feasible and the
// witness reproduces them.
TEST(Properties, ModelRoundTrip) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const HVModel m = random_model(rng, n);
    const SettingsList s = random_settings(rng, n);
    const auto targets = predicted_joint(m, s);
    const auto r = feasibility(targets, s);
    ASSERT_TRUE(r.feasible) << trial << " residual " << r.residual;
    ASSERT_TRUE(r.witness.has_value());
    r.witness->validate(n);
    const auto back = predicted_joint(*r.witness, s);
    for (std::size_t k = 0; k < n; ++k) {
      for (int i = 0; i < 4; ++i) EXPECT_NEAR(back[k][i], targets[k][i], 1e-8);
    }
  }
}

// Property: the LP verdict agrees with the elimination oracle on random
// quantum targets.
TEST(Properties, AgreesWithEliminationOracle) {
  std::mt19937_64 rng(314);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const SettingsList s = random_settings(rng, n);
    const auto q = quantum_targets(s);
    const bool expect = oracle::objective_feasible(as_arrays(q), phis(s));
    const auto r = feasibility(q, s, Arithmetic::floating);
    EXPECT_EQ(r.feasible, expect) << trial << " residual " << r.residual;
    (expect ? feasible : infeasible) += 1;
  }
  EXPECT_GT(feasible, 5);
  EXPECT_GT(infeasible, 5);
}

// Property: mixtures of quantum targets with the objective-model targets
// keep the residual no larger than the quantum one.
TEST(Properties, ResidualIsConvex) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const SettingsList s = random_settings(rng, 2);
    const auto q = quantum_targets(s);
    const auto m = predicted_joint(random_model(rng, 2), s);
    const double r0 = feasibility(q, s, Arithmetic::floating).residual;
    std::vector<JointDistribution> mix(2);
    for (int k = 0; k < 2; ++k) {
      for (int i = 0; i < 4; ++i) mix[k][i] = 0.5 * q[k][i] + 0.5 * m[k][i];
    }
    EXPECT_LE(feasibility(mix, s, Arithmetic::floating).residual, 0.5 * r0 + 1e-9);
  }
}

TEST(Local, ChshBound) { EXPECT_DOUBLE_EQ(chsh_local_bound(), 2.0); }

TEST(Local, QuantumChshIsNonlocal) {
  const SettingsList s{{kPi / 8, 3 * kPi / 2}, {3 * kPi / 8, 3 * kPi / 2}};
  const auto r = check_local(quantum_local_targets(s));
  EXPECT_FALSE(r.local);
  EXPECT_GT(r.residual, 0.05);
  EXPECT_THROW(quantum_local_targets({{0, 1}, {0.2, 2}}), std::invalid_argument);
}

// Property: the polytope LP agrees with Fine's criterion on noisy quantum
// correlations.
TEST(Properties, LocalAgreesWithFine) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(-kPi / 2, kPi / 2);
  std::uniform_real_distribution<double> vis(0.4, 1.0);
  int nonlocal = 0, checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const double phi = trial % 2 ? 3 * kPi / 2 : kPi / 2 + 0.3 * ang(rng);
    const std::array<double, 2> a{ang(rng), ang(rng)};
    const std::array<double, 2> b{ang(rng), ang(rng)};
    const NoiseParams noise{vis(rng), 0.0};
    LocalTargets t(2, std::vector<OutcomeDistribution>(2));
    std::array<double, 4> e{};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        t[i][j] = coincidence_probabilities({phi, kDefaultDelta, a[i], b[j], noise});
        e[2 * i + j] = t[i][j].correlation();
      }
    }
    double smax = 0;
    const double sum = e[0] + e[1] + e[2] + e[3];
    for (double v : e) smax = std::max(smax, std::abs(sum - 2 * v));
    if (std::abs(smax - 2) < 1e-6) continue;
    ++checked;
    const bool expect = oracle::chsh_local(e);
    EXPECT_EQ(check_local(t).local, expect) << trial << " S " << smax;
    nonlocal += expect ? 0 : 1;
  }
  EXPECT_GT(checked, 100);
  EXPECT_GT(nonlocal, 10);
}
