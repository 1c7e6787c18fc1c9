#include "duality/hv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "duality/lp.hpp"

namespace duality::hv {
namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr std::size_t kMaxExactSettings = 8;
constexpr long long kMaxDenominator = 1LL << 16;
constexpr double kRationalTolerance = 1e-14;

// Best continued-fraction approximation with a bounded denominator, accepted
// only if it reproduces x to kRationalTolerance.
std::optional<Rational> rationalize(double x) {
  if (!std::isfinite(x)) return std::nullopt;
  const bool negative = x < 0.0;
  double r = std::abs(x);
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(r);
    if (a > 1e15) break;
    const auto ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0;
    const long long q2 = ai * q1 + q0;
    if (q2 > kMaxDenominator) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - std::abs(x)) <= kRationalTolerance) {
      Rational out(p1, q1);
      return negative ? Rational(-out) : out;
    }
    const double frac = r - a;
    if (frac <= 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

// Coefficient matrix split into blocks of four rows, one per setting, with a
// target distribution per block.
struct Design {
  std::size_t cols = 0;
  std::vector<std::vector<double>> rows;
  std::vector<double> target;
};

template <class Scalar>
struct ResidualSolution {
  Scalar residual{};
  std::vector<Scalar> weights;
};

// min t  s.t.  sum w = 1,  M w - u+ + u- = q,  (1/2) sum_block (u+ + u-) <= t.
template <class Scalar>
ResidualSolution<Scalar> solve_residual(const std::vector<std::vector<Scalar>>& m,
                                        const std::vector<Scalar>& q, std::size_t cols) {
  const std::size_t r = m.size();
  const std::size_t blocks = r / 4;
  const std::size_t n = cols + 2 * r + 1 + blocks;
  const std::size_t t_col = cols + 2 * r;
  lp::Problem<Scalar> p;
  p.num_vars = n;
  p.cost.assign(n, Scalar(0));
  p.cost[t_col] = Scalar(1);

  std::vector<Scalar> norm(n, Scalar(0));
  for (std::size_t j = 0; j < cols; ++j) norm[j] = Scalar(1);
  p.add_row(std::move(norm), Scalar(1));

  for (std::size_t i = 0; i < r; ++i) {
    std::vector<Scalar> row(n, Scalar(0));
    for (std::size_t j = 0; j < cols; ++j) row[j] = m[i][j];
    row[cols + i] = Scalar(-1);
    row[cols + r + i] = Scalar(1);
    p.add_row(std::move(row), q[i]);
  }
  const Scalar half = Scalar(1) / Scalar(2);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<Scalar> row(n, Scalar(0));
    for (std::size_t k = 0; k < 4; ++k) {
      row[cols + 4 * b + k] = half;
      row[cols + r + 4 * b + k] = half;
    }
    row[t_col] = Scalar(-1);
    row[t_col + 1 + b] = Scalar(1);
    p.add_row(std::move(row), Scalar(0));
  }

  const lp::Solution<Scalar> s = lp::solve(p);
  if (s.status != lp::Status::optimal) {
    throw std::logic_error("residual LP did not reach an optimum");
  }
  ResidualSolution<Scalar> out;
  out.residual = s.x[t_col];
  out.weights.assign(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(cols));
  return out;
}

struct DesignSolution {
  double residual = 0.0;
  std::vector<double> weights;
  bool exact = false;
};

DesignSolution solve_design(const Design& d, Arithmetic arithmetic, std::size_t num_settings) {
  bool use_exact = arithmetic == Arithmetic::exact ||
                   (arithmetic == Arithmetic::automatic && num_settings <= kMaxExactSettings);
  std::vector<std::vector<Rational>> mq;
  std::vector<Rational> qq;
  if (use_exact) {
    bool ok = true;
    for (const auto& row : d.rows) {
      std::vector<Rational> rr;
      rr.reserve(row.size());
      for (double v : row) {
        auto x = rationalize(v);
        if (!x) {
          ok = false;
          break;
        }
        rr.push_back(*x);
      }
      if (!ok) break;
      mq.push_back(std::move(rr));
    }
    for (std::size_t i = 0; ok && i < d.target.size(); ++i) {
      auto x = rationalize(d.target[i]);
      if (!x || *x < 0) ok = false;
      else qq.push_back(*x);
    }
    for (std::size_t b = 0; ok && b < qq.size() / 4; ++b) {
      if (qq[4 * b] + qq[4 * b + 1] + qq[4 * b + 2] + qq[4 * b + 3] != 1) ok = false;
    }
    if (!ok) {
      if (arithmetic == Arithmetic::exact) {
        throw std::invalid_argument("exact arithmetic requested but inputs are not rational");
      }
      use_exact = false;
    }
  }

  DesignSolution out;
  if (use_exact) {
    const auto s = solve_residual<Rational>(mq, qq, d.cols);
    out.exact = true;
    out.residual = static_cast<double>(s.residual);
    if (s.residual == 0) {
      out.weights.reserve(d.cols);
      for (const auto& w : s.weights) out.weights.push_back(static_cast<double>(w));
    }
    return out;
  }
  const auto s = solve_residual<double>(d.rows, d.target, d.cols);
  out.residual = std::max(0.0, s.residual);
  if (out.residual <= kFeasibilityTolerance) out.weights = s.weights;
  return out;
}

void validate_distribution(const JointDistribution& q) {
  double sum = 0.0;
  for (double v : q) {
    if (!std::isfinite(v) || v < -1e-12) {
      throw std::invalid_argument("target entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("target does not sum to 1");
}

Complex joint_amplitude(const Vector& psi, int alice_bit, const Vector& bob) {
  Complex a{};
  for (int ca = 0; ca < 4; ++ca) a += std::conj(bob(ca)) * psi(alice_bit * 4 + ca);
  return a;
}

JointDistribution joint_from_bob_pair(double phi, const Vector& plus, const Vector& minus) {
  const Vector psi = final_state(phi).amplitudes();
  JointDistribution q{};
  for (int s = 0; s < 2; ++s) {
    const int bit = s == 0 ? 1 : 0;  // s = 0 is |V>
    q[joint_index(s, Sign::plus)] = std::norm(joint_amplitude(psi, bit, plus));
    q[joint_index(s, Sign::minus)] = std::norm(joint_amplitude(psi, bit, minus));
  }
  const double total = q[0] + q[1] + q[2] + q[3];
  for (double& v : q) v /= total;
  return q;
}

}  // namespace

std::string to_string(Tag tag) { return tag == Tag::wave ? "wave" : "particle"; }

void validate_settings(const SettingsList& settings) {
  if (settings.empty()) throw std::invalid_argument("settings list is empty");
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (!std::isfinite(settings[i].theta2) || !std::isfinite(settings[i].phi)) {
      throw std::invalid_argument("settings must be finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (settings[i] == settings[j]) throw std::invalid_argument("settings must be distinct");
    }
  }
}

void HVModel::validate(std::size_t num_settings) const {
  if (strategies.size() != weights.size()) {
    throw std::invalid_argument("model needs one weight per strategy");
  }
  if (strategies.empty()) throw std::invalid_argument("model has no strategies");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1");
  for (const auto& s : strategies) {
    if (s.bob_outcomes.size() != num_settings) {
      throw std::invalid_argument("strategy does not cover every setting");
    }
  }
}

std::array<double, 2> particle_stats() { return {0.5, 0.5}; }

std::array<double, 2> wave_stats(double phi) {
  const double c = std::cos(phi / 2.0);
  const double c2 = c * c;
  return {c2, 1.0 - c2};
}

JointDistribution quantum_joint(double theta2, double phi) {
  return joint_from_bob_pair(phi, bob_ket(theta2), bob_ket(theta2 + kPi / 2.0));
}

JointDistribution orthogonal_pair_joint(double theta2, double phi) {
  if (std::abs(std::cos(2.0 * theta2)) > 1e-12) {
    throw std::domain_error("orthogonal pair is orthogonal only at theta2 = pi/4 + k pi/2");
  }
  const Vector phi_minus = bell_state(BellLabel::phi_minus).amplitudes();
  const Vector psi_plus = bell_state(BellLabel::psi_plus).amplitudes();
  const Vector plus = std::cos(theta2) * phi_minus + kI * std::sin(theta2) * psi_plus;
  const Vector minus = std::cos(theta2) * phi_minus - kI * std::sin(theta2) * psi_plus;
  return joint_from_bob_pair(phi, plus, minus);
}

std::vector<JointDistribution> predicted_joint(const HVModel& model, const SettingsList& settings) {
  validate_settings(settings);
  model.validate(settings.size());
  std::vector<JointDistribution> out(settings.size(), JointDistribution{});
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto wave = wave_stats(settings[k].phi);
    const auto particle = particle_stats();
    for (std::size_t l = 0; l < model.strategies.size(); ++l) {
      const auto& st = model.strategies[l];
      const auto& e = st.tag == Tag::wave ? wave : particle;
      for (int s = 0; s < 2; ++s) {
        out[k][joint_index(s, st.bob_outcomes[k])] += model.weights[l] * e[s];
      }
    }
  }
  return out;
}

std::vector<HVStrategy> enumerate_strategies(std::size_t num_settings) {
  if (num_settings == 0 || num_settings > kMaxSettings) {
    throw std::invalid_argument("strategy enumeration supports 1 to 16 settings");
  }
  const std::size_t per_tag = std::size_t{1} << num_settings;
  std::vector<HVStrategy> out;
  out.reserve(2 * per_tag);
  for (Tag tag : {Tag::particle, Tag::wave}) {
    for (std::size_t bits = 0; bits < per_tag; ++bits) {
      HVStrategy s{tag, std::vector<Sign>(num_settings)};
      for (std::size_t k = 0; k < num_settings; ++k) {
        const bool minus = (bits >> (num_settings - 1 - k)) & 1U;
        s.bob_outcomes[k] = minus ? Sign::minus : Sign::plus;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

FeasibilityResult feasibility(const std::vector<JointDistribution>& targets,
                              const SettingsList& settings, Arithmetic arithmetic) {
  validate_settings(settings);
  if (settings.size() > kMaxSettings) throw std::invalid_argument("at most 16 settings");
  if (targets.size() != settings.size()) {
    throw std::invalid_argument("need one target distribution per setting");
  }
  for (const auto& q : targets) validate_distribution(q);

  const std::vector<HVStrategy> strategies = enumerate_strategies(settings.size());
  Design d;
  d.cols = strategies.size();
  d.rows.assign(4 * settings.size(), std::vector<double>(d.cols, 0.0));
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto wave = wave_stats(settings[k].phi);
    const auto particle = particle_stats();
    for (std::size_t l = 0; l < strategies.size(); ++l) {
      const auto& e = strategies[l].tag == Tag::wave ? wave : particle;
      for (int s = 0; s < 2; ++s) {
        d.rows[4 * k + joint_index(s, strategies[l].bob_outcomes[k])][l] = e[s];
      }
    }
    for (int i = 0; i < 4; ++i) d.target.push_back(std::max(0.0, targets[k][i]));
  }

  const DesignSolution sol = solve_design(d, arithmetic, settings.size());
  FeasibilityResult out;
  out.exact = sol.exact;
  out.residual = sol.residual;
  out.feasible = !sol.weights.empty();
  if (out.feasible) {
    HVModel model;
    double sum = 0.0;
    for (std::size_t l = 0; l < strategies.size(); ++l) {
      if (sol.weights[l] > 1e-12) {
        model.strategies.push_back(strategies[l]);
        model.weights.push_back(sol.weights[l]);
        sum += sol.weights[l];
      }
    }
    for (double& w : model.weights) w /= sum;
    out.witness = std::move(model);
  }
  return out;
}

std::vector<JointDistribution> quantum_targets(const SettingsList& settings) {
  std::vector<JointDistribution> out;
  out.reserve(settings.size());
  for (const auto& s : settings) out.push_back(quantum_joint(s.theta2, s.phi));
  return out;
}

double chsh_local_bound() {
  int best = 0;
  for (int bits = 0; bits < 16; ++bits) {
    const int a = bits & 1 ? -1 : 1;
    const int a2 = bits & 2 ? -1 : 1;
    const int b = bits & 4 ? -1 : 1;
    const int b2 = bits & 8 ? -1 : 1;
    best = std::max(best, std::abs(a * b + a * b2 - a2 * b + a2 * b2));
  }
  return static_cast<double>(best);
}

LocalResult check_local(const LocalTargets& targets) {
  if (targets.empty() || targets.front().empty()) {
    throw std::invalid_argument("local targets need at least one setting per side");
  }
  const std::size_t ma = targets.size();
  const std::size_t mb = targets.front().size();
  for (const auto& row : targets) {
    if (row.size() != mb) throw std::invalid_argument("local targets must be rectangular");
  }
  if (ma + mb > kMaxSettings) throw std::invalid_argument("too many local settings");

  Design d;
  d.cols = std::size_t{1} << (ma + mb);
  d.rows.assign(4 * ma * mb, std::vector<double>(d.cols, 0.0));
  for (std::size_t i = 0; i < ma; ++i) {
    for (std::size_t j = 0; j < mb; ++j) {
      const auto p = targets[i][j].as_array();
      for (double v : p) {
        if (!std::isfinite(v) || v < -1e-12) throw std::invalid_argument("invalid local target");
        d.target.push_back(std::max(0.0, v));
      }
      const std::size_t block = 4 * (i * mb + j);
      for (std::size_t lam = 0; lam < d.cols; ++lam) {
        const int a = (lam >> (ma + mb - 1 - i)) & 1U;
        const int b = (lam >> (mb - 1 - j)) & 1U;
        d.rows[block + 2 * a + b][lam] = 1.0;
      }
    }
  }
  const DesignSolution sol = solve_design(d, Arithmetic::automatic, ma * mb);
  LocalResult out;
  out.residual = sol.residual;
  out.local = !sol.weights.empty();
  for (std::size_t lam = 0; out.local && lam < d.cols; ++lam) {
    if (sol.weights[lam] > 1e-12) {
      out.witness.emplace_back(static_cast<std::uint32_t>(lam), sol.weights[lam]);
    }
  }
  return out;
}

LocalTargets quantum_local_targets(const SettingsList& settings, const std::vector<double>& theta1) {
  validate_settings(settings);
  if (theta1.empty()) throw std::invalid_argument("need at least one Alice setting");
  for (const auto& s : settings) {
    if (std::abs(s.phi - settings.front().phi) > 1e-12) {
      throw std::invalid_argument("local check needs one common phi");
    }
  }
  LocalTargets out(theta1.size());
  for (std::size_t i = 0; i < theta1.size(); ++i) {
    for (const auto& s : settings) {
      out[i].push_back(coincidence_probabilities(
          {.phi = s.phi, .theta1 = theta1[i], .theta2 = s.theta2, .noise = {}}));
    }
  }
  return out;
}

}  // namespace duality::hv
