#pragma once

// Dense state vectors for small registers of polarization qubits.
//
// Basis convention: |H> is index 0 and |V> is index 1 on every qubit, and
// qubit 0 is the most significant bit of the amplitude index. A register of
// three qubits (S, C, A) therefore stores |V H V> at index 0b101 = 5.

#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace duality {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

inline constexpr int kMaxQubits = 4;

enum class Polarization { H, V, D, A, R, L };

/// Single-qubit ket for one of the six standard polarizations:
/// D = (H+V)/sqrt2, A = (H-V)/sqrt2, R = (H-iV)/sqrt2, L = (H+iV)/sqrt2.
Vector polarization_ket(Polarization p);

class StateVector {
 public:
  /// Takes ownership of `amplitudes`; its length must be 2^n with 1 <= n <= 4
  /// and its norm must be 1 within 1e-9 (it is then rescaled to exactly 1).
  explicit StateVector(Vector amplitudes);

  /// Accepts any nonzero vector of valid length and normalizes it.
  static StateVector normalized(Vector amplitudes);
  /// Computational-basis product state, e.g. from_labels("VHV").
  static StateVector from_labels(std::string_view labels);
  static StateVector single(Polarization p);

  int num_qubits() const { return num_qubits_; }
  int dimension() const { return static_cast<int>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](int index) const { return amplitudes_(index); }

  /// Tensor product with `other` placed after this register's qubits.
  StateVector tensor(const StateVector& other) const;

 private:
  int num_qubits_;
  Vector amplitudes_;
};

class GateOp {
 public:
  /// Throws std::invalid_argument unless `matrix` is 2x2 or 4x4 and unitary
  /// within 1e-10.
  GateOp(Matrix matrix, std::string label);

  int dimension() const { return static_cast<int>(matrix_.rows()); }
  int num_targets() const { return dimension() == 2 ? 1 : 2; }
  const Matrix& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }

  GateOp adjoint() const;

 private:
  Matrix matrix_;
  std::string label_;
};

class Projector {
 public:
  /// Throws std::invalid_argument unless `matrix` is Hermitian and idempotent
  /// within 1e-10 with dimension 2 or 4.
  explicit Projector(Matrix matrix);

  /// Rank-one projector onto the (normalized) ray of `ket`.
  static Projector onto(const Vector& ket);

  int dimension() const { return static_cast<int>(matrix_.rows()); }
  int num_targets() const { return dimension() == 2 ? 1 : 2; }
  const Matrix& matrix() const { return matrix_; }

 private:
  Matrix matrix_;
};

enum class WaveplateKind { half, quarter };

/// Jones matrix of a waveplate with its fast axis at `angle` from H.
///   half:    [[cos2a, sin2a], [sin2a, -cos2a]]
///   quarter: R(a) diag(1, i) R(-a)
GateOp waveplate(WaveplateKind kind, double angle);

/// diag(1, e^{i phi}) on {|H>, |V>}.
GateOp phase_shifter(double phi);

GateOp hadamard();
GateOp pauli_z();
GateOp controlled_z();

/// Real rotation [[cos pi/8, -sin pi/8], [sin pi/8, cos pi/8]] with W Z W^dag = H.
GateOp w_gate();

/// Two-qubit gate on (control, target): identity on the target when the
/// control is |H>, Hadamard when it is |V>.
GateOp controlled_hadamard();

/// The same gate assembled as (I (x) W) CZ (I (x) W^dag).
GateOp controlled_hadamard_from_cz();

enum class BellLabel { phi_plus, phi_minus, psi_plus, psi_minus };

BellLabel parse_bell_label(std::string_view name);
StateVector bell_state(BellLabel label);

/// Applies `gate` on `targets` (first target is the gate's most significant
/// qubit). Throws std::invalid_argument on dimension mismatch or on
/// out-of-range / duplicated targets.
StateVector apply_gate(const StateVector& state, const GateOp& gate,
                       std::span<const int> targets);
StateVector apply_gate(const StateVector& state, const GateOp& gate,
                       std::initializer_list<int> targets);

/// Applies an arbitrary (not necessarily unitary) operator; the result is
/// returned unnormalized.
Vector apply_operator(const Vector& amplitudes, int num_qubits,
                      const Matrix& op, std::span<const int> targets);

/// Born rule <psi| P_targets |psi>, clamped into [0, 1].
double outcome_probability(const StateVector& state, const Projector& projector,
                           std::span<const int> targets);
double outcome_probability(const StateVector& state, const Projector& projector,
                           std::initializer_list<int> targets);

struct ConditionalState {
  double probability;
  /// State of the complementary qubits (in increasing index order); only
  /// meaningful when probability > 0.
  Vector amplitudes;
};

/// Projects `targets` onto the pure state `outcome` and returns the
/// probability together with the unnormalized-then-renormalized state left
/// on the remaining qubits.
ConditionalState condition_on(const StateVector& state, std::span<const int> targets,
                              const Vector& outcome);

/// |<a|b>|^2 for kets of equal length.
double fidelity(const Vector& a, const Vector& b);
double fidelity(const StateVector& a, const StateVector& b);

/// Singular values of the amplitude array reshaped across the bipartition
/// `partition` | rest, in descending order. Throws on an empty, improper or
/// malformed partition.
std::vector<double> schmidt_coefficients(const StateVector& state,
                                         std::span<const int> partition);
std::vector<double> schmidt_coefficients(const StateVector& state,
                                         std::initializer_list<int> partition);

Matrix kron(const Matrix& a, const Matrix& b);

/// Largest entry of |m - m'| used for the unitarity/idempotency checks.
double max_abs_difference(const Matrix& a, const Matrix& b);

}  // namespace duality
