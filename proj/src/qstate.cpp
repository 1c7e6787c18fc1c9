#include "duality/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duality {
namespace {

constexpr double kConstructionTolerance = 1e-10;

bool is_power_of_two_length(Eigen::Index n, int* qubits) {
  for (int q = 1; q <= kMaxQubits; ++q) {
    if (n == (Eigen::Index{1} << q)) {
      *qubits = q;
      return true;
    }
  }
  return false;
}

int checked_qubit_count(const Vector& amplitudes) {
  int qubits = 0;
  if (!is_power_of_two_length(amplitudes.size(), &qubits)) {
    throw std::invalid_argument("state vector length must be 2^n with 1 <= n <= 4, got " +
                                std::to_string(amplitudes.size()));
  }
  return qubits;
}

void check_targets(int num_qubits, std::span<const int> targets) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= num_qubits) {
      throw std::invalid_argument("target qubit " + std::to_string(targets[i]) +
                                  " out of range for a " + std::to_string(num_qubits) +
                                  "-qubit register");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) {
        throw std::invalid_argument("duplicated target qubit " + std::to_string(targets[i]));
      }
    }
  }
}

int bit_of(int num_qubits, int qubit) { return num_qubits - 1 - qubit; }

// Global index assembled from a value on the target qubits and a base index
// whose target bits are zero.
int scatter(int base, int local, int num_qubits, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  int index = base;
  for (int t = 0; t < k; ++t) {
    if ((local >> (k - 1 - t)) & 1) {
      index |= 1 << bit_of(num_qubits, targets[t]);
    }
  }
  return index;
}

int target_mask(int num_qubits, std::span<const int> targets) {
  int mask = 0;
  for (int t : targets) mask |= 1 << bit_of(num_qubits, t);
  return mask;
}

std::vector<int> complement(int num_qubits, std::span<const int> targets) {
  std::vector<int> rest;
  for (int q = 0; q < num_qubits; ++q) {
    if (std::find(targets.begin(), targets.end(), q) == targets.end()) rest.push_back(q);
  }
  return rest;
}

}  // namespace

Vector polarization_ket(Polarization p) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector v(2);
  switch (p) {
    case Polarization::H: v << 1.0, 0.0; break;
    case Polarization::V: v << 0.0, 1.0; break;
    case Polarization::D: v << r, r; break;
    case Polarization::A: v << r, -r; break;
    case Polarization::R: v << r, -kI * r; break;
    case Polarization::L: v << r, kI * r; break;
  }
  return v;
}

StateVector::StateVector(Vector amplitudes)
    : num_qubits_(checked_qubit_count(amplitudes)), amplitudes_(std::move(amplitudes)) {
  const double norm = amplitudes_.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-9) {
    throw std::invalid_argument("state vector is not normalized (norm " + std::to_string(norm) +
                                ")");
  }
  amplitudes_ /= norm;
}

StateVector StateVector::normalized(Vector amplitudes) {
  checked_qubit_count(amplitudes);
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  return StateVector(amplitudes / norm);
}

StateVector StateVector::from_labels(std::string_view labels) {
  if (labels.empty() || labels.size() > kMaxQubits) {
    throw std::invalid_argument("basis label must have 1 to 4 characters");
  }
  Vector v = Vector::Zero(Eigen::Index{1} << labels.size());
  int index = 0;
  for (char c : labels) {
    index <<= 1;
    if (c == 'V') {
      index |= 1;
    } else if (c != 'H') {
      throw std::invalid_argument(std::string("unknown basis label '") + c + "'");
    }
  }
  v(index) = 1.0;
  return StateVector(std::move(v));
}

StateVector StateVector::single(Polarization p) { return StateVector(polarization_ket(p)); }

StateVector StateVector::tensor(const StateVector& other) const {
  if (num_qubits_ + other.num_qubits_ > kMaxQubits) {
    throw std::invalid_argument("tensor product exceeds the 4-qubit register limit");
  }
  Vector out(dimension() * other.dimension());
  for (int i = 0; i < dimension(); ++i) {
    out.segment(i * other.dimension(), other.dimension()) = amplitudes_(i) * other.amplitudes_;
  }
  return StateVector(std::move(out));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

GateOp::GateOp(Matrix matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  if (matrix_.rows() != matrix_.cols() || (matrix_.rows() != 2 && matrix_.rows() != 4)) {
    throw std::invalid_argument("gate '" + label_ + "' must be 2x2 or 4x4");
  }
  const Matrix id = Matrix::Identity(matrix_.rows(), matrix_.cols());
  if (max_abs_difference(matrix_ * matrix_.adjoint(), id) > kConstructionTolerance) {
    throw std::invalid_argument("gate '" + label_ + "' is not unitary");
  }
}

GateOp GateOp::adjoint() const { return GateOp(matrix_.adjoint(), label_ + "^dag"); }

Projector::Projector(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || (matrix_.rows() != 2 && matrix_.rows() != 4)) {
    throw std::invalid_argument("projector must be 2x2 or 4x4");
  }
  if (max_abs_difference(matrix_, matrix_.adjoint()) > kConstructionTolerance) {
    throw std::invalid_argument("projector is not Hermitian");
  }
  if (max_abs_difference(matrix_ * matrix_, matrix_) > kConstructionTolerance) {
    throw std::invalid_argument("projector is not idempotent");
  }
}

Projector Projector::onto(const Vector& ket) {
  const double norm = ket.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("cannot project onto the zero vector");
  const Vector u = ket / norm;
  return Projector(u * u.adjoint());
}

GateOp waveplate(WaveplateKind kind, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Matrix m(2, 2);
  if (kind == WaveplateKind::half) {
    const double c2 = std::cos(2.0 * angle);
    const double s2 = std::sin(2.0 * angle);
    m << c2, s2, s2, -c2;
    return GateOp(std::move(m), "HWP");
  }
  m << c * c + kI * s * s, (1.0 - kI) * s * c, (1.0 - kI) * s * c, s * s + kI * c * c;
  return GateOp(std::move(m), "QWP");
}

GateOp phase_shifter(double phi) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = std::polar(1.0, phi);
  return GateOp(std::move(m), "PS");
}

GateOp hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m << r, r, r, -r;
  return GateOp(std::move(m), "H");
}

GateOp pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return GateOp(std::move(m), "Z");
}

GateOp controlled_z() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1.0;
  return GateOp(std::move(m), "CZ");
}

GateOp w_gate() {
  const double c = std::cos(kPi / 8.0);
  const double s = std::sin(kPi / 8.0);
  Matrix m(2, 2);
  m << c, -s, s, c;
  return GateOp(std::move(m), "W");
}

GateOp controlled_hadamard() {
  Matrix m = Matrix::Zero(4, 4);
  m.block(0, 0, 2, 2) = Matrix::Identity(2, 2);
  m.block(2, 2, 2, 2) = hadamard().matrix();
  return GateOp(std::move(m), "CH");
}

GateOp controlled_hadamard_from_cz() {
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix w = w_gate().matrix();
  const Matrix left = kron(id, w);
  const Matrix right = kron(id, w.adjoint());
  return GateOp(left * controlled_z().matrix() * right, "CH(W,CZ)");
}

BellLabel parse_bell_label(std::string_view name) {
  if (name == "phi+") return BellLabel::phi_plus;
  if (name == "phi-") return BellLabel::phi_minus;
  if (name == "psi+") return BellLabel::psi_plus;
  if (name == "psi-") return BellLabel::psi_minus;
  throw std::invalid_argument("unknown Bell state label '" + std::string(name) + "'");
}

StateVector bell_state(BellLabel label) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector v = Vector::Zero(4);
  switch (label) {
    case BellLabel::phi_plus: v(0) = r; v(3) = r; break;
    case BellLabel::phi_minus: v(0) = r; v(3) = -r; break;
    case BellLabel::psi_plus: v(1) = r; v(2) = r; break;
    case BellLabel::psi_minus: v(1) = r; v(2) = -r; break;
  }
  return StateVector(std::move(v));
}

Vector apply_operator(const Vector& amplitudes, int num_qubits, const Matrix& op,
                      std::span<const int> targets) {
  check_targets(num_qubits, targets);
  const int k = static_cast<int>(targets.size());
  if (k == 0 || op.rows() != (Eigen::Index{1} << k) || op.cols() != op.rows()) {
    throw std::invalid_argument("operator dimension " + std::to_string(op.rows()) +
                                " does not match " + std::to_string(k) + " target(s)");
  }
  const int dim = 1 << num_qubits;
  const int local_dim = 1 << k;
  const int mask = target_mask(num_qubits, targets);
  Vector out = Vector::Zero(dim);
  Vector local(local_dim);
  for (int base = 0; base < dim; ++base) {
    if (base & mask) continue;
    for (int j = 0; j < local_dim; ++j) local(j) = amplitudes(scatter(base, j, num_qubits, targets));
    const Vector mapped = op * local;
    for (int j = 0; j < local_dim; ++j) out(scatter(base, j, num_qubits, targets)) = mapped(j);
  }
  return out;
}

StateVector apply_gate(const StateVector& state, const GateOp& gate, std::span<const int> targets) {
  if (gate.num_targets() != static_cast<int>(targets.size())) {
    throw std::invalid_argument("gate '" + gate.label() + "' acts on " +
                                std::to_string(gate.num_targets()) + " qubit(s), got " +
                                std::to_string(targets.size()) + " target(s)");
  }
  return StateVector(
      apply_operator(state.amplitudes(), state.num_qubits(), gate.matrix(), targets));
}

StateVector apply_gate(const StateVector& state, const GateOp& gate,
                       std::initializer_list<int> targets) {
  return apply_gate(state, gate, std::span<const int>(targets.begin(), targets.size()));
}

double outcome_probability(const StateVector& state, const Projector& projector,
                           std::span<const int> targets) {
  if (projector.num_targets() != static_cast<int>(targets.size())) {
    throw std::invalid_argument("projector dimension does not match the target count");
  }
  const Vector projected =
      apply_operator(state.amplitudes(), state.num_qubits(), projector.matrix(), targets);
  const double p = state.amplitudes().dot(projected).real();
  return std::clamp(p, 0.0, 1.0);
}

double outcome_probability(const StateVector& state, const Projector& projector,
                           std::initializer_list<int> targets) {
  return outcome_probability(state, projector,
                             std::span<const int>(targets.begin(), targets.size()));
}

ConditionalState condition_on(const StateVector& state, std::span<const int> targets,
                              const Vector& outcome) {
  const int n = state.num_qubits();
  check_targets(n, targets);
  const int k = static_cast<int>(targets.size());
  if (k == 0 || k >= n) throw std::invalid_argument("conditioning needs a proper subset of qubits");
  if (outcome.size() != (Eigen::Index{1} << k)) {
    throw std::invalid_argument("outcome state dimension does not match the target count");
  }
  const Vector u = outcome / outcome.norm();
  const std::vector<int> rest = complement(n, targets);
  const int rest_dim = 1 << rest.size();
  Vector reduced = Vector::Zero(rest_dim);
  for (int r = 0; r < rest_dim; ++r) {
    const int base = scatter(0, r, n, rest);
    for (int j = 0; j < (1 << k); ++j) {
      reduced(r) += std::conj(u(j)) * state[scatter(base, j, n, targets)];
    }
  }
  const double p = reduced.squaredNorm();
  if (p > 0.0) reduced /= std::sqrt(p);
  return {p, reduced};
}

double fidelity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fidelity of kets with different sizes");
  return std::norm(a.dot(b));
}

double fidelity(const StateVector& a, const StateVector& b) {
  return fidelity(a.amplitudes(), b.amplitudes());
}

std::vector<double> schmidt_coefficients(const StateVector& state,
                                         std::span<const int> partition) {
  const int n = state.num_qubits();
  check_targets(n, partition);
  const int k = static_cast<int>(partition.size());
  if (k == 0 || k >= n) {
    throw std::invalid_argument("partition must be a nonempty proper subset of the qubits");
  }
  const std::vector<int> rest = complement(n, partition);
  const int rows = 1 << k;
  const int cols = 1 << rest.size();
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const int base = scatter(0, r, n, partition);
    for (int c = 0; c < cols; ++c) m(r, c) = state[scatter(base, c, n, rest)];
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& values = svd.singularValues();
  std::vector<double> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<double> schmidt_coefficients(const StateVector& state,
                                         std::initializer_list<int> partition) {
  return schmidt_coefficients(state, std::span<const int>(partition.begin(), partition.size()));
}

}  // namespace duality
