#include "duality/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duality::fock {
namespace {

constexpr double kPruneAmplitude = 1e-15;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// sqrt(prod_m n_m!) over the multiplicities of a sorted pattern.
double occupation_norm(const Pattern& p) {
  double prod = 1.0;
  for (std::size_t i = 0; i < p.size();) {
    std::size_t j = i;
    while (j < p.size() && p[j] == p[i]) ++j;
    prod *= factorial(static_cast<int>(j - i));
    i = j;
  }
  return std::sqrt(prod);
}

void check_transmission(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " transmission must lie in [0, 1]");
  }
}

void check_declared(const ModeState& state, const std::string& spatial) {
  if (!state.declares(spatial)) {
    throw std::invalid_argument("unknown spatial mode '" + spatial + "'");
  }
}

void expand(const Pattern& in, std::size_t index, const LinearElement& element,
            Pattern& chosen, Complex coefficient, std::map<Pattern, Complex>& out) {
  if (index == in.size()) {
    Pattern sorted = chosen;
    std::sort(sorted.begin(), sorted.end());
    const double norm = occupation_norm(sorted);
    out[std::move(sorted)] += coefficient * norm;
    return;
  }
  const Mode& m = in[index];
  const bool touched =
      std::find(element.touches.begin(), element.touches.end(), m.spatial) != element.touches.end();
  if (!touched) {
    chosen.push_back(m);
    expand(in, index + 1, element, chosen, coefficient, out);
    chosen.pop_back();
    return;
  }
  for (const auto& [image_mode, c] : element.image(m)) {
    chosen.push_back(image_mode);
    expand(in, index + 1, element, chosen, coefficient * c, out);
    chosen.pop_back();
  }
}

Vector basis_ket(int bit) {
  Vector v = Vector::Zero(2);
  v(bit) = 1.0;
  return v;
}

}  // namespace

ModeState ModeState::vacuum(std::set<std::string> spatial_modes) {
  ModeState s;
  s.spatial_modes_ = std::move(spatial_modes);
  s.terms_[Pattern{}] = 1.0;
  return s;
}

ModeState ModeState::photon(std::set<std::string> spatial_modes, const std::string& spatial,
                            const Vector& polarization, int temporal) {
  if (polarization.size() != 2 || !(polarization.norm() > 0.0)) {
    throw std::invalid_argument("photon polarization must be a nonzero 2-vector");
  }
  ModeState s;
  s.spatial_modes_ = std::move(spatial_modes);
  check_declared(s, spatial);
  const Vector u = polarization / polarization.norm();
  s.add({Mode{spatial, Pol::H, temporal}}, u(0));
  s.add({Mode{spatial, Pol::V, temporal}}, u(1));
  return s;
}

ModeState ModeState::photon_pair(std::set<std::string> spatial_modes, const std::string& first,
                                 const std::string& second, const Vector& joint,
                                 int first_temporal, int second_temporal) {
  if (first == second) throw std::invalid_argument("photon pair needs two distinct spatial modes");
  if (joint.size() != 4 || !(joint.norm() > 0.0)) {
    throw std::invalid_argument("photon pair amplitudes must be a nonzero 4-vector");
  }
  ModeState s;
  s.spatial_modes_ = std::move(spatial_modes);
  check_declared(s, first);
  check_declared(s, second);
  const Vector u = joint / joint.norm();
  for (int idx = 0; idx < 4; ++idx) {
    Pattern p{Mode{first, static_cast<Pol>(idx >> 1), first_temporal},
              Mode{second, static_cast<Pol>(idx & 1), second_temporal}};
    std::sort(p.begin(), p.end());
    s.add(std::move(p), u(idx));
  }
  return s;
}

ModeState ModeState::product(const ModeState& other) const {
  ModeState s;
  s.spatial_modes_ = spatial_modes_;
  s.spatial_modes_.insert(other.spatial_modes_.begin(), other.spatial_modes_.end());
  for (const auto& [p1, c1] : terms_) {
    for (const auto& [p2, c2] : other.terms_) {
      Pattern merged = p1;
      merged.insert(merged.end(), p2.begin(), p2.end());
      std::sort(merged.begin(), merged.end());
      const double scale = occupation_norm(merged) / (occupation_norm(p1) * occupation_norm(p2));
      s.add(std::move(merged), c1 * c2 * scale);
    }
  }
  return s;
}

double ModeState::norm_squared() const {
  double n = 0.0;
  for (const auto& [p, c] : terms_) n += std::norm(c);
  return n;
}

std::set<int> ModeState::photon_numbers() const {
  std::set<int> out;
  for (const auto& [p, c] : terms_) out.insert(static_cast<int>(p.size()));
  return out;
}

void ModeState::add(Pattern pattern, Complex amplitude) {
  if (std::abs(amplitude) < kPruneAmplitude) return;
  auto [it, inserted] = terms_.try_emplace(std::move(pattern), amplitude);
  if (!inserted) {
    it->second += amplitude;
    if (std::abs(it->second) < kPruneAmplitude) terms_.erase(it);
  }
}

ModeState apply(const ModeState& state, const LinearElement& element) {
  for (const auto& spatial : element.touches) check_declared(state, spatial);
  std::map<Pattern, Complex> accumulated;
  Pattern chosen;
  for (const auto& [pattern, c] : state.terms()) {
    chosen.clear();
    expand(pattern, 0, element, chosen, c / occupation_norm(pattern), accumulated);
  }
  ModeState out = ModeState::vacuum(state.spatial_modes());
  for (const auto& spatial : element.creates) out.declare(spatial);
  out.add(Pattern{}, -1.0);  // drop the vacuum term seeded by vacuum()
  for (auto& [pattern, c] : accumulated) out.add(pattern, c);
  return out;
}

LinearElement polarization_element(const std::string& spatial, const Matrix& jones,
                                   std::string name) {
  if (jones.rows() != 2 || jones.cols() != 2) {
    throw std::invalid_argument("Jones matrix must be 2x2");
  }
  return {std::move(name), {spatial}, {}, [spatial, jones](const Mode& m) {
            ModeImage img;
            const int col = static_cast<int>(m.pol);
            for (int row = 0; row < 2; ++row) {
              if (jones(row, col) != Complex{}) {
                img.push_back({Mode{spatial, static_cast<Pol>(row), m.temporal}, jones(row, col)});
              }
            }
            return img;
          }};
}

LinearElement ppbs(const std::string& a, const std::string& b, double t_h, double t_v) {
  check_transmission(t_h, "H");
  check_transmission(t_v, "V");
  if (a == b) throw std::invalid_argument("beam splitter ports must differ");
  return {"ppbs", {a, b}, {}, [a, b, t_h, t_v](const Mode& m) {
            const double t = m.pol == Pol::H ? t_h : t_v;
            const double st = std::sqrt(t);
            const double sr = std::sqrt(1.0 - t);
            ModeImage img;
            if (m.spatial == a) {
              if (st > 0.0) img.push_back({Mode{a, m.pol, m.temporal}, st});
              if (sr > 0.0) img.push_back({Mode{b, m.pol, m.temporal}, sr});
            } else {
              if (sr > 0.0) img.push_back({Mode{a, m.pol, m.temporal}, sr});
              if (st > 0.0) img.push_back({Mode{b, m.pol, m.temporal}, -st});
            }
            return img;
          }};
}

LinearElement pbs(const std::string& a, const std::string& b) {
  LinearElement e = ppbs(a, b, 1.0, 0.0);
  e.name = "pbs";
  return e;
}

LinearElement attenuator(const std::string& spatial, Pol pol, double eta) {
  check_transmission(eta, "attenuator");
  const std::string loss = spatial + ".loss";
  return {"attenuator", {spatial}, {loss}, [spatial, loss, pol, eta](const Mode& m) {
            ModeImage img;
            if (m.pol != pol) {
              img.push_back({m, 1.0});
              return img;
            }
            if (eta > 0.0) img.push_back({m, std::sqrt(eta)});
            if (eta < 1.0) img.push_back({Mode{loss, m.pol, m.temporal}, std::sqrt(1.0 - eta)});
            return img;
          }};
}

ModeState ppbs_transform(const ModeState& state,
                         const std::pair<std::string, std::string>& ports, double t_h,
                         double t_v) {
  return apply(state, ppbs(ports.first, ports.second, t_h, t_v));
}

Matrix ppbs_transfer_matrix(double transmission) {
  check_transmission(transmission, "PPBS");
  const double st = std::sqrt(transmission);
  const double sr = std::sqrt(1.0 - transmission);
  Matrix m(2, 2);
  // Columns are input ports (a, b), rows output ports.
  m << st, sr, sr, -st;
  return m;
}

ModeState postselect(const ModeState& state, const std::vector<std::string>& detectors) {
  ModeState out = ModeState::vacuum(state.spatial_modes());
  out.add(Pattern{}, -1.0);
  for (const auto& [pattern, c] : state.terms()) {
    if (pattern.size() != detectors.size()) continue;
    bool ok = true;
    for (const auto& d : detectors) {
      const auto n = std::count_if(pattern.begin(), pattern.end(),
                                   [&](const Mode& m) { return m.spatial == d; });
      if (n != 1) {
        ok = false;
        break;
      }
    }
    if (ok) out.add(pattern, c);
  }
  return out;
}

std::map<std::vector<int>, Vector> detector_amplitudes(const ModeState& state,
                                                       const std::vector<std::string>& detectors) {
  const int k = static_cast<int>(detectors.size());
  std::map<std::vector<int>, Vector> out;
  const ModeState kept = postselect(state, detectors);
  for (const auto& [pattern, c] : kept.terms()) {
    std::vector<int> temporal(k);
    int index = 0;
    for (int i = 0; i < k; ++i) {
      const auto it = std::find_if(pattern.begin(), pattern.end(),
                                   [&](const Mode& m) { return m.spatial == detectors[i]; });
      temporal[i] = it->temporal;
      index = (index << 1) | static_cast<int>(it->pol);
    }
    auto [slot, inserted] = out.try_emplace(temporal, Vector::Zero(1 << k));
    slot->second(index) += c;
  }
  return out;
}

double detection_probability(const Ensemble& ensemble, const std::vector<std::string>& detectors) {
  double p = 0.0;
  for (const auto& branch : ensemble) {
    if (branch.weight > 0.0) p += branch.weight * postselect(branch.state, detectors).norm_squared();
  }
  return p;
}

OverlapModel OverlapModel::constant(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("overlap must lie in [0, 1]");
  return OverlapModel(v, 0.0, std::nullopt);
}

OverlapModel OverlapModel::gaussian(double x0_mm, double sigma_mm) {
  if (!(sigma_mm > 0.0) || !std::isfinite(x0_mm)) {
    throw std::invalid_argument("Gaussian overlap needs finite x0 and sigma > 0");
  }
  return OverlapModel(1.0, x0_mm, sigma_mm);
}

double OverlapModel::at(double position_mm) const {
  if (!sigma_mm_) return v_;
  const double d = (position_mm - x0_mm_) / *sigma_mm_;
  return std::exp(-0.5 * d * d);
}

double hom_coincidence(double transmission, double overlap) {
  check_transmission(transmission, "beam splitter");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("overlap must lie in [0, 1]");
  const std::set<std::string> modes{"a", "b"};
  const Vector v = basis_ket(1);
  const LinearElement bs = ppbs("a", "b", transmission, transmission);
  Ensemble ensemble;
  for (int label : {0, 1}) {
    const double w = label == 0 ? overlap : 1.0 - overlap;
    if (w <= 0.0) continue;
    ModeState in = ModeState::photon(modes, "a", v, 0).product(ModeState::photon(modes, "b", v, label));
    ensemble.push_back({w, apply(in, bs)});
  }
  return detection_probability(ensemble, {"a", "b"});
}

HomScan hom_scan(double transmission, const OverlapModel& overlap,
                 const std::vector<double>& positions_mm) {
  if (positions_mm.empty()) throw std::invalid_argument("HOM scan needs at least one position");
  HomScan scan;
  scan.positions_mm = positions_mm;
  scan.baseline = hom_coincidence(transmission, 0.0);
  for (double x : positions_mm) scan.coincidence.push_back(hom_coincidence(transmission, overlap.at(x)));
  scan.minimum = *std::min_element(scan.coincidence.begin(), scan.coincidence.end());
  scan.contrast = scan.baseline > 0.0 ? (scan.baseline - scan.minimum) / scan.baseline : 0.0;
  return scan;
}

PostselectedChannel::PostselectedChannel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
  for (const auto& k : kraus_) {
    if (k.rows() != kraus_.front().rows() || k.cols() != kraus_.front().cols()) {
      throw std::invalid_argument("Kraus operators must share one shape");
    }
  }
}

Matrix PostselectedChannel::apply(const Matrix& rho) const {
  Matrix out = Matrix::Zero(kraus_.front().rows(), kraus_.front().rows());
  for (const auto& k : kraus_) out += k * rho * k.adjoint();
  return out;
}

double PostselectedChannel::success_probability(const Matrix& rho) const {
  return apply(rho).trace().real();
}

double PostselectedChannel::average_success_probability() const {
  const Eigen::Index d = kraus_.front().cols();
  double total = 0.0;
  for (const auto& k : kraus_) total += (k.adjoint() * k).trace().real();
  return total / static_cast<double>(d);
}

double PostselectedChannel::process_fidelity(const Matrix& target) const {
  const double d = static_cast<double>(target.rows());
  double overlap = 0.0;
  double norm = 0.0;
  for (const auto& k : kraus_) {
    overlap += std::norm((target.adjoint() * k).trace());
    norm += (k.adjoint() * k).trace().real();
  }
  return norm > 0.0 ? overlap / (d * norm) : 0.0;
}

PostselectedChannel PostselectedChannel::conjugated(const Matrix& before, const Matrix& after) const {
  std::vector<Matrix> out;
  out.reserve(kraus_.size());
  for (const auto& k : kraus_) out.push_back(after * k * before);
  return PostselectedChannel(std::move(out));
}

PostselectedChannel physical_cz(double overlap, const CzDesign& design) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("overlap must lie in [0, 1]");
  const std::set<std::string> modes{"c", "t"};
  const std::vector<LinearElement> chain{
      ppbs("c", "t", design.t_h, design.t_v),
      attenuator("c", Pol::H, design.h_attenuation),
      attenuator("t", Pol::H, design.h_attenuation),
  };
  std::vector<Matrix> kraus;
  for (int label : {0, 1}) {
    const double w = label == 0 ? overlap : 1.0 - overlap;
    if (w <= 0.0) continue;
    std::map<std::vector<int>, Matrix> by_config;
    for (int in = 0; in < 4; ++in) {
      ModeState s = ModeState::photon(modes, "c", basis_ket(in >> 1), 0)
                        .product(ModeState::photon(modes, "t", basis_ket(in & 1), label));
      for (const auto& element : chain) s = apply(s, element);
      for (const auto& [config, amps] : detector_amplitudes(s, {"c", "t"})) {
        auto [slot, inserted] = by_config.try_emplace(config, Matrix::Zero(4, 4));
        slot->second.col(in) = amps;
      }
    }
    for (auto& [config, k] : by_config) kraus.push_back(std::sqrt(w) * k);
  }
  return PostselectedChannel(std::move(kraus));
}

PostselectedChannel physical_ch(double overlap, const CzDesign& design) {
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix w = w_gate().matrix();
  return physical_cz(overlap, design).conjugated(kron(id, w.adjoint()), kron(id, w));
}

namespace {

const std::set<std::string>& bsm_modes() {
  static const std::set<std::string> modes{"c", "c_r", "a", "a_r"};
  return modes;
}

// HWP2, PBS_B and the two D/A analyzers. Detectors: "c"/"c_r" are D/A behind
// the C-side output, "a"/"a_r" D/A behind the A-side output.
ModeState bell_analyzer(ModeState s, double theta2) {
  s = apply(s, polarization_element("c", waveplate(WaveplateKind::half, theta2 / 2.0).matrix(), "HWP2"));
  s = apply(s, pbs("c", "a"));
  const Matrix da = waveplate(WaveplateKind::half, kPi / 8.0).matrix();
  s = apply(s, polarization_element("c", da, "HWP(D/A)"));
  s = apply(s, polarization_element("a", da, "HWP(D/A)"));
  s = apply(s, pbs("c", "c_r"));
  s = apply(s, pbs("a", "a_r"));
  return s;
}

const std::vector<std::vector<std::string>>& bob_plus_patterns() {
  static const std::vector<std::vector<std::string>> patterns{{"c", "a_r"}, {"c_r", "a"}};
  return patterns;
}

}  // namespace

Matrix bsm_povm_element(double theta2, double overlap) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("overlap must lie in [0, 1]");
  Matrix m = Matrix::Zero(4, 4);
  for (int label : {0, 1}) {
    const double w = label == 0 ? overlap : 1.0 - overlap;
    if (w <= 0.0) continue;
    // rows[outcome] collects <outcome| chain |in> over the four inputs.
    std::map<std::pair<int, std::vector<int>>, Eigen::RowVectorXcd> rows;
    for (int in = 0; in < 4; ++in) {
      Vector joint = Vector::Zero(4);
      joint(in) = 1.0;
      const ModeState s =
          bell_analyzer(ModeState::photon_pair(bsm_modes(), "c", "a", joint, 0, label), theta2);
      const auto& patterns = bob_plus_patterns();
      for (int p = 0; p < static_cast<int>(patterns.size()); ++p) {
        for (const auto& [config, amps] : detector_amplitudes(s, patterns[p])) {
          for (int pol = 0; pol < amps.size(); ++pol) {
            if (amps(pol) == Complex{}) continue;
            std::vector<int> key = config;
            key.push_back(pol);
            auto [slot, inserted] = rows.try_emplace({p, key}, Eigen::RowVectorXcd::Zero(4));
            slot->second(in) = amps(pol);
          }
        }
      }
    }
    for (const auto& [key, r] : rows) m += w * (r.adjoint() * r);
  }
  return m;
}

Projector bsm_projector_physical(double theta2) {
  const Matrix m = bsm_povm_element(theta2, 1.0);
  return Projector(m / m.trace().real());
}

BsmScan bsm_scan(double theta2, const OverlapModel& overlap, const std::vector<double>& positions_mm,
                 const Vector& input) {
  if (positions_mm.empty()) throw std::invalid_argument("BSM scan needs at least one position");
  if (input.size() != 4) throw std::invalid_argument("BSM input must be a two-qubit state");
  std::array<ModeState, 2> analyzed{
      bell_analyzer(ModeState::photon_pair(bsm_modes(), "c", "a", input, 0, 0), theta2),
      bell_analyzer(ModeState::photon_pair(bsm_modes(), "c", "a", input, 0, 1), theta2)};
  BsmScan scan;
  scan.positions_mm = positions_mm;
  for (double x : positions_mm) {
    const double v = overlap.at(x);
    const Ensemble e{{v, analyzed[0]}, {1.0 - v, analyzed[1]}};
    scan.da.push_back(detection_probability(e, {"c", "a_r"}));
    scan.ad.push_back(detection_probability(e, {"c_r", "a"}));
    scan.dd.push_back(detection_probability(e, {"c", "a"}));
    scan.aa.push_back(detection_probability(e, {"c_r", "a_r"}));
  }
  return scan;
}

namespace {

// Everything up to, but excluding, the detectors for one Bob setting.
ModeState experiment_chain(const ExperimentConfig& config, int system_label, int ancilla_label,
                           double bob_theta2) {
  static const std::set<std::string> modes{"s", "s_r", "c", "c_r", "a", "a_r"};
  const double r = 1.0 / std::sqrt(2.0);
  Vector epr = Vector::Zero(4);
  epr(0b01) = r;
  epr(0b10) = std::polar(r, config.delta);

  ModeState s = ModeState::photon(modes, "s", basis_ket(1), system_label)
                    .product(ModeState::photon_pair(modes, "c", "a", epr, 0, ancilla_label));

  const Matrix w = w_gate().matrix();
  // Interferometer: HWP at 22.5 degrees, phase plate, then the controlled
  // Hadamard built from W^dag, the PPBS controlled-Z and W on S.
  s = apply(s, polarization_element("s", waveplate(WaveplateKind::half, kPi / 8.0).matrix(), "HWP"));
  s = apply(s, polarization_element("s", phase_shifter(config.phi).matrix(), "SBC"));
  s = apply(s, polarization_element("s", w.adjoint(), "W^dag"));
  const CzDesign cz;
  s = apply(s, ppbs("c", "s", cz.t_h, cz.t_v));
  s = apply(s, attenuator("c", Pol::H, cz.h_attenuation));
  s = apply(s, attenuator("s", Pol::H, cz.h_attenuation));
  s = apply(s, polarization_element("s", w, "W"));

  s = apply(s, polarization_element("c", control_circular_map().matrix(), "C rotation"));
  s = apply(s, polarization_element("a", ancilla_circular_map().matrix(), "A rotation"));

  // Alice: rotate cos(t1)|H> + sin(t1)|V> onto |H>, then split on a PBS.
  s = apply(s, polarization_element(
                   "s", waveplate(WaveplateKind::half, config.theta1 / 2.0).matrix(), "HWP(Alice)"));
  s = apply(s, pbs("s", "s_r"));
  return bell_analyzer(std::move(s), bob_theta2);
}

}  // namespace

OutcomeDistribution physical_distribution(const ExperimentConfig& config,
                                          const PhysicalOverlaps& overlaps) {
  config.noise.validate();
  for (double v : {overlaps.gate, overlaps.bsm}) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("overlap must lie in [0, 1]");
  }
  std::array<double, 4> p{};  // pp, pm, mp, mm
  for (int bob = 0; bob < 2; ++bob) {
    const double theta2 = config.theta2 + (bob == 0 ? 0.0 : kPi / 2.0);
    Ensemble ensemble;
    for (int gate_label : {0, 1}) {
      const double wg = gate_label == 0 ? overlaps.gate : 1.0 - overlaps.gate;
      if (wg <= 0.0) continue;
      for (int bsm_label : {0, 2}) {
        const double wb = bsm_label == 0 ? overlaps.bsm : 1.0 - overlaps.bsm;
        if (wb <= 0.0) continue;
        ensemble.push_back({wg * wb, experiment_chain(config, gate_label, bsm_label, theta2)});
      }
    }
    for (int alice = 0; alice < 2; ++alice) {
      const std::string alice_detector = alice == 0 ? "s" : "s_r";
      double total = 0.0;
      for (const auto& pattern : bob_plus_patterns()) {
        std::vector<std::string> detectors{alice_detector};
        detectors.insert(detectors.end(), pattern.begin(), pattern.end());
        total += detection_probability(ensemble, detectors);
      }
      p[2 * alice + bob] = total;
    }
  }
  const double sum = p[0] + p[1] + p[2] + p[3];
  if (!(sum > 0.0)) throw std::domain_error("no four-fold coincidences at this setting");
  OutcomeDistribution d{p[0] / sum, p[1] / sum, p[2] / sum, p[3] / sum};
  return config.noise.ideal() ? d : apply_noise(d, config.noise);
}

double physical_correlation(const ExperimentConfig& config, double v) {
  return physical_distribution(config, {.gate = v, .bsm = 1.0}).correlation();
}

}  // namespace duality::fock
