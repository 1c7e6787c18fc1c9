#pragma once

// Second-quantized linear optics for a handful of photons.
//
// A ModeState maps occupation patterns (sorted multisets of modes) to the
// amplitude of the corresponding normalized Fock state. Passive elements act
// linearly on creation operators. Partial distinguishability is modelled by
// giving photons different temporal labels and mixing the fully
// indistinguishable and fully distinguishable branches with weight v.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "duality/circuit.hpp"
#include "duality/qstate.hpp"

namespace duality::fock {

enum class Pol { H = 0, V = 1 };

struct Mode {
  std::string spatial;
  Pol pol = Pol::H;
  int temporal = 0;

  auto operator<=>(const Mode&) const = default;
};

/// Sorted multiset of occupied modes, one entry per photon.
using Pattern = std::vector<Mode>;

/// Image of a single creation operator under a linear element.
using ModeImage = std::vector<std::pair<Mode, Complex>>;

/// A passive element: the spatial modes it touches (which must be declared
/// on the state) and the creation-operator map.
struct LinearElement {
  std::string name;
  std::vector<std::string> touches;
  std::vector<std::string> creates;
  std::function<ModeImage(const Mode&)> image;
};

class ModeState {
 public:
  /// The vacuum over the declared spatial modes.
  static ModeState vacuum(std::set<std::string> spatial_modes);

  /// One photon in `spatial` with Jones vector `polarization` (normalized).
  static ModeState photon(std::set<std::string> spatial_modes, const std::string& spatial,
                          const Vector& polarization, int temporal = 0);

  /// Two photons in `first` and `second` (distinct spatial modes) with joint
  /// polarization amplitudes indexed p_first * 2 + p_second.
  static ModeState photon_pair(std::set<std::string> spatial_modes, const std::string& first,
                               const std::string& second, const Vector& joint,
                               int first_temporal = 0, int second_temporal = 0);

  /// Photons of two independent sources combined into one state.
  ModeState product(const ModeState& other) const;

  const std::map<Pattern, Complex>& terms() const { return terms_; }
  const std::set<std::string>& spatial_modes() const { return spatial_modes_; }
  bool declares(const std::string& spatial) const { return spatial_modes_.count(spatial) > 0; }

  double norm_squared() const;
  /// Photon numbers present across terms (a single value for passive optics).
  std::set<int> photon_numbers() const;

  void add(Pattern pattern, Complex amplitude);
  void declare(const std::string& spatial) { spatial_modes_.insert(spatial); }

 private:
  std::set<std::string> spatial_modes_;
  std::map<Pattern, Complex> terms_;
};

/// Applies `element` term by term, expanding products of creation operators.
ModeState apply(const ModeState& state, const LinearElement& element);

/// Jones matrix acting on the polarization of `spatial` (all temporal labels).
LinearElement polarization_element(const std::string& spatial, const Matrix& jones,
                                   std::string name = "waveplate");

/// Partially polarizing beam splitter between ports `a` and `b`. For each
/// polarization p with transmission T: a -> sqrt(T) a + sqrt(1-T) b,
/// b -> sqrt(1-T) a - sqrt(T) b. Throws when T is outside [0, 1] or a == b.
LinearElement ppbs(const std::string& a, const std::string& b, double t_h, double t_v);

/// Polarizing beam splitter: H transmitted, V reflected.
LinearElement pbs(const std::string& a, const std::string& b);

/// Transmission `eta` for one polarization of `spatial`; the rest goes to a
/// loss port "<spatial>.loss".
LinearElement attenuator(const std::string& spatial, Pol pol, double eta);

/// Convenience wrapper matching the PPBS description: applies ppbs(a, b)
/// after checking that both ports are declared on `state`.
ModeState ppbs_transform(const ModeState& state, const std::pair<std::string, std::string>& ports,
                         double t_h, double t_v);

/// 2x2 transfer matrix of one polarization component of a PPBS.
Matrix ppbs_transfer_matrix(double transmission);

/// Keeps terms with exactly one photon in each of `detectors` and no photon
/// anywhere else. The result is sub-normalized.
ModeState postselect(const ModeState& state, const std::vector<std::string>& detectors);

/// Post-selected amplitudes over the detectors' joint polarization (first
/// detector most significant), one vector per temporal-label assignment.
std::map<std::vector<int>, Vector> detector_amplitudes(const ModeState& state,
                                                       const std::vector<std::string>& detectors);

struct Branch {
  double weight;
  ModeState state;
};
using Ensemble = std::vector<Branch>;

/// Probability that exactly one photon reaches each of `detectors` and no
/// photon goes elsewhere, averaged over the ensemble.
double detection_probability(const Ensemble& ensemble, const std::vector<std::string>& detectors);

/// Mode overlap as a function of stage position: either a constant or a
/// Gaussian exp(-(x - x0)^2 / (2 sigma^2)) with unit peak.
class OverlapModel {
 public:
  static OverlapModel constant(double v);
  static OverlapModel gaussian(double x0_mm, double sigma_mm);

  double at(double position_mm) const;
  bool is_gaussian() const { return sigma_mm_.has_value(); }
  double x0_mm() const { return x0_mm_; }

 private:
  OverlapModel(double v, double x0, std::optional<double> sigma)
      : v_(v), x0_mm_(x0), sigma_mm_(sigma) {}
  double v_;
  double x0_mm_;
  std::optional<double> sigma_mm_;
};

/// Coincidence probability for one V photon per input port of a beam
/// splitter with transmission `transmission`, computed by mode bookkeeping.
double hom_coincidence(double transmission, double overlap);

struct HomScan {
  std::vector<double> positions_mm;
  std::vector<double> coincidence;
  /// Coincidence level for fully distinguishable photons.
  double baseline = 0.0;
  double minimum = 0.0;
  /// (baseline - minimum) / baseline.
  double contrast = 0.0;
  static constexpr const char* kContrastDefinition =
      "(P_distinguishable - P_min) / P_distinguishable";
};

HomScan hom_scan(double transmission, const OverlapModel& overlap,
                 const std::vector<double>& positions_mm);

/// Post-selected two-qubit operation in Kraus form. The Kraus operators
/// are sub-normalized: tr(sum K rho K^dag) is the success probability.
class PostselectedChannel {
 public:
  explicit PostselectedChannel(std::vector<Matrix> kraus);

  const std::vector<Matrix>& kraus() const { return kraus_; }
  Matrix apply(const Matrix& rho) const;
  double success_probability(const Matrix& rho) const;
  /// Success probability averaged over the computational basis inputs.
  double average_success_probability() const;
  /// Overlap of the renormalized channel with the unitary `target`:
  /// sum_k |tr(U^dag K_k)|^2 / (d sum_k tr(K_k^dag K_k)); 1 iff the channel is
  /// proportional to conjugation by U.
  double process_fidelity(const Matrix& target) const;
  /// Conjugation by a fixed unitary on each side: K -> after K before.
  PostselectedChannel conjugated(const Matrix& before, const Matrix& after) const;

 private:
  std::vector<Matrix> kraus_;
};

struct CzDesign {
  double t_h = 1.0;
  double t_v = 1.0 / 3.0;
  /// Transmission of the H-attenuating elements on both outputs.
  double h_attenuation = 1.0 / 3.0;
};

/// PPBS controlled-Z on qubits (control, target) carried by two photons with
/// overlap v, post-selected on one photon per output.
PostselectedChannel physical_cz(double overlap, const CzDesign& design = {});

/// physical_cz conjugated by W on the target: (I (x) W) CZ (I (x) W^dag).
PostselectedChannel physical_ch(double overlap, const CzDesign& design = {});

/// POVM element of Bob's "+" result for photons (C, A): HWP2 at theta2/2 on
/// C, overlap on a PBS, D/A analysis of both outputs, summed over the two
/// detection patterns (D, A) and (A, D).
Matrix bsm_povm_element(double theta2, double overlap = 1.0);

/// bsm_povm_element at full overlap normalized to unit trace; the Projector
/// constructor checks that it is rank one.
Projector bsm_projector_physical(double theta2);

struct BsmScan {
  std::vector<double> positions_mm;
  std::vector<double> da, ad, dd, aa;
};

/// Two-fold D/A coincidences behind the PBS while the C-A overlap is scanned.
/// `input` is the (C, A) polarization state entering HWP2; the default is
/// |phi->, for which the PBS output is (|DA> + |AD>)/sqrt2 at theta2 = 0.
BsmScan bsm_scan(double theta2, const OverlapModel& overlap,
                 const std::vector<double>& positions_mm,
                 const Vector& input = bell_state(BellLabel::phi_minus).amplitudes());

struct PhysicalOverlaps {
  /// S-C overlap on the CZ's PPBS.
  double gate = 1.0;
  /// C-A overlap on the Bell analyzer's PBS.
  double bsm = 1.0;
};

/// Outcome distribution from the full mode-level simulation: sources, the
/// interferometer waveplates, the PPBS controlled Hadamard, local rotations,
/// Alice's analyzer and Bob's PBS analyzer, post-selected on a detection at
/// Alice and a "+" pattern at Bob. Bob's "-" is the "+" pattern at theta2 +
/// pi/2. The noise model in `config` is applied last.
OutcomeDistribution physical_distribution(const ExperimentConfig& config,
                                          const PhysicalOverlaps& overlaps);

/// Correlation of physical_distribution with `v` as the S-C gate overlap.
double physical_correlation(const ExperimentConfig& config, double v);

}  // namespace duality::fock
