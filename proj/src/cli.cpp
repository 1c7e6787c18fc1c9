#include "duality/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "duality/angles.hpp"
#include "duality/circuit.hpp"
#include "duality/counts.hpp"
#include "duality/fock.hpp"
#include "duality/hv.hpp"

namespace duality::cli {
namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double angle_arg(const std::string& text, const char* flag) {
  try {
    return parse_angle(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

std::pair<double, double> angle_pair_arg(const std::string& text, const char* flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError(std::string(flag) + ": expected 'a,b'");
  return {angle_arg(text.substr(0, comma), flag), angle_arg(text.substr(comma + 1), flag)};
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  if (std::string(buf) == "-0.0000") return "0.0000";
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

NoiseParams noise_arg(double visibility, double background) {
  NoiseParams n{visibility, background};
  try {
    n.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return n;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty()) {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

void check_error_model(const std::string& model) {
  if (model != "multinomial") throw UsageError("--error-model: only 'multinomial' is implemented");
}

template <class F>
auto on_data(F f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  } catch (const std::domain_error& e) {
    throw DataError(e.what());
  }
}

struct SimulateArgs {
  std::string theta1, theta2, phi, delta = "pi/4";
  double visibility = 1.0, background = 0.0, overlap = 1.0;
  std::optional<std::int64_t> shots;
  std::uint64_t seed = 0;
  bool optics = false;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  const ExperimentConfig config{.phi = angle_arg(a.phi, "--phi"),
                                .delta = angle_arg(a.delta, "--delta"),
                                .theta1 = angle_arg(a.theta1, "--theta1"),
                                .theta2 = angle_arg(a.theta2, "--theta2"),
                                .noise = noise_arg(a.visibility, a.background)};
  if (a.overlap < 0.0 || a.overlap > 1.0) throw UsageError("--overlap must lie in [0, 1]");
  if (a.shots && *a.shots < 1) throw UsageError("--shots must be positive");
  const OutcomeDistribution d =
      a.optics ? fock::physical_distribution(config, {.gate = a.overlap, .bsm = 1.0})
               : coincidence_probabilities(config);
  out << "E=" << fixed4(d.correlation()) << '\n';
  out << "P=" << fixed4(d.pp) << ',' << fixed4(d.pm) << ',' << fixed4(d.mp) << ',' << fixed4(d.mm)
      << '\n';
  if (a.shots) {
    const OutcomeCounts c = sample_counts(d, *a.shots, a.seed);
    const CorrelationResult r = correlation_with_error(
        {config.theta1, config.theta2, config.phi, c.pp, c.pm, c.mp, c.mm});
    out << "counts=" << c.pp << ',' << c.pm << ',' << c.mp << ',' << c.mm << '\n';
    out << "E_sampled=" << fixed4(r.E) << " sigma=" << fixed4(r.sigma) << '\n';
  }
  return kExitOk;
}

struct SurfaceArgs {
  std::string theta1 = "0", grid = "9x9", out;
  double visibility = 1.0, background = 0.0;
};

int surface(const SurfaceArgs& a, std::ostream& out) {
  const double theta1 = angle_arg(a.theta1, "--theta1");
  std::pair<int, int> grid;
  try {
    grid = parse_grid(a.grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  const CorrelationSurface s =
      correlation_surface(theta1, grid.first, grid.second, noise_arg(a.visibility, a.background));
  std::ostringstream csv;
  csv << "theta2_rad,phi_rad,E\n";
  for (std::size_t i = 0; i < s.theta2.size(); ++i) {
    for (std::size_t j = 0; j < s.phi.size(); ++j) {
      csv << g17(s.theta2[i]) << ',' << g17(s.phi[j]) << ',' << fixed4(s.at(i, j)) << '\n';
    }
  }
  emit(a.out, csv.str(), out);
  return kExitOk;
}

struct ChshArgs {
  std::string phi = "3pi/2", theta1 = "0,pi/4", theta2 = "pi/8,3pi/8", from, error_model = "multinomial";
  double visibility = 1.0, background = 0.0;
  bool best = false;
};

int chsh_command(const ChshArgs& a, std::ostream& out) {
  check_error_model(a.error_model);
  if (!a.from.empty()) {
    const auto records = ingest_counts(a.from);
    const ChshEstimate est = on_data([&] { return chsh_from_records(records); });
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const auto& t = est.terms[2 * i + j];
        out << "E(" << fixed4(est.theta1[i]) << ',' << fixed4(est.theta2[j])
            << ")=" << fixed4(t.E) << " sigma=" << fixed4(t.sigma) << '\n';
      }
    }
    out << "S=" << fixed4(est.S) << " sigma=" << fixed4(est.sigma) << '\n';
    out << "local_bound=" << fixed4(hv::chsh_local_bound()) << '\n';
    return kExitOk;
  }
  const double phi = angle_arg(a.phi, "--phi");
  const auto t1 = angle_pair_arg(a.theta1, "--theta1");
  const auto t2 = angle_pair_arg(a.theta2, "--theta2");
  const NoiseParams noise = noise_arg(a.visibility, a.background);
  double s = 0.0;
  try {
    s = a.best ? chsh_best_placement(phi, t1, t2, noise) : chsh(phi, t1, t2, noise);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  out << "S=" << fixed4(s) << " sigma=" << fixed4(0.0) << '\n';
  out << "local_bound=" << fixed4(hv::chsh_local_bound()) << '\n';
  return kExitOk;
}

struct HomArgs {
  std::string transmission = "1/3", out;
  double x0 = 11.63, sigma = 0.1, from = 11.0, to = 12.3;
  int steps = 27;
};

int hom(const HomArgs& a, std::ostream& out) {
  const double t = angle_arg(a.transmission, "--transmission");
  if (t < 0.0 || t > 1.0) throw UsageError("--transmission must lie in [0, 1]");
  if (!(a.sigma > 0.0)) throw UsageError("--sigma must be positive");
  if (a.steps < 1) throw UsageError("--steps must be positive");
  const auto overlap = fock::OverlapModel::gaussian(a.x0, a.sigma);
  const fock::HomScan scan = fock::hom_scan(t, overlap, linear_grid(a.from, a.to, a.steps));
  std::ostringstream csv;
  csv << "position_mm,coincidence_probability\n";
  for (std::size_t i = 0; i < scan.positions_mm.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.10f\n", scan.positions_mm[i], scan.coincidence[i]);
    csv << buf;
  }
  emit(a.out, csv.str(), out);
  if (!a.out.empty()) {
    out << "baseline=" << fixed4(scan.baseline) << " minimum=" << fixed4(scan.minimum)
        << " contrast=" << fixed4(scan.contrast) << '\n';
  }
  return kExitOk;
}

struct HvArgs {
  std::string settings, mode = "objectivity", arithmetic = "auto";
  double visibility = 1.0, background = 0.0;
};

std::string outcome_string(const std::vector<Sign>& outcomes) {
  std::string s;
  for (Sign b : outcomes) s += b == Sign::plus ? '+' : '-';
  return s;
}

int hvcheck(const HvArgs& a, std::ostream& out) {
  const NoiseParams noise = noise_arg(a.visibility, a.background);
  hv::Arithmetic arithmetic = hv::Arithmetic::automatic;
  if (a.arithmetic == "exact") arithmetic = hv::Arithmetic::exact;
  else if (a.arithmetic == "float") arithmetic = hv::Arithmetic::floating;
  else if (a.arithmetic != "auto") throw UsageError("--arithmetic must be auto, exact or float");

  const hv::SettingsList settings = ingest_settings(a.settings);
  if (a.mode == "objectivity") {
    const hv::FeasibilityResult r = on_data([&] {
      std::vector<hv::JointDistribution> targets = hv::quantum_targets(settings);
      if (!noise.ideal()) {
        for (auto& q : targets) {
          const auto d = apply_noise({q[0], q[1], q[2], q[3]}, noise);
          q = {d.pp, d.pm, d.mp, d.mm};
        }
      }
      return hv::feasibility(targets, settings, arithmetic);
    });
    const char* mode = r.exact ? "exact" : "float";
    if (!r.feasible) {
      out << "INFEASIBLE residual=" << fixed4(r.residual) << " arithmetic=" << mode << '\n';
      return kExitInfeasible;
    }
    out << "FEASIBLE arithmetic=" << mode << '\n';
    out << "weight,tag,bob_outcomes\n";
    for (std::size_t l = 0; l < r.witness->strategies.size(); ++l) {
      const auto& s = r.witness->strategies[l];
      out << fixed4(r.witness->weights[l]) << ',' << hv::to_string(s.tag) << ','
          << outcome_string(s.bob_outcomes) << '\n';
    }
    return kExitOk;
  }
  if (a.mode == "chsh-bound") {
    const hv::LocalResult r = on_data([&] {
      hv::LocalTargets targets = hv::quantum_local_targets(settings);
      if (!noise.ideal()) {
        for (auto& row : targets) {
          for (auto& d : row) d = apply_noise(d, noise);
        }
      }
      return hv::check_local(targets);
    });
    out << "local_bound=" << fixed4(hv::chsh_local_bound()) << '\n';
    if (!r.local) {
      out << "INFEASIBLE residual=" << fixed4(r.residual) << '\n';
      return kExitInfeasible;
    }
    out << "FEASIBLE\n";
    out << "weight,alice_bob_bits\n";
    const std::size_t bits = 2 + settings.size();
    for (const auto& [lam, w] : r.witness) {
      std::string b;
      for (std::size_t k = 0; k < bits; ++k) b += (lam >> (bits - 1 - k)) & 1U ? '-' : '+';
      out << fixed4(w) << ',' << b << '\n';
    }
    return kExitOk;
  }
  throw UsageError("--mode must be objectivity or chsh-bound");
}

struct AnalyzeArgs {
  std::string from, out, error_model = "multinomial";
};

int analyze(const AnalyzeArgs& a, std::ostream& out) {
  check_error_model(a.error_model);
  const auto records = ingest_counts(a.from);
  std::ostringstream csv;
  csv << "theta1_rad,theta2_rad,phi_rad,E,sigma,total\n";
  for (const auto& r : records) {
    const CorrelationResult c = on_data([&] { return correlation_with_error(r); });
    csv << g17(r.theta1) << ',' << g17(r.theta2) << ',' << g17(r.phi) << ',' << fixed4(c.E) << ','
        << fixed4(c.sigma) << ',' << c.total << '\n';
  }
  emit(a.out, csv.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement-controlled wave-particle duality: simulation and analysis"};
  app.name("duality");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Outcome probabilities and correlation at one setting");
  s->add_option("--theta1", sim.theta1, "Alice's analyzer angle")->required();
  s->add_option("--theta2", sim.theta2, "Bob's Bell-analyzer angle")->required();
  s->add_option("--phi", sim.phi, "Interferometer phase")->required();
  s->add_option("--delta", sim.delta, "Phase of the C-A entangled state")->capture_default_str();
  s->add_option("--visibility", sim.visibility)->capture_default_str();
  s->add_option("--background", sim.background)->capture_default_str();
  s->add_option("--shots", sim.shots, "Sample this many coincidences");
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_flag("--optics", sim.optics, "Use the mode-level optics simulation");
  s->add_option("--overlap", sim.overlap, "S-C overlap for --optics")->capture_default_str();

  SurfaceArgs surf;
  auto* su = app.add_subcommand("surface", "Correlation surface over (theta2, phi) as CSV");
  su->add_option("--theta1", surf.theta1)->capture_default_str();
  su->add_option("--grid", surf.grid, "theta2 x phi points")->capture_default_str();
  su->add_option("--visibility", surf.visibility)->capture_default_str();
  su->add_option("--background", surf.background)->capture_default_str();
  su->add_option("--out", surf.out, "Write CSV here instead of stdout");

  ChshArgs ch;
  auto* c = app.add_subcommand("chsh", "CHSH value from the model or from counts");
  c->add_option("--phi", ch.phi)->capture_default_str();
  c->add_option("--theta1", ch.theta1, "Alice's pair a,a'")->capture_default_str();
  c->add_option("--theta2", ch.theta2, "Bob's pair b,b'")->capture_default_str();
  c->add_option("--visibility", ch.visibility)->capture_default_str();
  c->add_option("--background", ch.background)->capture_default_str();
  c->add_flag("--best", ch.best, "Maximize over the placement of the minus sign");
  c->add_option("--from", ch.from, "Counts CSV with four records");
  c->add_option("--error-model", ch.error_model)->capture_default_str();

  HomArgs hm;
  auto* h = app.add_subcommand("hom", "HOM dip on a beam splitter as CSV");
  h->add_option("--transmission", hm.transmission)->capture_default_str();
  h->add_option("--x0", hm.x0, "Dip centre (mm)")->capture_default_str();
  h->add_option("--sigma", hm.sigma, "Gaussian overlap width (mm)")->capture_default_str();
  h->add_option("--from", hm.from)->capture_default_str();
  h->add_option("--to", hm.to)->capture_default_str();
  h->add_option("--steps", hm.steps)->capture_default_str();
  h->add_option("--out", hm.out);

  HvArgs hva;
  auto* v = app.add_subcommand("hvcheck", "Hidden-variable feasibility of the quantum statistics");
  v->add_option("--settings", hva.settings, "CSV theta2_rad,phi_rad")->required();
  v->add_option("--mode", hva.mode, "objectivity or chsh-bound")->capture_default_str();
  v->add_option("--arithmetic", hva.arithmetic, "auto, exact or float")->capture_default_str();
  v->add_option("--visibility", hva.visibility)->capture_default_str();
  v->add_option("--background", hva.background)->capture_default_str();

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "Correlations with error bars from counts");
  z->add_option("--from", an.from, "Counts CSV")->required();
  z->add_option("--out", an.out);
  z->add_option("--error-model", an.error_model)->capture_default_str();

  std::vector<const char*> argv{"duality"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return simulate(sim, out);
    if (su->parsed()) return surface(surf, out);
    if (c->parsed()) return chsh_command(ch, out);
    if (h->parsed()) return hom(hm, out);
    if (v->parsed()) return hvcheck(hva, out);
    if (z->parsed()) return analyze(an, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace duality::cli
