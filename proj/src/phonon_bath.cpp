#include "sas/phonon_bath.hpp"

#include "sas/csv.hpp"
#include "sas/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace sas {

std::vector<std::string> MediumSpec::validate() const {
  if (!(n >= 1.0)) throw DomainError("medium: refractive index must be >= 1");
  if (!(gamma > 0.0)) throw DomainError("medium: gamma must be > 0");
  if (!(omega_tilde > 0.0)) throw DomainError("medium: omega_tilde must be > 0");
  if (!(omega0 > 0.0)) throw DomainError("medium: omega0 must be > 0");
  std::vector<std::string> warnings;
  if (gamma / omega_tilde >= 0.1) {
    warnings.push_back("medium: gamma/omega_tilde = " + std::to_string(gamma / omega_tilde) +
                       " is not << 1; the Weisskopf-Wigner treatment is questionable");
  }
  if (std::abs(omega_tilde - omega0) > 0.1 * omega0) {
    warnings.push_back("medium: omega_tilde deviates from omega0 by more than 10%");
  }
  return warnings;
}

ReservoirGrid discretize_reservoir(const MediumSpec& spec, std::size_t J, double bandwidth) {
  if (!(spec.gamma > 0.0)) throw DomainError("discretize_reservoir: gamma must be > 0");
  if (J < 101 || J % 2 == 0) throw DomainError("discretize_reservoir: J must be odd and >= 101");
  if (!(bandwidth >= 10.0 * spec.gamma)) {
    throw UnderResolvedBath("discretize_reservoir: bandwidth below 10 gamma");
  }
  ReservoirGrid grid;
  grid.bandwidth = bandwidth;
  grid.center = spec.omega_tilde;
  grid.density = static_cast<double>(J) / bandwidth;
  const double spacing = bandwidth / static_cast<double>(J);
  const double zeta = std::sqrt(spec.gamma / (2.0 * units::pi * grid.density));
  const auto half = static_cast<long>((J - 1) / 2);
  grid.omegas.reserve(J);
  for (long j = -half; j <= half; ++j) {
    grid.omegas.push_back(spec.omega_tilde + static_cast<double>(j) * spacing);
  }
  grid.couplings.assign(J, Complex(zeta, 0.0));
  return grid;
}

Complex ww_amplitude(double t, const MediumSpec& spec) {
  if (!(t >= 0.0)) throw DomainError("ww_amplitude: t must be >= 0");
  return std::exp(Complex(-0.5 * spec.gamma * t, -spec.omega_tilde * t));
}

Complex langevin_kernel(std::size_t j, double t, const ReservoirGrid& grid, const MediumSpec& spec) {
  if (j >= grid.count()) throw DomainError("langevin_kernel: mode index out of range");
  if (!(t >= 0.0)) throw DomainError("langevin_kernel: t must be >= 0");
  const double w = grid.omegas[j];
  const Complex num = std::exp(Complex(0.0, -w * t)) - ww_amplitude(t, spec);
  return grid.couplings[j] * num / Complex(w - spec.omega_tilde, 0.5 * spec.gamma);
}

double commutator_defect(double t, const ReservoirGrid& grid, const MediumSpec& spec) {
  if (!(t >= 0.0) || t > grid.validity_window() * (1.0 + 1e-12)) {
    throw RecurrenceError("commutator_defect: t outside [0, half recurrence time]");
  }
  double sum = std::exp(-spec.gamma * t);
  for (std::size_t j = 0; j < grid.count(); ++j) sum += std::norm(langevin_kernel(j, t, grid, spec));
  return std::abs(sum - 1.0);
}

// ---------------------------------------------------------------------------

FockOracle::FockOracle(const ReservoirGrid& grid, const MediumSpec& spec) {
  const std::size_t dim = grid.count() + 1;
  if (dim > 100000) throw ResourceError("FockOracle: dimension above 1e5");
  if (grid.couplings.size() != grid.count()) throw DomainError("FockOracle: malformed grid");
  diagonal_.resize(static_cast<Eigen::Index>(dim));
  coupling_.resize(static_cast<Eigen::Index>(grid.count()));
  diagonal_[0] = spec.omega_tilde;
  for (std::size_t j = 0; j < grid.count(); ++j) {
    diagonal_[static_cast<Eigen::Index>(j + 1)] = grid.omegas[j];
    coupling_[static_cast<Eigen::Index>(j)] = grid.couplings[j];
  }
}

Eigen::MatrixXcd FockOracle::dense_hamiltonian() const {
  const auto dim = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  h.diagonal() = diagonal_.cast<Complex>();
  for (Eigen::Index j = 0; j + 1 < dim; ++j) {
    h(0, j + 1) = coupling_[j];             // zeta_j c_j b^dagger
    h(j + 1, 0) = std::conj(coupling_[j]);  // zeta_j^* c_j^dagger b
  }
  return h;
}

Eigen::VectorXcd FockOracle::molecule_state() const {
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension()));
  s[0] = 1.0;
  return s;
}

Eigen::VectorXcd FockOracle::bath_state(std::size_t j) const {
  if (j + 1 >= dimension()) throw DomainError("bath_state: mode index out of range");
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension()));
  s[static_cast<Eigen::Index>(j + 1)] = 1.0;
  return s;
}

namespace {

// A secular root stored as pole + offset so that lambda - omega_i stays
// accurate for the poles adjacent to the root.
struct SecularRoot {
  double anchor = 0.0;
  double offset = 0.0;
  double value() const { return anchor + offset; }
};

class Secular {
 public:
  Secular(const Eigen::VectorXd& diag, const Eigen::VectorXcd& coupling)
      : shift_(diag[0]), poles_(diag.tail(diag.size() - 1)), weights_(coupling.cwiseAbs2()) {
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_[i] > 0.0)) throw DomainError("arrowhead solver needs nonzero couplings");
      if (i > 0 && !(poles_[i] > poles_[i - 1])) throw DomainError("arrowhead solver needs strictly increasing bath frequencies");
    }
  }

  // f(anchor + mu) and f'.
  std::pair<double, double> eval(double anchor, double mu) const {
    double f = (anchor - shift_) + mu;
    double df = 1.0;
    for (Eigen::Index i = 0; i < poles_.size(); ++i) {
      const double d = (anchor - poles_[i]) + mu;
      const double q = weights_[i] / d;
      f -= q;
      df += q / d;
    }
    return {f, df};
  }

  SecularRoot solve(double lo, double hi) const {
    // Anchor on the half of the bracket that holds the root.
    const double mid = 0.5 * (lo + hi);
    const bool left = eval(mid, 0.0).first > 0.0;
    SecularRoot root;
    root.anchor = left ? lo : hi;
    double a = left ? 0.0 : mid - hi;
    double b = left ? mid - lo : 0.0;
    double mu = 0.5 * (a + b);
    for (int iter = 0; iter < 300; ++iter) {
      const auto [f, df] = eval(root.anchor, mu);
      if (f == 0.0) break;
      if (f > 0.0) b = mu; else a = mu;
      double next = mu - f / df;
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      const double step = std::abs(next - mu);
      mu = next;
      if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(mu), 1e-300) ||
          b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
        break;
      }
    }
    root.offset = mu;
    return root;
  }

  std::vector<SecularRoot> roots() const {
    const Eigen::Index J = poles_.size();
    std::vector<SecularRoot> out;
    out.reserve(static_cast<std::size_t>(J + 1));
    const double reach = std::abs(shift_ - poles_[0]) + std::abs(shift_ - poles_[J - 1]) +
                         std::sqrt(weights_.sum()) + weights_.sum() + 1.0;
    double lo = poles_[0] - reach;
    while (eval(lo, 0.0).first > 0.0) lo -= reach;
    out.push_back(solve(lo, poles_[0]));
    for (Eigen::Index i = 1; i < J; ++i) out.push_back(solve(poles_[i - 1], poles_[i]));
    double hi = poles_[J - 1] + reach;
    while (eval(hi, 0.0).first < 0.0) hi += reach;
    out.push_back(solve(poles_[J - 1], hi));
    return out;
  }

  double pole(Eigen::Index i) const { return poles_[i]; }
  double weight(Eigen::Index i) const { return weights_[i]; }
  Eigen::Index size() const { return poles_.size(); }

 private:
  double shift_;
  Eigen::VectorXd poles_;
  Eigen::VectorXd weights_;
};

// Normalization factor 1/s_k of the arrowhead eigenvector (1, conj(zeta_i)/(lambda - omega_i)).
double inverse_norm(const Secular& sec, const SecularRoot& root) {
  double s2 = 1.0;
  for (Eigen::Index i = 0; i < sec.size(); ++i) {
    const double d = (root.anchor - sec.pole(i)) + root.offset;
    s2 += sec.weight(i) / (d * d);
  }
  return 1.0 / std::sqrt(s2);
}

}  // namespace

Eigen::VectorXd FockOracle::arrowhead_eigenvalues() const {
  const Secular sec(diagonal_, coupling_);
  const auto roots = sec.roots();
  Eigen::VectorXd values(static_cast<Eigen::Index>(roots.size()));
  for (std::size_t k = 0; k < roots.size(); ++k) values[static_cast<Eigen::Index>(k)] = roots[k].value();
  return values;
}

FockOracle::Eigensystem FockOracle::eigensystem(Method method) const {
  if (dimension() > 4000) throw ResourceError("eigensystem: dense eigenvectors limited to dimension 4000");
  Eigensystem es;
  if (method == Method::dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense_hamiltonian());
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
    return es;
  }
  const Secular sec(diagonal_, coupling_);
  const auto roots = sec.roots();
  const auto dim = static_cast<Eigen::Index>(dimension());
  es.values.resize(dim);
  es.vectors.resize(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto& root = roots[static_cast<std::size_t>(k)];
    const double inv_s = inverse_norm(sec, root);
    es.values[k] = root.value();
    es.vectors(0, k) = inv_s;
    for (Eigen::Index i = 0; i < sec.size(); ++i) {
      const double d = (root.anchor - sec.pole(i)) + root.offset;
      es.vectors(i + 1, k) = std::conj(coupling_[i]) * (inv_s / d);
    }
  }
  return es;
}

DecaySeries oracle_decay(const ReservoirGrid& grid, const MediumSpec& spec, double t_max,
                         std::size_t steps, Excitation initial, FockOracle::Method method) {
  if (!(t_max > 0.0) || steps == 0) throw DomainError("oracle_decay: need t_max > 0 and steps >= 1");
  if (t_max > grid.validity_window() * (1.0 + 1e-12)) {
    throw RecurrenceError("oracle_decay: t_max beyond half the recurrence time");
  }
  const FockOracle oracle(grid, spec);
  const auto dim = static_cast<Eigen::Index>(oracle.dimension());
  if (initial.kind == Excitation::Kind::bath_mode && initial.mode >= grid.count()) {
    throw DomainError("oracle_decay: initial bath mode out of range");
  }

  DecaySeries out;
  out.times.resize(steps + 1);
  out.survival.resize(steps + 1);
  out.model.resize(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) {
    out.times[s] = t_max * static_cast<double>(s) / static_cast<double>(steps);
    out.model[s] = std::exp(-spec.gamma * out.times[s]);
  }

  const Eigen::Index init_index =
      initial.kind == Excitation::Kind::molecule ? 0 : static_cast<Eigen::Index>(initial.mode + 1);

  if (method == FockOracle::Method::dense) {
    const auto es = oracle.eigensystem(FockOracle::Method::dense);
    const Eigen::VectorXcd a = es.vectors.row(init_index).adjoint();  // V^dagger psi0
    for (std::size_t s = 0; s <= steps; ++s) {
      Eigen::VectorXcd p(dim);
      for (Eigen::Index k = 0; k < dim; ++k) p[k] = a[k] * std::exp(Complex(0.0, -es.values[k] * out.times[s]));
      const Eigen::VectorXcd psi = es.vectors * p;
      out.survival[s] = std::norm(psi[0]);
      out.max_norm_error = std::max(out.max_norm_error, std::abs(psi.squaredNorm() - 1.0));
    }
    return out;
  }

  // Arrowhead path: eigenvector components are generated on the fly, so memory
  // stays O(J) and each time step costs O(J^2).
  const Secular sec(oracle.diagonal(), oracle.coupling());
  const auto roots = sec.roots();
  const Eigen::Index J = sec.size();
  std::vector<double> inv_s(roots.size());
  std::vector<Complex> a(roots.size());  // <v_k|psi0>
  for (std::size_t k = 0; k < roots.size(); ++k) {
    inv_s[k] = inverse_norm(sec, roots[k]);
    if (init_index == 0) {
      a[k] = inv_s[k];
    } else {
      const Eigen::Index i = init_index - 1;
      const double d = (roots[k].anchor - sec.pole(i)) + roots[k].offset;
      a[k] = oracle.coupling()[i] * (inv_s[k] / d);  // conj(conj(zeta) / d)
    }
  }
  std::vector<Complex> p(roots.size());
  for (std::size_t s = 0; s <= steps; ++s) {
    const double t = out.times[s];
    Complex mol = 0.0;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      p[k] = a[k] * std::exp(Complex(0.0, -roots[k].value() * t)) * inv_s[k];
      mol += p[k];
    }
    double norm2 = std::norm(mol);
    for (Eigen::Index i = 0; i < J; ++i) {
      Complex amp = 0.0;
      for (std::size_t k = 0; k < roots.size(); ++k) {
        amp += p[k] / ((roots[k].anchor - sec.pole(i)) + roots[k].offset);
      }
      norm2 += std::norm(std::conj(oracle.coupling()[i]) * amp);
    }
    out.survival[s] = std::norm(mol);
    out.max_norm_error = std::max(out.max_norm_error, std::abs(norm2 - 1.0));
  }
  return out;
}

DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& survival,
                        double t_lo, double t_hi) {
  if (times.size() != survival.size() || times.empty()) throw WindowError("fit_decay_rate: malformed series");
  const double slack = 1e-12 * std::max(1.0, std::abs(times.back()));
  if (!(t_lo <= t_hi) || t_lo < times.front() - slack || t_hi > times.back() + slack) {
    throw WindowError("fit_decay_rate: window outside the series span");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo - slack || times[i] > t_hi + slack) continue;
    if (!(survival[i] > 1e-12)) throw WindowError("fit_decay_rate: non-positive survival in window");
    const double y = -std::log(survival[i]);
    pts.emplace_back(times[i], y);
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
  }
  if (pts.size() < 2) throw WindowError("fit_decay_rate: fewer than two samples in window");
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw WindowError("fit_decay_rate: degenerate window");
  DecayFit fit;
  fit.points = pts.size();
  fit.gamma = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.gamma * sx) / n;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (fit.intercept + fit.gamma * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double thermal_phonon_number(double omega_tilde, double T) {
  if (!(T > 0.0)) throw DomainError("thermal_phonon_number: T must be > 0");
  if (!(omega_tilde > 0.0)) throw DomainError("thermal_phonon_number: omega must be > 0");
  return 1.0 / std::expm1(units::hbar_over_kB * omega_tilde / T);
}

void write_csv(std::ostream& out, const DecaySeries& series) {
  CsvWriter csv(out, {"t", "survival", "model"});
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    csv.row({series.times[i], series.survival[i], series.model[i]});
  }
}

void write_csv(std::ostream& out, const ReservoirGrid& grid) {
  CsvWriter csv(out, {"omega", "re_zeta", "im_zeta"});
  for (std::size_t j = 0; j < grid.count(); ++j) {
    csv.row({grid.omegas[j], grid.couplings[j].real(), grid.couplings[j].imag()});
  }
}

}  // namespace sas
