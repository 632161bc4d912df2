#include "sas/field_grid.hpp"

#include "sas/csv.hpp"
#include "sas/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace sas {

FieldGrid::FieldGrid(std::array<GridAxis, 4> axes, std::vector<ComplexVec3> values)
    : axes_(axes), values_(std::move(values)) {
  std::size_t n = 1;
  for (const auto& a : axes_) {
    if (a.count == 0 || !(a.step > 0.0)) throw SamplingError("FieldGrid: empty axis or non-positive step");
    n *= a.count;
  }
  if (n != values_.size()) throw SamplingError("FieldGrid: value count does not match axes");
}

FieldGrid sample_field(std::span<const PlaneWaveMode> modes, const std::array<GridAxis, 4>& axes,
                       double phase_speed) {
  for (const auto& a : axes) {
    if (a.count < 4 || !(a.step > 0.0)) throw SamplingError("sample_field: each axis needs >= 4 samples");
  }
  const double quarter = 0.5 * units::pi + 1e-12;
  for (const auto& mode : modes) {
    check_dispersion(mode, phase_speed);
    for (int d = 0; d < 3; ++d) {
      if (std::abs(mode.k[d]) * axes[d].step > quarter) {
        throw SamplingError("sample_field: fewer than 4 samples per wavelength");
      }
    }
    if (std::abs(mode.omega) * axes[3].step > quarter) {
      throw SamplingError("sample_field: fewer than 4 samples per period");
    }
  }
  std::vector<ComplexVec3> values;
  values.reserve(axes[0].count * axes[1].count * axes[2].count * axes[3].count);
  for (std::size_t it = 0; it < axes[3].count; ++it) {
    for (std::size_t iz = 0; iz < axes[2].count; ++iz) {
      for (std::size_t iy = 0; iy < axes[1].count; ++iy) {
        for (std::size_t ix = 0; ix < axes[0].count; ++ix) {
          const Vector3 r(axes[0].coordinate(ix), axes[1].coordinate(iy), axes[2].coordinate(iz));
          values.push_back(rs_vector<double>(modes, r, axes[3].coordinate(it), phase_speed));
        }
      }
    }
  }
  return FieldGrid(axes, std::move(values));
}

namespace {

// One scalar component laid out like FieldGrid.
struct ScalarField {
  std::array<std::size_t, 4> dims{};
  std::vector<Complex> data;

  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t a = 0; a < axis; ++a) s *= dims[a];
    return s;
  }
};

ScalarField component(const FieldGrid& grid, int c) {
  ScalarField f;
  for (std::size_t a = 0; a < 4; ++a) f.dims[a] = grid.axis(a).count;
  f.data.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f.data[i] = grid.values()[i][c];
  return f;
}

template <typename LineOp>
void for_each_line(ScalarField& f, std::size_t axis, LineOp&& op) {
  const std::size_t n = f.dims[axis];
  const std::size_t stride = f.stride(axis);
  const std::size_t total = f.data.size();
  std::vector<Complex> line(n);
  for (std::size_t base = 0; base < total; ++base) {
    // `base` must be the first element of its line along `axis`.
    if ((base / stride) % n != 0) continue;
    for (std::size_t i = 0; i < n; ++i) line[i] = f.data[base + i * stride];
    op(line);
    for (std::size_t i = 0; i < n; ++i) f.data[base + i * stride] = line[i];
  }
}

ScalarField derivative(ScalarField f, std::size_t axis, double step, Derivative method) {
  const std::size_t n = f.dims[axis];
  if (method == Derivative::spectral) {
    Eigen::FFT<double> fft;
    const double length = step * static_cast<double>(n);
    std::vector<Complex> spec;
    for_each_line(f, axis, [&](std::vector<Complex>& line) {
      fft.fwd(spec, line);
      for (std::size_t m = 0; m < n; ++m) {
        double mm = m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
        if (n % 2 == 0 && m == n / 2) mm = 0.0;
        spec[m] *= Complex(0.0, 2.0 * units::pi * mm / length);
      }
      fft.inv(line, spec);
    });
  } else {
    std::vector<Complex> copy;
    for_each_line(f, axis, [&](std::vector<Complex>& line) {
      copy = line;
      for (std::size_t i = 0; i < n; ++i) {
        line[i] = (copy[(i + 1) % n] - copy[(i + n - 1) % n]) / (2.0 * step);
      }
    });
  }
  return f;
}

// Relative norm of the opposite-helicity part, from the spatial spectrum of
// every time slice: sigma = i khat x on transverse plane waves.
double helicity_impurity(const FieldGrid& grid, int helicity) {
  std::array<ScalarField, 3> spec{component(grid, 0), component(grid, 1), component(grid, 2)};
  Eigen::FFT<double> fft;
  std::vector<Complex> tmp;
  for (auto& f : spec) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
      for_each_line(f, axis, [&](std::vector<Complex>& line) {
        fft.fwd(tmp, line);
        line = tmp;
      });
    }
  }
  const auto& dims = spec[0].dims;
  double wrong = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < spec[0].data.size(); ++i) {
    std::size_t rem = i;
    Vector3 kappa;
    for (std::size_t a = 0; a < 3; ++a) {
      const std::size_t m = rem % dims[a];
      rem /= dims[a];
      const double mm = m <= dims[a] / 2 ? static_cast<double>(m)
                                         : static_cast<double>(m) - static_cast<double>(dims[a]);
      kappa[a] = 2.0 * units::pi * mm / grid.axis(a).length();
    }
    const ComplexVec3 v(spec[0].data[i], spec[1].data[i], spec[2].data[i]);
    total += v.squaredNorm();
    if (kappa.norm() == 0.0) {
      wrong += v.squaredNorm();
      continue;
    }
    const ComplexVec3 sigma_v = Complex(0, 1) * cross(Vector3(kappa.normalized()), v);
    wrong += (0.5 * (v - static_cast<double>(helicity) * sigma_v)).squaredNorm();
  }
  return total > 0.0 ? std::sqrt(wrong / total) : 0.0;
}

}  // namespace

FreeSpaceResidual free_space_residual(const FieldGrid& grid, int helicity, Derivative method,
                                      double phase_speed, double purity_tolerance) {
  if (helicity != 1 && helicity != -1) throw DomainError("free_space_residual: helicity must be +-1");
  if (grid.size() == 0) throw SamplingError("free_space_residual: empty grid");
  for (const auto& a : grid.axes()) {
    if (a.count < 4) throw SamplingError("free_space_residual: each axis needs >= 4 samples");
  }
  FreeSpaceResidual out;
  out.impurity = helicity_impurity(grid, helicity);
  if (out.impurity > purity_tolerance) {
    throw HelicityPurityError("free_space_residual: field is not helicity-pure");
  }

  std::array<ScalarField, 3> psi{component(grid, 0), component(grid, 1), component(grid, 2)};
  // d[c][a] = d psi_c / d axis_a
  std::array<std::array<ScalarField, 4>, 3> d;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t a = 0; a < 4; ++a) {
      d[c][a] = derivative(psi[c], a, grid.axis(a).step, method);
    }
  }
  const Complex i(0, 1);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const ComplexVec3 dt(d[0][3].data[n], d[1][3].data[n], d[2][3].data[n]);
    const ComplexVec3 curl(d[2][1].data[n] - d[1][2].data[n], d[0][2].data[n] - d[2][0].data[n],
                           d[1][0].data[n] - d[0][1].data[n]);
    const Complex div = d[0][0].data[n] + d[1][1].data[n] + d[2][2].data[n];
    const ComplexVec3 r = i * dt - phase_speed * static_cast<double>(helicity) * curl;
    out.evolution = std::max(out.evolution, r.norm());
    out.divergence = std::max(out.divergence, std::abs(div));
  }
  return out;
}

void write_csv(std::ostream& out, const FieldGrid& grid) {
  CsvWriter csv(out, {"x", "y", "z", "t", "re_x", "im_x", "re_y", "im_y", "re_z", "im_z"});
  const auto& ax = grid.axes();
  for (std::size_t it = 0; it < ax[3].count; ++it) {
    for (std::size_t iz = 0; iz < ax[2].count; ++iz) {
      for (std::size_t iy = 0; iy < ax[1].count; ++iy) {
        for (std::size_t ix = 0; ix < ax[0].count; ++ix) {
          const auto& v = grid.at(ix, iy, iz, it);
          csv.row({ax[0].coordinate(ix), ax[1].coordinate(iy), ax[2].coordinate(iz),
                   ax[3].coordinate(it), v[0].real(), v[0].imag(), v[1].real(), v[1].imag(),
                   v[2].real(), v[2].imag()});
        }
      }
    }
  }
}

FieldGrid read_field_csv(std::istream& in) {
  const auto table = read_csv(in);
  const std::vector<std::string> expected{"x", "y", "z", "t", "re_x", "im_x", "re_y", "im_y", "re_z", "im_z"};
  if (table.header != expected) throw SamplingError("read_field_csv: unexpected header");
  if (table.rows.empty()) throw SamplingError("read_field_csv: no rows");
  std::array<GridAxis, 4> axes;
  for (std::size_t a = 0; a < 4; ++a) {
    std::vector<double> coords;
    for (const auto& row : table.rows) coords.push_back(row[a]);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    axes[a].origin = coords.front();
    axes[a].count = coords.size();
    axes[a].step = coords.size() > 1 ? (coords.back() - coords.front()) / static_cast<double>(coords.size() - 1) : 1.0;
    for (std::size_t i = 1; i < coords.size(); ++i) {
      if (std::abs(coords[i] - coords[i - 1] - axes[a].step) > 1e-9 * std::max(1.0, axes[a].step)) {
        throw SamplingError("read_field_csv: non-uniform axis");
      }
    }
  }
  std::vector<ComplexVec3> values(table.rows.size());
  std::size_t expected_size = axes[0].count * axes[1].count * axes[2].count * axes[3].count;
  if (expected_size != table.rows.size()) throw SamplingError("read_field_csv: incomplete lattice");
  for (std::size_t n = 0; n < table.rows.size(); n++) {
    const auto& row = table.rows[n];
    if (n >= values.size()) break;
    std::array<std::size_t, 4> idx;
    for (std::size_t a = 0; a < 4; ++a) {
      idx[a] = static_cast<std::size_t>(std::llround((row[a] - axes[a].origin) / axes[a].step));
    }
    const std::size_t pos = ((idx[3] * axes[2].count + idx[2]) * axes[1].count + idx[1]) * axes[0].count + idx[0];
    values[pos] = ComplexVec3(Complex(row[4], row[5]), Complex(row[6], row[7]), Complex(row[8], row[9]));
  }
  return FieldGrid(axes, std::move(values));
}

}  // namespace sas
