#pragma once

#include "sas/field_kernel.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace sas {

/// One uniformly sampled axis. The grid is treated as one period of a
/// periodic box, so `count * step` is the box length along this axis.
struct GridAxis {
  double origin = 0.0;
  double step = 1.0;
  std::size_t count = 1;

  double coordinate(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double length() const { return step * static_cast<double>(count); }
};

/// Field samples on an (x, y, z, t) lattice, x fastest.
class FieldGrid {
 public:
  FieldGrid() = default;
  FieldGrid(std::array<GridAxis, 4> axes, std::vector<ComplexVec3> values);

  const std::array<GridAxis, 4>& axes() const { return axes_; }
  const GridAxis& axis(std::size_t a) const { return axes_[a]; }
  std::size_t size() const { return values_.size(); }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz, std::size_t it) const {
    return ((it * axes_[2].count + iz) * axes_[1].count + iy) * axes_[0].count + ix;
  }
  const ComplexVec3& at(std::size_t ix, std::size_t iy, std::size_t iz, std::size_t it) const {
    return values_[index(ix, iy, iz, it)];
  }
  const std::vector<ComplexVec3>& values() const { return values_; }

 private:
  std::array<GridAxis, 4> axes_{};
  std::vector<ComplexVec3> values_;
};

/// Samples rs_vector on the lattice. Requires at least 4 samples per
/// wavelength (per axis) and per period for every mode.
FieldGrid sample_field(std::span<const PlaneWaveMode> modes, const std::array<GridAxis, 4>& axes,
                       double phase_speed = units::c);

enum class Derivative { spectral, finite_difference };

struct FreeSpaceResidual {
  double evolution = 0.0;   // max |i dPsi/dt - c h curl Psi|
  double divergence = 0.0;  // max |div Psi|
  double impurity = 0.0;    // relative weight of the opposite helicity
  double value() const { return evolution + divergence; }
};

/// Residual of i dPsi/dt = c sigma curl Psi and div Psi = 0 on a
/// helicity-pure periodic grid (sigma -> helicity). Throws
/// HelicityPurityError when the opposite helicity carries more than
/// `purity_tolerance` of the field norm.
FreeSpaceResidual free_space_residual(const FieldGrid& grid, int helicity,
                                      Derivative method = Derivative::spectral,
                                      double phase_speed = units::c,
                                      double purity_tolerance = 1e-8);

/// CSV with header x,y,z,t,re_x,im_x,re_y,im_y,re_z,im_z (x fastest).
void write_csv(std::ostream& out, const FieldGrid& grid);
FieldGrid read_field_csv(std::istream& in);

}  // namespace sas
