#pragma once

#include <cstddef>
#include <vector>

#include "lpf/errors.hpp"

namespace lpf {

// Square domain [0,1]^2 discretized into d x d cells with one ghost layer
// per side, so every field array is (d+2) x (d+2).
struct GridSpec {
  int d = 128;

  double dx() const { return 1.0 / d; }
  int extent() const { return d + 2; }
};

// Dense 2-D array, x-fastest. Index (i, j): i is the x (column) index.
class Field {
 public:
  Field() = default;
  Field(int nx, int ny, double fill = 0.0) : nx_(nx), ny_(ny), v_(static_cast<std::size_t>(nx) * ny, fill) {}

  static Field for_grid(const GridSpec& g, double fill = 0.0) { return Field(g.extent(), g.extent(), fill); }

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(j) * nx_ + i]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(j) * nx_ + i]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::size_t size() const { return v_.size(); }

  void fill(double x) { v_.assign(v_.size(), x); }

  bool same_shape(const Field& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

  bool operator==(const Field& o) const { return nx_ == o.nx_ && ny_ == o.ny_ && v_ == o.v_; }

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> v_;
};

// Prognostic state on the staggered C-grid. With cell (i,j) spanning
// [(i-1)dx, i dx] x [(j-1)dx, j dx] in array coordinates:
//   eta(i,j) at the cell center   ((i-1/2)dx, (j-1/2)dx)
//   u(i,j)   at the west face     ((i-1)dx,   (j-1/2)dx)
//   v(i,j)   at the south face    ((i-1/2)dx, (j-1)dx)
// Interior indices run 1..d; 0 and d+1 are ghosts. The south wall y=0 is
// the v row j=1, the north wall y=1 is the v row j=d+1.
struct StaggeredState {
  Field u, v, eta;

  static StaggeredState zeros(const GridSpec& g) {
    StaggeredState s;
    s.u = Field::for_grid(g);
    s.v = Field::for_grid(g);
    s.eta = Field::for_grid(g);
    return s;
  }

  int extent() const { return eta.nx(); }
  int d() const { return eta.nx() - 2; }

  // this += a * other, all three fields.
  void axpy(double a, const StaggeredState& other);
  void scale(double a);

  bool operator==(const StaggeredState& o) const { return u == o.u && v == o.v && eta == o.eta; }
};

// Enforce the domain boundary conditions in place:
//   EW: periodic ghosts for u, v, eta.
//   SN: v = 0 on both walls, Neumann ghost mirroring for u and eta
//       (zero y-derivative of the zonal flux u*eta at the walls).
// Idempotent.
void apply_boundary_conditions(StaggeredState& s);

bool all_finite(const Field& f);
bool all_finite(const StaggeredState& s);

// Axis-aligned index rectangle over interior cell indices 0..d-1.
// May wrap around the EW seam: x spans columns x0, x0+1, ..., x0+w-1 (mod d).
// y never wraps.
struct IndexBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  int x1() const { return x0 + w - 1; }  // unwrapped; reduce mod d when wrapping
  int y1() const { return y0 + h - 1; }

  bool contains(int ix, int iy, int d, bool wrap_ew) const {
    if (iy < y0 || iy > y1()) return false;
    if (wrap_ew) {
      int off = ix - x0;
      off %= d;
      if (off < 0) off += d;
      return off < w;
    }
    return ix >= x0 && ix <= x1();
  }

  bool operator==(const IndexBox& o) const { return x0 == o.x0 && y0 == o.y0 && w == o.w && h == o.h; }
};

// Restriction of a state to an index box (interior coordinates); values are
// copied, block (bi, bj) <- global ((x0+bi) mod d, y0+bj).
struct FieldBlock {
  IndexBox box;
  Field u, v, eta;
};

FieldBlock restrict_field(const StaggeredState& s, const IndexBox& box);

// Write a block back over its box (inverse of restrict_field).
void write_block(StaggeredState& s, const FieldBlock& b);

// Euclidean distance, in physical units (index offset times dx), from the
// interior grid point z=(ix,iy) to the nearest point of the box. Zero if z
// is inside. With wrap_ew the x gap is minimized over periodic images.
double region_distance(const IndexBox& box, int ix, int iy, const GridSpec& grid, bool wrap_ew);

}  // namespace lpf
