#include "lpf/grid.hpp"

#include <algorithm>
#include <cmath>

namespace lpf {

void StaggeredState::axpy(double a, const StaggeredState& other) {
  const std::size_t n = u.size();
  double* pu = u.data();
  double* pv = v.data();
  double* pe = eta.data();
  const double* ou = other.u.data();
  const double* ov = other.v.data();
  const double* oe = other.eta.data();
  for (std::size_t i = 0; i < n; ++i) {
    pu[i] += a * ou[i];
    pv[i] += a * ov[i];
    pe[i] += a * oe[i];
  }
}

void StaggeredState::scale(double a) {
  const std::size_t n = u.size();
  double* pu = u.data();
  double* pv = v.data();
  double* pe = eta.data();
  for (std::size_t i = 0; i < n; ++i) {
    pu[i] *= a;
    pv[i] *= a;
    pe[i] *= a;
  }
}

void apply_boundary_conditions(StaggeredState& s) {
  const int n = s.extent();
  const int d = n - 2;
  Field& u = s.u;
  Field& v = s.v;
  Field& eta = s.eta;

  // SN walls first (rows), then EW wrap (columns) so the corner ghosts end
  // up consistent with both.
  for (int i = 0; i < n; ++i) {
    // v: Dirichlet. Wall rows are j=1 (y=0) and j=d+1 (y=1); the ghost row
    // below the south wall is an odd reflection.
    v(i, 1) = 0.0;
    v(i, d + 1) = 0.0;
    v(i, 0) = -v(i, 2);
    // u, eta: Neumann mirroring across both walls.
    u(i, 0) = u(i, 1);
    u(i, d + 1) = u(i, d);
    eta(i, 0) = eta(i, 1);
    eta(i, d + 1) = eta(i, d);
  }
  for (int j = 0; j < n; ++j) {
    u(0, j) = u(d, j);
    u(d + 1, j) = u(1, j);
    v(0, j) = v(d, j);
    v(d + 1, j) = v(1, j);
    eta(0, j) = eta(d, j);
    eta(d + 1, j) = eta(1, j);
  }
}

bool all_finite(const Field& f) {
  const double* p = f.data();
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

bool all_finite(const StaggeredState& s) {
  return all_finite(s.u) && all_finite(s.v) && all_finite(s.eta);
}

namespace {

void check_box(const IndexBox& box, int d) {
  if (box.w <= 0 || box.h <= 0 || box.w > d || box.y0 < 0 || box.y1() > d - 1 || box.x0 < 0 ||
      box.x0 > d - 1) {
    throw InvalidArgument("index box out of range");
  }
}

}  // namespace

FieldBlock restrict_field(const StaggeredState& s, const IndexBox& box) {
  const int d = s.d();
  check_box(box, d);
  FieldBlock b;
  b.box = box;
  b.u = Field(box.w, box.h);
  b.v = Field(box.w, box.h);
  b.eta = Field(box.w, box.h);
  for (int bj = 0; bj < box.h; ++bj) {
    const int gj = box.y0 + bj + 1;  // +1: ghost offset
    for (int bi = 0; bi < box.w; ++bi) {
      const int gi = (box.x0 + bi) % d + 1;
      b.u(bi, bj) = s.u(gi, gj);
      b.v(bi, bj) = s.v(gi, gj);
      b.eta(bi, bj) = s.eta(gi, gj);
    }
  }
  return b;
}

void write_block(StaggeredState& s, const FieldBlock& b) {
  const int d = s.d();
  check_box(b.box, d);
  for (int bj = 0; bj < b.box.h; ++bj) {
    const int gj = b.box.y0 + bj + 1;
    for (int bi = 0; bi < b.box.w; ++bi) {
      const int gi = (b.box.x0 + bi) % d + 1;
      s.u(gi, gj) = b.u(bi, bj);
      s.v(gi, gj) = b.v(bi, bj);
      s.eta(gi, gj) = b.eta(bi, bj);
    }
  }
}

double region_distance(const IndexBox& box, int ix, int iy, const GridSpec& grid, bool wrap_ew) {
  const int d = grid.d;
  const double dx = grid.dx();

  const int gy = std::max({0, box.y0 - iy, iy - box.y1()});

  int gx = 0;
  if (wrap_ew) {
    // Gap to the interval [x0, x0+w-1] on the circle of circumference d.
    int off = ix - box.x0;
    off %= d;
    if (off < 0) off += d;
    if (off < box.w) {
      gx = 0;
    } else {
      // Outside: distance forward to x0 (wrapping) or backward from x1.
      gx = std::min(d - off, off - (box.w - 1));
    }
  } else {
    gx = std::max({0, box.x0 - ix, ix - box.x1()});
  }

  return dx * std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy);
}

}  // namespace lpf
