#include "lpf/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lpf {

namespace {

// 1-D extent of a subregion along one axis. On a periodic axis the interval
// may run off the end (normalized mod d); on a walled axis the extension is
// redirected inward at the walls so the length stays base + 2h.
struct Interval {
  int start = 0;  // normalized to [0, d) on periodic axes
  int len = 0;
};

Interval axis_interval(int cell, int c, int base, int h, int d, bool periodic) {
  if (c == 1) return {0, d};
  const int len = base + 2 * h;
  int start = cell * base - h;
  if (periodic) {
    start %= d;
    if (start < 0) start += d;
    return {start, len};
  }
  if (start < 0) start = 0;
  if (start + len > d) start = d - len;
  return {start, len};
}

// Intersection of two intervals on a circle of circumference d. Returns up
// to two disjoint pieces; `hint` selects the piece containing that column.
bool torus_intersect_at(const Interval& a, const Interval& b, int d, int hint, Interval& out) {
  auto contains = [d](const Interval& iv, int x) {
    int off = (x - iv.start) % d;
    if (off < 0) off += d;
    return off < iv.len;
  };
  if (!contains(a, hint) || !contains(b, hint)) return false;
  // Walk backwards/forwards from the hint while both intervals contain the
  // column; spans here are far below d so this stays cheap.
  int lo = hint;
  for (int step = 0; step < d; ++step) {
    int prev = (lo - 1 + d) % d;
    if (prev == hint) break;
    if (contains(a, prev) && contains(b, prev)) {
      lo = prev;
    } else {
      break;
    }
  }
  int hi = hint;
  for (int step = 0; step < d; ++step) {
    int next = (hi + 1) % d;
    if (next == lo) break;
    if (contains(a, next) && contains(b, next)) {
      hi = next;
    } else {
      break;
    }
  }
  int len = (hi - lo) % d;
  if (len < 0) len += d;
  out = {lo, len + 1};
  return true;
}

Interval plain_intersect(const Interval& a, const Interval& b) {
  const int lo = std::max(a.start, b.start);
  const int hi = std::min(a.start + a.len, b.start + b.len);
  return {lo, std::max(0, hi - lo)};
}

// Offset of column x inside interval iv on a (possibly periodic) axis.
int local_offset(const Interval& iv, int x, int d) {
  int off = (x - iv.start) % d;
  if (off < 0) off += d;
  return off;
}

}  // namespace

std::vector<int> Decomposition::owners_of(int ix, int iy) const {
  std::vector<int> out;
  for (int j = 0; j < n_loc; ++j) {
    if (boxes[j].contains(ix, iy, d, wrap_ew)) out.push_back(j);
  }
  return out;
}

Decomposition build_decomposition(const GridSpec& grid, int n_loc, int overlap_halfwidth,
                                  bool wrap_ew) {
  const int d = grid.d;
  if (n_loc < 1) throw InvalidArgument("n_loc must be positive");
  const int c = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_loc))));
  if (c * c != n_loc) throw InvalidArgument("n_loc must be a perfect square, got " + std::to_string(n_loc));
  if (d % c != 0) {
    throw InvalidArgument("regions per axis (" + std::to_string(c) + ") must divide d (" +
                          std::to_string(d) + ")");
  }
  const int base = d / c;
  const int h = overlap_halfwidth;
  if (h < 0) throw InvalidArgument("overlap_halfwidth must be nonnegative");
  if (c > 1 && 2 * h >= base) {
    throw InvalidArgument("overlap too large: need 2*halfwidth < d/c");
  }
  // Wall boxes redirect their outward extension inward and reach 3h deep;
  // with three or more regions per axis that must not touch the box two
  // base squares over.
  if (c > 2 && 3 * h > base) {
    throw InvalidArgument("overlap too large at the walls: need 3*halfwidth <= d/c");
  }

  Decomposition dec;
  dec.d = d;
  dec.c = c;
  dec.n_loc = n_loc;
  dec.halfwidth = h;
  dec.wrap_ew = wrap_ew;
  dec.p_ov = static_cast<double>(h) / base;

  std::vector<Interval> xiv(c), yiv(c);
  for (int k = 0; k < c; ++k) {
    xiv[k] = axis_interval(k, c, base, h, d, wrap_ew);
    yiv[k] = axis_interval(k, c, base, h, d, false);
  }

  dec.boxes.resize(n_loc);
  for (int cy = 0; cy < c; ++cy) {
    for (int cx = 0; cx < c; ++cx) {
      dec.boxes[dec.region_of(cx, cy)] = IndexBox{xiv[cx].start, yiv[cy].start, xiv[cx].len, yiv[cy].len};
    }
  }

  // Per-axis overlap spans between adjacent columns/rows. x_span[cx] is the
  // overlap between column cx and column cx+1 (mod c); empty len means the
  // pair does not overlap (h = 0 or no wrap at the seam).
  std::vector<Interval> x_span(c, {0, 0}), y_span(std::max(0, c - 1), {0, 0});
  if (c > 1) {
    for (int cx = 0; cx < c; ++cx) {
      const bool seam_pair = (cx == c - 1);
      if (seam_pair && !wrap_ew) continue;
      if (h == 0) continue;
      const int edge = ((cx + 1) * base) % d;  // first column of the eastern base square
      Interval piece;
      // The overlap straddles the shared edge; use the column just west of
      // it as the hint (the edge column itself belongs to both boxes too).
      if (torus_intersect_at(xiv[cx], xiv[(cx + 1) % c], d, (edge - 1 + d) % d, piece)) {
        x_span[cx] = piece;
      }
    }
    for (int cy = 0; cy + 1 < c; ++cy) {
      if (h == 0) continue;
      y_span[cy] = plain_intersect(yiv[cy], yiv[cy + 1]);
    }
  }

  // Cores: box minus the x spans at its two ends minus the y spans.
  for (int cy = 0; cy < c; ++cy) {
    for (int cx = 0; cx < c; ++cx) {
      const Interval& bx = xiv[cx];
      const Interval& by = yiv[cy];
      int x_lo = 0, x_hi = bx.len - 1;
      if (c > 1) {
        const int west_pair = (cx - 1 + c) % c;
        if (x_span[west_pair].len > 0 && (wrap_ew || cx > 0)) {
          // west span sits at the start of this box
          x_lo = local_offset(bx, x_span[west_pair].start, d) + x_span[west_pair].len;
        }
        if (x_span[cx].len > 0 && (wrap_ew || cx < c - 1)) {
          x_hi = local_offset(bx, x_span[cx].start, d) - 1;
        }
      }
      int y_lo = 0, y_hi = by.len - 1;
      if (cy > 0 && y_span[cy - 1].len > 0) y_lo = (y_span[cy - 1].start - by.start) + y_span[cy - 1].len;
      if (cy + 1 < c && y_span[cy].len > 0) y_hi = (y_span[cy].start - by.start) - 1;
      if (x_hi < x_lo || y_hi < y_lo) {
        // Overlaps swallow the whole subregion; an empty core is valid.
        dec.cores.push_back(IndexBox{0, 0, 0, 0});
        continue;
      }
      IndexBox core;
      core.x0 = (bx.start + x_lo) % d;
      core.w = x_hi - x_lo + 1;
      core.y0 = by.start + y_lo;
      core.h = y_hi - y_lo + 1;
      dec.cores.push_back(core);
    }
  }

  // EW strips: one per adjacent column pair and region row.
  for (int cy = 0; cy < c; ++cy) {
    for (int cx = 0; cx < c; ++cx) {
      if (x_span[cx].len == 0) continue;
      EwOverlap f;
      f.west = dec.region_of(cx, cy);
      f.east = dec.region_of((cx + 1) % c, cy);
      f.span = IndexBox{x_span[cx].start, yiv[cy].start, x_span[cx].len, yiv[cy].len};
      // carve the corner patches off the top/bottom
      int y_lo = 0, y_hi = yiv[cy].len - 1;
      if (cy > 0 && y_span[cy - 1].len > 0) y_lo = (y_span[cy - 1].start - yiv[cy].start) + y_span[cy - 1].len;
      if (cy + 1 < c && y_span[cy].len > 0) y_hi = (y_span[cy].start - yiv[cy].start) - 1;
      f.carved = IndexBox{f.span.x0, yiv[cy].start + y_lo, f.span.w, std::max(0, y_hi - y_lo + 1)};
      dec.ew_overlaps.push_back(f);
    }
  }

  // SN strips: one per adjacent row pair and region column.
  for (int cy = 0; cy + 1 < c; ++cy) {
    for (int cx = 0; cx < c; ++cx) {
      if (y_span[cy].len == 0) continue;
      SnOverlap g;
      g.south = dec.region_of(cx, cy);
      g.north = dec.region_of(cx, cy + 1);
      g.span = IndexBox{xiv[cx].start, y_span[cy].start, xiv[cx].len, y_span[cy].len};
      int x_lo = 0, x_hi = xiv[cx].len - 1;
      const int west_pair = (cx - 1 + c) % c;
      if (x_span[west_pair].len > 0 && (wrap_ew || cx > 0)) {
        x_lo = local_offset(xiv[cx], x_span[west_pair].start, d) + x_span[west_pair].len;
      }
      if (x_span[cx].len > 0 && (wrap_ew || cx < c - 1)) {
        x_hi = local_offset(xiv[cx], x_span[cx].start, d) - 1;
      }
      g.carved = IndexBox{(xiv[cx].start + x_lo) % d, y_span[cy].start,
                          std::max(0, x_hi - x_lo + 1), y_span[cy].len};
      dec.sn_overlaps.push_back(g);
    }
  }

  // Corner patches: intersection of an EW column span and an SN row span.
  for (int cy = 0; cy + 1 < c; ++cy) {
    for (int cx = 0; cx < c; ++cx) {
      if (x_span[cx].len == 0 || y_span[cy].len == 0) continue;
      CornerOverlap hpatch;
      hpatch.sw = dec.region_of(cx, cy);
      hpatch.se = dec.region_of((cx + 1) % c, cy);
      hpatch.nw = dec.region_of(cx, cy + 1);
      hpatch.ne = dec.region_of((cx + 1) % c, cy + 1);
      hpatch.span = IndexBox{x_span[cx].start, y_span[cy].start, x_span[cx].len, y_span[cy].len};
      dec.corner_overlaps.push_back(hpatch);
    }
  }

  // Construction invariant: every interior cell classified exactly once by
  // ownership count, and the rectangle lists agree with that classification.
  long count = 0;
  for (const auto& b : dec.cores) count += static_cast<long>(b.w) * b.h;
  for (const auto& f : dec.ew_overlaps) count += static_cast<long>(f.carved.w) * f.carved.h;
  for (const auto& g : dec.sn_overlaps) count += static_cast<long>(g.carved.w) * g.carved.h;
  for (const auto& hpatch : dec.corner_overlaps) count += static_cast<long>(hpatch.span.w) * hpatch.span.h;
  if (count != static_cast<long>(d) * d) {
    throw InvalidArgument("decomposition does not partition the interior: got " +
                          std::to_string(count) + " of " + std::to_string(static_cast<long>(d) * d));
  }

  return dec;
}

}  // namespace lpf
