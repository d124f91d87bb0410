#pragma once

#include <vector>

#include "lpf/grid.hpp"

namespace lpf {

// Overlap strip between a west/east pair of subregions. `span` is the full
// box intersection (x torus-interval, y the common row range); `carved` is
// the same strip with the 4-owner corner patches removed, so that cores,
// carved strips and corners partition the interior exactly once.
struct EwOverlap {
  int west = -1;
  int east = -1;
  IndexBox span;
  IndexBox carved;
};

struct SnOverlap {
  int south = -1;
  int north = -1;
  IndexBox span;
  IndexBox carved;
};

// 4-owner corner patch; owner indices name the subregion lying to that side
// of the patch.
struct CornerOverlap {
  int nw = -1;
  int ne = -1;
  int se = -1;
  int sw = -1;
  IndexBox span;
};

// Overlapping decomposition of the interior grid into n_loc = c*c square
// subregions, each base square of (d/c) points per side extended by
// `halfwidth` points per side. At the EW seam boxes wrap when wrap_ew is
// set; at the SN walls (and EW walls when not wrapping) the extension is
// redirected inward so every box keeps the same (d/c + 2*halfwidth) extent.
struct Decomposition {
  int d = 0;
  int c = 0;  // regions per axis
  int n_loc = 0;
  int halfwidth = 0;
  bool wrap_ew = true;
  double p_ov = 0.0;  // halfwidth / base, for reporting

  std::vector<IndexBox> boxes;  // extended box per region, index j = cy*c + cx
  std::vector<IndexBox> cores;  // cells owned by exactly one region
  std::vector<EwOverlap> ew_overlaps;
  std::vector<SnOverlap> sn_overlaps;
  std::vector<CornerOverlap> corner_overlaps;

  int region_of(int cx, int cy) const { return cy * c + cx; }

  // Regions whose extended box contains the interior cell, ascending.
  std::vector<int> owners_of(int ix, int iy) const;
};

Decomposition build_decomposition(const GridSpec& grid, int n_loc, int overlap_halfwidth,
                                  bool wrap_ew);

}  // namespace lpf
