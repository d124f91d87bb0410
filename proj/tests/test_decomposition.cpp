#include <doctest.h>

#include <algorithm>
#include <set>

#include "lpf/decomposition.hpp"
#include "lpf/errors.hpp"

using namespace lpf;

namespace {

long partition_count(const Decomposition& dec) {
  long count = 0;
  for (const auto& b : dec.cores) count += static_cast<long>(b.w) * b.h;
  for (const auto& f : dec.ew_overlaps) count += static_cast<long>(f.carved.w) * f.carved.h;
  for (const auto& g : dec.sn_overlaps) count += static_cast<long>(g.carved.w) * g.carved.h;
  for (const auto& h : dec.corner_overlaps) count += static_cast<long>(h.span.w) * h.span.h;
  return count;
}

// Cross-check the stored rectangles against a per-cell ownership census.
void check_against_ownership(const Decomposition& dec) {
  const int d = dec.d;
  for (int iy = 0; iy < d; ++iy) {
    for (int ix = 0; ix < d; ++ix) {
      const auto owners = dec.owners_of(ix, iy);
      int classified = 0;
      for (int j = 0; j < dec.n_loc; ++j) {
        if (dec.cores[j].contains(ix, iy, d, dec.wrap_ew)) {
          ++classified;
          CHECK(owners == std::vector<int>{j});
        }
      }
      for (const auto& f : dec.ew_overlaps) {
        if (f.carved.contains(ix, iy, d, dec.wrap_ew)) {
          ++classified;
          std::vector<int> expect{f.west, f.east};
          std::sort(expect.begin(), expect.end());
          CHECK(owners == expect);
        }
      }
      for (const auto& g : dec.sn_overlaps) {
        if (g.carved.contains(ix, iy, d, dec.wrap_ew)) {
          ++classified;
          std::vector<int> expect{g.south, g.north};
          std::sort(expect.begin(), expect.end());
          CHECK(owners == expect);
        }
      }
      for (const auto& h : dec.corner_overlaps) {
        if (h.span.contains(ix, iy, d, dec.wrap_ew)) {
          ++classified;
          std::vector<int> expect{h.sw, h.se, h.nw, h.ne};
          std::sort(expect.begin(), expect.end());
          CHECK(owners == expect);
        }
      }
      REQUIRE(classified == 1);
    }
  }
}

}  // namespace

TEST_CASE("extended box sizes match the reference layouts") {
  GridSpec g128{128};
  const Decomposition d4 = build_decomposition(g128, 4, 6, true);
  for (const auto& b : d4.boxes) {
    CHECK(b.w == 76);
    CHECK(b.h == 76);
  }
  CHECK(d4.p_ov == doctest::Approx(6.0 / 64.0));

  const Decomposition d16 = build_decomposition(g128, 16, 6, true);
  for (const auto& b : d16.boxes) {
    CHECK(b.w == 44);
    CHECK(b.h == 44);
  }

  // 22-point base squares extended to 34; 132 is the nearest multiple of 6.
  GridSpec g132{132};
  const Decomposition d36 = build_decomposition(g132, 36, 6, true);
  for (const auto& b : d36.boxes) {
    CHECK(b.w == 34);
    CHECK(b.h == 34);
  }
  CHECK(d36.p_ov == doctest::Approx(6.0 / 22.0));
}

TEST_CASE("cores and overlaps partition the interior exactly once") {
  for (auto [d, n_loc, h] : {std::tuple{128, 4, 6}, {128, 16, 6}, {64, 4, 6}, {132, 36, 6},
                             {64, 16, 3}, {12, 9, 1}, {16, 4, 0}}) {
    CAPTURE(d);
    CAPTURE(n_loc);
    const Decomposition dec = build_decomposition(GridSpec{d}, n_loc, h, true);
    CHECK(partition_count(dec) == static_cast<long>(d) * d);
  }
}

TEST_CASE("ownership census agrees with the rectangle classification") {
  for (auto [d, n_loc, h] : {std::tuple{16, 4, 2}, {24, 9, 2}, {32, 16, 2}, {12, 1, 0}}) {
    CAPTURE(d);
    CAPTURE(n_loc);
    check_against_ownership(build_decomposition(GridSpec{d}, n_loc, h, true));
  }
  // walled EW variant
  check_against_ownership(build_decomposition(GridSpec{24}, 9, 2, false));
}

TEST_CASE("single-region decomposition covers the interior with no overlaps") {
  const Decomposition dec = build_decomposition(GridSpec{128}, 1, 0, true);
  REQUIRE(dec.boxes.size() == 1);
  CHECK(dec.boxes[0] == IndexBox{0, 0, 128, 128});
  CHECK(dec.cores[0] == IndexBox{0, 0, 128, 128});
  CHECK(dec.ew_overlaps.empty());
  CHECK(dec.sn_overlaps.empty());
  CHECK(dec.corner_overlaps.empty());
}

TEST_CASE("overlap ownership multiplicities") {
  const Decomposition dec = build_decomposition(GridSpec{64}, 16, 3, true);
  for (const auto& f : dec.ew_overlaps) {
    CHECK(f.west != f.east);
    CHECK(f.span.w == 6);
  }
  for (const auto& g : dec.sn_overlaps) CHECK(g.south != g.north);
  for (const auto& h : dec.corner_overlaps) {
    std::set<int> owners{h.sw, h.se, h.nw, h.ne};
    CHECK(owners.size() == 4);
  }
  // 4 columns x 4 rows: 16 EW strips, 12 SN strips, 12 corner patches
  CHECK(dec.ew_overlaps.size() == 16);
  CHECK(dec.sn_overlaps.size() == 12);
  CHECK(dec.corner_overlaps.size() == 12);
}

TEST_CASE("wrapping boxes near the EW seam") {
  const Decomposition dec = build_decomposition(GridSpec{16}, 4, 2, true);
  // left column boxes start west of the seam
  CHECK(dec.boxes[0].x0 == 14);
  CHECK(dec.boxes[0].w == 12);
  // cells just west and east of the seam belong to both columns
  const auto owners_west = dec.owners_of(15, 2);
  const auto owners_east = dec.owners_of(1, 2);
  CHECK(owners_west == std::vector<int>{0, 1});
  CHECK(owners_east == std::vector<int>{0, 1});
}

TEST_CASE("construction rejects invalid shapes") {
  GridSpec g{128};
  CHECK_THROWS_AS(build_decomposition(g, 8, 4, true), InvalidArgument);    // not a square
  CHECK_THROWS_AS(build_decomposition(g, 25, 4, true), InvalidArgument);   // 5 does not divide 128
  CHECK_THROWS_AS(build_decomposition(g, 4, 32, true), InvalidArgument);   // 2h >= d/c
  CHECK_THROWS_AS(build_decomposition(g, 0, 0, true), InvalidArgument);
  CHECK_THROWS_AS(build_decomposition(g, 4, -1, true), InvalidArgument);
  // wall redirection reaches 3h deep: rejected when it would cross a
  // non-adjacent base square
  CHECK_THROWS_AS(build_decomposition(GridSpec{32}, 16, 3, true), InvalidArgument);
}
