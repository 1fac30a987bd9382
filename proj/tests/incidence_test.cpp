// Copyright 2026 The agrip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "agrip/incidence.hpp"

#include <vector>

#include "gtest/gtest.h"

namespace agrip {
namespace {

// Conic a X^2 + b XY + c XZ + d Y^2 + e YZ + f Z^2 in odd characteristic is
// smooth iff its symmetric matrix is invertible.
bool conic_det_nonzero(const FieldSpec& F, const Point& c) {
  const FieldElement two = F.from_int(2);
  const FieldElement m[3][3] = {{F.mul(two, c[0]), c[1], c[2]}, {c[1], F.mul(two, c[3]), c[4]}, {c[2], c[4], F.mul(two, c[5])}};
  auto minor = [&](int r0, int r1, int c0, int c1) { return F.sub(F.mul(m[r0][c0], m[r1][c1]), F.mul(m[r0][c1], m[r1][c0])); };
  FieldElement det = F.mul(m[0][0], minor(1, 2, 1, 2));
  det = F.sub(det, F.mul(m[0][1], minor(1, 2, 0, 2)));
  det = F.add(det, F.mul(m[0][2], minor(1, 2, 0, 1)));
  return det.index != 0;
}

TEST(PlaneCurves, MonomialOrder) {
  const auto m = monomials_of_degree(3, 2);
  ASSERT_EQ(m.size(), 6u);
  EXPECT_EQ(m[0], (Exponent{2, 0, 0}));
  EXPECT_EQ(m[1], (Exponent{1, 1, 0}));
  EXPECT_EQ(m[5], (Exponent{0, 0, 2}));
}

TEST(PlaneCurves, SmoothConicCountMatchesClosedForm) {
  for (auto [p, s] : std::vector<std::array<unsigned, 2>>{{2, 1}, {3, 1}, {2, 2}, {5, 1}, {7, 1}}) {
    const auto F = make_field(p, s);
    const std::uint64_t q = F.q();
    const auto count = count_smooth_plane_curves(F, 2);
    EXPECT_EQ(count.classes, q * q * q * q * q - q * q) << F.descriptor();
    EXPECT_EQ(count.tuples, count.classes * (q - 1));
  }
}

TEST(PlaneCurves, ConicExtensionsAddNothing) {
  for (auto [p, s] : std::vector<std::array<unsigned, 2>>{{2, 1}, {3, 1}, {2, 2}}) {
    const auto F = make_field(p, s);
    EXPECT_EQ(count_smooth_plane_curves(F, 2, {1, 2, 3}).classes, count_smooth_plane_curves(F, 2, {1}).classes);
  }
}

TEST(PlaneCurves, DeterminantCrossCheckInOddCharacteristic) {
  for (unsigned p : {3u, 5u}) {
    const auto F = make_field(p, 1);
    SmoothnessTester tester(F, 2, {1});
    for_each_projective_point(F, 5, [&](const Point& c) { ASSERT_EQ(tester.is_smooth(c), conic_det_nonzero(F, c)); });
  }
}

TEST(PlaneCurves, SmoothCubicCountMatchesClosedForm) {
  for (unsigned p : {2u, 3u}) {
    const auto F = make_field(p, 1);
    const std::uint64_t q = p;
    const auto count = count_smooth_plane_curves(F, 3);
    // q * |PGL_3(F_q)|
    EXPECT_EQ(count.classes, q * q * q * q * (q * q - 1) * (q * q * q - 1)) << p;
  }
  // a larger extension set changes nothing at q = 2
  const auto F2 = make_field(2, 1);
  EXPECT_EQ(count_smooth_plane_curves(F2, 3, {1, 2, 3, 4, 5, 6}).classes, count_smooth_plane_curves(F2, 3).classes);
}

TEST(PlaneCurves, ConicBoundsFromEnumeration) {
  for (unsigned p : {3u, 5u}) {
    const auto F = make_field(p, 1);
    const std::int64_t q = p;
    const auto count = count_smooth_plane_curves(F, 2);
    EXPECT_GE(static_cast<std::int64_t>(count.tuples), q * q * q * q * q - q * q * q * q - 2 * q * q * q);
  }
}

TEST(PlaneCurves, IncidenceMatrix) {
  const auto F = make_field(3, 1);
  const auto m = plane_curve_matrix(F, 2);
  EXPECT_EQ(m.rows(), 13u);
  EXPECT_EQ(m.cols(), 234u);
  for (std::uint32_t j = 0; j < m.cols(); ++j) EXPECT_EQ(m.column(j).size(), 4u);  // q + 1 points each
  EXPECT_LE(coherence(m), Rational(4, 4));
  EXPECT_THROW(plane_curve_matrix(F, 4), Error);
}

TEST(PlaneCurves, CubicInvalidDegreeAndCap) {
  try {
    count_smooth_plane_curves(make_field(7, 1), 3);  // 7^10 > cap
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(is_cap_error(e.kind()));
  }
}

TEST(Fermat, PointCounts) {
  for (unsigned p : {2u, 3u}) {
    const auto F = make_field(p, 2);
    const auto pts = fermat_surface_points(F);
    const std::uint64_t q = p;
    EXPECT_EQ(pts.size(), (q * q * q + 1) * (q * q + 1));
    // affine cone count, computed independently
    std::uint64_t affine = 0;
    const std::uint32_t Q = F.q();
    for (std::uint32_t a = 0; a < Q; ++a)
      for (std::uint32_t b = 0; b < Q; ++b)
        for (std::uint32_t c = 0; c < Q; ++c)
          for (std::uint32_t d = 0; d < Q; ++d) {
            FieldElement s = F.zero();
            for (auto x : {a, b, c, d}) s = F.add(s, F.pow({x}, q + 1));
            affine += s.index == 0;
          }
    EXPECT_EQ((affine - 1) / (Q - 1), pts.size());
  }
}

TEST(Fermat, HyperplaneMatrixShape) {
  const auto m = fermat_hyperplane_matrix(make_field(2, 2));
  EXPECT_EQ(m.rows(), 45u);
  EXPECT_EQ(m.cols(), 85u);
  for (std::uint32_t j = 0; j < m.cols(); ++j) EXPECT_GE(m.column(j).size(), 3u);
  EXPECT_THROW(fermat_hyperplane_matrix(make_field(2, 3)), Error);
}

}  // namespace
}  // namespace agrip
