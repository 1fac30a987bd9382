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


#include "agrip/verification.hpp"

#include "agrip/constructions.hpp"
#include "agrip/sign_schemes.hpp"
#include "gtest/gtest.h"

namespace agrip {
namespace {

std::vector<EvaluationDesign> small_designs() {
  return {devore_design(make_field(5, 1), 3),  devore_design(make_field(2, 2), 2),
          projective_space_design(make_field(3, 1), 2, 1), projective_space_design(make_field(2, 1), 3, 1),
          ruled_surface_design(make_field(3, 1), 1, 1), toric_design(make_field(5, 1), ToricParams{1, 1, 0, 0}),
          toric_design(make_field(7, 1), ToricParams{2, 1, 1, 0})};
}

TEST(BruteForceCoherence, MatchesGramPath) {
  for (const auto& d : small_designs()) {
    const auto m = evaluation_matrix(d);
    EXPECT_EQ(brute_force_coherence(m, 1), coherence(m)) << d.family;
    EXPECT_EQ(brute_force_coherence(m, 3), coherence(m)) << d.family;
  }
  const auto a = construction_a_single_point(make_field(5, 1), 2, make_field(5, 1).elements());
  EXPECT_EQ(brute_force_coherence(a), coherence(a));
}

TEST(BruteForceCoherence, RejectsDegenerateInputs) {
  ColumnBuilder b(2);
  b.push(0, 1);
  b.end_column();
  EXPECT_THROW(brute_force_coherence(std::move(b).finish()), Error);
}

TEST(DifferenceTrick, AgreesWithPairwiseOracle) {
  for (const auto& d : small_designs()) {
    const auto m = evaluation_matrix(d);
    EXPECT_EQ(Surd::from_rational(coherence_via_differences(d)), brute_force_coherence(m)) << d.family;
  }
}

TEST(DifferenceTrick, ConstantsOnlyHaveZeroCoherence) {
  const auto d = devore_design(make_field(3, 1), 2);
  EXPECT_EQ(coherence_via_differences(d), Rational(1, 3));
  auto one = d;
  one.basis_names = {"1"};
  one.table.resize(1);
  one.bound_on_zeros = 0;
  EXPECT_EQ(coherence_via_differences(one), Rational(0));
}

TEST(RipOracle, PairsGiveCoherence) {
  for (const auto& d : small_designs()) {
    const auto m = evaluation_matrix(d);
    if (binomial(m.cols(), 2) > kRipSubsetCap) continue;
    EXPECT_NEAR(brute_force_rip_delta(m, 2), coherence(m).to_double(), 1e-12) << d.family;
  }
}

TEST(RipOracle, MonotoneAndGershgorin) {
  const auto m = devore(make_field(3, 1), 2);
  const double mu = coherence(m).to_double();
  const double d2 = brute_force_rip_delta(m, 2), d3 = brute_force_rip_delta(m, 3), d4 = brute_force_rip_delta(m, 4);
  EXPECT_EQ(brute_force_rip_delta(m, 1), 0.0);
  EXPECT_LE(d2, d3 + 1e-12);
  EXPECT_LE(d3, d4 + 1e-12);
  EXPECT_LE(d3, 2 * mu + 1e-12);
  EXPECT_LE(d4, 3 * mu + 1e-12);
}

TEST(RipOracle, Caps) {
  const auto m = devore(make_field(7, 1), 3);
  EXPECT_THROW(brute_force_rip_delta(m, 5), Error);
  EXPECT_THROW(brute_force_rip_delta(m, 4), Error);  // C(343, 4) is far above the cap
}

TEST(PlaneCurveCensus, ConicsAndCubics) {
  const auto c2 = plane_curve_census(make_field(3, 1), 2);
  EXPECT_EQ(c2.count.classes, 243u - 9u);
  EXPECT_EQ(c2.count.tuples, 2u * (243u - 9u));
  EXPECT_EQ(c2.stated_bound, 243 - 2 * 81);
  EXPECT_EQ(c2.proof_bound, 243 - 81 - 54);
  const auto c3 = plane_curve_census(make_field(2, 1), 3);
  EXPECT_EQ(c3.count.classes, 336u);
  EXPECT_EQ(c3.extension_degrees, (std::vector<unsigned>{1, 2, 3}));
  EXPECT_TRUE(to_json(c3).at("stated_bound_holds").get<bool>());
}

TEST(FermatSections, HyperplanesExhaustive) {
  const auto s2 = fermat_section_counts(make_field(2, 2), 1);
  EXPECT_TRUE(s2.exhaustive);
  EXPECT_EQ(s2.hypersurfaces, 85u);
  EXPECT_EQ(s2.lower_bound, 3u);
  EXPECT_TRUE(s2.bound_holds());
  // A tangent plane section of the degree 3 Fermat surface over F_4 is
  // three concurrent lines; a generic one is a smooth Hermitian curve.
  EXPECT_EQ(s2.max, 13u);
  EXPECT_EQ(s2.min, 9u);
  const auto s3 = fermat_section_counts(make_field(3, 2), 1);
  EXPECT_EQ(s3.hypersurfaces, 820u);
  EXPECT_EQ(s3.max, 37u);
  EXPECT_EQ(s3.min, 28u);
}

TEST(FermatSections, QuadricsOverF4) {
  const auto s = fermat_section_counts(make_field(2, 2), 2);
  EXPECT_TRUE(s.exhaustive);
  EXPECT_EQ(s.hypersurfaces, (1u << 20) / 3u);
  // A quadric section of this surface can hold a single point, so the
  // plane-section bound does not carry over to t = 2.
  EXPECT_EQ(s.min, 1u);
  EXPECT_FALSE(s.bound_holds());
  const auto sampled = fermat_section_counts(make_field(2, 2), 2, 1000, 500, 7);
  EXPECT_FALSE(sampled.exhaustive);
  EXPECT_GE(sampled.min, s.min);
  EXPECT_EQ(to_json(sampled).at("mode"), "sampled lower bound");
}

TEST(FermatSections, GcdCondition) {
  EXPECT_THROW(fermat_section_counts(make_field(3, 2), 2), Error);  // gcd(8, 2) = 2
  EXPECT_THROW(fermat_section_counts(make_field(2, 2), 3), Error);  // t = q + 1
  try {
    fermat_section_counts(make_field(3, 2), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GcdConditionViolated);
  }
  EXPECT_THROW(fermat_section_counts(make_field(3, 1), 1), Error);
}

TEST(FermatSections, HyperplaneMatrixCoherence) {
  // Two tangent planes containing a common line of the surface share all
  // q^2 + 1 of its points, against a column weight of q^3 + q^2 + 1.
  EXPECT_EQ(brute_force_coherence(fermat_hyperplane_matrix(make_field(2, 2))), Rational(5, 13));
  EXPECT_EQ(brute_force_coherence(fermat_hyperplane_matrix(make_field(3, 2))), Rational(10, 37));
}

}  // namespace
}  // namespace agrip
