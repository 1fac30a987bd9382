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


#include "agrip/sign_schemes.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"

namespace agrip {
namespace {

Rational exhaustive_expectation(unsigned L) {
  std::int64_t total = 0;
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << L); ++pattern) {
    std::int64_t s = 0;
    for (unsigned i = 0; i < L; ++i) s += (pattern >> i & 1) ? -1 : 1;
    total += s < 0 ? -s : s;
  }
  return Rational(total, std::int64_t{1} << L);
}

TEST(RandomSigns, DeterministicAndSupportPreserving) {
  const auto m = devore(make_field(5, 1), 3);
  const auto a = randomize_signs(m, 42), b = randomize_signs(m, 42), c = randomize_signs(m, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.meta().sign_scheme, "random:42");
  for (std::uint32_t j = 0; j < m.cols(); ++j) {
    ASSERT_EQ(a.column(j).size(), m.column(j).size());
    for (std::size_t k = 0; k < m.column(j).size(); ++k) {
      EXPECT_EQ(a.column(j)[k].row, m.column(j)[k].row);
      EXPECT_EQ(std::abs(a.column(j)[k].value), 1);
    }
    EXPECT_EQ(a.squared_norm(j), m.squared_norm(j));
  }
}

TEST(RandomSigns, RejectsNonBinary) {
  const auto m = randomize_signs(devore(make_field(3, 1), 2), 1);
  try {
    randomize_signs(m, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonBinaryInput);
  }
}

TEST(RandomSigns, CoherenceStaysWithinFamilyBounds) {
  struct Case {
    EvaluationDesign d;
  };
  const std::vector<EvaluationDesign> designs = {devore_design(make_field(5, 1), 3),
                                                 projective_space_design(make_field(3, 1), 2, 1),
                                                 ruled_surface_design(make_field(2, 2), 1, 1),
                                                 toric_design(make_field(5, 1), {1, 1, 0, 0})};
  for (const auto& d : designs) {
    const auto m = evaluation_matrix(d);
    const Rational bound(static_cast<std::int64_t>(d.bound_on_zeros), static_cast<std::int64_t>(d.point_count()));
    for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_LE(coherence(randomize_signs(m, seed)), bound);
  }
}

TEST(Expectation, SmallValues) {
  EXPECT_EQ(expected_abs_inner_product(0), Rational(0));
  EXPECT_EQ(expected_abs_inner_product(1), Rational(1));
  EXPECT_EQ(expected_abs_inner_product(2), Rational(1));
  EXPECT_EQ(expected_abs_inner_product(3), Rational(3, 2));
}

TEST(Expectation, MatchesExhaustiveEnumeration) {
  for (unsigned L = 0; L <= 14; ++L) EXPECT_EQ(expected_abs_inner_product(L), exhaustive_expectation(L)) << L;
}

TEST(Expectation, ClosedFormsByParity) {
  for (unsigned L = 1; L <= 20; ++L) {
    Rational tail(0);
    for (unsigned w = 0; 2 * w < L; ++w)
      tail = tail + Rational(4 * static_cast<std::int64_t>(w) * static_cast<std::int64_t>(binomial(L, w)), std::int64_t{1} << L);
    Rational expected = Rational(L) - tail;
    if (L % 2 == 0) expected = expected - Rational(static_cast<std::int64_t>(L * binomial(L, L / 2)), std::int64_t{1} << L);
    EXPECT_EQ(expected_abs_inner_product(L), expected) << L;
  }
}

TEST(Expectation, MonteCarloAgrees) {
  for (unsigned L = 1; L <= 4; ++L) {
    const int draws = 10000;
    double sum = 0, sum_sq = 0;
    for (int t = 0; t < draws; ++t) {
      ColumnSigns a(1000 + L, 2 * t), b(1000 + L, 2 * t + 1);
      double ip = 0;
      for (unsigned i = 0; i < L; ++i) ip += a.next() * b.next();
      sum += std::fabs(ip);
      sum_sq += ip * ip;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    EXPECT_LE(std::fabs(mean - expected_abs_inner_product(L).to_double()), 3 * se) << L;
  }
}

TEST(Balanced, Coloring) {
  auto count_red = [](std::size_t n) {
    const auto c = balanced_coloring(n);
    return static_cast<std::size_t>(std::count(c.begin(), c.end(), 1));
  };
  EXPECT_EQ(count_red(9), 4u);
  EXPECT_EQ(count_red(2), 1u);
  EXPECT_EQ(count_red(1), 0u);
  EXPECT_THROW(balanced_coloring(0), Error);
}

TEST(Balanced, ParityPairingFlipsParity) {
  for (unsigned p = 3; p <= 31; p += 2) {
    if (!is_prime(p)) continue;
    for (unsigned x = 1; x < p; ++x) EXPECT_NE(x % 2, (p - x) % 2);
  }
}

// Entry signs recomputed from the rule, independent of balanced_matrix.
MeasurementMatrix balanced_oracle(const EvaluationDesign& d) {
  const FieldSpec& f = d.field;
  const std::uint32_t q = f.q();
  const std::size_t B = d.point_count();
  std::vector<std::vector<MatrixEntry>> cols;
  for (std::uint64_t k = 0; k < d.column_count(); ++k) {
    const auto a = coefficients_of(k, q, d.dimension());
    std::vector<MatrixEntry> col;
    for (std::size_t b = 0; b < B; ++b) {
      FieldElement v = f.zero();
      for (std::size_t i = 0; i < a.size(); ++i) v = f.add(v, f.mul(a[i], d.table[i][b]));
      int parity;
      if (f.p() == 2) {
        std::size_t pivot = 0;
        while (d.table[pivot][b].index == 0) ++pivot;
        int weight = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
          if (i != pivot) weight += static_cast<int>(f.trace(a[i]));
        parity = weight % 2;
      } else {
        FieldElement s = f.zero();
        for (auto c : a) s = f.add(s, c);
        parity = static_cast<int>(f.trace(s) % 2);
      }
      const int lambda = b < B / 2 ? 1 : 0;
      col.push_back({static_cast<std::uint32_t>(b * q + v.index), (lambda + parity) % 2 ? -1 : 1});
    }
    cols.push_back(col);
  }
  return MeasurementMatrix::from_columns(static_cast<std::uint32_t>(q * B), cols);
}

TEST(Balanced, MatchesRuleOracle) {
  for (const auto& d : {devore_design(make_field(3, 1), 2), devore_design(make_field(5, 1), 2),
                        devore_design(make_field(2, 2), 2), projective_space_design(make_field(3, 1), 2, 1),
                        toric_design(make_field(2, 2), {1, 1, 0, 0})}) {
    EXPECT_EQ(balanced_matrix(d), balanced_oracle(d)) << d.family;
  }
}

TEST(Balanced, ColumnSumsAndSupport) {
  for (unsigned p : {3u, 5u, 7u}) {
    const auto d = devore_design(make_field(p, 1), 2);
    const auto u = evaluation_matrix(d);
    const auto m = balanced_matrix(d);
    for (std::uint32_t j = 0; j < m.cols(); ++j) {
      std::int64_t sum = 0;
      for (auto e : m.column(j)) sum += e.value;
      EXPECT_LE(std::abs(sum), 1);
      ASSERT_EQ(m.column(j).size(), u.column(j).size());
      for (std::size_t k = 0; k < u.column(j).size(); ++k) EXPECT_EQ(m.column(j)[k].row, u.column(j)[k].row);
      EXPECT_EQ(m.squared_norm(j), u.squared_norm(j));
    }
  }
}

TEST(Balanced, PerPointSumsAwayFromTheAllOnesPoint) {
  // The DeVore monomial basis takes the value 1 at x = 1 for every basis
  // function, so the coefficient sum is fixed by f(1) there and no
  // cancellation happens; every other point balances to p^((T-1)s - 1).
  for (unsigned p : {3u, 5u}) {
    for (unsigned r : {2u, 3u}) {
      const auto f = make_field(p, 1);
      const auto d = devore_design(f, r);
      const auto sums = row_sums(balanced_matrix(d));
      const std::int64_t expected = static_cast<std::int64_t>(checked_pow(p, r - 1 - 1));
      const std::int64_t full = static_cast<std::int64_t>(checked_pow(p, r - 1));
      for (std::uint32_t b = 0; b < p; ++b) {
        for (std::uint32_t a = 0; a < p; ++a) {
          const std::int64_t s = std::abs(sums[b * p + a]);
          EXPECT_EQ(s, b == 1 ? full : expected) << p << " " << r << " point " << b;
        }
      }
    }
  }
}

TEST(Balanced, PerPointSumsVanishInCharacteristicTwo) {
  const auto d = devore_design(make_field(2, 2), 2);
  const auto sums = row_sums(balanced_matrix(d));
  for (std::size_t b = 0; b < d.point_count(); ++b) {
    if (b == 1) continue;
    for (std::uint32_t a = 0; a < 4; ++a) EXPECT_EQ(sums[b * 4 + a], 0) << b;
  }
}

TEST(Balanced, CoherenceUnchangedAndOmegaSmall) {
  for (unsigned p : {3u, 5u, 7u}) {
    for (unsigned r : {2u, 3u}) {
      const auto d = devore_design(make_field(p, 1), r);
      const auto g = gram_summary(balanced_matrix(d));
      EXPECT_EQ(g.mu, Rational(r - 1, p)) << p << " " << r;
      EXPECT_LT(*g.omega_signed.exact, *g.omega_absolute.exact);
    }
  }
  EXPECT_EQ(*gram_summary(balanced_matrix(devore_design(make_field(3, 1), 2))).omega_signed.exact, Rational(1, 12));
  EXPECT_EQ(*gram_summary(balanced_matrix(devore_design(make_field(5, 1), 2))).omega_signed.exact, Rational(1, 30));
}

TEST(Balanced, ZeroBasisPointRejected) {
  auto d = projective_space_design(make_field(3, 1), 2, 1);
  // drop the constant so the point (0, 0) kills every basis function
  d.table.erase(d.table.begin());
  d.basis_names.erase(d.basis_names.begin());
  try {
    balanced_scheme(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoNonvanishingBasisFunction);
  }
}

TEST(Certificate, LazyPathMatchesMaterialized) {
  for (const auto& d : {devore_design(make_field(3, 1), 2), devore_design(make_field(7, 1), 3),
                        projective_space_design(make_field(3, 1), 2, 1), toric_design(make_field(5, 1), {1, 1, 0, 0}),
                        devore_design(make_field(2, 2), 3)}) {
    const auto full = certify_strong_coherence(balanced_matrix(d), d);
    for (unsigned workers : {1u, 3u}) {
      const auto lazy = certify_balanced_design(d, LogBase::Natural, workers);
      EXPECT_EQ(lazy.mu, full.mu) << d.family;
      EXPECT_EQ(*lazy.omega_signed.exact, *full.omega_signed.exact) << d.family;
      EXPECT_EQ(lazy.ground_truth.cond1, full.ground_truth.cond1);
      EXPECT_EQ(lazy.ground_truth.cond2, full.ground_truth.cond2);
      EXPECT_EQ(lazy.cond_a, full.cond_a);
      EXPECT_EQ(lazy.cond_b, full.cond_b);
    }
  }
}

TEST(Certificate, UnsignedMatricesFail) {
  const auto d = devore_design(make_field(5, 1), 3);
  const auto c = certify_strong_coherence(evaluation_matrix(d), d);
  EXPECT_FALSE(c.ground_truth.holds());
  ASSERT_TRUE(c.devore_condition.has_value());
  EXPECT_FALSE(*c.devore_condition);
  const auto p = projective_space_design(make_field(3, 1), 2, 1);
  const auto m = evaluation_matrix(p);
  EXPECT_EQ(*gram_summary(m).omega_signed.exact, Rational(8, 26));  // (q^(T-1) - 1) / (q^T - 1)
  EXPECT_FALSE(certify_strong_coherence(m, p).ground_truth.holds());
}

TEST(Certificate, SufficientConditionsOnLargeToric) {
  const auto d = toric_design(make_field(47, 1), {1, 1, 0, 0});
  StrongCoherenceCertificate c;
  detail::fill_sufficient_conditions(c, d, LogBase::Natural);
  EXPECT_TRUE(c.cond_a);
  EXPECT_TRUE(c.cond_b);
  const auto small = toric_design(make_field(43, 1), {1, 1, 0, 0});
  detail::fill_sufficient_conditions(c, small, LogBase::Natural);
  EXPECT_FALSE(c.cond_b);  // 3 * 160 ln 43 > 42^2
}

TEST(SignScheme, Parse) {
  EXPECT_EQ(parse_sign_scheme("ones").kind, SignKind::AllOnes);
  EXPECT_EQ(parse_sign_scheme("balanced").kind, SignKind::Balanced);
  const auto r = parse_sign_scheme("random:123");
  EXPECT_EQ(r.kind, SignKind::Random);
  EXPECT_EQ(r.seed, 123u);
  EXPECT_EQ(r.name(), "random:123");
  EXPECT_THROW(parse_sign_scheme("random:"), Error);
  EXPECT_THROW(parse_sign_scheme("random:-1"), Error);
  EXPECT_THROW(parse_sign_scheme("mixed"), Error);
}

}  // namespace
}  // namespace agrip
