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


#include "agrip/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"

namespace agrip {
namespace {

using Dense = std::vector<std::vector<std::int64_t>>;  // column-major: d[j][row]

MeasurementMatrix from_dense(const Dense& d, std::uint32_t rows) {
  std::vector<std::vector<MatrixEntry>> cols;
  for (const auto& c : d) {
    std::vector<MatrixEntry> col;
    for (std::uint32_t r = 0; r < rows; ++r)
      if (c[r]) col.push_back({r, static_cast<std::int32_t>(c[r])});
    cols.push_back(col);
  }
  return MeasurementMatrix::from_columns(rows, cols);
}

Dense random_dense(std::mt19937_64& rng, std::uint32_t rows, std::uint32_t cols, bool binary) {
  Dense d(cols, std::vector<std::int64_t>(rows, 0));
  std::uniform_int_distribution<int> pick(0, 3);
  for (auto& c : d) {
    for (auto& v : c) {
      const int r = pick(rng);
      v = r == 0 ? (binary ? 1 : -1) : r == 1 ? 1 : r == 2 && !binary ? 2 : 0;
    }
    if (std::all_of(c.begin(), c.end(), [](auto v) { return v == 0; })) c[0] = 1;
  }
  return d;
}

// Dense oracle: mu^2 as an exact rational, omega in long double.
struct Oracle {
  Rational mu_sq;
  long double omega_signed = 0, omega_abs = 0;
};

Oracle dense_oracle(const Dense& d) {
  const std::size_t N = d.size();
  auto dot = [&](std::size_t a, std::size_t b) {
    std::int64_t s = 0;
    for (std::size_t r = 0; r < d[a].size(); ++r) s += d[a][r] * d[b][r];
    return s;
  };
  Oracle o{Rational(0)};
  for (std::size_t i = 0; i < N; ++i) {
    long double ss = 0, sa = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (i == j) continue;
      const std::int64_t ip = dot(i, j);
      const Rational sq(ip * ip, dot(i, i) * dot(j, j));
      if (sq > o.mu_sq) o.mu_sq = sq;
      const long double v = ip / std::sqrt(static_cast<long double>(dot(i, i)) * dot(j, j));
      ss += v;
      sa += std::fabs(v);
    }
    o.omega_signed = std::max(o.omega_signed, std::fabs(ss) / (N - 1));
    o.omega_abs = std::max(o.omega_abs, sa / (N - 1));
  }
  return o;
}

TEST(MatrixCore, IdentityIsOrthonormal) {
  const auto I = MeasurementMatrix::identity(3);
  const auto g = gram_summary(I);
  EXPECT_TRUE(g.mu.is_zero());
  EXPECT_EQ(*g.omega_signed.exact, Rational(0));
  EXPECT_EQ(*g.omega_absolute.exact, Rational(0));
  const auto v = strong_coherence_check(I);
  EXPECT_TRUE(v.cond1);
  EXPECT_TRUE(v.cond2);
  const auto s = sparsity_order_bound(g.mu, 3);
  EXPECT_TRUE(s.orthonormal);
  EXPECT_EQ(s.k, 3u);
}

TEST(MatrixCore, DuplicatedColumnHasCoherenceOne) {
  const Dense d = {{1, 0, 1}, {0, 1, 1}, {1, 0, 1}};
  EXPECT_EQ(coherence(from_dense(d, 3)), Rational(1));
  const Dense flipped = {{1, 0, 1}, {0, 1, 1}, {-1, 0, -1}};
  EXPECT_EQ(coherence(from_dense(flipped, 3)), Rational(1));
}

TEST(MatrixCore, SingleColumnRejected) {
  const Dense d = {{1, 1}};
  try {
    coherence(from_dense(d, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingleColumn);
  }
}

TEST(MatrixCore, PairwiseCapEnforced) {
  MetricOptions opts;
  opts.pairwise_cap = 4;
  try {
    coherence(MeasurementMatrix::identity(5), opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(is_cap_error(e.kind()));
  }
}

TEST(MatrixCore, GramSummaryMatchesDenseOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const bool binary = trial % 2 == 0;
    const std::uint32_t rows = 3 + trial % 7, cols = 2 + trial % 11;
    const auto d = random_dense(rng, rows, cols, binary);
    const auto m = from_dense(d, rows);
    const auto g = gram_summary(m);
    const auto o = dense_oracle(d);
    ASSERT_EQ(g.mu.square(), o.mu_sq) << trial;
    EXPECT_NEAR(g.omega_signed.value, static_cast<double>(o.omega_signed), 1e-12);
    EXPECT_NEAR(g.omega_absolute.value, static_cast<double>(o.omega_abs), 1e-12);
    EXPECT_LE(g.omega_signed.value, g.omega_absolute.value + 1e-15);
    if (m.is_binary()) {
      EXPECT_DOUBLE_EQ(g.omega_signed.value, g.omega_absolute.value);
    }
  }
}

TEST(MatrixCore, ExactOmegaWithUniformNorms) {
  // three columns of norm^2 2 with inner products 1, -1, 0
  const Dense d = {{1, 1, 0}, {1, 0, 1}, {0, -1, 1}};
  const auto g = gram_summary(from_dense(d, 3));
  ASSERT_TRUE(g.omega_signed.exact);
  // column 0: (1 + -1)/2 -> 0; column 1: (1 + 1)/2 = 1 -> /2 = 1/2
  EXPECT_EQ(*g.omega_signed.exact, Rational(1, 2));
  EXPECT_EQ(*g.omega_absolute.exact, Rational(1, 2));
  EXPECT_EQ(g.mu, Rational(1, 2));
}

TEST(MatrixCore, CoherenceInvariantUnderPermutationAndSignFlip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint32_t rows = 6, cols = 9;
    auto d = random_dense(rng, rows, cols, false);
    const auto base = coherence(from_dense(d, rows));
    std::vector<std::uint32_t> perm(rows);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    Dense e = d;
    for (std::size_t j = 0; j < cols; ++j)
      for (std::uint32_t r = 0; r < rows; ++r) e[j][perm[r]] = d[j][r];
    std::shuffle(e.begin(), e.end(), rng);
    std::uniform_int_distribution<std::size_t> pick(0, cols - 1);
    for (auto& v : e[pick(rng)]) v = -v;
    EXPECT_EQ(coherence(from_dense(e, rows)), base);
  }
}

TEST(MatrixCore, WorkerCountDoesNotChangeResults) {
  std::mt19937_64 rng(3);
  const auto d = random_dense(rng, 20, 200, false);
  const auto m = from_dense(d, 20);
  MetricOptions one, many;
  one.workers = 1;
  many.workers = 5;
  const auto a = gram_summary(m, one), b = gram_summary(m, many);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.mu_i, b.mu_i);
  EXPECT_EQ(a.mu_j, b.mu_j);
  EXPECT_EQ(a.omega_signed.value, b.omega_signed.value);
  EXPECT_EQ(a.omega_absolute.value, b.omega_absolute.value);
}

TEST(MatrixCore, WelchBound) {
  EXPECT_NEAR(welch_bound(4, 8), 0.70711, 1e-5);
  EXPECT_NEAR(welch_bound(25, 125), 0.22361, 1e-5);
  try {
    welch_bound(9, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateShape);
  }
}

TEST(MatrixCore, WelchBoundHoldsOnRandomMatrices) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_dense(rng, 4, 12, trial % 2 == 0);
    EXPECT_LE(welch_bound(4, 12), coherence(from_dense(d, 4)).to_double() + 1e-12);
  }
}

TEST(MatrixCore, SparsityOrderBound) {
  EXPECT_EQ(sparsity_order_bound(Surd::from_rational(Rational(1, 3)), 9).k, 4u);
  EXPECT_EQ(sparsity_order_bound(Surd::from_rational(Rational(2, 5)), 9).k, 3u);
  EXPECT_EQ(sparsity_order_bound(Surd::from_rational(Rational(1)), 9).k, 2u);
  EXPECT_EQ(sparsity_order_bound(Surd::from_square(Rational(1, 2)), 9).k, 2u);  // 1/mu = 1.414
  EXPECT_EQ(sparsity_order_bound(Surd::from_square(Rational(1, 10)), 9).k, 4u);  // 1/mu = 3.162
}

TEST(MatrixCore, StrongCoherenceThresholdsPerLogBase) {
  const Surd mu = Surd::from_rational(Rational(2, 5));
  AverageCoherence omega{Rational(1, 100), 0.01};
  for (auto base : {LogBase::Natural, LogBase::Base2, LogBase::Base10}) {
    const auto v = strong_coherence_verdict(mu, omega, 25, 125, base, OmegaMode::Signed);
    EXPECT_FALSE(v.cond1);
    EXPECT_TRUE(v.cond2);  // 1/100 <= (2/5)/5
    EXPECT_EQ(v.log_base, base);
  }
  const auto v = strong_coherence_verdict(mu, omega, 25, 125, LogBase::Natural, OmegaMode::Signed);
  EXPECT_NEAR(v.mu_threshold, 1.0 / (160 * std::log(125.0)), 1e-15);
  // boundary: omega exactly mu / sqrt(n)
  AverageCoherence edge{Rational(2, 25), 0.08};
  EXPECT_TRUE(strong_coherence_verdict(mu, edge, 25, 125, LogBase::Natural, OmegaMode::Signed).cond2);
  AverageCoherence over{Rational(201, 2500), 0.0804};
  EXPECT_FALSE(strong_coherence_verdict(mu, over, 25, 125, LogBase::Natural, OmegaMode::Signed).cond2);
}

TEST(MatrixCore, SparseFormatRoundTrip) {
  std::mt19937_64 rng(9);
  const auto m = from_dense(random_dense(rng, 7, 5, false), 7);
  const std::string text = to_sparse_text(m);
  std::istringstream in(text);
  const auto back = read_sparse(in);
  EXPECT_EQ(back, m);
  EXPECT_EQ(to_sparse_text(back), text);
  EXPECT_EQ(text.rfind("AGRIP-SPARSE 1 7 5 ", 0), 0u);
}

TEST(MatrixCore, SparseFormatRejectsMalformedInput) {
  auto parse_error_line = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      read_sparse(in);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError);
      return e.what();
    }
    return "";
  };
  const std::string good = "AGRIP-SPARSE 1 2 2 2\n0 0 1\n1 1 -1\n";
  EXPECT_EQ(parse_error_line(good), "");
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 2 2\n0 0 1\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 2 2\n1 1 1\n0 0 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 2 2\n0 0 1\n1 1 01\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 2 2\n0 0 1\n1 1 -1").find("newline"), std::string::npos);
  EXPECT_NE(parse_error_line(good + "junk\n").find("trailing"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 2 2\n0 0 0\n1 1 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 3 2\n0 0 1\n2 1 1\n").find("empty"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP SPARSE 1 2 2 2\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error_line("AGRIP-SPARSE 1 2 2 2\n0 0  1\n1 1 1\n").find("line 2"), std::string::npos);
}

TEST(MatrixCore, MetaJsonIsStrict) {
  MatrixMeta meta{"devore", {{"r", 2}}, "3", "ones", 3u};
  const auto j = meta_to_json(meta);
  const auto back = meta_from_json(j);
  EXPECT_EQ(back.family, "devore");
  EXPECT_EQ(back.params, meta.params);
  EXPECT_EQ(*back.column_support, 3u);
  Json bad = j;
  bad["colour"] = "red";
  EXPECT_THROW(meta_from_json(bad), Error);
}

TEST(MatrixCore, ReportJsonSchema) {
  const auto r = analyze(MeasurementMatrix::identity(3));
  const auto j = to_json(r);
  for (const char* key : {"family", "params", "n", "N", "mu", "omega_signed", "omega_absolute", "welch",
                          "sparsity_bound", "strong_coherence"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["mu"]["num"], 0);
  EXPECT_TRUE(j["welch"].is_null());
  EXPECT_EQ(j["strong_coherence"]["log_base"], "natural");
  EXPECT_EQ(j["strong_coherence"]["omega_mode"], "signed");
}

TEST(MatrixCore, IrrationalCoherenceIsReportedAsSquare) {
  // norms^2 2 and 3, inner product 2 -> mu = 2/sqrt(6)
  const Dense e = {{1, 1, 0}, {1, 1, 1}};
  const auto mu2 = coherence(from_dense(e, 3));
  EXPECT_EQ(mu2.square(), Rational(4, 6));
  EXPECT_FALSE(mu2.rational().has_value());
  const auto j = surd_json(mu2);
  EXPECT_EQ(j["num"], 2);
  EXPECT_EQ(j["den"], 3);
  EXPECT_EQ(j["sqrt"], true);
}

}  // namespace
}  // namespace agrip
