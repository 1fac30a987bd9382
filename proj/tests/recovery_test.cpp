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


#include "agrip/recovery.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "agrip/constructions.hpp"
#include "gtest/gtest.h"

namespace agrip {
namespace {

SparseSignal unit(std::uint64_t N, std::uint64_t j, double v = 1.0) { return {N, {j}, {v}}; }

TEST(Measure, ZeroAndUnitSignals) {
  const auto m = devore(make_field(3, 1), 2);
  const MatrixOperator op(m);
  const auto zero = measure(op, SparseSignal{9, {}, {}}, 0.0, 1);
  for (double v : zero) EXPECT_EQ(v, 0.0);
  const auto y = measure(op, unit(9, 4), 0.0, 1);
  std::vector<double> want(9, 0.0);
  for (auto e : m.column(4)) want[e.row] = 1.0 / std::sqrt(3.0);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(y[i], want[i]);
  EXPECT_EQ(measure(op, unit(9, 4), 0.3, 7), measure(op, unit(9, 4), 0.3, 7));
  EXPECT_NE(measure(op, unit(9, 4), 0.3, 7), measure(op, unit(9, 4), 0.3, 8));
  try {
    measure(op, unit(10, 4), 0.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Omp, SingleAtom) {
  const auto m = devore(make_field(5, 1), 3);
  const MatrixOperator op(m);
  for (std::uint64_t j = 0; j < m.cols(); j += 7) {
    const auto r = omp(op, measure(op, unit(m.cols(), j), 0.0, 0), 1);
    ASSERT_EQ(r.estimate.support, std::vector<std::uint64_t>{j});
    EXPECT_NEAR(r.estimate.values[0], 1.0, 1e-10);
  }
}

TEST(Omp, CoherenceRegimeRecoversExactly) {
  const auto m = devore(make_field(7, 1), 2);  // mu = 1/7, so mu (2k - 1) < 1 for k <= 3
  const MatrixOperator op(m);
  ExperimentConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 3;
  cfg.trials = 200;
  cfg.seed = 17;
  const auto rep = run_experiment(op, cfg);
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.rate, 1.0) << row.k;
    EXPECT_LT(row.mean_relative_error, 1e-9);
  }
}

TEST(Omp, RateDeclinesBeyondGuarantee) {
  const auto m = devore(make_field(7, 1), 2);
  const MatrixOperator op(m);
  ExperimentConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 20;
  cfg.trials = 50;
  cfg.seed = 3;
  const auto rep = run_experiment(op, cfg);
  EXPECT_LT(rep.rows.back().rate, 1.0);
  // trend: the second half of the sweep does worse than the first half
  double first = 0, second = 0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) (i < rep.rows.size() / 2 ? first : second) += rep.rows[i].rate;
  EXPECT_GT(first, second);
}

TEST(Omp, RankDeficiencyFlagged) {
  // two identical columns
  const auto m = MeasurementMatrix::from_columns(2, {{{0, 1}}, {{0, 1}}, {{1, 1}}});
  const MatrixOperator op(m);
  std::vector<double> y{1.0, 0.0};
  const auto r = omp(op, y, 2);
  EXPECT_EQ(r.estimate.support.size(), 1u);
  std::vector<double> y2{1.0, 1.0};
  const auto r2 = one_step_thresholding(op, y2, 2);  // picks the two parallel columns
  EXPECT_TRUE(r2.rank_deficient);
}

TEST(Thresholding, IdentityAndBoundary) {
  const auto I = MeasurementMatrix::identity(6);
  const MatrixOperator op(I);
  const auto r = one_step_thresholding(op, measure(op, unit(6, 2, -1.5), 0.0, 0), 1);
  EXPECT_EQ(r.estimate.support, std::vector<std::uint64_t>{2});
  EXPECT_NEAR(r.estimate.values[0], -1.5, 1e-12);
  const auto m = devore(make_field(3, 1), 2);  // rank 7 < 9
  const MatrixOperator dop(m);
  const auto full = one_step_thresholding(dop, measure(dop, unit(9, 0), 0.0, 0), 9);
  EXPECT_TRUE(full.rank_deficient);
}

TEST(Experiment, DeterministicAndWorkerIndependent) {
  const auto m = devore(make_field(5, 1), 3);
  const MatrixOperator op(m);
  ExperimentConfig cfg;
  cfg.k_min = 1;
  cfg.k_max = 4;
  cfg.trials = 40;
  cfg.sigma = 0.05;
  cfg.seed = 99;
  cfg.workers = 1;
  const auto a = to_json(run_experiment(op, cfg));
  cfg.workers = 4;
  const auto b = to_json(run_experiment(op, cfg));
  EXPECT_EQ(a, b);
  cfg.trials = 0;
  const auto empty = run_experiment(op, cfg);
  EXPECT_TRUE(empty.rows.empty());
}

void expect_same_correlations(const DesignOperator& lazy, const MeasurementMatrix& m) {
  const MatrixOperator dense(m);
  ASSERT_EQ(lazy.rows(), dense.rows());
  ASSERT_EQ(lazy.cols(), dense.cols());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> r(lazy.rows());
  for (auto& v : r) v = g(rng);
  std::vector<double> a(lazy.cols()), b(lazy.cols()), c(lazy.cols());
  lazy.correlate(r, a);
  lazy.correlate_general(r, b);
  dense.correlate(r, c);
  for (std::size_t j = 0; j < a.size(); ++j) {
    ASSERT_NEAR(a[j], c[j], 1e-9) << j;
    ASSERT_NEAR(b[j], c[j], 1e-9) << j;
  }
  NormalizedColumn x, y;
  for (std::uint64_t j = 0; j < lazy.cols(); j += 11) {
    lazy.column(j, x);
    dense.column(j, y);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i].first, y[i].first);
      EXPECT_NEAR(x[i].second, y[i].second, 1e-12);
    }
  }
}

TEST(DesignOperator, FastPathMatchesMaterializedMatrix) {
  for (const auto& f : {make_field(7, 1), make_field(2, 2), make_field(3, 2)}) {
    const auto d = toric_design(f, {1, 1, 0, 0});
    const DesignOperator balanced(d, balanced_scheme(d));
    EXPECT_TRUE(balanced.has_fast_path());
    expect_same_correlations(balanced, balanced_matrix(d));
    const DesignOperator ones(d, SignScheme{});
    EXPECT_TRUE(ones.has_fast_path());
    expect_same_correlations(ones, evaluation_matrix(d));
  }
}

TEST(DesignOperator, GeneralPathMatchesMaterializedMatrix) {
  const auto d = ruled_surface_design(make_field(5, 1), 1, 1);  // xy couples the coordinates
  const DesignOperator op(d, balanced_scheme(d));
  EXPECT_FALSE(op.has_fast_path());
  expect_same_correlations(op, balanced_matrix(d));
  const auto dv = devore_design(make_field(5, 1), 3);
  SignScheme random;
  random.kind = SignKind::Random;
  random.seed = 8;
  const DesignOperator rop(dv, random);
  expect_same_correlations(rop, randomize_signs(evaluation_matrix(dv), 8));
}

TEST(DesignOperator, NoisyThresholdingOnLargeToric) {
  const auto d = toric_design(make_field(23, 1), {1, 1, 0, 0});
  const DesignOperator op(d, balanced_scheme(d));
  ASSERT_TRUE(op.has_fast_path());
  ExperimentConfig cfg;
  cfg.k_min = cfg.k_max = 2;
  cfg.trials = 20;
  cfg.sigma = 0.05;
  cfg.seed = 1;
  cfg.algorithm = Algorithm::Thresholding;
  const auto rep = run_experiment(op, cfg);
  EXPECT_GE(rep.rows[0].rate, 0.9);
}

TEST(Signal, RelativeError) {
  const SparseSignal t{10, {1, 4}, {3.0, 4.0}};
  EXPECT_DOUBLE_EQ(relative_error(t, t), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(t, SparseSignal{10, {}, {}}), 1.0);
  EXPECT_DOUBLE_EQ(relative_error(t, SparseSignal{10, {1}, {3.0}}), 0.8);
}

TEST(Signal, AmplitudeModel) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_signal(50, 5, rng);
    ASSERT_EQ(s.support.size(), 5u);
    EXPECT_TRUE(std::is_sorted(s.support.begin(), s.support.end()));
    for (double v : s.values) {
      EXPECT_GE(std::fabs(v), 1.0);
      EXPECT_LE(std::fabs(v), 2.0);
    }
  }
}

}  // namespace
}  // namespace agrip
