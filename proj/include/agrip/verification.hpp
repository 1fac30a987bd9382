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

#pragma once

// Independent oracles: pairwise coherence, the difference trick for
// evaluation designs, RIP constants of tiny instances, smooth plane curve
// counts and point counts of Fermat surface sections.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "agrip/design.hpp"
#include "agrip/error.hpp"
#include "agrip/geometry.hpp"
#include "agrip/incidence.hpp"
#include "agrip/matrix_core.hpp"
#include "agrip/parallel.hpp"
#include "agrip/random.hpp"

namespace agrip {

inline constexpr std::uint32_t kOracleColumnCap = 5000;
inline constexpr std::uint64_t kDifferenceClassCap = 10'000'000;
inline constexpr std::uint64_t kRipSubsetCap = 200'000;

struct OracleResult {
  std::string quantity;
  std::string instance;
  std::string oracle;
  std::string fast;
  bool agree = false;
};

inline Json to_json(const OracleResult& r) {
  return Json{{"quantity", r.quantity},
              {"instance", r.instance},
              {"oracle", r.oracle},
              {"fast", r.fast},
              {"agree", r.agree}};
}

/// Max over all column pairs by direct sparse merges.
inline Surd brute_force_coherence(const MeasurementMatrix& m, unsigned workers = worker_count()) {
  require(m.cols() >= 2, ErrorKind::SingleColumn, "coherence needs at least two columns");
  require(m.cols() <= kOracleColumnCap, ErrorKind::CapExceeded,
          "pairwise oracle is limited to " + std::to_string(kOracleColumnCap) + " columns");
  const std::uint32_t N = m.cols();
  std::vector<Rational> best(std::max(1u, std::min(workers, N)), Rational(0));
  parallel_chunks(N, static_cast<unsigned>(best.size()), [&](unsigned w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ci = m.column(static_cast<std::uint32_t>(i));
      for (std::uint32_t j = static_cast<std::uint32_t>(i) + 1; j < N; ++j) {
        const std::int64_t ip = inner_product(ci, m.column(j));
        const Rational sq(ip * ip, m.squared_norm(static_cast<std::uint32_t>(i)) * m.squared_norm(j));
        if (sq > best[w]) best[w] = sq;
      }
    }
  });
  return Surd::from_square(*std::max_element(best.begin(), best.end()));
}

/// mu of the evaluation matrix as the largest zero count of a nonzero
/// function, divided by |B|.
inline Rational coherence_via_differences(const EvaluationDesign& d, unsigned workers = worker_count()) {
  d.validate();
  if (d.dimension() == 1) return Rational(0);  // differences are nonzero constants
  const auto z = max_zero_count(d, kDifferenceClassCap, workers);
  return Rational(static_cast<std::int64_t>(z.zeros), static_cast<std::int64_t>(d.point_count()));
}

/// delta_k: the largest deviation from 1 of an eigenvalue of a k x k Gram
/// matrix of unit-normalized columns, over all k-subsets.
inline double brute_force_rip_delta(const MeasurementMatrix& m, unsigned k) {
  require(k >= 1 && k <= 4, ErrorKind::InvalidArgument, "RIP oracle supports 1 <= k <= 4");
  require(k <= m.cols(), ErrorKind::InvalidArgument, "k exceeds the column count");
  require(binomial(m.cols(), k) <= kRipSubsetCap, ErrorKind::CapExceeded,
          "C(N, k) exceeds " + std::to_string(kRipSubsetCap));
  const std::uint32_t N = m.cols();
  std::vector<double> inv(N);
  for (std::uint32_t j = 0; j < N; ++j) inv[j] = 1.0 / std::sqrt(static_cast<double>(m.squared_norm(j)));
  std::vector<std::uint32_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0u);
  double delta = 0;
  Eigen::MatrixXd G(k, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(static_cast<Eigen::Index>(k));
  while (true) {
    for (unsigned a = 0; a < k; ++a) {
      G(a, a) = 1.0;
      for (unsigned b = a + 1; b < k; ++b) {
        const double v = inner_product(m.column(idx[a]), m.column(idx[b])) * inv[idx[a]] * inv[idx[b]];
        G(a, b) = v;
        G(b, a) = v;
      }
    }
    solver.compute(G, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    delta = std::max({delta, 1.0 - ev.minCoeff(), ev.maxCoeff() - 1.0});
    // next k-subset in lexicographic order
    int pos = static_cast<int>(k) - 1;
    while (pos >= 0 && idx[pos] == N - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (unsigned t = pos + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
  return delta;
}

struct PlaneCurveCensus {
  SmoothCurveCount count;
  std::vector<unsigned> extension_degrees;
  std::int64_t stated_bound = 0;  // q^5 - 2q^4 (conics) or q^9 - 6q^8 (cubics), on tuples
  std::int64_t proof_bound = 0;   // q^5 - q^4 - 2q^3 for conics; same as stated for cubics
};

inline PlaneCurveCensus plane_curve_census(const FieldSpec& f, unsigned degree) {
  PlaneCurveCensus c;
  c.extension_degrees = default_extension_degrees(degree);
  c.count = count_smooth_plane_curves(f, degree, c.extension_degrees);
  const std::int64_t q = f.q();
  auto pw = [&](int e) { return static_cast<std::int64_t>(checked_pow(q, e)); };
  if (degree == 2) {
    c.stated_bound = pw(5) - 2 * pw(4);
    c.proof_bound = pw(5) - pw(4) - 2 * pw(3);
  } else {
    c.stated_bound = c.proof_bound = pw(9) - 6 * pw(8);
  }
  return c;
}

inline Json to_json(const PlaneCurveCensus& c) {
  return Json{{"classes", c.count.classes},
              {"tuples", c.count.tuples},
              {"extension_degrees", c.extension_degrees},
              {"stated_bound", c.stated_bound},
              {"proof_bound", c.proof_bound},
              {"stated_bound_holds", static_cast<std::int64_t>(c.count.tuples) >= c.stated_bound},
              {"proof_bound_holds", static_cast<std::int64_t>(c.count.tuples) >= c.proof_bound}};
}

struct SectionCounts {
  unsigned degree = 1;
  std::uint64_t min = 0, max = 0;
  std::uint64_t hypersurfaces = 0;
  bool exhaustive = true;  // false: seeded sample, min is only an upper estimate of the true minimum
  std::uint64_t lower_bound = 0;  // (q-1)^2 (q+1)
  bool bound_holds() const { return min >= lower_bound; }
};

/// Min and max over degree-t surfaces of the number of Fermat surface points
/// they contain. Beyond `class_cap` scalar classes a seeded sample of
/// `samples` forms is used instead and the result is flagged.
inline SectionCounts fermat_section_counts(const FieldSpec& f, unsigned t, std::uint64_t class_cap = 2'000'000,
                                           std::uint64_t samples = 200'000, std::uint64_t seed = 0) {
  const std::uint64_t q = fermat_base(f);
  require(t >= 1, ErrorKind::InvalidArgument, "degree must be positive");
  if (t > 1)
    require(std::gcd(q * q - 1, static_cast<std::uint64_t>(t)) == 1 && t < q + 1, ErrorKind::GcdConditionViolated,
            "need gcd(q^2 - 1, t) = 1 and t < q + 1, got t = " + std::to_string(t));
  const auto points = fermat_surface_points(f);
  const auto monomials = monomials_of_degree(4, t);
  const std::size_t M = monomials.size();
  std::vector<FieldElement> value;
  for (const auto& pt : points)
    for (const auto& e : monomials) value.push_back(eval_monomial(f, e, pt));

  SectionCounts out;
  out.degree = t;
  out.lower_bound = (q - 1) * (q - 1) * (q + 1);
  bool first = true;
  auto visit = [&](const Point& c) {
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      FieldElement acc = FieldSpec::zero();
      const FieldElement* v = &value[i * M];
      for (std::size_t m = 0; m < M; ++m)
        if (c[m].index) acc = f.add(acc, f.mul(c[m], v[m]));
      count += acc.index == 0;
    }
    out.min = first ? count : std::min(out.min, count);
    out.max = first ? count : std::max(out.max, count);
    first = false;
    ++out.hypersurfaces;
  };
  const std::uint64_t Q = f.q();
  std::uint64_t classes = 0;
  bool over = false;
  {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < M && !over; ++i) {
      if (total > class_cap * Q) over = true;
      total *= Q;
    }
    if (!over) classes = (total - 1) / (Q - 1);
    over = over || classes > class_cap;
  }
  if (!over) {
    for_each_projective_point(f, static_cast<unsigned>(M - 1), visit);
  } else {
    out.exhaustive = false;
    auto rng = substream({seed, t, Q});
    std::uniform_int_distribution<std::uint32_t> pick(0, f.q() - 1);
    Point c(M);
    for (std::uint64_t s = 0; s < samples; ++s) {
      bool nonzero = false;
      for (auto& x : c) {
        x = {pick(rng)};
        nonzero = nonzero || x.index != 0;
      }
      if (nonzero) visit(c);
    }
  }
  return out;
}

inline Json to_json(const SectionCounts& s) {
  return Json{{"degree", s.degree},
              {"min", s.min},
              {"max", s.max},
              {"hypersurfaces", s.hypersurfaces},
              {"mode", s.exhaustive ? "exhaustive" : "sampled lower bound"},
              {"lower_bound", s.lower_bound},
              {"bound_holds", s.bound_holds()}};
}

}  // namespace agrip
