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

// Sign patterns for binary measurement matrices: seeded random +-1 signs and
// the balanced scheme, which combines a red/blue split of the points with
// the trace parity of each column's coefficient sum.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agrip/constructions.hpp"
#include "agrip/design.hpp"
#include "agrip/error.hpp"
#include "agrip/matrix_core.hpp"
#include "agrip/random.hpp"

namespace agrip {

enum class SignKind { AllOnes, Random, Balanced };

struct SignScheme {
  SignKind kind = SignKind::AllOnes;
  std::uint64_t seed = 0;                // Random only
  std::vector<std::uint8_t> red;         // Balanced: 1 = red (lambda = 1), 0 = blue
  std::vector<std::uint32_t> pivot;      // Balanced: first basis function nonvanishing at each point

  std::string name() const {
    switch (kind) {
      case SignKind::AllOnes: return "ones";
      case SignKind::Random: return "random:" + std::to_string(seed);
      case SignKind::Balanced: return "balanced";
    }
    return "";
  }
};

/// Parses "ones", "random:SEED" or "balanced". Balanced schemes still need
/// their coloring from `balanced_scheme`.
inline SignScheme parse_sign_scheme(const std::string& text) {
  SignScheme s;
  if (text == "ones") return s;
  if (text == "balanced") {
    s.kind = SignKind::Balanced;
    return s;
  }
  if (text.rfind("random:", 0) == 0) {
    const std::string digits = text.substr(7);
    require(!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos, ErrorKind::ParseError,
            "bad seed in '" + text + "'");
    try {
      s.seed = std::stoull(digits);
    } catch (const std::out_of_range&) {
      fail(ErrorKind::ParseError, "seed out of range in '" + text + "'");
    }
    s.kind = SignKind::Random;
    return s;
  }
  fail(ErrorKind::ParseError, "unknown sign scheme '" + text + "'");
}

/// The +-1 sequence used for column `column` under seed `seed`, one draw per
/// nonzero in row order.
class ColumnSigns {
 public:
  ColumnSigns(std::uint64_t seed, std::uint64_t column) : rng_(substream({seed, column})) {}
  std::int32_t next() {
    if (bits_left_ == 0) {
      word_ = rng_();
      bits_left_ = 64;
    }
    const std::int32_t s = (word_ & 1u) ? -1 : 1;
    word_ >>= 1;
    --bits_left_;
    return s;
  }

 private:
  std::mt19937_64 rng_;
  std::uint64_t word_ = 0;
  unsigned bits_left_ = 0;
};

/// Replaces every 1 by an independent seeded +-1.
inline MeasurementMatrix randomize_signs(const MeasurementMatrix& m, std::uint64_t seed) {
  require(m.is_binary(), ErrorKind::NonBinaryInput, "random signs need a 0/1 matrix");
  ColumnBuilder builder(m.rows());
  builder.reserve(m.cols(), m.nnz());
  for (std::uint32_t j = 0; j < m.cols(); ++j) {
    ColumnSigns signs(seed, j);
    for (const auto& e : m.column(j)) builder.push(e.row, signs.next());
    builder.end_column();
  }
  MatrixMeta meta = m.meta();
  meta.sign_scheme = "random:" + std::to_string(seed);
  return std::move(builder).finish(std::move(meta));
}

/// E|sum of L independent fair +-1| = sum_w |L - 2w| C(L, w) / 2^L.
inline Rational expected_abs_inner_product(unsigned L) {
  require(L <= 40, ErrorKind::CapExceeded, "overlap above 40 is not supported exactly");
  std::int64_t total = 0;
  for (unsigned w = 0; w <= L; ++w) {
    const std::int64_t dev = static_cast<std::int64_t>(L) - 2 * static_cast<std::int64_t>(w);
    total += (dev < 0 ? -dev : dev) * static_cast<std::int64_t>(binomial(L, w));
  }
  return Rational(total, std::int64_t{1} << L);
}

/// The first floor(count / 2) points are red.
inline std::vector<std::uint8_t> balanced_coloring(std::size_t count) {
  require(count >= 1, ErrorKind::InvalidArgument, "coloring needs at least one point");
  std::vector<std::uint8_t> red(count, 0);
  for (std::size_t i = 0; i < count / 2; ++i) red[i] = 1;
  return red;
}

/// Balanced scheme for a design: coloring plus per-point pivots.
inline SignScheme balanced_scheme(const EvaluationDesign& d) {
  SignScheme s;
  s.kind = SignKind::Balanced;
  s.red = balanced_coloring(d.point_count());
  s.pivot.resize(d.point_count());
  for (std::size_t b = 0; b < d.point_count(); ++b) {
    std::size_t i = 0;
    while (i < d.dimension() && d.table[i][b].index == 0) ++i;
    require(i < d.dimension(), ErrorKind::NoNonvanishingBasisFunction,
            "every basis function vanishes at point " + std::to_string(b));
    s.pivot[b] = static_cast<std::uint32_t>(i);
  }
  return s;
}

/// Signs (+1/-1) of a column of the balanced matrix, one per point.
/// Odd p: parity of Tr(a_1 + ... + a_T). p = 2: parity of the Hamming weight
/// of the traces, leaving out the pivot coefficient at each point.
inline void balanced_column_signs(const EvaluationDesign& d, const SignScheme& s,
                                  std::span<const FieldElement> coeffs, std::span<std::int32_t> out) {
  const FieldSpec& f = d.field;
  FieldElement sum = FieldSpec::zero();
  for (auto c : coeffs) sum = f.add(sum, c);
  const std::uint32_t total = f.trace(sum);
  for (std::size_t b = 0; b < d.point_count(); ++b) {
    std::uint32_t parity = total & 1u;
    if (f.p() == 2) parity = (total + f.trace(coeffs[s.pivot[b]])) & 1u;
    out[b] = ((s.red[b] + parity) & 1u) ? -1 : 1;
  }
}

/// Evaluation matrix of `d` with entry (-1)^(lambda(b) + parity) at (f(b), b).
inline MeasurementMatrix balanced_matrix(const EvaluationDesign& d, const SignScheme& scheme) {
  require(scheme.kind == SignKind::Balanced && scheme.red.size() == d.point_count() &&
              scheme.pivot.size() == d.point_count(),
          ErrorKind::InvalidArgument, "balanced scheme does not match the design");
  d.validate();
  const std::uint64_t N = d.column_count();
  require(N <= kMaterializedColumnCap, ErrorKind::CapExceeded, "too many columns to materialize");
  const std::uint32_t q = d.field.q();
  const std::size_t B = d.point_count();
  ColumnBuilder builder(static_cast<std::uint32_t>(q * B));
  builder.reserve(N, N * B);
  std::vector<std::int32_t> signs(B);
  FunctionEnumerator it(d, std::vector<FieldElement>(d.dimension(), FieldSpec::zero()));
  do {
    balanced_column_signs(d, scheme, it.coeffs(), signs);
    const auto& v = it.values();
    for (std::size_t b = 0; b < B; ++b) builder.push(static_cast<std::uint32_t>(b * q + v[b].index), signs[b]);
    builder.end_column();
  } while (it.next());
  MatrixMeta meta{d.family, d.params, d.field.descriptor(), "balanced", static_cast<std::uint32_t>(B)};
  return std::move(builder).finish(std::move(meta));
}

inline MeasurementMatrix balanced_matrix(const EvaluationDesign& d) { return balanced_matrix(d, balanced_scheme(d)); }

/// Sum of each row over all columns.
inline std::vector<std::int64_t> row_sums(const MeasurementMatrix& m) {
  std::vector<std::int64_t> s(m.rows(), 0);
  for (std::uint32_t j = 0; j < m.cols(); ++j)
    for (const auto& e : m.column(j)) s[e.row] += e.value;
  return s;
}

struct StrongCoherenceCertificate {
  // sufficient conditions on the design
  bool cond_a = false;  // N(D) > sqrt(|B|) / (p sqrt(q))
  bool cond_b = false;  // T <= |B| / (160 log q)
  std::optional<bool> devore_condition;  // r (r - 1) <= q / (160 log q), DeVore designs only
  // the matrix itself
  Surd mu;
  AverageCoherence omega_signed;
  StrongCoherenceVerdict ground_truth;
  LogBase log_base = LogBase::Natural;

  bool sufficient() const { return cond_a && cond_b; }
};

namespace detail {

inline void fill_sufficient_conditions(StrongCoherenceCertificate& c, const EvaluationDesign& d, LogBase base) {
  const long double q = d.field.q(), B = static_cast<long double>(d.point_count());
  // N(D)^2 p^2 q > |B|, exact in integers
  const __int128 lhs = static_cast<__int128>(d.bound_on_zeros) * d.bound_on_zeros * d.field.p() * d.field.p() *
                       d.field.q();
  c.cond_a = lhs > static_cast<__int128>(d.point_count());
  const long double logq = log_in_base(static_cast<double>(q), base);
  c.cond_b = static_cast<long double>(d.dimension()) * 160.0L * logq <= B;
  if (d.family == "devore") {
    const long double r = static_cast<long double>(d.dimension());
    c.devore_condition = r * (r - 1) * 160.0L * logq <= q;
  }
  c.log_base = base;
}

}  // namespace detail

/// Certificate for a materialized balanced matrix built from `d`.
inline StrongCoherenceCertificate certify_strong_coherence(const MeasurementMatrix& m, const EvaluationDesign& d,
                                                           LogBase base = LogBase::Natural,
                                                           const MetricOptions& opts = {}) {
  StrongCoherenceCertificate c;
  detail::fill_sufficient_conditions(c, d, base);
  const auto g = gram_summary(m, opts);
  c.mu = g.mu;
  c.omega_signed = g.omega_signed;
  c.ground_truth = strong_coherence_verdict(g.mu, g.omega_signed, m.rows(), m.cols(), base, OmegaMode::Signed);
  return c;
}

/// Certificate computed without materializing the balanced matrix. Under the
/// balanced signs two columns agreeing on a set of points have inner product
/// +-(size of that set), so mu comes from the zero-count scan; the signed
/// average coherence comes from one pass against the row-sum vector.
inline StrongCoherenceCertificate certify_balanced_design(const EvaluationDesign& d, LogBase base = LogBase::Natural,
                                                          unsigned workers = worker_count()) {
  d.validate();
  const auto scheme = balanced_scheme(d);
  StrongCoherenceCertificate c;
  detail::fill_sufficient_conditions(c, d, base);
  const std::uint32_t q = d.field.q();
  const std::size_t B = d.point_count(), T = d.dimension();
  const std::uint64_t N = checked_pow(q, T, kStreamedColumnCap);
  require(N >= 2, ErrorKind::SingleColumn, "design has a single column");

  const auto zmax = max_zero_count(d, 10'000'000, workers);
  c.mu = Surd::from_rational(Rational(static_cast<std::int64_t>(zmax.zeros), static_cast<std::int64_t>(B)));

  // Pass 1: row sums. Pass 2: per-column |<phi_i, S> - |B||. Both split by
  // the leading coefficient so workers stream disjoint column ranges.
  const std::uint64_t per_lead = N / q;
  auto stream = [&](std::uint32_t lead, auto&& visit) {
    std::vector<FieldElement> start(T, FieldSpec::zero());
    start[0] = {lead};
    FunctionEnumerator it(d, std::move(start), 1);
    std::vector<std::int32_t> signs(B);
    std::uint64_t count = 0;
    do {
      balanced_column_signs(d, scheme, it.coeffs(), signs);
      visit(it.values(), signs);
      ++count;
    } while (it.next());
    return count;
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, q));
  std::vector<std::vector<std::int64_t>> partial(w, std::vector<std::int64_t>(q * B, 0));
  parallel_chunks(q, w, [&](unsigned worker, std::size_t begin, std::size_t end) {
    auto& s = partial[worker];
    for (std::size_t lead = begin; lead < end; ++lead) {
      const auto count = stream(static_cast<std::uint32_t>(lead), [&](const auto& values, const auto& signs) {
        for (std::size_t b = 0; b < B; ++b) s[b * q + values[b].index] += signs[b];
      });
      require(count == per_lead, ErrorKind::InvalidArgument, "column stream length mismatch");
    }
  });
  std::vector<std::int64_t> sums(q * B, 0);
  for (const auto& s : partial)
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += s[i];
  std::vector<std::int64_t> best(w, 0);
  parallel_chunks(q, w, [&](unsigned worker, std::size_t begin, std::size_t end) {
    for (std::size_t lead = begin; lead < end; ++lead) {
      stream(static_cast<std::uint32_t>(lead), [&](const auto& values, const auto& signs) {
        std::int64_t dot = 0;
        for (std::size_t b = 0; b < B; ++b) dot += signs[b] * sums[b * q + values[b].index];
        dot -= static_cast<std::int64_t>(B);
        best[worker] = std::max(best[worker], dot < 0 ? -dot : dot);
      });
    }
  });
  const std::int64_t top = *std::max_element(best.begin(), best.end());
  const Rational omega(top, static_cast<std::int64_t>(B) * static_cast<std::int64_t>(N - 1));
  c.omega_signed = {omega, omega.to_double()};
  c.ground_truth = strong_coherence_verdict(c.mu, c.omega_signed, q * B, N, base, OmegaMode::Signed);
  return c;
}

inline Json to_json(const StrongCoherenceCertificate& c) {
  Json j;
  j["sufficient"] = {{"cond_a", c.cond_a}, {"cond_b", c.cond_b}, {"holds", c.sufficient()}};
  j["devore_condition"] = c.devore_condition ? Json(*c.devore_condition) : Json(nullptr);
  j["mu"] = surd_json(c.mu);
  j["omega_signed"] = average_json(c.omega_signed);
  j["ground_truth"] = {{"cond1", c.ground_truth.cond1},
                       {"cond2", c.ground_truth.cond2},
                       {"holds", c.ground_truth.holds()},
                       {"log_base", to_string(c.log_base)},
                       {"omega_mode", "signed"}};
  return j;
}

}  // namespace agrip
