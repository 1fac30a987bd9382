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

// Matrix families built from function spaces over F_q: DeVore graph
// matrices, Construction A on the projective line, and evaluation matrices
// over projective-space, ruled-surface and toric designs.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agrip/design.hpp"
#include "agrip/error.hpp"
#include "agrip/finite_field.hpp"
#include "agrip/geometry.hpp"
#include "agrip/matrix_core.hpp"

namespace agrip {

inline constexpr std::uint64_t kMaterializedColumnCap = 1u << 16;
inline constexpr std::uint64_t kStreamedColumnCap = 1u << 24;

/// A point of P^1(F_q): a field element, or infinity.
struct P1Point {
  std::optional<FieldElement> value;  // empty = infinity

  static P1Point infinity() { return {}; }
  static P1Point finite(std::uint32_t index) { return {FieldElement{index}}; }
  bool is_infinity() const { return !value.has_value(); }
  std::string str() const { return value ? std::to_string(value->index) : std::string("inf"); }
  friend bool operator==(const P1Point&, const P1Point&) = default;
};

/// Parses "inf" or an element index.
inline P1Point parse_p1_point(const std::string& text) {
  if (text == "inf" || text == "oo") return P1Point::infinity();
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(text, &used);
    require(used == text.size(), ErrorKind::ParseError, "bad point '" + text + "'");
    return P1Point::finite(static_cast<std::uint32_t>(v));
  } catch (const std::logic_error&) {
    fail(ErrorKind::ParseError, "bad point '" + text + "'");
  }
}

namespace detail {

inline void check_materializable(std::uint64_t columns) {
  require(columns <= kMaterializedColumnCap, ErrorKind::CapExceeded,
          std::to_string(columns) + " columns exceed the materialization cap " +
              std::to_string(kMaterializedColumnCap));
}

inline Json points_json(const std::vector<P1Point>& pts) {
  Json j = Json::array();
  for (const auto& p : pts) {
    if (p.is_infinity()) j.push_back("inf");
    else j.push_back(p.value->index);
  }
  return j;
}

}  // namespace detail

/// Materializes every column of an evaluation design. Rows are indexed
/// point-major: row = point_index * q + value_index.
inline MeasurementMatrix evaluation_matrix(const EvaluationDesign& d) {
  try {
    d.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::RankDeficient)
      fail(ErrorKind::DuplicateColumns, "two coefficient vectors agree on every point of B");
    throw;
  }
  const std::uint64_t N = d.column_count();
  detail::check_materializable(N);
  const std::uint32_t q = d.field.q();
  const std::size_t B = d.point_count();
  ColumnBuilder builder(static_cast<std::uint32_t>(q * B));
  builder.reserve(N, N * B);
  FunctionEnumerator it(d, std::vector<FieldElement>(d.dimension(), FieldSpec::zero()));
  do {
    const auto& v = it.values();
    for (std::size_t b = 0; b < B; ++b) builder.push(static_cast<std::uint32_t>(b * q + v[b].index), 1);
    builder.end_column();
  } while (it.next());
  MatrixMeta meta{d.family, d.params, d.field.descriptor(), "ones", static_cast<std::uint32_t>(B)};
  return std::move(builder).finish(std::move(meta));
}

/// Polynomials of degree < r on the affine line, evaluated at every point.
inline EvaluationDesign devore_design(const FieldSpec& f, unsigned r) {
  require(r >= 2 && r <= f.q(), ErrorKind::InvalidArgument,
          "DeVore needs 2 <= r <= q, got r = " + std::to_string(r));
  require(r <= kBasisCap, ErrorKind::CapExceeded, "r exceeds the basis cap");
  EvaluationDesign d;
  d.field = f;
  d.family = "devore";
  d.params = {{"r", r}};
  d.points = affine_points(f, 1);
  for (unsigned i = 0; i < r; ++i) {
    d.basis_names.push_back(i == 0 ? "1" : i == 1 ? "x" : "x^" + std::to_string(i));
    std::vector<FieldElement> row;
    for (const auto& p : d.points) row.push_back(f.pow(p[0], i));
    d.table.push_back(std::move(row));
  }
  d.bound_on_zeros = r - 1;
  return d;
}

/// n = q^2 rows (point a, value b), one column per polynomial of degree < r,
/// entry 1 iff f(a) = b.
inline MeasurementMatrix devore(const FieldSpec& f, unsigned r) {
  return evaluation_matrix(devore_design(f, r));
}

/// All monomials of degree <= r on F_q^n.
inline EvaluationDesign projective_space_design(const FieldSpec& f, unsigned n, unsigned r) {
  require(n >= 1, ErrorKind::InvalidArgument, "dimension must be at least 1");
  require(r >= 1 && r < f.q(), ErrorKind::InvalidArgument,
          "projective-space design needs 1 <= r < q, got r = " + std::to_string(r));
  require(binomial(n + r, r) <= kBasisCap, ErrorKind::CapExceeded,
          "C(n+r, r) = " + std::to_string(binomial(n + r, r)) + " exceeds the basis cap");
  EvaluationDesign d;
  d.field = f;
  d.family = "projspace";
  d.params = {{"n", n}, {"r", r}};
  d.points = affine_points(f, n);
  for (const auto& e : monomials_up_to(n, r)) {
    std::string name;
    for (unsigned i = 0; i < n; ++i) {
      if (!e[i]) continue;
      if (!name.empty()) name += "*";
      name += "x" + std::to_string(i);
      if (e[i] > 1) name += "^" + std::to_string(e[i]);
    }
    d.basis_names.push_back(name.empty() ? "1" : name);
    std::vector<FieldElement> row;
    for (const auto& p : d.points) row.push_back(eval_monomial(f, e, p));
    d.table.push_back(std::move(row));
  }
  const std::uint64_t q = f.q();
  std::uint64_t bound = r * checked_pow(q, n - 1);
  for (unsigned i = 0; i + 2 <= n; ++i) bound += checked_pow(q, i);
  d.bound_on_zeros = bound;
  return d;
}

/// Bidegree (d1, d2) monomials x^i y^j on the affine chart F_q x F_q.
inline EvaluationDesign ruled_surface_design(const FieldSpec& f, unsigned d1, unsigned d2) {
  require(d1 + d2 < f.q() + 1, ErrorKind::DegreeTooLarge,
          "ruled surface needs d1 + d2 < q + 1, got " + std::to_string(d1 + d2));
  require((d1 + 1) * (d2 + 1) <= kBasisCap, ErrorKind::CapExceeded, "bidegree basis exceeds the cap");
  EvaluationDesign d;
  d.field = f;
  d.family = "ruled";
  d.params = {{"d1", d1}, {"d2", d2}};
  d.points = affine_points(f, 2);
  for (unsigned i = 0; i <= d1; ++i) {
    for (unsigned j = 0; j <= d2; ++j) {
      d.basis_names.push_back("x^" + std::to_string(i) + "*y^" + std::to_string(j));
      std::vector<FieldElement> row;
      for (const auto& p : d.points) row.push_back(f.mul(f.pow(p[0], i), f.pow(p[1], j)));
      d.table.push_back(std::move(row));
    }
  }
  const std::uint64_t q = f.q();
  d.bound_on_zeros = (d1 + d2) * (q + 1) - static_cast<std::uint64_t>(d1) * d2;
  return d;
}

struct ToricParams {
  int which = 1;  // 1, 2 or 3
  unsigned d = 1;
  unsigned e = 0;
  unsigned r = 0;
};

/// Vertices of the polygon for a toric case, counter-clockwise.
inline std::vector<std::array<int, 2>> toric_polygon(const ToricParams& t) {
  const int d = static_cast<int>(t.d), e = static_cast<int>(t.e), r = static_cast<int>(t.r);
  switch (t.which) {
    case 1: return {{0, 0}, {d, 0}, {0, d}};
    case 2: return {{0, 0}, {d, 0}, {d, e + r * d}, {0, e}};
    case 3: return {{0, 0}, {d, 0}, {0, 2 * d}};
    default: fail(ErrorKind::InvalidArgument, "toric case must be 1, 2 or 3");
  }
}

/// Closed-form basis size per case.
inline std::uint64_t toric_dimension(const ToricParams& t) {
  const std::uint64_t d = t.d, e = t.e, r = t.r;
  switch (t.which) {
    case 1: return (d + 1) * (d + 2) / 2;
    case 2: return (d + 1) * (e + 1) + r * d * (d + 1) / 2;
    case 3: return d * d + 2 * d + 1;
    default: fail(ErrorKind::InvalidArgument, "toric case must be 1, 2 or 3");
  }
}

/// The published zero-count bounds. Case 2 is stated as the smaller of two
/// expressions; `toric_zero_bound_max` gives the larger one.
inline std::uint64_t toric_zero_bound(const ToricParams& t, std::uint64_t q) {
  const std::uint64_t d = t.d, e = t.e, r = t.r;
  switch (t.which) {
    case 1: return d * (q - 1);
    case 2: return std::min((d + e) * (q - 1) - d * e, (e + r * d) * (q - 1));
    case 3: return 2 * d * (q - 1);
    default: fail(ErrorKind::InvalidArgument, "toric case must be 1, 2 or 3");
  }
}

inline std::uint64_t toric_zero_bound_max(const ToricParams& t, std::uint64_t q) {
  if (t.which != 2) return toric_zero_bound(t, q);
  const std::uint64_t d = t.d, e = t.e, r = t.r;
  return std::max((d + e) * (q - 1) - d * e, (e + r * d) * (q - 1));
}

/// Characters theta^(m1 i + m2 j) for lattice points m of the case polygon,
/// evaluated on the torus points (theta^i, theta^j), i-major.
inline EvaluationDesign toric_design(const FieldSpec& f, const ToricParams& t) {
  const std::uint64_t q = f.q();
  require(t.d >= 1, ErrorKind::InvalidArgument, "toric design needs d >= 1");
  switch (t.which) {
    case 1: require(t.d < q - 1, ErrorKind::PolytopeTooLarge, "case 1 needs d < q - 1"); break;
    case 2:
      require(t.d < q - 1 && t.e < q - 1 && t.e + static_cast<std::uint64_t>(t.r) * t.d < q - 1,
              ErrorKind::PolytopeTooLarge, "case 2 needs d, e, e + r d < q - 1");
      break;
    case 3: require(2 * t.d < q - 1, ErrorKind::PolytopeTooLarge, "case 3 needs 2d < q - 1"); break;
    default: fail(ErrorKind::InvalidArgument, "toric case must be 1, 2 or 3");
  }
  const auto poly = toric_polygon(t);
  const auto lattice = lattice_points(poly);
  require(lattice.size() <= kBasisCap, ErrorKind::CapExceeded,
          "polygon has " + std::to_string(lattice.size()) + " lattice points, above the basis cap");
  EvaluationDesign d;
  d.field = f;
  d.family = "toric";
  d.params = {{"case", t.which}, {"d", t.d}};
  if (t.which == 2) {
    d.params["e"] = t.e;
    d.params["r"] = t.r;
  }
  const std::int64_t order = static_cast<std::int64_t>(q - 1);
  for (std::int64_t i = 0; i < order; ++i)
    for (std::int64_t j = 0; j < order; ++j) d.points.push_back({f.exp(i), f.exp(j)});
  for (const auto& m : lattice) {
    d.basis_names.push_back("e(" + std::to_string(m[0]) + "," + std::to_string(m[1]) + ")");
    std::vector<FieldElement> row;
    row.reserve(d.points.size());
    for (std::int64_t i = 0; i < order; ++i)
      for (std::int64_t j = 0; j < order; ++j) row.push_back(f.exp(m[0] * i + m[1] * j));
    d.table.push_back(std::move(row));
  }
  d.bound_on_zeros = toric_zero_bound(t, q);
  return d;
}

/// Construction A with simple poles at `poles` on P^1, evaluated on `eval_points`.
/// Basis: 1, then 1/(x - g) per finite pole g (x for a pole at infinity).
/// Rows: point_index * (q + 1) + value, value q standing for the pole row @,
/// with the poles listed before the evaluation points.
inline MeasurementMatrix construction_a_simple_poles(const FieldSpec& f, const std::vector<P1Point>& poles,
                                                     const std::vector<P1Point>& eval_points) {
  const std::uint32_t q = f.q();
  const std::size_t t = poles.size();
  require(t >= 1, ErrorKind::InvalidArgument, "need at least one pole");
  require(!eval_points.empty(), ErrorKind::InvalidArgument, "need at least one evaluation point");
  require(t + 1 <= q, ErrorKind::InvalidArgument, "need t + 1 <= q");
  std::vector<P1Point> all = poles;
  all.insert(all.end(), eval_points.begin(), eval_points.end());
  for (const auto& p : all)
    require(p.is_infinity() || p.value->index < q, ErrorKind::InvalidArgument, "point outside the field");
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (!(all[i] == all[j])) continue;
      if (i < t && j >= t)
        fail(ErrorKind::PoleEvalOverlap, "point " + all[i].str() + " is both a pole and an evaluation point");
      fail(ErrorKind::InvalidArgument, "repeated point " + all[i].str());
    }
  }
  const std::size_t T = t + 1;
  const std::uint64_t N = checked_pow(q, T);
  detail::check_materializable(N);

  // basis values at each evaluation point
  std::vector<std::vector<FieldElement>> value(T, std::vector<FieldElement>(eval_points.size()));
  for (std::size_t b = 0; b < eval_points.size(); ++b) {
    const P1Point& x = eval_points[b];
    value[0][b] = FieldSpec::one();
    for (std::size_t i = 0; i < t; ++i) {
      FieldElement v;
      if (poles[i].is_infinity()) v = *x.value;           // x itself; x is finite here
      else if (x.is_infinity()) v = FieldSpec::zero();    // 1/(x - g) vanishes at infinity
      else v = f.inv(f.sub(*x.value, *poles[i].value));
      value[i + 1][b] = v;
    }
  }

  const std::uint32_t stride = q + 1;
  ColumnBuilder builder(static_cast<std::uint32_t>(stride * all.size()));
  for (std::uint64_t k = 0; k < N; ++k) {
    const auto a = coefficients_of(k, q, T);
    for (std::size_t i = 0; i < t; ++i)
      if (a[i + 1].index != 0) builder.push(static_cast<std::uint32_t>(i * stride + q), -1);
    for (std::size_t b = 0; b < eval_points.size(); ++b) {
      FieldElement v = FieldSpec::zero();
      for (std::size_t i = 0; i < T; ++i) v = f.add(v, f.mul(a[i], value[i][b]));
      builder.push(static_cast<std::uint32_t>((t + b) * stride + v.index), 1);
    }
    builder.end_column();
  }
  MatrixMeta meta{"consta-poles",
                  {{"poles", detail::points_json(poles)}, {"points", detail::points_json(eval_points)}},
                  f.descriptor(),
                  "ones",
                  std::nullopt};
  return std::move(builder).finish(std::move(meta));
}

/// Construction A with G = t * infinity: polynomials of degree <= t on the
/// points [infinity] + P. The infinity row @ carries -deg f.
inline MeasurementMatrix construction_a_single_point(const FieldSpec& f, unsigned t,
                                                     const std::vector<FieldElement>& eval_points) {
  const std::uint32_t q = f.q();
  require(t >= 1 && t < q, ErrorKind::InvalidArgument, "need 1 <= t < q");
  require(!eval_points.empty(), ErrorKind::InvalidArgument, "need at least one evaluation point");
  auto sorted = eval_points;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::InvalidArgument,
          "repeated evaluation point");
  for (auto p : eval_points) require(p.index < q, ErrorKind::InvalidArgument, "point outside the field");
  const std::size_t T = t + 1;
  const std::uint64_t N = checked_pow(q, T);
  detail::check_materializable(N);

  const std::uint32_t stride = q + 1;
  ColumnBuilder builder(static_cast<std::uint32_t>(stride * (1 + eval_points.size())));
  for (std::uint64_t k = 0; k < N; ++k) {
    const auto a = coefficients_of(k, q, T);  // a[i] multiplies x^i
    unsigned degree = 0;
    for (unsigned i = 0; i < T; ++i)
      if (a[i].index != 0) degree = i;
    if (degree >= 1) builder.push(q, -static_cast<std::int32_t>(degree));
    for (std::size_t b = 0; b < eval_points.size(); ++b) {
      FieldElement v = FieldSpec::zero();
      for (std::size_t i = T; i-- > 0;) v = f.add(f.mul(v, eval_points[b]), a[i]);
      builder.push(static_cast<std::uint32_t>((1 + b) * stride + v.index), 1);
    }
    builder.end_column();
  }
  Json pts = Json::array();
  for (auto p : eval_points) pts.push_back(p.index);
  MatrixMeta meta{"consta-point", {{"t", t}, {"points", pts}}, f.descriptor(), "ones", std::nullopt};
  return std::move(builder).finish(std::move(meta));
}

}  // namespace agrip
