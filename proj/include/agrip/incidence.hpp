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

// Binary incidence matrices: smooth plane curves of degree 2 or 3 against the
// points of P^2(F_q), and hyperplanes of P^3(F_{q^2}) against the points of
// the Fermat surface X0^(q+1) + X1^(q+1) + X2^(q+1) + X3^(q+1) = 0.

#include <cstdint>
#include <string>
#include <vector>

#include "agrip/error.hpp"
#include "agrip/finite_field.hpp"
#include "agrip/geometry.hpp"
#include "agrip/matrix_core.hpp"

namespace agrip {

inline constexpr std::uint64_t kEnumerationCap = 1u << 24;

/// Decides smoothness of degree-r ternary forms with F_q coefficients by
/// looking for a common zero of the form and its partials over P^2(F_{q^k})
/// for each configured k.
class SmoothnessTester {
 public:
  SmoothnessTester(const FieldSpec& f, unsigned degree, std::vector<unsigned> extension_degrees)
      : degree_(degree), monomials_(monomials_of_degree(3, degree)), ks_(std::move(extension_degrees)) {
    require(!ks_.empty(), ErrorKind::InvalidArgument, "no extension degrees given");
    for (unsigned k : ks_) {
      require(k >= 1, ErrorKind::InvalidArgument, "extension degree must be positive");
      checked_pow(f.q(), k, kMaxFieldOrder);
      Level level{f.s() * k == f.s() ? f : make_field(f.p(), f.s() * k), {}, {}, {}};
      level.embed = embedding(f, level.field);
      const std::size_t M = monomials_.size();
      for_each_projective_point(level.field, 2, [&](const Point& pt) {
        for (const auto& e : monomials_) level.value.push_back(eval_monomial(level.field, e, pt));
        for (unsigned v = 0; v < 3; ++v) {
          for (const auto& e : monomials_) {
            if (e[v] == 0) {
              level.partial.push_back(FieldSpec::zero());
              continue;
            }
            Exponent lower = e;
            --lower[v];
            level.partial.push_back(level.field.mul(level.field.from_int(e[v]), eval_monomial(level.field, lower, pt)));
          }
        }
      });
      level.points = level.value.size() / M;
      levels_.push_back(std::move(level));
    }
  }

  const std::vector<Exponent>& monomials() const { return monomials_; }
  const std::vector<unsigned>& extension_degrees() const { return ks_; }

  bool is_smooth(std::span<const FieldElement> coeffs) const {
    const std::size_t M = monomials_.size();
    for (const auto& level : levels_) {
      const FieldSpec& g = level.field;
      FieldElement c[kMaxMonomials];
      for (std::size_t m = 0; m < M; ++m) c[m] = level.embed[coeffs[m].index];
      for (std::size_t pt = 0; pt < level.points; ++pt) {
        const FieldElement* val = &level.value[pt * M];
        FieldElement acc = FieldSpec::zero();
        for (std::size_t m = 0; m < M; ++m)
          if (c[m].index) acc = g.add(acc, g.mul(c[m], val[m]));
        if (acc.index != 0) continue;
        bool singular = true;
        for (unsigned v = 0; v < 3 && singular; ++v) {
          const FieldElement* der = &level.partial[(pt * 3 + v) * M];
          FieldElement d = FieldSpec::zero();
          for (std::size_t m = 0; m < M; ++m)
            if (c[m].index) d = g.add(d, g.mul(c[m], der[m]));
          singular = d.index == 0;
        }
        if (singular) return false;
      }
    }
    return true;
  }

 private:
  static constexpr std::size_t kMaxMonomials = 10;
  struct Level {
    FieldSpec field;
    std::vector<FieldElement> embed;
    std::vector<FieldElement> value;    // [point][monomial]
    std::vector<FieldElement> partial;  // [point][variable][monomial]
    std::size_t points = 0;
  };
  unsigned degree_;
  std::vector<Exponent> monomials_;
  std::vector<unsigned> ks_;
  std::vector<Level> levels_;
};

/// Extension degrees searched by default. A singular conic always has a
/// rational singular point, so F_q suffices; cubics can have their singular
/// points spread over conjugates in F_{q^2} or F_{q^3}.
inline std::vector<unsigned> default_extension_degrees(unsigned degree) {
  return degree == 2 ? std::vector<unsigned>{1} : std::vector<unsigned>{1, 2, 3};
}

struct SmoothCurveCount {
  std::uint64_t classes = 0;  // curves up to scalars
  std::uint64_t tuples = 0;   // nonzero coefficient tuples, classes * (q - 1)
};

namespace detail {

inline void check_plane_curve_args(const FieldSpec& f, unsigned degree) {
  require(degree == 2 || degree == 3, ErrorKind::InvalidArgument, "plane curves are supported for degree 2 or 3");
  const unsigned M = (degree + 1) * (degree + 2) / 2;
  checked_pow(f.q(), M, kEnumerationCap);
}

}  // namespace detail

/// Calls fn(coeffs) for every smooth scalar-class representative, in
/// increasing lexicographic order of the coefficient vector.
template <class Fn>
void for_each_smooth_curve(const FieldSpec& f, unsigned degree, const std::vector<unsigned>& ks, Fn&& fn) {
  detail::check_plane_curve_args(f, degree);
  SmoothnessTester tester(f, degree, ks);
  const unsigned M = static_cast<unsigned>(tester.monomials().size());
  for_each_projective_point(f, M - 1, [&](const Point& c) {
    if (tester.is_smooth(c)) fn(c);
  });
}

inline SmoothCurveCount count_smooth_plane_curves(const FieldSpec& f, unsigned degree,
                                                  const std::vector<unsigned>& ks) {
  SmoothCurveCount out;
  for_each_smooth_curve(f, degree, ks, [&](const Point&) { ++out.classes; });
  out.tuples = out.classes * (f.q() - 1);
  return out;
}

inline SmoothCurveCount count_smooth_plane_curves(const FieldSpec& f, unsigned degree) {
  return count_smooth_plane_curves(f, degree, default_extension_degrees(degree));
}

/// Rows are the points of P^2(F_q); one column per smooth curve class.
inline MeasurementMatrix plane_curve_matrix(const FieldSpec& f, unsigned degree, const std::vector<unsigned>& ks) {
  detail::check_plane_curve_args(f, degree);
  const auto points = projective_points(f, 2);
  const auto monomials = monomials_of_degree(3, degree);
  std::vector<FieldElement> value;  // [point][monomial]
  for (const auto& pt : points)
    for (const auto& e : monomials) value.push_back(eval_monomial(f, e, pt));
  const std::size_t M = monomials.size();
  ColumnBuilder builder(static_cast<std::uint32_t>(points.size()));
  std::uint64_t columns = 0;
  for_each_smooth_curve(f, degree, ks, [&](const Point& c) {
    ++columns;
    require(columns <= kEnumerationCap, ErrorKind::EnumerationCapExceeded, "too many curve columns");
    for (std::size_t pt = 0; pt < points.size(); ++pt) {
      FieldElement acc = FieldSpec::zero();
      for (std::size_t m = 0; m < M; ++m) acc = f.add(acc, f.mul(c[m], value[pt * M + m]));
      if (acc.index == 0) builder.push(static_cast<std::uint32_t>(pt), 1);
    }
    builder.end_column();
  });
  Json ks_json = ks;
  MatrixMeta meta{"planecurve", {{"r", degree}, {"extension_degrees", ks_json}}, f.descriptor(), "ones",
                  std::nullopt};
  return std::move(builder).finish(std::move(meta));
}

inline MeasurementMatrix plane_curve_matrix(const FieldSpec& f, unsigned degree) {
  return plane_curve_matrix(f, degree, default_extension_degrees(degree));
}

/// q with f = F_{q^2}; rejects odd extension degree.
inline std::uint32_t fermat_base(const FieldSpec& f) {
  require(f.s() % 2 == 0, ErrorKind::InvalidArgument, "Fermat surface needs a field F_{q^2}");
  return static_cast<std::uint32_t>(isqrt(f.q()));
}

/// Points of the Fermat surface of degree q + 1 over F_{q^2}, normalized,
/// in increasing lexicographic order. Throws PointCountMismatch when the
/// count differs from (q^3 + 1)(q^2 + 1).
inline std::vector<Point> fermat_surface_points(const FieldSpec& f) {
  const std::uint64_t q = fermat_base(f);
  std::vector<Point> out;
  for_each_projective_point(f, 3, [&](const Point& pt) {
    FieldElement acc = FieldSpec::zero();
    for (auto x : pt) acc = f.add(acc, f.pow(x, q + 1));
    if (acc.index == 0) out.push_back(pt);
  });
  const std::uint64_t expected = (q * q * q + 1) * (q * q + 1);
  require(out.size() == expected, ErrorKind::PointCountMismatch,
          "Fermat surface has " + std::to_string(out.size()) + " points, expected " + std::to_string(expected));
  return out;
}

/// Rows are the surface points, columns all hyperplanes of P^3(F_{q^2}).
inline MeasurementMatrix fermat_hyperplane_matrix(const FieldSpec& f) {
  const auto points = fermat_surface_points(f);
  const auto planes = projective_points(f, 3);
  ColumnBuilder builder(static_cast<std::uint32_t>(points.size()));
  for (const auto& h : planes) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      FieldElement acc = FieldSpec::zero();
      for (unsigned c = 0; c < 4; ++c) acc = f.add(acc, f.mul(h[c], points[i][c]));
      if (acc.index == 0) builder.push(static_cast<std::uint32_t>(i), 1);
    }
    builder.end_column();
  }
  MatrixMeta meta{"fermat", {{"q", fermat_base(f)}}, f.descriptor(), "ones", std::nullopt};
  return std::move(builder).finish(std::move(meta));
}

}  // namespace agrip
