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

// Point sets and monomial bases shared by the matrix families.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "agrip/error.hpp"
#include "agrip/finite_field.hpp"

namespace agrip {

using Point = std::vector<FieldElement>;

/// q^e with overflow reported as CapExceeded.
inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t e, std::uint64_t cap = UINT64_MAX) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < e; ++i) {
    require(base == 0 || r <= cap / base, ErrorKind::CapExceeded,
            std::to_string(base) + "^" + std::to_string(e) + " exceeds cap " + std::to_string(cap));
    r *= base;
  }
  return r;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Visits the normalized representatives of P^m(F_q) (first nonzero
/// coordinate equal to 1), in increasing lexicographic order of the tuple.
inline void for_each_projective_point(const FieldSpec& f, unsigned m, const std::function<void(const Point&)>& fn) {
  const std::uint32_t q = f.q();
  Point pt(m + 1);
  for (unsigned lead = m + 1; lead-- > 0;) {
    for (unsigned i = 0; i <= m; ++i) pt[i] = FieldSpec::zero();
    pt[lead] = FieldSpec::one();
    // odometer over coordinates lead+1..m
    while (true) {
      fn(pt);
      unsigned pos = m;
      while (pos > lead && pt[pos].index == q - 1) {
        pt[pos] = FieldSpec::zero();
        --pos;
      }
      if (pos == lead) break;
      pt[pos].index += 1;
    }
  }
}

inline std::vector<Point> projective_points(const FieldSpec& f, unsigned m) {
  std::vector<Point> out;
  for_each_projective_point(f, m, [&](const Point& p) { out.push_back(p); });
  return out;
}

/// All points of F_q^n, first coordinate most significant.
inline std::vector<Point> affine_points(const FieldSpec& f, unsigned n) {
  const std::uint64_t count = checked_pow(f.q(), n, 1u << 20);
  std::vector<Point> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Point p(n);
    std::uint64_t v = k;
    for (unsigned i = n; i-- > 0;) {
      p[i] = {static_cast<std::uint32_t>(v % f.q())};
      v /= f.q();
    }
    out.push_back(std::move(p));
  }
  return out;
}

using Exponent = std::vector<unsigned>;

/// Exponent vectors of the monomials of total degree exactly `degree` in
/// `vars` variables, lexicographically descending (x0^d first).
inline std::vector<Exponent> monomials_of_degree(unsigned vars, unsigned degree) {
  std::vector<Exponent> out;
  Exponent e(vars, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned var, unsigned left) {
    if (var + 1 == vars) {
      e[var] = left;
      out.push_back(e);
      return;
    }
    for (unsigned k = left + 1; k-- > 0;) {
      e[var] = k;
      rec(var + 1, left - k);
    }
  };
  if (vars == 0) return out;
  rec(0, degree);
  return out;
}

/// Monomials of total degree <= `degree`, ordered by degree then as above.
inline std::vector<Exponent> monomials_up_to(unsigned vars, unsigned degree) {
  std::vector<Exponent> out;
  for (unsigned d = 0; d <= degree; ++d) {
    auto m = monomials_of_degree(vars, d);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

inline FieldElement eval_monomial(const FieldSpec& f, const Exponent& e, std::span<const FieldElement> pt) {
  FieldElement v = FieldSpec::one();
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i]) v = f.mul(v, f.pow(pt[i], e[i]));
  return v;
}

/// Integer points of a convex lattice polygon given by its vertices in
/// counter-clockwise order, sorted by (x, y).
inline std::vector<std::array<int, 2>> lattice_points(std::span<const std::array<int, 2>> vertices) {
  require(vertices.size() >= 3, ErrorKind::InvalidArgument, "polygon needs three vertices");
  int xmin = vertices[0][0], xmax = xmin, ymin = vertices[0][1], ymax = ymin;
  for (const auto& v : vertices) {
    xmin = std::min(xmin, v[0]);
    xmax = std::max(xmax, v[0]);
    ymin = std::min(ymin, v[1]);
    ymax = std::max(ymax, v[1]);
  }
  std::vector<std::array<int, 2>> out;
  for (int x = xmin; x <= xmax; ++x) {
    for (int y = ymin; y <= ymax; ++y) {
      bool inside = true;
      for (std::size_t i = 0; i < vertices.size() && inside; ++i) {
        const auto& a = vertices[i];
        const auto& b = vertices[(i + 1) % vertices.size()];
        const long cross = static_cast<long>(b[0] - a[0]) * (y - a[1]) - static_cast<long>(b[1] - a[1]) * (x - a[0]);
        inside = cross >= 0;
      }
      if (inside) out.push_back({x, y});
    }
  }
  return out;
}

}  // namespace agrip
