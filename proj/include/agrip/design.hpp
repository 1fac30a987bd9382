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

// Evaluation designs: a basis f_1..f_T of a function space together with the
// point set B it is evaluated on. Column k of every matrix built from a
// design is the function sum a_i f_i whose coefficient vector (a_1..a_T),
// read as a base-q numeral with a_1 most significant, equals k.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agrip/error.hpp"
#include "agrip/finite_field.hpp"
#include "agrip/geometry.hpp"
#include "agrip/matrix_core.hpp"
#include "agrip/parallel.hpp"

namespace agrip {

inline constexpr std::size_t kBasisCap = 24;

struct EvaluationDesign {
  FieldSpec field = FieldSpec::make(2, 1);
  std::string family;
  Json params = Json::object();
  std::vector<Point> points;
  std::vector<std::string> basis_names;
  std::vector<std::vector<FieldElement>> table;  // table[i][b] = f_i(points[b])
  std::uint64_t bound_on_zeros = 0;              // the family's claimed max zero count

  std::size_t dimension() const { return table.size(); }
  std::size_t point_count() const { return points.size(); }
  std::uint64_t column_count() const { return checked_pow(field.q(), dimension()); }
  std::uint64_t row_count() const { return static_cast<std::uint64_t>(field.q()) * point_count(); }

  void validate() const;
};

/// Rank over F_q of a list of equal-length vectors (Gaussian elimination).
inline std::size_t rank_over_field(const FieldSpec& f, std::vector<std::vector<FieldElement>> rows) {
  if (rows.empty()) return 0;
  const std::size_t width = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < width && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col].index == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    const FieldElement inv = f.inv(rows[rank][col]);
    for (auto& v : rows[rank]) v = f.mul(v, inv);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col].index == 0) continue;
      const FieldElement factor = rows[r][col];
      for (std::size_t c = col; c < width; ++c) rows[r][c] = f.sub(rows[r][c], f.mul(factor, rows[rank][c]));
    }
    ++rank;
  }
  return rank;
}

inline void EvaluationDesign::validate() const {
  require(dimension() >= 1 && dimension() <= kBasisCap, ErrorKind::CapExceeded,
          "basis size " + std::to_string(dimension()) + " outside [1, " + std::to_string(kBasisCap) + "]");
  require(basis_names.size() == dimension(), ErrorKind::InvalidArgument, "basis names do not match table");
  require(!points.empty(), ErrorKind::InvalidArgument, "empty point set");
  for (const auto& row : table) {
    require(row.size() == points.size(), ErrorKind::InvalidArgument, "table row length differs from |B|");
    for (auto v : row) require(v.index < field.q(), ErrorKind::InvalidArgument, "table entry outside field");
  }
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::InvalidArgument,
          "point set contains a repeated point");
  require(bound_on_zeros < points.size(), ErrorKind::InvalidArgument,
          "zero-count bound " + std::to_string(bound_on_zeros) + " is not below |B| = " + std::to_string(points.size()));
  require(rank_over_field(field, table) == dimension(), ErrorKind::RankDeficient,
          "basis functions are linearly dependent on the point set");
}

inline std::vector<FieldElement> coefficients_of(std::uint64_t column, std::uint32_t q, std::size_t dimension) {
  std::vector<FieldElement> c(dimension);
  for (std::size_t i = dimension; i-- > 0;) {
    c[i] = {static_cast<std::uint32_t>(column % q)};
    column /= q;
  }
  return c;
}

inline std::uint64_t column_index(std::span<const FieldElement> coeffs, std::uint32_t q) {
  std::uint64_t k = 0;
  for (auto c : coeffs) k = k * q + c.index;
  return k;
}

/// Values of sum a_i f_i at every point of the design.
inline std::vector<FieldElement> evaluate(const EvaluationDesign& d, std::span<const FieldElement> coeffs) {
  const FieldSpec& f = d.field;
  std::vector<FieldElement> out(d.point_count(), FieldSpec::zero());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].index == 0) continue;
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = f.add(out[b], f.mul(coeffs[i], d.table[i][b]));
  }
  return out;
}

/// Walks coefficient vectors in column order, keeping the evaluated values
/// up to date incrementally. Positions before `first_free` stay fixed, which
/// is how scalar-class representatives are enumerated.
class FunctionEnumerator {
 public:
  FunctionEnumerator(const EvaluationDesign& d, std::vector<FieldElement> start, std::size_t first_free = 0)
      : d_(d), coeffs_(std::move(start)), first_free_(first_free) {
    values_ = evaluate(d_, coeffs_);
  }

  const std::vector<FieldElement>& coeffs() const { return coeffs_; }
  const std::vector<FieldElement>& values() const { return values_; }

  /// Advances to the next vector; false once the free positions wrap.
  bool next() {
    const std::uint32_t q = d_.field.q();
    std::size_t pos = coeffs_.size();
    while (pos-- > first_free_) {
      const FieldElement old = coeffs_[pos];
      const FieldElement now{old.index + 1 == q ? 0 : old.index + 1};
      shift(pos, d_.field.sub(now, old));
      coeffs_[pos] = now;
      if (now.index != 0) return true;
    }
    return false;
  }

 private:
  void shift(std::size_t pos, FieldElement delta) {
    const FieldSpec& f = d_.field;
    const auto& row = d_.table[pos];
    for (std::size_t b = 0; b < values_.size(); ++b) values_[b] = f.add(values_[b], f.mul(delta, row[b]));
  }

  const EvaluationDesign& d_;
  std::vector<FieldElement> coeffs_;
  std::vector<FieldElement> values_;
  std::size_t first_free_;
};

/// Calls fn(coeffs, values) once per scalar class of nonzero functions, using
/// the representative whose first nonzero coefficient is 1.
template <class Fn>
void for_each_scalar_class(const EvaluationDesign& d, Fn&& fn) {
  const std::size_t T = d.dimension();
  for (std::size_t lead = 0; lead < T; ++lead) {
    std::vector<FieldElement> start(T, FieldSpec::zero());
    start[lead] = FieldSpec::one();
    FunctionEnumerator it(d, std::move(start), lead + 1);
    do {
      fn(it.coeffs(), it.values());
    } while (it.next());
  }
}

struct ZeroCountMaximum {
  std::uint64_t zeros = 0;
  std::vector<FieldElement> witness;  // a function attaining it
};

/// Largest number of points of B on which a nonzero function of the design
/// vanishes, scanning one representative per scalar class. Zero sets are
/// scalar invariant, so this equals the largest agreement count between two
/// distinct columns. Throws DuplicateColumns when some function vanishes on
/// all of B.
inline ZeroCountMaximum max_zero_count(const EvaluationDesign& d, std::uint64_t class_cap = 10'000'000,
                                       unsigned workers = worker_count()) {
  const std::size_t T = d.dimension();
  const std::uint32_t q = d.field.q();
  const std::uint64_t columns = checked_pow(q, T);
  require((columns - 1) / (q - 1) <= class_cap, ErrorKind::CapExceeded,
          std::to_string((columns - 1) / (q - 1)) + " scalar classes exceed the cap " + std::to_string(class_cap));
  // tasks: a leading position, and for all but the last lead the value
  // of the next coefficient
  struct Task {
    std::size_t lead;
    std::uint32_t next;
  };
  std::vector<Task> tasks;
  for (std::size_t lead = 0; lead < T; ++lead) {
    if (lead + 1 == T) tasks.push_back({lead, 0});
    else
      for (std::uint32_t v = 0; v < q; ++v) tasks.push_back({lead, v});
  }
  std::vector<ZeroCountMaximum> best(std::min<std::size_t>(std::max(1u, workers), tasks.size()));
  parallel_chunks(tasks.size(), static_cast<unsigned>(best.size()), [&](unsigned w, std::size_t begin, std::size_t end) {
    ZeroCountMaximum& out = best[w];
    bool have = false;
    for (std::size_t t = begin; t < end; ++t) {
      std::vector<FieldElement> start(T, FieldSpec::zero());
      start[tasks[t].lead] = FieldSpec::one();
      std::size_t first_free = tasks[t].lead + 1;
      if (first_free < T) start[first_free++] = {tasks[t].next};
      FunctionEnumerator it(d, std::move(start), first_free);
      do {
        std::uint64_t zeros = 0;
        for (auto v : it.values()) zeros += v.index == 0;
        if (!have || zeros > out.zeros) {
          out.zeros = zeros;
          out.witness = it.coeffs();
          have = true;
        }
      } while (it.next());
    }
  });
  ZeroCountMaximum total = best.front();
  for (const auto& b : best)
    if (b.zeros > total.zeros) total = b;
  require(total.zeros < d.point_count(), ErrorKind::DuplicateColumns,
          "a nonzero function vanishes on every point of B");
  return total;
}

inline Json point_json(const Point& p) {
  Json j = Json::array();
  for (auto c : p) j.push_back(c.index);
  return j;
}

inline Json design_to_json(const EvaluationDesign& d) {
  Json j;
  j["family"] = d.family;
  j["params"] = d.params;
  j["field"] = d.field.descriptor();
  Json pts = Json::array();
  for (const auto& p : d.points) pts.push_back(point_json(p));
  j["points"] = std::move(pts);
  j["basis_names"] = d.basis_names;
  Json table = Json::array();
  for (const auto& row : d.table) {
    Json r = Json::array();
    for (auto v : row) r.push_back(v.index);
    table.push_back(std::move(r));
  }
  j["table"] = std::move(table);
  j["bound_on_zeros"] = d.bound_on_zeros;
  return j;
}

/// Strict reader for the design sidecar; the result is validated.
inline EvaluationDesign design_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::ParseError, "design must be a JSON object");
  EvaluationDesign d;
  bool have_field = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "family") d.family = value.get<std::string>();
      else if (key == "params") d.params = value;
      else if (key == "field") {
        d.field = FieldSpec::parse(value.get<std::string>());
        have_field = true;
      } else if (key == "points") {
        for (const auto& p : value) {
          Point pt;
          for (const auto& c : p) pt.push_back({c.get<std::uint32_t>()});
          d.points.push_back(std::move(pt));
        }
      } else if (key == "basis_names") d.basis_names = value.get<std::vector<std::string>>();
      else if (key == "table") {
        for (const auto& r : value) {
          std::vector<FieldElement> row;
          for (const auto& c : r) row.push_back({c.get<std::uint32_t>()});
          d.table.push_back(std::move(row));
        }
      } else if (key == "bound_on_zeros") d.bound_on_zeros = value.get<std::uint64_t>();
      else fail(ErrorKind::ParseError, "unknown design key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("design JSON: ") + e.what());
  }
  require(have_field, ErrorKind::ParseError, "design JSON lacks 'field'");
  d.validate();
  return d;
}

}  // namespace agrip
