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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "agrip/error.hpp"
#include "agrip/parallel.hpp"
#include "agrip/rational.hpp"

namespace agrip {

using Json = nlohmann::ordered_json;

struct MatrixEntry {
  std::uint32_t row = 0;
  std::int32_t value = 0;

  friend bool operator==(const MatrixEntry&, const MatrixEntry&) = default;
};

/// Where a matrix came from. Not part of the sparse text format; travels in
/// the JSON sidecar.
struct MatrixMeta {
  std::string family;
  Json params = Json::object();
  std::string field;
  std::string sign_scheme = "ones";
  std::optional<std::uint32_t> column_support;  // nonzeros per column, when constant
};

/// Integer matrix stored column-compressed. Immutable once built; every
/// column is nonzero and its rows are strictly increasing.
class MeasurementMatrix {
 public:
  MeasurementMatrix() = default;

  MeasurementMatrix(std::uint32_t rows, std::vector<std::size_t> col_ptr, std::vector<MatrixEntry> entries,
                    MatrixMeta meta = {})
      : rows_(rows), col_ptr_(std::move(col_ptr)), entries_(std::move(entries)), meta_(std::move(meta)) {
    require(!col_ptr_.empty() && col_ptr_.front() == 0 && col_ptr_.back() == entries_.size(),
            ErrorKind::InvalidArgument, "inconsistent column pointers");
    norms_.resize(cols());
    for (std::uint32_t j = 0; j < cols(); ++j) {
      require(col_ptr_[j + 1] > col_ptr_[j], ErrorKind::InvalidArgument,
              "column " + std::to_string(j) + " is zero");
      std::int64_t norm = 0;
      for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
        const auto& e = entries_[k];
        require(e.row < rows_, ErrorKind::InvalidArgument, "row index out of range");
        require(e.value != 0, ErrorKind::InvalidArgument, "explicit zero entry");
        require(k == col_ptr_[j] || entries_[k - 1].row < e.row, ErrorKind::InvalidArgument,
                "rows not strictly increasing in column " + std::to_string(j));
        norm += static_cast<std::int64_t>(e.value) * e.value;
      }
      norms_[j] = norm;
    }
  }

  static MeasurementMatrix from_columns(std::uint32_t rows, const std::vector<std::vector<MatrixEntry>>& columns,
                                        MatrixMeta meta = {}) {
    std::vector<std::size_t> ptr{0};
    std::vector<MatrixEntry> entries;
    for (const auto& c : columns) {
      entries.insert(entries.end(), c.begin(), c.end());
      ptr.push_back(entries.size());
    }
    return MeasurementMatrix(rows, std::move(ptr), std::move(entries), std::move(meta));
  }

  static MeasurementMatrix identity(std::uint32_t n) {
    std::vector<std::size_t> ptr(n + 1);
    std::vector<MatrixEntry> entries(n);
    for (std::uint32_t j = 0; j < n; ++j) {
      ptr[j + 1] = j + 1;
      entries[j] = {j, 1};
    }
    MatrixMeta meta;
    meta.family = "identity";
    meta.params["n"] = n;
    meta.column_support = 1;
    return MeasurementMatrix(n, std::move(ptr), std::move(entries), std::move(meta));
  }

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return static_cast<std::uint32_t>(col_ptr_.size() - 1); }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const MatrixEntry> column(std::uint32_t j) const {
    return {entries_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }
  std::int64_t squared_norm(std::uint32_t j) const { return norms_[j]; }

  bool is_binary() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const MatrixEntry& e) { return e.value == 1; });
  }
  bool has_uniform_norm() const {
    return std::all_of(norms_.begin(), norms_.end(), [&](std::int64_t n) { return n == norms_.front(); });
  }

  const MatrixMeta& meta() const { return meta_; }
  void set_meta(MatrixMeta meta) { meta_ = std::move(meta); }

  /// Shape and entries; metadata is ignored.
  friend bool operator==(const MeasurementMatrix& a, const MeasurementMatrix& b) {
    return a.rows_ == b.rows_ && a.col_ptr_ == b.col_ptr_ && a.entries_ == b.entries_;
  }

 private:
  std::uint32_t rows_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<MatrixEntry> entries_;
  std::vector<std::int64_t> norms_;
  MatrixMeta meta_;
};

/// Appends columns one entry at a time.
class ColumnBuilder {
 public:
  explicit ColumnBuilder(std::uint32_t rows) : rows_(rows) {}

  void reserve(std::size_t columns, std::size_t entries) {
    ptr_.reserve(columns + 1);
    entries_.reserve(entries);
  }
  void push(std::uint32_t row, std::int32_t value) { entries_.push_back({row, value}); }
  /// Sorts the current column by row and closes it.
  void end_column() {
    std::sort(entries_.begin() + static_cast<std::ptrdiff_t>(ptr_.back()), entries_.end(),
              [](const MatrixEntry& a, const MatrixEntry& b) { return a.row < b.row; });
    ptr_.push_back(entries_.size());
  }
  MeasurementMatrix finish(MatrixMeta meta = {}) && {
    return MeasurementMatrix(rows_, std::move(ptr_), std::move(entries_), std::move(meta));
  }

 private:
  std::uint32_t rows_;
  std::vector<std::size_t> ptr_{0};
  std::vector<MatrixEntry> entries_;
};

/// Exact inner product of two sparse columns.
inline std::int64_t inner_product(std::span<const MatrixEntry> a, std::span<const MatrixEntry> b) {
  std::int64_t sum = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].row < b[j].row) {
      ++i;
    } else if (b[j].row < a[i].row) {
      ++j;
    } else {
      sum += static_cast<std::int64_t>(a[i].value) * b[j].value;
      ++i;
      ++j;
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Coherence metrics

enum class OmegaMode { Signed, Absolute };
enum class LogBase { Natural, Base2, Base10 };

inline std::string to_string(OmegaMode m) { return m == OmegaMode::Signed ? "signed" : "absolute"; }
inline std::string to_string(LogBase b) {
  switch (b) {
    case LogBase::Natural: return "natural";
    case LogBase::Base2: return "base2";
    case LogBase::Base10: return "base10";
  }
  return "natural";
}

inline double log_in_base(double x, LogBase base) {
  switch (base) {
    case LogBase::Base2: return std::log2(x);
    case LogBase::Base10: return std::log10(x);
    case LogBase::Natural: break;
  }
  return std::log(x);
}

/// Average coherence. Exact whenever all columns share one norm; otherwise the
/// normalized inner products are irrational and only `value` is populated.
struct AverageCoherence {
  std::optional<Rational> exact;
  double value = 0.0;
};

struct MetricOptions {
  std::uint32_t pairwise_cap = 20000;
  unsigned workers = worker_count();
};

/// Everything a single pass over the Gram matrix yields.
struct GramSummary {
  Surd mu;
  std::uint32_t mu_i = 0, mu_j = 0;  // a maximizing pair
  std::int64_t mu_inner = 0;
  AverageCoherence omega_signed;
  AverageCoherence omega_absolute;
};

/// Computes mu and both omegas by accumulating each Gram row through the
/// row-incidence lists, which costs sum over rows of (row weight)^2 rather
/// than N^2 merges.
inline GramSummary gram_summary(const MeasurementMatrix& m, const MetricOptions& opts = {}) {
  const std::uint32_t n_cols = m.cols();
  require(n_cols >= 2, ErrorKind::SingleColumn, "coherence needs at least two columns");
  require(n_cols <= opts.pairwise_cap, ErrorKind::CapExceeded,
          "pairwise scan over " + std::to_string(n_cols) + " columns exceeds cap " +
              std::to_string(opts.pairwise_cap));

  struct RowEntry {
    std::uint32_t col;
    std::int32_t value;
  };
  std::vector<std::size_t> row_ptr(m.rows() + 1, 0);
  for (std::uint32_t j = 0; j < n_cols; ++j)
    for (const auto& e : m.column(j)) ++row_ptr[e.row + 1];
  for (std::uint32_t r = 0; r < m.rows(); ++r) row_ptr[r + 1] += row_ptr[r];
  std::vector<RowEntry> row_entries(m.nnz());
  {
    auto fill = row_ptr;
    for (std::uint32_t j = 0; j < n_cols; ++j)
      for (const auto& e : m.column(j)) row_entries[fill[e.row]++] = {j, e.value};
  }

  const bool uniform = m.has_uniform_norm();
  std::vector<long double> inv_norm(n_cols);
  for (std::uint32_t j = 0; j < n_cols; ++j) inv_norm[j] = 1.0L / std::sqrt(static_cast<long double>(m.squared_norm(j)));

  struct Partial {
    std::int64_t best_num = -1, best_den = 1;  // best squared normalized inner product
    std::uint32_t bi = 0, bj = 0;
    std::int64_t b_inner = 0;
    std::int64_t max_signed = 0, max_abs = 0;          // uniform-norm sums
    long double max_signed_f = 0.0L, max_abs_f = 0.0L;  // general sums
  };
  const unsigned workers = opts.workers;
  std::vector<Partial> partials(std::max(1u, std::min<unsigned>(workers, n_cols)));

  parallel_chunks(n_cols, static_cast<unsigned>(partials.size()), [&](unsigned w, std::size_t begin, std::size_t end) {
    Partial& part = partials[w];
    std::vector<std::int64_t> acc(n_cols, 0);
    std::vector<char> seen(n_cols, 0);
    std::vector<std::uint32_t> touched;
    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<std::uint32_t>(ii);
      touched.clear();
      for (const auto& e : m.column(i)) {
        for (std::size_t k = row_ptr[e.row]; k < row_ptr[e.row + 1]; ++k) {
          const auto& re = row_entries[k];
          if (re.col == i) continue;
          if (!seen[re.col]) {
            seen[re.col] = 1;
            touched.push_back(re.col);
          }
          acc[re.col] += static_cast<std::int64_t>(e.value) * re.value;
        }
      }
      std::sort(touched.begin(), touched.end());
      std::int64_t sum_signed = 0, sum_abs = 0;
      long double sum_signed_f = 0.0L, sum_abs_f = 0.0L;
      const std::int64_t ni = m.squared_norm(i);
      for (auto j : touched) {
        const std::int64_t ip = acc[j];
        acc[j] = 0;
        seen[j] = 0;
        if (ip == 0) continue;
        sum_signed += ip;
        sum_abs += ip < 0 ? -ip : ip;
        if (!uniform) {
          const long double v = static_cast<long double>(ip) * inv_norm[i] * inv_norm[j];
          sum_signed_f += v;
          sum_abs_f += std::fabs(v);
        }
        if (j > i) {
          const std::int64_t num = ip * ip;
          const std::int64_t den = ni * m.squared_norm(j);
          if (part.best_num < 0 ||
              static_cast<__int128>(num) * part.best_den > static_cast<__int128>(part.best_num) * den) {
            part.best_num = num;
            part.best_den = den;
            part.bi = i;
            part.bj = j;
            part.b_inner = ip;
          }
        }
      }
      part.max_signed = std::max(part.max_signed, sum_signed < 0 ? -sum_signed : sum_signed);
      part.max_abs = std::max(part.max_abs, sum_abs);
      part.max_signed_f = std::max(part.max_signed_f, std::fabs(sum_signed_f));
      part.max_abs_f = std::max(part.max_abs_f, sum_abs_f);
    }
  });

  Partial total;
  for (const auto& part : partials) {
    if (part.best_num >= 0 &&
        (total.best_num < 0 ||
         static_cast<__int128>(part.best_num) * total.best_den > static_cast<__int128>(total.best_num) * part.best_den)) {
      total.best_num = part.best_num;
      total.best_den = part.best_den;
      total.bi = part.bi;
      total.bj = part.bj;
      total.b_inner = part.b_inner;
    }
    total.max_signed = std::max(total.max_signed, part.max_signed);
    total.max_abs = std::max(total.max_abs, part.max_abs);
    total.max_signed_f = std::max(total.max_signed_f, part.max_signed_f);
    total.max_abs_f = std::max(total.max_abs_f, part.max_abs_f);
  }

  GramSummary out;
  if (total.best_num < 0) {
    // every pair orthogonal
    out.mu = Surd::from_square(Rational(0));
    out.mu_i = 0;
    out.mu_j = 1;
  } else {
    out.mu = Surd::from_square(Rational(total.best_num, total.best_den));
    out.mu_i = total.bi;
    out.mu_j = total.bj;
    out.mu_inner = total.b_inner;
  }
  const std::int64_t denom_cols = static_cast<std::int64_t>(n_cols) - 1;
  if (uniform) {
    const std::int64_t c = m.squared_norm(0);
    out.omega_signed.exact = Rational(total.max_signed, c * denom_cols);
    out.omega_absolute.exact = Rational(total.max_abs, c * denom_cols);
    out.omega_signed.value = out.omega_signed.exact->to_double();
    out.omega_absolute.value = out.omega_absolute.exact->to_double();
  } else {
    out.omega_signed.value = static_cast<double>(total.max_signed_f / denom_cols);
    out.omega_absolute.value = static_cast<double>(total.max_abs_f / denom_cols);
  }
  return out;
}

inline Surd coherence(const MeasurementMatrix& m, const MetricOptions& opts = {}) {
  return gram_summary(m, opts).mu;
}

inline AverageCoherence average_coherence(const MeasurementMatrix& m, OmegaMode mode,
                                          const MetricOptions& opts = {}) {
  auto g = gram_summary(m, opts);
  return mode == OmegaMode::Signed ? g.omega_signed : g.omega_absolute;
}

/// sqrt(N / (n (N - n))), the smallest coherence any n x N matrix can have.
inline double welch_bound(std::uint64_t n, std::uint64_t N) {
  require(n >= 1 && N > n, ErrorKind::DegenerateShape,
          "Welch bound needs N > n >= 1 (n=" + std::to_string(n) + ", N=" + std::to_string(N) + ")");
  return std::sqrt(static_cast<double>(N) / (static_cast<double>(n) * static_cast<double>(N - n)));
}

struct SparsityBound {
  std::uint64_t k = 0;
  bool orthonormal = false;  // mu = 0: the coherence bound says nothing, k reported as n
};

/// floor(1/mu) + 1, with the floor taken exactly.
inline SparsityBound sparsity_order_bound(const Surd& mu, std::uint64_t n) {
  if (mu.is_zero()) return {n, true};
  const Rational inv_sq = Rational(1) / mu.square();
  return {static_cast<std::uint64_t>(isqrt(inv_sq.floor())) + 1, false};
}

struct StrongCoherenceVerdict {
  bool cond1 = false;  // mu <= 1 / (160 log N)
  bool cond2 = false;  // omega <= mu / sqrt(n)
  LogBase log_base = LogBase::Natural;
  OmegaMode omega_mode = OmegaMode::Signed;
  double mu_threshold = 0.0;
  double omega_threshold = 0.0;

  bool holds() const { return cond1 && cond2; }
};

namespace detail {
// a/b <= c/d for non-negative values with possibly large magnitudes.
inline bool leq_products(long double lhs, long double rhs) { return lhs <= rhs * (1.0L + 1e-15L); }
}  // namespace detail

inline StrongCoherenceVerdict strong_coherence_verdict(const Surd& mu, const AverageCoherence& omega,
                                                       std::uint64_t n, std::uint64_t N, LogBase base,
                                                       OmegaMode mode) {
  StrongCoherenceVerdict v;
  v.log_base = base;
  v.omega_mode = mode;
  const long double logn = log_in_base(static_cast<double>(N), base);
  v.mu_threshold = static_cast<double>(1.0L / (160.0L * logn));
  v.cond1 = logn > 0 && mu.square().to_long_double() * (160.0L * logn) * (160.0L * logn) <= 1.0L;
  v.omega_threshold = mu.to_double() / std::sqrt(static_cast<double>(n));
  if (omega.exact) {
    // omega^2 * n <= mu^2, in exact integers when they fit
    const Rational& w = *omega.exact;
    const Rational& m2 = mu.square();
    const __int128 lhs_a = static_cast<__int128>(w.num()) * w.num();
    const __int128 rhs_b = static_cast<__int128>(w.den()) * w.den();
    const long double bits = std::log2(static_cast<long double>(lhs_a) + 1) + std::log2(static_cast<long double>(n) + 1) +
                             std::log2(static_cast<long double>(m2.den()) + 1);
    const long double bits_r = std::log2(static_cast<long double>(rhs_b) + 1) + std::log2(static_cast<long double>(m2.num()) + 1);
    if (bits < 125 && bits_r < 125) {
      v.cond2 = lhs_a * static_cast<__int128>(n) * m2.den() <= static_cast<__int128>(m2.num()) * rhs_b;
    } else {
      v.cond2 = detail::leq_products(w.to_long_double() * w.to_long_double() * n, m2.to_long_double());
    }
  } else {
    v.cond2 = detail::leq_products(static_cast<long double>(omega.value) * omega.value * n, mu.square().to_long_double());
  }
  return v;
}

inline StrongCoherenceVerdict strong_coherence_check(const MeasurementMatrix& m, LogBase base = LogBase::Natural,
                                                     OmegaMode mode = OmegaMode::Signed,
                                                     const MetricOptions& opts = {}) {
  const auto g = gram_summary(m, opts);
  return strong_coherence_verdict(g.mu, mode == OmegaMode::Signed ? g.omega_signed : g.omega_absolute, m.rows(),
                                  m.cols(), base, mode);
}

struct CoherenceReport {
  std::string family;
  Json params = Json::object();
  std::uint64_t n = 0, N = 0;
  Surd mu;
  AverageCoherence omega_signed, omega_absolute;
  std::optional<double> welch;  // only defined for N > n
  SparsityBound sparsity;
  StrongCoherenceVerdict strong_coherence;
};

inline CoherenceReport make_report(const MatrixMeta& meta, std::uint64_t n, std::uint64_t N, const Surd& mu,
                                   const AverageCoherence& omega_signed, const AverageCoherence& omega_absolute,
                                   LogBase base, OmegaMode mode) {
  CoherenceReport r;
  r.family = meta.family;
  r.params = meta.params;
  r.n = n;
  r.N = N;
  r.mu = mu;
  r.omega_signed = omega_signed;
  r.omega_absolute = omega_absolute;
  if (N > n) r.welch = welch_bound(n, N);
  r.sparsity = sparsity_order_bound(mu, n);
  r.strong_coherence =
      strong_coherence_verdict(mu, mode == OmegaMode::Signed ? omega_signed : omega_absolute, n, N, base, mode);
  return r;
}

inline CoherenceReport analyze(const MeasurementMatrix& m, LogBase base = LogBase::Natural,
                               OmegaMode mode = OmegaMode::Signed, const MetricOptions& opts = {}) {
  const auto g = gram_summary(m, opts);
  return make_report(m.meta(), m.rows(), m.cols(), g.mu, g.omega_signed, g.omega_absolute, base, mode);
}

inline Json rational_json(const Rational& r) { return Json{{"num", r.num()}, {"den", r.den()}}; }

/// mu is written as {num, den}; when mu is irrational the pair holds mu^2
/// and "sqrt": true is added.
inline Json surd_json(const Surd& s) {
  if (auto r = s.rational()) return rational_json(*r);
  Json j = rational_json(s.square());
  j["sqrt"] = true;
  return j;
}

inline Json average_json(const AverageCoherence& a) {
  if (a.exact) return rational_json(*a.exact);
  return Json{{"num", nullptr}, {"den", nullptr}, {"value", a.value}};
}

inline Json to_json(const CoherenceReport& r) {
  Json j;
  j["family"] = r.family;
  j["params"] = r.params;
  j["n"] = r.n;
  j["N"] = r.N;
  j["mu"] = surd_json(r.mu);
  j["omega_signed"] = average_json(r.omega_signed);
  j["omega_absolute"] = average_json(r.omega_absolute);
  j["welch"] = r.welch ? Json(*r.welch) : Json(nullptr);
  j["sparsity_bound"] = r.sparsity.k;
  j["strong_coherence"] = Json{{"cond1", r.strong_coherence.cond1},
                               {"cond2", r.strong_coherence.cond2},
                               {"log_base", to_string(r.strong_coherence.log_base)},
                               {"omega_mode", to_string(r.strong_coherence.omega_mode)}};
  return j;
}

// ---------------------------------------------------------------------------
// AGRIP-SPARSE text format
//
//   AGRIP-SPARSE 1 <n> <N> <nnz>
//   <col> <row> <value>        one line per nonzero, sorted by (col, row)
//
// Reading is strict: any line that would not be written back byte-for-byte
// is rejected with its line number.

inline void write_sparse(std::ostream& os, const MeasurementMatrix& m) {
  std::string buf;
  buf.reserve(64 + m.nnz() * 16);
  buf += "AGRIP-SPARSE 1 " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " +
         std::to_string(m.nnz()) + "\n";
  for (std::uint32_t j = 0; j < m.cols(); ++j) {
    const std::string col = std::to_string(j) + " ";
    for (const auto& e : m.column(j)) {
      buf += col;
      buf += std::to_string(e.row);
      buf += ' ';
      buf += std::to_string(e.value);
      buf += '\n';
    }
  }
  os << buf;
}

inline std::string to_sparse_text(const MeasurementMatrix& m) {
  std::ostringstream os;
  write_sparse(os, m);
  return os.str();
}

inline MeasurementMatrix read_sparse(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto parse_fail = [&](const std::string& why) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + why);
  };
  auto split_ints = [&](std::string_view text, std::size_t count) {
    std::vector<std::int64_t> out;
    std::size_t pos = 0;
    while (pos <= text.size() && out.size() < count) {
      const std::size_t sp = text.find(' ', pos);
      const std::string_view tok = text.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail("bad integer '" + std::string(tok) + "'");
      if (std::to_string(v) != tok) parse_fail("non-canonical integer '" + std::string(tok) + "'");
      out.push_back(v);
      if (sp == std::string_view::npos) {
        pos = text.size() + 1;
        break;
      }
      pos = sp + 1;
    }
    if (out.size() != count || pos != text.size() + 1) parse_fail("expected " + std::to_string(count) + " fields");
    return out;
  };

  ++line_no;
  if (!std::getline(is, line) || is.eof()) parse_fail("missing header");
  const std::string magic = "AGRIP-SPARSE 1 ";
  if (line.rfind(magic, 0) != 0) parse_fail("bad magic");
  const auto header = split_ints(std::string_view(line).substr(magic.size()), 3);
  if (header[0] < 0 || header[1] < 0 || header[2] < 0 || header[0] > UINT32_MAX || header[1] > UINT32_MAX)
    parse_fail("bad dimensions");
  const auto n = static_cast<std::uint32_t>(header[0]);
  const auto cols = static_cast<std::uint32_t>(header[1]);
  const auto nnz = static_cast<std::size_t>(header[2]);

  std::vector<std::size_t> ptr(cols + 1, 0);
  std::vector<MatrixEntry> entries;
  entries.reserve(nnz);
  std::int64_t prev_col = -1, prev_row = -1;
  for (std::size_t k = 0; k < nnz; ++k) {
    ++line_no;
    if (!std::getline(is, line)) parse_fail("truncated file: expected " + std::to_string(nnz) + " entries");
    if (is.eof()) parse_fail("missing trailing newline");
    const auto v = split_ints(line, 3);
    if (v[0] < 0 || v[0] >= cols) parse_fail("column out of range");
    if (v[1] < 0 || v[1] >= n) parse_fail("row out of range");
    if (v[2] == 0 || v[2] < INT32_MIN || v[2] > INT32_MAX) parse_fail("bad value");
    if (v[0] < prev_col || (v[0] == prev_col && v[1] <= prev_row)) parse_fail("entries not sorted by (col, row)");
    if (v[0] > prev_col + 1) parse_fail("column " + std::to_string(prev_col + 1) + " is empty");
    prev_col = v[0];
    prev_row = v[1];
    entries.push_back({static_cast<std::uint32_t>(v[1]), static_cast<std::int32_t>(v[2])});
    ++ptr[v[0] + 1];
  }
  ++line_no;
  if (prev_col + 1 != cols) parse_fail("column " + std::to_string(prev_col + 1) + " is empty");
  if (std::getline(is, line) || !is.eof()) parse_fail("trailing data after last entry");
  for (std::uint32_t j = 0; j < cols; ++j) ptr[j + 1] += ptr[j];
  return MeasurementMatrix(n, std::move(ptr), std::move(entries));
}

inline MeasurementMatrix read_sparse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::ParseError, "cannot open " + path);
  return read_sparse(in);
}

inline void write_sparse_file(const std::string& path, const MeasurementMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot write " + path);
  write_sparse(out, m);
}

inline Json meta_to_json(const MatrixMeta& meta) {
  Json j;
  j["family"] = meta.family;
  j["params"] = meta.params;
  j["field"] = meta.field;
  j["sign_scheme"] = meta.sign_scheme;
  j["column_support"] = meta.column_support ? Json(*meta.column_support) : Json(nullptr);
  return j;
}

/// Strict: unknown keys are an error.
inline MatrixMeta meta_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::ParseError, "matrix metadata must be an object");
  MatrixMeta meta;
  for (const auto& [key, value] : j.items()) {
    if (key == "family") meta.family = value.get<std::string>();
    else if (key == "params") meta.params = value;
    else if (key == "field") meta.field = value.get<std::string>();
    else if (key == "sign_scheme") meta.sign_scheme = value.get<std::string>();
    else if (key == "column_support") {
      if (!value.is_null()) meta.column_support = value.get<std::uint32_t>();
    } else fail(ErrorKind::ParseError, "unknown metadata key '" + key + "'");
  }
  return meta;
}

}  // namespace agrip
