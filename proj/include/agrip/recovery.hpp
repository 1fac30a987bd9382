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

// Sparse recovery on unit-normalized sensing operators: measurement, OMP,
// one-step thresholding, and seeded recovery sweeps.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "agrip/design.hpp"
#include "agrip/error.hpp"
#include "agrip/matrix_core.hpp"
#include "agrip/parallel.hpp"
#include "agrip/random.hpp"
#include "agrip/sign_schemes.hpp"

namespace agrip {

struct SparseSignal {
  std::uint64_t length = 0;
  std::vector<std::uint64_t> support;  // sorted
  std::vector<double> values;
};

using NormalizedColumn = std::vector<std::pair<std::uint32_t, double>>;

/// Anything that can hand out unit-norm columns and correlate a vector
/// against all of them.
template <class Op>
concept SensingOperator = requires(const Op& op, std::uint64_t j, NormalizedColumn& col, std::span<const double> r,
                                   std::span<double> out) {
  { op.rows() } -> std::convertible_to<std::uint64_t>;
  { op.cols() } -> std::convertible_to<std::uint64_t>;
  op.column(j, col);
  op.correlate(r, out);
};

/// Normalized view of a materialized matrix.
class MatrixOperator {
 public:
  explicit MatrixOperator(const MeasurementMatrix& m) : m_(&m), inv_norm_(m.cols()) {
    for (std::uint32_t j = 0; j < m.cols(); ++j) inv_norm_[j] = 1.0 / std::sqrt(static_cast<double>(m.squared_norm(j)));
  }
  std::uint64_t rows() const { return m_->rows(); }
  std::uint64_t cols() const { return m_->cols(); }
  void column(std::uint64_t j, NormalizedColumn& out) const {
    out.clear();
    for (const auto& e : m_->column(static_cast<std::uint32_t>(j))) out.emplace_back(e.row, e.value * inv_norm_[j]);
  }
  void correlate(std::span<const double> r, std::span<double> out) const {
    for (std::uint32_t j = 0; j < m_->cols(); ++j) {
      double s = 0;
      for (const auto& e : m_->column(j)) s += e.value * r[e.row];
      out[j] = s * inv_norm_[j];
    }
  }

 private:
  const MeasurementMatrix* m_;
  std::vector<double> inv_norm_;
};

/// Evaluation matrix of a design under a sign scheme, generated on demand.
class DesignOperator {
 public:
  DesignOperator(EvaluationDesign d, SignScheme scheme) : d_(std::move(d)), scheme_(std::move(scheme)) {
    d_.validate();
    q_ = d_.field.q();
    B_ = d_.point_count();
    T_ = d_.dimension();
    N_ = checked_pow(q_, T_, kStreamedColumnCap);
    inv_norm_ = 1.0 / std::sqrt(static_cast<double>(B_));
    if (scheme_.kind == SignKind::Balanced && scheme_.red.empty()) scheme_ = balanced_scheme(d_);
    if (scheme_.kind == SignKind::Balanced)
      require(scheme_.red.size() == B_ && scheme_.pivot.size() == B_, ErrorKind::InvalidArgument,
              "balanced scheme does not match the design");
    plan_separable();
  }

  std::uint64_t rows() const { return static_cast<std::uint64_t>(q_) * B_; }
  std::uint64_t cols() const { return N_; }
  const EvaluationDesign& design() const { return d_; }
  const SignScheme& scheme() const { return scheme_; }
  bool has_fast_path() const { return separable_; }

  void column(std::uint64_t j, NormalizedColumn& out) const {
    const auto a = coefficients_of(j, q_, T_);
    const auto v = evaluate(d_, a);
    std::vector<std::int32_t> s(B_);
    signs(j, a, s);
    out.clear();
    for (std::size_t b = 0; b < B_; ++b) out.emplace_back(static_cast<std::uint32_t>(b * q_ + v[b].index), s[b] * inv_norm_);
  }

  void correlate(std::span<const double> r, std::span<double> out) const {
    if (separable_) correlate_separable(r, out);
    else correlate_general(r, out);
  }

  /// Streams every column; used by tests to check the fast path.
  void correlate_general(std::span<const double> r, std::span<double> out) const {
    FunctionEnumerator it(d_, std::vector<FieldElement>(T_, FieldSpec::zero()));
    std::vector<std::int32_t> s(B_);
    std::uint64_t j = 0;
    do {
      signs(j, it.coeffs(), s);
      const auto& v = it.values();
      double acc = 0;
      for (std::size_t b = 0; b < B_; ++b) acc += s[b] * r[b * q_ + v[b].index];
      out[j++] = acc * inv_norm_;
    } while (it.next());
  }

 private:
  void signs(std::uint64_t j, std::span<const FieldElement> a, std::span<std::int32_t> out) const {
    switch (scheme_.kind) {
      case SignKind::AllOnes: std::fill(out.begin(), out.end(), 1); break;
      case SignKind::Random: {
        ColumnSigns cs(scheme_.seed, j);
        for (auto& s : out) s = cs.next();
        break;
      }
      case SignKind::Balanced: balanced_column_signs(d_, scheme_, a, out); break;
    }
  }

  // Sign of column j as sigma(j) * c(b); only valid when the plan allows it.
  int column_sign(std::span<const FieldElement> a) const {
    if (scheme_.kind != SignKind::Balanced) return 1;
    const FieldSpec& f = d_.field;
    FieldElement sum = FieldSpec::zero();
    for (auto c : a) sum = f.add(sum, c);
    std::uint32_t parity = f.trace(sum) & 1u;
    if (f.p() == 2) parity = (f.trace(sum) + f.trace(a[scheme_.pivot[0]])) & 1u;
    return parity ? -1 : 1;
  }

  // Points must form a grid X x Y listed x-major, there must be one constant
  // basis function, every other basis function must depend on x alone or on
  // y alone, and the signs must factor as sigma(column) * c(point).
  void plan_separable() {
    separable_ = false;
    if (scheme_.kind == SignKind::Random) return;
    if (scheme_.kind == SignKind::Balanced && d_.field.p() == 2)
      for (auto pv : scheme_.pivot)
        if (pv != scheme_.pivot[0]) return;
    if (d_.points.front().size() != 2) return;
    std::size_t ny = 1;
    while (ny < B_ && d_.points[ny][0] == d_.points[0][0]) ++ny;
    if (B_ % ny != 0) return;
    const std::size_t nx = B_ / ny;
    for (std::size_t b = 0; b < B_; ++b)
      if (d_.points[b][0] != d_.points[(b / ny) * ny][0] || d_.points[b][1] != d_.points[b % ny][1]) return;
    const_index_ = -1;
    x_basis_.clear();
    y_basis_.clear();
    for (std::size_t i = 0; i < T_; ++i) {
      const auto& row = d_.table[i];
      bool x_only = true, y_only = true;
      for (std::size_t b = 0; b < B_ && (x_only || y_only); ++b) {
        if (row[b] != row[(b / ny) * ny]) x_only = false;
        if (row[b] != row[b % ny]) y_only = false;
      }
      if (x_only && y_only && const_index_ < 0) {
        const_index_ = static_cast<int>(i);
        const_value_ = row[0];
      } else if (x_only) {
        x_basis_.push_back(i);
      } else if (y_only) {
        y_basis_.push_back(i);
      } else {
        return;
      }
    }
    if (const_index_ < 0) return;
    const double general = static_cast<double>(N_) * B_;
    const double fast = static_cast<double>(nx) * std::pow(q_, y_basis_.size() + 1) * ny +
                        std::pow(q_, T_) * static_cast<double>(nx);
    if (!(fast < general)) return;
    nx_ = nx;
    ny_ = ny;
    point_sign_.assign(B_, 1);
    if (scheme_.kind == SignKind::Balanced)
      for (std::size_t b = 0; b < B_; ++b) point_sign_[b] = scheme_.red[b] ? -1 : 1;
    separable_ = true;
  }

  // out(a) = sigma(a) / sqrt|B| * sum_x sum_y c(x,y) r[(x,y), w + u(x) + v(y)]
  // with w the constant term. Inner sums over y are shared across all
  // x-coefficients.
  void correlate_separable(std::span<const double> r, std::span<double> out) const {
    const FieldSpec& f = d_.field;
    const std::size_t ky = y_basis_.size(), kx = x_basis_.size();
    const std::uint64_t ny_combos = checked_pow(q_, ky), nx_combos = checked_pow(q_, kx);
    // G[(beta * nx + x) * q + w]
    std::vector<double> G(ny_combos * nx_ * q_, 0.0);
    std::vector<FieldElement> beta(ky, FieldSpec::zero()), alpha(kx, FieldSpec::zero());
    std::vector<FieldElement> vy(ny_), ux(nx_);
    for (std::uint64_t bi = 0; bi < ny_combos; ++bi) {
      decode(bi, beta);
      for (std::size_t y = 0; y < ny_; ++y) {
        FieldElement acc = FieldSpec::zero();
        for (std::size_t k = 0; k < ky; ++k) acc = f.add(acc, f.mul(beta[k], d_.table[y_basis_[k]][y]));
        vy[y] = acc;
      }
      for (std::size_t x = 0; x < nx_; ++x) {
        double* g = &G[(bi * nx_ + x) * q_];
        for (std::size_t y = 0; y < ny_; ++y) {
          const std::size_t b = x * ny_ + y;
          const double* rb = &r[b * q_];
          const double c = point_sign_[b];
          for (std::uint32_t w = 0; w < q_; ++w) g[w] += c * rb[f.add({w}, vy[y]).index];
        }
      }
    }
    std::vector<FieldElement> a(T_, FieldSpec::zero());
    for (std::uint64_t ai = 0; ai < nx_combos; ++ai) {
      decode(ai, alpha);
      for (std::size_t x = 0; x < nx_; ++x) {
        FieldElement acc = FieldSpec::zero();
        for (std::size_t k = 0; k < kx; ++k) acc = f.add(acc, f.mul(alpha[k], d_.table[x_basis_[k]][x * ny_]));
        ux[x] = acc;
      }
      for (std::size_t k = 0; k < kx; ++k) a[x_basis_[k]] = alpha[k];
      for (std::uint64_t bi = 0; bi < ny_combos; ++bi) {
        decode(bi, beta);
        for (std::size_t k = 0; k < ky; ++k) a[y_basis_[k]] = beta[k];
        for (std::uint32_t c0 = 0; c0 < q_; ++c0) {
          a[const_index_] = {c0};
          const FieldElement w0 = f.mul({c0}, const_value_);
          double acc = 0;
          for (std::size_t x = 0; x < nx_; ++x) acc += G[(bi * nx_ + x) * q_ + f.add(w0, ux[x]).index];
          out[column_index(a, q_)] = column_sign(a) * acc * inv_norm_;
        }
      }
    }
  }

  void decode(std::uint64_t v, std::vector<FieldElement>& out) const {
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = {static_cast<std::uint32_t>(v % q_)};
      v /= q_;
    }
  }

  EvaluationDesign d_;
  SignScheme scheme_;
  std::uint32_t q_ = 0;
  std::size_t B_ = 0, T_ = 0;
  std::uint64_t N_ = 0;
  double inv_norm_ = 1.0;
  bool separable_ = false;
  std::size_t nx_ = 0, ny_ = 0;
  int const_index_ = -1;
  FieldElement const_value_{};
  std::vector<std::size_t> x_basis_, y_basis_;
  std::vector<int> point_sign_;
};

/// y = Phi_normalized x + sigma g with g standard normal from `seed`.
template <SensingOperator Op>
std::vector<double> measure(const Op& op, const SparseSignal& x, double sigma, std::uint64_t seed) {
  require(x.length == op.cols(), ErrorKind::ShapeMismatch,
          "signal length " + std::to_string(x.length) + " != column count " + std::to_string(op.cols()));
  require(x.support.size() == x.values.size(), ErrorKind::ShapeMismatch, "support and values differ in size");
  std::vector<double> y(op.rows(), 0.0);
  NormalizedColumn col;
  for (std::size_t k = 0; k < x.support.size(); ++k) {
    require(x.support[k] < op.cols(), ErrorKind::ShapeMismatch, "support index out of range");
    op.column(x.support[k], col);
    for (const auto& [row, v] : col) y[row] += v * x.values[k];
  }
  if (sigma > 0) {
    auto rng = substream({seed, 0x6e6f697365ULL});
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& v : y) v += sigma * g(rng);
  }
  return y;
}

struct RecoveryResult {
  SparseSignal estimate;
  bool rank_deficient = false;  // the selected columns did not have full rank
};

namespace detail {

template <SensingOperator Op>
Eigen::MatrixXd dense_columns(const Op& op, const std::vector<std::uint64_t>& cols) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(op.rows()), static_cast<Eigen::Index>(cols.size()));
  NormalizedColumn col;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    op.column(cols[k], col);
    for (const auto& [row, v] : col) A(row, static_cast<Eigen::Index>(k)) = v;
  }
  return A;
}

// Least squares on the given columns; false when they are rank deficient.
inline bool least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, Eigen::VectorXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  x = qr.solve(y);
  return qr.rank() == A.cols();
}

inline SparseSignal make_signal(std::uint64_t length, std::vector<std::uint64_t> support, const Eigen::VectorXd& v) {
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support[a] < support[b]; });
  SparseSignal s;
  s.length = length;
  for (auto i : order) {
    if (std::fabs(v[static_cast<Eigen::Index>(i)]) <= 1e-10) continue;
    s.support.push_back(support[i]);
    s.values.push_back(v[static_cast<Eigen::Index>(i)]);
  }
  return s;
}

}  // namespace detail

/// Orthogonal matching pursuit: k greedy selections, each followed by a
/// least-squares refit. Stops early on an exact fit or a rank-deficient pick.
template <SensingOperator Op>
RecoveryResult omp(const Op& op, std::span<const double> y, std::size_t k) {
  require(y.size() == op.rows(), ErrorKind::ShapeMismatch, "measurement length mismatch");
  require(k <= op.rows(), ErrorKind::InvalidArgument, "k exceeds the row count");
  RecoveryResult out;
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double ynorm = yv.norm();
  std::vector<double> residual(y.begin(), y.end()), corr(op.cols());
  std::vector<std::uint64_t> chosen;
  std::vector<char> used(op.cols(), 0);
  Eigen::VectorXd coef;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(op.rows()), 0);
  NormalizedColumn col;
  for (std::size_t it = 0; it < k; ++it) {
    if (Eigen::Map<const Eigen::VectorXd>(residual.data(), static_cast<Eigen::Index>(residual.size())).norm() <=
        1e-12 * std::max(ynorm, 1e-300))
      break;
    op.correlate(residual, corr);
    std::uint64_t best = op.cols();
    double best_abs = -1;
    for (std::uint64_t j = 0; j < op.cols(); ++j) {
      if (used[j]) continue;
      const double a = std::fabs(corr[j]);
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best == op.cols()) break;
    A.conservativeResize(Eigen::NoChange, A.cols() + 1);
    A.col(A.cols() - 1).setZero();
    op.column(best, col);
    for (const auto& [row, v] : col) A(row, A.cols() - 1) = v;
    Eigen::VectorXd trial;
    if (!detail::least_squares(A, yv, trial)) {
      out.rank_deficient = true;
      A.conservativeResize(Eigen::NoChange, A.cols() - 1);
      break;
    }
    coef = trial;
    used[best] = 1;
    chosen.push_back(best);
    const Eigen::VectorXd res = yv - A * coef;
    std::copy(res.data(), res.data() + res.size(), residual.begin());
  }
  if (chosen.empty()) coef.resize(0);
  out.estimate = detail::make_signal(op.cols(), chosen, coef);
  return out;
}

/// Keeps the k columns most correlated with y and refits on them.
template <SensingOperator Op>
RecoveryResult one_step_thresholding(const Op& op, std::span<const double> y, std::size_t k) {
  require(y.size() == op.rows(), ErrorKind::ShapeMismatch, "measurement length mismatch");
  require(k <= op.rows() && k <= op.cols(), ErrorKind::InvalidArgument, "k exceeds the operator size");
  std::vector<double> corr(op.cols());
  op.correlate(y, corr);
  std::vector<std::uint64_t> idx(op.cols());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), [&](auto a, auto b) {
    const double fa = std::fabs(corr[a]), fb = std::fabs(corr[b]);
    return fa > fb || (fa == fb && a < b);
  });
  idx.resize(k);
  RecoveryResult out;
  if (k == 0) {
    out.estimate.length = op.cols();
    return out;
  }
  const Eigen::MatrixXd A = detail::dense_columns(op, idx);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::VectorXd coef;
  out.rank_deficient = !detail::least_squares(A, yv, coef);
  out.estimate = detail::make_signal(op.cols(), idx, coef);
  return out;
}

enum class Algorithm { Omp, Thresholding };

inline std::string to_string(Algorithm a) { return a == Algorithm::Omp ? "omp" : "thresholding"; }

struct ExperimentConfig {
  std::size_t k_min = 1, k_max = 1;
  std::size_t trials = 100;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Omp;
  unsigned workers = worker_count();
};

struct ExperimentRow {
  std::size_t k = 0;
  std::size_t trials = 0;
  std::size_t exact_support = 0;
  double rate = 0.0;
  double mean_relative_error = 0.0;
};

struct ExperimentReport {
  std::string family;
  Json params = Json::object();
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
};

/// Random k-sparse signal: uniform support, signs +-1, magnitudes U[1, 2].
inline SparseSignal random_signal(std::uint64_t N, std::size_t k, std::mt19937_64& rng) {
  require(k <= N, ErrorKind::InvalidArgument, "k exceeds the signal length");
  SparseSignal s;
  s.length = N;
  std::uniform_int_distribution<std::uint64_t> pick(0, N - 1);
  std::vector<std::uint64_t> chosen;
  while (chosen.size() < k) {
    const auto j = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) chosen.push_back(j);
  }
  std::sort(chosen.begin(), chosen.end());
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  for (auto j : chosen) {
    (void)j;
    const double sign = (rng() & 1u) ? -1.0 : 1.0;
    s.values.push_back(sign * mag(rng));
  }
  s.support = std::move(chosen);
  return s;
}

inline double relative_error(const SparseSignal& truth, const SparseSignal& est) {
  double num = 0, den = 0;
  std::size_t i = 0, j = 0;
  while (i < truth.support.size() || j < est.support.size()) {
    if (j == est.support.size() || (i < truth.support.size() && truth.support[i] < est.support[j])) {
      num += truth.values[i] * truth.values[i];
      den += truth.values[i] * truth.values[i];
      ++i;
    } else if (i == truth.support.size() || est.support[j] < truth.support[i]) {
      num += est.values[j] * est.values[j];
      ++j;
    } else {
      const double d = truth.values[i] - est.values[j];
      num += d * d;
      den += truth.values[i] * truth.values[i];
      ++i;
      ++j;
    }
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Seeded sweep over k. Trial t at sparsity k draws from the substream
/// (seed, k, t), so results do not depend on the worker count.
template <SensingOperator Op>
ExperimentReport run_experiment(const Op& op, const ExperimentConfig& cfg, std::string family = "",
                                Json params = Json::object()) {
  ExperimentReport report;
  report.family = std::move(family);
  report.params = std::move(params);
  report.config = cfg;
  if (cfg.trials == 0) return report;
  require(cfg.k_min >= 1 && cfg.k_min <= cfg.k_max, ErrorKind::InvalidArgument, "bad k range");
  require(cfg.k_max <= op.rows() && cfg.k_max <= op.cols(), ErrorKind::InvalidArgument, "k exceeds operator size");
  require(cfg.sigma >= 0, ErrorKind::InvalidArgument, "sigma must be non-negative");
  for (std::size_t k = cfg.k_min; k <= cfg.k_max; ++k) {
    std::vector<char> exact(cfg.trials, 0);
    std::vector<double> err(cfg.trials, 0.0);
    parallel_chunks(cfg.trials, cfg.workers, [&](unsigned, std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        auto rng = substream({cfg.seed, k, t});
        const auto x = random_signal(op.cols(), k, rng);
        const auto y = measure(op, x, cfg.sigma, rng());
        const auto r = cfg.algorithm == Algorithm::Omp ? omp(op, y, k) : one_step_thresholding(op, y, k);
        exact[t] = r.estimate.support == x.support;
        err[t] = relative_error(x, r.estimate);
      }
    });
    ExperimentRow row;
    row.k = k;
    row.trials = cfg.trials;
    row.exact_support = static_cast<std::size_t>(std::count(exact.begin(), exact.end(), 1));
    row.rate = static_cast<double>(row.exact_support) / static_cast<double>(cfg.trials);
    double total = 0;
    for (double e : err) total += e;
    row.mean_relative_error = total / static_cast<double>(cfg.trials);
    report.rows.push_back(row);
  }
  return report;
}

inline Json to_json(const ExperimentReport& r) {
  Json j;
  j["family"] = r.family;
  j["params"] = r.params;
  j["algorithm"] = to_string(r.config.algorithm);
  j["k_range"] = {r.config.k_min, r.config.k_max};
  j["trials"] = r.config.trials;
  j["sigma"] = r.config.sigma;
  j["seed"] = r.config.seed;
  j["amplitude_model"] = "sign uniform in {-1, +1}, magnitude uniform in [1, 2]";
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"k", row.k},
                    {"trials", row.trials},
                    {"exact_support", row.exact_support},
                    {"rate", row.rate},
                    {"mean_relative_error", row.mean_relative_error}});
  j["results"] = std::move(rows);
  return j;
}

}  // namespace agrip
