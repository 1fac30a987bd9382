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

// Command-line driver. `run` is the whole program; main() only forwards
// argv and the standard streams, so tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage, 2 failed precondition or bad input,
// 3 size cap exceeded. Data goes to files or stdout, diagnostics to stderr.

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agrip/agrip.hpp"

namespace agrip::cli {

inline constexpr const char* kToolVersion = "agrip 0.1.0";
inline constexpr const char* kSparseFormat = "AGRIP-SPARSE 1";
inline constexpr const char* kSidecarFormat = "agrip-sidecar 1";
inline constexpr const char* kManifestFormat = "agrip-manifest 1";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) == 1, ErrorKind::InvalidArgument,
          "SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  require(static_cast<bool>(out), ErrorKind::InvalidArgument, "write failed for " + path);
}

inline Json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::ParseError, where + ": " + e.what());
  }
}

inline std::string sidecar_path(const std::string& matrix_path) { return matrix_path + ".json"; }

/// JSON written next to every matrix: provenance, the design when there is
/// one, and the sign-scheme verdicts.
struct Sidecar {
  MatrixMeta meta;
  std::optional<EvaluationDesign> design;
  bool materialized = true;
  Json certificate = nullptr;
};

inline Json to_json(const Sidecar& s) {
  Json j;
  j["format"] = kSidecarFormat;
  j["meta"] = meta_to_json(s.meta);
  j["design"] = s.design ? design_to_json(*s.design) : Json(nullptr);
  j["materialized"] = s.materialized;
  j["sign_scheme"] = s.meta.sign_scheme;
  j["strong_coherence_certificate"] = s.certificate;
  return j;
}

inline Sidecar sidecar_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::ParseError, "sidecar must be a JSON object");
  Sidecar s;
  std::optional<std::string> scheme;
  bool have_meta = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "format") {
        require(value == kSidecarFormat, ErrorKind::ParseError, "unsupported sidecar format");
      } else if (key == "meta") {
        s.meta = meta_from_json(value);
        have_meta = true;
      } else if (key == "design") {
        if (!value.is_null()) s.design = design_from_json(value);
      } else if (key == "materialized") {
        s.materialized = value.get<bool>();
      } else if (key == "sign_scheme") {
        scheme = value.get<std::string>();
      } else if (key == "strong_coherence_certificate") {
        s.certificate = value;
      } else {
        fail(ErrorKind::ParseError, "unknown sidecar key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::ParseError, std::string("sidecar: ") + e.what());
  }
  require(have_meta, ErrorKind::ParseError, "sidecar lacks 'meta'");
  require(!scheme || *scheme == s.meta.sign_scheme, ErrorKind::ParseError, "sidecar sign_scheme disagrees with meta");
  return s;
}

struct Artifact {
  std::string path;  // "-" for stdout
  std::string format;
  std::string sha256;
};

inline Json to_json(const Artifact& a) { return Json{{"path", a.path}, {"format", a.format}, {"sha256", a.sha256}}; }

/// Everything one invocation read and wrote; serialized as the manifest.
struct Run {
  std::string subcommand;
  std::vector<std::string> argv;
  Json params = Json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<Artifact> inputs, outputs;
  std::string stdout_data;

  std::string read_input(const std::string& path, const std::string& format) {
    std::string data = read_file(path);
    inputs.push_back({path, format, sha256_hex(data)});
    return data;
  }
  void write_output(const std::string& path, const std::string& format, const std::string& data) {
    if (path.empty() || path == "-") {
      stdout_data += data;
      return;
    }
    write_file(path, data);
    outputs.push_back({path, format, sha256_hex(data)});
  }
  Json manifest() const {
    Json j;
    j["format"] = kManifestFormat;
    j["tool"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["argv"] = argv;
    j["params"] = params;
    j["seeds"] = seeds;
    j["cwd"] = std::filesystem::current_path().string();
    Json in = Json::array(), out = Json::array();
    for (const auto& a : inputs) in.push_back(to_json(a));
    for (const auto& a : outputs) out.push_back(to_json(a));
    if (!stdout_data.empty()) out.push_back(to_json(Artifact{"-", "text", sha256_hex(stdout_data)}));
    j["inputs"] = std::move(in);
    j["outputs"] = std::move(out);
    return j;
  }
};

inline MeasurementMatrix load_matrix(Run& run, const std::string& path) {
  const std::string text = run.read_input(path, kSparseFormat);
  std::istringstream in(text);
  MeasurementMatrix m = read_sparse(in);
  if (std::filesystem::exists(sidecar_path(path))) {
    const auto side = sidecar_from_json(
        parse_json_text(run.read_input(sidecar_path(path), kSidecarFormat), sidecar_path(path)));
    m.set_meta(side.meta);
  }
  return m;
}

inline Sidecar load_sidecar(Run& run, const std::string& path) {
  return sidecar_from_json(parse_json_text(run.read_input(path, kSidecarFormat), path));
}

inline void write_matrix(Run& run, const std::string& path, const MeasurementMatrix& m, const Sidecar& side) {
  run.write_output(path, kSparseFormat, to_sparse_text(m));
  run.write_output(sidecar_path(path), kSidecarFormat, to_json(side).dump(2) + "\n");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    require(!item.empty(), ErrorKind::ParseError, "empty entry in list '" + text + "'");
    out.push_back(item);
  }
  return out;
}

inline LogBase parse_log_base(const std::string& s) {
  if (s == "natural" || s == "e") return LogBase::Natural;
  if (s == "base2" || s == "2") return LogBase::Base2;
  if (s == "base10" || s == "10") return LogBase::Base10;
  throw UsageError("unknown log base '" + s + "'");
}

inline OmegaMode parse_omega_mode(const std::string& s) {
  if (s == "signed") return OmegaMode::Signed;
  if (s == "absolute") return OmegaMode::Absolute;
  throw UsageError("unknown omega mode '" + s + "'");
}

/// "K" means 1..K.
inline std::pair<std::size_t, std::size_t> parse_k_range(const std::string& s) {
  auto num = [&](const std::string& t) {
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) throw UsageError("bad k range '" + s + "'");
    return static_cast<std::size_t>(std::stoull(t));
  };
  if (auto dots = s.find(".."); dots != std::string::npos) return {num(s.substr(0, dots)), num(s.substr(dots + 2))};
  return {1, num(s)};
}

// ---------------------------------------------------------------------------
// subcommands

struct ConstructOptions {
  std::string family, field, out;
  std::optional<unsigned> r, n, d1, d2, toric_case, d, e, rr, t;
  std::string poles, points;
  bool design_only = false;
};

inline unsigned need(const std::optional<unsigned>& v, const char* flag, const std::string& family) {
  if (!v) throw UsageError("family '" + family + "' requires " + flag);
  return *v;
}

inline void cmd_construct(const ConstructOptions& o, Run& run) {
  const FieldSpec f = FieldSpec::parse(o.field);
  run.params = {{"family", o.family}, {"field", f.descriptor()}, {"design_only", o.design_only}};
  auto record = [&](const char* key, const std::optional<unsigned>& v) {
    if (v) run.params[key] = *v;
  };
  record("r", o.r), record("n", o.n), record("d1", o.d1), record("d2", o.d2), record("case", o.toric_case);
  record("d", o.d), record("e", o.e), record("rr", o.rr), record("t", o.t);
  if (!o.poles.empty()) run.params["poles"] = o.poles;
  if (!o.points.empty()) run.params["points"] = o.points;

  std::optional<EvaluationDesign> design;
  std::optional<MeasurementMatrix> matrix;
  const std::string& fam = o.family;
  if (fam == "devore") {
    design = devore_design(f, need(o.r, "--r", fam));
  } else if (fam == "projspace") {
    design = projective_space_design(f, o.n.value_or(2), need(o.r, "--r", fam));
  } else if (fam == "ruled") {
    design = ruled_surface_design(f, need(o.d1, "--d1", fam), need(o.d2, "--d2", fam));
  } else if (fam == "toric") {
    ToricParams t;
    t.which = static_cast<int>(need(o.toric_case, "--case", fam));
    t.d = need(o.d, "--d", fam);
    t.e = o.e.value_or(0);
    t.r = o.rr.value_or(0);
    design = toric_design(f, t);
  } else if (fam == "consta-poles") {
    if (o.poles.empty()) throw UsageError("family 'consta-poles' requires --poles");
    std::vector<P1Point> poles, pts;
    for (const auto& s : split_list(o.poles)) poles.push_back(parse_p1_point(s));
    if (o.points.empty()) {
      // every point of the projective line that is not a pole
      auto add = [&](P1Point p) {
        if (std::find(poles.begin(), poles.end(), p) == poles.end()) pts.push_back(p);
      };
      for (std::uint32_t i = 0; i < f.q(); ++i) add(P1Point::finite(i));
      add(P1Point::infinity());
    } else {
      for (const auto& s : split_list(o.points)) pts.push_back(parse_p1_point(s));
    }
    matrix = construction_a_simple_poles(f, poles, pts);
  } else if (fam == "consta-point") {
    std::vector<FieldElement> pts;
    if (o.points.empty()) {
      pts = f.elements();
    } else {
      for (const auto& s : split_list(o.points)) {
        const P1Point p = parse_p1_point(s);
        require(!p.is_infinity(), ErrorKind::PoleEvalOverlap, "infinity is the pole of this construction");
        require(p.value->index < f.q(), ErrorKind::InvalidArgument, "point " + s + " is not a field element");
        pts.push_back(*p.value);
      }
    }
    matrix = construction_a_single_point(f, need(o.t, "--t", fam), pts);
  } else if (fam == "planecurve") {
    matrix = plane_curve_matrix(f, need(o.r, "--r", fam));
  } else if (fam == "fermat") {
    matrix = fermat_hyperplane_matrix(f);
  } else {
    throw UsageError("unknown family '" + fam + "'");
  }

  Sidecar side;
  side.design = design;
  if (design && o.design_only) {
    side.materialized = false;
    side.meta = MatrixMeta{design->family, design->params, design->field.descriptor(), "ones",
                           static_cast<std::uint32_t>(design->point_count())};
    run.write_output(sidecar_path(o.out), kSidecarFormat, to_json(side).dump(2) + "\n");
    return;
  }
  if (o.design_only) throw UsageError("--design-only applies to evaluation families only");
  if (design) matrix = evaluation_matrix(*design);
  side.meta = matrix->meta();
  write_matrix(run, o.out, *matrix, side);
}

struct SignOptions {
  std::string scheme, in, design, out, log_base = "natural";
};

inline MeasurementMatrix absolute_binary(const MeasurementMatrix& m) {
  ColumnBuilder b(m.rows());
  for (std::uint32_t j = 0; j < m.cols(); ++j) {
    for (const auto& e : m.column(j)) {
      require(e.value == 1 || e.value == -1, ErrorKind::NonBinaryInput, "entries must be +-1");
      b.push(e.row, 1);
    }
    b.end_column();
  }
  return std::move(b).finish(m.meta());
}

inline void require_same_support(const MeasurementMatrix& a, const MeasurementMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::ShapeMismatch, "matrix does not match the design");
  for (std::uint32_t j = 0; j < a.cols(); ++j) {
    const auto x = a.column(j), y = b.column(j);
    bool same = x.size() == y.size();
    for (std::size_t i = 0; same && i < x.size(); ++i)
      same = x[i].row == y[i].row && (x[i].value == y[i].value || x[i].value == -y[i].value);
    require(same, ErrorKind::ShapeMismatch, "column " + std::to_string(j) + " does not match the design");
  }
}

inline void cmd_sign(const SignOptions& o, Run& run) {
  SignScheme scheme = parse_sign_scheme(o.scheme);
  const LogBase base = parse_log_base(o.log_base);
  run.params = {{"scheme", scheme.name()}, {"log_base", to_string(base)}};
  if (scheme.kind == SignKind::Random) run.seeds.push_back(scheme.seed);
  if (o.in.empty() && o.design.empty()) throw UsageError("sign needs --in or --design");

  std::optional<MeasurementMatrix> in;
  Sidecar side;
  if (!o.in.empty()) {
    in = load_matrix(run, o.in);
    side.meta = in->meta();
    if (o.design.empty() && std::filesystem::exists(sidecar_path(o.in)))
      side.design = sidecar_from_json(parse_json_text(read_file(sidecar_path(o.in)), sidecar_path(o.in))).design;
  }
  if (!o.design.empty()) {
    const Sidecar d = load_sidecar(run, o.design);
    side.design = d.design;
    if (!in) side.meta = d.meta;
  }
  side.meta.sign_scheme = scheme.name();
  if (scheme.kind == SignKind::Balanced)
    require(side.design.has_value(), ErrorKind::InvalidArgument, "the balanced scheme needs a design sidecar");

  if (!in) {
    // design-only: nothing to materialize, certify from the design
    require(side.design.has_value(), ErrorKind::InvalidArgument, "design sidecar holds no design");
    side.materialized = false;
    if (scheme.kind == SignKind::Balanced) side.certificate = to_json(certify_balanced_design(*side.design, base));
    run.write_output(sidecar_path(o.out), kSidecarFormat, to_json(side).dump(2) + "\n");
    return;
  }

  MeasurementMatrix signed_matrix;
  switch (scheme.kind) {
    case SignKind::AllOnes: signed_matrix = absolute_binary(*in); break;
    case SignKind::Random: signed_matrix = randomize_signs(absolute_binary(*in), scheme.seed); break;
    case SignKind::Balanced:
      signed_matrix = balanced_matrix(*side.design);
      require_same_support(*in, signed_matrix);
      break;
  }
  signed_matrix.set_meta(side.meta);
  if (side.design) {
    side.certificate = to_json(certify_strong_coherence(signed_matrix, *side.design, base));
  } else {
    const auto v = strong_coherence_check(signed_matrix, base);
    side.certificate = Json{{"sufficient", nullptr},
                            {"ground_truth",
                             {{"cond1", v.cond1},
                              {"cond2", v.cond2},
                              {"holds", v.holds()},
                              {"log_base", to_string(base)},
                              {"omega_mode", "signed"}}}};
  }
  write_matrix(run, o.out, signed_matrix, side);
}

struct AnalyzeOptions {
  std::string in, design, out, log_base = "natural", omega_mode = "signed";
};

inline void cmd_analyze(const AnalyzeOptions& o, Run& run) {
  const LogBase base = parse_log_base(o.log_base);
  const OmegaMode mode = parse_omega_mode(o.omega_mode);
  run.params = {{"log_base", to_string(base)}, {"omega_mode", to_string(mode)}};
  if (o.in.empty() == o.design.empty()) throw UsageError("analyze needs exactly one of --in and --design");
  Json report;
  if (!o.in.empty()) {
    const auto m = load_matrix(run, o.in);
    report = to_json(analyze(m, base, mode));
  } else {
    // Unmaterialized designs: only the balanced scheme has a streaming path.
    const Sidecar side = load_sidecar(run, o.design);
    require(side.design.has_value(), ErrorKind::InvalidArgument, "sidecar holds no design");
    require(side.meta.sign_scheme == "balanced", ErrorKind::InvalidArgument,
            "design-only analysis needs the balanced scheme; sign the design first");
    require(mode == OmegaMode::Signed, ErrorKind::InvalidArgument, "design-only analysis reports signed omega only");
    const auto& d = *side.design;
    const auto c = certify_balanced_design(d, base);
    const std::uint64_t N = checked_pow(d.field.q(), d.dimension());
    const std::uint64_t n = static_cast<std::uint64_t>(d.field.q()) * d.point_count();
    report = to_json(make_report(side.meta, n, N, c.mu, c.omega_signed, c.omega_signed, base, mode));
    report["omega_absolute"] = nullptr;
    report["strong_coherence_certificate"] = to_json(c);
  }
  run.write_output(o.out, "json", report.dump(2) + "\n");
}

struct VerifyOptions {
  std::string check, in, design, field, out;
  unsigned k = 2, r = 2, t = 1;
};

inline Json oracle_line(std::string quantity, std::string instance, const std::string& oracle, const std::string& fast) {
  return to_json(OracleResult{std::move(quantity), std::move(instance), oracle, fast, oracle == fast});
}

inline void cmd_verify(const VerifyOptions& o, Run& run) {
  run.params = {{"check", o.check}};
  std::string lines;
  auto emit = [&](const Json& j) { lines += j.dump() + "\n"; };
  auto need_in = [&] {
    if (o.in.empty()) throw UsageError("check '" + o.check + "' requires --in");
    return load_matrix(run, o.in);
  };
  if (o.check == "coherence") {
    const auto m = need_in();
    emit(oracle_line("mu", o.in, brute_force_coherence(m).str(), coherence(m).str()));
  } else if (o.check == "rip") {
    run.params["k"] = o.k;
    const auto m = need_in();
    const double delta = brute_force_rip_delta(m, o.k);
    const Surd mu = coherence(m);
    Json j = {{"quantity", "delta_" + std::to_string(o.k)}, {"instance", o.in}, {"oracle", delta}};
    if (o.k == 2) {
      j["fast"] = mu.to_double();
      j["agree"] = std::abs(delta - mu.to_double()) <= 1e-12;
    } else {
      // Gershgorin: delta_k <= (k - 1) mu
      j["fast"] = (o.k - 1) * mu.to_double();
      j["agree"] = delta <= (o.k - 1) * mu.to_double() + 1e-12;
    }
    emit(j);
  } else if (o.check == "diff-trick") {
    if (o.design.empty()) throw UsageError("check 'diff-trick' requires --design");
    const Sidecar side = load_sidecar(run, o.design);
    require(side.design.has_value(), ErrorKind::InvalidArgument, "sidecar holds no design");
    const Rational fast = coherence_via_differences(*side.design);
    emit(oracle_line("mu", o.design, brute_force_coherence(evaluation_matrix(*side.design)).str(), fast.str()));
  } else if (o.check == "curves") {
    if (o.field.empty()) throw UsageError("check 'curves' requires --field");
    const FieldSpec f = FieldSpec::parse(o.field);
    run.params["field"] = f.descriptor();
    run.params["r"] = o.r;
    const auto census = plane_curve_census(f, o.r);
    const std::int64_t q = f.q();
    const std::int64_t closed = o.r == 2 ? q * q * q * q * q - q * q
                                         : q * q * q * q * (q * q - 1) * (q * q * q - 1);
    const std::string inst = "F_" + std::to_string(q) + " degree " + std::to_string(o.r);
    emit(oracle_line("smooth_curve_classes", inst, std::to_string(census.count.classes), std::to_string(closed)));
    Json c = to_json(census);
    c["quantity"] = "smooth_curve_census";
    c["instance"] = inst;
    emit(c);
  } else if (o.check == "fermat") {
    if (o.field.empty()) throw UsageError("check 'fermat' requires --field");
    const FieldSpec f = FieldSpec::parse(o.field);
    run.params["field"] = f.descriptor();
    run.params["t"] = o.t;
    const std::uint64_t q = fermat_base(f);
    const std::string inst = "F_" + std::to_string(f.q()) + " t=" + std::to_string(o.t);
    emit(oracle_line("fermat_points", inst, std::to_string(fermat_surface_points(f).size()),
                     std::to_string((q * q * q + 1) * (q * q + 1))));
    Json s = to_json(fermat_section_counts(f, o.t));
    s["quantity"] = "fermat_sections";
    s["instance"] = inst;
    emit(s);
  } else {
    throw UsageError("unknown check '" + o.check + "'");
  }
  run.write_output(o.out, "json-lines", lines);
}

struct RecoverOptions {
  std::string matrix, design, k = "1", algorithm = "omp", out;
  std::size_t trials = 100;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline void cmd_recover(const RecoverOptions& o, Run& run) {
  ExperimentConfig cfg;
  std::tie(cfg.k_min, cfg.k_max) = parse_k_range(o.k);
  cfg.trials = o.trials;
  cfg.sigma = o.sigma;
  cfg.seed = o.seed;
  if (o.algorithm == "omp") cfg.algorithm = Algorithm::Omp;
  else if (o.algorithm == "thresholding") cfg.algorithm = Algorithm::Thresholding;
  else throw UsageError("unknown algorithm '" + o.algorithm + "'");
  run.params = {{"k", o.k}, {"trials", o.trials}, {"sigma", o.sigma}, {"algorithm", o.algorithm}};
  run.seeds.push_back(o.seed);
  if (o.matrix.empty() == o.design.empty()) throw UsageError("recover needs exactly one of --matrix and --design");
  ExperimentReport report;
  std::string scheme;
  if (!o.matrix.empty()) {
    const auto m = load_matrix(run, o.matrix);
    scheme = m.meta().sign_scheme;
    report = run_experiment(MatrixOperator(m), cfg, m.meta().family, m.meta().params);
  } else {
    const Sidecar side = load_sidecar(run, o.design);
    require(side.design.has_value(), ErrorKind::InvalidArgument, "sidecar holds no design");
    scheme = side.meta.sign_scheme;
    const DesignOperator op(*side.design, parse_sign_scheme(scheme));
    report = run_experiment(op, cfg, side.meta.family, side.meta.params);
  }
  Json j = to_json(report);
  j["sign_scheme"] = scheme;
  run.write_output(o.out, "json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// dispatch

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace detail {

inline std::string flag_value(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned() || v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + flag_value(e);
    return s;
  }
  fail(ErrorKind::ParseError, "unsupported chain value " + v.dump());
}

/// Turns a chain stage object into flags; `allowed` maps JSON keys to flags.
inline void append_flags(std::vector<std::string>& argv, const Json& stage, const std::string& name,
                         const std::vector<std::pair<std::string, std::string>>& allowed) {
  require(stage.is_object(), ErrorKind::ParseError, "chain stage '" + name + "' must be an object");
  for (const auto& [key, value] : stage.items()) {
    auto it = std::find_if(allowed.begin(), allowed.end(), [&](const auto& p) { return p.first == key; });
    require(it != allowed.end(), ErrorKind::ParseError, "unknown key '" + key + "' in chain stage '" + name + "'");
    if (value.is_boolean()) {
      if (value.get<bool>()) argv.push_back(it->second);
      continue;
    }
    argv.push_back(it->second);
    argv.push_back(flag_value(value));
  }
}

}  // namespace detail

struct PipelineOptions {
  std::string chain, dir;
};

/// construct -> [sign] -> analyze -> [recover], every stage a nested run
/// with its own manifest, files named after the stage inside `dir`.
inline int cmd_pipeline(const PipelineOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  const Json chain = parse_json_text(run.read_input(o.chain, "json"), o.chain);
  require(chain.is_object(), ErrorKind::ParseError, "chain must be a JSON object");
  for (const auto& [key, value] : chain.items())
    require(key == "seed" || key == "construct" || key == "sign" || key == "analyze" || key == "recover",
            ErrorKind::ParseError, "unknown chain key '" + key + "'");
  require(chain.contains("construct"), ErrorKind::ParseError, "chain needs a 'construct' stage");
  const std::uint64_t seed = chain.value("seed", std::uint64_t{0});
  run.params = chain;
  run.seeds.push_back(seed);
  std::filesystem::create_directories(o.dir);
  const auto path = [&](const std::string& name) { return (std::filesystem::path(o.dir) / name).string(); };

  const Json& c = chain.at("construct");
  const bool design_only = c.is_object() && c.value("design_only", false);
  std::vector<std::vector<std::string>> stages;
  std::vector<std::string> produced;

  std::vector<std::string> construct = {"construct", "--out", path("matrix.txt")};
  detail::append_flags(construct, c, "construct",
                       {{"family", "--family"}, {"field", "--field"}, {"r", "--r"}, {"n", "--n"}, {"d1", "--d1"},
                        {"d2", "--d2"}, {"case", "--case"}, {"d", "--d"}, {"e", "--e"}, {"rr", "--rr"},
                        {"t", "--t"}, {"poles", "--poles"}, {"points", "--points"}, {"design_only", "--design-only"}});
  stages.push_back(construct);
  if (!design_only) produced.push_back(path("matrix.txt"));
  produced.push_back(sidecar_path(path("matrix.txt")));
  std::string current = path("matrix.txt");

  if (chain.contains("sign")) {
    Json s = chain.at("sign");
    require(s.is_object(), ErrorKind::ParseError, "chain stage 'sign' must be an object");
    if (s.value("scheme", std::string()) == "random") s["scheme"] = "random:" + std::to_string(seed);
    std::vector<std::string> sign = {"sign", "--out", path("signed.txt")};
    if (design_only) sign.insert(sign.end(), {"--design", sidecar_path(current)});
    else sign.insert(sign.end(), {"--in", current});
    detail::append_flags(sign, s, "sign", {{"scheme", "--scheme"}, {"log_base", "--log-base"}});
    stages.push_back(sign);
    current = path("signed.txt");
    if (!design_only) produced.push_back(current);
    produced.push_back(sidecar_path(current));
  }

  std::vector<std::string> analyze_args = {"analyze", "--out", path("analysis.json")};
  if (design_only) analyze_args.insert(analyze_args.end(), {"--design", sidecar_path(current)});
  else analyze_args.insert(analyze_args.end(), {"--in", current});
  if (chain.contains("analyze"))
    detail::append_flags(analyze_args, chain.at("analyze"), "analyze",
                         {{"log_base", "--log-base"}, {"omega_mode", "--omega-mode"}});
  stages.push_back(analyze_args);
  produced.push_back(path("analysis.json"));

  if (chain.contains("recover")) {
    Json r = chain.at("recover");
    require(r.is_object(), ErrorKind::ParseError, "chain stage 'recover' must be an object");
    if (!r.contains("seed")) r["seed"] = seed;
    std::vector<std::string> rec = {"recover", "--out", path("recovery.json")};
    if (design_only) rec.insert(rec.end(), {"--design", sidecar_path(current)});
    else rec.insert(rec.end(), {"--matrix", current});
    detail::append_flags(rec, r, "recover",
                         {{"k", "--k"}, {"trials", "--trials"}, {"sigma", "--sigma"}, {"seed", "--seed"},
                          {"algorithm", "--algorithm"}});
    stages.push_back(rec);
    produced.push_back(path("recovery.json"));
  }

  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto argv = stages[i];
    argv.insert(argv.end(), {"--manifest", path("stage" + std::to_string(i + 1) + "-" + argv[0] + ".manifest.json")});
    if (const int code = cli::run(argv, out, err); code != 0) {
      err << "pipeline: stage '" << argv[0] << "' failed\n";
      return code;
    }
  }
  for (const auto& p : produced) {
    const std::string data = read_file(p);
    run.outputs.push_back({p, p.ends_with(".txt") ? kSparseFormat : "json", sha256_hex(data)});
  }
  return 0;
}

struct ReplayOptions {
  std::string manifest;
};

/// Re-executes a manifest in its recorded directory and compares digests.
inline int cmd_replay(const ReplayOptions& o, std::ostream& out, std::ostream& err) {
  const Json m = parse_json_text(read_file(o.manifest), o.manifest);
  require(m.is_object() && m.value("format", std::string()) == kManifestFormat, ErrorKind::ParseError,
          o.manifest + " is not an agrip manifest");
  for (const auto& [key, value] : m.items())
    require(key == "format" || key == "tool" || key == "subcommand" || key == "argv" || key == "params" ||
                key == "seeds" || key == "cwd" || key == "inputs" || key == "outputs",
            ErrorKind::ParseError, "unknown manifest key '" + key + "'");
  const auto argv = m.at("argv").get<std::vector<std::string>>();
  const auto here = std::filesystem::current_path();
  std::filesystem::current_path(m.at("cwd").get<std::string>());
  Json mismatches = Json::array();
  int code = 0;
  try {
    for (const auto& a : m.at("inputs")) {
      const std::string p = a.at("path");
      if (!std::filesystem::exists(p) || sha256_hex(read_file(p)) != a.at("sha256").get<std::string>())
        mismatches.push_back({{"path", p}, {"reason", "input changed"}});
    }
    if (mismatches.empty()) {
      std::ostringstream captured;
      code = cli::run(argv, captured, err);
      for (const auto& a : m.at("outputs")) {
        const std::string p = a.at("path");
        const std::string data = p == "-" ? captured.str() : (std::filesystem::exists(p) ? read_file(p) : "");
        if (sha256_hex(data) != a.at("sha256").get<std::string>())
          mismatches.push_back({{"path", p}, {"reason", "output differs"}});
      }
    }
  } catch (...) {
    std::filesystem::current_path(here);
    throw;
  }
  std::filesystem::current_path(here);
  out << Json{{"manifest", o.manifest}, {"identical", mismatches.empty() && code == 0}, {"mismatches", mismatches}}.dump()
      << "\n";
  if (code != 0) return code;
  if (!mismatches.empty()) {
    err << "replay: " << mismatches.size() << " artifact(s) differ\n";
    return 2;
  }
  return 0;
}

inline int exit_code_for(ErrorKind kind) { return is_cap_error(kind) ? 3 : 2; }

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic compressed sensing matrices from algebraic geometry codes", "agrip"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kToolVersion);
  std::string manifest_path;

  ConstructOptions co;
  auto* construct = app.add_subcommand("construct", "Build a measurement matrix and its sidecar");
  construct->add_option("--family", co.family, "devore|consta-poles|consta-point|planecurve|fermat|projspace|ruled|toric")
      ->required();
  construct->add_option("--field", co.field, "p, p^s or p^s/c0,...,cs")->required();
  construct->add_option("--out", co.out, "matrix path; the sidecar goes to <out>.json")->required();
  construct->add_option("--r", co.r, "degree bound (devore, projspace) or curve degree (planecurve)");
  construct->add_option("--n", co.n, "projective space dimension (projspace, default 2)");
  construct->add_option("--d1", co.d1);
  construct->add_option("--d2", co.d2);
  construct->add_option("--case", co.toric_case, "toric polygon case 1, 2 or 3");
  construct->add_option("--d", co.d);
  construct->add_option("--e", co.e);
  construct->add_option("--rr", co.rr, "toric case 2 parameter r");
  construct->add_option("--t", co.t, "degree bound (consta-point)");
  construct->add_option("--poles", co.poles, "comma list of poles, 'inf' for infinity");
  construct->add_option("--points", co.points, "comma list of evaluation points");
  construct->add_flag("--design-only", co.design_only, "write only the design sidecar");

  SignOptions so;
  auto* sign = app.add_subcommand("sign", "Apply a sign scheme");
  sign->add_option("--scheme", so.scheme, "ones|random:SEED|balanced")->required();
  sign->add_option("--in", so.in, "input matrix");
  sign->add_option("--design", so.design, "design sidecar (default <in>.json)");
  sign->add_option("--out", so.out)->required();
  sign->add_option("--log-base", so.log_base, "natural|base2|base10");

  AnalyzeOptions ao;
  auto* analyze_cmd = app.add_subcommand("analyze", "Coherence report");
  analyze_cmd->add_option("--in", ao.in, "matrix file");
  analyze_cmd->add_option("--design", ao.design, "balanced design sidecar, for matrices too large to materialize");
  analyze_cmd->add_option("--out", ao.out, "report path (default stdout)");
  analyze_cmd->add_option("--log-base", ao.log_base, "natural|base2|base10");
  analyze_cmd->add_option("--omega-mode", ao.omega_mode, "signed|absolute");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "Cross-check against brute-force oracles");
  verify->add_option("--check", vo.check, "coherence|diff-trick|rip|curves|fermat")->required();
  verify->add_option("--in", vo.in, "matrix file (coherence, rip)");
  verify->add_option("--design", vo.design, "design sidecar (diff-trick)");
  verify->add_option("--field", vo.field, "field (curves, fermat)");
  verify->add_option("--k", vo.k, "subset size (rip)");
  verify->add_option("--r", vo.r, "curve degree (curves)");
  verify->add_option("--t", vo.t, "surface degree (fermat)");
  verify->add_option("--out", vo.out, "output path (default stdout)");

  RecoverOptions ro;
  auto* recover = app.add_subcommand("recover", "Seeded sparse recovery experiment");
  recover->add_option("--matrix", ro.matrix, "matrix file");
  recover->add_option("--design", ro.design, "signed design sidecar, columns generated on demand");
  recover->add_option("--k", ro.k, "K or A..B");
  recover->add_option("--trials", ro.trials);
  recover->add_option("--sigma", ro.sigma);
  recover->add_option("--seed", ro.seed);
  recover->add_option("--algorithm", ro.algorithm, "omp|thresholding");
  recover->add_option("--out", ro.out, "report path (default stdout)");

  PipelineOptions po;
  auto* pipeline = app.add_subcommand("pipeline", "Run a construct/sign/analyze/recover chain");
  pipeline->add_option("--chain", po.chain, "chain JSON")->required();
  pipeline->add_option("--dir", po.dir, "artifact directory")->required();

  ReplayOptions rpo;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare digests");
  replay->add_option("manifest", rpo.manifest)->required();

  for (auto* sub : {construct, sign, analyze_cmd, verify, recover, pipeline})
    sub->add_option("--manifest", manifest_path, "manifest path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      if (dynamic_cast<const CLI::CallForVersion*>(&e)) out << kToolVersion << "\n";
      return 0;
    }
    err << "error: " << e.what() << "\n"
        << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 1;
  }
  CLI::App* used = app.get_subcommands().front();

  Run record;
  record.subcommand = used->get_name();
  record.argv = args;
  try {
    int code = 0;
    if (used == replay) return cmd_replay(rpo, out, err);
    if (used == construct) cmd_construct(co, record);
    else if (used == sign) cmd_sign(so, record);
    else if (used == analyze_cmd) cmd_analyze(ao, record);
    else if (used == verify) cmd_verify(vo, record);
    else if (used == recover) cmd_recover(ro, record);
    else if (used == pipeline) code = cmd_pipeline(po, record, out, err);
    if (code != 0) return code;
    out << record.stdout_data;
    std::string mpath = manifest_path;
    if (mpath.empty()) {
      if (used == pipeline) mpath = (std::filesystem::path(po.dir) / "manifest.json").string();
      else if (!record.outputs.empty()) mpath = record.outputs.front().path + ".manifest.json";
      else mpath = "agrip-" + record.subcommand + ".manifest.json";
    }
    write_file(mpath, record.manifest().dump(2) + "\n");
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << used->help();
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    err << "error: ParseError: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    err << "error: CapExceeded: out of memory\n";
    return 3;
  }
}

}  // namespace agrip::cli
