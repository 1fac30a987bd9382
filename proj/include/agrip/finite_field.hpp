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

// Finite fields F_q, q = p^s, with elements encoded as the integer
// c_0 + c_1 p + ... + c_{s-1} p^{s-1} of their coefficient vector modulo a
// monic irreducible polynomial. That integer order is the enumeration order
// used everywhere else: 0, 1, ..., p-1 are the prime subfield, then the
// elements with a nonzero x-coefficient, and so on.

#include <charconv>
#include <compare>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agrip/error.hpp"

namespace agrip {

/// Element of a finite field in canonical encoding. Carries no reference to
/// its field; arithmetic goes through FieldSpec.
struct FieldElement {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(const FieldElement&, const FieldElement&) = default;
};

inline constexpr std::uint32_t kMaxFieldOrder = 1u << 20;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

class FieldSpec {
 public:
  /// Builds F_{p^s}. Without a modulus, the first monic irreducible
  /// polynomial in lexicographic order of its lower coefficients
  /// (c_0 least significant) is used. A supplied modulus is given lowest
  /// degree first, c_0, ..., c_s, and is scaled to be monic.
  static FieldSpec make(std::uint32_t p, std::uint32_t s,
                        std::optional<std::vector<std::uint32_t>> modulus = std::nullopt) {
    require(is_prime(p), ErrorKind::CompositeCharacteristic,
            "characteristic " + std::to_string(p) + " is not prime");
    require(s >= 1, ErrorKind::InvalidArgument, "extension degree must be at least 1");
    std::uint64_t q = 1;
    for (std::uint32_t i = 0; i < s; ++i) {
      q *= p;
      require(q <= kMaxFieldOrder, ErrorKind::CapExceeded,
              "field order exceeds 2^20 (" + std::to_string(p) + "^" + std::to_string(s) + ")");
    }

    auto data = std::make_shared<Data>();
    data->p = p;
    data->s = s;
    data->q = static_cast<std::uint32_t>(q);

    if (modulus) {
      auto m = *modulus;
      require(m.size() == s + 1, ErrorKind::InvalidArgument,
              "modulus must have " + std::to_string(s + 1) + " coefficients");
      for (auto c : m) require(c < p, ErrorKind::InvalidArgument, "modulus coefficient out of range");
      require(m.back() != 0, ErrorKind::InvalidArgument, "modulus leading coefficient is zero");
      const std::uint32_t lead_inv = inverse_mod(m.back(), p);
      for (auto& c : m) c = static_cast<std::uint32_t>((static_cast<std::uint64_t>(c) * lead_inv) % p);
      require(is_irreducible(m, p), ErrorKind::ReducibleModulus, "modulus is reducible over F_" + std::to_string(p));
      data->modulus = std::move(m);
    } else {
      data->modulus = find_irreducible(p, s);
    }

    data->build();
    FieldSpec f;
    f.data_ = std::move(data);
    return f;
  }

  /// Parses "p", "p^s" or "p^s/c0,c1,...,cs".
  static FieldSpec parse(std::string_view text) {
    auto bad = [&] { fail(ErrorKind::InvalidArgument, "malformed field descriptor '" + std::string(text) + "'"); };
    auto parse_uint = [&](std::string_view t) {
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) bad();
      return v;
    };
    std::string_view head = text;
    std::optional<std::vector<std::uint32_t>> modulus;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      head = text.substr(0, slash);
      std::string_view rest = text.substr(slash + 1);
      std::vector<std::uint32_t> coeffs;
      while (true) {
        auto comma = rest.find(',');
        coeffs.push_back(parse_uint(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      modulus = std::move(coeffs);
    }
    std::uint32_t p = 0, s = 1;
    if (auto caret = head.find('^'); caret != std::string_view::npos) {
      p = parse_uint(head.substr(0, caret));
      s = parse_uint(head.substr(caret + 1));
    } else {
      p = parse_uint(head);
    }
    return make(p, s, std::move(modulus));
  }

  std::uint32_t p() const { return data_->p; }
  std::uint32_t s() const { return data_->s; }
  std::uint32_t q() const { return data_->q; }
  const std::vector<std::uint32_t>& modulus() const { return data_->modulus; }
  FieldElement theta() const { return data_->theta; }

  /// "p" for prime fields, otherwise "p^s/c0,...,cs".
  std::string descriptor() const {
    if (s() == 1) return std::to_string(p());
    std::string out = std::to_string(p()) + "^" + std::to_string(s()) + "/";
    for (std::size_t i = 0; i < modulus().size(); ++i) {
      if (i) out += ',';
      out += std::to_string(modulus()[i]);
    }
    return out;
  }

  static constexpr FieldElement zero() { return {0}; }
  static constexpr FieldElement one() { return {1}; }

  /// Image of an integer in the prime subfield.
  FieldElement from_int(std::int64_t v) const {
    const auto pp = static_cast<std::int64_t>(p());
    return {static_cast<std::uint32_t>(((v % pp) + pp) % pp)};
  }

  FieldElement element(std::uint32_t index) const {
    require(index < q(), ErrorKind::InvalidArgument, "element index out of range");
    return {index};
  }

  std::vector<std::uint32_t> coeffs(FieldElement a) const {
    std::vector<std::uint32_t> out(s());
    std::uint32_t v = a.index;
    for (auto& c : out) {
      c = v % p();
      v /= p();
    }
    return out;
  }

  FieldElement from_coeffs(std::span<const std::uint32_t> c) const {
    require(c.size() == s(), ErrorKind::InvalidArgument, "coefficient vector has wrong length");
    std::uint32_t v = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
      require(c[i] < p(), ErrorKind::InvalidArgument, "coefficient out of range");
      v = v * p() + c[i];
    }
    return {v};
  }

  std::vector<FieldElement> elements() const {
    std::vector<FieldElement> out(q());
    for (std::uint32_t i = 0; i < q(); ++i) out[i] = {i};
    return out;
  }

  FieldElement add(FieldElement a, FieldElement b) const {
    const Data& d = *data_;
    if (d.s == 1) {
      const std::uint32_t r = a.index + b.index;
      return {r >= d.p ? r - d.p : r};
    }
    if (!d.add_table.empty()) return {d.add_table[static_cast<std::size_t>(a.index) * d.q + b.index]};
    return {d.add_digits(a.index, b.index)};
  }
  FieldElement neg(FieldElement a) const { return {data_->neg[a.index]}; }
  FieldElement sub(FieldElement a, FieldElement b) const { return add(a, neg(b)); }

  FieldElement mul(FieldElement a, FieldElement b) const {
    if (a.index == 0 || b.index == 0) return zero();
    const Data& d = *data_;
    return d.exp[d.log[a.index] + d.log[b.index]];
  }

  FieldElement inv(FieldElement a) const {
    require(a.index != 0, ErrorKind::DivisionByZero, "inverse of zero");
    const Data& d = *data_;
    const std::uint32_t l = d.log[a.index];
    return d.exp[l == 0 ? 0 : d.q - 1 - l];
  }

  FieldElement div(FieldElement a, FieldElement b) const { return mul(a, inv(b)); }

  FieldElement pow(FieldElement a, std::uint64_t e) const {
    if (e == 0) return one();
    if (a.index == 0) return zero();
    const Data& d = *data_;
    const std::uint64_t l = (static_cast<std::uint64_t>(d.log[a.index]) * (e % (d.q - 1))) % (d.q - 1);
    return d.exp[l];
  }

  /// theta^k for any integer k.
  FieldElement exp(std::int64_t k) const {
    const auto order = static_cast<std::int64_t>(q() - 1);
    return data_->exp[static_cast<std::size_t>(((k % order) + order) % order)];
  }

  /// Discrete logarithm to base theta of a nonzero element.
  std::uint32_t log(FieldElement a) const {
    require(a.index != 0, ErrorKind::DivisionByZero, "logarithm of zero");
    return data_->log[a.index];
  }

  /// Absolute trace x + x^p + ... + x^{p^{s-1}}, returned as its residue in [0, p).
  std::uint32_t trace(FieldElement a) const { return data_->trace[a.index]; }

  /// Multiplicative order of a nonzero element.
  std::uint64_t order(FieldElement a) const {
    const std::uint64_t n = q() - 1;
    const std::uint64_t l = log(a);
    return n / std::gcd(n, l);
  }

  friend bool operator==(const FieldSpec& a, const FieldSpec& b) {
    return a.data_ == b.data_ || (a.p() == b.p() && a.s() == b.s() && a.modulus() == b.modulus());
  }

 private:
  struct Data {
    std::uint32_t p = 2, s = 1, q = 2;
    std::vector<std::uint32_t> modulus;  // monic, lowest degree first
    FieldElement theta;
    std::vector<FieldElement> exp;       // length 2(q-1), theta^i
    std::vector<std::uint32_t> log;
    std::vector<std::uint32_t> neg;
    std::vector<std::uint32_t> trace;
    std::vector<std::uint32_t> add_table;  // only for small extension fields

    std::uint32_t add_digits(std::uint32_t a, std::uint32_t b) const {
      std::uint32_t out = 0, w = 1;
      for (std::uint32_t i = 0; i < s; ++i) {
        const std::uint32_t c = (a % p + b % p) % p;
        out += c * w;
        w *= p;
        a /= p;
        b /= p;
      }
      return out;
    }

    std::vector<std::uint32_t> digits(std::uint32_t v) const {
      std::vector<std::uint32_t> d(s);
      for (auto& c : d) {
        c = v % p;
        v /= p;
      }
      return d;
    }

    std::uint32_t pack(const std::vector<std::uint32_t>& d) const {
      std::uint32_t v = 0;
      for (std::size_t i = s; i-- > 0;) v = v * p + d[i];
      return v;
    }

    std::uint32_t mul_slow(std::uint32_t a, std::uint32_t b) const {
      const auto da = digits(a), db = digits(b);
      std::vector<std::uint64_t> prod(2 * s - 1, 0);
      for (std::uint32_t i = 0; i < s; ++i)
        for (std::uint32_t j = 0; j < s; ++j) prod[i + j] = (prod[i + j] + std::uint64_t{da[i]} * db[j]) % p;
      for (std::size_t i = prod.size(); i-- > s;) {
        const std::uint64_t c = prod[i];
        if (c == 0) continue;
        for (std::uint32_t j = 0; j < s; ++j) {
          const std::uint64_t sub = (c * modulus[j]) % p;
          prod[i - s + j] = (prod[i - s + j] + p - sub) % p;
        }
        prod[i] = 0;
      }
      std::vector<std::uint32_t> r(s);
      for (std::uint32_t i = 0; i < s; ++i) r[i] = static_cast<std::uint32_t>(prod[i]);
      return pack(r);
    }

    std::uint32_t pow_slow(std::uint32_t a, std::uint64_t e) const {
      std::uint32_t result = 1;
      while (e) {
        if (e & 1) result = mul_slow(result, a);
        a = mul_slow(a, a);
        e >>= 1;
      }
      return result;
    }

    void build() {
      const auto factors = prime_factors(q - 1);
      bool found = false;
      for (std::uint32_t cand = 1; cand < q && !found; ++cand) {
        bool primitive = true;
        for (auto f : factors) {
          if (pow_slow(cand, (q - 1) / f) == 1) {
            primitive = false;
            break;
          }
        }
        if (primitive) {
          theta = {cand};
          found = true;
        }
      }
      require(found, ErrorKind::ReducibleModulus, "no primitive element found");

      exp.assign(2 * (q - 1), {0});
      log.assign(q, 0);
      std::uint32_t e = 1;
      for (std::uint32_t i = 0; i + 1 < q; ++i) {
        exp[i] = {e};
        log[e] = i;
        e = mul_slow(e, theta.index);
      }
      for (std::uint32_t i = 0; i + 1 < q; ++i) exp[i + q - 1] = exp[i];

      neg.resize(q);
      for (std::uint32_t v = 0; v < q; ++v) {
        auto d = digits(v);
        for (auto& c : d) c = (p - c) % p;
        neg[v] = pack(d);
      }

      if (s > 1 && q <= 1024) {
        add_table.resize(static_cast<std::size_t>(q) * q);
        for (std::uint32_t a = 0; a < q; ++a)
          for (std::uint32_t b = 0; b < q; ++b) add_table[static_cast<std::size_t>(a) * q + b] = add_digits(a, b);
      }

      trace.resize(q);
      for (std::uint32_t v = 0; v < q; ++v) {
        std::uint32_t acc = v, t = v;
        for (std::uint32_t i = 1; i < s; ++i) {
          t = t == 0 ? 0 : exp[(static_cast<std::uint64_t>(log[t]) * p) % (q - 1)].index;
          acc = add_digits(acc, t);
        }
        require(acc < p, ErrorKind::ReducibleModulus, "trace left the prime subfield");
        trace[v] = acc;
      }
    }
  };

  static std::uint32_t inverse_mod(std::uint32_t a, std::uint32_t p) {
    std::uint64_t result = 1, base = a % p, e = p - 2;
    while (e) {
      if (e & 1) result = result * base % p;
      base = base * base % p;
      e >>= 1;
    }
    return static_cast<std::uint32_t>(result);
  }

  // Remainder of f modulo monic g; both lowest degree first.
  static std::vector<std::uint32_t> poly_mod(std::vector<std::uint32_t> f, const std::vector<std::uint32_t>& g,
                                             std::uint32_t p) {
    const std::size_t dg = g.size() - 1;
    for (std::size_t i = f.size(); i-- > dg;) {
      const std::uint64_t c = f[i];
      if (c == 0) continue;
      for (std::size_t j = 0; j <= dg; ++j) {
        const std::uint64_t sub = (c * g[j]) % p;
        f[i - dg + j] = static_cast<std::uint32_t>((f[i - dg + j] + p - sub) % p);
      }
    }
    f.resize(dg);
    return f;
  }

  // Trial division by every monic polynomial of degree <= deg/2.
  static bool is_irreducible(const std::vector<std::uint32_t>& f, std::uint32_t p) {
    const std::size_t deg = f.size() - 1;
    for (std::size_t d = 1; d <= deg / 2; ++d) {
      std::uint64_t count = 1;
      for (std::size_t i = 0; i < d; ++i) count *= p;
      for (std::uint64_t k = 0; k < count; ++k) {
        std::vector<std::uint32_t> g(d + 1);
        std::uint64_t v = k;
        for (std::size_t i = 0; i < d; ++i) {
          g[i] = static_cast<std::uint32_t>(v % p);
          v /= p;
        }
        g[d] = 1;
        const auto r = poly_mod(f, g, p);
        bool zero = true;
        for (auto c : r) zero = zero && c == 0;
        if (zero) return false;
      }
    }
    return true;
  }

  static std::vector<std::uint32_t> find_irreducible(std::uint32_t p, std::uint32_t s) {
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < s; ++i) count *= p;
    for (std::uint64_t k = 0; k < count; ++k) {
      std::vector<std::uint32_t> m(s + 1);
      std::uint64_t v = k;
      for (std::uint32_t i = 0; i < s; ++i) {
        m[i] = static_cast<std::uint32_t>(v % p);
        v /= p;
      }
      m[s] = 1;
      if (is_irreducible(m, p)) return m;
    }
    fail(ErrorKind::ReducibleModulus, "no irreducible polynomial found");
  }

  std::shared_ptr<const Data> data_;
};

inline FieldSpec make_field(std::uint32_t p, std::uint32_t s,
                            std::optional<std::vector<std::uint32_t>> modulus = std::nullopt) {
  return FieldSpec::make(p, s, std::move(modulus));
}

/// Table mapping every element of `small` to its image in `big`, for
/// F_{p^s} inside F_{p^{sk}}. The generator x of `small` goes to the first
/// root (in enumeration order) of small's modulus in `big`.
inline std::vector<FieldElement> embedding(const FieldSpec& small, const FieldSpec& big) {
  require(small.p() == big.p() && big.s() % small.s() == 0, ErrorKind::InvalidArgument,
          "no embedding F_" + std::to_string(small.q()) + " -> F_" + std::to_string(big.q()));
  const auto& m = small.modulus();
  std::optional<FieldElement> root;
  for (std::uint32_t i = 0; i < big.q() && !root; ++i) {
    FieldElement x{i};
    FieldElement acc = FieldSpec::zero();
    for (std::size_t k = m.size(); k-- > 0;) acc = big.add(big.mul(acc, x), big.from_int(m[k]));
    if (acc.index == 0) root = x;
  }
  require(root.has_value(), ErrorKind::InvalidArgument, "modulus has no root in the extension");
  std::vector<FieldElement> image(small.q());
  for (std::uint32_t i = 0; i < small.q(); ++i) {
    const auto c = small.coeffs({i});
    FieldElement acc = FieldSpec::zero();
    for (std::size_t k = c.size(); k-- > 0;) acc = big.add(big.mul(acc, *root), big.from_int(c[k]));
    image[i] = acc;
  }
  return image;
}

}  // namespace agrip
