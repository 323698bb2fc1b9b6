// Copyright 2026 The Dualrail Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/trace.hpp"

namespace dualrail {

using Rational = boost::rational<long long>;

/// Exact scalar of the form a + b*sqrt(2) with rational a, b.
/// Closed under the beamsplitter's 1/sqrt(2) factors, so the whole
/// transformation chain stays free of floating-point drift.
struct SqrtTwoCoeff {
  Rational a{0};  // rational part
  Rational b{0};  // coefficient of sqrt(2)

  SqrtTwoCoeff() = default;
  SqrtTwoCoeff(Rational ra, Rational rb) : a(std::move(ra)), b(std::move(rb)) {}
  static SqrtTwoCoeff integer(long long v) { return {Rational(v), Rational(0)}; }
  static SqrtTwoCoeff rational(long long num, long long den) {
    return {Rational(num, den), Rational(0)};
  }
  static SqrtTwoCoeff sqrt2() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return a.numerator() == 0 && b.numerator() == 0; }

  SqrtTwoCoeff operator+(const SqrtTwoCoeff& o) const { return {a + o.a, b + o.b}; }
  SqrtTwoCoeff operator-(const SqrtTwoCoeff& o) const { return {a - o.a, b - o.b}; }
  SqrtTwoCoeff operator-() const { return {-a, -b}; }
  SqrtTwoCoeff operator*(const SqrtTwoCoeff& o) const {
    // (a1 + b1 s)(a2 + b2 s) = a1 a2 + 2 b1 b2 + (a1 b2 + a2 b1) s,  s = sqrt(2)
    return {a * o.a + Rational(2) * b * o.b, a * o.b + o.a * b};
  }
  bool operator==(const SqrtTwoCoeff& o) const { return a == o.a && b == o.b; }
  bool operator!=(const SqrtTwoCoeff& o) const { return !(*this == o); }

  /// Multiplies by sqrt(2)^h for any integer h (negative divides).
  SqrtTwoCoeff times_sqrt2_pow(int h) const {
    SqrtTwoCoeff r = *this;
    // sqrt(2)^2 = 2, sqrt(2)^-1 = sqrt(2)/2.
    while (h >= 2) { r = {r.a * 2, r.b * 2}; h -= 2; }
    while (h <= -2) { r = {r.a / 2, r.b / 2}; h += 2; }
    if (h == 1) r = {Rational(2) * r.b, r.a};
    if (h == -1) r = {r.b, r.a / 2};
    return r;
  }

  double to_double() const {
    return boost::rational_cast<double>(a) +
           boost::rational_cast<double>(b) * 1.4142135623730951;
  }
};

inline SqrtTwoCoeff abs(const SqrtTwoCoeff& c) {
  return c.to_double() < 0.0 ? -c : c;
}

/// One quadrature operator in the (rail, temporal index, quadrature) basis.
struct BasisLabel {
  Rail rail = Rail::a;
  std::uint32_t k = 0;
  Quadrature quad = Quadrature::x;

  // Ordering (k, rail, quad) so that printed terms read left to right in time.
  friend bool operator<(const BasisLabel& l, const BasisLabel& r) {
    if (l.k != r.k) return l.k < r.k;
    if (l.rail != r.rail) return l.rail < r.rail;
    return l.quad < r.quad;
  }
  friend bool operator==(const BasisLabel& l, const BasisLabel& r) {
    return l.k == r.k && l.rail == r.rail && l.quad == r.quad;
  }
};

inline BasisLabel x_of(Rail rail, std::uint32_t k) { return {rail, k, Quadrature::x}; }
inline BasisLabel p_of(Rail rail, std::uint32_t k) { return {rail, k, Quadrature::p}; }

/// A linear combination of quadrature operators with exact coefficients.
class NullifierVector {
 public:
  NullifierVector() = default;

  static NullifierVector unit(const BasisLabel& l) {
    NullifierVector n;
    n.coeffs_[l] = SqrtTwoCoeff::integer(1);
    return n;
  }

  void add_term(const BasisLabel& l, const SqrtTwoCoeff& c) {
    if (c.is_zero()) return;
    auto it = coeffs_.find(l);
    if (it == coeffs_.end()) {
      coeffs_[l] = c;
    } else {
      it->second = it->second + c;
      if (it->second.is_zero()) coeffs_.erase(it);
    }
  }

  SqrtTwoCoeff coefficient(const BasisLabel& l) const {
    auto it = coeffs_.find(l);
    return it == coeffs_.end() ? SqrtTwoCoeff{} : it->second;
  }

  bool is_zero() const { return coeffs_.empty(); }
  std::size_t term_count() const { return coeffs_.size(); }
  const std::map<BasisLabel, SqrtTwoCoeff>& terms() const { return coeffs_; }

  NullifierVector operator+(const NullifierVector& o) const {
    NullifierVector r = *this;
    for (const auto& [l, c] : o.coeffs_) r.add_term(l, c);
    return r;
  }
  NullifierVector operator-(const NullifierVector& o) const {
    NullifierVector r = *this;
    for (const auto& [l, c] : o.coeffs_) r.add_term(l, -c);
    return r;
  }
  NullifierVector scaled(const SqrtTwoCoeff& s) const {
    NullifierVector r;
    for (const auto& [l, c] : coeffs_) r.add_term(l, c * s);
    return r;
  }

  bool operator==(const NullifierVector& o) const { return coeffs_ == o.coeffs_; }

  /// Rescales so the coefficient of the first (lowest-label) term is +1.
  /// Requires that coefficient to be purely rational or purely sqrt(2)-rational.
  NullifierVector normalized() const {
    if (coeffs_.empty()) throw DataError("normalized: zero vector is not a nullifier");
    const SqrtTwoCoeff& lead = coeffs_.begin()->second;
    SqrtTwoCoeff inv;
    if (lead.b.numerator() == 0) {
      inv = {Rational(1) / lead.a, Rational(0)};
    } else if (lead.a.numerator() == 0) {
      // 1/(b sqrt2) = sqrt2/(2 b)
      inv = {Rational(0), Rational(1) / (Rational(2) * lead.b)};
    } else {
      // 1/(a + b sqrt2) = (a - b sqrt2)/(a^2 - 2 b^2)
      const Rational den = lead.a * lead.a - Rational(2) * lead.b * lead.b;
      inv = {lead.a / den, -lead.b / den};
    }
    NullifierVector r = scaled(inv);
    if (r.coeffs_.begin()->second.to_double() < 0.0) r = r.scaled(SqrtTwoCoeff::integer(-1));
    return r;
  }

 private:
  std::map<BasisLabel, SqrtTwoCoeff> coeffs_;
};

enum class BsDirection { forward, inverse };

/// Beamsplitter substitution acting identically on x and p coefficients.
/// forward: the interaction with U a_A U^+ = (a_A - a_B)/sqrt2,
///          U a_B U^+ = (a_A + a_B)/sqrt2; inverse is its conjugate.
inline NullifierVector bs_transform(const NullifierVector& n, BsDirection dir) {
  NullifierVector out;
  const SqrtTwoCoeff half_sqrt2 = SqrtTwoCoeff::sqrt2().times_sqrt2_pow(-2);  // 1/sqrt2
  for (const auto& [l, c] : n.terms()) {
    const SqrtTwoCoeff ch = c * half_sqrt2;
    const BasisLabel on_a{Rail::a, l.k, l.quad};
    const BasisLabel on_b{Rail::b, l.k, l.quad};
    if (dir == BsDirection::forward) {
      if (l.rail == Rail::a) {
        out.add_term(on_a, ch);
        out.add_term(on_b, -ch);
      } else {
        out.add_term(on_a, ch);
        out.add_term(on_b, ch);
      }
    } else {
      if (l.rail == Rail::a) {
        out.add_term(on_a, ch);
        out.add_term(on_b, ch);
      } else {
        out.add_term(on_a, -ch);
        out.add_term(on_b, ch);
      }
    }
  }
  return out;
}

/// The asymmetric delay: every rail-B coefficient moves from slot k to k+1.
inline NullifierVector delay_transform(const NullifierVector& n) {
  NullifierVector out;
  for (const auto& [l, c] : n.terms()) {
    BasisLabel m = l;
    if (l.rail == Rail::b) m.k = l.k + 1;
    out.add_term(m, c);
  }
  return out;
}

/// Local phase redefinition on even slots: x -> p, p -> -x.
inline NullifierVector phase_redefinition(const NullifierVector& n) {
  NullifierVector out;
  for (const auto& [l, c] : n.terms()) {
    if (l.k % 2 == 0) {
      if (l.quad == Quadrature::x) {
        out.add_term(p_of(l.rail, l.k), c);
      } else {
        out.add_term(x_of(l.rail, l.k), -c);
      }
    } else {
      out.add_term(l, c);
    }
  }
  return out;
}

struct NullifierPair {
  NullifierVector x_type;  // X_k
  NullifierVector p_type;  // P_k
};

/// Unit-coefficient extended-EPR nullifiers:
///   X_k = x[A,k] + x[B,k] + x[A,k+1] - x[B,k+1]
///   P_k = p[A,k] + p[B,k] - p[A,k+1] + p[B,k+1]
inline NullifierPair exepr_nullifier(std::uint32_t k) {
  NullifierPair n;
  const SqrtTwoCoeff one = SqrtTwoCoeff::integer(1);
  n.x_type.add_term(x_of(Rail::a, k), one);
  n.x_type.add_term(x_of(Rail::b, k), one);
  n.x_type.add_term(x_of(Rail::a, k + 1), one);
  n.x_type.add_term(x_of(Rail::b, k + 1), -one);
  n.p_type.add_term(p_of(Rail::a, k), one);
  n.p_type.add_term(p_of(Rail::b, k), one);
  n.p_type.add_term(p_of(Rail::a, k + 1), -one);
  n.p_type.add_term(p_of(Rail::b, k + 1), one);
  return n;
}

/// Runs the full transformation chain on the initial squeezed-state
/// nullifiers {x[A,k], p[B,k]}: beamsplitter, delay, conjugate beamsplitter.
/// The results are proportional (factor 1/2) to exepr_nullifier(k).
inline NullifierPair derive_exepr_nullifiers(std::uint32_t k) {
  NullifierPair out;
  NullifierVector nx = NullifierVector::unit(x_of(Rail::a, k));
  NullifierVector np = NullifierVector::unit(p_of(Rail::b, k));
  for (NullifierVector* n : {&nx, &np}) {
    *n = bs_transform(*n, BsDirection::forward);
    *n = delay_transform(*n);
    *n = bs_transform(*n, BsDirection::inverse);
  }
  out.x_type = nx;
  out.p_type = np;
  return out;
}

/// Unit-coefficient weighted-cluster nullifiers:
///   H_[A,k] = 2 p[A,k] + x[A,k-1] + x[B,k-1] + x[A,k+1] - x[B,k+1]
///   H_[B,k] = 2 p[B,k] - x[A,k-1] - x[B,k-1] + x[A,k+1] - x[B,k+1]
inline std::pair<NullifierVector, NullifierVector> cluster_nullifier(std::uint32_t k) {
  if (k == 0) throw IndexError("cluster_nullifier: k must be >= 1 (needs slot k-1)");
  const SqrtTwoCoeff one = SqrtTwoCoeff::integer(1);
  const SqrtTwoCoeff two = SqrtTwoCoeff::integer(2);
  NullifierVector ha, hb;
  ha.add_term(p_of(Rail::a, k), two);
  ha.add_term(x_of(Rail::a, k - 1), one);
  ha.add_term(x_of(Rail::b, k - 1), one);
  ha.add_term(x_of(Rail::a, k + 1), one);
  ha.add_term(x_of(Rail::b, k + 1), -one);
  hb.add_term(p_of(Rail::b, k), two);
  hb.add_term(x_of(Rail::a, k - 1), -one);
  hb.add_term(x_of(Rail::b, k - 1), -one);
  hb.add_term(x_of(Rail::a, k + 1), one);
  hb.add_term(x_of(Rail::b, k + 1), -one);
  return {ha, hb};
}

/// Derives the cluster nullifiers from the extended-EPR set: combines
/// adjacent X or P nullifiers into the vector-space basis centred on slot k,
/// then applies the even-slot phase redefinition. Matches cluster_nullifier
/// exactly.
inline std::pair<NullifierVector, NullifierVector> derive_cluster_nullifiers(
    std::uint32_t k) {
  if (k == 0) throw IndexError("derive_cluster_nullifiers: k must be >= 1");
  NullifierVector a_combo, b_combo;
  if (k % 2 == 0) {
    // X'_{A,k} = X_{k-1} + X_k,  X'_{B,k} = -X_{k-1} + X_k
    const NullifierVector xm = exepr_nullifier(k - 1).x_type;
    const NullifierVector xk = exepr_nullifier(k).x_type;
    a_combo = xm + xk;
    b_combo = xk - xm;
  } else {
    // P'_{A,k} = -P_{k-1} + P_k,  P'_{B,k} = P_{k-1} + P_k
    const NullifierVector pm = exepr_nullifier(k - 1).p_type;
    const NullifierVector pk = exepr_nullifier(k).p_type;
    a_combo = pk - pm;
    b_combo = pm + pk;
  }
  return {phase_redefinition(a_combo), phase_redefinition(b_combo)};
}

/// Commutator [n1, n2] in units of i*hbar:
/// sum over modes of (c1x * c2p - c1p * c2x).
inline SqrtTwoCoeff commutator(const NullifierVector& n1, const NullifierVector& n2) {
  SqrtTwoCoeff total;
  for (const auto& [l, c] : n1.terms()) {
    const BasisLabel conj{l.rail, l.k,
                          l.quad == Quadrature::x ? Quadrature::p : Quadrature::x};
    const SqrtTwoCoeff other = n2.coefficient(conj);
    if (other.is_zero()) continue;
    if (l.quad == Quadrature::x) {
      total = total + c * other;
    } else {
      total = total - c * other;
    }
  }
  return total;
}

/// Numeric qumode values for one frame, addressed by (rail, quadrature, k).
class QumodeTable {
 public:
  void set_channel(Rail rail, Quadrature quad, std::vector<double> values) {
    values_[index(rail, quad)] = std::move(values);
  }
  const std::vector<double>& channel(Rail rail, Quadrature quad) const {
    return values_[index(rail, quad)];
  }
  bool has(const BasisLabel& l) const {
    return l.rail != Rail::none && l.k < values_[index(l.rail, l.quad)].size();
  }
  double value(const BasisLabel& l) const {
    const auto& v = values_[index(l.rail, l.quad)];
    if (l.k >= v.size()) {
      throw DataError("qumode table: missing record for k=" + std::to_string(l.k));
    }
    return v[l.k];
  }

 private:
  static std::size_t index(Rail rail, Quadrature quad) {
    return (rail == Rail::a ? 0 : 2) + (quad == Quadrature::x ? 0 : 1);
  }
  std::vector<double> values_[4];
};

/// Evaluates the linear combination on measured qumode values.
inline double evaluate(const NullifierVector& n, const QumodeTable& table) {
  double total = 0.0;
  for (const auto& [l, c] : n.terms()) {
    total += c.to_double() * table.value(l);
  }
  return total;
}

// ---- text formatting -------------------------------------------------------

inline std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  return os.str();
}

inline std::string to_string(const SqrtTwoCoeff& c) {
  if (c.b.numerator() == 0) return to_string(c.a);
  std::string sq = (c.b == Rational(1)) ? "sqrt2" : (to_string(c.b) + " sqrt2");
  if (c.a.numerator() == 0) return sq;
  return "(" + to_string(c.a) + " + " + sq + ")";
}

inline std::string to_string(const BasisLabel& l) {
  std::string s(1, to_char(l.quad));
  s += '[';
  s += to_char(l.rail);
  s += ',';
  s += std::to_string(l.k);
  s += ']';
  return s;
}

/// Renders e.g. "x[A,3] + x[B,3] + x[A,4] - x[B,4]".
inline std::string to_string(const NullifierVector& n) {
  if (n.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [l, c] : n.terms()) {
    const bool neg = c.to_double() < 0.0;
    const SqrtTwoCoeff mag = neg ? -c : c;
    if (first) {
      if (neg) os << '-';
      first = false;
    } else {
      os << (neg ? " - " : " + ");
    }
    if (!(mag.a == Rational(1) && mag.b.numerator() == 0)) os << to_string(mag) << ' ';
    os << to_string(l);
  }
  return os.str();
}

}  // namespace dualrail
