#pragma once
// Directed-rounding interval arithmetic over reals and complex rectangles.
// Endpoints are doubles; every elementary operation is computed in the
// default rounding mode and then nudged one ulp outward, so no global
// rounding-mode state is touched and values are safe to share across threads.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pocont {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivisionByZeroInterval : Error {
  DivisionByZeroInterval() : Error("division by interval containing zero") {}
};
struct NonPositiveWeight : Error {
  NonPositiveWeight() : Error("norm weight must be strictly positive") {}
};
struct DimensionMismatch : Error {
  DimensionMismatch(const std::string& w) : Error("dimension mismatch: " + w) {}
};

inline double nudge_up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}
inline double nudge_dn(double x) {
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

struct IVal {
  double lo = 0.0, hi = 0.0;

  IVal() = default;
  IVal(double v) : lo(v), hi(v) {}
  IVal(double a, double b) : lo(a), hi(b) {}

  static IVal hull(double a, double b) { return a <= b ? IVal(a, b) : IVal(b, a); }
  static IVal sym(double r) { return IVal(-r, r); }  // [-r, r]
  static IVal unit() { return IVal(-1.0, 1.0); }

  double mid() const { return 0.5 * (lo + hi); }
  double rad() const { return nudge_up(std::max(nudge_up(hi - mid()), nudge_up(mid() - lo))); }
  double width() const { return nudge_up(hi - lo); }
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }  // sup |x|
  double mig() const {                                                   // inf |x|
    if (lo <= 0.0 && hi >= 0.0) return 0.0;
    return std::min(std::fabs(lo), std::fabs(hi));
  }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const IVal& o) const { return lo <= o.lo && o.hi <= hi; }
  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }

  IVal operator-() const { return IVal(-hi, -lo); }
};

inline IVal operator+(const IVal& a, const IVal& b) {
  return IVal(nudge_dn(a.lo + b.lo), nudge_up(a.hi + b.hi));
}
inline IVal operator-(const IVal& a, const IVal& b) {
  return IVal(nudge_dn(a.lo - b.hi), nudge_up(a.hi - b.lo));
}
inline IVal operator*(const IVal& a, const IVal& b) {
  double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return IVal(nudge_dn(std::min(std::min(p1, p2), std::min(p3, p4))),
              nudge_up(std::max(std::max(p1, p2), std::max(p3, p4))));
}
inline IVal operator/(const IVal& a, const IVal& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0) throw DivisionByZeroInterval();
  double q1 = a.lo / b.lo, q2 = a.lo / b.hi, q3 = a.hi / b.lo, q4 = a.hi / b.hi;
  return IVal(nudge_dn(std::min(std::min(q1, q2), std::min(q3, q4))),
              nudge_up(std::max(std::max(q1, q2), std::max(q3, q4))));
}
inline IVal& operator+=(IVal& a, const IVal& b) { a = a + b; return a; }
inline IVal& operator-=(IVal& a, const IVal& b) { a = a - b; return a; }
inline IVal& operator*=(IVal& a, const IVal& b) { a = a * b; return a; }

inline IVal hull(const IVal& a, const IVal& b) {
  return IVal(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}
inline IVal intersect(const IVal& a, const IVal& b) {
  return IVal(std::max(a.lo, b.lo), std::min(a.hi, b.hi));  // may be empty (lo>hi)
}
inline IVal iabs(const IVal& a) { return IVal(a.mig(), a.mag()); }

// sqrt is correctly rounded per IEEE-754, one ulp suffices.
inline IVal isqrt(const IVal& a) {
  if (a.lo < 0.0) throw Error("isqrt of interval with negative part");
  return IVal(std::max(0.0, nudge_dn(std::sqrt(a.lo))), nudge_up(std::sqrt(a.hi)));
}

IVal ipi();        // rigorous enclosure of pi
IVal iexp(const IVal& x);
IVal ilog(const IVal& x);   // requires x.lo > 0
IVal icos(const IVal& x);
IVal isin(const IVal& x);

// upper bound of sqrt(a^2+b^2) for nonnegative a,b
inline double hypot_up(double a, double b) {
  IVal s = IVal(a) * IVal(a) + IVal(b) * IVal(b);
  return nudge_up(std::sqrt(s.hi));
}

// ---------------------------------------------------------------------------
// complex rectangles

struct CIval {
  IVal re, im;
  CIval() = default;
  CIval(double r) : re(r), im(0.0) {}
  CIval(const IVal& r) : re(r), im(0.0) {}
  CIval(const IVal& r, const IVal& i) : re(r), im(i) {}
  CIval(double r, double i) : re(r), im(i) {}

  double magUB() const { return hypot_up(re.mag(), im.mag()); }
  double magLB() const {  // inf |z| over the rectangle
    double a = re.mig(), b = im.mig();
    double s = std::max(0.0, nudge_dn(a * a + b * b));
    return std::max(0.0, nudge_dn(std::sqrt(s)));
  }
  CIval conj() const { return CIval(re, -im); }
  bool contains(double r, double i) const { return re.contains(r) && im.contains(i); }
};

inline CIval operator+(const CIval& a, const CIval& b) { return CIval(a.re + b.re, a.im + b.im); }
inline CIval operator-(const CIval& a, const CIval& b) { return CIval(a.re - b.re, a.im - b.im); }
inline CIval operator-(const CIval& a) { return CIval(-a.re, -a.im); }
inline CIval operator*(const CIval& a, const CIval& b) {
  return CIval(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}
inline CIval operator*(const IVal& a, const CIval& b) { return CIval(a * b.re, a * b.im); }
inline CIval& operator+=(CIval& a, const CIval& b) { a = a + b; return a; }
inline CIval& operator-=(CIval& a, const CIval& b) { a = a - b; return a; }
inline CIval mul_i(const CIval& a) { return CIval(-a.im, a.re); }  // i*a

// ---------------------------------------------------------------------------
// interval vectors and dense matrices (used by the bound computations; sizes
// here are tiny, a few hundred at most)

struct IVec {
  std::vector<IVal> v;
  IVec() = default;
  explicit IVec(size_t n) : v(n) {}
  size_t size() const { return v.size(); }
  IVal& operator[](size_t i) { return v[i]; }
  const IVal& operator[](size_t i) const { return v[i]; }
};

struct IMat {
  size_t rows = 0, cols = 0;
  std::vector<IVal> a;
  IMat() = default;
  IMat(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
  IVal& operator()(size_t i, size_t j) { return a[i * cols + j]; }
  const IVal& operator()(size_t i, size_t j) const { return a[i * cols + j]; }
  static IMat eye(size_t n) {
    IMat m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = IVal(1.0);
    return m;
  }
};

IMat operator*(const IMat& A, const IMat& B);
IMat operator-(const IMat& A, const IMat& B);
IMat operator+(const IMat& A, const IMat& B);
IVec operator*(const IMat& A, const IVec& x);

// weighted max norm: upper bound of sup over representatives of max_i w_i|v_i|
IVal weighted_max_norm(const IVec& v, const std::vector<double>& w);

// determinant enclosure of a 2x2 interval matrix
IVal det2(const IVal& a11, const IVal& a12, const IVal& a21, const IVal& a22);

enum class Definiteness { Positive, Negative, Indefinite, Unknown };

// definiteness of the symmetric interval matrix [a b; b c] (off-diagonal
// entries are the same interval variable, so the determinant uses b^2)
Definiteness definite2(const IVal& a, const IVal& b, const IVal& c);

}  // namespace pocont
