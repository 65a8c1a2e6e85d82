#include "pocont/interval.hpp"

#include <algorithm>

namespace pocont {

IVal ipi() {
  // double(pi) rounds down; pi lies between it and the next float
  double lo = 3.14159265358979311600;  // 0x1.921fb54442d18p+1
  return IVal(lo, nudge_up(lo));
}

namespace {

// exp on |r| <= 0.5 via Taylor series with explicit tail bound
IVal exp_small(const IVal& r) {
  const int N = 16;
  IVal term(1.0), sum(1.0);
  for (int k = 1; k <= N; ++k) {
    term = term * r / IVal((double)k);
    sum += term;
  }
  // tail: sum_{k>N} r^k/k! <= |r|^{N+1}/(N+1)! * 1/(1-|r|), |r|<=0.5
  IVal m(r.mag());
  IVal num = m;
  double fact = 1.0;
  for (int k = 2; k <= N + 1; ++k) {
    num = num * m;
    fact *= k;
  }
  IVal tail = num / IVal(fact) * IVal(2.0);
  return sum + IVal::sym(tail.hi);
}

double pow2_exact(int k) { return std::ldexp(1.0, k); }

IVal exp_point(double x) {
  if (x > 709.0) return IVal(std::exp(nudge_dn(x)) * 0.99, std::numeric_limits<double>::infinity());
  if (x < -745.0) return IVal(0.0, nudge_up(std::exp(nudge_up(x))));
  // x = k*ln2 + r with |r| <= ln2/2 < 0.5
  const double LN2 = 0.69314718055994530942;
  int k = (int)std::nearbyint(x / LN2);
  IVal ln2(nudge_dn(LN2), nudge_up(LN2));
  IVal r = IVal(x) - IVal((double)k) * ln2;
  IVal e = exp_small(r);
  return IVal(nudge_dn(e.lo * pow2_exact(k)), nudge_up(e.hi * pow2_exact(k)));
}

IVal log_point(double x) {
  if (x <= 0.0) throw Error("ilog of nonpositive value");
  int e;
  double m = std::frexp(x, &e);  // x = m*2^e, m in [0.5,1)
  // log(x) = e*ln2 + log(m); log(m) = 2*atanh((m-1)/(m+1)), |u| <= 1/3
  IVal u = IVal(m - 1.0) / IVal(m + 1.0);
  IVal u2 = u * u, term = u, sum = u;
  const int N = 30;
  for (int k = 1; k <= N; ++k) {
    term = term * u2;
    sum += term / IVal(2.0 * k + 1.0);
  }
  // tail <= |u|^{2N+3}/(2N+3) / (1-u^2)
  IVal mu(u.mag());
  IVal tail = mu;
  for (int k = 0; k < N + 1; ++k) tail = tail * mu * mu;
  tail = tail / (IVal(1.0) - mu * mu);
  sum = sum + IVal::sym(tail.hi);
  const double LN2 = 0.69314718055994530942;
  IVal ln2(nudge_dn(LN2), nudge_up(LN2));
  return IVal(2.0) * sum + IVal((double)e) * ln2;
}

// cos on |r| bounded by ~pi/2+slack, series with tail bound
IVal cos_small(const IVal& r) {
  IVal r2 = r * r;
  IVal term(1.0), sum(1.0);
  const int N = 14;
  for (int k = 1; k <= N; ++k) {
    term = -(term * r2) / IVal((2.0 * k - 1.0) * 2.0 * k);
    sum += term;
  }
  // tail <= |r|^{2N+2}/(2N+2)! * 2  (alternating once terms decrease)
  IVal m(r.mag());
  IVal p(1.0);
  double fact = 1.0;
  for (int k = 1; k <= 2 * N + 2; ++k) {
    p = p * m;
    fact *= k;
    if (fact > 1e300) { p = p * IVal(1e-300); fact *= 1e-300; }
  }
  IVal tail = p / IVal(fact) * IVal(2.0);
  return intersect(sum + IVal::sym(tail.hi), IVal(-1.0, 1.0));
}

IVal cos_point(double t) {
  IVal pi = ipi();
  double k = std::nearbyint(t / pi.mid());
  IVal r = IVal(t) - IVal(k) * pi;  // |r| <= pi/2 + rounding
  IVal c = cos_small(r);
  long long ki = (long long)k;
  return (ki % 2 == 0) ? c : -c;
}

}  // namespace

IVal iexp(const IVal& x) {
  IVal a = exp_point(x.lo), b = exp_point(x.hi);
  return IVal(std::max(0.0, a.lo), b.hi);
}

IVal ilog(const IVal& x) {
  if (x.lo <= 0.0) throw Error("ilog of interval touching zero");
  IVal a = log_point(x.lo), b = log_point(x.hi);
  return IVal(a.lo, b.hi);
}

IVal icos(const IVal& x) {
  if (!x.is_finite() || x.width() >= 6.3) return IVal(-1.0, 1.0);
  IVal a = cos_point(x.lo), b = cos_point(x.hi);
  IVal out = hull(a, b);
  // critical points k*pi inside [lo,hi]
  IVal pi = ipi();
  double klo = std::ceil(x.lo / pi.hi - 1e-12), khi = std::floor(x.hi / pi.lo + 1e-12);
  for (double k = klo; k <= khi; k += 1.0) {
    IVal kpi = IVal(k) * pi;
    if (kpi.hi >= x.lo && kpi.lo <= x.hi) {
      long long ki = (long long)k;
      out = hull(out, IVal((ki % 2 == 0) ? 1.0 : -1.0));
    }
  }
  return intersect(out, IVal(-1.0, 1.0));
}

IVal isin(const IVal& x) {
  IVal pi = ipi();
  return icos(x - pi * IVal(0.5));
}

IMat operator*(const IMat& A, const IMat& B) {
  if (A.cols != B.rows) throw DimensionMismatch("matrix product");
  IMat C(A.rows, B.cols);
  for (size_t i = 0; i < A.rows; ++i)
    for (size_t k = 0; k < A.cols; ++k) {
      const IVal& aik = A(i, k);
      if (aik.lo == 0.0 && aik.hi == 0.0) continue;
      for (size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

IMat operator-(const IMat& A, const IMat& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw DimensionMismatch("matrix difference");
  IMat C(A.rows, A.cols);
  for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] - B.a[i];
  return C;
}

IMat operator+(const IMat& A, const IMat& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw DimensionMismatch("matrix sum");
  IMat C(A.rows, A.cols);
  for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] + B.a[i];
  return C;
}

IVec operator*(const IMat& A, const IVec& x) {
  if (A.cols != x.size()) throw DimensionMismatch("matrix-vector product");
  IVec y(A.rows);
  for (size_t i = 0; i < A.rows; ++i)
    for (size_t j = 0; j < A.cols; ++j) y[i] += A(i, j) * x[j];
  return y;
}

IVal weighted_max_norm(const IVec& v, const std::vector<double>& w) {
  if (w.size() != v.size()) throw DimensionMismatch("weighted_max_norm");
  IVal out(0.0);
  for (size_t i = 0; i < v.size(); ++i) {
    if (w[i] <= 0.0) throw NonPositiveWeight();
    IVal m = IVal(w[i]) * iabs(v[i]);
    out = IVal(std::max(out.lo, m.lo), std::max(out.hi, m.hi));
  }
  return out;
}

IVal det2(const IVal& a11, const IVal& a12, const IVal& a21, const IVal& a22) {
  return a11 * a22 - a12 * a21;
}

Definiteness definite2(const IVal& a, const IVal& b, const IVal& c) {
  IVal det = a * c - b * b;
  if (det.lo > 0.0) {
    if (a.lo > 0.0 && c.lo > 0.0) return Definiteness::Positive;
    if (a.hi < 0.0 && c.hi < 0.0) return Definiteness::Negative;
    return Definiteness::Unknown;  // det>0 forces same-sign diagonal; intervals too wide
  }
  if (det.hi < 0.0) return Definiteness::Indefinite;
  return Definiteness::Unknown;
}

}  // namespace pocont
