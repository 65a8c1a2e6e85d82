#include "pocont/fourier.hpp"

#include <algorithm>

namespace pocont {

IVal nu_pow(double nu, int k) {
  IVal out(1.0);
  IVal base(nu);
  for (int i = 0; i < std::abs(k); ++i) out = out * base;
  return out;
}

Seq operator+(const Seq& a, const Seq& b) {
  Seq out(std::max(a.M, b.M), a.nu);
  for (int k = -out.M; k <= out.M; ++k) out.at(k) = a.get(k) + b.get(k);
  return out;
}

Seq operator-(const Seq& a, const Seq& b) {
  Seq out(std::max(a.M, b.M), a.nu);
  for (int k = -out.M; k <= out.M; ++k) out.at(k) = a.get(k) - b.get(k);
  return out;
}

Seq operator*(const CIval& s, const Seq& a) {
  Seq out = a;
  for (auto& x : out.c) x = s * x;
  return out;
}

Seq conv(const Seq& a, const Seq& b) {
  Seq out(a.M + b.M, a.nu);
  for (int k1 = -a.M; k1 <= a.M; ++k1) {
    const CIval& x = a.at(k1);
    if (x.re.lo == 0 && x.re.hi == 0 && x.im.lo == 0 && x.im.hi == 0) continue;
    for (int k2 = -b.M; k2 <= b.M; ++k2) out.at(k1 + k2) += x * b.at(k2);
  }
  return out;
}

Seq apply_K(const Seq& a) {
  Seq out = a;
  for (int k = -a.M; k <= a.M; ++k) out.at(k) = IVal((double)k) * a.at(k);
  return out;
}

Seq apply_K2(const Seq& a) {
  Seq out = a;
  for (int k = -a.M; k <= a.M; ++k) out.at(k) = IVal((double)k * (double)k) * a.at(k);
  return out;
}

Seq delay_rotate(const Seq& a, const IVal& psi, double mu) {
  if (mu == 0.0 || (psi.lo == 0.0 && psi.hi == 0.0)) return a;
  Seq out = a;
  for (int k = -a.M; k <= a.M; ++k) {
    IVal arg = IVal((double)k) * psi * IVal(mu);
    CIval rot(icos(arg), isin(arg));
    out.at(k) = rot * a.at(k);
  }
  return out;
}

Seq project(const Seq& a, int j1, int j2) {
  Seq out(a.M, a.nu);
  for (int k = -a.M; k <= a.M; ++k)
    if (std::abs(k) >= j1 && std::abs(k) <= j2) out.at(k) = a.at(k);
  return out;
}

Seq pad(const Seq& a, int newM) {
  Seq out(newM, a.nu);
  for (int k = -a.M; k <= a.M; ++k)
    if (std::abs(k) <= newM) out.at(k) = a.at(k);
  return out;
}

CIval sum_coeffs(const Seq& a) {
  CIval s;
  for (const auto& x : a.c) s += x;
  return s;
}

IVal seq_ell1nu_norm(const Seq& a) {
  IVal out(0.0);
  for (int k = -a.M; k <= a.M; ++k) {
    const CIval& x = a.at(k);
    IVal m(x.magLB(), x.magUB());
    out += m * nu_pow(a.nu, k);
  }
  return IVal(std::max(0.0, out.lo), out.hi);
}

IVal seq_K_ell1nu_norm(const Seq& a) {
  IVal out(0.0);
  for (int k = -a.M; k <= a.M; ++k) {
    const CIval& x = a.at(k);
    IVal m(x.magLB(), x.magUB());
    out += IVal(std::fabs((double)k)) * m * nu_pow(a.nu, k);
  }
  return IVal(std::max(0.0, out.lo), out.hi);
}

Seq FourierElement::comp(int j) const {
  Seq s(M, nu);
  for (int k = -M; k <= M; ++k) s.at(k) = at(j, k);
  return s;
}

void FourierElement::set_comp(int j, const Seq& s) {
  if (s.M > M) throw DimensionMismatch("set_comp band too large");
  for (int k = -M; k <= M; ++k) at(j, k) = s.get(k);
}

FourierElement operator+(const FourierElement& a, const FourierElement& b) {
  if (a.ncomp != b.ncomp) throw DimensionMismatch("FourierElement sum");
  FourierElement out(a.ncomp, std::max(a.M, b.M), a.nu);
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -out.M; k <= out.M; ++k) out.at(j, k) = a.get(j, k) + b.get(j, k);
  return out;
}

FourierElement operator-(const FourierElement& a, const FourierElement& b) {
  if (a.ncomp != b.ncomp) throw DimensionMismatch("FourierElement difference");
  FourierElement out(a.ncomp, std::max(a.M, b.M), a.nu);
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -out.M; k <= out.M; ++k) out.at(j, k) = a.get(j, k) - b.get(j, k);
  return out;
}

FourierElement scale(const IVal& s, const FourierElement& a) {
  FourierElement out = a;
  for (auto& x : out.c) x = CIval(s) * x;
  return out;
}

FourierElement pad(const FourierElement& a, int newM) {
  FourierElement out(a.ncomp, newM, a.nu);
  out.symmetric = a.symmetric;
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -a.M; k <= a.M; ++k)
      if (std::abs(k) <= newM) out.at(j, k) = a.at(j, k);
  return out;
}

FourierElement project(const FourierElement& a, int j1, int j2) {
  FourierElement out(a.ncomp, a.M, a.nu);
  out.symmetric = a.symmetric;
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -a.M; k <= a.M; ++k)
      if (std::abs(k) >= j1 && std::abs(k) <= j2) out.at(j, k) = a.at(j, k);
  return out;
}

FourierElement apply_K(const FourierElement& a) {
  FourierElement out = a;
  out.symmetric = false;  // K maps Symm to anti-conjugate-symmetric
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -a.M; k <= a.M; ++k) out.at(j, k) = IVal((double)k) * a.at(j, k);
  return out;
}

FourierElement apply_K2(const FourierElement& a) {
  FourierElement out = a;
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -a.M; k <= a.M; ++k) out.at(j, k) = IVal((double)k * (double)k) * a.at(j, k);
  return out;
}

FourierElement delay_rotate(const FourierElement& a, const IVal& psi, double mu) {
  if (mu == 0.0) return a;
  FourierElement out = a;
  for (int k = -a.M; k <= a.M; ++k) {
    IVal arg = IVal((double)k) * psi * IVal(mu);
    CIval rot(icos(arg), isin(arg));
    for (int j = 0; j < a.ncomp; ++j) out.at(j, k) = rot * a.at(j, k);
  }
  return out;
}

std::vector<CIval> sum_coeffs(const FourierElement& a) {
  std::vector<CIval> out((size_t)a.ncomp);
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = -a.M; k <= a.M; ++k) out[(size_t)j] += a.at(j, k);
  return out;
}

void symmetrize(FourierElement& a) {
  for (int j = 0; j < a.ncomp; ++j) {
    a.at(j, 0) = CIval(a.at(j, 0).re, IVal(0.0));
    for (int k = 1; k <= a.M; ++k) {
      CIval y = CIval(IVal(0.5)) * (a.at(j, k) + a.at(j, -k).conj());
      a.at(j, k) = y;
      a.at(j, -k) = y.conj();
    }
  }
  a.symmetric = true;
}

double symmetry_defect(const FourierElement& a) {
  double d = 0.0;
  for (int j = 0; j < a.ncomp; ++j)
    for (int k = 0; k <= a.M; ++k) {
      CIval diff = a.at(j, k) - a.at(j, -k).conj();
      d = std::max(d, diff.magUB());
    }
  return d;
}

IVal ell1nu_norm(const FourierElement& a, const std::vector<double>& w) {
  if ((int)w.size() != a.ncomp) throw DimensionMismatch("ell1nu_norm weights");
  for (double x : w)
    if (x <= 0) throw NonPositiveWeight();
  IVal out(0.0);
  for (int k = -a.M; k <= a.M; ++k) {
    IVal m(0.0);
    for (int j = 0; j < a.ncomp; ++j) {
      const CIval& x = a.at(j, k);
      IVal mj = IVal(w[(size_t)j]) * IVal(x.magLB(), x.magUB());
      m = IVal(std::max(m.lo, mj.lo), std::max(m.hi, mj.hi));
    }
    out += m * nu_pow(a.nu, k);
  }
  return IVal(std::max(0.0, out.lo), out.hi);
}

IVal comp_norm(const FourierElement& a, int j) {
  IVal out(0.0);
  for (int k = -a.M; k <= a.M; ++k) {
    const CIval& x = a.at(j, k);
    out += IVal(x.magLB(), x.magUB()) * nu_pow(a.nu, k);
  }
  return IVal(std::max(0.0, out.lo), out.hi);
}

CIval inner(const FourierElement& v, const FourierElement& w) {
  if (v.ncomp != w.ncomp) throw DimensionMismatch("inner");
  CIval s;
  int M = std::min(v.M, w.M);  // entries beyond the common band multiply zero
  for (int j = 0; j < v.ncomp; ++j)
    for (int k = -M; k <= M; ++k) s += v.at(j, k) * w.at(j, k).conj();
  return s;
}

}  // namespace pocont
