#pragma once
// Band-limited two-sided Fourier coefficient sequences with interval entries,
// the convolution algebra on ell^1_nu, the derivative operator K and the
// delay rotation zeta_mu(psi).

#include "pocont/interval.hpp"

#include <complex>

namespace pocont {

// scalar two-sided sequence, indices -M..M
struct Seq {
  int M = 0;
  double nu = 1.05;
  std::vector<CIval> c;  // size 2M+1, index k stored at k+M

  Seq() = default;
  Seq(int M_, double nu_) : M(M_), nu(nu_), c(2 * M_ + 1) {}

  CIval& at(int k) { return c[(size_t)(k + M)]; }
  const CIval& at(int k) const { return c[(size_t)(k + M)]; }
  CIval get(int k) const { return (k < -M || k > M) ? CIval() : c[(size_t)(k + M)]; }

  static Seq e0(double nu) {
    Seq s(0, nu);
    s.at(0) = CIval(1.0);
    return s;
  }
  static Seq delta(int k, double nu) {
    Seq s(std::abs(k), nu);
    s.at(k) = CIval(1.0);
    return s;
  }
};

Seq operator+(const Seq& a, const Seq& b);
Seq operator-(const Seq& a, const Seq& b);
Seq operator*(const CIval& s, const Seq& a);
Seq conv(const Seq& a, const Seq& b);         // support grows to Ma+Mb
Seq apply_K(const Seq& a);                    // (Kz)_k = k z_k
Seq apply_K2(const Seq& a);                   // (K^2 z)_k = k^2 z_k
Seq delay_rotate(const Seq& a, const IVal& psi, double mu);  // z_k -> e^{ik psi mu} z_k
Seq project(const Seq& a, int j1, int j2);    // keep j1 <= |k| <= j2
Seq pad(const Seq& a, int newM);
CIval sum_coeffs(const Seq& a);               // z(0) = sum_k z_k

// upper bound of sum_k |z_k| nu^{|k|}; .lo is a valid lower bound
IVal seq_ell1nu_norm(const Seq& a);
// upper bound of sum_k |k| |z_k| nu^{|k|}  (norm of Kz)
IVal seq_K_ell1nu_norm(const Seq& a);

// nu^{|k|} as an interval power (exact repeated multiplication, outward)
IVal nu_pow(double nu, int k);

// vector-valued element: ncomp scalar sequences sharing (M, nu)
struct FourierElement {
  int ncomp = 0, M = 0;
  double nu = 1.05;
  bool symmetric = true;  // z_k = conj(z_{-k}) componentwise intended
  std::vector<CIval> c;   // (j,k) -> c[j*(2M+1) + k + M]

  FourierElement() = default;
  FourierElement(int nc, int M_, double nu_)
      : ncomp(nc), M(M_), nu(nu_), c((size_t)nc * (2 * M_ + 1)) {}

  CIval& at(int j, int k) { return c[(size_t)j * (2 * M + 1) + (size_t)(k + M)]; }
  const CIval& at(int j, int k) const { return c[(size_t)j * (2 * M + 1) + (size_t)(k + M)]; }
  CIval get(int j, int k) const { return (k < -M || k > M) ? CIval() : at(j, k); }

  Seq comp(int j) const;
  void set_comp(int j, const Seq& s);  // s.M must be <= M
};

FourierElement operator+(const FourierElement& a, const FourierElement& b);
FourierElement operator-(const FourierElement& a, const FourierElement& b);
FourierElement scale(const IVal& s, const FourierElement& a);
FourierElement pad(const FourierElement& a, int newM);
FourierElement project(const FourierElement& a, int j1, int j2);
FourierElement apply_K(const FourierElement& a);
FourierElement apply_K2(const FourierElement& a);
FourierElement delay_rotate(const FourierElement& a, const IVal& psi, double mu);
std::vector<CIval> sum_coeffs(const FourierElement& a);

// enforce z_k = conj(z_{-k}) by averaging the two (valid only for data
// construction, not for rigorous enclosures)
void symmetrize(FourierElement& a);
double symmetry_defect(const FourierElement& a);

// ell^1_nu norm with componentwise weighted max vector norm first:
//   sum_k ( max_j w_j |z_{j,k}| ) nu^{|k|}
IVal ell1nu_norm(const FourierElement& a, const std::vector<double>& w);
// per-component scalar norm sum_k |z_{j,k}| nu^{|k|}
IVal comp_norm(const FourierElement& a, int j);

// bilinear form <v,w> = sum_k sum_j v_{j,k} conj(w_{j,k})
CIval inner(const FourierElement& v, const FourierElement& w);

// analytic tail bound: the part of an element with support |k| >= startIndex
struct TailNorm {
  IVal bound;         // >= 0
  int startIndex = 0;
};

}  // namespace pocont
