#pragma once
// Polynomial delay vector fields in Fourier form: monomials
//   coeff * rho^m * prod_p zeta_{mu_{j_p}}(psi) z_{c_p}
// with their first and second derivatives, the automatic blow-up of
// polynomial fields, steady-state and boundary-condition maps.
//
// Scalar unknown vector rho = (x_1..x_ns, a, psi, eta_1..eta_ne, alpha, beta).
// The monomial multi-index is trivial in the psi slot; psi only enters through
// the delay rotations.

#include "pocont/fourier.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <string>

namespace pocont {

struct NotBandLimited : Error {
  NotBandLimited() : Error("operation requires band-limited input") {}
};
struct TaylorRemainderDivergent : Error {
  TaylorRemainderDivergent() : Error("Taylor remainder does not converge for argument") {}
};
struct UnknownSystem : Error {
  UnknownSystem(const std::string& n) : Error("unknown system: " + n) {}
};

// rho slot layout helpers
struct RhoLayout {
  int nsteady = 0, neta = 0;
  int dim() const { return nsteady + neta + 4; }
  int ix(int i) const { return i; }                  // x_i, 0-based
  int ia() const { return nsteady; }                 // amplitude a
  int ipsi() const { return nsteady + 1; }           // frequency psi (or mu in ODE mode)
  int ieta(int i) const { return nsteady + 2 + i; }  // eta_i
  int ialpha() const { return nsteady + neta + 2; }
  int ibeta() const { return nsteady + neta + 3; }
  std::string slot_name(int s) const;
  int slot_from_name(const std::string& n) const;  // -1 if not a rho name
};

struct DelayMonomial {
  double coeff = 0.0;
  std::vector<int> rhoPowers;                    // length RhoLayout::dim(), psi power 0
  std::vector<std::pair<int, int>> factors;      // (component, delay index), sorted
  int target = 0;
};

struct PolyVectorField {
  int nseq = 0;               // Fourier components
  RhoLayout rho;
  std::vector<double> delays; // mu_1..mu_J
  std::vector<DelayMonomial> terms;

  int degree() const;
  bool all_delays_zero() const;
  void canonicalize();        // sort factor lists, merge like terms
};

// scalar multivariate polynomial over variables
//   (y_1..y_nseq, x_1..x_ns, a, psi, eta.., alpha, beta)
// where y_j stands for z_j(0) = sum_k z_{j,k}
struct ScalarPoly {
  struct Term {
    double coeff = 0.0;
    std::vector<int> pow;  // length nvars
  };
  int nvars = 0;
  std::vector<Term> terms;

  CIval eval(const std::vector<CIval>& v) const;
  ScalarPoly deriv(int var) const;
};

// boundary-condition row: poly + sum_i pre_i(vars) * Fn_i(arg_i(vars));
// Fn is exp or g(a, arg) with g(a,y) = (e^{-ay}-1)/a extended by g(0,y) = -y
struct BCRow {
  enum class Fn { Exp, G };
  struct Special {
    Fn fn = Fn::Exp;
    ScalarPoly pre;  // empty terms means the constant prefactor 1
    ScalarPoly arg;
  };
  ScalarPoly poly;
  std::vector<Special> specials;
};

struct SystemSpec {
  std::string name;
  bool ode = false;           // zero-delay system meant for the mu-scaled map
  int nseq = 0;
  RhoLayout rho;
  std::vector<double> delays;
  PolyVectorField field;
  std::vector<ScalarPoly> steady;   // nsteady rows, no y/a/psi dependence
  std::vector<BCRow> boundary;      // neta rows
  int taylorOrder = 20;

  int nvars() const { return nseq + rho.dim(); }  // ScalarPoly variable count
};

// ---------------------------------------------------------------------------
// rigorous scalar special functions (series with explicit remainder)

// phi^{(j)}(w) for phi(w) = (e^w - 1)/w = sum_i w^i/(i+1)!
CIval phi_series(int j, const CIval& w, int order);
// g(a,y), dg/da, dg/dy and second derivatives, all rigorous
CIval g_eval(const IVal& a, const CIval& y, int order);
CIval g_dy(const IVal& a, const CIval& y, int order);
CIval g_da(const IVal& a, const CIval& y, int order);
CIval g_dyy(const IVal& a, const CIval& y, int order);
CIval g_day(const IVal& a, const CIval& y, int order);
CIval g_daa(const IVal& a, const CIval& y, int order);
CIval cexp(const CIval& w);  // rigorous complex exp enclosure

// ---------------------------------------------------------------------------
// field evaluation and derivatives

// f(zeta(psi)z, rho); output band = max over monomials of summed factor bands
FourierElement eval_f(const PolyVectorField& f, const FourierElement& z,
                      const std::vector<IVal>& rho, const IVal& psi);

// directional derivative D_z f applied to h
FourierElement apply_dz(const PolyVectorField& f, const FourierElement& z,
                        const std::vector<IVal>& rho, const IVal& psi,
                        const FourierElement& h);

// materialized D_z f structure: h  ->  sum over terms  cof * zeta_mu h_comp,
// one entry per (monomial, differentiated factor), cof scaled by coeff*rho^m
struct DzTerm {
  int target = 0, comp = 0;
  double mu = 0.0;
  Seq cof;
};
std::vector<DzTerm> dz_terms(const PolyVectorField& f, const FourierElement& z,
                             const std::vector<IVal>& rho, const IVal& psi);

// d/dpsi f(zeta(psi)z, rho)
FourierElement eval_dpsi(const PolyVectorField& f, const FourierElement& z,
                         const std::vector<IVal>& rho, const IVal& psi);

// d/drho_s f for every rho slot (psi slot entry is identically zero)
std::vector<FourierElement> eval_drho(const PolyVectorField& f, const FourierElement& z,
                                      const std::vector<IVal>& rho, const IVal& psi);

// direction in the full unknown (Fourier part, rho part); used for bilinear forms
struct Direction {
  FourierElement z;         // may be empty (ncomp=0) meaning zero
  std::vector<IVal> rho;    // full rho vector including psi slot; empty means zero
  bool has_z() const { return z.ncomp > 0; }
  IVal rho_at(int s) const { return rho.empty() ? IVal(0.0) : rho[(size_t)s]; }
};

// full bilinear second derivative of (z,rho) -> f(zeta(psi(rho))z, rho)
// in directions u and v (zz, z-psi, psi-psi, z-rho, psi-rho, rho-rho blocks)
FourierElement apply_d2(const PolyVectorField& f, const FourierElement& z,
                        const std::vector<IVal>& rho, const IVal& psi,
                        const Direction& u, const Direction& v);

enum class D2Which { zz, zpsi, psipsi };
// selected pure second derivative blocks, for testing against finite differences
FourierElement d2_block(const PolyVectorField& f, const FourierElement& z,
                        const std::vector<IVal>& rho, const IVal& psi, D2Which which,
                        const FourierElement& h1, const FourierElement& h2);

// ---------------------------------------------------------------------------
// blow-up of a polynomial field in the original variables y

struct RawField {
  int ny = 0, J = 1;
  std::vector<double> delays;  // size J
  struct Term {
    double coeff = 0.0;
    int target = 0;
    std::vector<std::pair<int, int>> yfactors;  // (component, delay index)
    int palpha = 0, pbeta = 0;
  };
  std::vector<Term> terms;
};

// y = x + a z; returns the rescaled field a^{-1}(f(x+az)-f(x)) as a polynomial
// in (z, x, a, alpha, beta); exact division by construction
PolyVectorField blowup(const RawField& f);
// f(x,...,x,alpha,beta) rows as ScalarPoly over the SystemSpec variable layout
std::vector<ScalarPoly> steady_from(const RawField& f);

// ---------------------------------------------------------------------------
// steady state and boundary condition evaluation

std::vector<IVal> eval_steady(const SystemSpec& spec, const std::vector<IVal>& rho);
// derivative of steady row r with respect to rho slot s
std::vector<std::vector<IVal>> steady_jacobian(const SystemSpec& spec,
                                               const std::vector<IVal>& rho);

// variable vector for ScalarPoly evaluation: y = sum_k z_k then rho
std::vector<CIval> bc_vars(const SystemSpec& spec, const FourierElement& z,
                           const std::vector<IVal>& rho);

std::vector<CIval> eval_boundary(const SystemSpec& spec, const FourierElement& z,
                                 const std::vector<IVal>& rho);
CIval bc_row_eval(const SystemSpec& spec, const BCRow& row, const std::vector<CIval>& vars);
// gradient with respect to all nvars variables
std::vector<CIval> bc_row_grad(const SystemSpec& spec, const BCRow& row,
                               const std::vector<CIval>& vars);
// directional second derivative given two direction vectors over the variables
CIval bc_row_d2(const SystemSpec& spec, const BCRow& row, const std::vector<CIval>& vars,
                const std::vector<CIval>& d1, const std::vector<CIval>& d2);

// ---------------------------------------------------------------------------
// system definition files

SystemSpec parse_system_file(std::istream& in);
SystemSpec parse_system_path(const std::string& path);
void emit_system_file(const SystemSpec& spec, std::ostream& out);

}  // namespace pocont
