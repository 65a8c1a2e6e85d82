#pragma once
// The zero-finding maps for periodic orbits: G, its finite projection, the
// simplex-parameterized F_s with bordering rows, and the ODE-scaled variant.
//
// Unknowns live in Omega^M and are stored in a real parametrization of the
// symmetric subspace: for each Fourier component j the coordinates are
//   Re z_{j,0}, Re z_{j,1}, Im z_{j,1}, ..., Re z_{j,M}, Im z_{j,M}
// followed by rho = (x, a, psi, eta, alpha, beta). Any real matrix on these
// coordinates automatically maps the symmetric space to itself, which settles
// the symmetry requirements on the finite blocks of the approximate inverse.

#include "pocont/polyfield.hpp"

#include <Eigen/Dense>

namespace pocont {

struct SOutsideSimplex : Error {
  SOutsideSimplex() : Error("simplex coordinate outside the standard simplex") {}
};

struct Layout {
  int nseq = 0, M = 0, nrho = 0;
  int per() const { return 2 * M + 1; }
  int nfour() const { return nseq * per(); }
  int ndof() const { return nfour() + nrho; }
  int idx0(int j) const { return j * per(); }
  int idxr(int j, int k) const { return j * per() + 2 * k - 1; }  // k >= 1
  int idxi(int j, int k) const { return j * per() + 2 * k; }
  int irho(int s) const { return nfour() + s; }
  // scalar row indices within the scalar block (steady|amp|anchor|theta|border)
};

enum class MapMode { DDE_frequency, ODE_scaled };

struct OmegaNorm {
  std::vector<double> wz;    // per Fourier component
  std::vector<double> wrho;  // per rho slot
};

struct MapContext {
  const SystemSpec* spec = nullptr;
  MapMode mode = MapMode::DDE_frequency;
  double nu = 1.05;
  int M = 5;
  OmegaNorm norm;

  Layout lay() const { return Layout{spec->nseq, M, spec->rho.dim()}; }
  Layout lay_at(int band) const { return Layout{spec->nseq, band, spec->rho.dim()}; }
  int nscalar_base() const { return spec->rho.nsteady + 2 + spec->rho.neta; }
  static MapContext make(const SystemSpec* spec, int M, double nu);
};

// full unknown; tail is zero for numerical data
struct OmegaPoint {
  Layout lay;
  double nu = 1.05;
  Eigen::VectorXd v;
  TailNorm tail;

  OmegaPoint() = default;
  OmegaPoint(const Layout& l, double nu_) : lay(l), nu(nu_), v(Eigen::VectorXd::Zero(l.ndof())) {}
  double rho(int s) const { return v[lay.irho(s)]; }
  double& rho(int s) { return v[lay.irho(s)]; }
};

// interval view of a point or an s-interpolated family
struct IntervalU {
  FourierElement z;          // symmetric band-M data
  std::vector<IVal> rho;
  TailNorm tail;
};

FourierElement unpack_z(const Eigen::VectorXd& v, const Layout& lay, double nu);
Eigen::VectorXd pack_z(const FourierElement& z, const Layout& lay,
                       const Eigen::VectorXd* rhoPart = nullptr);
IntervalU to_interval(const OmegaPoint& u);
OmegaPoint mid_point(const IntervalU& u, const Layout& lay);

// complex-consistent inner product on packed coordinates:
// <u,v> = sum_k u_k conj(v_k) + rho-dot (real on the symmetric space)
double omega_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Layout& lay);
IVal omega_dot(const IVec& a, const IVec& b, const Layout& lay);

// Omega norm: max( sum_k max_j wz_j |z_{j,k}| nu^{|k|} (+tail), max_s wrho_s |rho_s| )
IVal omega_norm(const IntervalU& u, const MapContext& ctx);
IVal omega_norm_packed(const IVec& x, const Layout& lay, const MapContext& ctx);
double omega_norm_packed_mid(const Eigen::VectorXd& x, const Layout& lay, const MapContext& ctx);

// residual of the map: Fourier block (band up to q*M) and scalar block
struct ResidU {
  FourierElement four;
  std::vector<CIval> scal;  // steady | amplitude | anchor | theta | (border)
};

IVal resid_norm(const ResidU& r, const MapContext& ctx);  // Omega-style norm
IVec pack_resid(const ResidU& r, const Layout& layOut);

// frequency factor of the tail operator: psi in DDE mode, 1 in ODE mode
IVal tail_freq(const MapContext& ctx, const IntervalU& u);

// G rows (no bordering). zhat is the frozen anchor/amplitude reference orbit.
ResidU eval_G(const MapContext& ctx, const IntervalU& u, const FourierElement& zhat);

// derivative of G at u applied to a concrete direction (finite data)
ResidU apply_DG(const MapContext& ctx, const IntervalU& u, const FourierElement& zhat,
                const IntervalU& h);

// real-parameterized Jacobian of the projected map (Fourier rows truncated to
// band lay.M); rows = nfour + nscalar_base, cols = ndof
IMat jac_G(const MapContext& ctx, const IntervalU& u, const FourierElement& zhat);

// aligned per-simplex data
struct SimplexData {
  long id = -1;
  std::array<Eigen::VectorXd, 3> node;         // u_j
  std::array<Eigen::VectorXd, 3> phi1, phi2;   // aligned tangent bases
  std::array<double, 3> c1{}, c2{};            // anchors c_{j,i}
  int depth = 0;                                // adaptive refinement depth
  std::array<double, 2> scorner{{0.0, 0.0}};    // position in the parent simplex
  double sscale = 1.0;
};

// affine interpolants; s may be a point or an interval subset of the simplex
IntervalU interp_u(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2);
IVec interp_phi(const SimplexData& sd, int which, const IVal& s1, const IVal& s2);
IVal interp_c(const SimplexData& sd, int which, const IVal& s1, const IVal& s2);
FourierElement zhat_of(const MapContext& ctx, const SimplexData& sd, const IVal& s1,
                       const IVal& s2);

// F_s rows: eval_G plus the two s-linear bordering rows appended to scal
ResidU eval_Fs(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2,
               const IntervalU& u);

// bordered Jacobian including the two bordering rows (square ndof x ndof)
IMat jac_Fs(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2,
            const IntervalU& u);

// derivative of F_s at u in a concrete direction, bordering rows included
ResidU apply_DFs(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2,
                 const IntervalU& u, const IntervalU& h);

// partial derivative of s -> F_s(u) in direction (h1,h2) (only J_s rows move)
std::vector<CIval> dFs_ds(const MapContext& ctx, const SimplexData& sd, const IntervalU& u,
                          const IVal& h1, const IVal& h2);

// full bilinear second derivative D^2 F_s(u)[du, dv] (no s-derivatives)
ResidU apply_D2F(const MapContext& ctx, const IntervalU& u, const IntervalU& du,
                 const IntervalU& dv);

// mixed derivative d/ds [D F_s](u) applied to [t in R^2, h]: rows of J_s only
std::vector<CIval> dDFs_mixed(const MapContext& ctx, const SimplexData& sd, const IVal& t1,
                              const IVal& t2, const IntervalU& h);

}  // namespace pocont
