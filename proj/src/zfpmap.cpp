#include "pocont/zfpmap.hpp"

namespace pocont {

MapContext MapContext::make(const SystemSpec* spec, int M, double nu) {
  MapContext ctx;
  ctx.spec = spec;
  ctx.mode = spec->ode ? MapMode::ODE_scaled : MapMode::DDE_frequency;
  ctx.nu = nu;
  ctx.M = M;
  ctx.norm.wz.assign((size_t)spec->nseq, 1.0);
  ctx.norm.wrho.assign((size_t)spec->rho.dim(), 1.0);
  return ctx;
}

FourierElement unpack_z(const Eigen::VectorXd& v, const Layout& lay, double nu) {
  FourierElement z(lay.nseq, lay.M, nu);
  for (int j = 0; j < lay.nseq; ++j) {
    z.at(j, 0) = CIval(v[lay.idx0(j)], 0.0);
    for (int k = 1; k <= lay.M; ++k) {
      double re = v[lay.idxr(j, k)], im = v[lay.idxi(j, k)];
      z.at(j, k) = CIval(re, im);
      z.at(j, -k) = CIval(re, -im);
    }
  }
  return z;
}

Eigen::VectorXd pack_z(const FourierElement& z, const Layout& lay, const Eigen::VectorXd* rhoPart) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(lay.ndof());
  for (int j = 0; j < lay.nseq; ++j) {
    v[lay.idx0(j)] = z.get(j, 0).re.mid();
    for (int k = 1; k <= std::min(lay.M, z.M); ++k) {
      v[lay.idxr(j, k)] = z.get(j, k).re.mid();
      v[lay.idxi(j, k)] = z.get(j, k).im.mid();
    }
  }
  if (rhoPart)
    for (int s = 0; s < lay.nrho; ++s) v[lay.irho(s)] = (*rhoPart)[s];
  return v;
}

IntervalU to_interval(const OmegaPoint& u) {
  IntervalU out;
  out.z = unpack_z(u.v, u.lay, u.nu);
  out.rho.resize((size_t)u.lay.nrho);
  for (int s = 0; s < u.lay.nrho; ++s) out.rho[(size_t)s] = IVal(u.rho(s));
  out.tail = u.tail;
  return out;
}

OmegaPoint mid_point(const IntervalU& u, const Layout& lay) {
  OmegaPoint p(lay, u.z.nu);
  for (int j = 0; j < lay.nseq; ++j) {
    p.v[lay.idx0(j)] = u.z.get(j, 0).re.mid();
    for (int k = 1; k <= lay.M; ++k) {
      p.v[lay.idxr(j, k)] = u.z.get(j, k).re.mid();
      p.v[lay.idxi(j, k)] = u.z.get(j, k).im.mid();
    }
  }
  for (int s = 0; s < lay.nrho; ++s) p.v[lay.irho(s)] = u.rho[(size_t)s].mid();
  return p;
}

double omega_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Layout& lay) {
  double s = 0.0;
  for (int j = 0; j < lay.nseq; ++j) {
    s += a[lay.idx0(j)] * b[lay.idx0(j)];
    for (int k = 1; k <= lay.M; ++k)
      s += 2.0 * (a[lay.idxr(j, k)] * b[lay.idxr(j, k)] + a[lay.idxi(j, k)] * b[lay.idxi(j, k)]);
  }
  for (int r = 0; r < lay.nrho; ++r) s += a[lay.irho(r)] * b[lay.irho(r)];
  return s;
}

IVal omega_dot(const IVec& a, const IVec& b, const Layout& lay) {
  IVal s(0.0);
  for (int j = 0; j < lay.nseq; ++j) {
    s += a[(size_t)lay.idx0(j)] * b[(size_t)lay.idx0(j)];
    for (int k = 1; k <= lay.M; ++k)
      s += IVal(2.0) * (a[(size_t)lay.idxr(j, k)] * b[(size_t)lay.idxr(j, k)] +
                        a[(size_t)lay.idxi(j, k)] * b[(size_t)lay.idxi(j, k)]);
  }
  for (int r = 0; r < lay.nrho; ++r) s += a[(size_t)lay.irho(r)] * b[(size_t)lay.irho(r)];
  return s;
}

IVal omega_norm(const IntervalU& u, const MapContext& ctx) {
  IVal four = ell1nu_norm(u.z, ctx.norm.wz);
  if (u.tail.bound.hi > 0) four += u.tail.bound;
  IVal out = four;
  for (int s = 0; s < (int)u.rho.size(); ++s) {
    IVal m = IVal(ctx.norm.wrho[(size_t)s]) * iabs(u.rho[(size_t)s]);
    out = IVal(std::max(out.lo, m.lo), std::max(out.hi, m.hi));
  }
  return out;
}

IVal omega_norm_packed(const IVec& x, const Layout& lay, const MapContext& ctx) {
  IVal four(0.0);
  for (int k = 0; k <= lay.M; ++k) {
    IVal m(0.0);
    for (int j = 0; j < lay.nseq; ++j) {
      IVal a;
      if (k == 0)
        a = iabs(x[(size_t)lay.idx0(j)]);
      else {
        double hi = hypot_up(iabs(x[(size_t)lay.idxr(j, k)]).hi, iabs(x[(size_t)lay.idxi(j, k)]).hi);
        a = IVal(0.0, hi);
      }
      a = IVal(ctx.norm.wz[(size_t)j]) * a;
      m = IVal(std::max(m.lo, a.lo), std::max(m.hi, a.hi));
    }
    four += IVal(k == 0 ? 1.0 : 2.0) * m * nu_pow(ctx.nu, k);
  }
  IVal out = four;
  for (int s = 0; s < lay.nrho; ++s) {
    IVal m = IVal(ctx.norm.wrho[(size_t)s]) * iabs(x[(size_t)lay.irho(s)]);
    out = IVal(std::max(out.lo, m.lo), std::max(out.hi, m.hi));
  }
  return out;
}

double omega_norm_packed_mid(const Eigen::VectorXd& x, const Layout& lay, const MapContext& ctx) {
  double four = 0.0;
  for (int k = 0; k <= lay.M; ++k) {
    double m = 0.0;
    for (int j = 0; j < lay.nseq; ++j) {
      double a = (k == 0) ? std::fabs(x[lay.idx0(j)])
                          : std::hypot(x[lay.idxr(j, k)], x[lay.idxi(j, k)]);
      m = std::max(m, ctx.norm.wz[(size_t)j] * a);
    }
    four += (k == 0 ? 1.0 : 2.0) * m * std::pow(ctx.nu, k);
  }
  double out = four;
  for (int s = 0; s < lay.nrho; ++s)
    out = std::max(out, ctx.norm.wrho[(size_t)s] * std::fabs(x[lay.irho(s)]));
  return out;
}

IVal resid_norm(const ResidU& r, const MapContext& ctx) {
  IVal four = ell1nu_norm(r.four, ctx.norm.wz);
  IVal out = four;
  for (const auto& s : r.scal) {
    IVal m(s.magLB(), s.magUB());
    out = IVal(std::max(out.lo, m.lo), std::max(out.hi, m.hi));
  }
  return out;
}

IVec pack_resid(const ResidU& r, const Layout& layOut) {
  IVec x((size_t)layOut.ndof());
  for (int j = 0; j < layOut.nseq; ++j) {
    x[(size_t)layOut.idx0(j)] = r.four.get(j, 0).re;
    for (int k = 1; k <= layOut.M; ++k) {
      x[(size_t)layOut.idxr(j, k)] = r.four.get(j, k).re;
      x[(size_t)layOut.idxi(j, k)] = r.four.get(j, k).im;
    }
  }
  for (int s = 0; s < layOut.nrho && s < (int)r.scal.size(); ++s)
    x[(size_t)layOut.irho(s)] = r.scal[(size_t)s].re;
  return x;
}

IVal tail_freq(const MapContext& ctx, const IntervalU& u) {
  if (ctx.mode == MapMode::DDE_frequency) return u.rho[(size_t)ctx.spec->rho.ipsi()];
  return IVal(1.0);
}

namespace {

FourierElement iK_elem(const FourierElement& a) {
  FourierElement out = apply_K(a);
  for (auto& x : out.c) x = mul_i(x);
  out.symmetric = a.symmetric;
  return out;
}

// -psi i K z truncated into the band of out
void add_minus_psi_iKz(FourierElement& out, const FourierElement& z, const IVal& psi) {
  for (int j = 0; j < z.ncomp; ++j)
    for (int k = -z.M; k <= z.M; ++k) {
      if (std::abs(k) > out.M) continue;
      out.at(j, k) -= CIval(psi * IVal((double)k)) * mul_i(z.at(j, k));
    }
}

}  // namespace

ResidU eval_G(const MapContext& ctx, const IntervalU& u, const FourierElement& zhat) {
  if (u.tail.bound.hi > 0) throw Error("eval_G requires zero tail");
  const SystemSpec& spec = *ctx.spec;
  IVal psi = u.rho[(size_t)spec.rho.ipsi()];
  ResidU r;
  if (ctx.mode == MapMode::DDE_frequency) {
    r.four = eval_f(spec.field, u.z, u.rho, psi);
    add_minus_psi_iKz(r.four, u.z, psi);
  } else {
    r.four = scale(psi, eval_f(spec.field, u.z, u.rho, IVal(0.0)));  // psi slot holds mu
    add_minus_psi_iKz(r.four, u.z, IVal(1.0));
  }
  auto st = eval_steady(spec, u.rho);
  for (auto& s : st) r.scal.push_back(CIval(s));
  r.scal.push_back(inner(u.z, apply_K2(zhat)) - CIval(1.0));
  r.scal.push_back(inner(u.z, iK_elem(zhat)));
  auto th = eval_boundary(spec, u.z, u.rho);
  for (auto& t : th) r.scal.push_back(t);
  return r;
}

ResidU apply_DG(const MapContext& ctx, const IntervalU& u, const FourierElement& zhat,
                const IntervalU& h) {
  const SystemSpec& spec = *ctx.spec;
  int ipsi = spec.rho.ipsi();
  IVal psi = u.rho[(size_t)ipsi];
  IVal hpsi = h.rho[(size_t)ipsi];
  ResidU r;
  if (ctx.mode == MapMode::DDE_frequency) {
    r.four = apply_dz(spec.field, u.z, u.rho, psi, h.z);
    add_minus_psi_iKz(r.four, h.z, psi);
    if (!(hpsi.lo == 0 && hpsi.hi == 0)) {
      FourierElement dp = eval_dpsi(spec.field, u.z, u.rho, psi);
      r.four = r.four + scale(hpsi, dp);
      add_minus_psi_iKz(r.four, u.z, hpsi);
    }
    auto dr = eval_drho(spec.field, u.z, u.rho, psi);
    for (int s = 0; s < spec.rho.dim(); ++s) {
      if (s == ipsi) continue;
      IVal hs = h.rho[(size_t)s];
      if (hs.lo == 0 && hs.hi == 0) continue;
      r.four = r.four + scale(hs, dr[(size_t)s]);
    }
  } else {
    r.four = scale(psi, apply_dz(spec.field, u.z, u.rho, IVal(0.0), h.z));
    add_minus_psi_iKz(r.four, h.z, IVal(1.0));
    if (!(hpsi.lo == 0 && hpsi.hi == 0))
      r.four = r.four + scale(hpsi, eval_f(spec.field, u.z, u.rho, IVal(0.0)));
    auto dr = eval_drho(spec.field, u.z, u.rho, IVal(0.0));
    for (int s = 0; s < spec.rho.dim(); ++s) {
      if (s == ipsi) continue;
      IVal hs = h.rho[(size_t)s];
      if (hs.lo == 0 && hs.hi == 0) continue;
      r.four = r.four + scale(psi * hs, dr[(size_t)s]);
    }
  }
  // scalar rows
  auto sj = steady_jacobian(spec, u.rho);
  for (const auto& row : sj) {
    IVal acc(0.0);
    for (int s = 0; s < spec.rho.dim(); ++s) acc += row[(size_t)s] * h.rho[(size_t)s];
    r.scal.push_back(CIval(acc));
  }
  r.scal.push_back(inner(h.z, apply_K2(zhat)));
  r.scal.push_back(inner(h.z, iK_elem(zhat)));
  auto vars = bc_vars(spec, u.z, u.rho);
  auto hy = sum_coeffs(h.z);
  for (const auto& row : spec.boundary) {
    auto grad = bc_row_grad(spec, row, vars);
    CIval acc;
    for (int j = 0; j < spec.nseq; ++j) acc += grad[(size_t)j] * hy[(size_t)j];
    for (int s = 0; s < spec.rho.dim(); ++s)
      acc += grad[(size_t)(spec.nseq + s)] * CIval(h.rho[(size_t)s]);
    r.scal.push_back(acc);
  }
  return r;
}

namespace {

// complex (2M+1)x(2M+1) accumulation block per (target, input comp) pair
struct CBlock {
  int M;
  std::vector<CIval> a;
  CBlock(int M_) : M(M_), a((size_t)(2 * M_ + 1) * (2 * M_ + 1)) {}
  CIval& at(int kout, int kin) {
    return a[(size_t)(kout + M) * (2 * M + 1) + (size_t)(kin + M)];
  }
  const CIval& at(int kout, int kin) const {
    return a[(size_t)(kout + M) * (2 * M + 1) + (size_t)(kin + M)];
  }
};

void block_to_real(IMat& J, const CBlock& B, const Layout& lay, int j0, int j) {
  int M = lay.M;
  for (int kin = 0; kin <= M; ++kin) {
    if (kin == 0) {
      int col = lay.idx0(j);
      // output k'=0 row: true value is real
      J(lay.idx0(j0), col) += B.at(0, 0).re;
      for (int ko = 1; ko <= M; ++ko) {
        J(lay.idxr(j0, ko), col) += B.at(ko, 0).re;
        J(lay.idxi(j0, ko), col) += B.at(ko, 0).im;
      }
    } else {
      int cr = lay.idxr(j, kin), ci = lay.idxi(j, kin);
      for (int ko = 0; ko <= M; ++ko) {
        CIval A = B.at(ko, kin), Bc = B.at(ko, -kin);
        if (ko == 0) {
          J(lay.idx0(j0), cr) += A.re + Bc.re;
          J(lay.idx0(j0), ci) += Bc.im - A.im;
        } else {
          J(lay.idxr(j0, ko), cr) += A.re + Bc.re;
          J(lay.idxr(j0, ko), ci) += Bc.im - A.im;
          J(lay.idxi(j0, ko), cr) += A.im + Bc.im;
          J(lay.idxi(j0, ko), ci) += A.re - Bc.re;
        }
      }
    }
  }
}

// real row of the functional h -> <h, w> for conjugate-symmetric w
void inner_row(IMat& J, int row, const FourierElement& w, const Layout& lay, const IVal& scale) {
  for (int j = 0; j < lay.nseq; ++j) {
    J(row, lay.idx0(j)) += scale * w.get(j, 0).re;
    for (int k = 1; k <= lay.M; ++k) {
      J(row, lay.idxr(j, k)) += scale * IVal(2.0) * w.get(j, k).re;
      J(row, lay.idxi(j, k)) += scale * IVal(2.0) * w.get(j, k).im;
    }
  }
}

// real column from a complex-valued Fourier vector (band truncated to lay.M)
void vec_col(IMat& J, int col, const FourierElement& g, const Layout& lay, int rowBase) {
  for (int j = 0; j < lay.nseq; ++j) {
    J(rowBase + lay.idx0(j), col) += g.get(j, 0).re;
    for (int k = 1; k <= lay.M; ++k) {
      J(rowBase + lay.idxr(j, k), col) += g.get(j, k).re;
      J(rowBase + lay.idxi(j, k), col) += g.get(j, k).im;
    }
  }
}

}  // namespace

IMat jac_G(const MapContext& ctx, const IntervalU& u, const FourierElement& zhat) {
  const SystemSpec& spec = *ctx.spec;
  Layout lay = ctx.lay();
  int ipsi = spec.rho.ipsi();
  IVal psi = u.rho[(size_t)ipsi];
  int nrows = lay.nfour() + ctx.nscalar_base();
  IMat J((size_t)nrows, (size_t)lay.ndof());

  bool dde = ctx.mode == MapMode::DDE_frequency;
  IVal fieldScale = dde ? IVal(1.0) : psi;  // ODE: mu multiplies the field
  IVal rotPsi = dde ? psi : IVal(0.0);

  // Fourier block, z columns
  std::vector<CBlock> blocks;
  for (int i = 0; i < spec.nseq * spec.nseq; ++i) blocks.emplace_back(lay.M);
  IVal diagPsi = dde ? psi : IVal(1.0);
  for (int j = 0; j < spec.nseq; ++j)
    for (int k = -lay.M; k <= lay.M; ++k)
      blocks[(size_t)(j * spec.nseq + j)].at(k, k) -= mul_i(CIval(diagPsi * IVal((double)k)));
  auto terms = dz_terms(spec.field, u.z, u.rho, rotPsi);
  for (const auto& t : terms) {
    CBlock& B = blocks[(size_t)(t.target * spec.nseq + t.comp)];
    for (int kin = -lay.M; kin <= lay.M; ++kin) {
      CIval rot(1.0);
      if (dde && t.mu != 0.0) {
        IVal arg = IVal((double)kin) * psi * IVal(t.mu);
        rot = CIval(icos(arg), isin(arg));
      }
      rot = CIval(fieldScale) * rot;
      for (int ko = -lay.M; ko <= lay.M; ++ko) {
        int d = ko - kin;
        if (d < -t.cof.M || d > t.cof.M) continue;
        B.at(ko, kin) += t.cof.at(d) * rot;
      }
    }
  }
  for (int j0 = 0; j0 < spec.nseq; ++j0)
    for (int j = 0; j < spec.nseq; ++j)
      block_to_real(J, blocks[(size_t)(j0 * spec.nseq + j)], lay, j0, j);

  // Fourier rows, rho columns
  {
    FourierElement dpsiCol(spec.nseq, lay.M, ctx.nu);
    if (dde) {
      FourierElement dp = eval_dpsi(spec.field, u.z, u.rho, psi);
      dpsiCol = dp;  // band may exceed M; vec_col truncates
      // -iKz part
      FourierElement mz = iK_elem(u.z);
      dpsiCol = dpsiCol - mz;
    } else {
      dpsiCol = eval_f(spec.field, u.z, u.rho, IVal(0.0));
    }
    vec_col(J, lay.irho(ipsi), dpsiCol, lay, 0);
    auto dr = eval_drho(spec.field, u.z, u.rho, rotPsi);
    for (int s = 0; s < spec.rho.dim(); ++s) {
      if (s == ipsi) continue;
      vec_col(J, lay.irho(s), scale(fieldScale, dr[(size_t)s]), lay, 0);
    }
  }

  // scalar rows
  int base = lay.nfour();
  auto sj = steady_jacobian(spec, u.rho);
  for (size_t r = 0; r < sj.size(); ++r)
    for (int s = 0; s < spec.rho.dim(); ++s) J((size_t)base + r, (size_t)lay.irho(s)) += sj[r][(size_t)s];
  int rAmp = base + spec.rho.nsteady;
  inner_row(J, rAmp, apply_K2(zhat), lay, IVal(1.0));
  inner_row(J, rAmp + 1, iK_elem(zhat), lay, IVal(1.0));
  auto vars = bc_vars(spec, u.z, u.rho);
  for (int r = 0; r < spec.rho.neta; ++r) {
    int row = rAmp + 2 + r;
    auto grad = bc_row_grad(spec, spec.boundary[(size_t)r], vars);
    for (int j = 0; j < spec.nseq; ++j) {
      IVal gy = grad[(size_t)j].re;
      J(row, (size_t)lay.idx0(j)) += gy;
      for (int k = 1; k <= lay.M; ++k) J(row, (size_t)lay.idxr(j, k)) += IVal(2.0) * gy;
    }
    for (int s = 0; s < spec.rho.dim(); ++s)
      J(row, (size_t)lay.irho(s)) += grad[(size_t)(spec.nseq + s)].re;
  }
  return J;
}

// ---------------------------------------------------------------------------
// simplex interpolants

namespace {

IVec affine_interp(const std::array<Eigen::VectorXd, 3>& w, const IVal& s1, const IVal& s2) {
  IVec out((size_t)w[0].size());
  for (int i = 0; i < w[0].size(); ++i) {
    IVal v(w[0][i]);
    v += s1 * (IVal(w[1][i]) - IVal(w[0][i]));
    v += s2 * (IVal(w[2][i]) - IVal(w[0][i]));
    out[(size_t)i] = v;
  }
  return out;
}

FourierElement unpack_z_interval(const IVec& v, const Layout& lay, double nu) {
  FourierElement z(lay.nseq, lay.M, nu);
  for (int j = 0; j < lay.nseq; ++j) {
    z.at(j, 0) = CIval(v[(size_t)lay.idx0(j)], IVal(0.0));
    for (int k = 1; k <= lay.M; ++k) {
      IVal re = v[(size_t)lay.idxr(j, k)], im = v[(size_t)lay.idxi(j, k)];
      z.at(j, k) = CIval(re, im);
      z.at(j, -k) = CIval(re, -im);
    }
  }
  return z;
}

}  // namespace

IntervalU interp_u(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2) {
  Layout lay = ctx.lay();
  IVec v = affine_interp(sd.node, s1, s2);
  IntervalU u;
  u.z = unpack_z_interval(v, lay, ctx.nu);
  u.rho.resize((size_t)lay.nrho);
  for (int s = 0; s < lay.nrho; ++s) u.rho[(size_t)s] = v[(size_t)lay.irho(s)];
  return u;
}

IVec interp_phi(const SimplexData& sd, int which, const IVal& s1, const IVal& s2) {
  return affine_interp(which == 0 ? sd.phi1 : sd.phi2, s1, s2);
}

IVal interp_c(const SimplexData& sd, int which, const IVal& s1, const IVal& s2) {
  const auto& c = which == 0 ? sd.c1 : sd.c2;
  return IVal(c[0]) + s1 * (IVal(c[1]) - IVal(c[0])) + s2 * (IVal(c[2]) - IVal(c[0]));
}

FourierElement zhat_of(const MapContext& ctx, const SimplexData& sd, const IVal& s1,
                       const IVal& s2) {
  Layout lay = ctx.lay();
  return unpack_z_interval(affine_interp(sd.node, s1, s2), lay, ctx.nu);
}

namespace {

IVec pack_interval(const IntervalU& u, const Layout& lay) {
  IVec v((size_t)lay.ndof());
  for (int j = 0; j < lay.nseq; ++j) {
    v[(size_t)lay.idx0(j)] = u.z.get(j, 0).re;
    for (int k = 1; k <= lay.M; ++k) {
      v[(size_t)lay.idxr(j, k)] = u.z.get(j, k).re;
      v[(size_t)lay.idxi(j, k)] = u.z.get(j, k).im;
    }
  }
  for (int s = 0; s < lay.nrho; ++s) v[(size_t)lay.irho(s)] = u.rho[(size_t)s];
  return v;
}

}  // namespace

ResidU eval_Fs(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2,
               const IntervalU& u) {
  FourierElement zh = zhat_of(ctx, sd, s1, s2);
  ResidU r = eval_G(ctx, u, zh);
  Layout lay = ctx.lay();
  IVec up = pack_interval(u, lay);
  for (int b = 0; b < 2; ++b) {
    IVec phi = interp_phi(sd, b, s1, s2);
    r.scal.push_back(CIval(omega_dot(phi, up, lay) - interp_c(sd, b, s1, s2)));
  }
  return r;
}

IMat jac_Fs(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2,
            const IntervalU& u) {
  Layout lay = ctx.lay();
  FourierElement zh = zhat_of(ctx, sd, s1, s2);
  IMat G = jac_G(ctx, u, zh);
  IMat J((size_t)lay.ndof(), (size_t)lay.ndof());
  for (size_t i = 0; i < G.rows; ++i)
    for (size_t j = 0; j < G.cols; ++j) J(i, j) = G(i, j);
  size_t rb = (size_t)(lay.nfour() + ctx.nscalar_base());
  for (int b = 0; b < 2; ++b) {
    IVec phi = interp_phi(sd, b, s1, s2);
    for (int j = 0; j < lay.nseq; ++j) {
      J(rb + (size_t)b, (size_t)lay.idx0(j)) = phi[(size_t)lay.idx0(j)];
      for (int k = 1; k <= lay.M; ++k) {
        J(rb + (size_t)b, (size_t)lay.idxr(j, k)) = IVal(2.0) * phi[(size_t)lay.idxr(j, k)];
        J(rb + (size_t)b, (size_t)lay.idxi(j, k)) = IVal(2.0) * phi[(size_t)lay.idxi(j, k)];
      }
    }
    for (int s = 0; s < lay.nrho; ++s) J(rb + (size_t)b, (size_t)lay.irho(s)) = phi[(size_t)lay.irho(s)];
  }
  return J;
}

ResidU apply_DFs(const MapContext& ctx, const SimplexData& sd, const IVal& s1, const IVal& s2,
                 const IntervalU& u, const IntervalU& h) {
  FourierElement zh = zhat_of(ctx, sd, s1, s2);
  ResidU r = apply_DG(ctx, u, zh, h);
  Layout lay = ctx.lay();
  IVec hp = pack_interval(h, lay);
  for (int b = 0; b < 2; ++b) {
    IVec phi = interp_phi(sd, b, s1, s2);
    r.scal.push_back(CIval(omega_dot(phi, hp, lay)));
  }
  return r;
}

std::vector<CIval> dFs_ds(const MapContext& ctx, const SimplexData& sd, const IntervalU& u,
                          const IVal& h1, const IVal& h2) {
  const SystemSpec& spec = *ctx.spec;
  Layout lay = ctx.lay();
  // zhat' h = h1 (z1-z0) + h2 (z2-z0), likewise phi' and c'
  IVec dnode((size_t)lay.ndof());
  for (int i = 0; i < lay.ndof(); ++i)
    dnode[(size_t)i] = h1 * IVal(sd.node[1][i] - sd.node[0][i]) +
                       h2 * IVal(sd.node[2][i] - sd.node[0][i]);
  FourierElement dzh = unpack_z_interval(dnode, lay, ctx.nu);

  std::vector<CIval> out((size_t)(ctx.nscalar_base() + 2));
  size_t rAmp = (size_t)spec.rho.nsteady;
  out[rAmp] = inner(u.z, apply_K2(dzh));
  out[rAmp + 1] = inner(u.z, iK_elem(dzh));
  IVec up = pack_interval(u, lay);
  for (int b = 0; b < 2; ++b) {
    IVec dphi((size_t)lay.ndof());
    const auto& ph = b == 0 ? sd.phi1 : sd.phi2;
    for (int i = 0; i < lay.ndof(); ++i)
      dphi[(size_t)i] = h1 * IVal(ph[1][i] - ph[0][i]) + h2 * IVal(ph[2][i] - ph[0][i]);
    const auto& cc = b == 0 ? sd.c1 : sd.c2;
    IVal dc = h1 * IVal(cc[1] - cc[0]) + h2 * IVal(cc[2] - cc[0]);
    out[(size_t)(ctx.nscalar_base() + b)] = CIval(omega_dot(dphi, up, lay) - dc);
  }
  return out;
}

ResidU apply_D2F(const MapContext& ctx, const IntervalU& u, const IntervalU& du,
                 const IntervalU& dv) {
  const SystemSpec& spec = *ctx.spec;
  int ipsi = spec.rho.ipsi();
  IVal psi = u.rho[(size_t)ipsi];
  ResidU r;
  Direction U, V;
  U.z = du.z;
  U.rho = du.rho;
  V.z = dv.z;
  V.rho = dv.rho;
  if (ctx.mode == MapMode::DDE_frequency) {
    r.four = apply_d2(spec.field, u.z, u.rho, psi, U, V);
    // second derivative of -psi iKz: mixed terms
    FourierElement mix = scale(du.rho[(size_t)ipsi], iK_elem(dv.z)) +
                         scale(dv.rho[(size_t)ipsi], iK_elem(du.z));
    r.four = r.four - mix;
  } else {
    // d^2 [mu f]: mu-cross terms plus mu * d^2 f (no rotations)
    auto Df = [&](const IntervalU& d) {
      FourierElement g = apply_dz(spec.field, u.z, u.rho, IVal(0.0), d.z);
      auto dr = eval_drho(spec.field, u.z, u.rho, IVal(0.0));
      for (int s = 0; s < spec.rho.dim(); ++s) {
        if (s == ipsi) continue;
        IVal ds = d.rho[(size_t)s];
        if (ds.lo == 0 && ds.hi == 0) continue;
        g = g + scale(ds, dr[(size_t)s]);
      }
      return g;
    };
    r.four = scale(du.rho[(size_t)ipsi], Df(dv)) + scale(dv.rho[(size_t)ipsi], Df(du)) +
             scale(psi, apply_d2(spec.field, u.z, u.rho, IVal(0.0), U, V));
  }
  // steady rows: polynomial Hessian applied to the rho directions
  {
    std::vector<CIval> vars((size_t)spec.nvars());
    for (int s = 0; s < spec.rho.dim(); ++s) vars[(size_t)(spec.nseq + s)] = CIval(u.rho[(size_t)s]);
    for (const auto& row : spec.steady) {
      CIval acc;
      for (int s = 0; s < spec.rho.dim(); ++s) {
        IVal dus = du.rho[(size_t)s];
        if (dus.lo == 0 && dus.hi == 0) continue;
        ScalarPoly ds = row.deriv(spec.nseq + s);
        for (int t = 0; t < spec.rho.dim(); ++t) {
          IVal dvt = dv.rho[(size_t)t];
          if (dvt.lo == 0 && dvt.hi == 0) continue;
          acc += ds.deriv(spec.nseq + t).eval(vars) * CIval(dus * dvt);
        }
      }
      r.scal.push_back(acc);
    }
  }
  r.scal.push_back(CIval());  // amplitude row is linear in u
  r.scal.push_back(CIval());  // anchor row is linear in u
  {
    auto vars = bc_vars(spec, u.z, u.rho);
    auto d1y = sum_coeffs(du.z);
    auto d2y = sum_coeffs(dv.z);
    std::vector<CIval> d1((size_t)spec.nvars()), d2((size_t)spec.nvars());
    for (int j = 0; j < spec.nseq; ++j) {
      d1[(size_t)j] = d1y[(size_t)j];
      d2[(size_t)j] = d2y[(size_t)j];
    }
    for (int s = 0; s < spec.rho.dim(); ++s) {
      d1[(size_t)(spec.nseq + s)] = CIval(du.rho[(size_t)s]);
      d2[(size_t)(spec.nseq + s)] = CIval(dv.rho[(size_t)s]);
    }
    for (const auto& row : spec.boundary)
      r.scal.push_back(bc_row_d2(spec, row, vars, d1, d2));
  }
  return r;
}

std::vector<CIval> dDFs_mixed(const MapContext& ctx, const SimplexData& sd, const IVal& t1,
                              const IVal& t2, const IntervalU& h) {
  const SystemSpec& spec = *ctx.spec;
  Layout lay = ctx.lay();
  IVec dnode((size_t)lay.ndof());
  for (int i = 0; i < lay.ndof(); ++i)
    dnode[(size_t)i] = t1 * IVal(sd.node[1][i] - sd.node[0][i]) +
                       t2 * IVal(sd.node[2][i] - sd.node[0][i]);
  FourierElement dzh = unpack_z_interval(dnode, lay, ctx.nu);
  std::vector<CIval> out((size_t)(ctx.nscalar_base() + 2));
  size_t rAmp = (size_t)spec.rho.nsteady;
  out[rAmp] = inner(h.z, apply_K2(dzh));
  out[rAmp + 1] = inner(h.z, iK_elem(dzh));
  IVec hp = pack_interval(h, lay);
  for (int b = 0; b < 2; ++b) {
    IVec dphi((size_t)lay.ndof());
    const auto& ph = b == 0 ? sd.phi1 : sd.phi2;
    for (int i = 0; i < lay.ndof(); ++i)
      dphi[(size_t)i] = t1 * IVal(ph[1][i] - ph[0][i]) + t2 * IVal(ph[2][i] - ph[0][i]);
    out[(size_t)(ctx.nscalar_base() + b)] = CIval(omega_dot(dphi, hp, lay));
  }
  return out;
}

}  // namespace pocont
