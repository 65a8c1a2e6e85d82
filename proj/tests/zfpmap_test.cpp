#include "doctest.h"
#include "pocont/zfpmap.hpp"

#include <random>

using namespace pocont;

namespace {

// Bautin normal form as a blown-up ODE system
SystemSpec bautin_spec() {
  RawField f;
  f.ny = 2;
  f.J = 1;
  f.delays = {0.0};
  // dx = beta x - y + alpha x(x^2+y^2) - x(x^2+y^2)^2, so that r' = r(beta+alpha r^2-r^4)
  f.terms.push_back({1.0, 0, {{0, 0}}, 0, 1});
  f.terms.push_back({-1.0, 0, {{1, 0}}, 0, 0});
  f.terms.push_back({1.0, 0, {{0, 0}, {0, 0}, {0, 0}}, 1, 0});
  f.terms.push_back({1.0, 0, {{0, 0}, {1, 0}, {1, 0}}, 1, 0});
  f.terms.push_back({-1.0, 0, {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}, 0, 0});
  f.terms.push_back({-2.0, 0, {{0, 0}, {0, 0}, {0, 0}, {1, 0}, {1, 0}}, 0, 0});
  f.terms.push_back({-1.0, 0, {{0, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}}, 0, 0});
  // dy = x + beta y + alpha y(x^2+y^2) - y(x^2+y^2)^2
  f.terms.push_back({1.0, 1, {{0, 0}}, 0, 0});
  f.terms.push_back({1.0, 1, {{1, 0}}, 0, 1});
  f.terms.push_back({1.0, 1, {{0, 0}, {0, 0}, {1, 0}}, 1, 0});
  f.terms.push_back({1.0, 1, {{1, 0}, {1, 0}, {1, 0}}, 1, 0});
  f.terms.push_back({-1.0, 1, {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 0}}, 0, 0});
  f.terms.push_back({-2.0, 1, {{0, 0}, {0, 0}, {1, 0}, {1, 0}, {1, 0}}, 0, 0});
  f.terms.push_back({-1.0, 1, {{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}}, 0, 0});

  SystemSpec spec;
  spec.name = "bautin";
  spec.ode = true;
  spec.nseq = 2;
  spec.rho.nsteady = 2;
  spec.rho.neta = 0;
  spec.delays = {0.0};
  spec.field = blowup(f);
  spec.steady = steady_from(f);
  return spec;
}

// circle orbit (cos t, sin t) of radius r at parameters (alpha, beta), a = r
OmegaPoint bautin_circle(const MapContext& ctx, double r, double alpha, double beta) {
  Layout lay = ctx.lay();
  OmegaPoint u(lay, ctx.nu);
  // z1 = cos: z_{1,+1} = 1/2; z2 = sin: z_{2,+1} = -i/2  (z scaled so a=r)
  u.v[lay.idxr(0, 1)] = 0.5;
  u.v[lay.idxi(0, 1)] = 0.0;
  u.v[lay.idxr(1, 1)] = 0.0;
  u.v[lay.idxi(1, 1)] = -0.5;
  u.rho(ctx.spec->rho.ia()) = r;
  u.rho(ctx.spec->rho.ipsi()) = 1.0;  // mu = 1 in ODE mode
  u.rho(ctx.spec->rho.ialpha()) = alpha;
  u.rho(ctx.spec->rho.ibeta()) = beta;
  return u;
}

std::mt19937 rng(71);

IntervalU random_u(const MapContext& ctx) {
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  Layout lay = ctx.lay();
  OmegaPoint p(lay, ctx.nu);
  for (int i = 0; i < lay.ndof(); ++i) p.v[i] = d(rng);
  p.rho(ctx.spec->rho.ipsi()) = 1.0 + 0.2 * d(rng);
  return to_interval(p);
}

}  // namespace

TEST_CASE("Bautin circle orbit is an exact zero and amplitude row is normalized") {
  SystemSpec spec = bautin_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  OmegaPoint u = bautin_circle(ctx, 1.0, 0.0, 1.0);
  IntervalU ui = to_interval(u);
  ResidU r = eval_G(ctx, ui, ui.z);
  CHECK(resid_norm(r, ctx).hi < 1e-12);

  // amplitude row exactly 0 at the anchor normalization
  CHECK(r.scal[2].magUB() < 1e-13);
  CHECK(r.scal[3].magUB() < 1e-13);

  // a phase shift leaves the differential/steady rows exact zeros; against the
  // frozen anchor data the anchor row departs at O(theta) while the amplitude
  // row only moves at O(theta^2)
  OmegaPoint us = u;
  double th = 1e-3;
  Layout lay = ctx.lay();
  for (int j = 0; j < 2; ++j) {
    double re = u.v[lay.idxr(j, 1)], im = u.v[lay.idxi(j, 1)];
    us.v[lay.idxr(j, 1)] = re * std::cos(th) - im * std::sin(th);
    us.v[lay.idxi(j, 1)] = re * std::sin(th) + im * std::cos(th);
  }
  IntervalU usi = to_interval(us);
  ResidU rs = eval_G(ctx, usi, ui.z);
  CHECK(ell1nu_norm(rs.four, ctx.norm.wz).hi < 1e-12);
  CHECK(rs.scal[0].magUB() < 1e-13);
  CHECK(rs.scal[1].magUB() < 1e-13);
  CHECK(rs.scal[2].magUB() < 1e-6);   // amplitude: O(theta^2)
  CHECK(rs.scal[3].magUB() > 5e-4);   // anchor: O(theta)
}

TEST_CASE("jac_G matches finite differences and apply_DG") {
  SystemSpec spec = bautin_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  Layout lay = ctx.lay();
  IntervalU u = random_u(ctx);
  FourierElement zhat = u.z;

  IMat J = jac_G(ctx, u, zhat);
  int nrows = lay.nfour() + ctx.nscalar_base();
  REQUIRE((int)J.rows == nrows);

  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    OmegaPoint h(lay, ctx.nu);
    for (int i = 0; i < lay.ndof(); ++i) h.v[i] = d(rng);
    IntervalU hi = to_interval(h);

    // analytic directional derivative
    ResidU dg = apply_DG(ctx, u, zhat, hi);
    IVec dgp = pack_resid(dg, ctx.lay_at(dg.four.M));

    // finite differences
    double eps = 1e-7;
    OmegaPoint up = mid_point(u, lay), um = mid_point(u, lay);
    up.v += eps * h.v;
    um.v -= eps * h.v;
    ResidU rp = eval_G(ctx, to_interval(up), zhat), rm = eval_G(ctx, to_interval(um), zhat);
    Layout layq = ctx.lay_at(std::max(rp.four.M, dg.four.M));
    IVec rpp = pack_resid(rp, layq), rmp = pack_resid(rm, layq);
    IVec dgq = pack_resid(dg, layq);

    // jacobian * h (band-M rows only)
    std::vector<double> Jh((size_t)nrows, 0.0);
    for (int i = 0; i < nrows; ++i) {
      double s = 0;
      for (int j = 0; j < lay.ndof(); ++j) s += J((size_t)i, (size_t)j).mid() * h.v[j];
      Jh[(size_t)i] = s;
    }

    for (int i = 0; i < layq.ndof(); ++i) {
      double fd = (rpp[(size_t)i].mid() - rmp[(size_t)i].mid()) / (2 * eps);
      CHECK(std::fabs(fd - dgq[(size_t)i].mid()) < 2e-6 * std::max(1.0, std::fabs(fd)));
    }
    // truncated rows: Fourier band M + scalars
    for (int j = 0; j < lay.nseq; ++j)
      for (int k = -lay.M; k <= lay.M; ++k) {
        int rowq;
        int row;
        if (k == 0) {
          rowq = layq.idx0(j);
          row = lay.idx0(j);
        } else if (k > 0) {
          rowq = layq.idxr(j, k);
          row = lay.idxr(j, k);
        } else
          continue;
        double fd = (rpp[(size_t)rowq].mid() - rmp[(size_t)rowq].mid()) / (2 * eps);
        CHECK(std::fabs(fd - Jh[(size_t)row]) < 2e-6 * std::max(1.0, std::fabs(fd)));
        if (k > 0) {
          double fdi =
              (rpp[(size_t)layq.idxi(j, k)].mid() - rmp[(size_t)layq.idxi(j, k)].mid()) / (2 * eps);
          CHECK(std::fabs(fdi - Jh[(size_t)lay.idxi(j, k)]) < 2e-6 * std::max(1.0, std::fabs(fdi)));
        }
      }
  }
}

TEST_CASE("apply_D2F matches second finite differences") {
  SystemSpec spec = bautin_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  Layout lay = ctx.lay();
  IntervalU u = random_u(ctx);
  FourierElement zhat = u.z;
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    OmegaPoint hu(lay, ctx.nu), hv(lay, ctx.nu);
    for (int i = 0; i < lay.ndof(); ++i) {
      hu.v[i] = d(rng);
      hv.v[i] = d(rng);
    }
    ResidU d2 = apply_D2F(ctx, u, to_interval(hu), to_interval(hv));

    double eps = 1e-4;
    auto at = [&](double su, double sv) {
      OmegaPoint p = mid_point(u, lay);
      p.v += su * eps * hu.v + sv * eps * hv.v;
      return eval_G(ctx, to_interval(p), zhat);
    };
    ResidU fpp = at(1, 1), fpm = at(1, -1), fmp = at(-1, 1), fmm = at(-1, -1);
    Layout layq = ctx.lay_at(std::max(fpp.four.M, d2.four.M));
    IVec vpp = pack_resid(fpp, layq), vpm = pack_resid(fpm, layq), vmp = pack_resid(fmp, layq),
         vmm = pack_resid(fmm, layq);
    IVec vd2 = pack_resid(d2, layq);
    for (int i = 0; i < layq.ndof(); ++i) {
      double fd = (vpp[(size_t)i].mid() - vpm[(size_t)i].mid() - vmp[(size_t)i].mid() +
                   vmm[(size_t)i].mid()) /
                  (4 * eps * eps);
      CHECK(std::fabs(fd - vd2[(size_t)i].mid()) < 1e-4 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("interpolants and bordering rows") {
  SystemSpec spec = bautin_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  Layout lay = ctx.lay();
  std::uniform_real_distribution<double> d(-0.3, 0.3);

  SimplexData sd;
  sd.id = 0;
  for (int j = 0; j < 3; ++j) {
    OmegaPoint p = bautin_circle(ctx, 1.0 + 0.1 * j, 0.05 * j, 1.0 + 0.2 * j);
    sd.node[j] = p.v;
    Eigen::VectorXd p1 = Eigen::VectorXd::Zero(lay.ndof()), p2 = p1;
    for (int i = 0; i < lay.ndof(); ++i) {
      p1[i] = d(rng);
      p2[i] = d(rng);
    }
    sd.phi1[j] = p1;
    sd.phi2[j] = p2;
    sd.c1[j] = omega_dot(p1, sd.node[j], lay);
    sd.c2[j] = omega_dot(p2, sd.node[j], lay);
  }

  SUBCASE("vertex reproduction") {
    IntervalU u1 = interp_u(ctx, sd, IVal(1.0), IVal(0.0));
    OmegaPoint m = mid_point(u1, lay);
    CHECK((m.v - sd.node[1]).norm() < 1e-14);
    IntervalU ub = interp_u(ctx, sd, IVal(1.0 / 3), IVal(1.0 / 3));
    OmegaPoint mb = mid_point(ub, lay);
    Eigen::VectorXd bary = (sd.node[0] + sd.node[1] + sd.node[2]) / 3.0;
    CHECK((mb.v - bary).norm() < 1e-13);
  }
  SUBCASE("interval s covers all vertices") {
    IntervalU uh = interp_u(ctx, sd, IVal(0.0, 1.0), IVal(0.0, 1.0));
    for (int j = 0; j < 3; ++j) {
      FourierElement zj = unpack_z(sd.node[j], lay, ctx.nu);
      for (int jj = 0; jj < lay.nseq; ++jj)
        for (int k = -lay.M; k <= lay.M; ++k) {
          CHECK(uh.z.at(jj, k).re.contains(zj.at(jj, k).re.mid()));
          CHECK(uh.z.at(jj, k).im.contains(zj.at(jj, k).im.mid()));
        }
    }
  }
  SUBCASE("bordering rows vanish at vertices and are affine in s") {
    IntervalU u0 = interp_u(ctx, sd, IVal(0.0), IVal(0.0));
    ResidU r0 = eval_Fs(ctx, sd, IVal(0.0), IVal(0.0), u0);
    size_t nb = r0.scal.size();
    CHECK(r0.scal[nb - 2].magUB() < 1e-13);
    CHECK(r0.scal[nb - 1].magUB() < 1e-13);

    // border rows affine in s at a frozen u
    IntervalU uf = interp_u(ctx, sd, IVal(0.2), IVal(0.3));
    auto border = [&](double a, double b) {
      ResidU r = eval_Fs(ctx, sd, IVal(a), IVal(b), uf);
      return std::pair<double, double>(r.scal[r.scal.size() - 2].re.mid(),
                                       r.scal[r.scal.size() - 1].re.mid());
    };
    auto b00 = border(0, 0), b10 = border(1, 0), b01 = border(0, 1);
    auto bmid = border(0.4, 0.25);
    CHECK(bmid.first ==
          doctest::Approx(b00.first + 0.4 * (b10.first - b00.first) + 0.25 * (b01.first - b00.first))
              .epsilon(1e-10));
    CHECK(bmid.second ==
          doctest::Approx(b00.second + 0.4 * (b10.second - b00.second) +
                          0.25 * (b01.second - b00.second))
              .epsilon(1e-10));
  }
}

TEST_CASE("symmetry closure of eval_G") {
  SystemSpec spec = bautin_spec();
  MapContext ctx = MapContext::make(&spec, 4, 1.05);
  IntervalU u = random_u(ctx);
  ResidU r = eval_G(ctx, u, u.z);
  CHECK(symmetry_defect(r.four) < 1e-12);
  for (const auto& s : r.scal) CHECK(std::fabs(s.im.mid()) < 1e-13);
}
