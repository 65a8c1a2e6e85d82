#include "pocont/polyfield.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pocont {

std::string RhoLayout::slot_name(int s) const {
  if (s < nsteady) return "x" + std::to_string(s + 1);
  if (s == ia()) return "a";
  if (s == ipsi()) return "psi";
  if (s < nsteady + 2 + neta) return "eta" + std::to_string(s - nsteady - 1);
  if (s == ialpha()) return "alpha";
  return "beta";
}

int RhoLayout::slot_from_name(const std::string& n) const {
  if (n == "a") return ia();
  if (n == "psi" || n == "mu0") return ipsi();
  if (n == "alpha") return ialpha();
  if (n == "beta") return ibeta();
  if (n.size() > 1 && n[0] == 'x') {
    int i = std::stoi(n.substr(1));
    if (i >= 1 && i <= nsteady) return ix(i - 1);
  }
  if (n.size() > 3 && n.substr(0, 3) == "eta") {
    int i = std::stoi(n.substr(3));
    if (i >= 1 && i <= neta) return ieta(i - 1);
  }
  return -1;
}

int PolyVectorField::degree() const {
  int q = 0;
  for (const auto& t : terms) q = std::max(q, (int)t.factors.size());
  return q;
}

bool PolyVectorField::all_delays_zero() const {
  for (double d : delays)
    if (d != 0.0) return false;
  return true;
}

void PolyVectorField::canonicalize() {
  for (auto& t : terms) std::sort(t.factors.begin(), t.factors.end());
  std::map<std::tuple<int, std::vector<int>, std::vector<std::pair<int, int>>>, double> acc;
  for (const auto& t : terms) acc[{t.target, t.rhoPowers, t.factors}] += t.coeff;
  terms.clear();
  for (const auto& [key, c] : acc) {
    if (c == 0.0) continue;
    DelayMonomial m;
    m.target = std::get<0>(key);
    m.rhoPowers = std::get<1>(key);
    m.factors = std::get<2>(key);
    m.coeff = c;
    terms.push_back(m);
  }
}

CIval ScalarPoly::eval(const std::vector<CIval>& v) const {
  CIval out;
  for (const auto& t : terms) {
    CIval p(t.coeff);
    for (int i = 0; i < nvars; ++i)
      for (int r = 0; r < t.pow[(size_t)i]; ++r) p = p * v[(size_t)i];
    out += p;
  }
  return out;
}

ScalarPoly ScalarPoly::deriv(int var) const {
  ScalarPoly out;
  out.nvars = nvars;
  for (const auto& t : terms) {
    if (t.pow[(size_t)var] == 0) continue;
    Term d = t;
    d.coeff = t.coeff * t.pow[(size_t)var];
    d.pow[(size_t)var] -= 1;
    out.terms.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// special functions

CIval phi_series(int j, const CIval& w, int order) {
  double W = w.magUB();
  if (W >= 0.5 * (order + 2)) throw TaylorRemainderDivergent();
  CIval sum, t(1.0);
  for (int i = 0; i <= order; ++i) {
    if (i > 0) {
      t = t * w;
      t = CIval(t.re / IVal((double)i), t.im / IVal((double)i));
    }
    CIval add(t.re / IVal((double)(i + j + 1)), t.im / IVal((double)(i + j + 1)));
    sum += add;
  }
  // tail <= |w|^{N+1}/(N+1)! * 1/(N+j+2) * 1/(1-|w|/(N+2)) with |w| < (N+2)/2
  IVal p(1.0);
  for (int i = 1; i <= order + 1; ++i) p = p * IVal(W) / IVal((double)i);
  IVal tail = p / IVal((double)(order + j + 2)) * IVal(2.0);
  IVal r = IVal::sym(tail.hi);
  return sum + CIval(r, r);
}

CIval g_eval(const IVal& a, const CIval& y, int order) {
  CIval u = CIval(-a) * y;
  return -y * phi_series(0, u, order);
}
CIval g_dy(const IVal& a, const CIval& y, int order) {
  CIval u = CIval(-a) * y;
  return -phi_series(0, u, order) + CIval(a) * y * phi_series(1, u, order);
}
CIval g_da(const IVal& a, const CIval& y, int order) {
  CIval u = CIval(-a) * y;
  return y * y * phi_series(1, u, order);
}
CIval g_dyy(const IVal& a, const CIval& y, int order) {
  CIval u = CIval(-a) * y;
  return CIval(IVal(2.0) * a) * phi_series(1, u, order) - CIval(a * a) * y * phi_series(2, u, order);
}
CIval g_day(const IVal& a, const CIval& y, int order) {
  CIval u = CIval(-a) * y;
  return CIval(2.0) * y * phi_series(1, u, order) - CIval(a) * y * y * phi_series(2, u, order);
}
CIval g_daa(const IVal& a, const CIval& y, int order) {
  CIval u = CIval(-a) * y;
  return -(y * y * y) * phi_series(2, u, order);
}

CIval cexp(const CIval& w) {
  IVal r = iexp(w.re);
  return CIval(r * icos(w.im), r * isin(w.im));
}

// ---------------------------------------------------------------------------
// field evaluation

namespace {

IVal rho_power(const DelayMonomial& m, const std::vector<IVal>& rho) {
  IVal out(1.0);
  for (size_t s = 0; s < m.rhoPowers.size(); ++s)
    for (int r = 0; r < m.rhoPowers[s]; ++r) out = out * rho[s];
  return out;
}

// derivative of rho^m with respect to slot s
IVal rho_power_d(const DelayMonomial& m, const std::vector<IVal>& rho, int s) {
  int p = m.rhoPowers[(size_t)s];
  if (p == 0) return IVal(0.0);
  IVal out((double)p);
  for (size_t t = 0; t < m.rhoPowers.size(); ++t) {
    int q = m.rhoPowers[t] - ((int)t == s ? 1 : 0);
    for (int r = 0; r < q; ++r) out = out * rho[t];
  }
  return out;
}

IVal rho_power_d2(const DelayMonomial& m, const std::vector<IVal>& rho, int s, int t) {
  int ps = m.rhoPowers[(size_t)s];
  int pt = m.rhoPowers[(size_t)t] - (s == t ? 1 : 0);
  if (ps == 0 || pt <= 0) return IVal(0.0);
  IVal out((double)(ps * pt));
  for (size_t u = 0; u < m.rhoPowers.size(); ++u) {
    int q = m.rhoPowers[u] - ((int)u == s ? 1 : 0) - ((int)u == t ? 1 : 0);
    for (int r = 0; r < q; ++r) out = out * rho[u];
  }
  return out;
}

struct MonoCache {
  std::vector<Seq> G;  // rotated factors zeta_{mu_{j_p}} z_{c_p}
  double nu = 1.05;

  Seq prod_except(const std::vector<int>& skip) const {
    Seq out = Seq::e0(nu);
    for (size_t p = 0; p < G.size(); ++p) {
      bool s = false;
      for (int q : skip)
        if ((int)p == q) s = true;
      if (!s) out = conv(out, G[p]);
    }
    return out;
  }
};

MonoCache make_cache(const DelayMonomial& m, const PolyVectorField& f, const FourierElement& z,
                     const IVal& psi) {
  MonoCache c;
  c.nu = z.nu;
  for (const auto& [comp, dl] : m.factors)
    c.G.push_back(delay_rotate(z.comp(comp), psi, f.delays[(size_t)dl]));
  return c;
}

Seq iK_scaled(const Seq& s, double mu) {  // i*mu*K applied
  Seq out = apply_K(s);
  for (auto& x : out.c) x = mul_i(CIval(IVal(mu)) * x);
  return out;
}

Seq K2_scaled(const Seq& s, double mu) {  // -mu^2 K^2 applied
  Seq out = apply_K2(s);
  for (auto& x : out.c) x = CIval(IVal(-mu * mu)) * x;
  return out;
}

void add_into(FourierElement& out, int target, const Seq& s, const IVal& scale) {
  for (int k = -s.M; k <= s.M; ++k) {
    if (std::abs(k) > out.M) continue;
    out.at(target, k) += CIval(scale) * s.at(k);
  }
}

int out_band(const PolyVectorField& f, int M) {
  int b = 0;
  for (const auto& t : f.terms) b = std::max(b, (int)t.factors.size() * M);
  return std::max(b, M);
}

}  // namespace

FourierElement eval_f(const PolyVectorField& f, const FourierElement& z,
                      const std::vector<IVal>& rho, const IVal& psi) {
  if (z.ncomp != f.nseq) throw DimensionMismatch("eval_f component count");
  if ((int)rho.size() != f.rho.dim()) throw DimensionMismatch("eval_f rho size");
  FourierElement out(f.nseq, out_band(f, z.M), z.nu);
  for (const auto& m : f.terms) {
    MonoCache c = make_cache(m, f, z, psi);
    Seq prod = c.prod_except({});
    add_into(out, m.target, prod, IVal(m.coeff) * rho_power(m, rho));
  }
  return out;
}

FourierElement apply_dz(const PolyVectorField& f, const FourierElement& z,
                        const std::vector<IVal>& rho, const IVal& psi,
                        const FourierElement& h) {
  FourierElement out(f.nseq, out_band(f, std::max(z.M, h.M)), z.nu);
  for (const auto& m : f.terms) {
    if (m.factors.empty()) continue;
    MonoCache c = make_cache(m, f, z, psi);
    IVal sc = IVal(m.coeff) * rho_power(m, rho);
    for (size_t r = 0; r < m.factors.size(); ++r) {
      Seq hr = delay_rotate(h.comp(m.factors[r].first), psi, f.delays[(size_t)m.factors[r].second]);
      add_into(out, m.target, conv(hr, c.prod_except({(int)r})), sc);
    }
  }
  return out;
}

std::vector<DzTerm> dz_terms(const PolyVectorField& f, const FourierElement& z,
                             const std::vector<IVal>& rho, const IVal& psi) {
  std::vector<DzTerm> out;
  for (const auto& m : f.terms) {
    if (m.factors.empty()) continue;
    MonoCache c = make_cache(m, f, z, psi);
    IVal sc = IVal(m.coeff) * rho_power(m, rho);
    for (size_t r = 0; r < m.factors.size(); ++r) {
      DzTerm t;
      t.target = m.target;
      t.comp = m.factors[r].first;
      t.mu = f.delays[(size_t)m.factors[r].second];
      t.cof = CIval(sc) * c.prod_except({(int)r});
      out.push_back(std::move(t));
    }
  }
  return out;
}

FourierElement eval_dpsi(const PolyVectorField& f, const FourierElement& z,
                         const std::vector<IVal>& rho, const IVal& psi) {
  FourierElement out(f.nseq, out_band(f, z.M), z.nu);
  for (const auto& m : f.terms) {
    if (m.factors.empty()) continue;
    MonoCache c = make_cache(m, f, z, psi);
    IVal sc = IVal(m.coeff) * rho_power(m, rho);
    for (size_t r = 0; r < m.factors.size(); ++r) {
      double mu = f.delays[(size_t)m.factors[r].second];
      if (mu == 0.0) continue;
      add_into(out, m.target, conv(iK_scaled(c.G[r], mu), c.prod_except({(int)r})), sc);
    }
  }
  return out;
}

std::vector<FourierElement> eval_drho(const PolyVectorField& f, const FourierElement& z,
                                      const std::vector<IVal>& rho, const IVal& psi) {
  std::vector<FourierElement> out;
  int B = out_band(f, z.M);
  for (int s = 0; s < f.rho.dim(); ++s) out.emplace_back(f.nseq, B, z.nu);
  for (const auto& m : f.terms) {
    MonoCache c = make_cache(m, f, z, psi);
    Seq prod = c.prod_except({});
    for (int s = 0; s < f.rho.dim(); ++s) {
      if (s == f.rho.ipsi() || m.rhoPowers[(size_t)s] == 0) continue;
      add_into(out[(size_t)s], m.target, prod, IVal(m.coeff) * rho_power_d(m, rho, s));
    }
  }
  return out;
}

FourierElement apply_d2(const PolyVectorField& f, const FourierElement& z,
                        const std::vector<IVal>& rho, const IVal& psi,
                        const Direction& u, const Direction& v) {
  int MB = z.M;
  if (u.has_z()) MB = std::max(MB, u.z.M);
  if (v.has_z()) MB = std::max(MB, v.z.M);
  FourierElement out(f.nseq, out_band(f, MB), z.nu);
  int ipsi = f.rho.ipsi();

  for (const auto& m : f.terms) {
    MonoCache c = make_cache(m, f, z, psi);
    int d = (int)m.factors.size();
    IVal V = rho_power(m, rho);
    IVal upsi = u.rho_at(ipsi), vpsi = v.rho_at(ipsi);

    // dP in a direction w: sum_r (zeta w_z)_r * prod + w_psi sum_r (i mu K zeta z)_r * prod
    auto dP_terms = [&](const Direction& w, std::vector<std::pair<Seq, int>>& res) {
      // res collects (sequence, skip index r); all scaled later
      for (int r = 0; r < d; ++r) {
        double mu = f.delays[(size_t)m.factors[(size_t)r].second];
        if (w.has_z()) {
          Seq wr = delay_rotate(w.z.comp(m.factors[(size_t)r].first), psi, mu);
          res.emplace_back(wr, r);
        }
        IVal wpsi = w.rho_at(ipsi);
        if (mu != 0.0 && !(wpsi.lo == 0 && wpsi.hi == 0))
          res.emplace_back(CIval(wpsi) * iK_scaled(c.G[(size_t)r], mu), r);
      }
    };

    // rho-part derivatives of V
    IVal dVu(0.0), dVv(0.0);
    std::vector<int> slots;
    for (int s = 0; s < f.rho.dim(); ++s)
      if (m.rhoPowers[(size_t)s] > 0) slots.push_back(s);
    for (int s : slots) {
      dVu += rho_power_d(m, rho, s) * u.rho_at(s);
      dVv += rho_power_d(m, rho, s) * v.rho_at(s);
    }
    IVal d2V(0.0);
    for (int s : slots)
      for (int t : slots) d2V += rho_power_d2(m, rho, s, t) * u.rho_at(s) * v.rho_at(t);

    IVal sc(m.coeff);

    // (d2 V) P
    if (!(d2V.lo == 0 && d2V.hi == 0)) add_into(out, m.target, c.prod_except({}), sc * d2V);

    // (dV.u) dP[v] + (dV.v) dP[u]
    if (d > 0) {
      std::vector<std::pair<Seq, int>> tv, tu;
      dP_terms(v, tv);
      dP_terms(u, tu);
      if (!(dVu.lo == 0 && dVu.hi == 0))
        for (auto& [s, r] : tv) add_into(out, m.target, conv(s, c.prod_except({r})), sc * dVu);
      if (!(dVv.lo == 0 && dVv.hi == 0))
        for (auto& [s, r] : tu) add_into(out, m.target, conv(s, c.prod_except({r})), sc * dVv);

      // V d2P: diagonal part sum_r d2F_r * prod_{!=r}
      for (int r = 0; r < d; ++r) {
        double mu = f.delays[(size_t)m.factors[(size_t)r].second];
        Seq d2F(0, z.nu);
        bool any = false;
        if (mu != 0.0) {
          if (u.has_z() && !(vpsi.lo == 0 && vpsi.hi == 0)) {
            Seq ur = delay_rotate(u.z.comp(m.factors[(size_t)r].first), psi, mu);
            d2F = d2F + CIval(vpsi) * iK_scaled(ur, mu);
            any = true;
          }
          if (v.has_z() && !(upsi.lo == 0 && upsi.hi == 0)) {
            Seq vr = delay_rotate(v.z.comp(m.factors[(size_t)r].first), psi, mu);
            d2F = d2F + CIval(upsi) * iK_scaled(vr, mu);
            any = true;
          }
          IVal uv = upsi * vpsi;
          if (!(uv.lo == 0 && uv.hi == 0)) {
            d2F = d2F + CIval(uv) * K2_scaled(c.G[(size_t)r], mu);
            any = true;
          }
        }
        if (any) add_into(out, m.target, conv(d2F, c.prod_except({r})), sc * V);
      }
      // V d2P: cross part sum_{p != r} dF_p[u] dF_r[v] prod_{!=p,r}
      for (auto& [su, ru] : tu)
        for (auto& [sv, rv] : tv) {
          if (ru == rv) continue;
          add_into(out, m.target, conv(conv(su, sv), c.prod_except({ru, rv})), sc * V);
        }
    }
  }
  return out;
}

FourierElement d2_block(const PolyVectorField& f, const FourierElement& z,
                        const std::vector<IVal>& rho, const IVal& psi, D2Which which,
                        const FourierElement& h1, const FourierElement& h2) {
  Direction u, v;
  int ipsi = f.rho.ipsi();
  switch (which) {
    case D2Which::zz:
      u.z = h1;
      v.z = h2;
      break;
    case D2Which::zpsi:
      u.z = h1;
      v.rho.assign((size_t)f.rho.dim(), IVal(0.0));
      v.rho[(size_t)ipsi] = IVal(1.0);
      break;
    case D2Which::psipsi:
      u.rho.assign((size_t)f.rho.dim(), IVal(0.0));
      u.rho[(size_t)ipsi] = IVal(1.0);
      v = u;
      break;
  }
  return apply_d2(f, z, rho, psi, u, v);
}

// ---------------------------------------------------------------------------
// blow-up

PolyVectorField blowup(const RawField& f) {
  PolyVectorField out;
  out.nseq = f.ny;
  out.rho.nsteady = f.ny;
  out.rho.neta = 0;
  out.delays = f.delays;
  int nrho = out.rho.dim();

  for (const auto& t : f.terms) {
    int d = (int)t.yfactors.size();
    for (int mask = 1; mask < (1 << d); ++mask) {  // mask = positions taking a*z branch
      DelayMonomial m;
      m.coeff = t.coeff;
      m.target = t.target;
      m.rhoPowers.assign((size_t)nrho, 0);
      int nz = 0;
      for (int p = 0; p < d; ++p) {
        if (mask & (1 << p)) {
          m.factors.push_back(t.yfactors[(size_t)p]);
          ++nz;
        } else {
          m.rhoPowers[(size_t)out.rho.ix(t.yfactors[(size_t)p].first)] += 1;
        }
      }
      m.rhoPowers[(size_t)out.rho.ia()] += nz - 1;  // exact division by a
      m.rhoPowers[(size_t)out.rho.ialpha()] += t.palpha;
      m.rhoPowers[(size_t)out.rho.ibeta()] += t.pbeta;
      out.terms.push_back(m);
    }
  }
  out.canonicalize();
  return out;
}

std::vector<ScalarPoly> steady_from(const RawField& f) {
  RhoLayout rho{f.ny, 0};
  int nvars = f.ny + rho.dim();  // nseq = ny for blown-up systems
  std::vector<ScalarPoly> rows((size_t)f.ny);
  for (auto& r : rows) r.nvars = nvars;
  for (const auto& t : f.terms) {
    ScalarPoly::Term st;
    st.coeff = t.coeff;
    st.pow.assign((size_t)nvars, 0);
    for (const auto& [c, dl] : t.yfactors) st.pow[(size_t)(f.ny + rho.ix(c))] += 1;
    st.pow[(size_t)(f.ny + rho.ialpha())] += t.palpha;
    st.pow[(size_t)(f.ny + rho.ibeta())] += t.pbeta;
    rows[(size_t)t.target].terms.push_back(st);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// steady state / boundary conditions

std::vector<IVal> eval_steady(const SystemSpec& spec, const std::vector<IVal>& rho) {
  std::vector<CIval> vars((size_t)spec.nvars());
  for (int s = 0; s < spec.rho.dim(); ++s) vars[(size_t)(spec.nseq + s)] = CIval(rho[(size_t)s]);
  std::vector<IVal> out;
  for (const auto& row : spec.steady) out.push_back(row.eval(vars).re);
  return out;
}

std::vector<std::vector<IVal>> steady_jacobian(const SystemSpec& spec,
                                               const std::vector<IVal>& rho) {
  std::vector<CIval> vars((size_t)spec.nvars());
  for (int s = 0; s < spec.rho.dim(); ++s) vars[(size_t)(spec.nseq + s)] = CIval(rho[(size_t)s]);
  std::vector<std::vector<IVal>> out;
  for (const auto& row : spec.steady) {
    std::vector<IVal> grad;
    for (int s = 0; s < spec.rho.dim(); ++s)
      grad.push_back(row.deriv(spec.nseq + s).eval(vars).re);
    out.push_back(grad);
  }
  return out;
}

std::vector<CIval> bc_vars(const SystemSpec& spec, const FourierElement& z,
                           const std::vector<IVal>& rho) {
  std::vector<CIval> vars((size_t)spec.nvars());
  auto s = sum_coeffs(z);
  for (int j = 0; j < spec.nseq; ++j) vars[(size_t)j] = s[(size_t)j];
  for (int i = 0; i < spec.rho.dim(); ++i) vars[(size_t)(spec.nseq + i)] = CIval(rho[(size_t)i]);
  return vars;
}

namespace {

CIval special_pre(const BCRow::Special& sp, const std::vector<CIval>& vars) {
  if (sp.pre.terms.empty()) return CIval(1.0);
  return sp.pre.eval(vars);
}

}  // namespace

CIval bc_row_eval(const SystemSpec& spec, const BCRow& row, const std::vector<CIval>& vars) {
  CIval out = row.poly.eval(vars);
  int aslot = spec.nseq + spec.rho.ia();
  for (const auto& sp : row.specials) {
    CIval arg = sp.arg.eval(vars);
    CIval pre = special_pre(sp, vars);
    if (sp.fn == BCRow::Fn::Exp)
      out += pre * cexp(arg);
    else
      out += pre * g_eval(vars[(size_t)aslot].re, arg, spec.taylorOrder);
  }
  return out;
}

std::vector<CIval> bc_row_grad(const SystemSpec& spec, const BCRow& row,
                               const std::vector<CIval>& vars) {
  int n = spec.nvars();
  int aslot = spec.nseq + spec.rho.ia();
  std::vector<CIval> grad((size_t)n);
  for (int s = 0; s < n; ++s) grad[(size_t)s] = row.poly.deriv(s).eval(vars);
  for (const auto& sp : row.specials) {
    CIval arg = sp.arg.eval(vars);
    CIval pre = special_pre(sp, vars);
    CIval fval, fprime;  // Fn value and derivative in the arg
    CIval ga;            // extra dg/da for the g kind
    if (sp.fn == BCRow::Fn::Exp) {
      fval = cexp(arg);
      fprime = fval;
    } else {
      IVal a = vars[(size_t)aslot].re;
      fval = g_eval(a, arg, spec.taylorOrder);
      fprime = g_dy(a, arg, spec.taylorOrder);
      ga = g_da(a, arg, spec.taylorOrder);
    }
    for (int s = 0; s < n; ++s) {
      CIval da = sp.arg.deriv(s).eval(vars);
      grad[(size_t)s] += pre * fprime * da;
      if (!sp.pre.terms.empty()) grad[(size_t)s] += sp.pre.deriv(s).eval(vars) * fval;
      if (sp.fn == BCRow::Fn::G && s == aslot) grad[(size_t)s] += pre * ga;
    }
  }
  return grad;
}

CIval bc_row_d2(const SystemSpec& spec, const BCRow& row, const std::vector<CIval>& vars,
                const std::vector<CIval>& d1, const std::vector<CIval>& d2) {
  int n = spec.nvars();
  int aslot = spec.nseq + spec.rho.ia();
  CIval out;
  auto nonzero = [](const CIval& c) {
    return !(c.re.lo == 0 && c.re.hi == 0 && c.im.lo == 0 && c.im.hi == 0);
  };
  auto poly_dir = [&](const ScalarPoly& p, const std::vector<CIval>& d) {
    CIval acc;
    for (int s = 0; s < n; ++s)
      if (nonzero(d[(size_t)s])) acc += p.deriv(s).eval(vars) * d[(size_t)s];
    return acc;
  };
  auto poly_d2 = [&](const ScalarPoly& p) {
    CIval acc;
    for (int s = 0; s < n; ++s) {
      if (!nonzero(d1[(size_t)s])) continue;
      ScalarPoly ds = p.deriv(s);
      for (int t = 0; t < n; ++t)
        if (nonzero(d2[(size_t)t])) acc += ds.deriv(t).eval(vars) * d1[(size_t)s] * d2[(size_t)t];
    }
    return acc;
  };

  out += poly_d2(row.poly);
  for (const auto& sp : row.specials) {
    CIval arg = sp.arg.eval(vars);
    CIval pre = special_pre(sp, vars);
    CIval A1 = poly_dir(sp.arg, d1), A2 = poly_dir(sp.arg, d2), B = poly_d2(sp.arg);
    CIval P1, P2, PB;
    if (!sp.pre.terms.empty()) {
      P1 = poly_dir(sp.pre, d1);
      P2 = poly_dir(sp.pre, d2);
      PB = poly_d2(sp.pre);
    }
    if (sp.fn == BCRow::Fn::Exp) {
      CIval e = cexp(arg);
      out += PB * e + P1 * e * A2 + P2 * e * A1 + pre * e * (A1 * A2 + B);
    } else {
      IVal a = vars[(size_t)aslot].re;
      CIval d1a = d1[(size_t)aslot], d2a = d2[(size_t)aslot];
      CIval gv = g_eval(a, arg, spec.taylorOrder);
      CIval gy = g_dy(a, arg, spec.taylorOrder);
      CIval ga = g_da(a, arg, spec.taylorOrder);
      // dF in a direction d: gy*(grad arg . d) + ga*d_a
      CIval F1 = gy * A1 + ga * d1a, F2 = gy * A2 + ga * d2a;
      out += PB * gv + P1 * F2 + P2 * F1;
      out += pre * (g_dyy(a, arg, spec.taylorOrder) * A1 * A2 +
                    g_day(a, arg, spec.taylorOrder) * (A1 * d2a + A2 * d1a) +
                    g_daa(a, arg, spec.taylorOrder) * d1a * d2a + gy * B);
    }
  }
  return out;
}

std::vector<CIval> eval_boundary(const SystemSpec& spec, const FourierElement& z,
                                 const std::vector<IVal>& rho) {
  auto vars = bc_vars(spec, z, rho);
  std::vector<CIval> out;
  for (const auto& row : spec.boundary) out.push_back(bc_row_eval(spec, row, vars));
  return out;
}

// ---------------------------------------------------------------------------
// system definition files
//
// Line-oriented format, '#' starts a comment. Variables for polynomial terms
// are y1..y{nseq} (components of z(0)) and x1.., a, psi, eta1.., alpha, beta.
// Monomial factor tokens are comp@delay with 1-based component and delay.

namespace {

int var_index(const SystemSpec& spec, const std::string& name) {
  if (name.size() > 1 && name[0] == 'y') {
    int i = std::stoi(name.substr(1));
    if (i >= 1 && i <= spec.nseq) return i - 1;
  }
  int s = spec.rho.slot_from_name(name);
  if (s >= 0) return spec.nseq + s;
  throw Error("unknown variable name: " + name);
}

void parse_powers(const SystemSpec& spec, std::istringstream& ss, std::vector<int>& pow) {
  std::string tok;
  while (ss >> tok) {
    size_t c = tok.find('^');
    std::string name = c == std::string::npos ? tok : tok.substr(0, c);
    int p = c == std::string::npos ? 1 : std::stoi(tok.substr(c + 1));
    pow[(size_t)var_index(spec, name)] += p;
  }
}

std::string pow_string(const SystemSpec& spec, const std::vector<int>& pow) {
  std::ostringstream out;
  for (size_t i = 0; i < pow.size(); ++i) {
    if (pow[i] == 0) continue;
    std::string name = (int)i < spec.nseq ? "y" + std::to_string(i + 1)
                                          : spec.rho.slot_name((int)i - spec.nseq);
    out << " " << name;
    if (pow[i] > 1) out << "^" << pow[i];
  }
  return out.str();
}

}  // namespace

SystemSpec parse_system_file(std::istream& in) {
  SystemSpec spec;
  std::string line;
  BCRow::Special* openSpecial = nullptr;
  while (std::getline(in, line)) {
    size_t h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "name") {
      ss >> spec.name;
    } else if (key == "mode") {
      std::string m;
      ss >> m;
      spec.ode = (m == "ode");
    } else if (key == "nseq") {
      ss >> spec.nseq;
    } else if (key == "nsteady") {
      ss >> spec.rho.nsteady;
    } else if (key == "neta") {
      ss >> spec.rho.neta;
    } else if (key == "taylor_order") {
      ss >> spec.taylorOrder;
    } else if (key == "delays") {
      double d;
      while (ss >> d) spec.delays.push_back(d);
    } else if (key == "mono") {
      openSpecial = nullptr;
      int target;
      double coeff;
      ss >> target >> coeff;
      DelayMonomial m;
      m.target = target - 1;
      m.coeff = coeff;
      m.rhoPowers.assign((size_t)spec.rho.dim(), 0);
      std::string tok;
      while (ss >> tok) {
        size_t at = tok.find('@');
        if (at != std::string::npos) {
          int comp = std::stoi(tok.substr(0, at)), dl = std::stoi(tok.substr(at + 1));
          m.factors.emplace_back(comp - 1, dl - 1);
        } else {
          size_t c = tok.find('^');
          std::string name = c == std::string::npos ? tok : tok.substr(0, c);
          int p = c == std::string::npos ? 1 : std::stoi(tok.substr(c + 1));
          int s = spec.rho.slot_from_name(name);
          if (s < 0 || s == spec.rho.ipsi()) throw Error("bad rho slot in mono: " + name);
          m.rhoPowers[(size_t)s] += p;
        }
      }
      spec.field.terms.push_back(m);
    } else if (key == "steady") {
      openSpecial = nullptr;
      int rowi;
      double coeff;
      ss >> rowi >> coeff;
      while ((int)spec.steady.size() < rowi) {
        ScalarPoly p;
        p.nvars = spec.nvars();
        spec.steady.push_back(p);
      }
      ScalarPoly::Term t;
      t.coeff = coeff;
      t.pow.assign((size_t)spec.nvars(), 0);
      parse_powers(spec, ss, t.pow);
      spec.steady[(size_t)(rowi - 1)].terms.push_back(t);
    } else if (key == "bc") {
      int rowi;
      std::string kind;
      ss >> rowi >> kind;
      while ((int)spec.boundary.size() < rowi) {
        BCRow r;
        r.poly.nvars = spec.nvars();
        spec.boundary.push_back(r);
      }
      BCRow& row = spec.boundary[(size_t)(rowi - 1)];
      if (kind == "poly") {
        openSpecial = nullptr;
        double coeff;
        ss >> coeff;
        ScalarPoly::Term t;
        t.coeff = coeff;
        t.pow.assign((size_t)spec.nvars(), 0);
        parse_powers(spec, ss, t.pow);
        row.poly.terms.push_back(t);
      } else {
        BCRow::Special sp;
        sp.fn = (kind == "exp") ? BCRow::Fn::Exp : BCRow::Fn::G;
        sp.pre.nvars = spec.nvars();
        sp.arg.nvars = spec.nvars();
        row.specials.push_back(sp);
        openSpecial = &row.specials.back();
      }
    } else if (key == "arg" || key == "pre") {
      if (!openSpecial) throw Error(key + " line outside special term");
      double coeff;
      ss >> coeff;
      ScalarPoly::Term t;
      t.coeff = coeff;
      t.pow.assign((size_t)spec.nvars(), 0);
      parse_powers(spec, ss, t.pow);
      (key == "arg" ? openSpecial->arg : openSpecial->pre).terms.push_back(t);
    } else {
      throw Error("unknown system file key: " + key);
    }
  }
  spec.field.nseq = spec.nseq;
  spec.field.rho = spec.rho;
  spec.field.delays = spec.delays.empty() ? std::vector<double>{0.0} : spec.delays;
  if (spec.delays.empty()) spec.delays = {0.0};
  spec.field.canonicalize();
  return spec;
}

SystemSpec parse_system_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open system file: " + path);
  return parse_system_file(in);
}

void emit_system_file(const SystemSpec& spec, std::ostream& out) {
  out << "# system definition\n";
  out << "name " << spec.name << "\n";
  out << "mode " << (spec.ode ? "ode" : "dde") << "\n";
  out << "nseq " << spec.nseq << "\n";
  out << "nsteady " << spec.rho.nsteady << "\n";
  out << "neta " << spec.rho.neta << "\n";
  out << "taylor_order " << spec.taylorOrder << "\n";
  out << "delays";
  for (double d : spec.delays) out << " " << d;
  out << "\n";
  out.precision(17);
  for (const auto& m : spec.field.terms) {
    out << "mono " << m.target + 1 << " " << m.coeff;
    for (size_t s = 0; s < m.rhoPowers.size(); ++s)
      if (m.rhoPowers[s] > 0) {
        out << " " << spec.rho.slot_name((int)s);
        if (m.rhoPowers[s] > 1) out << "^" << m.rhoPowers[s];
      }
    for (const auto& [c, d] : m.factors) out << " " << c + 1 << "@" << d + 1;
    out << "\n";
  }
  for (size_t r = 0; r < spec.steady.size(); ++r)
    for (const auto& t : spec.steady[r].terms)
      out << "steady " << r + 1 << " " << t.coeff << pow_string(spec, t.pow) << "\n";
  for (size_t r = 0; r < spec.boundary.size(); ++r) {
    for (const auto& t : spec.boundary[r].poly.terms)
      out << "bc " << r + 1 << " poly " << t.coeff << pow_string(spec, t.pow) << "\n";
    for (const auto& sp : spec.boundary[r].specials) {
      out << "bc " << r + 1 << " " << (sp.fn == BCRow::Fn::Exp ? "exp" : "g") << "\n";
      for (const auto& t : sp.pre.terms)
        out << "pre " << t.coeff << pow_string(spec, t.pow) << "\n";
      for (const auto& t : sp.arg.terms)
        out << "arg " << t.coeff << pow_string(spec, t.pow) << "\n";
    }
  }
}

}  // namespace pocont
