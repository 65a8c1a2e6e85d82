#include "doctest.h"
#include "pocont/fourier.hpp"

#include <complex>
#include <random>

using namespace pocont;

namespace {

Seq random_seq(std::mt19937& rng, int M, double nu) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Seq s(M, nu);
  for (int k = -M; k <= M; ++k) s.at(k) = CIval(d(rng), d(rng));
  return s;
}

std::complex<double> midc(const CIval& z) { return {z.re.mid(), z.im.mid()}; }

}  // namespace

TEST_CASE("ell1nu norm basics") {
  Seq e = Seq::e0(2.0);
  IVal n = seq_ell1nu_norm(e);
  CHECK(n.contains(1.0));
  CHECK(n.width() < 1e-14);

  Seq z(1, 2.0);
  z.at(0) = CIval(1.0);
  z.at(1) = CIval(1.0);
  z.at(-1) = CIval(1.0);
  CHECK(seq_ell1nu_norm(z).contains(5.0));
}

TEST_CASE("ell1nu norm vs rational oracle at nu=3/2") {
  // exact arithmetic oracle: coefficients are small integers over 8, nu=3/2,
  // so the norm is a rational p/2^a 3^b computed exactly in int64
  double nu = 1.5;
  Seq z(2, nu);
  z.at(-2) = CIval(0.375);   // 3/8
  z.at(-1) = CIval(-0.25);   // 1/4 magnitude
  z.at(0) = CIval(1.125);    // 9/8
  z.at(1) = CIval(0.5);
  z.at(2) = CIval(-0.875);   // 7/8
  // |c| nu^{|k|} terms over denominator 8*4=32:
  // k=-2: 3/8*9/4=27/32; k=-1: 1/4*3/2=12/32; 0: 36/32; 1: 1/2*3/2=24/32; 2: 7/8*9/4=63/32
  double exact = (27.0 + 12.0 + 36.0 + 24.0 + 63.0) / 32.0;
  IVal n = seq_ell1nu_norm(z);
  CHECK(n.contains(exact));
  CHECK(n.width() < 1e-13);
}

TEST_CASE("convolution identities") {
  std::mt19937 rng(1);
  Seq z = random_seq(rng, 4, 1.3);
  Seq e = Seq::e0(1.3);
  Seq r = conv(e, z);
  for (int k = -4; k <= 4; ++k) {
    CHECK(r.get(k).re.contains(z.at(k).re.mid()));
    CHECK(r.get(k).im.contains(z.at(k).im.mid()));
  }
  Seq d1 = Seq::delta(1, 1.3);
  Seq d2 = conv(d1, d1);
  CHECK(d2.get(2).re.contains(1.0));
  CHECK(d2.get(2).magUB() > 0.9);
  CHECK(d2.get(1).magUB() < 1e-15);
}

TEST_CASE("convolution vs brute-force double sum, 1000 random pairs") {
  std::mt19937 rng(42);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    Seq a = random_seq(rng, 7, 1.1), b = random_seq(rng, 7, 1.1);
    Seq c = conv(a, b);
    for (int k = -14; k <= 14; ++k) {
      std::complex<double> s(0, 0);
      for (int k1 = -7; k1 <= 7; ++k1) {
        int k2 = k - k1;
        if (k2 < -7 || k2 > 7) continue;
        s += midc(a.at(k1)) * midc(b.at(k2));
      }
      if (!c.get(k).contains(s.real(), s.imag())) ++bad;
      if (std::abs(midc(c.get(k)) - s) > 1e-12) ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("Banach algebra inequality on 1000 random pairs") {
  std::mt19937 rng(9);
  for (int t = 0; t < 1000; ++t) {
    Seq a = random_seq(rng, 5, 1.2), b = random_seq(rng, 5, 1.2);
    IVal na = seq_ell1nu_norm(a), nb = seq_ell1nu_norm(b);
    IVal nc = seq_ell1nu_norm(conv(a, b));
    CHECK(nc.lo <= (na * nb).hi);
  }
}

TEST_CASE("convolution commutes and associates (midpoint check)") {
  std::mt19937 rng(14);
  Seq a = random_seq(rng, 3, 1.1), b = random_seq(rng, 4, 1.1), c = random_seq(rng, 2, 1.1);
  Seq ab = conv(a, b), ba = conv(b, a);
  for (int k = -7; k <= 7; ++k)
    CHECK(std::abs(midc(ab.get(k)) - midc(ba.get(k))) < 1e-13);
  Seq abc1 = conv(conv(a, b), c), abc2 = conv(a, conv(b, c));
  for (int k = -9; k <= 9; ++k)
    CHECK(std::abs(midc(abc1.get(k)) - midc(abc2.get(k))) < 1e-13);
}

TEST_CASE("K operator") {
  Seq e = Seq::e0(2.0);
  Seq r = apply_K(e);
  CHECK(seq_ell1nu_norm(r).hi < 1e-15);
  Seq d2 = Seq::delta(2, 2.0);
  CHECK(apply_K(d2).get(2).re.contains(2.0));

  // <z, K^2 w> against direct termwise sum
  std::mt19937 rng(21);
  FourierElement z(2, 5, 1.1), w(2, 5, 1.1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int j = 0; j < 2; ++j)
    for (int k = -5; k <= 5; ++k) {
      z.at(j, k) = CIval(d(rng), d(rng));
      w.at(j, k) = CIval(d(rng), d(rng));
    }
  CIval ip = inner(z, apply_K2(w));
  std::complex<double> s(0, 0);
  for (int j = 0; j < 2; ++j)
    for (int k = -5; k <= 5; ++k)
      s += midc(z.at(j, k)) * std::conj((double)k * (double)k * midc(w.at(j, k)));
  CHECK(ip.contains(s.real(), s.imag()));
}

TEST_CASE("delay rotation") {
  std::mt19937 rng(33);
  Seq z = random_seq(rng, 6, 1.05);
  SUBCASE("psi=0 identity") {
    Seq r = delay_rotate(z, IVal(0.0), 2.5);
    for (int k = -6; k <= 6; ++k) CHECK(std::abs(midc(r.at(k)) - midc(z.at(k))) < 1e-15);
  }
  SUBCASE("mu=0 identity") {
    Seq r = delay_rotate(z, IVal(1.7), 0.0);
    for (int k = -6; k <= 6; ++k) CHECK(std::abs(midc(r.at(k)) - midc(z.at(k))) < 1e-15);
  }
  SUBCASE("norm preserved on 100 random inputs") {
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int t = 0; t < 100; ++t) {
      Seq a = random_seq(rng, 5, 1.1);
      double psi = d(rng), mu = d(rng);
      IVal n0 = seq_ell1nu_norm(a), n1 = seq_ell1nu_norm(delay_rotate(a, IVal(psi), mu));
      CHECK(n1.lo <= n0.hi + 1e-12);
      CHECK(n1.hi >= n0.lo - 1e-12);
    }
  }
  SUBCASE("pointwise value matches e^{ik psi mu}") {
    double psi = 0.77, mu = -10.0;
    Seq r = delay_rotate(z, IVal(psi), mu);
    for (int k = -6; k <= 6; ++k) {
      std::complex<double> rot = std::polar(1.0, k * psi * mu);
      CHECK(std::abs(midc(r.at(k)) - rot * midc(z.at(k))) < 1e-12);
    }
  }
}

TEST_CASE("project/pad/sum") {
  std::mt19937 rng(8);
  FourierElement z(3, 4, 1.2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    for (int k = -4; k <= 4; ++k) z.at(j, k) = CIval(d(rng), d(rng));
    z.at(j, 0) = CIval(d(rng), 0.0);
  }
  symmetrize(z);

  FourierElement zp = pad(z, 9);
  std::vector<double> w = {1.0, 1.0, 1.0};
  CHECK(ell1nu_norm(zp, w).hi == doctest::Approx(ell1nu_norm(z, w).hi).epsilon(1e-14));

  FourierElement lo = project(zp, 0, 4), hi = project(zp, 5, 9);
  FourierElement sum = lo + hi;
  for (int j = 0; j < 3; ++j)
    for (int k = -9; k <= 9; ++k)
      CHECK(std::abs(midc(sum.at(j, k)) - midc(zp.at(j, k))) < 1e-15);

  // sum of coefficients of symmetric element is real
  auto s = sum_coeffs(z);
  for (auto& v : s) CHECK(std::fabs(v.im.mid()) < 1e-14);
}

TEST_CASE("symmetry preservation") {
  std::mt19937 rng(55);
  FourierElement z(2, 5, 1.1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int j = 0; j < 2; ++j)
    for (int k = -5; k <= 5; ++k) z.at(j, k) = CIval(d(rng), d(rng));
  symmetrize(z);
  CHECK(symmetry_defect(z) < 1e-15);

  // conv of symmetric scalar comps is symmetric
  Seq a = z.comp(0), b = z.comp(1);
  Seq ab = conv(a, b);
  FourierElement w(1, ab.M, 1.1);
  w.set_comp(0, ab);
  CHECK(symmetry_defect(w) < 1e-13);

  // rotation of symmetric by real psi*mu keeps symmetry
  FourierElement zr = delay_rotate(z, IVal(0.9), -2.0);
  CHECK(symmetry_defect(zr) < 1e-13);

  // K maps symmetric to anti-symmetric: K z has z_k = -conj(z_{-k})
  FourierElement kz = apply_K(z);
  double anti = 0;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k <= 5; ++k) {
      CIval diff = kz.at(j, k) + kz.at(j, -k).conj();
      anti = std::max(anti, diff.magUB());
    }
  CHECK(anti < 1e-13);
}
