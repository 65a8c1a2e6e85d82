#include "doctest.h"
#include "pocont/continuation.hpp"

#include <random>
#include <sstream>

using namespace pocont;

namespace {

// fold normal form: dx = beta x - y - x(x^2+y^2+alpha^2), dy = x + beta y - y(...)
SystemSpec fold_spec() {
  RawField f;
  f.ny = 2;
  f.J = 1;
  f.delays = {0.0};
  f.terms.push_back({1.0, 0, {{0, 0}}, 0, 1});
  f.terms.push_back({-1.0, 0, {{1, 0}}, 0, 0});
  f.terms.push_back({-1.0, 0, {{0, 0}, {0, 0}, {0, 0}}, 0, 0});
  f.terms.push_back({-1.0, 0, {{0, 0}, {1, 0}, {1, 0}}, 0, 0});
  f.terms.push_back({-1.0, 0, {{0, 0}}, 2, 0});
  f.terms.push_back({1.0, 1, {{0, 0}}, 0, 0});
  f.terms.push_back({1.0, 1, {{1, 0}}, 0, 1});
  f.terms.push_back({-1.0, 1, {{0, 0}, {0, 0}, {1, 0}}, 0, 0});
  f.terms.push_back({-1.0, 1, {{1, 0}, {1, 0}, {1, 0}}, 0, 0});
  f.terms.push_back({-1.0, 1, {{1, 0}}, 2, 0});

  SystemSpec spec;
  spec.name = "fold";
  spec.ode = true;
  spec.nseq = 2;
  spec.rho.nsteady = 2;
  spec.rho.neta = 0;
  spec.delays = {0.0};
  spec.field = blowup(f);
  spec.steady = steady_from(f);
  return spec;
}

// exact circle orbit at (alpha, beta) with r = sqrt(beta - alpha^2)
Eigen::VectorXd fold_circle(const MapContext& ctx, double alpha, double beta) {
  Layout lay = ctx.lay();
  OmegaPoint u(lay, ctx.nu);
  double r = std::sqrt(beta - alpha * alpha);
  u.v[lay.idxr(0, 1)] = 0.5;
  u.v[lay.idxi(1, 1)] = -0.5;
  u.rho(ctx.spec->rho.ia()) = r;
  u.rho(ctx.spec->rho.ipsi()) = 1.0;
  u.rho(ctx.spec->rho.ialpha()) = alpha;
  u.rho(ctx.spec->rho.ibeta()) = beta;
  return u.v;
}

}  // namespace

TEST_CASE("tangent kernel at a manifold point") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  Layout lay = ctx.lay();
  Eigen::VectorXd u = fold_circle(ctx, 0.1, 0.3);
  auto [p1, p2] = tangent_kernel(ctx, u);
  CHECK(std::fabs(omega_dot(p1, p1, lay) - 1.0) < 1e-12);
  CHECK(std::fabs(omega_dot(p2, p2, lay) - 1.0) < 1e-12);
  CHECK(std::fabs(omega_dot(p1, p2, lay)) < 1e-12);

  // kernel vectors annihilate the projected Jacobian
  OmegaPoint p(lay, ctx.nu);
  p.v = u;
  IntervalU ui = to_interval(p);
  IMat J = jac_G(ctx, ui, ui.z);
  for (const Eigen::VectorXd* v : {&p1, &p2}) {
    double worst = 0;
    for (size_t i = 0; i < J.rows; ++i) {
      double s = 0;
      for (int j = 0; j < lay.ndof(); ++j) s += J(i, (size_t)j).mid() * (*v)[j];
      worst = std::max(worst, std::fabs(s));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("newton refine") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  GrowthConfig cfg;
  cfg.sigma = 0.01;
  Eigen::VectorXd u = fold_circle(ctx, 0.05, 0.4);
  auto [p1, p2] = tangent_kernel(ctx, u);

  SUBCASE("zero correction at an exact zero") {
    NewtonReport rep;
    Eigen::VectorXd r = newton_refine(ctx, u, p1, p2, u, cfg, &rep);
    CHECK((r - u).norm() < 1e-11);
    CHECK(rep.iters <= 1);
  }
  SUBCASE("predictor at distance sigma converges quadratically") {
    Eigen::VectorXd pred = u + cfg.sigma * (0.6 * p1 + 0.8 * p2);
    NewtonReport rep;
    Eigen::VectorXd r = newton_refine(ctx, pred, p1, p2, pred, cfg, &rep);
    CHECK(rep.iters <= 5);
    CHECK(rep.residual < 1e-12);
    // quadratic convergence: e_{k+1} <= C e_k^2 on the recorded history
    for (size_t i = 1; i + 1 < rep.history.size(); ++i) {
      double ek = rep.history[i], ek1 = rep.history[i + 1];
      if (ek < 1e-14) break;
      CHECK(ek1 <= 50.0 * ek * ek + 1e-14);
    }
    // correction perpendicular to the tangent plane
    Layout lay = ctx.lay();
    CHECK(std::fabs(omega_dot(p1, r - pred, lay)) < 1e-10);
    CHECK(std::fabs(omega_dot(p2, r - pred, lay)) < 1e-10);
  }
}

TEST_CASE("seed hexagon") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  GrowthConfig cfg;
  cfg.sigma = 0.02;
  Eigen::VectorXd u = fold_circle(ctx, 0.0, 0.3);
  Mesh mesh = seed_hexagon(ctx, u, cfg);
  CHECK(mesh.nodes.size() == 7);
  CHECK(mesh.simplices.size() == 6);
  int boundaryEdges = 0;
  for (const auto& [e, ss] : mesh.edge_map())
    if (ss.size() == 1) ++boundaryEdges;
  CHECK(boundaryEdges == 6);
  // refined nodes satisfy the residual tolerance
  for (const auto& n : mesh.nodes) {
    OmegaPoint p(ctx.lay(), ctx.nu);
    p.v = n.point;
    IntervalU ui = to_interval(p);
    ResidU r = eval_G(ctx, ui, ui.z);
    CHECK(resid_norm(r, ctx).hi < 1e-10);
  }
  // all six outer nodes at distance about sigma from the center
  for (int j = 1; j <= 6; ++j) {
    Eigen::VectorXd d = mesh.node(j).point - mesh.node(0).point;
    double dist = std::sqrt(omega_dot(d, d, mesh.lay));
    CHECK(dist == doctest::Approx(cfg.sigma).epsilon(0.2));
  }
}

TEST_CASE("local chart round trip") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  Layout lay = ctx.lay();
  Eigen::VectorXd u = fold_circle(ctx, 0.0, 0.25);
  auto [p1, p2] = tangent_kernel(ctx, u);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    double a = d(rng), b = d(rng);
    Eigen::VectorXd y = a * p1 + b * p2;
    Eigen::Vector2d L(omega_dot(p1, y, lay), omega_dot(p2, y, lay));
    Eigen::VectorXd back = L[0] * p1 + L[1] * p2;
    CHECK((back - y).norm() < 1e-12);
    // unitarity: <Ly, Lw> = <y, w>
    double c = d(rng), e = d(rng);
    Eigen::VectorXd w = c * p1 + e * p2;
    Eigen::Vector2d Lw(omega_dot(p1, w, lay), omega_dot(p2, w, lay));
    CHECK(std::fabs(L.dot(Lw) - omega_dot(y, w, lay)) < 1e-12);
  }
}

TEST_CASE("growth: first fan from a hexagon node and mesh combinatorics") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  GrowthConfig cfg;
  cfg.sigma = 0.02;
  cfg.maxSimplices = 40;
  Eigen::VectorXd u = fold_circle(ctx, 0.0, 0.3);
  Mesh mesh = seed_hexagon(ctx, u, cfg);

  long nid = select_frontal_node(mesh);
  CHECK(nid == 1);  // all outer nodes tie, oldest wins
  int added = grow_simplex(ctx, mesh, nid, cfg);
  // hexagon gap is 4pi/3 up to curvature, so k = 3 or 4 predictors
  CHECK(added >= 4);
  CHECK(added <= 5);
  CHECK(mesh.node(nid).flag == NodeFlag::Internal);

  while ((long)mesh.simplices.size() < cfg.maxSimplices) {
    long n;
    try {
      n = select_frontal_node(mesh);
    } catch (const MeshComplete&) {
      break;
    }
    grow_simplex(ctx, mesh, n, cfg);
  }
  CHECK((long)mesh.simplices.size() >= cfg.maxSimplices);

  // combinatorics: internal node <=> no boundary edge
  auto em = mesh.edge_map();
  for (const auto& n : mesh.nodes) {
    int bEdges = 0;
    for (const auto& [e, ss] : em)
      if ((e.first == n.id || e.second == n.id) && ss.size() == 1) ++bEdges;
    if (n.flag == NodeFlag::Internal) CHECK(bEdges == 0);
    if (bEdges == 0 && n.flag != NodeFlag::Frozen) CHECK(n.flag == NodeFlag::Internal);
  }
  // every edge shared by at most two simplices
  for (const auto& [e, ss] : em) CHECK(ss.size() <= 2);
  // every stored node satisfies the Newton tolerance
  for (const auto& n : mesh.nodes) {
    OmegaPoint p(ctx.lay(), ctx.nu);
    p.v = n.point;
    IntervalU ui = to_interval(p);
    CHECK(resid_norm(eval_G(ctx, ui, ui.z), ctx).hi < 1e-9);
  }
}

TEST_CASE("close the gap adds exactly one simplex without Newton calls") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  GrowthConfig cfg;
  cfg.sigma = 0.02;
  // large threshold forces the gap-closing branch on the second growth step
  cfg.gapCloseAngle = 3.3;
  Eigen::VectorXd u = fold_circle(ctx, 0.0, 0.3);
  Mesh mesh = seed_hexagon(ctx, u, cfg);
  grow_simplex(ctx, mesh, select_frontal_node(mesh), cfg);
  size_t nodesBefore = mesh.nodes.size();
  long nid = select_frontal_node(mesh);
  int added = grow_simplex(ctx, mesh, nid, cfg);
  CHECK(added == 1);
  CHECK(mesh.nodes.size() == nodesBefore);  // no Newton, no new nodes
  CHECK(mesh.node(nid).flag == NodeFlag::Internal);
  bool sawClose = false;
  for (const auto& l : mesh.growthLog)
    if (l.find("close gap") != std::string::npos) sawClose = true;
  CHECK(sawClose);
}

TEST_CASE("growth determinism") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  GrowthConfig cfg;
  cfg.sigma = 0.03;
  cfg.maxSimplices = 25;
  Eigen::VectorXd u = fold_circle(ctx, 0.0, 0.3);
  Mesh m1 = grow_mesh(ctx, u, cfg);
  Mesh m2 = grow_mesh(ctx, u, cfg);
  std::ostringstream s1, s2;
  write_mesh(m1, s1);
  write_mesh(m2, s2);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("mesh file round trip") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  GrowthConfig cfg;
  cfg.sigma = 0.03;
  cfg.maxSimplices = 12;
  Mesh m = grow_mesh(ctx, fold_circle(ctx, 0.0, 0.3), cfg);
  std::ostringstream out;
  write_mesh(m, out);
  std::istringstream in(out.str());
  Mesh m2 = read_mesh(in);
  REQUIRE(m2.nodes.size() == m.nodes.size());
  REQUIRE(m2.simplices.size() == m.simplices.size());
  for (size_t i = 0; i < m.nodes.size(); ++i) {
    CHECK((m.nodes[i].point - m2.nodes[i].point).norm() == 0.0);
    CHECK((m.nodes[i].phi1 - m2.nodes[i].phi1).norm() == 0.0);
  }
}

TEST_CASE("align bases") {
  SystemSpec spec = fold_spec();
  MapContext ctx = MapContext::make(&spec, 3, 1.05);
  Layout lay = ctx.lay();
  Eigen::VectorXd u = fold_circle(ctx, 0.0, 0.25);
  auto [p1, p2] = tangent_kernel(ctx, u);

  SUBCASE("exact recovery of a rotated basis in the same plane") {
    double th = 0.8;
    Eigen::VectorXd b1 = std::cos(th) * p1 + std::sin(th) * p2;
    Eigen::VectorXd b2 = -std::sin(th) * p1 + std::cos(th) * p2;
    auto [a1, a2] = align_pair(lay, b1, b2, p1, p2);
    CHECK((a1 - p1).norm() < 1e-12);
    CHECK((a2 - p2).norm() < 1e-12);
  }
  SUBCASE("reflection handled") {
    Eigen::VectorXd b1 = p2, b2 = p1;  // determinant -1 relative to (p1,p2)
    auto [a1, a2] = align_pair(lay, b1, b2, p1, p2);
    double before = (b1 - p1).norm() + (b2 - p2).norm();
    double after = (a1 - p1).norm() + (a2 - p2).norm();
    CHECK(after <= before + 1e-13);
    CHECK(after < 1e-12);
  }
  SUBCASE("random nearby planes: alignment never increases distance") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd q = fold_circle(ctx, 0.02, 0.26);
    auto [q1, q2] = tangent_kernel(ctx, q);
    for (int t = 0; t < 50; ++t) {
      double th = d(rng) * 3.0;
      Eigen::VectorXd b1 = std::cos(th) * q1 + std::sin(th) * q2;
      Eigen::VectorXd b2 = -std::sin(th) * q1 + std::cos(th) * q2;
      if (d(rng) > 0) std::swap(b1, b2);
      auto [a1, a2] = align_pair(lay, b1, b2, p1, p2);
      double before = (b1 - p1).squaredNorm() + (b2 - p2).squaredNorm();
      double after = (a1 - p1).squaredNorm() + (a2 - p2).squaredNorm();
      CHECK(after <= before + 1e-12);
      // orthonormality preserved
      CHECK(std::fabs(omega_dot(a1, a1, lay) - 1.0) < 1e-12);
      CHECK(std::fabs(omega_dot(a1, a2, lay)) < 1e-12);
    }
  }
}
