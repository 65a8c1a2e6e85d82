#include "pocont/continuation.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace pocont {

std::map<std::pair<long, long>, std::vector<long>> Mesh::edge_map() const {
  std::map<std::pair<long, long>, std::vector<long>> em;
  for (const auto& s : simplices)
    for (int i = 0; i < 3; ++i) {
      long a = s.nodes[(size_t)i], b = s.nodes[(size_t)((i + 1) % 3)];
      em[{std::min(a, b), std::max(a, b)}].push_back(s.id);
    }
  return em;
}

std::vector<long> Mesh::neighbors(long nodeId) const {
  std::vector<long> out;
  auto em = edge_map();
  for (const auto& [e, ss] : em) {
    if (e.first == nodeId) out.push_back(e.second);
    if (e.second == nodeId) out.push_back(e.first);
  }
  return out;
}

bool Mesh::edge_internal(const std::pair<long, long>& e) const {
  auto em = edge_map();
  auto it = em.find({std::min(e.first, e.second), std::max(e.first, e.second)});
  return it != em.end() && it->second.size() >= 2;
}

void Mesh::refresh_flags() {
  auto em = edge_map();
  std::vector<int> boundaryEdges((size_t)nodes.size(), 0), internalEdges((size_t)nodes.size(), 0);
  for (const auto& [e, ss] : em) {
    if (ss.size() == 1) {
      boundaryEdges[(size_t)e.first]++;
      boundaryEdges[(size_t)e.second]++;
    } else {
      internalEdges[(size_t)e.first]++;
      internalEdges[(size_t)e.second]++;
    }
  }
  for (auto& n : nodes) {
    if (n.flag == NodeFlag::Frozen) continue;
    if (boundaryEdges[(size_t)n.id] == 0)
      n.flag = NodeFlag::Internal;
    else if (boundaryEdges[(size_t)n.id] == 2 && internalEdges[(size_t)n.id] >= 1)
      n.flag = NodeFlag::Frontal;
    else
      n.flag = NodeFlag::Boundary;
  }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> tangent_kernel(const MapContext& ctx,
                                                           const Eigen::VectorXd& u) {
  Layout lay = ctx.lay();
  OmegaPoint p(lay, ctx.nu);
  p.v = u;
  IntervalU ui = to_interval(p);
  IMat J = jac_G(ctx, ui, ui.z);
  Eigen::MatrixXd Jm((int)J.rows, (int)J.cols);
  for (int i = 0; i < (int)J.rows; ++i)
    for (int j = 0; j < (int)J.cols; ++j) Jm(i, j) = J((size_t)i, (size_t)j).mid();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Jm, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv[0];
  // rows = ndof-2, so the nullspace is at least 2-dimensional; a third small
  // singular value signals a singular/bifurcating mesh point
  if (sv[sv.size() - 1] < 1e-8 * smax) throw KernelDimensionMismatch();

  Eigen::VectorXd v1 = svd.matrixV().col(lay.ndof() - 2);
  Eigen::VectorXd v2 = svd.matrixV().col(lay.ndof() - 1);
  // Gram-Schmidt under the omega inner product
  v1 /= std::sqrt(omega_dot(v1, v1, lay));
  v2 -= omega_dot(v1, v2, lay) * v1;
  v2 /= std::sqrt(omega_dot(v2, v2, lay));
  return {v1, v2};
}

namespace {

Eigen::MatrixXd bordered_jacobian(const MapContext& ctx, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& phi1, const Eigen::VectorXd& phi2,
                                  const FourierElement& zhat) {
  Layout lay = ctx.lay();
  OmegaPoint p(lay, ctx.nu);
  p.v = u;
  IntervalU ui = to_interval(p);
  IMat J = jac_G(ctx, ui, zhat);
  int n = lay.ndof();
  Eigen::MatrixXd Jm(n, n);
  Jm.setZero();
  for (int i = 0; i < (int)J.rows; ++i)
    for (int j = 0; j < n; ++j) Jm(i, j) = J((size_t)i, (size_t)j).mid();
  // dual-packed bordering rows d<phi, u>/du
  for (int b = 0; b < 2; ++b) {
    const Eigen::VectorXd& ph = b == 0 ? phi1 : phi2;
    int row = (int)J.rows + b;
    for (int j = 0; j < lay.nseq; ++j) {
      Jm(row, lay.idx0(j)) = ph[lay.idx0(j)];
      for (int k = 1; k <= lay.M; ++k) {
        Jm(row, lay.idxr(j, k)) = 2.0 * ph[lay.idxr(j, k)];
        Jm(row, lay.idxi(j, k)) = 2.0 * ph[lay.idxi(j, k)];
      }
    }
    for (int s = 0; s < lay.nrho; ++s) Jm(row, lay.irho(s)) = ph[lay.irho(s)];
  }
  return Jm;
}

Eigen::VectorXd bordered_residual(const MapContext& ctx, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& phi1, const Eigen::VectorXd& phi2,
                                  const Eigen::VectorXd& anchor, const FourierElement& zhat) {
  Layout lay = ctx.lay();
  OmegaPoint p(lay, ctx.nu);
  p.v = u;
  IntervalU ui = to_interval(p);
  ResidU r = eval_G(ctx, ui, zhat);
  int n = lay.ndof();
  Eigen::VectorXd rv(n);
  rv.setZero();
  for (int j = 0; j < lay.nseq; ++j) {
    rv[lay.idx0(j)] = r.four.get(j, 0).re.mid();
    for (int k = 1; k <= lay.M; ++k) {
      rv[lay.idxr(j, k)] = r.four.get(j, k).re.mid();
      rv[lay.idxi(j, k)] = r.four.get(j, k).im.mid();
    }
  }
  int base = lay.nfour();
  for (size_t i = 0; i < r.scal.size(); ++i) rv[base + (int)i] = r.scal[i].re.mid();
  rv[n - 2] = omega_dot(phi1, u - anchor, lay);
  rv[n - 1] = omega_dot(phi2, u - anchor, lay);
  return rv;
}

// Omega-style norm of the band-M Fourier rows + scalar rows (residual scale)
double resid_mid_norm(const MapContext& ctx, const Eigen::VectorXd& rv) {
  Layout lay = ctx.lay();
  return omega_norm_packed_mid(rv, lay, ctx);
}

}  // namespace

Eigen::VectorXd newton_refine(const MapContext& ctx, const Eigen::VectorXd& u0,
                              const Eigen::VectorXd& phi1, const Eigen::VectorXd& phi2,
                              const Eigen::VectorXd& anchor, const GrowthConfig& cfg,
                              NewtonReport* report) {
  Layout lay = ctx.lay();
  OmegaPoint anchorPt(lay, ctx.nu);
  anchorPt.v = anchor;
  FourierElement zhat = unpack_z(anchor, lay, ctx.nu);

  Eigen::VectorXd u = u0;
  double res = 0.0;
  for (int it = 0; it <= cfg.newtonMaxIter; ++it) {
    Eigen::VectorXd rv = bordered_residual(ctx, u, phi1, phi2, anchor, zhat);
    res = resid_mid_norm(ctx, rv);
    if (report) {
      report->iters = it;
      report->residual = res;
      report->history.push_back(res);
    }
    if (res < cfg.newtonTol) return u;
    if (it == cfg.newtonMaxIter) break;
    Eigen::MatrixXd J = bordered_jacobian(ctx, u, phi1, phi2, zhat);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    Eigen::VectorXd du = lu.solve(rv);
    if (!du.allFinite()) throw SingularBorderedJacobian();
    if (du.norm() > 1e8 * (1.0 + u.norm())) throw SingularBorderedJacobian();
    u -= du;
  }
  throw NewtonDiverged();
}

namespace {

bool inside_window(const MapContext& ctx, const Eigen::VectorXd& u, const GrowthConfig& cfg) {
  Layout lay = ctx.lay();
  const RhoLayout& rho = ctx.spec->rho;
  double a = u[lay.irho(rho.ia())];
  double al = u[lay.irho(rho.ialpha())], be = u[lay.irho(rho.ibeta())];
  return a >= cfg.ampLo && a <= cfg.ampHi && al >= cfg.alphaLo && al <= cfg.alphaHi &&
         be >= cfg.betaLo && be <= cfg.betaHi;
}

}  // namespace

Mesh seed_hexagon(const MapContext& ctx, const Eigen::VectorXd& u0, const GrowthConfig& cfg) {
  Layout lay = ctx.lay();
  Mesh mesh;
  mesh.lay = lay;
  mesh.nu = ctx.nu;

  auto [p1, p2] = tangent_kernel(ctx, u0);
  Eigen::VectorXd c = newton_refine(ctx, u0, p1, p2, u0, cfg);
  std::tie(p1, p2) = tangent_kernel(ctx, c);
  c = newton_refine(ctx, c, p1, p2, c, cfg);

  MeshNode center;
  center.id = 0;
  center.point = c;
  center.phi1 = p1;
  center.phi2 = p2;
  mesh.nodes.push_back(center);

  for (int j = 0; j < 6; ++j) {
    double th = M_PI / 3.0 * j;
    Eigen::VectorXd pred = c + cfg.sigma * (std::cos(th) * p1 + std::sin(th) * p2);
    Eigen::VectorXd ref = newton_refine(ctx, pred, p1, p2, pred, cfg);
    MeshNode n;
    n.id = j + 1;
    n.point = ref;
    auto [q1, q2] = tangent_kernel(ctx, ref);
    n.phi1 = q1;
    n.phi2 = q2;
    mesh.nodes.push_back(n);
  }
  for (int j = 0; j < 6; ++j) {
    MeshSimplex s;
    s.id = j;
    s.nodes = {0, j + 1, (j + 1) % 6 + 1};
    mesh.simplices.push_back(s);
  }
  mesh.refresh_flags();
  mesh.growthLog.push_back("seed hexagon: 7 nodes, 6 simplices");
  return mesh;
}

long select_frontal_node(const Mesh& mesh) {
  auto em = mesh.edge_map();
  std::vector<int> degree((size_t)mesh.nodes.size(), 0);
  for (const auto& [e, ss] : em) {
    degree[(size_t)e.first]++;
    degree[(size_t)e.second]++;
  }
  long best = -1;
  int bestDeg = -1;
  for (const auto& n : mesh.nodes) {
    if (n.flag != NodeFlag::Frontal) continue;
    if (degree[(size_t)n.id] > bestDeg) {
      bestDeg = degree[(size_t)n.id];
      best = n.id;
    }
  }
  if (best < 0) throw MeshComplete();
  return best;
}

int grow_simplex(const MapContext& ctx, Mesh& mesh, long nodeId, const GrowthConfig& cfg) {
  Layout lay = ctx.lay();
  MeshNode& x = mesh.node(nodeId);
  auto em = mesh.edge_map();

  std::vector<long> boundaryNbrs, internalNbrs;
  for (long nb : mesh.neighbors(nodeId)) {
    auto key = std::make_pair(std::min(nodeId, nb), std::max(nodeId, nb));
    if (em[key].size() == 1)
      boundaryNbrs.push_back(nb);
    else if (mesh.node(nb).flag == NodeFlag::Internal)
      internalNbrs.push_back(nb);
  }
  if (boundaryNbrs.size() != 2) {
    x.flag = NodeFlag::Frozen;
    mesh.growthLog.push_back("node " + std::to_string(nodeId) + ": frozen (bad boundary degree)");
    return 0;
  }
  if (internalNbrs.empty()) {
    // fall back to all non-boundary-edge neighbors
    for (long nb : mesh.neighbors(nodeId)) {
      auto key = std::make_pair(std::min(nodeId, nb), std::max(nodeId, nb));
      if (em[key].size() >= 2) internalNbrs.push_back(nb);
    }
  }
  if (internalNbrs.empty()) {
    x.flag = NodeFlag::Frozen;
    return 0;
  }

  // gap complement direction and boundary edge directions
  Eigen::VectorXd yc = Eigen::VectorXd::Zero(lay.ndof());
  for (long nb : internalNbrs) yc += mesh.node(nb).point;
  yc /= (double)internalNbrs.size();
  yc -= x.point;
  Eigen::VectorXd y1 = mesh.node(boundaryNbrs[0]).point - x.point;
  Eigen::VectorXd y2 = mesh.node(boundaryNbrs[1]).point - x.point;

  // local chart L y = (<phi1,y>, <phi2,y>)
  auto chart = [&](const Eigen::VectorXd& y) {
    return Eigen::Vector2d(omega_dot(x.phi1, y, lay), omega_dot(x.phi2, y, lay));
  };
  Eigen::Vector2d tc = chart(yc), t1 = chart(y1), t2 = chart(y2);
  if (tc.norm() < 1e-14 || t1.norm() < 1e-14 || t2.norm() < 1e-14) {
    x.flag = NodeFlag::Frozen;
    return 0;
  }
  double ac = std::atan2(tc[1], tc[0]);
  auto ccw = [&](const Eigen::Vector2d& t) {
    double a = std::atan2(t[1], t[0]) - ac;
    while (a < 0) a += 2 * M_PI;
    while (a >= 2 * M_PI) a -= 2 * M_PI;
    return a;
  };
  double th1 = ccw(t1), th2 = ccw(t2);
  double gamma = std::fabs(th1 - th2);
  int orient = th2 > th1 ? 1 : 2;  // rotate from the edge with smaller angle

  long nextSimplexId = (long)mesh.simplices.size();
  if (gamma < cfg.gapCloseAngle) {
    MeshSimplex s;
    s.id = nextSimplexId;
    s.nodes = {nodeId, boundaryNbrs[0], boundaryNbrs[1]};
    mesh.simplices.push_back(s);
    mesh.refresh_flags();
    mesh.node(nodeId).flag = NodeFlag::Internal;
    mesh.growthLog.push_back("node " + std::to_string(nodeId) + ": close gap");
    return 1;
  }

  int k = std::max(1, (int)std::floor(3.0 * gamma / M_PI));
  Eigen::Vector2d src = orient == 1 ? t1 : t2;
  src.normalize();
  long firstNb = orient == 1 ? boundaryNbrs[0] : boundaryNbrs[1];
  long lastNb = orient == 1 ? boundaryNbrs[1] : boundaryNbrs[0];

  std::vector<long> newIds;
  std::vector<Eigen::VectorXd> newPts;
  for (int j = 1; j <= k; ++j) {
    double ang = gamma * j / (k + 1);
    Eigen::Vector2d rot(src[0] * std::cos(ang) - src[1] * std::sin(ang),
                        src[0] * std::sin(ang) + src[1] * std::cos(ang));
    Eigen::VectorXd dir = rot[0] * x.phi1 + rot[1] * x.phi2;
    Eigen::VectorXd pred = x.point + cfg.sigma * dir;
    Eigen::VectorXd ref;
    try {
      ref = newton_refine(ctx, pred, x.phi1, x.phi2, pred, cfg);
    } catch (const Error&) {
      mesh.node(nodeId).flag = NodeFlag::Frozen;
      mesh.growthLog.push_back("node " + std::to_string(nodeId) + ": newton failed, frozen");
      return 0;
    }
    if (!inside_window(ctx, ref, cfg)) {
      mesh.node(nodeId).flag = NodeFlag::Frozen;
      mesh.growthLog.push_back("node " + std::to_string(nodeId) + ": window exit, frozen");
      return 0;
    }
    newPts.push_back(ref);
  }
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> newBases;
  for (const auto& p : newPts) {
    try {
      newBases.push_back(tangent_kernel(ctx, p));
    } catch (const Error&) {
      mesh.node(nodeId).flag = NodeFlag::Frozen;
      mesh.growthLog.push_back("node " + std::to_string(nodeId) + ": kernel failed, frozen");
      return 0;
    }
  }
  for (size_t i = 0; i < newPts.size(); ++i) {
    MeshNode n;
    n.id = (long)mesh.nodes.size();
    n.point = newPts[i];
    n.phi1 = newBases[i].first;
    n.phi2 = newBases[i].second;
    mesh.nodes.push_back(n);
    newIds.push_back(n.id);
  }

  int added = 0;
  auto addSimplex = [&](long a, long b, long c) {
    MeshSimplex s;
    s.id = (long)mesh.simplices.size();
    s.nodes = {a, b, c};
    mesh.simplices.push_back(s);
    ++added;
  };
  addSimplex(nodeId, firstNb, newIds[0]);
  for (int j = 0; j + 1 < (int)newIds.size(); ++j)
    addSimplex(nodeId, newIds[(size_t)j], newIds[(size_t)j + 1]);
  addSimplex(nodeId, newIds.back(), lastNb);

  mesh.refresh_flags();
  mesh.node(nodeId).flag = NodeFlag::Internal;
  mesh.growthLog.push_back("node " + std::to_string(nodeId) + ": fan k=" + std::to_string(k));
  return added;
}

Mesh grow_mesh(const MapContext& ctx, const Eigen::VectorXd& seed, const GrowthConfig& cfg) {
  Mesh mesh = seed_hexagon(ctx, seed, cfg);
  while ((long)mesh.simplices.size() < cfg.maxSimplices) {
    long nid;
    try {
      nid = select_frontal_node(mesh);
    } catch (const MeshComplete&) {
      break;
    }
    grow_simplex(ctx, mesh, nid, cfg);
  }
  return mesh;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> align_pair(const Layout& lay,
                                                       const Eigen::VectorXd& b1,
                                                       const Eigen::VectorXd& b2,
                                                       const Eigen::VectorXd& t1,
                                                       const Eigen::VectorXd& t2) {
  // two-dimensional Procrustes in the plane spanned by (b1,b2): the polar
  // factor of M = B^T T under the omega inner product
  Eigen::Matrix2d Mm;
  Mm(0, 0) = omega_dot(b1, t1, lay);
  Mm(0, 1) = omega_dot(b1, t2, lay);
  Mm(1, 0) = omega_dot(b2, t1, lay);
  Mm(1, 1) = omega_dot(b2, t2, lay);
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(Mm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d Q = svd.matrixU() * svd.matrixV().transpose();
  // new basis columns: B * Q
  Eigen::VectorXd n1 = Q(0, 0) * b1 + Q(1, 0) * b2;
  Eigen::VectorXd n2 = Q(0, 1) * b1 + Q(1, 1) * b2;
  return {n1, n2};
}

SimplexData make_simplex_data(const MapContext& ctx, const Mesh& mesh, long simplexId) {
  Layout lay = ctx.lay();
  const MeshSimplex& s = mesh.simplices[(size_t)simplexId];
  SimplexData sd;
  sd.id = simplexId;
  for (int j = 0; j < 3; ++j) {
    const MeshNode& n = mesh.node(s.nodes[(size_t)j]);
    sd.node[(size_t)j] = n.point;
    sd.phi1[(size_t)j] = n.phi1;
    sd.phi2[(size_t)j] = n.phi2;
  }
  for (int j = 1; j < 3; ++j) {
    auto [a1, a2] = align_pair(lay, sd.phi1[(size_t)j], sd.phi2[(size_t)j], sd.phi1[0], sd.phi2[0]);
    sd.phi1[(size_t)j] = a1;
    sd.phi2[(size_t)j] = a2;
  }
  for (int j = 0; j < 3; ++j) {
    sd.c1[(size_t)j] = omega_dot(sd.phi1[(size_t)j], sd.node[(size_t)j], lay);
    sd.c2[(size_t)j] = omega_dot(sd.phi2[(size_t)j], sd.node[(size_t)j], lay);
  }
  return sd;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "# mesh file\n";
  out << "layout " << mesh.lay.nseq << " " << mesh.lay.M << " " << mesh.lay.nrho << " " << mesh.nu
      << "\n";
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& n : mesh.nodes) {
    out << "node " << n.id << " " << (int)n.flag;
    for (int i = 0; i < n.point.size(); ++i) out << " " << n.point[i];
    out << "\n";
    out << "phi1 ";
    for (int i = 0; i < n.phi1.size(); ++i) out << " " << n.phi1[i];
    out << "\n";
    out << "phi2 ";
    for (int i = 0; i < n.phi2.size(); ++i) out << " " << n.phi2[i];
    out << "\n";
  }
  out << "simplices " << mesh.simplices.size() << "\n";
  for (const auto& s : mesh.simplices)
    out << "simplex " << s.id << " " << s.nodes[0] << " " << s.nodes[1] << " " << s.nodes[2]
        << "\n";
  out << "log " << mesh.growthLog.size() << "\n";
  for (const auto& l : mesh.growthLog) out << "# " << l << "\n";
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::string line;
  long nnodes = 0, nsimp = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (key == "#") continue;
    if (key == "layout") {
      ss >> mesh.lay.nseq >> mesh.lay.M >> mesh.lay.nrho >> mesh.nu;
    } else if (key == "nodes") {
      ss >> nnodes;
      mesh.nodes.reserve((size_t)nnodes);
    } else if (key == "node") {
      MeshNode n;
      int flag;
      ss >> n.id >> flag;
      n.flag = (NodeFlag)flag;
      n.point = Eigen::VectorXd::Zero(mesh.lay.ndof());
      for (int i = 0; i < mesh.lay.ndof(); ++i) ss >> n.point[i];
      mesh.nodes.push_back(n);
    } else if (key == "phi1" || key == "phi2") {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.lay.ndof());
      for (int i = 0; i < mesh.lay.ndof(); ++i) ss >> v[i];
      if (key == "phi1")
        mesh.nodes.back().phi1 = v;
      else
        mesh.nodes.back().phi2 = v;
    } else if (key == "simplices") {
      ss >> nsimp;
    } else if (key == "simplex") {
      MeshSimplex s;
      ss >> s.id >> s.nodes[0] >> s.nodes[1] >> s.nodes[2];
      mesh.simplices.push_back(s);
    } else if (key == "log") {
      // remaining lines are comments
    }
  }
  return mesh;
}

}  // namespace pocont
