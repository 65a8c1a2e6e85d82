#pragma once
// Non-rigorous mesh generation: hexagonal seeding, frontal-node growth with
// predictor fans, bordered-Newton refinement, tangent-space bookkeeping.

#include "pocont/zfpmap.hpp"

#include <iosfwd>
#include <optional>

namespace pocont {

struct KernelDimensionMismatch : Error {
  KernelDimensionMismatch() : Error("projected Jacobian kernel is not 2-dimensional") {}
};
struct NewtonDiverged : Error {
  NewtonDiverged() : Error("bordered Newton did not reach tolerance") {}
};
struct SingularBorderedJacobian : Error {
  SingularBorderedJacobian() : Error("bordered Jacobian is singular") {}
};
struct MeshComplete : Error {
  MeshComplete() : Error("no frontal nodes remain") {}
};

enum class NodeFlag { Frontal, Boundary, Internal, Frozen };

struct MeshNode {
  long id = -1;
  Eigen::VectorXd point;
  Eigen::VectorXd phi1, phi2;  // orthonormal tangent basis at the node
  NodeFlag flag = NodeFlag::Boundary;
};

struct MeshSimplex {
  long id = -1;
  std::array<long, 3> nodes{};
};

struct GrowthConfig {
  double sigma = 0.02;
  double gapCloseAngle = 0.5235987755982988;  // pi/6
  double newtonTol = 1e-12;
  int newtonMaxIter = 20;
  double ampLo = -1e300, ampHi = 1e300;
  double alphaLo = -1e300, alphaHi = 1e300;
  double betaLo = -1e300, betaHi = 1e300;
  long maxSimplices = 200;
};

struct Mesh {
  Layout lay;
  double nu = 1.05;
  std::vector<MeshNode> nodes;
  std::vector<MeshSimplex> simplices;
  std::vector<std::string> growthLog;

  const MeshNode& node(long id) const { return nodes[(size_t)id]; }
  MeshNode& node(long id) { return nodes[(size_t)id]; }

  // edge key -> simplex ids sharing it
  std::map<std::pair<long, long>, std::vector<long>> edge_map() const;
  std::vector<long> neighbors(long nodeId) const;
  bool edge_internal(const std::pair<long, long>& e) const;
  void refresh_flags();  // recompute frontal/boundary/internal from topology
};

// orthonormal kernel basis of the projected Jacobian at u, in the symmetric
// real subspace, orthonormal with respect to the omega inner product
std::pair<Eigen::VectorXd, Eigen::VectorXd> tangent_kernel(const MapContext& ctx,
                                                           const Eigen::VectorXd& u);

struct NewtonReport {
  int iters = 0;
  double residual = 0.0;
  std::vector<double> history;
};

// bordered Newton for the map (G; <phi1, u-anchor>; <phi2, u-anchor>).
// The amplitude/anchor reference orbit zhat is frozen to the anchor data.
Eigen::VectorXd newton_refine(const MapContext& ctx, const Eigen::VectorXd& u0,
                              const Eigen::VectorXd& phi1, const Eigen::VectorXd& phi2,
                              const Eigen::VectorXd& anchor, const GrowthConfig& cfg,
                              NewtonReport* report = nullptr);

Mesh seed_hexagon(const MapContext& ctx, const Eigen::VectorXd& u0, const GrowthConfig& cfg);

// most re-entrant frontal node, ties broken by lowest id; throws MeshComplete
long select_frontal_node(const Mesh& mesh);

// one growth step at the given frontal node; returns number of simplices added
int grow_simplex(const MapContext& ctx, Mesh& mesh, long nodeId, const GrowthConfig& cfg);

// full growth loop from a seed point
Mesh grow_mesh(const MapContext& ctx, const Eigen::VectorXd& seed, const GrowthConfig& cfg);

// aligned simplex data: bases at nodes 1,2 rotated/reflected in their own
// tangent planes to be as close as possible to the node-0 basis
SimplexData make_simplex_data(const MapContext& ctx, const Mesh& mesh, long simplexId);

// alignment of one orthonormal pair (b1,b2) to a target pair in its own plane
std::pair<Eigen::VectorXd, Eigen::VectorXd> align_pair(const Layout& lay,
                                                       const Eigen::VectorXd& b1,
                                                       const Eigen::VectorXd& b2,
                                                       const Eigen::VectorXd& t1,
                                                       const Eigen::VectorXd& t2);

void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);

}  // namespace pocont
