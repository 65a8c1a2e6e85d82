#pragma once
// Computer-assisted proof of a simplex: construction of the approximate
// derivative and approximate inverse on a virtually padded band, the four
// radii-polynomial bounds, the radii polynomial itself, and adaptive
// refinement of simplices that fail on interval over-estimation.

#include "pocont/continuation.hpp"

namespace pocont {

struct FrequencyNearZero : Error {
  FrequencyNearZero() : Error("tail frequency factor not bounded away from zero") {}
};
struct SingularFiniteBlock : Error {
  SingularFiniteBlock() : Error("finite block is numerically singular") {}
};
struct NoValidRadius : Error {
  std::string diagnostic;
  NoValidRadius(const std::string& d) : Error("no valid radius: " + d), diagnostic(d) {}
};
struct MaxDepthExceeded : Error {
  MaxDepthExceeded() : Error("adaptive refinement exceeded maximum depth") {}
};
struct ValidationFailed : Error {
  ValidationFailed(const std::string& d) : Error("validation failed: " + d) {}
};

// A_s on the padded band: linear interpolation of per-vertex finite matrices
// (which embed the bordered-Jacobian inverse, the annulus tail diagonal and
// the boundary-condition tail couplings), plus the exact analytic tail beyond
// the padded band.
struct PaddedInverse {
  int MM = 0;        // padded band
  Layout lay;        // padded layout
  std::array<Eigen::MatrixXd, 3> A;  // vertex matrices
  std::array<double, 3> phiHat{};    // vertex tail frequency factors
  IMat interp(const IVal& s1, const IVal& s2) const;
};

// square padded Jacobian of F_s at the interpolated data, interval in s
IMat padded_jacobian(const MapContext& ctx, const SimplexData& sd, int MM, const IVal& s1,
                     const IVal& s2);

SimplexData pad_simplex(const SimplexData& sd, const Layout& from, const Layout& to);
MapContext padded_ctx(const MapContext& ctx, int MM);

PaddedInverse build_As(const MapContext& ctx, const SimplexData& sd, int MM);

// magnitude view of an interval operator in the packed real representation:
// entry (outSlot, inSlot) bounds the complex-pair gain between the slots
struct MagView {
  int nseq = 0, MM = 0, nrho = 0;
  std::vector<double> m;  // (nslots)^2
  int nfs() const { return nseq * (MM + 1); }
  int nslots() const { return nfs() + nrho; }
  int fslot(int j, int k) const { return j * (MM + 1) + k; }
  int rslot(int s) const { return nfs() + s; }
  double& at(int o, int i) { return m[(size_t)o * (size_t)nslots() + (size_t)i]; }
  double at(int o, int i) const { return m[(size_t)o * (size_t)nslots() + (size_t)i]; }
};

MagView mag_view(const IMat& A, const Layout& lay);

// operator-norm pieces of a padded finite operator under the Omega norm
struct BlockNorms {
  double FtoF = 0, FtoR = 0, RtoF = 0, RtoR = 0;  // by input row block (F: Fourier)
};
BlockNorms block_norms(const MagView& mv, const MapContext& ctx, int kmaxIn);
double op_norm_omega(const MagView& mv, const MapContext& ctx);

struct Certificate {
  long simplexId = -1;
  int depth = 0;
  std::array<double, 2> scorner{{0.0, 0.0}};
  double sscale = 1.0;
  IVal Y0, Z0, Z1, Z2;  // Z2 evaluated at r0
  double r0 = 0.0;
  IVal c;               // Z0 + Z1 + Z2(r0)
  int MM = 0;
  double wallSec = 0.0;
};

struct ValidationConfig {
  std::vector<int> paddingFactors{1, 2, 4};
  double paddingStopImprovement = 0.10;
  std::vector<double> radiusFactors{1.5, 2.0, 5.0, 10.0, 50.0, 100.0};
  int maxDepth = 4;
  double z2ReferenceRadius = 0.0;  // 0: derive candidates from Y0
};

// bound routines; As must be built at the padding the caller wants
IVal bound_Y0(const MapContext& ctx, const SimplexData& sd, const PaddedInverse& As);
IVal bound_Z0(const MapContext& ctx, const SimplexData& sd, const PaddedInverse& As);
IVal bound_Z1(const MapContext& ctx, const SimplexData& sd, const PaddedInverse& As);
IVal bound_Z2(const MapContext& ctx, const SimplexData& sd, const PaddedInverse& As, double r);

struct RadiiResult {
  double r0 = 0.0;
  IVal Z2;  // at r0
  IVal c;
};
// smallest verified radius from a geometric candidate sweep
RadiiResult radii_solve(const MapContext& ctx, const SimplexData& sd, const PaddedInverse& As,
                        const IVal& Y0, const IVal& Z0, const IVal& Z1,
                        const ValidationConfig& cfg);

// subdivide into four children with interpolated node data (no re-Newton)
std::array<SimplexData, 4> adaptive_refine(const MapContext& ctx, const SimplexData& sd);

// orchestration: padding escalation, radii polynomial, adaptive refinement
std::vector<Certificate> validate_simplex(const MapContext& ctx, const SimplexData& sd,
                                          const ValidationConfig& cfg);

// certificate files
void write_certificates(const std::vector<Certificate>& certs, std::ostream& out);
std::vector<Certificate> read_certificates(std::istream& in);

// mesh-level driver, OpenMP-parallel over simplices when workers > 1;
// the serial path (workers == 1) is the reference implementation
struct MeshValidationSummary {
  long attempted = 0, validated = 0, refined = 0, failed = 0;
  std::vector<long> failedIds;
};
MeshValidationSummary validate_mesh(const MapContext& ctx, const Mesh& mesh,
                                    const ValidationConfig& cfg, long idLo, long idHi,
                                    int workers, const std::string& outDir,
                                    std::vector<Certificate>* collect = nullptr);

}  // namespace pocont
