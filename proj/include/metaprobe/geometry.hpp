#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace metaprobe::geometry {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace metaprobe::geometry

namespace metaprobe {
namespace geom = geometry;  // short alias used across the codebase
}

namespace metaprobe::geometry {

inline constexpr double kZeroNormTol = 1e-12;
inline constexpr double kRankRelTol = 1e-8;      // sigma_i < tol * sigma_max counts as zero
inline constexpr double kEdgeTol = 1e-10;        // in-plane / collinearity cutoff for dihedral

enum class PlaneMode { Centered, Uncentered };
enum class AngleMethod { Dihedral, PrincipalAngle };
enum class Degeneracy { None, MEqualsAnchor, CollinearReferences };

const char* to_string(PlaneMode m);
const char* to_string(AngleMethod m);
const char* to_string(Degeneracy d);
PlaneMode plane_mode_from_string(const std::string& s);
AngleMethod angle_method_from_string(const std::string& s);

// Anchor plus two orthonormal basis columns (d x 2).
// Centered: anchor is the centroid of the three defining points, so the
// plane literally contains them. Uncentered: anchor is the origin and the
// basis comes from the raw rows' top-2 right singular vectors.
struct AffinePlane {
    Vec anchor;
    Mat basis;
    PlaneMode mode = PlaneMode::Centered;
};

struct DihedralResult {
    double value = 1.0;              // |cos| of the plane angle, in [0,1]
    Degeneracy flag = Degeneracy::None;
};

struct SpatialScores {
    double d_p = 0.0;
    double cos_theta = 1.0;
    double ad = 0.0;
    std::optional<double> d_o;
    Degeneracy degenerate = Degeneracy::None;
};

struct GeometryOptions {
    PlaneMode mode = PlaneMode::Centered;
    AngleMethod angle = AngleMethod::Dihedral;
};

// <u,v>/(|u||v|). Throws ZeroVectorError when either norm < 1e-12.
double cosine(const Vec& u, const Vec& v);

double euclidean(const Vec& u, const Vec& v);

// Top-k right singular vectors (columns) of the matrix whose rows are the
// inputs. Throws RankDeficientError when the numerical rank is below k.
Mat svd_subspace(const Mat& rows, int k);

AffinePlane fit_plane(const Vec& r1, const Vec& r2, const Vec& s,
                      PlaneMode mode = PlaneMode::Centered);

double perpendicular_distance(const AffinePlane& plane, const Vec& m);

// |cos| of the dihedral angle along the shared r1-r2 edge between the plane
// through {r1,r2,s} and the plane through {r1,r2,m}. m on the edge is a
// flagged degenerate case with value 1 (no conceptual deviation).
DihedralResult dihedral_cosine(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m);

// First principal angle between the two fitted plane spans; alternative to
// the dihedral, selectable via GeometryOptions.
DihedralResult principal_angle_cosine(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m,
                                      PlaneMode mode);

// cosine(m,r1) + cosine(m,r2), in [-2,2].
double adjacency_sum(const Vec& m, const Vec& r1, const Vec& r2);

// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(const std::vector<double>& xs);

// Pearson correlation of average ranks. Throws ConstantSeriesError when
// either series has zero rank variance.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Full per-item scoring: plane fit + d_p + plane angle + Ad.
// Throws CollinearReferencesError when {r1,r2,s} do not determine a plane.
SpatialScores spatial_scores(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m,
                             const GeometryOptions& opts = {});

}  // namespace metaprobe::geometry
