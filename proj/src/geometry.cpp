#include "metaprobe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaprobe/errors.hpp"

namespace metaprobe::geometry {

const char* to_string(PlaneMode m) {
    return m == PlaneMode::Centered ? "centered" : "uncentered";
}

const char* to_string(AngleMethod m) {
    return m == AngleMethod::Dihedral ? "dihedral" : "principal";
}

const char* to_string(Degeneracy d) {
    switch (d) {
        case Degeneracy::None: return "none";
        case Degeneracy::MEqualsAnchor: return "m_equals_anchor";
        case Degeneracy::CollinearReferences: return "collinear_references";
    }
    return "none";
}

PlaneMode plane_mode_from_string(const std::string& s) {
    if (s == "centered") return PlaneMode::Centered;
    if (s == "uncentered") return PlaneMode::Uncentered;
    throw InvalidArgument("unknown plane mode: " + s);
}

AngleMethod angle_method_from_string(const std::string& s) {
    if (s == "dihedral") return AngleMethod::Dihedral;
    if (s == "principal") return AngleMethod::PrincipalAngle;
    throw InvalidArgument("unknown angle method: " + s);
}

static void check_same_dim(const Vec& a, const Vec& b, const char* where) {
    if (a.size() != b.size())
        throw DimensionMismatch(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

static void check_finite(const Vec& v, const char* where) {
    if (!v.allFinite()) throw InvalidArgument(std::string(where) + ": non-finite entry");
}

double cosine(const Vec& u, const Vec& v) {
    check_same_dim(u, v, "cosine");
    check_finite(u, "cosine");
    check_finite(v, "cosine");
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu < kZeroNormTol || nv < kZeroNormTol) throw ZeroVectorError("cosine: zero-norm vector");
    double c = u.dot(v) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

double euclidean(const Vec& u, const Vec& v) {
    check_same_dim(u, v, "euclidean");
    return (u - v).norm();
}

Mat svd_subspace(const Mat& rows, int k) {
    if (rows.rows() < 1) throw InvalidArgument("svd_subspace: no rows");
    if (k < 1 || k > std::min(rows.rows(), rows.cols()))
        throw InvalidArgument("svd_subspace: k out of range");
    if (!rows.allFinite()) throw InvalidArgument("svd_subspace: non-finite entry");

    Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma.size() ? sigma(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) >= kRankRelTol * smax && sigma(i) > 0.0) ++rank;
    }
    if (rank < k)
        throw RankDeficientError("svd_subspace: numerical rank " + std::to_string(rank) +
                                 " < k=" + std::to_string(k));
    return svd.matrixV().leftCols(k);
}

AffinePlane fit_plane(const Vec& r1, const Vec& r2, const Vec& s, PlaneMode mode) {
    check_same_dim(r1, r2, "fit_plane");
    check_same_dim(r1, s, "fit_plane");
    const Eigen::Index d = r1.size();
    if (d < 2) throw DimensionMismatch("fit_plane: dimension must be >= 2");

    Mat rows(3, d);
    rows.row(0) = r1;
    rows.row(1) = r2;
    rows.row(2) = s;

    AffinePlane plane;
    plane.mode = mode;
    if (mode == PlaneMode::Centered) {
        plane.anchor = (r1 + r2 + s) / 3.0;
        rows.rowwise() -= plane.anchor.transpose();
    } else {
        plane.anchor = Vec::Zero(d);
    }
    try {
        plane.basis = svd_subspace(rows, 2);
    } catch (const RankDeficientError&) {
        throw CollinearReferencesError("fit_plane: the three points do not determine a plane");
    }
    return plane;
}

double perpendicular_distance(const AffinePlane& plane, const Vec& m) {
    check_same_dim(plane.anchor, m, "perpendicular_distance");
    Vec rel = m - plane.anchor;
    Vec proj = plane.basis * (plane.basis.transpose() * rel);
    return (rel - proj).norm();
}

DihedralResult dihedral_cosine(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m) {
    check_same_dim(r1, r2, "dihedral_cosine");
    check_same_dim(r1, s, "dihedral_cosine");
    check_same_dim(r1, m, "dihedral_cosine");

    Vec edge = r2 - r1;
    const double edge_norm = edge.norm();
    if (edge_norm < kZeroNormTol) throw SharedEdgeError("dihedral_cosine: r1 == r2");
    Vec u = edge / edge_norm;

    Vec vs = (s - r1) - (s - r1).dot(u) * u;
    if (vs.norm() < kEdgeTol)
        throw CollinearReferencesError("dihedral_cosine: s lies on the r1-r2 line");

    Vec vm = (m - r1) - (m - r1).dot(u) * u;
    if (vm.norm() < kEdgeTol) return {1.0, Degeneracy::MEqualsAnchor};

    double c = std::abs(vs.dot(vm) / (vs.norm() * vm.norm()));
    return {std::min(c, 1.0), Degeneracy::None};
}

DihedralResult principal_angle_cosine(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m,
                                      PlaneMode mode) {
    // Both planes share {r1,r2}; if m collapses onto the edge the
    // interpretation plane is undefined, same convention as the dihedral.
    Vec edge = r2 - r1;
    if (edge.norm() < kZeroNormTol) throw SharedEdgeError("principal_angle_cosine: r1 == r2");
    AffinePlane gamma = fit_plane(r1, r2, s, mode);
    AffinePlane beta;
    try {
        beta = fit_plane(r1, r2, m, mode);
    } catch (const CollinearReferencesError&) {
        return {1.0, Degeneracy::MEqualsAnchor};
    }
    Eigen::JacobiSVD<Mat> svd(gamma.basis.transpose() * beta.basis);
    double c = svd.singularValues()(0);
    return {std::min(c, 1.0), Degeneracy::None};
}

double adjacency_sum(const Vec& m, const Vec& r1, const Vec& r2) {
    return cosine(m, r1) + cosine(m, r2);
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        // positions i..j (0-based) share the average of 1-based ranks
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw DimensionMismatch("spearman: length mismatch");
    const size_t n = xs.size();
    if (n < 2) throw InvalidArgument("spearman: need at least 2 observations");

    std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);

    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ConstantSeriesError("spearman: a series has zero rank variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SpatialScores spatial_scores(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m,
                             const GeometryOptions& opts) {
    SpatialScores sc;
    AffinePlane gamma = fit_plane(r1, r2, s, opts.mode);
    sc.d_p = perpendicular_distance(gamma, m);
    DihedralResult angle = (opts.angle == AngleMethod::Dihedral)
                               ? dihedral_cosine(r1, r2, s, m)
                               : principal_angle_cosine(r1, r2, s, m, opts.mode);
    sc.cos_theta = angle.value;
    sc.degenerate = angle.flag;
    sc.ad = adjacency_sum(m, r1, r2);
    return sc;
}

}  // namespace metaprobe::geometry
