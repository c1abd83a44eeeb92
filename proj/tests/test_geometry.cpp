#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "metaprobe/errors.hpp"
#include "metaprobe/geometry.hpp"
#include "metaprobe/rng.hpp"

using namespace metaprobe;
using geometry::Vec;
using geometry::Mat;

namespace {

Vec rand_vec(DetRng& rng, int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i)
        v[i] = static_cast<double>(rng.next() >> 11) / 9007199254740992.0 * 2.0 - 1.0;
    return v;
}

Vec cross(const Vec& a, const Vec& b) {
    Vec c(3);
    c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
    return c;
}

// independent d_p oracle in 3D: distance from m to the plane through r1,r2,s
double dp_cross_oracle(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m) {
    Vec n = cross(Vec(r2 - r1), Vec(s - r1));
    return std::abs(n.dot(m - r1)) / n.norm();
}

// independent dihedral oracle in 3D: angle between the two plane normals
double dihedral_cross_oracle(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m) {
    Vec n1 = cross(Vec(r2 - r1), Vec(s - r1));
    Vec n2 = cross(Vec(r2 - r1), Vec(m - r1));
    return std::abs(n1.dot(n2)) / (n1.norm() * n2.norm());
}

// independent projector oracle at any dimension: Gram-Schmidt on the in-plane
// directions, then P = QQ^T
double dp_gram_schmidt_oracle(const Vec& r1, const Vec& r2, const Vec& s, const Vec& m) {
    Vec c = (r1 + r2 + s) / 3.0;
    Vec u1 = r1 - c;
    u1 /= u1.norm();
    Vec u2 = r2 - c;
    u2 -= u1.dot(u2) * u1;
    u2 /= u2.norm();
    Vec rel = m - c;
    Vec resid = rel - u1.dot(rel) * u1 - u2.dot(rel) * u2;
    return resid.norm();
}

std::vector<double> brute_force_ranks(const std::vector<double>& xs) {
    std::vector<double> ranks(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        size_t smaller = 0, equal = 0;
        for (size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] < xs[i]) ++smaller;
            if (xs[j] == xs[i]) ++equal;
        }
        // average of the occupied rank positions [smaller+1, smaller+equal]
        ranks[i] = smaller + (equal + 1) / 2.0;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
    double num = 0, da = 0, db = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("cosine and euclidean basics") {
    Vec a(3), b(3);
    a << 1, 0, 0;
    b << 0, 1, 0;
    CHECK(geometry::cosine(a, b) == doctest::Approx(0.0));
    CHECK(geometry::cosine(a, a) == doctest::Approx(1.0));
    CHECK(geometry::euclidean(a, b) == doctest::Approx(std::sqrt(2.0)));
    Vec z = Vec::Zero(3);
    CHECK_THROWS_AS(geometry::cosine(a, z), ZeroVectorError);
    Vec c(2);
    c << 1, 2;
    CHECK_THROWS_AS(geometry::cosine(a, c), DimensionMismatch);
}

TEST_CASE("cosine is clamped to [-1,1] against rounding") {
    Vec a(2), b(2);
    a << 1e-7, 1e-7;
    b << 1e-7, 1e-7;
    double c = geometry::cosine(a, b);
    CHECK(c <= 1.0);
    CHECK(c >= -1.0);
}

TEST_CASE("svd_subspace of orthonormal axes is the coordinate plane") {
    Mat rows(2, 4);
    rows.setZero();
    rows(0, 0) = 1.0;  // e1
    rows(1, 1) = 1.0;  // e2
    Mat basis = geometry::svd_subspace(rows, 2);
    // the span must reproduce e1 and e2 exactly
    for (int r = 0; r < 2; ++r) {
        Vec v = rows.row(r).transpose();
        Vec proj = basis * (basis.transpose() * v);
        CHECK((proj - v).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(geometry::svd_subspace(Mat::Zero(2, 3), 2), RankDeficientError);
}

TEST_CASE("fit_plane centered passes through all three points") {
    DetRng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Vec r1 = rand_vec(rng, 8), r2 = rand_vec(rng, 8), s = rand_vec(rng, 8);
        auto plane = geometry::fit_plane(r1, r2, s, geometry::PlaneMode::Centered);
        for (const Vec* p : {&r1, &r2, &s})
            CHECK(geometry::perpendicular_distance(plane, *p) < 1e-9);
    }
}

TEST_CASE("projector is idempotent") {
    DetRng rng(12);
    Vec r1 = rand_vec(rng, 16), r2 = rand_vec(rng, 16), s = rand_vec(rng, 16);
    auto plane = geometry::fit_plane(r1, r2, s);
    Mat P = plane.basis * plane.basis.transpose();
    CHECK((P * P - P).norm() < 1e-12);
}

TEST_CASE("perpendicular distance matches 3D cross-product closed form") {
    DetRng rng(13);
    geometry::GeometryOptions opts;  // centered + dihedral
    for (int trial = 0; trial < 500; ++trial) {
        Vec r1 = rand_vec(rng, 3), r2 = rand_vec(rng, 3), s = rand_vec(rng, 3),
            m = rand_vec(rng, 3);
        auto scores = geometry::spatial_scores(r1, r2, s, m, opts);
        CHECK(scores.d_p == doctest::Approx(dp_cross_oracle(r1, r2, s, m)).epsilon(1e-9));
        CHECK(scores.cos_theta ==
              doctest::Approx(dihedral_cross_oracle(r1, r2, s, m)).epsilon(1e-9));
    }
}

TEST_CASE("perpendicular distance matches Gram-Schmidt oracle at d=32") {
    DetRng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        Vec r1 = rand_vec(rng, 32), r2 = rand_vec(rng, 32), s = rand_vec(rng, 32),
            m = rand_vec(rng, 32);
        auto plane = geometry::fit_plane(r1, r2, s);
        CHECK(geometry::perpendicular_distance(plane, m) ==
              doctest::Approx(dp_gram_schmidt_oracle(r1, r2, s, m)).epsilon(1e-9));
    }
}

TEST_CASE("dihedral degeneracies") {
    // kept away from the origin: Ad needs nonzero reference vectors
    Vec r1(3), r2(3), s(3);
    r1 << 1, 0, 0;
    r2 << 2, 0, 0;
    s << 1, 1, 0;

    SUBCASE("m equals s gives (d_p 0, cos 1)") {
        auto sc = geometry::spatial_scores(r1, r2, s, s);
        CHECK(sc.d_p == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sc.cos_theta == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sc.degenerate == geometry::Degeneracy::None);
    }
    SUBCASE("m equals r1 is flagged MEqualsAnchor with cos 1") {
        auto sc = geometry::spatial_scores(r1, r2, s, r1);
        CHECK(sc.d_p == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sc.cos_theta == 1.0);
        CHECK(sc.degenerate == geometry::Degeneracy::MEqualsAnchor);
    }
    SUBCASE("m anywhere on the shared edge is MEqualsAnchor") {
        Vec m = r1 + 0.37 * (r2 - r1);
        auto res = geometry::dihedral_cosine(r1, r2, s, m);
        CHECK(res.value == 1.0);
        CHECK(res.flag == geometry::Degeneracy::MEqualsAnchor);
    }
    SUBCASE("collinear references throw") {
        Vec sc = r1 + 0.5 * (r2 - r1);
        CHECK_THROWS_AS(geometry::spatial_scores(r1, r2, sc, s), CollinearReferencesError);
        CHECK_THROWS_AS(geometry::dihedral_cosine(r1, r2, sc, s), CollinearReferencesError);
    }
    SUBCASE("identical r1 and r2 is a shared-edge error") {
        CHECK_THROWS_AS(geometry::dihedral_cosine(r1, r1, s, s), SharedEdgeError);
    }
}

TEST_CASE("right-angle and flat dihedral values") {
    Vec r1(3), r2(3), s(3), m(3);
    r1 << 0, 0, 0;
    r2 << 2, 0, 0;
    s << 1, 1, 0;
    m << 1, 0, 1;  // plane through m is vertical: dihedral 90 degrees
    auto res = geometry::dihedral_cosine(r1, r2, s, m);
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-12));
    m << 1, -3, 0;  // coplanar, opposite side: |cos| folds to 1
    CHECK(geometry::dihedral_cosine(r1, r2, s, m).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("first principal angle is 1 for shared-edge planes and matches oracle otherwise") {
    DetRng rng(15);
    Vec r1 = rand_vec(rng, 6), r2 = rand_vec(rng, 6), s = rand_vec(rng, 6), m = rand_vec(rng, 6);
    auto res = geometry::principal_angle_cosine(r1, r2, s, m, geometry::PlaneMode::Centered);
    // both planes contain the r1-r2 direction, so the first principal angle is 0
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("orthogonal and translation invariance at d=50") {
    DetRng rng(16);
    const int d = 50;
    Vec r1 = rand_vec(rng, d), r2 = rand_vec(rng, d), s = rand_vec(rng, d), m = rand_vec(rng, d);
    geometry::GeometryOptions centered;
    auto base = geometry::spatial_scores(r1, r2, s, m, centered);
    for (int trial = 0; trial < 20; ++trial) {
        Mat g(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                g(i, j) = static_cast<double>(rng.next() >> 11) / 9007199254740992.0 - 0.5;
        Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
        Vec t = rand_vec(rng, d) * 3.0;
        auto rot = geometry::spatial_scores(q * r1, q * r2, q * s, q * m, centered);
        CHECK(std::abs(rot.d_p - base.d_p) < 1e-8);
        CHECK(std::abs(rot.cos_theta - base.cos_theta) < 1e-8);
        CHECK(std::abs(rot.ad - base.ad) < 1e-8);  // cosines survive rotation too
        auto shifted = geometry::spatial_scores(r1 + t, r2 + t, s + t, m + t, centered);
        CHECK(std::abs(shifted.d_p - base.d_p) < 1e-8);
        CHECK(std::abs(shifted.cos_theta - base.cos_theta) < 1e-8);
    }
}

TEST_CASE("uncentered mode anchors the plane at the origin") {
    Vec r1(3), r2(3), s(3), m(3);
    r1 << 5, 0, 0;
    r2 << 5, 1, 0;
    s << 5, 0, 1;
    m << 5, 0.5, 0.5;
    geometry::GeometryOptions unc;
    unc.mode = geometry::PlaneMode::Uncentered;
    auto plane = geometry::fit_plane(r1, r2, s, geometry::PlaneMode::Uncentered);
    CHECK(plane.anchor.norm() == 0.0);
    // the centered fit contains m exactly; the origin-anchored fit does not
    auto cen = geometry::spatial_scores(r1, r2, s, m);
    auto raw = geometry::spatial_scores(r1, r2, s, m, unc);
    CHECK(cen.d_p == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(raw.d_p > 0.01);
}

TEST_CASE("adjacency_sum equals the sum of the two cosines") {
    DetRng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        Vec m = rand_vec(rng, 10), r1 = rand_vec(rng, 10), r2 = rand_vec(rng, 10);
        double expect = geometry::cosine(m, r1) + geometry::cosine(m, r2);
        CHECK(geometry::adjacency_sum(m, r1, r2) == doctest::Approx(expect).epsilon(1e-12));
    }
    Vec a(3), b(3);
    a << 1, 2, 3;
    b << 1, 2, 3;
    CHECK(geometry::adjacency_sum(a, b, b) == doctest::Approx(2.0));
}

TEST_CASE("average_ranks handles ties with fractional ranks") {
    CHECK(geometry::average_ranks({10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(geometry::average_ranks({5, 5, 5}) == std::vector<double>{2, 2, 2});
    CHECK(geometry::average_ranks({3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("spearman agrees with brute-force ranks on tied series") {
    DetRng rng(18);
    for (int trial = 0; trial < 100; ++trial) {
        size_t n = 5 + rng.below(20);
        std::vector<double> xs(n), ys(n);
        bool xconst = true, yconst = true;
        for (size_t i = 0; i < n; ++i) {
            xs[i] = static_cast<double>(rng.below(5));
            ys[i] = static_cast<double>(rng.below(5));
            if (xs[i] != xs[0]) xconst = false;
            if (ys[i] != ys[0]) yconst = false;
        }
        if (xconst || yconst) continue;
        double expect = pearson(brute_force_ranks(xs), brute_force_ranks(ys));
        CHECK(geometry::spearman(xs, ys) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("spearman endpoints and errors") {
    CHECK(geometry::spearman({1, 2, 3}, {10, 20, 30}) == doctest::Approx(1.0));
    CHECK(geometry::spearman({1, 2, 3}, {30, 20, 10}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(geometry::spearman({1, 1, 1}, {1, 2, 3}), ConstantSeriesError);
    CHECK_THROWS_AS(geometry::spearman({1, 2}, {1, 2, 3}), DimensionMismatch);
}
