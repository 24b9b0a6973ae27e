#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../common/fixtures.hpp"
#include "gave/alignment.hpp"
#include "gave/error.hpp"
#include "gave/metrics.hpp"
#include "gave/oracle.hpp"

using namespace gave;

namespace {

struct Problem {
    std::vector<Vec3> x, y;
    std::vector<double> w;
    Pose truth;
};

Problem random_problem(std::uint64_t seed, std::size_t n, double noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    Problem p;
    p.truth = {oracle::random_rotation(seed), Vec3(g(rng), g(rng), g(rng))};
    for (std::size_t i = 0; i < n; ++i) {
        p.x.emplace_back(g(rng), g(rng), g(rng));
        p.y.push_back(p.truth(p.x.back()) + noise * Vec3(g(rng), g(rng), g(rng)));
        p.w.push_back(u(rng));
    }
    return p;
}

double objective(const Problem& p, const Pose& pose) {
    double s = 0;
    for (std::size_t i = 0; i < p.x.size(); ++i) s += p.w[i] * (pose(p.x[i]) - p.y[i]).squaredNorm();
    return s;
}

}  // namespace

TEST_CASE("procrustes recovers an exact rigid motion") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Problem p = random_problem(seed, 12, 0.0);
        const Pose est = weighted_procrustes(p.x, p.y, p.w);
        CHECK(rotation_error(est.rotation, p.truth.rotation) < 1e-6);
        CHECK(translation_error(est.translation, p.truth.translation) < 1e-6);
        CHECK(est.is_valid(1e-9));
    }
}

TEST_CASE("identical clouds give the identity") {
    const Problem p = random_problem(3, 6, 0.0);
    const Pose est = weighted_procrustes(p.x, p.x, p.w);
    CHECK((est.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(est.translation.norm() < 1e-12);
}

TEST_CASE("mirrored targets still yield a proper rotation") {
    Problem p = random_problem(4, 10, 0.0);
    for (auto& v : p.y) v.x() = -v.x();
    const Pose est = weighted_procrustes(p.x, p.y, p.w);
    CHECK(est.rotation.determinant() == doctest::Approx(1.0));
}

TEST_CASE("optimality: no nearby pose has a lower objective") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const Problem p = random_problem(seed, 30, 0.05);
        const Pose est = weighted_procrustes(p.x, p.y, p.w);
        const double best = objective(p, est);
        for (int k = 0; k < 50; ++k) {
            const Pose nearby = fixtures::perturbed(est, 0.5, 0.005, rng);
            CHECK(objective(p, nearby) >= best - 1e-12);
        }
    }
}

TEST_CASE("equivariance and weight scaling") {
    const Problem p = random_problem(6, 15, 0.02);
    const Pose est = weighted_procrustes(p.x, p.y, p.w);
    const Pose motion{oracle::random_rotation(60), Vec3(0.3, -1.2, 2.0)};
    const Pose moved = weighted_procrustes(p.x, transform(p.y, motion), p.w);
    const Pose expect = pose_compose(motion, est);
    CHECK((moved.matrix() - expect.matrix()).cwiseAbs().maxCoeff() < 1e-9);

    std::vector<double> scaled = p.w;
    for (auto& v : scaled) v *= 37.5;
    CHECK((weighted_procrustes(p.x, p.y, scaled).matrix() - est.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-weight pairs have no influence") {
    Problem p = random_problem(7, 10, 0.0);
    p.x.emplace_back(5, 5, 5);
    p.y.emplace_back(-9, 1, 0);
    p.w.push_back(0.0);
    const Pose est = weighted_procrustes(p.x, p.y, p.w);
    CHECK(rotation_error(est.rotation, p.truth.rotation) < 1e-6);
}

TEST_CASE("degenerate procrustes inputs") {
    auto kind_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Empty;  // sentinel; no error is a failure below
    };
    const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    const std::vector<double> ones(4, 1.0);
    CHECK(kind_of([&] { weighted_procrustes(line, line, ones); }) == ErrorKind::Degenerate);

    const Problem p = random_problem(8, 5, 0.0);
    std::vector<double> two{1, 1, 0, 0, 0};
    CHECK(kind_of([&] { weighted_procrustes(p.x, p.y, two); }) == ErrorKind::Degenerate);
    std::vector<double> negative{1, 1, 1, -1, 1};
    CHECK(kind_of([&] { weighted_procrustes(p.x, p.y, negative); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { weighted_procrustes(std::span(p.x).first(4), p.y, p.w); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("gradient") {
    SUBCASE("matches central differences") {
        const auto r = oracle::gradcheck(99, 5);
        CHECK(r.trials == 5);
        CHECK(r.max_relative_error < 1e-4);
    }
    SUBCASE("pose agrees with the solver") {
        const Problem p = random_problem(9, 20, 0.05);
        const auto g = procrustes_grad(p.x, p.y, p.w);
        CHECK((g.pose.matrix() - weighted_procrustes(p.x, p.y, p.w).matrix()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(g.d_x.rows() == 12);
        CHECK(g.d_x.cols() == 60);
        CHECK(g.d_y.cols() == 60);
        CHECK(g.d_w.cols() == 20);
    }
    SUBCASE("translation moves one-for-one with a uniform target shift") {
        const Problem p = random_problem(10, 20, 0.05);
        const auto g = procrustes_grad(p.x, p.y, p.w);
        for (int a = 0; a < 3; ++a) {
            double sum = 0;
            for (std::size_t i = 0; i < 20; ++i) sum += g.d_y(9 + a, 3 * i + a);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    SUBCASE("repeated singular values are refused") {
        // Symmetric cross-covariance with all singular values equal.
        const std::vector<Vec3> x{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        const std::vector<double> w(6, 1.0);
        CHECK_THROWS_AS(procrustes_grad(x, x, w), Error);
    }
}

TEST_CASE("randomized alignment") {
    std::mt19937_64 rng(11);
    const Problem p = random_problem(11, 200, 0.0);
    PointCloud ref, tgt;
    ref.positions = p.x;
    tgt.positions = p.y;
    std::uniform_real_distribution<double> u(-3, 3);
    CorrespondenceSet c;
    for (std::size_t i = 0; i < 200; ++i) {
        if (i % 5 == 1) tgt.positions[i] = Vec3(u(rng), u(rng), u(rng));  // 20% outliers
        c.push_back({i, i, 0.5 + 0.5 * static_cast<double>(i % 7) / 7});
    }
    AlignParams params;
    AlignReport report;
    const Pose est = align_randomized(c, ref, tgt, params, report);
    CHECK(rotation_error(est.rotation, p.truth.rotation) < 1e-6);
    CHECK(translation_error(est.translation, p.truth.translation) < 1e-6);
    CHECK(report.inliers == 160);

    SUBCASE("deterministic for a seed") {
        const Pose again = align_randomized(c, ref, tgt, params);
        CHECK(again.matrix() == est.matrix());
    }
    SUBCASE("argument checks") {
        AlignParams bad = params;
        bad.subset_size = 2;
        CHECK_THROWS_AS(align_randomized(c, ref, tgt, bad), Error);
        CHECK_THROWS_AS(align_randomized(CorrespondenceSet(c.begin(), c.begin() + 5), ref, tgt, params), Error);
        CorrespondenceSet oob = c;
        oob[0].tgt_index = 1000;
        CHECK_THROWS_AS(align_randomized(oob, ref, tgt, params), Error);
    }
}

TEST_CASE("pose algebra") {
    std::mt19937_64 rng(12);
    const Pose a = fixtures::perturbed(Pose::identity(), 40, 1.0, rng);
    const Pose b = fixtures::perturbed(Pose::identity(), 70, 2.0, rng);
    const Pose id = pose_compose(a, pose_inverse(a));
    CHECK((id.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((pose_compose(a, b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Pose::from_matrix(a.matrix()).matrix() == a.matrix());
    const Mat3 r = axis_angle(Vec3(0, 0, 2), std::numbers::pi / 2);
    CHECK((r * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-12);
    Pose scaled = a;
    scaled.rotation *= 1.01;
    CHECK_FALSE(scaled.is_valid());
    CHECK(pose_vector(a)(9) == a.translation.x());
    CHECK(pose_vector(a)(1) == a.rotation(0, 1));
}
