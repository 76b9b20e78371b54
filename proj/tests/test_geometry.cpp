#include "mcss/geometry.hpp"
#include "mcss/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace mcss;

TEST_CASE("unit cube voxelization at half-meter resolution") {
    const TriangleMesh cube = make_box_mesh(Vec3(0.5, 0.5, 0.5), Vec3::Ones());
    const VoxelGrid grid = voxelize(cube, RigidPoseScale{}, 0.5);
    CHECK(grid.count() == 8);  // 2x2x2 interior
    // margin voxels stay empty
    CHECK(grid.dims[0] >= 4);
    bool margin_empty = true;
    grid.for_each_occupied([&](int i, int j, int k) {
        if (i == 0 || j == 0 || k == 0) margin_empty = false;
    });
    CHECK(margin_empty);
}

TEST_CASE("unit cube voxelization at 1 m resolution has one voxel") {
    const TriangleMesh cube = make_box_mesh(Vec3(0.5, 0.5, 0.5), Vec3::Ones());
    CHECK(voxelize(cube, RigidPoseScale{}, 1.0).count() == 1);
}

TEST_CASE("voxelize rejects empty meshes") {
    CHECK_THROWS_WITH_AS(voxelize(TriangleMesh{}, RigidPoseScale{}, 0.1), "voxelize: degenerate mesh",
                         std::invalid_argument);
}

TEST_CASE("voxel volume approaches the analytic volume of a convex mesh") {
    // random affine images of a cube stay convex with analytic volume
    Rng rng(42);
    for (int trial = 0; trial < 3; ++trial) {
        TriangleMesh mesh = make_box_mesh(Vec3::Zero(), Vec3(1.0, 0.8, 0.6));
        Mat3 a = Mat3::Identity();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) += 0.25 * rng.uniform(-1.0, 1.0);
        for (Vec3& v : mesh.vertices) v = a * v + Vec3(0.3, -0.2, 0.1);
        const double analytic = std::abs(mesh.volume());
        const double diameter = (mesh.bounds().second - mesh.bounds().first).norm();

        const double vs = 0.02 * diameter;
        const VoxelGrid grid = voxelize(mesh, RigidPoseScale{}, vs);
        const double voxel_volume = grid.count() * vs * vs * vs;
        CHECK(voxel_volume == doctest::Approx(analytic).epsilon(0.10));

        // halving the resolution at least halves the error
        const VoxelGrid fine = voxelize(mesh, RigidPoseScale{}, vs / 2.0);
        const double fine_volume = fine.count() * std::pow(vs / 2.0, 3);
        CHECK(std::abs(fine_volume - analytic) <= 0.55 * std::abs(voxel_volume - analytic) + 1e-9);
    }
}

TEST_CASE("multi-part meshes voxelize to the union of their parts") {
    TriangleMesh two;
    two.append(make_box_mesh(Vec3(0.25, 0.5, 0.5), Vec3(0.5, 1.0, 1.0)));
    two.append(make_box_mesh(Vec3(0.75, 0.5, 0.5), Vec3(0.5, 1.0, 1.0)));  // abutting halves
    const VoxelGrid grid = voxelize(two, RigidPoseScale{}, 0.5);
    CHECK(grid.count() == 8);

    TriangleMesh overlapping;
    overlapping.append(make_box_mesh(Vec3(0.4, 0.5, 0.5), Vec3(0.8, 1.0, 1.0)));
    overlapping.append(make_box_mesh(Vec3(0.6, 0.5, 0.5), Vec3(0.8, 1.0, 1.0)));
    CHECK(voxelize(overlapping, RigidPoseScale{}, 0.5).count() == 8);
}

TEST_CASE("voxel_iou basics") {
    const TriangleMesh cube = make_box_mesh(Vec3(0.5, 0.5, 0.5), Vec3::Ones());
    const VoxelGrid a = voxelize(cube, RigidPoseScale{}, 0.05);
    CHECK(voxel_iou(a, a) == 1.0);

    RigidPoseScale far_away;
    far_away.translation = Vec3(10, 0, 0);
    const VoxelGrid b = voxelize(cube, far_away, 0.05);
    CHECK(voxel_iou(a, b) == 0.0);

    VoxelGrid empty1 = a, empty2 = b;
    empty1.occupancy.assign(empty1.occupancy.size(), 0);
    empty2.occupancy.assign(empty2.occupancy.size(), 0);
    CHECK_THROWS_AS(voxel_iou(empty1, empty2), std::invalid_argument);

    VoxelGrid coarse = voxelize(cube, RigidPoseScale{}, 0.1);
    CHECK_THROWS_AS(voxel_iou(a, coarse), std::invalid_argument);
}

TEST_CASE("half-overlapping unit cubes have IoU near 1/3") {
    const TriangleMesh cube = make_box_mesh(Vec3(0.5, 0.5, 0.5), Vec3::Ones());
    RigidPoseScale shifted;
    shifted.translation = Vec3(0.5, 0.0, 0.0);
    const VoxelGrid a = voxelize(cube, RigidPoseScale{}, 0.05);
    const VoxelGrid b = voxelize(cube, shifted, 0.05);
    CHECK(voxel_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(0.15));
    CHECK(std::abs(voxel_iou(a, b) - 1.0 / 3.0) <= 0.05);
    CHECK(voxel_iou(a, b) == voxel_iou(b, a));
}

TEST_CASE("chamfer equals the brute-force nearest-neighbour mean exactly") {
    Rng rng(7);
    std::vector<Vec3> pts, target;
    for (int i = 0; i < 120; ++i)
        pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    for (int i = 0; i < 90; ++i)
        target.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));

    double brute = 0.0;
    for (const Vec3& p : pts) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& q : target) best = std::min(best, (p - q).squaredNorm());
        brute += std::sqrt(best);
    }
    brute = 1000.0 * brute / pts.size();
    CHECK(chamfer_one_way(pts, target) == brute);

    CHECK(chamfer_one_way({Vec3::Zero()}, {Vec3(1, 0, 0)}) == doctest::Approx(1000.0));
    CHECK(chamfer_one_way(target, target) == 0.0);
    CHECK_THROWS_AS(chamfer_one_way({}, target), std::invalid_argument);
}

TEST_CASE("three-point plane fitting with canonical orientation") {
    const Plane p = fit_plane_3pts(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    CHECK(p.normal.isApprox(Vec3(0, 0, 1), 1e-12));
    CHECK(p.offset == doctest::Approx(0.0));

    const Plane q = fit_plane_3pts(Vec3(0, 0, 2), Vec3(1, 0, 2), Vec3(0, 1, 2));
    CHECK(q.offset == doctest::Approx(2.0));

    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const Vec3 a(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const Vec3 b(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const Vec3 c(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        if ((b - a).cross(c - a).norm() < 1e-6) continue;
        const Plane pl = fit_plane_3pts(a, b, c);
        for (const Vec3& v : {a, b, c}) CHECK(std::abs(pl.signed_distance(v)) <= 1e-9);
        CHECK(pl.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pl.normal.z() >= 0.0);
    }

    CHECK_THROWS_WITH_AS(fit_plane_3pts(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)),
                         "degenerate sample", std::invalid_argument);
}

TEST_CASE("three-plane intersection") {
    const Plane x{Vec3(1, 0, 0), 0.0}, y{Vec3(0, 1, 0), 0.0}, z{Vec3(0, 0, 1), 0.0};
    auto p = intersect_three_planes(x, y, z);
    REQUIRE(p.has_value());
    CHECK(p->isApprox(Vec3::Zero(), 1e-12));

    const Plane x1{Vec3(1, 0, 0), 1.0}, y2{Vec3(0, 1, 0), 2.0}, z3{Vec3(0, 0, 1), 3.0};
    p = intersect_three_planes(x1, y2, z3);
    REQUIRE(p.has_value());
    CHECK(p->isApprox(Vec3(1, 2, 3), 1e-12));

    const Plane x2{Vec3(1, 0, 0), 2.0};
    CHECK_FALSE(intersect_three_planes(x1, x2, z3).has_value());
}

TEST_CASE("polygon helpers: area, containment, triangulation, intersection") {
    const std::vector<Vec2> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_area_2d(square) == doctest::Approx(1.0));
    CHECK(point_in_polygon_2d(square, Vec2(0.5, 0.5)));
    CHECK_FALSE(point_in_polygon_2d(square, Vec2(1.5, 0.5)));

    const std::vector<Vec2> lshape = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    CHECK(polygon_is_simple_2d(lshape));
    const auto tris = triangulate_polygon_2d(lshape);
    double tri_area = 0.0;
    for (const auto& t : tris) {
        const Vec2 &a = lshape[t[0]], &b = lshape[t[1]], &c = lshape[t[2]];
        tri_area += 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    }
    CHECK(tri_area == doctest::Approx(3.0));

    const std::vector<Vec2> shifted = {{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}};
    CHECK(polygon_intersection_area_2d(square, shifted) == doctest::Approx(0.5));
    CHECK(polygon_intersection_area_2d(lshape, square) == doctest::Approx(1.0));
    const std::vector<Vec2> wide = {{-1, 0}, {3, 0}, {3, 1.5}, {-1, 1.5}};
    CHECK(polygon_intersection_area_2d(lshape, wide) == doctest::Approx(2.5));

    const std::vector<Vec2> bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_FALSE(polygon_is_simple_2d(bowtie));
}

TEST_CASE("mesh surface sampling lands on the surface") {
    const TriangleMesh cube = make_box_mesh(Vec3::Zero(), Vec3(2, 2, 2));
    const auto samples = sample_mesh_surface(cube, 500, 11);
    CHECK(samples.size() == 500);
    for (const Vec3& p : samples) {
        const double m = p.cwiseAbs().maxCoeff();
        CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("oriented box containment and corners") {
    OrientedBox box{Vec3(1, 2, 0.5), Vec3(0.5, 0.25, 0.5), M_PI / 4};
    CHECK(box.contains(box.center));
    for (const Vec3& c : box.corners()) CHECK(box.contains(c));
    CHECK_FALSE(box.contains(box.center + Vec3(0.9, 0, 0)));
    CHECK(box.volume() == doctest::Approx(8 * 0.5 * 0.25 * 0.5));
}

TEST_CASE("quantized keys are stable and symmetric") {
    const Vec3 a(1.00001, 2, 3), b(4, 5, 6);
    CHECK(quantized_point_key(a) == quantized_point_key(Vec3(1.00001, 2, 3)));
    CHECK(quantized_point_key(a) != quantized_point_key(b));
    CHECK(quantized_edge_key(a, b) == quantized_edge_key(b, a));
}
