#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace mcss {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Gravity points along -z; "up" is +z everywhere in this codebase.
inline constexpr double kDegenerateEps = 1e-6;
inline constexpr double kPlanarEps = 1e-9;

/// Rigid transform with per-axis scale applied before rotation:
/// p' = R * (s .* p) + t.
struct RigidPoseScale {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    Vec3 scale = Vec3::Ones();

    Vec3 apply(const Vec3& p) const { return rotation * scale.cwiseProduct(p) + translation; }
    Mat4 matrix() const;  // 4x4 of rotation+translation (scale excluded)

    /// Throws std::invalid_argument unless det(R) = +1 within 1e-6 and scale > 0.
    void validate() const;

    static RigidPoseScale yaw_about_z(double yaw, const Vec3& translation,
                                      const Vec3& scale = Vec3::Ones());
};

/// Plane {p : normal . p = offset}, |normal| = 1.
struct Plane {
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
    Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
    /// Orthonormal in-plane axes (u, v) with u x v = normal; deterministic.
    std::pair<Vec3, Vec3> basis() const;
};

/// Planar polygon given as an ordered vertex loop on `plane`.
struct Polygon3D {
    Plane plane;
    std::vector<Vec3> vertices;

    double area() const;
    Vec3 centroid() const;
    std::vector<Vec2> to_plane_coords() const;
    /// Throws std::invalid_argument on <3 vertices, off-plane vertices
    /// (>1e-6 m) or self-intersection in plane coordinates.
    void validate() const;
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    bool empty() const { return triangles.empty(); }
    /// Drops zero-area triangles and checks index ranges. Throws on bad indices.
    void validate_and_clean();
    /// Signed volume by divergence theorem; exact for closed meshes.
    double volume() const;
    void append(const TriangleMesh& other);
    std::pair<Vec3, Vec3> bounds() const;
};

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidPoseScale& pose);
/// Axis-aligned box mesh (12 triangles) centered at `center`.
TriangleMesh make_box_mesh(const Vec3& center, const Vec3& size);

/// Box with yaw-only orientation about +z.
struct OrientedBox {
    Vec3 center = Vec3::Zero();
    Vec3 half_extents = Vec3::Ones();
    double yaw = 0.0;

    bool contains(const Vec3& p) const;
    std::array<Vec3, 8> corners() const;
    double volume() const { return 8.0 * half_extents.prod(); }
};

/// Dense occupancy grid on the global lattice: voxel (i,j,k) spans
/// [origin + ijk*s, origin + (ijk+1)*s) and origin is a multiple of s.
struct VoxelGrid {
    Vec3 origin = Vec3::Zero();
    double voxel_size = 0.05;
    std::array<int, 3> dims = {0, 0, 0};
    std::vector<uint8_t> occupancy;  // dims[0]*dims[1]*dims[2], x fastest

    size_t index(int i, int j, int k) const {
        return (static_cast<size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    bool at(int i, int j, int k) const { return occupancy[index(i, j, k)] != 0; }
    Vec3 center_of(int i, int j, int k) const {
        return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
    }
    size_t count() const;
    bool empty_occupancy() const { return count() == 0; }
    template <class F>
    void for_each_occupied(F&& f) const {
        size_t idx = 0;
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i, ++idx)
                    if (occupancy[idx]) f(i, j, k);
    }
};

/// Solid voxelization of the posed mesh. Occupancy is decided per connected
/// component: closed components by parity ray casting of voxel centers,
/// open components by a surface-shell fallback. Components are OR-ed, so
/// meshes assembled from several closed parts voxelize to their union.
/// Grid tightly bounds the posed mesh plus a one-voxel margin; the origin is
/// snapped to the global lattice. Throws on an empty mesh.
VoxelGrid voxelize(const TriangleMesh& mesh, const RigidPoseScale& pose, double voxel_size);

/// Direct voxelization of an oriented box (no mesh round trip).
VoxelGrid voxelize_box(const OrientedBox& box, double voxel_size);

/// |A n B| / |A u B| for two lattice-aligned grids of equal voxel size.
/// Throws if sizes mismatch, origins are off-lattice, or both grids are empty.
double voxel_iou(const VoxelGrid& a, const VoxelGrid& b);

/// Occupied voxel centers of `a` that are also occupied in `b`.
std::vector<Vec3> voxel_intersection_centers(const VoxelGrid& a, const VoxelGrid& b);

/// Mean distance from each point to its nearest target point, in millimeters.
/// Exactly the brute-force nearest-neighbour mean. Throws on empty inputs.
double chamfer_one_way(const std::vector<Vec3>& points, const std::vector<Vec3>& target);

/// Area-weighted surface samples.
std::vector<Vec3> sample_mesh_surface(const TriangleMesh& mesh, int n, uint64_t seed);

/// Plane through three points. The normal is canonically oriented:
/// flipped so n.z >= 0, ties broken by n.x then n.y.
/// Throws std::invalid_argument on (near-)collinear samples.
Plane fit_plane_3pts(const Vec3& p1, const Vec3& p2, const Vec3& p3);

/// Least-squares plane through a point set (centroid + smallest PCA axis),
/// same canonical orientation as fit_plane_3pts. Requires >= 3 points.
Plane fit_plane_lsq(const std::vector<Vec3>& points);

/// Unique intersection point of three planes, or nullopt when the normals
/// are (near-)linearly dependent (|det| <= 1e-6).
std::optional<Vec3> intersect_three_planes(const Plane& a, const Plane& b, const Plane& c);

/// Stable ids for construction geometry, from 0.1 mm-quantized coordinates.
int64_t quantized_point_key(const Vec3& p);
int64_t quantized_edge_key(const Vec3& a, const Vec3& b);  // symmetric

// --- 2D polygon helpers (shared by rasterizer, RANSAC and metrics) ---

double polygon_area_2d(const std::vector<Vec2>& poly);  // signed, CCW positive
bool point_in_polygon_2d(const std::vector<Vec2>& poly, const Vec2& p);
bool polygon_is_simple_2d(const std::vector<Vec2>& poly);
/// Ear-clipping triangulation of a simple polygon; returns index triples.
std::vector<std::array<int, 3>> triangulate_polygon_2d(const std::vector<Vec2>& poly);
/// Intersection area of two simple polygons (convex or not).
double polygon_intersection_area_2d(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
/// Removes consecutive duplicate and collinear vertices.
std::vector<Vec2> simplify_polygon_2d(const std::vector<Vec2>& poly, double eps = 1e-9);

}  // namespace mcss
