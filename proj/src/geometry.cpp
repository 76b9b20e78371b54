#include "mcss/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mcss {

// ---------------------------------------------------------------- pose

Mat4 RigidPoseScale::matrix() const {
    Mat4 m = Mat4::Identity();
    m.block<3, 3>(0, 0) = rotation;
    m.block<3, 1>(0, 3) = translation;
    return m;
}

void RigidPoseScale::validate() const {
    if (std::abs(rotation.determinant() - 1.0) > 1e-6)
        throw std::invalid_argument("RigidPoseScale: rotation determinant != +1");
    if ((scale.array() <= 0.0).any())
        throw std::invalid_argument("RigidPoseScale: scale components must be positive");
}

RigidPoseScale RigidPoseScale::yaw_about_z(double yaw, const Vec3& translation, const Vec3& scale) {
    RigidPoseScale p;
    p.rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    p.translation = translation;
    p.scale = scale;
    return p;
}

// ---------------------------------------------------------------- plane

std::pair<Vec3, Vec3> Plane::basis() const {
    Vec3 ref = std::abs(normal.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    Vec3 u = ref.cross(normal).normalized();
    Vec3 v = normal.cross(u);
    return {u, v};
}

// ---------------------------------------------------------------- polygon3d

std::vector<Vec2> Polygon3D::to_plane_coords() const {
    auto [u, v] = plane.basis();
    Vec3 anchor = plane.offset * plane.normal;
    std::vector<Vec2> out;
    out.reserve(vertices.size());
    for (const Vec3& p : vertices) {
        Vec3 d = p - anchor;
        out.emplace_back(u.dot(d), v.dot(d));
    }
    return out;
}

double Polygon3D::area() const { return std::abs(polygon_area_2d(to_plane_coords())); }

Vec3 Polygon3D::centroid() const {
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : vertices) c += p;
    return c / static_cast<double>(vertices.size());
}

void Polygon3D::validate() const {
    if (vertices.size() < 3) throw std::invalid_argument("Polygon3D: needs >= 3 vertices");
    for (const Vec3& p : vertices)
        if (std::abs(plane.signed_distance(p)) > 1e-6)
            throw std::invalid_argument("Polygon3D: vertex off plane");
    if (!polygon_is_simple_2d(to_plane_coords()))
        throw std::invalid_argument("Polygon3D: self-intersecting loop");
}

// ---------------------------------------------------------------- mesh

void TriangleMesh::validate_and_clean() {
    const int n = static_cast<int>(vertices.size());
    std::vector<std::array<int, 3>> kept;
    kept.reserve(triangles.size());
    for (const auto& t : triangles) {
        for (int idx : t)
            if (idx < 0 || idx >= n) throw std::invalid_argument("TriangleMesh: index out of range");
        Vec3 a = vertices[t[0]], b = vertices[t[1]], c = vertices[t[2]];
        if ((b - a).cross(c - a).norm() > 2.0 * kPlanarEps) kept.push_back(t);
    }
    triangles = std::move(kept);
}

double TriangleMesh::volume() const {
    double vol = 0.0;
    for (const auto& t : triangles)
        vol += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
    return vol / 6.0;
}

void TriangleMesh::append(const TriangleMesh& other) {
    const int base = static_cast<int>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& t : other.triangles)
        triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

std::pair<Vec3, Vec3> TriangleMesh::bounds() const {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const Vec3& p : vertices) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidPoseScale& pose) {
    TriangleMesh out;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& p : mesh.vertices) out.vertices.push_back(pose.apply(p));
    out.triangles = mesh.triangles;
    return out;
}

TriangleMesh make_box_mesh(const Vec3& center, const Vec3& size) {
    const Vec3 h = 0.5 * size;
    TriangleMesh m;
    for (int k = 0; k < 8; ++k)
        m.vertices.push_back(center + Vec3((k & 1) ? h.x() : -h.x(), (k & 2) ? h.y() : -h.y(),
                                           (k & 4) ? h.z() : -h.z()));
    // 6 faces, outward winding
    const int f[6][4] = {{0, 2, 3, 1},   // z-
                         {4, 5, 7, 6},   // z+
                         {0, 1, 5, 4},   // y-
                         {2, 6, 7, 3},   // y+
                         {0, 4, 6, 2},   // x-
                         {1, 3, 7, 5}};  // x+
    for (const auto& q : f) {
        m.triangles.push_back({q[0], q[1], q[2]});
        m.triangles.push_back({q[0], q[2], q[3]});
    }
    return m;
}

// ---------------------------------------------------------------- box

bool OrientedBox::contains(const Vec3& p) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Vec3 d = p - center;
    const Vec3 local(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
    return (local.array().abs() <= half_extents.array() + 1e-12).all();
}

std::array<Vec3, 8> OrientedBox::corners() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    std::array<Vec3, 8> out;
    for (int k = 0; k < 8; ++k) {
        Vec3 l((k & 1) ? half_extents.x() : -half_extents.x(),
               (k & 2) ? half_extents.y() : -half_extents.y(),
               (k & 4) ? half_extents.z() : -half_extents.z());
        out[k] = center + Vec3(c * l.x() - s * l.y(), s * l.x() + c * l.y(), l.z());
    }
    return out;
}

// ---------------------------------------------------------------- voxel grid

size_t VoxelGrid::count() const {
    return static_cast<size_t>(std::count(occupancy.begin(), occupancy.end(), uint8_t{1}));
}

namespace {

// Connected components over shared vertex indices.
std::vector<std::vector<int>> mesh_components(const TriangleMesh& mesh) {
    const int nv = static_cast<int>(mesh.vertices.size());
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& t : mesh.triangles) {
        int a = find(t[0]);
        parent[find(t[1])] = a;
        parent[find(t[2])] = a;
    }
    std::map<int, int> slot;
    std::vector<std::vector<int>> comps;
    for (int ti = 0; ti < static_cast<int>(mesh.triangles.size()); ++ti) {
        int root = find(mesh.triangles[ti][0]);
        auto [it, fresh] = slot.try_emplace(root, static_cast<int>(comps.size()));
        if (fresh) comps.emplace_back();
        comps[it->second].push_back(ti);
    }
    return comps;
}

bool component_closed(const TriangleMesh& mesh, const std::vector<int>& tris) {
    std::map<std::pair<int, int>, int> edge_use;
    for (int ti : tris) {
        const auto& t = mesh.triangles[ti];
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            edge_use[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [edge, uses] : edge_use)
        if (uses != 2) return false;
    return true;
}

// Half-open 2D coverage in the (y,z) projection so that each surface sheet
// contributes exactly one ray crossing per covered row.
struct Tri2D {
    Vec2 a, b, c;     // projected (y,z)
    Vec3 n;           // plane normal (3D)
    double off;       // plane offset
    bool valid;
};

bool edge_is_top_left(const Vec2& p0, const Vec2& p1) {
    // CCW convention: "top" edge is horizontal going left, "left" edge goes down->up.
    if (p0.y() == p1.y()) return p1.x() < p0.x();
    return p1.y() > p0.y();
}

bool covers(const Tri2D& t, const Vec2& p) {
    auto edge = [&](const Vec2& e0, const Vec2& e1) {
        const double v = (p.x() - e0.x()) * (e1.y() - e0.y()) - (p.y() - e0.y()) * (e1.x() - e0.x());
        if (v != 0.0) return v > 0.0;
        return edge_is_top_left(e0, e1);
    };
    // Note winding already normalized CCW, edge function positive inside.
    return edge(t.b, t.a) && edge(t.c, t.b) && edge(t.a, t.c);
}

void voxelize_component_parity(const TriangleMesh& mesh, const std::vector<int>& tris,
                               VoxelGrid& grid) {
    std::vector<Tri2D> t2;
    t2.reserve(tris.size());
    for (int ti : tris) {
        const auto& t = mesh.triangles[ti];
        const Vec3 &A = mesh.vertices[t[0]], &B = mesh.vertices[t[1]], &C = mesh.vertices[t[2]];
        Vec3 n = (B - A).cross(C - A);
        Tri2D d;
        d.valid = std::abs(n.x()) > 1e-12;  // plane parallel to the ray -> no crossing
        if (!d.valid) {
            t2.push_back(d);
            continue;
        }
        d.a = Vec2(A.y(), A.z());
        d.b = Vec2(B.y(), B.z());
        d.c = Vec2(C.y(), C.z());
        const double area2 = (d.b - d.a).x() * (d.c - d.a).y() - (d.b - d.a).y() * (d.c - d.a).x();
        if (area2 < 0.0) std::swap(d.b, d.c);
        d.n = n.normalized();
        d.off = d.n.dot(A);
        t2.push_back(d);
    }

    const double vs = grid.voxel_size;
    std::vector<std::vector<double>> rows(static_cast<size_t>(grid.dims[1]) * grid.dims[2]);
    for (const Tri2D& t : t2) {
        if (!t.valid) continue;
        const double ylo = std::min({t.a.x(), t.b.x(), t.c.x()});
        const double yhi = std::max({t.a.x(), t.b.x(), t.c.x()});
        const double zlo = std::min({t.a.y(), t.b.y(), t.c.y()});
        const double zhi = std::max({t.a.y(), t.b.y(), t.c.y()});
        int j0 = std::max(0, static_cast<int>(std::floor((ylo - grid.origin.y()) / vs - 0.5)));
        int j1 = std::min(grid.dims[1] - 1, static_cast<int>(std::ceil((yhi - grid.origin.y()) / vs)));
        int k0 = std::max(0, static_cast<int>(std::floor((zlo - grid.origin.z()) / vs - 0.5)));
        int k1 = std::min(grid.dims[2] - 1, static_cast<int>(std::ceil((zhi - grid.origin.z()) / vs)));
        for (int k = k0; k <= k1; ++k) {
            const double cz = grid.origin.z() + (k + 0.5) * vs;
            for (int j = j0; j <= j1; ++j) {
                const double cy = grid.origin.y() + (j + 0.5) * vs;
                if (!covers(t, Vec2(cy, cz))) continue;
                const double x = (t.off - t.n.y() * cy - t.n.z() * cz) / t.n.x();
                rows[static_cast<size_t>(k) * grid.dims[1] + j].push_back(x);
            }
        }
    }

    for (int k = 0; k < grid.dims[2]; ++k) {
        for (int j = 0; j < grid.dims[1]; ++j) {
            auto& xs = rows[static_cast<size_t>(k) * grid.dims[1] + j];
            if (xs.empty()) continue;
            std::sort(xs.begin(), xs.end());
            for (size_t s = 0; s + 1 < xs.size(); s += 2) {
                // center x in [xs[s], xs[s+1])
                int i0 = static_cast<int>(std::ceil((xs[s] - grid.origin.x()) / vs - 0.5));
                int i1 = static_cast<int>(std::ceil((xs[s + 1] - grid.origin.x()) / vs - 0.5)) - 1;
                i0 = std::max(i0, 0);
                i1 = std::min(i1, grid.dims[0] - 1);
                for (int i = i0; i <= i1; ++i) grid.occupancy[grid.index(i, j, k)] = 1;
            }
        }
    }
}

void voxelize_component_shell(const TriangleMesh& mesh, const std::vector<int>& tris,
                              VoxelGrid& grid) {
    const double step = 0.5 * grid.voxel_size;
    for (int ti : tris) {
        const auto& t = mesh.triangles[ti];
        const Vec3 &A = mesh.vertices[t[0]], &B = mesh.vertices[t[1]], &C = mesh.vertices[t[2]];
        const double lab = (B - A).norm(), lac = (C - A).norm();
        const int nu = std::max(1, static_cast<int>(std::ceil(lab / step)));
        const int nv = std::max(1, static_cast<int>(std::ceil(lac / step)));
        for (int iu = 0; iu <= nu; ++iu) {
            for (int iv = 0; iv <= nv; ++iv) {
                const double u = static_cast<double>(iu) / nu, v = static_cast<double>(iv) / nv;
                if (u + v > 1.0) continue;
                const Vec3 p = A + u * (B - A) + v * (C - A);
                const int i = static_cast<int>(std::floor((p.x() - grid.origin.x()) / grid.voxel_size));
                const int j = static_cast<int>(std::floor((p.y() - grid.origin.y()) / grid.voxel_size));
                const int k = static_cast<int>(std::floor((p.z() - grid.origin.z()) / grid.voxel_size));
                if (i >= 0 && i < grid.dims[0] && j >= 0 && j < grid.dims[1] && k >= 0 &&
                    k < grid.dims[2])
                    grid.occupancy[grid.index(i, j, k)] = 1;
            }
        }
    }
}

}  // namespace

VoxelGrid voxelize(const TriangleMesh& mesh, const RigidPoseScale& pose, double voxel_size) {
    if (voxel_size <= 0.0) throw std::invalid_argument("voxelize: voxel_size must be positive");
    if (mesh.empty()) throw std::invalid_argument("voxelize: degenerate mesh");

    const TriangleMesh posed = transform_mesh(mesh, pose);
    auto [lo, hi] = posed.bounds();

    VoxelGrid grid;
    grid.voxel_size = voxel_size;
    std::array<int, 3> ilo, ihi;
    for (int a = 0; a < 3; ++a) {
        ilo[a] = static_cast<int>(std::floor(lo[a] / voxel_size)) - 1;
        ihi[a] = static_cast<int>(std::floor(hi[a] / voxel_size)) + 1;
        grid.dims[a] = ihi[a] - ilo[a] + 1;
    }
    grid.origin = Vec3(ilo[0], ilo[1], ilo[2]) * voxel_size;
    grid.occupancy.assign(static_cast<size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2], 0);

    for (const auto& comp : mesh_components(posed)) {
        if (component_closed(posed, comp))
            voxelize_component_parity(posed, comp, grid);
        else
            voxelize_component_shell(posed, comp, grid);
    }
    return grid;
}

VoxelGrid voxelize_box(const OrientedBox& box, double voxel_size) {
    if (voxel_size <= 0.0) throw std::invalid_argument("voxelize_box: voxel_size must be positive");
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const Vec3& c : box.corners()) {
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
    }
    VoxelGrid grid;
    grid.voxel_size = voxel_size;
    std::array<int, 3> ilo;
    for (int a = 0; a < 3; ++a) {
        ilo[a] = static_cast<int>(std::floor(lo[a] / voxel_size)) - 1;
        grid.dims[a] = static_cast<int>(std::floor(hi[a] / voxel_size)) + 1 - ilo[a] + 1;
    }
    grid.origin = Vec3(ilo[0], ilo[1], ilo[2]) * voxel_size;
    grid.occupancy.assign(static_cast<size_t>(grid.dims[0]) * grid.dims[1] * grid.dims[2], 0);
    for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
            for (int i = 0; i < grid.dims[0]; ++i)
                if (box.contains(grid.center_of(i, j, k))) grid.occupancy[grid.index(i, j, k)] = 1;
    return grid;
}

namespace {

std::array<int, 3> lattice_offset(const VoxelGrid& a, const VoxelGrid& b) {
    std::array<int, 3> off;
    for (int axis = 0; axis < 3; ++axis) {
        const double d = (b.origin[axis] - a.origin[axis]) / a.voxel_size;
        const double r = std::round(d);
        if (std::abs(d - r) > 1e-6)
            throw std::invalid_argument("voxel grids are not lattice-aligned");
        off[axis] = static_cast<int>(r);
    }
    return off;
}

}  // namespace

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
    if (std::abs(a.voxel_size - b.voxel_size) > 1e-9)
        throw std::invalid_argument("voxel_iou: voxel sizes differ");
    const size_t ca = a.count(), cb = b.count();
    if (ca == 0 && cb == 0) throw std::invalid_argument("voxel_iou: both grids empty");
    const auto off = lattice_offset(a, b);  // b's index (0,0,0) sits at a-index `off`
    size_t inter = 0;
    const int i0 = std::max(0, off[0]), i1 = std::min(a.dims[0], off[0] + b.dims[0]);
    const int j0 = std::max(0, off[1]), j1 = std::min(a.dims[1], off[1] + b.dims[1]);
    const int k0 = std::max(0, off[2]), k1 = std::min(a.dims[2], off[2] + b.dims[2]);
    for (int k = k0; k < k1; ++k)
        for (int j = j0; j < j1; ++j)
            for (int i = i0; i < i1; ++i)
                if (a.at(i, j, k) && b.at(i - off[0], j - off[1], k - off[2])) ++inter;
    return static_cast<double>(inter) / static_cast<double>(ca + cb - inter);
}

std::vector<Vec3> voxel_intersection_centers(const VoxelGrid& a, const VoxelGrid& b) {
    if (std::abs(a.voxel_size - b.voxel_size) > 1e-9)
        throw std::invalid_argument("voxel_intersection_centers: voxel sizes differ");
    const auto off = lattice_offset(a, b);
    std::vector<Vec3> out;
    const int i0 = std::max(0, off[0]), i1 = std::min(a.dims[0], off[0] + b.dims[0]);
    const int j0 = std::max(0, off[1]), j1 = std::min(a.dims[1], off[1] + b.dims[1]);
    const int k0 = std::max(0, off[2]), k1 = std::min(a.dims[2], off[2] + b.dims[2]);
    for (int k = k0; k < k1; ++k)
        for (int j = j0; j < j1; ++j)
            for (int i = i0; i < i1; ++i)
                if (a.at(i, j, k) && b.at(i - off[0], j - off[1], k - off[2]))
                    out.push_back(a.center_of(i, j, k));
    return out;
}

double chamfer_one_way(const std::vector<Vec3>& points, const std::vector<Vec3>& target) {
    if (points.empty() || target.empty())
        throw std::invalid_argument("chamfer_one_way: empty point set");
    double total = 0.0;
    for (const Vec3& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& q : target) best = std::min(best, (p - q).squaredNorm());
        total += std::sqrt(best);
    }
    return 1000.0 * total / static_cast<double>(points.size());
}

std::vector<Vec3> sample_mesh_surface(const TriangleMesh& mesh, int n, uint64_t seed) {
    if (mesh.empty() || n <= 0) return {};
    std::vector<double> cum;
    cum.reserve(mesh.triangles.size());
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
        total += 0.5 * (b - a).cross(c - a).norm();
        cum.push_back(total);
    }
    std::mt19937_64 eng(seed);
    auto unit = [&] { return (eng() >> 11) * 0x1.0p-53; };
    std::vector<Vec3> out;
    out.reserve(n);
    for (int s = 0; s < n; ++s) {
        const double pick = unit() * total;
        const size_t ti = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
        const auto& t = mesh.triangles[std::min(ti, mesh.triangles.size() - 1)];
        double u = unit(), v = unit();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        out.push_back(mesh.vertices[t[0]] + u * (mesh.vertices[t[1]] - mesh.vertices[t[0]]) +
                      v * (mesh.vertices[t[2]] - mesh.vertices[t[0]]));
    }
    return out;
}

namespace {

Plane orient_canonical(Vec3 n, const Vec3& on_plane) {
    bool flip = false;
    if (n.z() < 0.0)
        flip = true;
    else if (n.z() == 0.0 && (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)))
        flip = true;
    if (flip) n = -n;
    return Plane{n, n.dot(on_plane)};
}

}  // namespace

Plane fit_plane_3pts(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
    const Vec3 cross = (p2 - p1).cross(p3 - p1);
    if (0.5 * cross.norm() <= 1e-9) throw std::invalid_argument("degenerate sample");
    return orient_canonical(cross.normalized(), p1);
}

Plane fit_plane_lsq(const std::vector<Vec3>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_plane_lsq: needs >= 3 points");
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : points) centroid += p;
    centroid /= static_cast<double>(points.size());
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : points) {
        const Vec3 d = p - centroid;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    return orient_canonical(es.eigenvectors().col(0).normalized(), centroid);
}

std::optional<Vec3> intersect_three_planes(const Plane& a, const Plane& b, const Plane& c) {
    Mat3 m;
    m.row(0) = a.normal;
    m.row(1) = b.normal;
    m.row(2) = c.normal;
    if (std::abs(m.determinant()) <= 1e-6) return std::nullopt;
    return m.fullPivLu().solve(Vec3(a.offset, b.offset, c.offset)).eval();
}

namespace {
uint64_t key_mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

int64_t quantized_point_key(const Vec3& p) {
    const auto q = [](double x) {
        return static_cast<uint64_t>(std::llround(x * 1e4) + (1LL << 40));
    };
    uint64_t h = key_mix(q(p.x()));
    h = key_mix(h ^ q(p.y()));
    h = key_mix(h ^ q(p.z()));
    return static_cast<int64_t>(h >> 1);
}

int64_t quantized_edge_key(const Vec3& a, const Vec3& b) {
    int64_t ka = quantized_point_key(a), kb = quantized_point_key(b);
    if (ka > kb) std::swap(ka, kb);
    return static_cast<int64_t>(
        key_mix(static_cast<uint64_t>(ka) ^ key_mix(static_cast<uint64_t>(kb))) >> 1);
}

// ---------------------------------------------------------------- 2D polygons

double polygon_area_2d(const std::vector<Vec2>& poly) {
    double a = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 &p = poly[i], &q = poly[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

bool point_in_polygon_2d(const std::vector<Vec2>& poly, const Vec2& p) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 &a = poly[i], &b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
    }
    return inside;
}

namespace {

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& o, const Vec2& p, const Vec2& q) {
        return (p.x() - o.x()) * (q.y() - o.y()) - (p.y() - o.y()) * (q.x() - o.x());
    };
    const double d1 = cross(c, d, a), d2 = cross(c, d, b);
    const double d3 = cross(a, b, c), d4 = cross(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

bool polygon_is_simple_2d(const std::vector<Vec2>& poly) {
    const size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // adjacent edges
            if (segments_properly_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

std::vector<Vec2> simplify_polygon_2d(const std::vector<Vec2>& poly, double eps) {
    std::vector<Vec2> out;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 &prev = poly[(i + n - 1) % n], &cur = poly[i], &next = poly[(i + 1) % n];
        if ((cur - prev).norm() <= eps) continue;
        const double cross =
            (cur.x() - prev.x()) * (next.y() - prev.y()) - (cur.y() - prev.y()) * (next.x() - prev.x());
        const double scale = (cur - prev).norm() * (next - prev).norm();
        if (std::abs(cross) <= eps * std::max(1.0, scale)) continue;  // collinear
        out.push_back(cur);
    }
    return out;
}

std::vector<std::array<int, 3>> triangulate_polygon_2d(const std::vector<Vec2>& poly) {
    const int n = static_cast<int>(poly.size());
    if (n < 3) return {};
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (polygon_area_2d(poly) < 0.0) std::reverse(idx.begin(), idx.end());

    // drop duplicate / collinear corners up front; they break ear tests
    {
        std::vector<int> cleaned;
        for (size_t i = 0; i < idx.size(); ++i) {
            const Vec2 &prev = poly[idx[(i + idx.size() - 1) % idx.size()]];
            const Vec2 &cur = poly[idx[i]], &next = poly[idx[(i + 1) % idx.size()]];
            const double cr = (cur.x() - prev.x()) * (next.y() - prev.y()) -
                              (cur.y() - prev.y()) * (next.x() - prev.x());
            if ((cur - prev).norm() <= 1e-12 || std::abs(cr) <= 1e-12) continue;
            cleaned.push_back(idx[i]);
        }
        if (cleaned.size() >= 3) idx = std::move(cleaned);
    }

    auto cross = [&](int a, int b, int c) {
        const Vec2 &A = poly[a], &B = poly[b], &C = poly[c];
        return (B.x() - A.x()) * (C.y() - A.y()) - (B.y() - A.y()) * (C.x() - A.x());
    };
    // a vertex anywhere in the closed candidate triangle blocks the ear
    auto blocks = [&](int a, int b, int c, int p) {
        const double c1 = cross(a, b, p), c2 = cross(b, c, p), c3 = cross(c, a, p);
        return c1 >= -1e-12 && c2 >= -1e-12 && c3 >= -1e-12;
    };

    std::vector<std::array<int, 3>> tris;
    while (idx.size() > 3) {
        bool clipped = false;
        for (size_t i = 0; i < idx.size(); ++i) {
            const int a = idx[(i + idx.size() - 1) % idx.size()];
            const int b = idx[i];
            const int c = idx[(i + 1) % idx.size()];
            if (cross(a, b, c) <= 1e-14) continue;  // reflex or degenerate corner
            bool ear = true;
            for (int p : idx) {
                if (p == a || p == b || p == c) continue;
                if (blocks(a, b, c, p)) {
                    ear = false;
                    break;
                }
            }
            if (!ear) continue;
            tris.push_back({a, b, c});
            idx.erase(idx.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) {  // no clean ear left; fan the remainder
            for (size_t i = 1; i + 1 < idx.size(); ++i)
                tris.push_back({idx[0], idx[i], idx[i + 1]});
            return tris;
        }
    }
    if (idx.size() == 3) tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

namespace {

// Sutherland-Hodgman clip of an arbitrary polygon against a convex one.
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& convex) {
    std::vector<Vec2> out = subject;
    const size_t n = convex.size();
    for (size_t e = 0; e < n && !out.empty(); ++e) {
        const Vec2 &a = convex[e], &b = convex[(e + 1) % n];
        auto side = [&](const Vec2& p) {
            return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
        };
        std::vector<Vec2> in = std::move(out);
        out.clear();
        for (size_t i = 0; i < in.size(); ++i) {
            const Vec2 &p = in[i], &q = in[(i + 1) % in.size()];
            const double sp = side(p), sq = side(q);
            if (sp >= 0.0) out.push_back(p);
            if ((sp >= 0.0) != (sq >= 0.0)) {
                const double t = sp / (sp - sq);
                out.push_back(p + t * (q - p));
            }
        }
    }
    return out;
}

std::vector<Vec2> ccw(const std::vector<Vec2>& poly) {
    if (polygon_area_2d(poly) >= 0.0) return poly;
    std::vector<Vec2> r(poly.rbegin(), poly.rend());
    return r;
}

}  // namespace

double polygon_intersection_area_2d(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;
    const auto pa = ccw(a), pb = ccw(b);
    const auto ta = triangulate_polygon_2d(pa);
    const auto tb = triangulate_polygon_2d(pb);
    double area = 0.0;
    for (const auto& i : ta) {
        const std::vector<Vec2> tri_a = {pa[i[0]], pa[i[1]], pa[i[2]]};
        for (const auto& j : tb) {
            const std::vector<Vec2> tri_b = {pb[j[0]], pb[j[1]], pb[j[2]]};
            const auto clipped = clip_convex(tri_a, tri_b);
            if (clipped.size() >= 3) area += std::abs(polygon_area_2d(clipped));
        }
    }
    return area;
}

}  // namespace mcss
