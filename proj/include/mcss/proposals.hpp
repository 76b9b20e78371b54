#pragma once

#include "mcss/category.hpp"
#include "mcss/geometry.hpp"
#include "mcss/observation.hpp"
#include "mcss/render.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace mcss {

/// Horizontal rectangle in world space (table top, sofa seat): center plus
/// two horizontal unit axes and half sizes.
struct SurfaceRect {
    Vec3 center;
    Vec3 u, v;
    double half_u = 0.0, half_v = 0.0;

    double shorter_dimension() const { return 2.0 * std::min(half_u, half_v); }
};

struct ObjectProposal {
    int id = -1;
    Category category = Category::Chair;
    std::shared_ptr<const TriangleMesh> mesh;
    std::string mesh_path;  // for serialization; relative to the pool file
    RigidPoseScale pose;
    OrientedBox bbox;
    VoxelGrid voxels;  // cached voxelize(mesh, pose)
    std::optional<SurfaceRect> horizontal_surface;
};

struct LayoutProposal {
    int id = -1;
    Category category = Category::Wall;
    Polygon3D polygon;
    int plane_id = -1;
    std::set<int64_t> edge_ids;

    bool shares_edge(const LayoutProposal& other) const;
    /// Spatial neighbours: share an edge and lie on different planes.
    bool is_neighbor(const LayoutProposal& other) const;
};

struct Compatibility {
    enum class Kind { Compatible, Tolerated, Incompatible };
    Kind kind = Kind::Compatible;
    double iou = 0.0;  // set only for Tolerated

    static Compatibility compatible() { return {Kind::Compatible, 0.0}; }
    static Compatibility tolerated(double iou) { return {Kind::Tolerated, iou}; }
    static Compatibility incompatible() { return {Kind::Incompatible, 0.0}; }
    bool incompatible_pair() const { return kind == Kind::Incompatible; }
};

struct CompatParams {
    double iou_threshold = 0.3;            // object-object
    double surface_ratio_threshold = 0.3;  // chair-table / sofa-table rule
    double layout_slab = 0.01;             // layout polygon thickening, meters
};

/// Deepest penetration of `penetrating` into the owner's horizontal surface,
/// as lateral distance from the nearest rectangle edge normalized by the
/// rectangle's shorter dimension. 0 when the objects do not intersect over
/// the rectangle. Throws if the owner has no horizontal surface.
double horizontal_surface_ratio(const ObjectProposal& penetrating, const ObjectProposal& owner);

Compatibility object_object_compat(const ObjectProposal& a, const ObjectProposal& b,
                                   const CompatParams& params);
Compatibility layout_layout_compat(const LayoutProposal& a, const LayoutProposal& b,
                                   const CompatParams& params);
Compatibility object_layout_compat(const ObjectProposal& o, const LayoutProposal& l,
                                   double voxel_size);

double object_distance(const ObjectProposal& a, const ObjectProposal& b);

/// The candidate set: objects and layouts share one contiguous id space
/// [0, size()). finalize() builds the pairwise compatibility / IoU /
/// distance caches; the pool is immutable afterwards.
class ProposalPool {
public:
    std::vector<ObjectProposal> objects;
    std::vector<LayoutProposal> layouts;
    double voxel_size = 0.05;
    CompatParams compat_params;

    int size() const { return static_cast<int>(objects.size() + layouts.size()); }
    bool is_object(int id) const { return kind_[id] >= 0; }
    bool is_layout(int id) const { return kind_[id] < 0; }
    const ObjectProposal& object(int id) const { return objects[kind_[id]]; }
    const LayoutProposal& layout(int id) const { return layouts[-kind_[id] - 1]; }
    Category category(int id) const;

    void finalize();
    bool finalized() const { return !kind_.empty(); }

    const Compatibility& compat(int a, int b) const { return compat_[index(a, b)]; }
    /// Tolerated-pair IoU (0 for compatible or incompatible pairs).
    double pair_iou(int a, int b) const;
    /// Euclidean distance of bounding box centers; +inf unless both objects.
    double distance(int a, int b) const { return distance_[index(a, b)]; }

    /// True when `id` is compatible with every member of `members`.
    bool compatible_with_all(int id, std::span<const int> members) const;

private:
    size_t index(int a, int b) const { return static_cast<size_t>(a) * size() + b; }
    std::vector<int> kind_;  // per id: object index, or -(layout index)-1
    std::vector<Compatibility> compat_;
    std::vector<double> distance_;
};

/// Solo renders of every pool proposal plus visibility flags.
struct PoolRenders {
    std::vector<ProposalRender> renders;       // by proposal id
    std::vector<std::vector<uint8_t>> visible; // [id][view]
    std::vector<int> visible_views;            // number of views where visible
    int min_pixels = 16;
};

PoolRenders prerender_pool(const ProposalPool& pool, std::span<const View> views, int min_pixels);

struct ScoreWeights {
    double lambda_i = 1.0;
    double lambda_d = 1.0;
    double lambda_p = 2.5;
    double depth_cap = 1.0;  // meters, caps |D - D^R| per pixel
};

/// Render-and-compare score of the proposal alone, restricted to the pixels
/// its own render covers, summed over views. -inf when visible in no view.
double fitness(int proposal_id, const ProposalPool& pool, const PoolRenders& renders,
               const ObservationSet& obs, const ScoreWeights& weights);

std::vector<double> compute_fitness(const ProposalPool& pool, const PoolRenders& renders,
                                    const ObservationSet& obs, const ScoreWeights& weights);

// pool.json round trip; mesh paths are resolved relative to the file.
void save_pool(const std::filesystem::path& path, const ProposalPool& pool);
ProposalPool load_pool(const std::filesystem::path& path);

}  // namespace mcss
