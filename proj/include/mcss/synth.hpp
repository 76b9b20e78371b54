#pragma once

#include "mcss/io.hpp"
#include "mcss/scoring.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace mcss {

enum class RoomShape { Cuboid, LShape, UShape, Custom };

struct SynthConfig {
    RoomShape room = RoomShape::Cuboid;
    double room_width = 5.0;   // x extent
    double room_depth = 4.0;   // y extent
    double wall_height = 2.5;
    std::vector<Vec2> custom_floor;  // CCW, used when room == Custom

    std::array<int, kNumCategories> object_counts = {0, 0, 2, 1, 0, 0};  // by Category
    int jitter_copies = 1;          // jittered pool copies per true object
    double jitter_sigma = 0.08;     // m translation / rad yaw for copies
    int decoy_count = 2;            // phantom objects in free space
    int wrong_model_swaps = 0;      // extra wrong-category proposals at true poses
    int layout_decoys = 2;          // walls translated off their true plane
    int wall_crossing_decoys = 0;   // true chairs replaced by wall-crossing copies

    int view_count = 8;
    int image_width = 96, image_height = 72;
    double focal_px = 70.0;
    double camera_height = 1.6;
    double depth_hole_fraction = 0.0;  // of pixels, masked rectangles
    double label_flip_prob = 0.0;

    double voxel_size = 0.05;
    uint64_t seed = 0;
};

struct GroundTruth {
    std::vector<LayoutProposal> layouts;  // ids match the pool entries
    std::vector<ObjectProposal> objects;
    std::vector<int> pool_ids;            // pool ids that are exact copies of GT
    std::vector<Vec3> corners;            // deduped layout corners
};

struct SynthScene {
    GroundTruth gt;
    ProposalPool pool;
    ObservationSet obs;
};

/// Builds ground truth, the noisy proposal pool and rendered observations.
/// Deterministic in config.seed. Throws if objects cannot be placed without
/// ground-truth incompatibilities after 1000 attempts.
SynthScene generate(const SynthConfig& config);

/// Labeled surface samples of the ground-truth layout (walls + floor),
/// for the RANSAC pipeline. Gaussian noise along the normal.
std::vector<CloudPoint> sample_layout_cloud(const GroundTruth& gt, double points_per_m2,
                                            double noise_sigma, uint64_t seed);

/// Exhaustive optimum over all feasible subsets (compatibility-pruned DFS).
/// Ties resolve to the lexicographically smallest sorted member list.
/// Throws when the pool exceeds max_pool.
SceneSolution brute_force(const ProposalPool& pool, const PoolRenders& renders,
                          const ObservationSet& obs, const ScoreWeights& weights,
                          int max_pool = 20);

/// The hill-climbing trap: one wide object with the best solo score blocks
/// the two smaller objects whose joint score is higher.
SynthScene make_trap_scene(uint64_t seed = 7);

/// Scene bundle on disk: gt.json, pool.json, mesh/*.obj, obs/ (+cloud.ply).
void save_bundle(const std::filesystem::path& dir, const SynthScene& scene);
SynthScene load_bundle(const std::filesystem::path& dir);

/// Parametric furniture in a canonical frame (base on z=0, centered in x/y).
TriangleMesh make_category_mesh(Category c, double width, double depth, double height);

}  // namespace mcss
