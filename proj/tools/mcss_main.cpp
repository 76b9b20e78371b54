#include "mcss/baselines.hpp"
#include "mcss/config.hpp"
#include "mcss/metrics.hpp"
#include "mcss/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 0;
    bool seed_set = false;
    int iterations = -1;
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "TOML config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--iterations", opts.iterations, "search iterations");
    cmd->add_option("--jobs", opts.jobs, "parallel jobs where applicable");
}

mcss::AppConfig load_config(const CommonOpts& opts) {
    mcss::AppConfig cfg = opts.config_path.empty()
                              ? mcss::AppConfig{}
                              : mcss::AppConfig::from_file(opts.config_path);
    if (opts.seed_set) {
        cfg.mcss.seed = opts.seed;
        cfg.synth.seed = opts.seed;
    }
    if (opts.iterations > 0) cfg.mcss.iterations = opts.iterations;
    return cfg;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_convergence_csv(const fs::path& path, const std::vector<mcss::ConvergencePoint>& series) {
    std::string csv = "iteration,best_global_score,wall_ms\n";
    for (const auto& p : series) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", p.wall_ms);
        csv += std::to_string(p.iteration) + "," + format_double(p.best_score) + "," + buf + "\n";
    }
    mcss::write_text_file(path, csv);
}

void write_solution_json(const fs::path& path, const mcss::SceneSolution& sol,
                         const mcss::ScoreBreakdown& terms, const std::string& mode,
                         uint64_t seed, int iterations) {
    json j;
    j["members"] = sol.members;
    j["global_score"] = sol.global_score;
    j["feasible"] = sol.feasible;
    j["terms"] = {{"segmentation", terms.segmentation},
                  {"depth", terms.depth},
                  {"prior", terms.prior}};
    j["mode"] = mode;
    j["seed"] = seed;
    j["iterations"] = iterations;
    mcss::write_text_file(path, j.dump(2) + "\n");
}

struct LoadedBundle {
    mcss::SynthScene scene;
    mcss::PoolRenders renders;
};

LoadedBundle load_bundle_rendered(const fs::path& dir, const mcss::AppConfig& cfg) {
    LoadedBundle b;
    b.scene = mcss::load_bundle(dir);
    b.renders = mcss::prerender_pool(b.scene.pool, b.scene.obs.cameras(),
                                     cfg.visibility_min_pixels);
    return b;
}

int cmd_synth(const CommonOpts& opts) {
    mcss::AppConfig cfg = load_config(opts);
    const mcss::SynthScene scene = mcss::generate(cfg.synth);
    mcss::save_bundle(opts.out_dir, scene);
    const auto cloud = mcss::sample_layout_cloud(scene.gt, cfg.cloud_points_per_m2,
                                                 cfg.cloud_noise_sigma, cfg.synth.seed);
    mcss::write_ply(fs::path(opts.out_dir) / "cloud.ply", cloud);
    std::cout << "bundle written to " << opts.out_dir << " (pool " << scene.pool.size()
              << " proposals, " << scene.obs.view_count() << " views)\n";
    return 0;
}

int cmd_search(const CommonOpts& opts, const std::string& bundle, const std::string& mode,
               bool timing, bool tree_dump) {
    mcss::AppConfig cfg = load_config(opts);
    cfg.mcss.record_timing = timing;
    const LoadedBundle b = load_bundle_rendered(bundle, cfg);

    mcss::McssResult result;
    if (mode == "two-phase") {
        result = mcss::run_two_phase(b.scene.pool, b.renders, b.scene.obs, cfg.weights, cfg.mcss);
    } else if (mode == "layout" || mode == "object") {
        result = mcss::run_mcss(b.scene.pool, b.renders, b.scene.obs, cfg.weights,
                                mode == "layout" ? mcss::TreeMode::Layout : mcss::TreeMode::Object,
                                cfg.mcss, {}, tree_dump);
    } else {
        std::cerr << "unknown mode '" << mode << "'\n";
        return 2;
    }

    fs::create_directories(opts.out_dir);
    const auto terms = mcss::global_score_breakdown(result.solution.members, b.scene.pool,
                                                    b.renders, b.scene.obs, cfg.weights);
    write_solution_json(fs::path(opts.out_dir) / "solution.json", result.solution, terms, mode,
                        cfg.mcss.seed, cfg.mcss.iterations);
    write_convergence_csv(fs::path(opts.out_dir) / "convergence.csv", result.series);
    if (tree_dump && !result.tree_dump.empty())
        mcss::write_text_file(fs::path(opts.out_dir) / "tree.json", result.tree_dump);
    std::cout << "best score " << result.solution.global_score << " with "
              << result.solution.members.size() << " members\n";
    return 0;
}

int cmd_baseline(const CommonOpts& opts, const std::string& bundle, const std::string& method) {
    mcss::AppConfig cfg = load_config(opts);
    const LoadedBundle b = load_bundle_rendered(bundle, cfg);
    fs::create_directories(opts.out_dir);

    mcss::SceneSolution sol;
    if (method == "hill-global" || method == "hill-fitness") {
        sol = mcss::hill_climb(b.scene.pool, b.renders, b.scene.obs, cfg.weights,
                               method == "hill-global" ? mcss::HillClimbVariant::GlobalScore
                                                       : mcss::HillClimbVariant::Fitness);
    } else if (method == "random") {
        auto r = mcss::random_search(b.scene.pool, b.renders, b.scene.obs, cfg.weights,
                                     cfg.mcss.iterations, cfg.mcss.seed, cfg.mcss.log_stride);
        sol = r.solution;
        write_convergence_csv(fs::path(opts.out_dir) / "convergence.csv", r.series);
    } else {
        std::cerr << "unknown method '" << method << "'\n";
        return 2;
    }
    const auto terms = mcss::global_score_breakdown(sol.members, b.scene.pool, b.renders,
                                                    b.scene.obs, cfg.weights);
    write_solution_json(fs::path(opts.out_dir) / "solution.json", sol, terms, method,
                        cfg.mcss.seed, cfg.mcss.iterations);
    std::cout << method << " score " << sol.global_score << " with " << sol.members.size()
              << " members\n";
    return 0;
}

int cmd_ransac(const CommonOpts& opts, const std::string& cloud_path) {
    mcss::AppConfig cfg = load_config(opts);
    const auto cloud = mcss::read_ply(cloud_path);
    mcss::PlaneSet detected;
    auto proposals =
        mcss::layout_proposals_from_cloud(cloud, cfg.ransac, cfg.mcss.seed, &detected);
    mcss::ProposalPool pool;
    pool.voxel_size = cfg.voxel_size;
    pool.compat_params = cfg.compat;
    pool.layouts = std::move(proposals);
    pool.finalize();
    fs::create_directories(opts.out_dir);
    mcss::save_pool(fs::path(opts.out_dir) / "layout_pool.json", pool);
    json meta;
    meta["planes"] = detected.planes.size();
    meta["floor_detected"] = detected.floor_index.has_value();
    meta["proposals"] = pool.layouts.size();
    mcss::write_text_file(fs::path(opts.out_dir) / "ransac_meta.json", meta.dump(2) + "\n");
    std::cout << detected.planes.size() << " planes, " << pool.layouts.size()
              << " layout proposals\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& solution_path, const std::string& bundle) {
    mcss::AppConfig cfg = load_config(opts);
    const mcss::SynthScene scene = mcss::load_bundle(bundle);
    const json sol = json::parse(mcss::read_text_file(solution_path));
    const auto members = sol.at("members").get<std::vector<int>>();

    std::vector<mcss::Vec3> pred_corners;
    std::vector<mcss::LayoutProposal> pred_layouts;
    std::vector<mcss::ObjectProposal> pred_objects;
    for (int id : members) {
        if (scene.pool.is_layout(id)) {
            pred_layouts.push_back(scene.pool.layout(id));
            for (const mcss::Vec3& v : scene.pool.layout(id).polygon.vertices) {
                bool dup = false;
                for (const mcss::Vec3& c : pred_corners)
                    if ((c - v).norm() < 1e-6) {
                        dup = true;
                        break;
                    }
                if (!dup) pred_corners.push_back(v);
            }
        } else {
            pred_objects.push_back(scene.pool.object(id));
        }
    }

    json report;
    const auto cpr = mcss::corner_pr(pred_corners, scene.gt.corners);
    report["corners"] = {{"precision", cpr.precision ? json(*cpr.precision) : json()},
                         {"recall", cpr.recall ? json(*cpr.recall) : json()},
                         {"matched", cpr.matched}};

    json poly = json::array();
    double iou_sum = 0.0;
    int iou_count = 0;
    for (const auto& gt_layout : scene.gt.layouts) {
        double best = 0.0;
        for (const auto& p : pred_layouts)
            if (p.category == gt_layout.category) best = std::max(best, mcss::polygon_iou(p, gt_layout));
        poly.push_back({{"category", mcss::category_name(gt_layout.category)}, {"iou", best}});
        iou_sum += best;
        ++iou_count;
    }
    report["polygon_iou"] = {{"per_gt", poly},
                             {"mean", iou_count ? iou_sum / iou_count : 0.0}};

    std::vector<mcss::BboxEntry> pred_boxes, gt_boxes;
    for (const auto& o : pred_objects) pred_boxes.push_back({o.bbox, o.category});
    for (const auto& o : scene.gt.objects) gt_boxes.push_back({o.bbox, o.category});
    json bbox;
    std::string csv = "metric,value\n";
    for (double th : {0.5, 0.75}) {
        const auto pr = mcss::bbox_pr(pred_boxes, gt_boxes, th);
        json per_cat;
        for (const auto& [cat, r] : pr) {
            per_cat[mcss::category_name(cat)] = {
                {"precision", r.precision ? json(*r.precision) : json()},
                {"recall", r.recall ? json(*r.recall) : json()},
                {"matched", r.matched}};
            if (r.precision)
                csv += "bbox_precision_" + mcss::category_name(cat) + "_" +
                       format_double(th) + "," + format_double(*r.precision) + "\n";
            if (r.recall)
                csv += "bbox_recall_" + mcss::category_name(cat) + "_" + format_double(th) + "," +
                       format_double(*r.recall) + "\n";
        }
        bbox[format_double(th)] = per_cat;
    }
    report["bbox_pr"] = bbox;

    const auto chamfer = mcss::chamfer_table(pred_objects, scene.gt.objects);
    json cham;
    for (const auto& [cat, row] : chamfer.per_category) {
        cham[mcss::category_name(cat)] = {{"mean_mm", row.mean_mm}, {"matched", row.matched}};
        csv += "chamfer_mm_" + mcss::category_name(cat) + "," + format_double(row.mean_mm) + "\n";
    }
    cham["unmatched_gt"] = chamfer.unmatched_gt;
    report["chamfer"] = cham;

    if (cpr.precision) csv += "corner_precision," + format_double(*cpr.precision) + "\n";
    if (cpr.recall) csv += "corner_recall," + format_double(*cpr.recall) + "\n";
    csv += "polygon_iou_mean," + format_double(iou_count ? iou_sum / iou_count : 0.0) + "\n";

    fs::create_directories(opts.out_dir);
    mcss::write_text_file(fs::path(opts.out_dir) / "report.json", report.dump(2) + "\n");
    mcss::write_text_file(fs::path(opts.out_dir) / "report.csv", csv);
    std::cout << "report written to " << opts.out_dir << "\n";
    return 0;
}

int cmd_ablate(const CommonOpts& opts, const std::string& bundle) {
    mcss::AppConfig cfg = load_config(opts);
    cfg.mcss.log_stride = std::max(1, std::min(cfg.mcss.log_stride, cfg.mcss.iterations));
    const LoadedBundle b = load_bundle_rendered(bundle, cfg);

    auto run_variant = [&](mcss::BackupMode backup) {
        mcss::McssConfig mc = cfg.mcss;
        mc.backup = backup;
        return mcss::run_mcss(b.scene.pool, b.renders, b.scene.obs, cfg.weights,
                              mcss::TreeMode::Object, mc);
    };
    std::future<mcss::McssResult> local_f, global_f;
    if (opts.jobs > 1) {
        local_f = std::async(std::launch::async, run_variant, mcss::BackupMode::Local);
        global_f = std::async(std::launch::async, run_variant, mcss::BackupMode::Global);
    }
    const mcss::McssResult local =
        opts.jobs > 1 ? local_f.get() : run_variant(mcss::BackupMode::Local);
    const mcss::McssResult global =
        opts.jobs > 1 ? global_f.get() : run_variant(mcss::BackupMode::Global);
    const auto random = mcss::random_search(b.scene.pool, b.renders, b.scene.obs, cfg.weights,
                                            cfg.mcss.iterations, cfg.mcss.seed,
                                            cfg.mcss.log_stride);

    std::string csv = "iteration,local_score,whole_score,random\n";
    const size_t rows = std::min({local.series.size(), global.series.size(), random.series.size()});
    for (size_t i = 0; i < rows; ++i)
        csv += std::to_string(local.series[i].iteration) + "," +
               format_double(local.series[i].best_score) + "," +
               format_double(global.series[i].best_score) + "," +
               format_double(random.series[i].best_score) + "\n";
    fs::create_directories(opts.out_dir);
    mcss::write_text_file(fs::path(opts.out_dir) / "ablation.csv", csv);

    json summary;
    summary["local_best"] = local.solution.global_score;
    summary["whole_best"] = global.solution.global_score;
    summary["random_best"] = random.solution.global_score;
    mcss::write_text_file(fs::path(opts.out_dir) / "ablation.json", summary.dump(2) + "\n");
    std::cout << "local " << local.solution.global_score << "  whole "
              << global.solution.global_score << "  random " << random.solution.global_score
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo scene search over object and layout proposals"};
    app.require_subcommand(1);

    CommonOpts synth_opts, search_opts, baseline_opts, ransac_opts, eval_opts, ablate_opts;

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene bundle");
    add_common(synth, synth_opts);

    auto* search = app.add_subcommand("search", "run the tree search on a bundle");
    std::string bundle, mode = "two-phase";
    bool timing = false, tree_dump = false;
    search->add_option("--bundle", bundle, "scene bundle directory")->required();
    search->add_option("--mode", mode, "layout | object | two-phase");
    search->add_flag("--timing", timing, "record wall time in the convergence csv");
    search->add_flag("--tree-dump", tree_dump, "write the search tree as json");
    add_common(search, search_opts);

    auto* baseline = app.add_subcommand("baseline", "run a baseline optimizer");
    std::string bl_bundle, method = "hill-global";
    baseline->add_option("--bundle", bl_bundle, "scene bundle directory")->required();
    baseline->add_option("--method", method, "hill-global | hill-fitness | random");
    add_common(baseline, baseline_opts);

    auto* ransac = app.add_subcommand("ransac", "layout proposals from a labeled cloud");
    std::string cloud_path;
    ransac->add_option("--cloud", cloud_path, "labeled PLY point cloud")->required();
    add_common(ransac, ransac_opts);

    auto* eval = app.add_subcommand("eval", "metrics of a solution against ground truth");
    std::string solution_path, eval_bundle;
    eval->add_option("--solution", solution_path, "solution.json")->required();
    eval->add_option("--bundle", eval_bundle, "scene bundle directory")->required();
    add_common(eval, eval_opts);

    auto* ablate = app.add_subcommand("ablate", "local vs whole-score vs random convergence");
    std::string ab_bundle;
    ablate->add_option("--bundle", ab_bundle, "scene bundle directory")->required();
    add_common(ablate, ablate_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_opts);
        if (search->parsed()) return cmd_search(search_opts, bundle, mode, timing, tree_dump);
        if (baseline->parsed()) return cmd_baseline(baseline_opts, bl_bundle, method);
        if (ransac->parsed()) return cmd_ransac(ransac_opts, cloud_path);
        if (eval->parsed()) return cmd_eval(eval_opts, solution_path, eval_bundle);
        if (ablate->parsed()) return cmd_ablate(ablate_opts, ab_bundle);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
