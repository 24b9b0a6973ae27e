// Command-line front end: register, eval, synth, gradcheck, selftest.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gave/error.hpp"
#include "gave/extractors.hpp"
#include "gave/io.hpp"
#include "gave/metrics.hpp"
#include "gave/oracle.hpp"
#include "gave/pipeline.hpp"
#include "gave/render_loss.hpp"
#include "gave/synth.hpp"
#include "gave/weights.hpp"

namespace fs = std::filesystem;
using namespace gave;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitMissingWeights = 2;

struct ModelOptions {
    std::string weights_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string config_path;
    std::vector<std::string> overrides;
    bool oracle_features = false;
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
    auto* w = cmd->add_option("--weights", m.weights_path, "LLTW weight file");
    auto* s = cmd->add_option_function<std::uint64_t>(
        "--seed", [&m](std::uint64_t v) { m.seed = v, m.seed_given = true; },
        "initialize weights from this seed instead of a file");
    w->excludes(s);
    cmd->add_option("--config", m.config_path, "key=value config file");
    cmd->add_option("--set", m.overrides, "config override key=value (repeatable, applied after --config)");
    cmd->add_flag("--oracle-features", m.oracle_features,
                  "use ground-truth scene-coordinate descriptors instead of the network");
}

PipelineConfig build_config(const ModelOptions& m) {
    PipelineConfig cfg = m.config_path.empty() ? PipelineConfig{} : PipelineConfig::load(m.config_path);
    for (const auto& kv : m.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Format, "--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

// Returns an empty map in oracle mode, where no network runs.
ModelWeights build_weights(const ModelOptions& m, const PipelineConfig& cfg) {
    if (m.oracle_features) return {};
    if (!m.weights_path.empty()) {
        if (!fs::exists(m.weights_path))
            throw Error(ErrorKind::MissingWeights, "weight file not found: " + m.weights_path);
        return load_weights(m.weights_path, cfg.llt);
    }
    if (!m.seed_given) throw Error(ErrorKind::InvalidArgument, "either --weights or --seed is required");
    return init_weights(m.seed, cfg.llt);
}

// The reference camera defines scene coordinates; the target camera sits at gt^-1.
Registration run_registration(const RgbdFrame& ref, const RgbdFrame& tgt, const ModelWeights& weights,
                              const PipelineConfig& cfg, bool oracle, const Pose* gt) {
    if (!oracle) return register_frames(ref, tgt, weights, cfg);
    if (!gt) throw Error(ErrorKind::InvalidArgument, "--oracle-features needs a ground-truth pose (--gt-pose for register, --gt for eval)");
    const FeatureMap fr = oracle_features(ref, Pose::identity(), cfg.llt.d_c);
    const FeatureMap ft = oracle_features(tgt, pose_inverse(*gt), cfg.llt.d_c);
    return register_pair(ref, tgt, fr, ft, cfg);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

PointCloud tagged(const PointCloud& cloud, const Pose& pose, const Eigen::Vector3f& color) {
    PointCloud out;
    out.positions = transform(cloud.positions, pose);
    out.colors.assign(cloud.size(), color);
    return out;
}

void write_merged_ply(const Registration& reg, const std::string& path) {
    // Transformed reference in purple, target in yellow.
    PointCloud merged = tagged(reg.tgt, Pose::identity(), {1.0f, 0.84f, 0.0f});
    const PointCloud moved = tagged(reg.ref, reg.pose, {0.5f, 0.0f, 0.5f});
    merged.positions.insert(merged.positions.end(), moved.positions.begin(), moved.positions.end());
    merged.colors.insert(merged.colors.end(), moved.colors.begin(), moved.colors.end());
    save_ply(merged, path);
}

void write_render(const RgbdFrame& ref, const RgbdFrame& tgt, const Pose& pose, const std::string& prefix) {
    const RenderedView view = render_points(unproject(ref), pose, tgt.intrinsics);
    RgbdFrame frame = RgbdFrame::blank(tgt.intrinsics);
    frame.rgb = view.rgb;
    frame.depth = view.depth;
    frame.refresh_mask();
    save_rgbd(frame, prefix + "_rgb.png", prefix + "_depth.png");
}

// ---------------------------------------------------------------- register

struct RegisterOptions {
    std::string ref_rgb, ref_depth, tgt_rgb, tgt_depth, intrinsics;
    std::string out_pose, out_ply, dump_correspondences, gt_pose, dump_render;
    ModelOptions model;
};

int cmd_register(const RegisterOptions& o) {
    const PipelineConfig cfg = build_config(o.model);
    const ModelWeights weights = build_weights(o.model, cfg);
    const Intrinsics intr = load_intrinsics(o.intrinsics);
    const RgbdFrame ref = load_rgbd(o.ref_rgb, o.ref_depth, intr);
    const RgbdFrame tgt = load_rgbd(o.tgt_rgb, o.tgt_depth, intr);
    Pose gt;
    if (!o.gt_pose.empty()) gt = load_pose(o.gt_pose);

    const Registration reg = run_registration(ref, tgt, weights, cfg, o.model.oracle_features,
                                              o.gt_pose.empty() ? nullptr : &gt);
    save_pose(reg.pose, o.out_pose);
    if (!o.out_ply.empty()) write_merged_ply(reg, o.out_ply);
    if (!o.dump_correspondences.empty()) write_text(o.dump_correspondences, format_correspondences(reg.correspondences));
    if (!o.dump_render.empty()) write_render(ref, tgt, reg.pose, o.dump_render);

    std::cout << "correspondences=" << reg.correspondences.size() << "\n"
              << "inliers=" << reg.report.inliers << "\n"
              << "best_hypothesis=" << reg.report.best_hypothesis << "\n";
    if (!o.gt_pose.empty())
        std::cout << "rotation_error_deg=" << rotation_error(reg.pose.rotation, gt.rotation) << "\n"
                  << "translation_error_mm=" << translation_error(reg.pose.translation, gt.translation) << "\n";
    return 0;
}

// -------------------------------------------------------------------- eval

struct PairEntry {
    std::string ref_rgb, ref_depth, tgt_rgb, tgt_depth, intrinsics, est_pose;
};

std::string resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? p : (base / path).string();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

bool skippable(const std::string& line) {
    const auto b = line.find_first_not_of(" \t\r");
    return b == std::string::npos || line[b] == '#';
}

std::vector<PairEntry> read_manifest(const std::string& path) {
    const fs::path base = fs::path(path).parent_path();
    std::vector<PairEntry> out;
    const auto lines = read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        if (skippable(lines[n])) continue;
        std::istringstream fields(lines[n]);
        std::vector<std::string> f;
        for (std::string tok; fields >> tok;) f.push_back(tok);
        if (f.size() != 5 && f.size() != 6)
            throw Error(ErrorKind::Format, path + " line " + std::to_string(n + 1) +
                                               ": expected 5 or 6 fields (ref_rgb ref_depth tgt_rgb tgt_depth "
                                               "intrinsics [est_pose]), found " +
                                               std::to_string(f.size()));
        PairEntry e{resolve(base, f[0]), resolve(base, f[1]), resolve(base, f[2]),
                    resolve(base, f[3]), resolve(base, f[4]), f.size() == 6 ? resolve(base, f[5]) : ""};
        out.push_back(std::move(e));
    }
    if (out.empty()) throw Error(ErrorKind::Format, path + ": manifest lists no pairs");
    return out;
}

std::vector<std::string> read_gt_list(const std::string& path) {
    const fs::path base = fs::path(path).parent_path();
    std::vector<std::string> out;
    const auto lines = read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        if (skippable(lines[n])) continue;
        std::istringstream fields(lines[n]);
        std::string p, extra;
        fields >> p;
        if (fields >> extra)
            throw Error(ErrorKind::Format, path + " line " + std::to_string(n + 1) + ": expected one pose path");
        out.push_back(resolve(base, p));
    }
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct EvalOptions {
    std::string pairs, gt, out;
    ModelOptions model;
};

int cmd_eval(const EvalOptions& o) {
    const PipelineConfig cfg = build_config(o.model);
    const ModelWeights weights = build_weights(o.model, cfg);
    const auto entries = read_manifest(o.pairs);
    const auto gt_paths = read_gt_list(o.gt);
    if (gt_paths.size() != entries.size())
        throw Error(ErrorKind::Format, "manifest lists " + std::to_string(entries.size()) + " pairs but " + o.gt +
                                           " lists " + std::to_string(gt_paths.size()) + " poses");

    std::vector<double> rot, trans, chamfer;
    std::vector<Registration> regs;
    std::vector<Pose> gts;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const Intrinsics intr = load_intrinsics(e.intrinsics);
        const RgbdFrame ref = load_rgbd(e.ref_rgb, e.ref_depth, intr);
        const RgbdFrame tgt = load_rgbd(e.tgt_rgb, e.tgt_depth, intr);
        const Pose gt = load_pose(gt_paths[i]);
        Registration reg = run_registration(ref, tgt, weights, cfg, o.model.oracle_features, &gt);
        if (!e.est_pose.empty()) reg.pose = load_pose(e.est_pose);

        rot.push_back(rotation_error(reg.pose.rotation, gt.rotation));
        trans.push_back(translation_error(reg.pose.translation, gt.translation));
        const auto ref_points = unproject(ref).positions;
        chamfer.push_back(chamfer_distance(transform(ref_points, reg.pose), transform(ref_points, gt)));
        regs.push_back(std::move(reg));
        gts.push_back(gt);
    }

    std::vector<MatchEvaluation> evals;
    for (std::size_t i = 0; i < regs.size(); ++i)
        evals.push_back({&regs[i].correspondences, &regs[i].ref, &regs[i].tgt, gts[i]});
    const RecallReport fmr = feature_match_recall(evals);

    const auto acc_r = accuracy_table(rot, AccuracyPresets::rotation_deg);
    const auto acc_t = accuracy_table(trans, AccuracyPresets::translation_mm);
    const auto acc_c = accuracy_table(chamfer, AccuracyPresets::chamfer_cm);

    std::ostringstream report;
    report << "pairs=" << entries.size() << "\n"
           << "rotation_deg_mean=" << fmt(mean(rot)) << "\n"
           << "rotation_deg_median=" << fmt(median(rot)) << "\n"
           << "translation_mm_mean=" << fmt(mean(trans)) << "\n"
           << "translation_mm_median=" << fmt(median(trans)) << "\n"
           << "chamfer_cm_mean=" << fmt(mean(chamfer)) << "\n"
           << "chamfer_cm_median=" << fmt(median(chamfer)) << "\n";
    const char* labels[3] = {"5deg", "10deg", "45deg"};
    for (int i = 0; i < 3; ++i) report << "rotation_acc_" << labels[i] << "=" << fmt(acc_r[i], 4) << "\n";
    const char* tlabels[3] = {"5cm", "10cm", "25cm"};
    for (int i = 0; i < 3; ++i) report << "translation_acc_" << tlabels[i] << "=" << fmt(acc_t[i], 4) << "\n";
    const char* clabels[3] = {"1mm", "5mm", "10mm"};
    for (int i = 0; i < 3; ++i) report << "chamfer_acc_" << clabels[i] << "=" << fmt(acc_c[i], 4) << "\n";
    report << "fmr=" << fmt(fmr.recall, 4) << "\n"
           << "fmr_empty_sets=" << fmr.empty_sets << "\n\n";

    // Human-readable table in the usual column order.
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %10s %10s %8s %8s %8s\n", "metric", "mean", "median", "acc@1", "acc@2",
                  "acc@3");
    report << line;
    auto row = [&](const char* name, const std::vector<double>& v, const std::vector<double>& acc) {
        std::snprintf(line, sizeof line, "%-12s %10.3f %10.3f %8.3f %8.3f %8.3f\n", name, mean(v), median(v), acc[0],
                      acc[1], acc[2]);
        report << line;
    };
    row("rotation", rot, acc_r);
    row("translation", trans, acc_t);
    row("chamfer", chamfer, acc_c);
    std::snprintf(line, sizeof line, "%-12s %10.3f\n", "fmr", fmr.recall);
    report << line;

    if (!o.out.empty()) write_text(o.out, report.str());
    std::cout << report.str();
    return 0;
}

// ------------------------------------------------------------------- synth

struct SynthOptions {
    std::uint64_t seed = 0;
    std::string params;
    std::string out;
    std::size_t count = 1;
};

int cmd_synth(const SynthOptions& o) {
    SceneParams params;
    if (!o.params.empty()) params.set(o.params);
    params.validate();
    fs::create_directories(o.out);
    std::ostringstream manifest, gt_list;
    for (std::size_t i = 0; i < o.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "pair_%03zu", i);
        const fs::path dir = fs::path(o.out) / name;
        fs::create_directories(dir);
        const ScenePair pair = gen_scene(o.seed + i, params);
        save_rgbd(pair.ref, (dir / "ref_rgb.png").string(), (dir / "ref_depth.png").string());
        save_rgbd(pair.tgt, (dir / "tgt_rgb.png").string(), (dir / "tgt_depth.png").string());
        save_intrinsics(pair.ref.intrinsics, (dir / "intrinsics.txt").string());
        save_pose(pair.gt, (dir / "gt_pose.txt").string());
        const std::string n(name);
        manifest << n << "/ref_rgb.png " << n << "/ref_depth.png " << n << "/tgt_rgb.png " << n << "/tgt_depth.png "
                 << n << "/intrinsics.txt\n";
        gt_list << n << "/gt_pose.txt\n";
    }
    write_text((fs::path(o.out) / "manifest.txt").string(), manifest.str());
    write_text((fs::path(o.out) / "gt_list.txt").string(), gt_list.str());
    std::cout << "wrote " << o.count << " pair(s) to " << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RGB-D registration with geometry-aware visual features"};
    app.require_subcommand(1);

    RegisterOptions reg;
    auto* r = app.add_subcommand("register", "estimate the pose between two RGB-D frames");
    r->add_option("--ref-rgb", reg.ref_rgb)->required();
    r->add_option("--ref-depth", reg.ref_depth)->required();
    r->add_option("--tgt-rgb", reg.tgt_rgb)->required();
    r->add_option("--tgt-depth", reg.tgt_depth)->required();
    r->add_option("--intrinsics", reg.intrinsics)->required();
    r->add_option("--out-pose", reg.out_pose)->required();
    r->add_option("--out-ply", reg.out_ply, "merged cloud: target yellow, moved reference purple");
    r->add_option("--dump-correspondences", reg.dump_correspondences);
    r->add_option("--dump-render", reg.dump_render, "prefix for the reference rendered into the target view");
    r->add_option("--gt-pose", reg.gt_pose, "ground-truth pose (needed by --oracle-features)");
    add_model_options(r, reg.model);

    EvalOptions ev;
    auto* e = app.add_subcommand("eval", "register manifest pairs and report error statistics");
    e->add_option("--pairs", ev.pairs, "manifest: ref_rgb ref_depth tgt_rgb tgt_depth intrinsics [est_pose]")
        ->required();
    e->add_option("--gt", ev.gt, "one ground-truth pose path per manifest pair")->required();
    e->add_option("--out", ev.out, "report file");
    add_model_options(e, ev.model);

    SynthOptions sy;
    auto* s = app.add_subcommand("synth", "write synthetic RGB-D pairs with ground truth");
    s->add_option("--seed", sy.seed);
    s->add_option("--params", sy.params, "key=value[,key=value] scene parameters");
    s->add_option("--out", sy.out)->required();
    s->add_option("--count", sy.count)->check(CLI::PositiveNumber);

    std::uint64_t gc_seed = 0;
    std::size_t gc_trials = 50;
    auto* g = app.add_subcommand("gradcheck", "compare alignment gradients with finite differences");
    g->add_option("--seed", gc_seed);
    g->add_option("--trials", gc_trials)->check(CLI::PositiveNumber);

    auto* st = app.add_subcommand("selftest", "run the oracle comparison suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (r->parsed()) return cmd_register(reg);
        if (e->parsed()) return cmd_eval(ev);
        if (s->parsed()) return cmd_synth(sy);
        if (g->parsed()) {
            const auto res = oracle::gradcheck(gc_seed, gc_trials);
            std::cout << "trials=" << res.trials << "\nentries=" << res.entries
                      << "\nmax_relative_error=" << res.max_relative_error << "\n";
            return res.max_relative_error < 1e-4 ? 0 : kExitFailure;
        }
        if (st->parsed()) {
            const auto res = oracle::run_selftest(std::cout);
            std::cout << res.passed << " passed, " << res.failed << " failed\n";
            return res.failed == 0 ? 0 : kExitFailure;
        }
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return err.kind() == ErrorKind::MissingWeights ? kExitMissingWeights : kExitFailure;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
