#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "gave/alignment.hpp"
#include "gave/depth_preproc.hpp"
#include "gave/error.hpp"
#include "gave/io.hpp"
#include "gave/llt.hpp"
#include "gave/metrics.hpp"
#include "gave/pipeline.hpp"
#include "gave/synth.hpp"

namespace py = pybind11;
using namespace gave;

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

Tensor to_tensor(const FloatArray& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    return Tensor(shape, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const Tensor& t) {
    FloatArray out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
    std::memcpy(out.mutable_data(), t.data(), t.size() * sizeof(float));
    return out;
}

FloatArray image_array(const std::vector<float>& values, std::size_t h, std::size_t w, std::size_t c) {
    FloatArray out = c == 1 ? FloatArray({h, w}) : FloatArray({h, w, c});
    std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(float));
    return out;
}

// Intrinsics travel as (fx, fy, cx, cy); the extents come from the arrays.
RgbdFrame make_frame(const FloatArray& rgb, const FloatArray& depth, const std::array<double, 4>& k) {
    if (rgb.ndim() != 3 || rgb.shape(2) != 3 || depth.ndim() != 2 || depth.shape(0) != rgb.shape(0) ||
        depth.shape(1) != rgb.shape(1))
        throw Error(ErrorKind::ShapeMismatch, "expected rgb (H, W, 3) and depth (H, W)");
    const Intrinsics intr{k[0], k[1], k[2], k[3], static_cast<std::size_t>(rgb.shape(1)),
                          static_cast<std::size_t>(rgb.shape(0))};
    intr.validate();
    RgbdFrame f = RgbdFrame::blank(intr);
    std::memcpy(f.rgb.data(), rgb.data(), f.rgb.size() * sizeof(float));
    std::memcpy(f.depth.data(), depth.data(), f.depth.size() * sizeof(float));
    f.refresh_mask();
    f.validate();
    return f;
}

std::vector<Vec3> to_points(const DoubleArray& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw Error(ErrorKind::ShapeMismatch, "expected an (N, 3) array");
    std::vector<Vec3> pts(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = Vec3(a.at(i, 0), a.at(i, 1), a.at(i, 2));
    return pts;
}

Pose to_pose(const Mat4& m) {
    const Pose p = Pose::from_matrix(m);
    if (!p.is_valid(1e-5)) throw Error(ErrorKind::InvalidArgument, "matrix is not a rigid transform");
    return p;
}

PipelineConfig make_config(const std::map<std::string, std::string>& settings) {
    PipelineConfig cfg;
    for (const auto& [k, v] : settings) cfg.set(k, v);
    cfg.validate();
    return cfg;
}

py::dict frame_dict(const RgbdFrame& f) {
    py::dict d;
    d["rgb"] = image_array(f.rgb, f.height, f.width, 3);
    d["depth"] = image_array(f.depth, f.height, f.width, 1);
    d["intrinsics"] = std::array<double, 4>{f.intrinsics.fx, f.intrinsics.fy, f.intrinsics.cx, f.intrinsics.cy};
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Geometry-aware visual features for RGB-D registration";

    py::register_exception<Error>(m, "Error");

    m.def(
        "conv2d",
        [](const FloatArray& input, const FloatArray& kernel, const FloatArray& bias, int stride, int dilation) {
            ConvParams p;
            p.kernel = to_tensor(kernel);
            p.bias = to_tensor(bias);
            p.stride = stride;
            p.dilation = dilation;
            return to_array(conv2d(to_tensor(input), p));
        },
        py::arg("input"), py::arg("kernel"), py::arg("bias"), py::arg("stride") = 1, py::arg("dilation") = 1,
        "Zero-padded convolution of an (H, W, C) array with an (out, in, K, K) kernel.");
    m.def(
        "sigmoid", [](const FloatArray& x) { return to_array(sigmoid(to_tensor(x))); },
        "Logistic function kept strictly inside (0, 1).");

    m.def(
        "fill_holes",
        [](const FloatArray& rgb, const FloatArray& depth, const std::array<double, 4>& k, int radius,
           double sigma_spatial, double sigma_range, int iterations) {
            const RgbdFrame out = fill_holes_jbf(make_frame(rgb, depth, k),
                                                 {radius, sigma_spatial, sigma_range, iterations});
            return image_array(out.depth, out.height, out.width, 1);
        },
        py::arg("rgb"), py::arg("depth"), py::arg("intrinsics"), py::arg("window_radius") = 5,
        py::arg("sigma_spatial") = 3.0, py::arg("sigma_range") = 0.1, py::arg("max_iterations") = 8,
        "Color-guided hole filling; returns the completed depth map.");

    m.def(
        "slice",
        [](const FloatArray& features, std::size_t n_grid, const FloatArray& guidance) {
            return to_array(slice(BilateralGrid::from_features(to_tensor(features), n_grid),
                                  GuidanceMap{to_tensor(guidance)}));
        },
        py::arg("grid_features"), py::arg("n_grid"), py::arg("guidance"),
        "Trilinear readout of an (h, w, d_d) grid at every pixel of an (8h, 8w, 1) guidance map.");

    m.def(
        "extract_features",
        [](const FloatArray& rgb, const FloatArray& depth, const std::array<double, 4>& k, std::uint64_t seed,
           const std::string& weights, const std::map<std::string, std::string>& settings) {
            const PipelineConfig cfg = make_config(settings);
            const ModelWeights w = weights.empty() ? init_weights(seed, cfg.llt) : load_weights(weights, cfg.llt);
            return to_array(extract_features(make_frame(rgb, depth, k), w, cfg).values);
        },
        py::arg("rgb"), py::arg("depth"), py::arg("intrinsics"), py::arg("seed") = 0, py::arg("weights") = "",
        py::arg("config") = std::map<std::string, std::string>{},
        "Dense (H, W, d_c) features; seeded random weights unless a weights file is given.");

    m.def(
        "weighted_procrustes",
        [](const DoubleArray& x, const DoubleArray& y, const std::vector<double>& w) {
            return weighted_procrustes(to_points(x), to_points(y), w).matrix();
        },
        py::arg("x"), py::arg("y"), py::arg("w"), "Best rigid 4x4 transform taking x onto y.");
    m.def(
        "procrustes_grad",
        [](const DoubleArray& x, const DoubleArray& y, const std::vector<double>& w) {
            const auto g = procrustes_grad(to_points(x), to_points(y), w);
            return py::make_tuple(g.pose.matrix(), g.d_x, g.d_y, g.d_w);
        },
        py::arg("x"), py::arg("y"), py::arg("w"), "Pose and its 12-row Jacobians for x, y and w.");

    m.def(
        "rotation_error", [](const Mat3& a, const Mat3& b) { return rotation_error(a, b); },
        "Angle between two rotations, degrees.");
    m.def(
        "translation_error", [](const Vec3& a, const Vec3& b) { return translation_error(a, b); },
        "Translation difference, millimeters.");
    m.def(
        "chamfer_distance",
        [](const DoubleArray& a, const DoubleArray& b) { return chamfer_distance(to_points(a), to_points(b)); },
        "Symmetric Chamfer distance, centimeters.");

    m.def(
        "gen_scene",
        [](std::uint64_t seed, const std::string& params) {
            SceneParams p;
            if (!params.empty()) p.set(params);
            const ScenePair pair = gen_scene(seed, p);
            py::dict d;
            d["ref"] = frame_dict(pair.ref);
            d["tgt"] = frame_dict(pair.tgt);
            d["gt"] = pair.gt.matrix();
            return d;
        },
        py::arg("seed"), py::arg("params") = "", "Synthetic RGB-D pair with its ground-truth relative pose.");

    m.def(
        "register_oracle",
        [](py::dict ref, py::dict tgt, const Mat4& gt, const std::map<std::string, std::string>& settings) {
            const auto frame = [](py::dict d) {
                return make_frame(d["rgb"].cast<FloatArray>(), d["depth"].cast<FloatArray>(),
                                  d["intrinsics"].cast<std::array<double, 4>>());
            };
            const RgbdFrame r = frame(ref), t = frame(tgt);
            const Pose truth = to_pose(gt);
            const Registration reg = register_pair(r, t, oracle_features(r, Pose::identity()),
                                                   oracle_features(t, pose_inverse(truth)), make_config(settings));
            return reg.pose.matrix();
        },
        py::arg("ref"), py::arg("tgt"), py::arg("gt"), py::arg("config") = std::map<std::string, std::string>{},
        "Registers two frames using descriptors built from the known pose.");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
