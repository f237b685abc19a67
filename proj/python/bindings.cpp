// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <yyrf/checkpoint.hpp>
#include <yyrf/cli.hpp>
#include <yyrf/dataset.hpp>
#include <yyrf/hitmap.hpp>
#include <yyrf/metrics.hpp>
#include <yyrf/synthetic.hpp>
#include <yyrf/trainer.hpp>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace yyrf;

namespace {

using ImageArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image
toImage(const ImageArray &a)
{
    if (a.ndim() != 3 || a.shape(2) != 3) {
        throw InputError("expected an H x W x 3 array");
    }
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
    return img;
}

ImageArray
toArray(const Image &img)
{
    ImageArray out({img.height, img.width, 3});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
}

TrainConfig
samplerConfig(int nCoarse, int nFine, bool floatDecoder)
{
    TrainConfig c;
    c.nCoarse = nCoarse;
    c.nFine = nFine;
    c.floatDecoder = floatDecoder;
    return c;
}

} // namespace

PYBIND11_MODULE(_yyrf, m)
{
    m.doc() = "Radiance fields on a Yin-Yang spherical grid";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<GridConfig>(m, "GridConfig")
        .def(py::init([](int nR, int nTheta, int nPhi, double r0, double rMax) {
                 return GridConfig::make(nR, nTheta, nPhi, r0, rMax);
             }),
             py::arg("n_r"), py::arg("n_theta"), py::arg("n_phi"), py::arg("r0"), py::arg("r_max"))
        .def_static("balanced", &GridConfig::withBalancedRatio, py::arg("n_r"), py::arg("r0"), py::arg("r_max"))
        .def_property_readonly("n_r", &GridConfig::nR)
        .def_property_readonly("n_theta", &GridConfig::nTheta)
        .def_property_readonly("n_phi", &GridConfig::nPhi)
        .def_property_readonly("r0", &GridConfig::r0)
        .def_property_readonly("r_max", &GridConfig::rMax)
        .def_property_readonly("growth", &GridConfig::growth)
        .def_property_readonly("shells", &GridConfig::shells)
        .def("__eq__", &GridConfig::operator==)
        .def("__repr__", &GridConfig::describe);

    m.def(
        "locate",
        [](const Vec3 &p, const GridConfig &cfg) {
            GridAssignment a = locate(p, cfg);
            return py::make_tuple(gridName(a.grid), a.index.r, a.index.theta, a.index.phi);
        },
        py::arg("point"), py::arg("cfg"), "Component grid name and continuous (r, theta, phi) node coordinates.");

    m.def(
        "pixel_ray",
        [](int u, int v, int width, int height, const Eigen::Matrix4d &pose) {
            Ray r = pixelToRay(u, v, width, height, CameraPose::fromMatrix(pose));
            return py::make_tuple(r.origin, r.direction);
        },
        py::arg("u"), py::arg("v"), py::arg("width"), py::arg("height"),
        py::arg("pose") = Eigen::Matrix4d::Identity().eval());

    m.def(
        "composite",
        [](const std::vector<double> &sigmas, const std::vector<Vec3> &colors, const std::vector<double> &deltas,
           const Vec3 &background) {
            RenderOut o = composite(sigmas, colors, deltas, background);
            return py::make_tuple(o.rgb, o.weights, o.transmittanceBg);
        },
        py::arg("sigmas"), py::arg("colors"), py::arg("deltas"), py::arg("background"),
        "Returns (rgb, weights, background transmittance).");

    m.def("spherical_weights", &sphericalWeights, py::arg("height"));
    m.def(
        "psnr", [](const ImageArray &a, const ImageArray &b) { return psnr(toImage(a), toImage(b)); }, py::arg("a"),
        py::arg("b"));
    m.def(
        "ws_psnr", [](const ImageArray &a, const ImageArray &b) { return wsPsnr(toImage(a), toImage(b)); },
        py::arg("a"), py::arg("b"));
    m.def(
        "ssim", [](const ImageArray &a, const ImageArray &b) { return ssim(toImage(a), toImage(b)); }, py::arg("a"),
        py::arg("b"));
    m.def(
        "ws_ssim", [](const ImageArray &a, const ImageArray &b) { return wsSsim(toImage(a), toImage(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "hit_cv",
        [](const GridConfig &cfg, int width, int height) {
            CameraPose centre;
            std::vector<Ray> rays = equirectRays(std::span(&centre, 1), width, height);
            return py::make_tuple(sphericalHits(rays, cfg).cv, cartesianHits(rays, matchedCartesianGrid(cfg)).cv);
        },
        py::arg("cfg"), py::arg("width"), py::arg("height"),
        "Hit-count CV of the spherical and matched Cartesian grids for one centred pose.");

    py::class_<RadianceField>(m, "RadianceField")
        .def_static(
            "random",
            [](const GridConfig &cfg, int nSigma, int nApp, int channels, uint64_t seed, int hidden) {
                return RadianceField::random(cfg, nSigma, nApp, channels, std::nullopt, seed, hidden);
            },
            py::arg("cfg"), py::arg("n_sigma"), py::arg("n_app"), py::arg("channels"), py::arg("seed") = 0,
            py::arg("hidden") = kDefaultHidden)
        .def_static(
            "load", [](const std::string &path) { return loadCheckpoint(path).field; }, py::arg("path"))
        .def(
            "save", [](const RadianceField &f, const std::string &path) { saveCheckpoint(f, path); },
            py::arg("path"))
        .def_property_readonly("grid_config", [](const RadianceField &f) { return f.grid.config(); })
        .def_property_readonly("parameter_count", &RadianceField::parameterCount)
        .def(
            "render",
            [](const RadianceField &f, const Eigen::Matrix4d &pose, int width, int height, int nCoarse, int nFine,
               bool floatDecoder) {
                Image img;
                {
                    py::gil_scoped_release release;
                    img = renderImage(f, CameraPose::fromMatrix(pose), width, height,
                                      samplerConfig(nCoarse, nFine, floatDecoder));
                }
                return toArray(img);
            },
            py::arg("pose"), py::arg("width"), py::arg("height"), py::arg("n_coarse") = 64, py::arg("n_fine") = 32,
            py::arg("float_decoder") = false, "Renders an H x W x 3 linear RGB image.");

    m.def(
        "synth_dataset",
        [](const std::string &dir, int views, int width, int height, int steps, uint64_t seed) {
            SynthOptions o;
            o.nViews = views;
            o.width = width;
            o.height = height;
            o.steps = steps;
            o.seed = seed;
            py::gil_scoped_release release;
            return makeSyntheticDataset(SyntheticScene::room(), o, dir).frames.size();
        },
        py::arg("dir"), py::arg("views") = 16, py::arg("width") = 200, py::arg("height") = 100,
        py::arg("steps") = 512, py::arg("seed") = 0, "Writes the synthetic room dataset; returns the view count.");

    m.def(
        "load_images",
        [](const std::string &manifest) {
            Dataset d = loadDataset(manifest);
            py::list out;
            for (const Frame &f : d.frames) {
                out.append(py::make_tuple(f.file, splitName(f.split), f.pose.matrix(), toArray(f.image)));
            }
            return out;
        },
        py::arg("manifest"), "List of (file, split, 4x4 pose, linear image) tuples.");

    m.def(
        "run_cli",
        [](const std::vector<std::string> &args) {
            py::gil_scoped_release release;
            return cli::run(args);
        },
        py::arg("args"), "Runs the yyrf command line tool in-process and returns its exit code.");

    m.def("set_thread_count", &setThreadCount, py::arg("threads"));
}
