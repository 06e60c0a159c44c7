#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "ctfdct/attacks.hpp"
#include "ctfdct/beta.hpp"
#include "ctfdct/classifiers.hpp"
#include "ctfdct/dct.hpp"
#include "ctfdct/error.hpp"
#include "ctfdct/evaluation.hpp"
#include "ctfdct/gsf.hpp"
#include "ctfdct/image_io.hpp"
#include "ctfdct/synth.hpp"

namespace py = pybind11;
using namespace ctfdct;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Plane to_plane(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array (height, width)");
  Plane p(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), p.samples.begin());
  return p;
}

LuminanceImage to_image(const Array& a) { return LuminanceImage(to_plane(a)); }

Array from_plane(const Plane& p) {
  Array out({p.height, p.width});
  std::copy(p.samples.begin(), p.samples.end(), out.mutable_data());
  return out;
}

std::vector<BetaVector> to_rows(const Array& a, const std::string& prefix) {
  if (a.ndim() != 2 || a.shape(1) != kAcCoefficients) throw py::value_error("expected an (n, 63) array");
  std::vector<BetaVector> rows(a.shape(0));
  for (py::ssize_t r = 0; r < a.shape(0); ++r) {
    std::copy(a.data(r, 0), a.data(r, 0) + kAcCoefficients, rows[r].betas.begin());
    rows[r].source_id = prefix + std::to_string(r);
  }
  return rows;
}

Array from_row(const BetaRow& row) {
  Array out(kAcCoefficients);
  std::copy(row.begin(), row.end(), out.mutable_data());
  return out;
}

LabeledData to_labeled(const Array& x, const std::vector<std::string>& y) {
  if (x.ndim() != 2) throw py::value_error("expected a 2-D feature array");
  if (static_cast<std::size_t>(x.shape(0)) != y.size()) throw py::value_error("feature and label counts differ");
  LabeledData d;
  d.class_labels = y;
  std::sort(d.class_labels.begin(), d.class_labels.end());
  d.class_labels.erase(std::unique(d.class_labels.begin(), d.class_labels.end()), d.class_labels.end());
  for (py::ssize_t r = 0; r < x.shape(0); ++r) {
    d.features.emplace_back(x.data(r, 0), x.data(r, 0) + x.shape(1));
    d.labels.push_back(static_cast<int>(
        std::lower_bound(d.class_labels.begin(), d.class_labels.end(), y[r]) - d.class_labels.begin()));
  }
  return d;
}

struct PyModel {
  Model model;

  Array predict_proba(const Array& x) const {
    if (x.ndim() != 2) throw py::value_error("expected a 2-D feature array");
    const auto k = model_class_labels(model).size();
    Array out({static_cast<std::size_t>(x.shape(0)), k});
    for (py::ssize_t r = 0; r < x.shape(0); ++r) {
      const auto p = ctfdct::predict(model, std::span<const double>(x.data(r, 0), x.shape(1)));
      std::copy(p.probabilities.begin(), p.probabilities.end(), out.mutable_data(r, 0));
    }
    return out;
  }

  std::vector<std::string> predict(const Array& x) const {
    if (x.ndim() != 2) throw py::value_error("expected a 2-D feature array");
    const auto labels = model_class_labels(model);
    std::vector<std::string> out;
    for (py::ssize_t r = 0; r < x.shape(0); ++r) {
      out.push_back(labels[ctfdct::predict(model, std::span<const double>(x.data(r, 0), x.shape(1))).label]);
    }
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(_ctfdct, m) {
  m.doc() = "Block-DCT beta features, GSF analysis and attacks";

  static py::exception<ctfdct::Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ctfdct::Error& e) {
      // args = (code, message); the Python wrapper exposes .code
      py::object exc = error;
      PyErr_SetObject(exc.ptr(), py::make_tuple(std::string(to_string(e.code())), e.what()).ptr());
    }
  });

  m.def(
      "decode",
      [](const std::string& path, const std::string& channel) {
        return from_plane(decode(path, parse_channel_mode(channel)).plane());
      },
      py::arg("path"), py::arg("channel") = "bt601", "Decode PNG/JPEG to a float luminance array.");
  m.def(
      "write_png", [](const std::string& path, const Array& img) { write_png(path, to_image(img)); },
      py::arg("path"), py::arg("image"));

  m.def("zigzag_index", &zigzag_index, py::arg("u"), py::arg("v"));
  m.def("zigzag_position", [](int i) {
    const auto p = zigzag_position(i);
    return py::make_tuple(p.u, p.v);
  });
  m.def(
      "block_dct",
      [](const Array& img) {
        const auto blocks = ctfdct::block_dct(to_image(img));
        Array out({blocks.size(), static_cast<std::size_t>(kCoefficients)});
        for (std::size_t b = 0; b < blocks.size(); ++b)
          std::copy(blocks[b].coeffs.begin(), blocks[b].coeffs.end(), out.mutable_data(b, 0));
        return out;
      },
      py::arg("image"), "Zigzag-ordered DCT coefficients of every complete 8x8 block, shape (blocks, 64).");
  m.def(
      "image_betas", [](const Array& img) { return from_row(ctfdct::image_betas(to_image(img)).betas); },
      py::arg("image"), "63 AC spreads of an image.");

  m.def(
      "gsf",
      [](const Array& a, const Array& b, std::uint64_t seed, std::size_t k, const std::string& normalization) {
        GsfOptions options;
        options.seed = seed;
        options.max_rows = k;
        options.mode = parse_normalization_mode(normalization);
        const auto r = analyze_pair(build_matrix(to_rows(a, "a"), "a"), build_matrix(to_rows(b, "b"), "b"), options);
        py::dict out;
        out["gsf"] = r.forward.gsf;
        out["runner_up"] = r.forward.runner_up;
        out["margin"] = r.forward.margin;
        out["chi2"] = from_row(r.forward.chi2);
        out["chi2_reverse"] = from_row(r.reverse_chi2);
        out["rows"] = r.rows;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("seed") = 0, py::arg("k") = 0, py::arg("normalization") = "joint",
      "GAN-specific frequency of set a against set b (both (n, 63) beta arrays).");

  m.def(
      "amplify",
      [](const Array& img, int gsf_index, double k1, double k2, bool clamp) {
        const auto plane = ctfdct::amplify(to_image(img), gsf_index, {k1, k2});
        return from_plane(clamp ? render(plane).plane() : plane);
      },
      py::arg("image"), py::arg("gsf"), py::arg("k1") = 0.1, py::arg("k2") = 100.0, py::arg("clamp") = true);
  m.def(
      "fourier_magnitude", [](const Array& img) { return from_plane(ctfdct::fourier_magnitude(to_plane(img))); },
      py::arg("image"));
  m.def(
      "spectral_peak_ratio", [](const Array& img) { return ctfdct::spectral_peak_ratio(to_plane(img)); },
      py::arg("image"));

  m.def(
      "apply_attack",
      [](const Array& img, const std::string& spec, std::uint64_t seed) {
        return from_plane(ctfdct::apply_attack(to_image(img), AttackSpec::parse(spec, seed)).plane());
      },
      py::arg("image"), py::arg("spec"), py::arg("seed") = 0,
      "Apply one attack, e.g. 'jpeg:50', 'mirror:H', 'rotation:45', 'gaussian-blur:9', 'scale:-50'.");
  m.def("attack_grid", [] {
    std::vector<std::string> out;
    for (const auto& s : ctfdct::attack_grid()) out.push_back(s.to_string());
    return out;
  });

  m.def(
      "synth_image",
      [](std::size_t index, int target, double strength, std::uint64_t seed, int size, bool quantize) {
        TextureConfig tex;
        tex.size = size;
        tex.quantize = quantize;
        return from_plane(generate_image(index, {target, target == 0 ? 1.0 : strength, "pink", seed}, tex).plane());
      },
      py::arg("index"), py::arg("target") = 0, py::arg("strength") = 2.0, py::arg("seed") = 0, py::arg("size") = 128,
      py::arg("quantize") = false, "1/f texture with one zigzag coefficient scaled per block (target 0: clean).");

  py::class_<PyModel>(m, "Model")
      .def("predict_proba", &PyModel::predict_proba, py::arg("x"))
      .def("predict", &PyModel::predict, py::arg("x"))
      .def_property_readonly("classes", [](const PyModel& p) { return model_class_labels(p.model); })
      .def("to_json", [](const PyModel& p) { return model_to_json(p.model).dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return PyModel{model_from_json(nlohmann::json::parse(text))}; });

  m.def(
      "train_boosted",
      [](const Array& x, const std::vector<std::string>& y, int n_estimators, double learning_rate, int max_depth,
         double subsample, std::uint64_t seed) {
        BoostConfig cfg;
        cfg.n_estimators = n_estimators;
        cfg.learning_rate = learning_rate;
        cfg.max_depth = max_depth;
        cfg.subsample = subsample;
        cfg.seed = seed;
        return PyModel{ctfdct::train_boosted(to_labeled(x, y), cfg)};
      },
      py::arg("x"), py::arg("y"), py::arg("n_estimators") = 100, py::arg("learning_rate") = 0.6,
      py::arg("max_depth") = 2, py::arg("subsample") = 0.5, py::arg("seed") = 0,
      "Softmax gradient boosting on (n, 63) betas; classes are the sorted unique labels.");
  m.def(
      "train_logistic",
      [](const Array& x, const std::vector<std::string>& y, int feature_index) {
        return PyModel{ctfdct::train_logistic(to_labeled(x, y), feature_index)};
      },
      py::arg("x"), py::arg("y"), py::arg("feature_index"),
      "Single-feature logistic probe on column feature_index - 1; exactly two labels.");

  m.def(
      "evaluate",
      [](const std::vector<std::string>& truth, const std::vector<std::string>& predicted) {
        std::vector<std::string> labels = truth;
        labels.insert(labels.end(), predicted.begin(), predicted.end());
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        auto id = [&](const std::string& s) {
          return static_cast<int>(std::lower_bound(labels.begin(), labels.end(), s) - labels.begin());
        };
        std::vector<int> t, p;
        for (const auto& s : truth) t.push_back(id(s));
        for (const auto& s : predicted) p.push_back(id(s));
        return py::module_::import("json").attr("loads")(report_to_json(ctfdct::evaluate(t, p, labels)).dump());
      },
      py::arg("truth"), py::arg("predicted"), "Precision/recall/F1 (percent), accuracy and confusion matrix.");
}
