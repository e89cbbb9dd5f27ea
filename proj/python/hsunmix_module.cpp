// Python bindings for the core unmixing operations. Matrices cross the
// boundary as numpy arrays via Eigen; configs as keyword arguments.

#include "hsunmix/analysis.hpp"
#include "hsunmix/baselines.hpp"
#include "hsunmix/io.hpp"
#include "hsunmix/metrics.hpp"
#include "hsunmix/simplex.hpp"
#include "hsunmix/synthgen.hpp"
#include "hsunmix/unmixer.hpp"
#include "hsunmix/weights.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

namespace py = pybind11;

namespace {

hsu::UnmixConfig make_config(double p, double q1, double q2, double mu, double eta,
                             std::optional<double> lambda, int c, int max_iter,
                             double epsilon, const std::string& init,
                             const std::string& adjacency, std::uint64_t seed) {
  hsu::UnmixConfig cfg;
  cfg.p = p;
  cfg.q1 = q1;
  cfg.q2 = q2;
  cfg.mu = mu;
  cfg.eta = eta;
  cfg.fixed_lambda = lambda;
  cfg.c = c;
  cfg.max_iter = max_iter;
  cfg.epsilon = epsilon;
  if (init == "random") {
    cfg.init = hsu::InitMode::kRandom;
  } else if (init == "vca-fcls") {
    cfg.init = hsu::InitMode::kVcaFcls;
  } else {
    throw hsu::Error("invalid-config", "init must be 'random' or 'vca-fcls'");
  }
  if (adjacency == "4-connected") {
    cfg.adjacency = hsu::Adjacency::kFourConnected;
  } else if (adjacency == "8-connected") {
    cfg.adjacency = hsu::Adjacency::kEightConnected;
  } else {
    throw hsu::Error("invalid-config", "adjacency must be '4-connected' or '8-connected'");
  }
  cfg.seed = seed;
  return cfg;
}

py::dict eval_to_dict(const hsu::EvalReport& eval) {
  py::dict d;
  d["per_endmember_sad"] = eval.per_endmember_sad;
  d["per_pixel_aad"] = eval.per_pixel_aad;
  d["rms_sad"] = eval.rms_sad;
  d["rms_aad"] = eval.rms_aad;
  d["mean_sad"] = eval.mean_sad;
  d["mean_aad"] = eval.mean_aad;
  d["matching"] = eval.matching;
  return d;
}

py::dict result_to_dict(const hsu::UnmixResult& res) {
  py::dict d;
  d["A"] = res.A.data();
  d["S"] = res.S.data();
  d["iterations_run"] = res.iterations_run;
  d["cost_trace"] = res.cost_trace;
  d["stop_reason"] = hsu::to_string(res.stop_reason);
  return d;
}

constexpr const char* kConfigArgsDoc =
    "Config keywords: p, q1, q2, mu, eta, lambda (None = from data), c, "
    "max_iter, epsilon, init ('random'|'vca-fcls'), adjacency "
    "('4-connected'|'8-connected'), seed.";

}  // namespace

PYBIND11_MODULE(hsunmix, m) {
  m.doc() = "Sparsity-constrained distributed hyperspectral unmixing";
  m.attr("__version__") = VERSION_INFO;

  py::register_exception<hsu::Error>(m, "HsunmixError");

  m.def("project_simplex", &hsu::project_simplex, py::arg("v"),
        "Exact Euclidean projection onto the probability simplex.");

  m.def(
      "sparsity_lambda",
      [](const hsu::Matrix& Y) { return hsu::sparsity_lambda(hsu::HyperCube(Y)); },
      py::arg("Y"), "Data-driven sparsity weight of an L x N cube.");

  m.def(
      "spectral_similarity",
      [](const hsu::Vector& a, const hsu::Vector& b) {
        return hsu::spectral_similarity(a, b);
      },
      py::arg("yk"), py::arg("yj"), "Cosine similarity of two spectra.");

  m.def(
      "similarity_weights",
      [](const hsu::Matrix& Y, int width, int height, const std::string& adjacency) {
        const auto adj = adjacency == "8-connected" ? hsu::Adjacency::kEightConnected
                                                    : hsu::Adjacency::kFourConnected;
        const hsu::NeighborGraph g =
            hsu::similarity_weights(hsu::HyperCube(Y, width, height), adj);
        return py::make_tuple(g.neighbors, g.weights);
      },
      py::arg("Y"), py::arg("width"), py::arg("height"),
      py::arg("adjacency") = "4-connected",
      "Per-pixel neighbor index lists and normalized similarity weights.");

  m.def(
      "unmix",
      [](const hsu::Matrix& Y, int width, int height, double p, double q1, double q2,
         double mu, double eta, std::optional<double> lambda, int c, int max_iter,
         double epsilon, const std::string& init, const std::string& adjacency,
         std::uint64_t seed) {
        const auto cfg = make_config(p, q1, q2, mu, eta, lambda, c, max_iter, epsilon,
                                     init, adjacency, seed);
        return result_to_dict(hsu::unmix(hsu::HyperCube(Y, width, height), cfg));
      },
      py::arg("Y"), py::arg("width"), py::arg("height"), py::arg("p") = 2.0,
      py::arg("q1") = 2.0, py::arg("q2") = 1.0, py::arg("mu") = 0.02,
      py::arg("eta") = 0.1, py::arg("lambda") = py::none(), py::arg("c") = 1,
      py::arg("max_iter") = 200, py::arg("epsilon") = 1e-8,
      py::arg("init") = "vca-fcls", py::arg("adjacency") = "4-connected",
      py::arg("seed") = 0, kConfigArgsDoc);

  m.def(
      "distributed_unmix",
      [](const hsu::Matrix& Y, int width, int height, double p, double q1, double mu,
         double eta, int c, int max_iter, double epsilon, const std::string& init,
         const std::string& adjacency, std::uint64_t seed) {
        const auto cfg = make_config(p, q1, 1.0, mu, eta, std::nullopt, c, max_iter,
                                     epsilon, init, adjacency, seed);
        return result_to_dict(
            hsu::distributed_unmix(hsu::HyperCube(Y, width, height), cfg));
      },
      py::arg("Y"), py::arg("width"), py::arg("height"), py::arg("p") = 2.0,
      py::arg("q1") = 2.0, py::arg("mu") = 0.02, py::arg("eta") = 0.1,
      py::arg("c") = 1, py::arg("max_iter") = 200, py::arg("epsilon") = 1e-8,
      py::arg("init") = "vca-fcls", py::arg("adjacency") = "4-connected",
      py::arg("seed") = 0, "The neighbor-term-only baseline (sparsity weight 0).");

  m.def(
      "nmf",
      [](const hsu::Matrix& Y, int c, int max_iter, double eps, std::uint64_t seed) {
        const hsu::NmfResult res = hsu::nmf(hsu::HyperCube(Y), c, max_iter, eps, seed);
        py::dict d;
        d["A"] = res.A.data();
        d["S"] = res.S.data();
        d["residual_trace"] = res.residual_trace;
        d["iterations_run"] = res.iterations_run;
        return d;
      },
      py::arg("Y"), py::arg("c"), py::arg("max_iter") = 200, py::arg("eps") = 1e-8,
      py::arg("seed") = 0);

  m.def(
      "l_half_nmf",
      [](const hsu::Matrix& Y, int c, int max_iter, double eps, std::uint64_t seed,
         double lambda) {
        const hsu::NmfResult res =
            hsu::l_half_nmf(hsu::HyperCube(Y), c, max_iter, eps, seed, lambda);
        py::dict d;
        d["A"] = res.A.data();
        d["S"] = res.S.data();
        d["residual_trace"] = res.residual_trace;
        d["iterations_run"] = res.iterations_run;
        return d;
      },
      py::arg("Y"), py::arg("c"), py::arg("max_iter") = 200, py::arg("eps") = 1e-8,
      py::arg("seed") = 0, py::arg("lambda") = -1.0,
      "lambda < 0 computes the sparsity weight from the data.");

  m.def(
      "vca",
      [](const hsu::Matrix& Y, int c, std::uint64_t seed) {
        return hsu::vca(hsu::HyperCube(Y), c, seed).data();
      },
      py::arg("Y"), py::arg("c"), py::arg("seed") = 0);

  m.def(
      "fcls",
      [](const hsu::Matrix& Y, const hsu::Matrix& A) {
        return hsu::fcls(hsu::HyperCube(Y), hsu::SignatureMatrix(A)).data();
      },
      py::arg("Y"), py::arg("A"),
      "Per-pixel fully constrained least squares abundances.");

  m.def("sad", &hsu::sad, py::arg("a"), py::arg("a_hat"));
  m.def("aad", &hsu::aad, py::arg("s"), py::arg("s_hat"));

  m.def(
      "evaluate",
      [](const hsu::Matrix& A_true, const hsu::Matrix& S_true, const hsu::Matrix& A_est,
         const hsu::Matrix& S_est) {
        return eval_to_dict(hsu::evaluate(hsu::SignatureMatrix(A_true),
                                          hsu::AbundanceMatrix(S_true),
                                          hsu::SignatureMatrix(A_est),
                                          hsu::AbundanceMatrix(S_est)));
      },
      py::arg("A_true"), py::arg("S_true"), py::arg("A_est"), py::arg("S_est"),
      "SAD/AAD report after optimal endmember matching.");

  m.def(
      "make_scene",
      [](const std::filesystem::path& library, int c, int width, int height,
         int filter_size, std::optional<double> snr_db, std::uint64_t seed,
         bool forbid_pure_pixels) {
        const hsu::SpectralLibrary lib = hsu::read_library_csv(library);
        const hsu::SynthScene scene =
            hsu::make_scene(lib, c, width, height, filter_size,
                            snr_db ? *snr_db : hsu::kNoNoise, seed, forbid_pure_pixels);
        py::dict d;
        d["cube"] = scene.cube.data();
        d["true_A"] = scene.true_A.data();
        d["true_S"] = scene.true_S.data();
        d["width"] = scene.cube.width();
        d["height"] = scene.cube.height();
        d["materials"] = scene.material_indices;
        return d;
      },
      py::arg("library"), py::arg("c") = 6, py::arg("width") = 64,
      py::arg("height") = 64, py::arg("filter_size") = 3,
      py::arg("snr_db") = py::none(), py::arg("seed") = 0,
      py::arg("forbid_pure_pixels") = true,
      "Synthetic scene from a library CSV; snr_db=None adds no noise.");

  m.def(
      "step_size_bound",
      [](const hsu::Matrix& A, double eta, double lambda) {
        return hsu::step_size_bound(hsu::SignatureMatrix(A), hsu::NeighborGraph{},
                                    eta, lambda);
      },
      py::arg("A"), py::arg("eta") = 0.1, py::arg("lambda") = 0.0,
      "Mean-error convergence step-size bound 2/(eig_max + 2*eta - lambda).");

  m.def(
      "read_cube_csv",
      [](const std::filesystem::path& path) {
        const hsu::HyperCube cube = hsu::read_cube_csv(path);
        return py::make_tuple(cube.data(), cube.width(), cube.height());
      },
      py::arg("path"));

  m.def(
      "read_envi",
      [](const std::filesystem::path& hdr, const std::filesystem::path& img,
         const std::vector<int>& excluded_bands) {
        const hsu::HyperCube cube = hsu::read_envi(hdr, img, excluded_bands);
        return py::make_tuple(cube.data(), cube.width(), cube.height());
      },
      py::arg("hdr"), py::arg("img"), py::arg("excluded_bands") = std::vector<int>{});
}
