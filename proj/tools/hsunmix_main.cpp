// Batch CLI: generate synthetic scenes, run unmixing experiments, compute
// the step-size stability bound, and evaluate estimates against truth.
//
// Exit codes: 0 all requested work completed; 1 runtime failure inside an
// algorithm or writer; 2 bad usage, malformed spec, or missing input file.

#include "hsunmix/analysis.hpp"
#include "hsunmix/baselines.hpp"
#include "hsunmix/io.hpp"
#include "hsunmix/metrics.hpp"
#include "hsunmix/rng.hpp"
#include "hsunmix/synthgen.hpp"
#include "hsunmix/unmixer.hpp"
#include "hsunmix/weights.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using hsu::json;

namespace {

struct SceneSpec {
  std::string library = "data/usgs_subset.csv";
  int c = 6;
  int width = 64;
  int height = 64;
  int filter_size = 3;
  double snr_db = 25.0;
  bool forbid_pure_pixels = true;
};

struct InputSpec {
  std::string cube;      // cube CSV, or
  std::string envi_hdr;  // ENVI header + image pair
  std::string envi_img;
  std::vector<int> exclude_bands;  // 1-based, ENVI only
  std::string true_a;  // optional
  std::string true_s;  // optional
};

struct ExperimentSpec {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int runs = 1;
  int workers = 1;
  std::vector<std::string> algorithms = {"proposed"};
  std::optional<SceneSpec> scene;
  std::optional<InputSpec> input;
  hsu::UnmixConfig config;
  std::map<std::string, json> overrides;
  std::vector<double> snr_sweep;  // empty: single cell at scene.snr_db
  std::vector<double> probe_multipliers = {0.5, 10.0};
};

SceneSpec scene_from_json(const json& j) {
  SceneSpec s;
  if (j.contains("library")) s.library = j.at("library").get<std::string>();
  if (j.contains("c")) s.c = j.at("c").get<int>();
  if (j.contains("width")) s.width = j.at("width").get<int>();
  if (j.contains("height")) s.height = j.at("height").get<int>();
  if (j.contains("filter_size")) s.filter_size = j.at("filter_size").get<int>();
  if (j.contains("snr_db")) {
    s.snr_db = j.at("snr_db").is_null() ? hsu::kNoNoise : j.at("snr_db").get<double>();
  }
  if (j.contains("forbid_pure_pixels")) {
    s.forbid_pure_pixels = j.at("forbid_pure_pixels").get<bool>();
  }
  return s;
}

ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec spec;
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("runs")) spec.runs = j.at("runs").get<int>();
  if (j.contains("workers")) spec.workers = j.at("workers").get<int>();
  if (j.contains("algorithms")) {
    spec.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  }
  if (j.contains("scene")) spec.scene = scene_from_json(j.at("scene"));
  if (j.contains("input")) {
    const json& ji = j.at("input");
    InputSpec in;
    if (ji.contains("cube")) in.cube = ji.at("cube").get<std::string>();
    if (ji.contains("envi_hdr")) in.envi_hdr = ji.at("envi_hdr").get<std::string>();
    if (ji.contains("envi_img")) in.envi_img = ji.at("envi_img").get<std::string>();
    if (ji.contains("exclude_bands")) {
      in.exclude_bands = ji.at("exclude_bands").get<std::vector<int>>();
    }
    if (in.cube.empty() == (in.envi_hdr.empty() || in.envi_img.empty())) {
      throw hsu::Error("invalid-config",
                       "input needs either 'cube' or an 'envi_hdr'/'envi_img' pair");
    }
    if (ji.contains("true_a")) in.true_a = ji.at("true_a");
    if (ji.contains("true_s")) in.true_s = ji.at("true_s");
    spec.input = in;
  }
  if (j.contains("config")) spec.config = hsu::config_from_json(j.at("config"));
  if (j.contains("config_overrides")) {
    for (const auto& [name, body] : j.at("config_overrides").items()) {
      spec.overrides[name] = body;
    }
  }
  if (j.contains("snr_sweep")) {
    spec.snr_sweep = j.at("snr_sweep").get<std::vector<double>>();
  }
  if (j.contains("probe_multipliers")) {
    spec.probe_multipliers = j.at("probe_multipliers").get<std::vector<double>>();
  }
  if (spec.runs < 1) throw hsu::Error("invalid-config", "runs must be >= 1");
  if (spec.algorithms.empty()) {
    throw hsu::Error("invalid-config", "algorithm list must not be empty");
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hsu::Error("missing-file", "cannot open spec " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw hsu::Error("malformed-json", path + ": " + e.what());
  }
  return spec_from_json(j);
}

/// Per-algorithm effective config: base config + JSON override block.
hsu::UnmixConfig algo_config(const ExperimentSpec& spec, const std::string& algo) {
  hsu::UnmixConfig cfg = spec.config;
  const auto it = spec.overrides.find(algo);
  if (it == spec.overrides.end()) return cfg;
  json merged = hsu::config_to_json(cfg);
  for (const auto& [key, value] : it->second.items()) merged[key] = value;
  return hsu::config_from_json(merged);
}

std::string format_snr(double snr_db) {
  if (std::isinf(snr_db)) return "inf";
  std::ostringstream os;
  os << snr_db;
  return os.str();
}

struct AlgoOutput {
  hsu::SignatureMatrix A{hsu::Matrix::Ones(1, 1)};
  hsu::AbundanceMatrix S{hsu::Matrix::Ones(1, 1)};
  std::vector<double> trace;
  std::string stop_reason = "max-iter";
  int iterations = 1;
};

/// Dispatches one named algorithm on a cube. The seed drives both the
/// initialization and (for synthetic cells) matches the scene seed so every
/// method in a cell starts from the same VCA-FCLS or random point.
AlgoOutput run_algorithm(const std::string& algo, const hsu::HyperCube& cube,
                         hsu::UnmixConfig cfg) {
  AlgoOutput out;
  if (algo == "proposed" || algo == "distributed") {
    if (algo == "distributed") cfg.fixed_lambda = 0.0;
    hsu::UnmixResult res = hsu::unmix(cube, cfg);
    out.A = std::move(res.A);
    out.S = std::move(res.S);
    out.trace = std::move(res.cost_trace);
    out.stop_reason = hsu::to_string(res.stop_reason);
    out.iterations = res.iterations_run;
  } else if (algo == "nmf" || algo == "l12nmf") {
    const double lambda =
        algo == "nmf"
            ? 0.0
            : (cfg.fixed_lambda ? *cfg.fixed_lambda : hsu::sparsity_lambda(cube));
    hsu::NmfResult res = [&] {
      if (cfg.init == hsu::InitMode::kVcaFcls) {
        const hsu::SignatureMatrix A0 = hsu::vca(cube, cfg.c, cfg.seed);
        const hsu::AbundanceMatrix S0 = hsu::fcls(cube, A0);
        return hsu::nmf_from(cube, A0.data(), S0.data(), cfg.max_iter, cfg.epsilon,
                             lambda);
      }
      return hsu::l_half_nmf(cube, cfg.c, cfg.max_iter, cfg.epsilon, cfg.seed, lambda);
    }();
    out.A = std::move(res.A);
    out.S = std::move(res.S);
    out.trace = std::move(res.residual_trace);
    out.stop_reason = res.iterations_run < cfg.max_iter ? "cost-delta" : "max-iter";
    out.iterations = res.iterations_run;
  } else if (algo == "vca-fcls") {
    out.A = hsu::vca(cube, cfg.c, cfg.seed);
    out.S = hsu::fcls(cube, out.A);
    out.iterations = 1;
  } else {
    throw hsu::Error("invalid-config", "unknown algorithm '" + algo + "'");
  }
  return out;
}

struct CellResult {
  double snr_db = 0.0;
  std::string algorithm;
  int run = 0;
  double rms_sad = 0.0;
  double rms_aad = 0.0;
  double mean_aad = 0.0;
};

/// One (snr, run) Monte-Carlo cell: build the scene, run every requested
/// algorithm against the same data and the same derived seed, write one
/// report per algorithm.
std::vector<CellResult> run_cell(const ExperimentSpec& spec,
                                 const hsu::SpectralLibrary& library,
                                 double snr_db, int run_index,
                                 const fs::path& out_dir) {
  const std::uint64_t snr_key =
      std::isinf(snr_db) ? UINT64_MAX
                         : static_cast<std::uint64_t>(std::llround(snr_db * 1000.0));
  const std::uint64_t cell_seed =
      hsu::derive_seed(spec.seed, "cell", snr_key, static_cast<std::uint64_t>(run_index));

  const SceneSpec& sc = *spec.scene;
  const hsu::SynthScene scene =
      hsu::make_scene(library, sc.c, sc.width, sc.height, sc.filter_size, snr_db,
                      cell_seed, sc.forbid_pure_pixels);

  std::vector<CellResult> results;
  for (const auto& algo : spec.algorithms) {
    hsu::UnmixConfig cfg = algo_config(spec, algo);
    cfg.c = sc.c;
    cfg.seed = cell_seed;

    const AlgoOutput res = run_algorithm(algo, scene.cube, cfg);

    hsu::RunReport report;
    report.algorithm = algo;
    report.config = cfg;
    report.snr_db = snr_db;
    report.run_index = run_index;
    report.cost_trace = res.trace;
    report.stop_reason = res.stop_reason;
    report.timings.iterations = res.iterations;
    report.timings.objective_evaluations = static_cast<int>(res.trace.size());
    report.eval = hsu::evaluate(scene.true_A, scene.true_S, res.A, res.S);

    std::ostringstream name;
    name << algo << "_snr" << format_snr(snr_db) << "_run" << run_index << ".json";
    hsu::write_report(report, out_dir / name.str());

    results.push_back({snr_db, algo, run_index, report.eval->rms_sad,
                       report.eval->rms_aad, report.eval->mean_aad});
  }
  return results;
}

int cmd_generate(const ExperimentSpec& spec) {
  if (!spec.scene) {
    throw hsu::Error("invalid-config", "generate needs a scene block");
  }
  const SceneSpec& sc = *spec.scene;
  const hsu::SpectralLibrary library = hsu::read_library_csv(sc.library);
  const hsu::SynthScene scene =
      hsu::make_scene(library, sc.c, sc.width, sc.height, sc.filter_size, sc.snr_db,
                      spec.seed, sc.forbid_pure_pixels);

  const fs::path out(spec.out_dir);
  fs::create_directories(out);
  hsu::write_cube_csv(scene.cube, out / "cube.csv");
  hsu::write_matrix_csv(scene.true_A.data(), out / "truth_A.csv");
  hsu::write_matrix_csv(scene.true_S.data(), out / "truth_S.csv");

  json meta;
  meta["seed"] = spec.seed;
  meta["snr_db"] = std::isinf(sc.snr_db) ? json(nullptr) : json(sc.snr_db);
  meta["filter_size"] = sc.filter_size;
  meta["c"] = sc.c;
  meta["width"] = sc.width;
  meta["height"] = sc.height;
  json mats = json::array();
  for (int idx : scene.material_indices) mats.push_back(library.names[idx]);
  meta["materials"] = mats;
  meta["library"] = {{"path", sc.library}, {"fnv1a64", hsu::file_hash(sc.library)}};
  std::ofstream meta_out(out / "scene.json");
  meta_out << meta.dump(2) << "\n";

  std::cout << "wrote scene to " << out.string() << "\n";
  return 0;
}

int cmd_unmix(const ExperimentSpec& spec) {
  const fs::path out(spec.out_dir);
  fs::create_directories(out);

  // file-input mode: single cube, no Monte-Carlo sweep
  if (spec.input) {
    const hsu::HyperCube cube =
        spec.input->cube.empty()
            ? hsu::read_envi(spec.input->envi_hdr, spec.input->envi_img,
                             spec.input->exclude_bands)
            : hsu::read_cube_csv(spec.input->cube);
    std::optional<hsu::SignatureMatrix> true_A;
    std::optional<hsu::AbundanceMatrix> true_S;
    if (!spec.input->true_a.empty()) {
      true_A.emplace(hsu::read_matrix_csv(spec.input->true_a));
    }
    if (!spec.input->true_s.empty()) {
      true_S.emplace(hsu::read_matrix_csv(spec.input->true_s));
    }
    for (const auto& algo : spec.algorithms) {
      hsu::UnmixConfig cfg = algo_config(spec, algo);
      cfg.seed = spec.seed;

      const AlgoOutput res = run_algorithm(algo, cube, cfg);

      hsu::RunReport report;
      report.algorithm = algo;
      report.config = cfg;
      report.snr_db = hsu::kNoNoise;
      report.cost_trace = res.trace;
      report.stop_reason = res.stop_reason;
      report.timings.iterations = res.iterations;
      report.timings.objective_evaluations = static_cast<int>(res.trace.size());
      if (spec.input->cube.empty()) {
        report.provenance.push_back(
            {spec.input->envi_hdr, hsu::file_hash(spec.input->envi_hdr)});
        report.provenance.push_back(
            {spec.input->envi_img, hsu::file_hash(spec.input->envi_img)});
      } else {
        report.provenance.push_back(
            {spec.input->cube, hsu::file_hash(spec.input->cube)});
      }
      if (true_A && true_S) {
        report.eval = hsu::evaluate(*true_A, *true_S, res.A, res.S);
      }
      hsu::write_report(report, out / (algo + ".json"));
      hsu::write_matrix_csv(res.A.data(), out / (algo + "_A.csv"));
      hsu::write_matrix_csv(res.S.data(), out / (algo + "_S.csv"));
    }
    std::cout << "wrote reports to " << out.string() << "\n";
    return 0;
  }

  if (!spec.scene) {
    throw hsu::Error("invalid-config", "unmix needs a scene block or an input block");
  }
  const hsu::SpectralLibrary library = hsu::read_library_csv(spec.scene->library);

  std::vector<double> snrs = spec.snr_sweep;
  if (snrs.empty()) snrs.push_back(spec.scene->snr_db);

  struct Cell {
    double snr;
    int run;
  };
  std::vector<Cell> cells;
  for (double snr : snrs) {
    for (int r = 0; r < spec.runs; ++r) cells.push_back({snr, r});
  }

  std::vector<std::vector<CellResult>> collected(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  const int workers = std::max(1, spec.workers);
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      try {
        collected[i] = run_cell(spec, library, cells[i].snr, cells[i].run, out);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty()) {
    throw hsu::Error("run-failure", first_error);
  }

  // long-format per-run CSV, fixed (snr, algorithm, run) order
  std::ofstream runs_csv(out / "runs.csv");
  runs_csv << "snr,algorithm,run,rms_sad,rms_aad,mean_aad\n";
  char buf[96];
  for (const auto& cell : collected) {
    for (const auto& r : cell) {
      runs_csv << format_snr(r.snr_db) << ',' << r.algorithm << ',' << r.run;
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g", r.rms_sad, r.rms_aad,
                    r.mean_aad);
      runs_csv << buf << "\n";
    }
  }
  runs_csv.close();

  // per-(snr, algorithm) mean/std summary
  const auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
  };
  const auto stdev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
  };
  std::ofstream summary(out / "summary.csv");
  summary << "snr,algorithm,runs,mean_rms_sad,std_rms_sad,mean_rms_aad,std_rms_aad,"
             "mean_mean_aad\n";
  for (double snr : snrs) {
    for (const auto& algo : spec.algorithms) {
      std::vector<double> sads, aads, mean_aads;
      for (const auto& cell : collected) {
        for (const auto& r : cell) {
          if (r.snr_db == snr && r.algorithm == algo) {
            sads.push_back(r.rms_sad);
            aads.push_back(r.rms_aad);
            mean_aads.push_back(r.mean_aad);
          }
        }
      }
      summary << format_snr(snr) << ',' << algo << ',' << sads.size();
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g,%.17g,%.17g", mean(sads),
                    stdev(sads), mean(aads), stdev(aads), mean(mean_aads));
      summary << buf << "\n";
    }
  }
  std::cout << "wrote " << cells.size() << " cells to " << out.string() << "\n";
  return 0;
}

int cmd_bound(const ExperimentSpec& spec) {
  if (!spec.scene) {
    throw hsu::Error("invalid-config", "bound needs a scene block");
  }
  const SceneSpec& sc = *spec.scene;
  const hsu::SpectralLibrary library = hsu::read_library_csv(sc.library);
  const hsu::SynthScene scene =
      hsu::make_scene(library, sc.c, sc.width, sc.height, sc.filter_size, sc.snr_db,
                      spec.seed, sc.forbid_pure_pixels);

  hsu::UnmixConfig cfg = algo_config(spec, "proposed");
  cfg.c = sc.c;
  cfg.seed = spec.seed;

  const hsu::WeightSet weights = hsu::compute_weights(scene.cube, cfg);
  const double bound =
      hsu::step_size_bound(scene.true_A, weights.graph, cfg.eta, weights.lambda);

  std::vector<double> mus;
  for (double m : spec.probe_multipliers) mus.push_back(m * bound);
  const hsu::StabilityReport report = hsu::convergence_probe(scene, cfg, mus);

  json j;
  j["mu_bound"] = report.mu_bound;
  j["max_eigen"] = report.max_eigen;
  j["max_eigen_neighbor_sum"] = report.max_eigen_neighbor_sum;
  j["mu_bound_neighbor_sum"] = report.mu_bound_neighbor_sum;
  j["eta"] = report.eta;
  j["lambda"] = report.lambda;
  json probes = json::array();
  for (const auto& p : report.empirical) {
    probes.push_back({{"mu", p.mu},
                      {"converged", p.converged},
                      {"degenerate", p.degenerate},
                      {"initial_cost", p.initial_cost},
                      {"final_cost", std::isfinite(p.final_cost) ? json(p.final_cost)
                                                                 : json(nullptr)},
                      {"tail_movement", p.tail_movement}});
  }
  j["empirical"] = probes;

  const fs::path out(spec.out_dir);
  fs::create_directories(out);
  std::ofstream f(out / "stability.json");
  f << j.dump(2) << "\n";
  std::cout << "mu bound = " << report.mu_bound << " (max eigen " << report.max_eigen
            << ", lambda " << report.lambda << ")\n";
  return 0;
}

int cmd_evaluate(const std::string& true_a, const std::string& true_s,
                 const std::string& est_a, const std::string& est_s,
                 const std::string& out_path) {
  const hsu::SignatureMatrix A_true(hsu::read_matrix_csv(true_a));
  const hsu::AbundanceMatrix S_true(hsu::read_matrix_csv(true_s));
  const hsu::SignatureMatrix A_est(hsu::read_matrix_csv(est_a));
  const hsu::AbundanceMatrix S_est(hsu::read_matrix_csv(est_s));

  hsu::RunReport report;
  report.algorithm = "evaluate";
  report.snr_db = hsu::kNoNoise;
  report.stop_reason = "max-iter";
  report.eval = hsu::evaluate(A_true, S_true, A_est, S_est);
  for (const auto& p : {true_a, true_s, est_a, est_s}) {
    report.provenance.push_back({p, hsu::file_hash(p)});
  }
  hsu::write_report(report, out_path);
  std::cout << "rms_sad=" << report.eval->rms_sad
            << " rms_aad=" << report.eval->rms_aad << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hsunmix: sparsity-constrained distributed hyperspectral unmixing"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int workers_override = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "experiment spec JSON file")->required();
    cmd->add_option("--out", out_override, "output directory override");
    cmd->add_option("--seed", seed_override, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--workers", workers_override, "worker pool size override");
  };

  auto* generate = app.add_subcommand("generate", "write a synthetic scene + truth bundle");
  add_common(generate);

  auto* unmix_cmd = app.add_subcommand("unmix", "run the experiment spec");
  add_common(unmix_cmd);

  auto* bound = app.add_subcommand("bound", "step-size stability bound + probes");
  add_common(bound);

  auto* evaluate = app.add_subcommand("evaluate", "score estimate files against truth files");
  std::string true_a, true_s, est_a, est_s, eval_out = "evaluation.json";
  evaluate->add_option("--true-a", true_a, "true signature CSV")->required();
  evaluate->add_option("--true-s", true_s, "true abundance CSV")->required();
  evaluate->add_option("--est-a", est_a, "estimated signature CSV")->required();
  evaluate->add_option("--est-s", est_s, "estimated abundance CSV")->required();
  evaluate->add_option("--out", eval_out, "output report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (evaluate->parsed()) {
      return cmd_evaluate(true_a, true_s, est_a, est_s, eval_out);
    }
    ExperimentSpec spec = load_spec(spec_path);
    if (!out_override.empty()) spec.out_dir = out_override;
    if (seed_set) spec.seed = seed_override;
    if (workers_override > 0) spec.workers = workers_override;

    if (generate->parsed()) return cmd_generate(spec);
    if (unmix_cmd->parsed()) return cmd_unmix(spec);
    if (bound->parsed()) return cmd_bound(spec);
  } catch (const hsu::Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    const bool usage = e.code() == "missing-file" || e.code() == "invalid-config" ||
                       e.code() == "malformed-json" || e.code() == "malformed-header";
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
