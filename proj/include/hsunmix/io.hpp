#pragma once

#include "hsunmix/metrics.hpp"
#include "hsunmix/synthgen.hpp"
#include "hsunmix/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hsu {

using json = nlohmann::ordered_json;

/// Cube CSV: header line `# bands=L pixels=N width=W height=H`, then L rows
/// of N comma-separated decimals (17 significant digits on write). Parse
/// errors (malformed-header, ragged-rows, non-numeric-cell) carry the line
/// number; NaN/Inf cells are rejected.
HyperCube read_cube_csv(const std::filesystem::path& path);
void write_cube_csv(const HyperCube& cube, const std::filesystem::path& path);

/// Generic matrix CSV used for ground-truth bundles:
/// `# rows=R cols=C` header then R data rows.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

/// Library CSV: header `wavelength_um,<name1>,<name2>,...`; each subsequent
/// row is a wavelength followed by one reflectance per material.
SpectralLibrary read_library_csv(const std::filesystem::path& path);
void write_library_csv(const SpectralLibrary& lib, const std::filesystem::path& path);

/// Minimal ENVI import: BSQ/BIL/BIP interleaves, data types 4 (float32) and
/// 2 (int16), optional byte swap, header offset. excluded_bands lists
/// 1-based band numbers to drop (water-absorption / low-SNR bands). The cube
/// is pixel-ordered line-major (pixel = line * samples + sample).
HyperCube read_envi(const std::filesystem::path& hdr_path,
                    const std::filesystem::path& img_path,
                    const std::vector<int>& excluded_bands = {});

/// FNV-1a 64-bit content hash, hex-encoded; provenance for run reports.
std::string file_hash(const std::filesystem::path& path);

struct FileProvenance {
  std::string path;
  std::string fnv1a64;
};

/// Deterministic effort counters. Wall-clock time is deliberately excluded
/// so identical runs produce byte-identical reports.
struct RunTimings {
  int iterations = 0;
  int objective_evaluations = 0;
};

struct RunReport {
  int schema_version = 1;
  std::string algorithm;
  UnmixConfig config;
  double snr_db = 0.0;
  int run_index = 0;
  std::optional<EvalReport> eval;
  std::vector<double> cost_trace;
  RunTimings timings;
  std::string stop_reason;
  std::vector<FileProvenance> provenance;
};

json config_to_json(const UnmixConfig& cfg);
UnmixConfig config_from_json(const json& j);

json report_to_json(const RunReport& report);
RunReport report_from_json(const json& j);

/// Stable key order, trailing newline; numeric fields round-trip losslessly.
void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

}  // namespace hsu
