#include "hsunmix/io.hpp"

#include "hsunmix/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hsu {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view cell, const std::filesystem::path& path,
                    int line_no) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' ||
                           *(last - 1) == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw Error("non-numeric-cell", path.string() + ":" + std::to_string(line_no) +
                                        ": cannot parse '" + std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error("non-finite-cell", path.string() + ":" + std::to_string(line_no) +
                                       ": NaN/Inf cell '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
    out.back().pop_back();
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("missing-file", "cannot open " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("unwritable-path", "cannot write " + path.string());
  }
  return out;
}

/// Parses `key=value` tokens from a `# ...` header line.
long header_field(const std::string& header, const std::string& key,
                  const std::filesystem::path& path) {
  const std::string needle = key + "=";
  const std::size_t pos = header.find(needle);
  if (pos == std::string::npos) {
    throw Error("malformed-header",
                path.string() + ":1: header is missing '" + key + "='");
  }
  long value = 0;
  const char* first = header.data() + pos + needle.size();
  const char* last = header.data() + header.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first) {
    throw Error("malformed-header",
                path.string() + ":1: cannot parse value of '" + key + "'");
  }
  return value;
}

Matrix read_rows(std::ifstream& in, long rows, long cols,
                 const std::filesystem::path& path, int first_line) {
  Matrix m(rows, cols);
  std::string line;
  for (long r = 0; r < rows; ++r) {
    const int line_no = first_line + static_cast<int>(r);
    if (!std::getline(in, line)) {
      throw Error("ragged-rows", path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(rows) +
                                     " data rows, file ended early");
    }
    const auto cells = split(line, ',');
    if (static_cast<long>(cells.size()) != cols) {
      throw Error("ragged-rows", path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(cols) +
                                     " cells, got " + std::to_string(cells.size()));
    }
    for (long c = 0; c < cols; ++c) {
      m(r, c) = parse_double(cells[c], path, line_no);
    }
  }
  return m;
}

}  // namespace

HyperCube read_cube_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string header;
  if (!std::getline(in, header) || header.empty() || header[0] != '#') {
    throw Error("malformed-header", path.string() + ":1: expected '# bands=... pixels=...'");
  }
  const long bands = header_field(header, "bands", path);
  const long pixels = header_field(header, "pixels", path);
  const long width = header_field(header, "width", path);
  const long height = header_field(header, "height", path);
  if (bands < 1 || pixels < 1 || width < 1 || height < 1 || width * height != pixels) {
    throw Error("malformed-header",
                path.string() + ":1: width*height must equal pixels");
  }
  Matrix data = read_rows(in, bands, pixels, path, 2);
  return HyperCube(std::move(data), static_cast<int>(width), static_cast<int>(height));
}

void write_cube_csv(const HyperCube& cube, const std::filesystem::path& path) {
  if (!cube.has_geometry()) {
    throw Error("invalid-config", "cube CSV requires grid geometry");
  }
  std::ofstream out = open_output(path);
  out << "# bands=" << cube.bands() << " pixels=" << cube.pixels()
      << " width=" << cube.width() << " height=" << cube.height() << "\n";
  for (int r = 0; r < cube.bands(); ++r) {
    for (int c = 0; c < cube.pixels(); ++c) {
      if (c) out << ',';
      out << format_double(cube.data()(r, c));
    }
    out << "\n";
  }
  if (!out) throw Error("unwritable-path", "write failed for " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string header;
  if (!std::getline(in, header) || header.empty() || header[0] != '#') {
    throw Error("malformed-header", path.string() + ":1: expected '# rows=... cols=...'");
  }
  const long rows = header_field(header, "rows", path);
  const long cols = header_field(header, "cols", path);
  if (rows < 1 || cols < 1) {
    throw Error("malformed-header", path.string() + ":1: rows/cols must be positive");
  }
  return read_rows(in, rows, cols, path, 2);
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "# rows=" << m.rows() << " cols=" << m.cols() << "\n";
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << "\n";
  }
  if (!out) throw Error("unwritable-path", "write failed for " + path.string());
}

SpectralLibrary read_library_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string header;
  if (!std::getline(in, header)) {
    throw Error("malformed-header", path.string() + ":1: empty file");
  }
  const auto names = split(header, ',');
  if (names.size() < 2 || names[0].rfind("wavelength", 0) != 0) {
    throw Error("malformed-header",
                path.string() + ":1: expected 'wavelength_um,<name>,...' header");
  }

  SpectralLibrary lib;
  lib.names.assign(names.begin() + 1, names.end());
  const long m = static_cast<long>(lib.names.size());

  std::vector<double> wavelengths;
  std::vector<double> values;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    if (static_cast<long>(cells.size()) != m + 1) {
      throw Error("ragged-rows", path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(m + 1) + " cells");
    }
    wavelengths.push_back(parse_double(cells[0], path, line_no));
    for (long j = 1; j <= m; ++j) {
      const double v = parse_double(cells[j], path, line_no);
      if (v < 0.0) {
        throw Error("invariant-violation",
                    path.string() + ":" + std::to_string(line_no) +
                        ": negative reflectance");
      }
      values.push_back(v);
    }
  }
  const long bands = static_cast<long>(wavelengths.size());
  if (bands < 1) {
    throw Error("malformed-header", path.string() + ": no data rows");
  }
  lib.wavelengths = std::move(wavelengths);
  lib.spectra.resize(bands, m);
  for (long r = 0; r < bands; ++r) {
    for (long j = 0; j < m; ++j) lib.spectra(r, j) = values[r * m + j];
  }
  return lib;
}

void write_library_csv(const SpectralLibrary& lib, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "wavelength_um";
  for (const auto& name : lib.names) out << ',' << name;
  out << "\n";
  for (int r = 0; r < lib.bands(); ++r) {
    out << format_double(lib.wavelengths[r]);
    for (int j = 0; j < lib.materials(); ++j) {
      out << ',' << format_double(lib.spectra(r, j));
    }
    out << "\n";
  }
  if (!out) throw Error("unwritable-path", "write failed for " + path.string());
}

namespace {

struct EnviHeader {
  long samples = 0;
  long lines = 0;
  long bands = 0;
  int data_type = 0;
  int byte_order = 0;
  long header_offset = 0;
  std::string interleave;
  std::vector<double> wavelengths;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

EnviHeader parse_envi_header(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  EnviHeader hdr;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    // brace-wrapped values may span lines
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) {
        value += " " + trim(line);
      }
    }
    if (key == "samples") {
      hdr.samples = std::stol(value);
    } else if (key == "lines") {
      hdr.lines = std::stol(value);
    } else if (key == "bands") {
      hdr.bands = std::stol(value);
    } else if (key == "data type") {
      hdr.data_type = std::stoi(value);
    } else if (key == "byte order") {
      hdr.byte_order = std::stoi(value);
    } else if (key == "header offset") {
      hdr.header_offset = std::stol(value);
    } else if (key == "interleave") {
      hdr.interleave = lower(value);
    } else if (key == "wavelength") {
      std::string inner = value;
      inner.erase(std::remove(inner.begin(), inner.end(), '{'), inner.end());
      inner.erase(std::remove(inner.begin(), inner.end(), '}'), inner.end());
      for (const auto& cell : split(inner, ',')) {
        const std::string t = trim(cell);
        if (!t.empty()) hdr.wavelengths.push_back(std::stod(t));
      }
    }
  }
  if (hdr.samples < 1 || hdr.lines < 1 || hdr.bands < 1 || hdr.interleave.empty() ||
      hdr.data_type == 0) {
    throw Error("malformed-header",
                path.string() + ": needs samples/lines/bands/interleave/data type");
  }
  return hdr;
}

}  // namespace

HyperCube read_envi(const std::filesystem::path& hdr_path,
                    const std::filesystem::path& img_path,
                    const std::vector<int>& excluded_bands) {
  const EnviHeader hdr = parse_envi_header(hdr_path);
  std::size_t elem_size = 0;
  if (hdr.data_type == 4) {
    elem_size = 4;
  } else if (hdr.data_type == 2) {
    elem_size = 2;
  } else {
    throw Error("unsupported-datatype",
                "ENVI data type " + std::to_string(hdr.data_type) +
                    " not supported (use 4-byte float or 2-byte int)");
  }

  std::ifstream in(img_path, std::ios::binary);
  if (!in) throw Error("missing-file", "cannot open " + img_path.string());
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::size_t>(in.tellg());
  const std::size_t count = static_cast<std::size_t>(hdr.samples) * hdr.lines * hdr.bands;
  const std::size_t expected = static_cast<std::size_t>(hdr.header_offset) + count * elem_size;
  if (file_size != expected) {
    throw Error("size-mismatch",
                img_path.string() + ": header implies " + std::to_string(expected) +
                    " bytes, file has " + std::to_string(file_size));
  }
  in.seekg(hdr.header_offset, std::ios::beg);
  std::vector<unsigned char> raw(count * elem_size);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw Error("size-mismatch", img_path.string() + ": short read");

  if (hdr.byte_order == 1) {
    for (std::size_t i = 0; i < raw.size(); i += elem_size) {
      std::reverse(raw.begin() + i, raw.begin() + i + elem_size);
    }
  }

  auto element = [&](std::size_t idx) -> double {
    if (elem_size == 4) {
      float f;
      std::memcpy(&f, raw.data() + idx * 4, 4);
      return static_cast<double>(f);
    }
    std::int16_t v;
    std::memcpy(&v, raw.data() + idx * 2, 2);
    return static_cast<double>(v);
  };

  const long n = hdr.samples * hdr.lines;
  auto flat_index = [&](long band, long line, long sample) -> std::size_t {
    if (hdr.interleave == "bsq") {
      return static_cast<std::size_t>((band * hdr.lines + line) * hdr.samples + sample);
    }
    if (hdr.interleave == "bil") {
      return static_cast<std::size_t>((line * hdr.bands + band) * hdr.samples + sample);
    }
    if (hdr.interleave == "bip") {
      return static_cast<std::size_t>((line * hdr.samples + sample) * hdr.bands + band);
    }
    throw Error("malformed-header", "unknown interleave '" + hdr.interleave + "'");
  };

  std::vector<bool> keep(hdr.bands, true);
  for (int b : excluded_bands) {
    if (b < 1 || b > hdr.bands) {
      throw Error("invalid-config",
                  "excluded band " + std::to_string(b) + " outside 1.." +
                      std::to_string(hdr.bands));
    }
    keep[b - 1] = false;
  }
  long kept = 0;
  for (long b = 0; b < hdr.bands; ++b) kept += keep[b] ? 1 : 0;
  if (kept < 1) throw Error("invalid-config", "band exclusion removed every band");

  Matrix data(kept, n);
  std::vector<double> wavelengths;
  long row = 0;
  for (long b = 0; b < hdr.bands; ++b) {
    if (!keep[b]) continue;
    for (long line = 0; line < hdr.lines; ++line) {
      for (long sample = 0; sample < hdr.samples; ++sample) {
        data(row, line * hdr.samples + sample) = element(flat_index(b, line, sample));
      }
    }
    if (static_cast<long>(hdr.wavelengths.size()) == hdr.bands) {
      wavelengths.push_back(hdr.wavelengths[b]);
    }
    ++row;
  }
  return HyperCube(std::move(data), static_cast<int>(hdr.samples),
                   static_cast<int>(hdr.lines), std::move(wavelengths));
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing-file", "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a_bytes(h, buf, static_cast<std::size_t>(in.gcount()));
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

json config_to_json(const UnmixConfig& cfg) {
  json j;
  j["p"] = cfg.p;
  j["q1"] = cfg.q1;
  j["q2"] = cfg.q2;
  j["mu"] = cfg.mu;
  j["eta"] = cfg.eta;
  j["lambda"] = cfg.fixed_lambda ? json(*cfg.fixed_lambda) : json(nullptr);
  j["c"] = cfg.c;
  j["max_iter"] = cfg.max_iter;
  j["epsilon"] = cfg.epsilon;
  j["init"] = cfg.init == InitMode::kRandom ? "random" : "vca-fcls";
  j["adjacency"] =
      cfg.adjacency == Adjacency::kFourConnected ? "4-connected" : "8-connected";
  j["seed"] = cfg.seed;
  return j;
}

UnmixConfig config_from_json(const json& j) {
  UnmixConfig cfg;
  if (j.contains("p")) cfg.p = j.at("p").get<double>();
  if (j.contains("q1")) cfg.q1 = j.at("q1").get<double>();
  if (j.contains("q2")) cfg.q2 = j.at("q2").get<double>();
  if (j.contains("mu")) cfg.mu = j.at("mu").get<double>();
  if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
  if (j.contains("lambda") && !j.at("lambda").is_null()) {
    cfg.fixed_lambda = j.at("lambda").get<double>();
  }
  if (j.contains("c")) cfg.c = j.at("c").get<int>();
  if (j.contains("max_iter")) cfg.max_iter = j.at("max_iter").get<int>();
  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("init")) {
    const auto mode = j.at("init").get<std::string>();
    if (mode == "random") {
      cfg.init = InitMode::kRandom;
    } else if (mode == "vca-fcls") {
      cfg.init = InitMode::kVcaFcls;
    } else {
      throw Error("invalid-config", "unknown init mode '" + mode + "'");
    }
  }
  if (j.contains("adjacency")) {
    const auto adj = j.at("adjacency").get<std::string>();
    if (adj == "4-connected") {
      cfg.adjacency = Adjacency::kFourConnected;
    } else if (adj == "8-connected") {
      cfg.adjacency = Adjacency::kEightConnected;
    } else {
      throw Error("invalid-config", "unknown adjacency '" + adj + "'");
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

namespace {

json eval_to_json(const EvalReport& eval) {
  json j;
  j["per_endmember_sad"] = eval.per_endmember_sad;
  j["per_pixel_aad"] = eval.per_pixel_aad;
  j["rms_sad"] = eval.rms_sad;
  j["rms_aad"] = eval.rms_aad;
  j["mean_sad"] = eval.mean_sad;
  j["mean_aad"] = eval.mean_aad;
  j["matching"] = eval.matching;
  return j;
}

EvalReport eval_from_json(const json& j) {
  EvalReport eval;
  eval.per_endmember_sad = j.at("per_endmember_sad").get<std::vector<double>>();
  eval.per_pixel_aad = j.at("per_pixel_aad").get<std::vector<double>>();
  eval.rms_sad = j.at("rms_sad").get<double>();
  eval.rms_aad = j.at("rms_aad").get<double>();
  eval.mean_sad = j.at("mean_sad").get<double>();
  eval.mean_aad = j.at("mean_aad").get<double>();
  eval.matching = j.at("matching").get<std::vector<int>>();
  return eval;
}

}  // namespace

json report_to_json(const RunReport& report) {
  json j;
  j["schema_version"] = report.schema_version;
  j["algorithm"] = report.algorithm;
  j["config"] = config_to_json(report.config);
  j["snr_db"] = std::isinf(report.snr_db) ? json(nullptr) : json(report.snr_db);
  j["run_index"] = report.run_index;
  j["eval"] = report.eval ? eval_to_json(*report.eval) : json(nullptr);
  j["cost_trace"] = report.cost_trace;
  j["timings"] = {{"iterations", report.timings.iterations},
                  {"objective_evaluations", report.timings.objective_evaluations}};
  j["stop_reason"] = report.stop_reason;
  json prov = json::array();
  for (const auto& p : report.provenance) {
    prov.push_back({{"path", p.path}, {"fnv1a64", p.fnv1a64}});
  }
  j["provenance"] = prov;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport report;
  report.schema_version = j.at("schema_version").get<int>();
  report.algorithm = j.at("algorithm").get<std::string>();
  report.config = config_from_json(j.at("config"));
  report.snr_db = j.at("snr_db").is_null() ? std::numeric_limits<double>::infinity()
                                           : j.at("snr_db").get<double>();
  report.run_index = j.at("run_index").get<int>();
  if (!j.at("eval").is_null()) report.eval = eval_from_json(j.at("eval"));
  report.cost_trace = j.at("cost_trace").get<std::vector<double>>();
  report.timings.iterations = j.at("timings").at("iterations").get<int>();
  report.timings.objective_evaluations =
      j.at("timings").at("objective_evaluations").get<int>();
  report.stop_reason = j.at("stop_reason").get<std::string>();
  for (const auto& p : j.at("provenance")) {
    report.provenance.push_back(
        {p.at("path").get<std::string>(), p.at("fnv1a64").get<std::string>()});
  }
  return report;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << report_to_json(report).dump(2) << "\n";
  if (!out) throw Error("unwritable-path", "write failed for " + path.string());
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed-json", path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace hsu
