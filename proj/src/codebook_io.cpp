#include "wbhp/codebook_io.hpp"

#include <fstream>
#include <json.hpp>
#include <ostream>

#include "wbhp/errors.hpp"
#include "wbhp/experiment.hpp"

namespace wbhp {

using nlohmann::json;

namespace {

json complex_matrix_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat complex_matrix_from_json(const json& j, int n, int r) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw FormatError("codebook: codeword row count mismatch");
  CMat m(n, r);
  for (int i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != r) throw FormatError("codebook: codeword column count mismatch");
    for (int c = 0; c < r; ++c) {
      const auto& z = row[c];
      if (!z.is_array() || z.size() != 2) throw FormatError("codebook: complex entries must be [re, im]");
      m(i, c) = cd(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

json index_matrix_json(const Eigen::MatrixXi& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXi index_matrix_from_json(const json& j, int n, int r, int levels) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw FormatError("codebook: codeword row count mismatch");
  Eigen::MatrixXi m(n, r);
  for (int i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != r) throw FormatError("codebook: codeword column count mismatch");
    for (int c = 0; c < r; ++c) {
      const int v = row[c].get<int>();
      if (v < 0 || v >= levels) throw FormatError("codebook: phase index outside the grid");
      m(i, c) = v;
    }
  }
  return m;
}

json parse_checked(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("codebook: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("codebook: top level must be an object");
  if (!j.contains("version") || j["version"] != kCodebookFormatVersion)
    throw FormatError("codebook: unsupported or missing version");
  return j;
}

}  // namespace

std::string codebook_kind_name(RfKind kind) { return kind == RfKind::Matrix ? "rf-matrix" : "rf-vector"; }

void write_rf_codebook(std::ostream& out, const RfCodebook& cb) {
  if (cb.phase_index.size() != cb.codewords.size()) throw InvalidArgument("write_rf_codebook: missing phase indices");
  json j;
  j["version"] = kCodebookFormatVersion;
  j["kind"] = codebook_kind_name(cb.kind);
  j["n"] = cb.n;
  j["r"] = cb.r;
  j["phase_bits"] = cb.phase_bits;
  json cws = json::array();
  for (const auto& m : cb.phase_index) cws.push_back(index_matrix_json(m));
  j["codewords"] = std::move(cws);
  if (cb.kind == RfKind::Matrix && !cb.twins.empty()) {
    json tw = json::array();
    for (const auto& t : cb.twins) tw.push_back(complex_matrix_json(t));
    j["twins"] = std::move(tw);
  }
  out << j.dump() << '\n';
}

void write_baseband_codebook(std::ostream& out, const BasebandCodebook& cb) {
  json j;
  j["version"] = kCodebookFormatVersion;
  j["kind"] = "baseband";
  j["n"] = cb.n;
  j["r"] = cb.r;
  j["phase_bits"] = 0;
  json cws = json::array();
  for (const auto& m : cb.codewords) cws.push_back(complex_matrix_json(m));
  j["codewords"] = std::move(cws);
  out << j.dump() << '\n';
}

RfCodebook read_rf_codebook(std::istream& in) {
  const json j = parse_checked(in);
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "rf-matrix" && kind != "rf-vector") throw FormatError("codebook: expected an RF kind, got '" + kind + "'");
    const int n = j.at("n").get<int>();
    const int r = j.at("r").get<int>();
    const int bits = j.at("phase_bits").get<int>();
    if (n < 1 || r < 1 || bits < 1 || bits > 30) throw FormatError("codebook: invalid header");
    if (kind == "rf-vector" && r != 1) throw FormatError("codebook: rf-vector requires r = 1");
    const auto& cws = j.at("codewords");
    if (!cws.is_array() || cws.empty()) throw FormatError("codebook: no codewords");
    std::vector<Eigen::MatrixXi> idx;
    for (const auto& c : cws) idx.push_back(index_matrix_from_json(c, n, r, 1 << bits));
    RfCodebook cb = RfCodebook::from_phase_indices(kind == "rf-matrix" ? RfKind::Matrix : RfKind::Vector, bits,
                                                   std::move(idx));
    if (j.contains("twins")) {
      for (const auto& t : j["twins"]) cb.twins.push_back(complex_matrix_from_json(t, n, r));
      if (cb.twins.size() != cb.codewords.size()) throw FormatError("codebook: twin count mismatch");
    }
    return cb;
  } catch (const json::exception& e) {
    throw FormatError(std::string("codebook: ") + e.what());
  }
}

BasebandCodebook read_baseband_codebook(std::istream& in) {
  const json j = parse_checked(in);
  try {
    if (j.at("kind").get<std::string>() != "baseband") throw FormatError("codebook: expected kind 'baseband'");
    BasebandCodebook cb;
    cb.n = j.at("n").get<int>();
    cb.r = j.at("r").get<int>();
    if (cb.n < 1 || cb.r < 1 || cb.r > cb.n) throw FormatError("codebook: invalid header");
    const auto& cws = j.at("codewords");
    if (!cws.is_array() || cws.empty()) throw FormatError("codebook: no codewords");
    for (const auto& c : cws) cb.codewords.push_back(complex_matrix_from_json(c, cb.n, cb.r));
    return cb;
  } catch (const json::exception& e) {
    throw FormatError(std::string("codebook: ") + e.what());
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

template <class F>
auto with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

void save_rf_codebook(const std::filesystem::path& path, const RfCodebook& cb) {
  auto out = open_out(path);
  write_rf_codebook(out, cb);
}

void save_baseband_codebook(const std::filesystem::path& path, const BasebandCodebook& cb) {
  auto out = open_out(path);
  write_baseband_codebook(out, cb);
}

RfCodebook load_rf_codebook(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_in(path);
    return read_rf_codebook(in);
  });
}

BasebandCodebook load_baseband_codebook(const std::filesystem::path& path) {
  return with_path(path, [&] {
    auto in = open_in(path);
    return read_baseband_codebook(in);
  });
}

void write_trace_csv(std::ostream& out, const DistortionTrace& trace) {
  out << "iteration,unconstrained_distortion,rf_distortion\n";
  for (std::size_t i = 0; i < trace.per_iteration.size(); ++i) {
    const auto& s = trace.per_iteration[i];
    out << i << ',' << format_double(s.unconstrained) << ',' << format_double(s.rf) << '\n';
  }
}

}  // namespace wbhp
