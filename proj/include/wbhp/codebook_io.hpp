#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "wbhp/codebook.hpp"

namespace wbhp {

/// Codebook files are JSON objects
///   {"version": 1, "kind": "rf-matrix" | "rf-vector" | "baseband",
///    "n": .., "r": .., "phase_bits": .., "codewords": [...]}
/// RF kinds store each codeword as an n x r array of integer phase indices,
/// so files are bit-exact across platforms; rf-matrix files may add the
/// unconstrained "twins" as [re, im] pairs. Baseband codewords are n x r
/// arrays of [re, im] pairs.
inline constexpr int kCodebookFormatVersion = 1;

std::string codebook_kind_name(RfKind kind);

void write_rf_codebook(std::ostream& out, const RfCodebook& cb);
void write_baseband_codebook(std::ostream& out, const BasebandCodebook& cb);

RfCodebook read_rf_codebook(std::istream& in);
BasebandCodebook read_baseband_codebook(std::istream& in);

void save_rf_codebook(const std::filesystem::path& path, const RfCodebook& cb);
void save_baseband_codebook(const std::filesystem::path& path, const BasebandCodebook& cb);
RfCodebook load_rf_codebook(const std::filesystem::path& path);
BasebandCodebook load_baseband_codebook(const std::filesystem::path& path);

// CSV "iteration,unconstrained_distortion,rf_distortion".
void write_trace_csv(std::ostream& out, const DistortionTrace& trace);

}  // namespace wbhp
