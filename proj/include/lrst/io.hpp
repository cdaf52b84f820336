#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lrst/solver.hpp"
#include "lrst/synth.hpp"
#include "lrst/tensor.hpp"

namespace lrst {

/// "LRST" binary tensor format: magic LRST, u8 version = 1, u8 order m,
/// m little-endian u64 dims, then d* little-endian f64 values row-major with
/// the last index fastest.
void write_lrst(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_lrst(const std::filesystem::path& path);

/// Sparse CSV: one line `i1,...,im,value` per entry, 1-based indices.
void write_sparse_csv(const std::filesystem::path& path, const SparseTensor& s);
SparseTensor read_sparse_csv(const std::filesystem::path& path, const Shape& shape);

/// Trace CSV with the header iter,loss,rel_change,zeta,supp_size and, when
/// ground truth was supplied, the extra rel_err_T,err_S columns.
void write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace);

/// Deterministic shortest round-trip formatting used by every CSV writer.
std::string format_double(double v);

/// Writes through a temp file in the same directory plus an atomic rename.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

/// FNV-1a over the canonical spec text; stamped into outputs so runs can be
/// traced back to their configuration.
std::string content_digest(const std::string& text);

/// Instance directory layout: observation.lrst, truth_T.lrst, truth_S.csv,
/// meta.json.
void save_instance(const std::filesystem::path& dir, const Instance& inst,
                   const std::string& spec_digest);
Instance load_instance(const std::filesystem::path& dir);

}  // namespace lrst
