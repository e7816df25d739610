#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ifeast/feast.hpp"
#include "ifeast/operator.hpp"

namespace ifeast {

// ---- Matrix Market -------------------------------------------------------

/// Coordinate files with real, integer or complex entries and general,
/// symmetric or hermitian storage. Symmetric storage is mirrored, duplicates
/// are summed and general files must be Hermitian to 1e-12 (relative).
/// Failures throw Error("io-cli") with the offending line or entry.
HermitianOperator read_matrix_market(const std::filesystem::path& path);
HermitianOperator read_matrix_market(std::istream& in, const std::string& source = "<stream>");

/// Lower triangle with symmetric (real) or hermitian (complex) storage.
void write_matrix_market(std::ostream& out, const HermitianOperator& op);
void write_matrix_market(const std::filesystem::path& path, const HermitianOperator& op);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

// ---- Runs ----------------------------------------------------------------

inline constexpr std::string_view manifest_schema = "ifeast.run/1";

struct RunManifest {
  std::string schema{manifest_schema};
  std::string matrix;
  double emin = 0.0;
  double emax = 0.0;
  IFEASTConfig config;
  std::string rule = "trapezoid";
  std::string out_dir = ".";
  std::string result_file = "result.json";
  std::string trace_file = "trace.csv";
  bool write_vectors = false;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string serialize_manifest(const RunManifest& m);
/// Missing keys keep their defaults; a different schema tag is rejected.
RunManifest parse_manifest(std::string_view text);
RunManifest load_manifest(const std::filesystem::path& path);

inline constexpr std::string_view trace_header =
    "iter,rf,max_inner,matvec_seq_cum,matvec_total_cum,inside_count";

std::string trace_csv(const IterationLog& log);

std::string result_json(const EigenResult& result, const RunManifest& manifest);
/// Inverse of result_json for the EigenResult fields.
EigenResult parse_result_json(std::string_view text);

/// Interval around eigenvalues first .. first + count - 1 of an ascending
/// spectrum. Each endpoint sits `margin` of the way across the adjacent gap;
/// at the spectrum edge the margin of the opposite endpoint is mirrored.
struct IntervalChoice {
  double emin = 0.0;
  double emax = 0.0;
};

/// Throws when an endpoint gap is below separation_tolerance * max(|lambda|, 1),
/// i.e. when the interval would split a degenerate cluster.
inline constexpr double separation_tolerance = 1e-8;

IntervalChoice choose_interval(const std::vector<double>& eigvals, std::size_t first,
                               std::size_t count, double margin = 0.5);

inline constexpr int exit_converged = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_not_converged = 2;
inline constexpr int exit_usage = 64;

/// Runs ifeast_solve (or feast_direct) and writes result.json and
/// trace.csv under manifest.out_dir. Returns 0 on convergence, 2 when the
/// outer loop stopped without converging, 1 on error (message to `err`).
int run_solve(const RunManifest& manifest, std::ostream& err);

}  // namespace ifeast
