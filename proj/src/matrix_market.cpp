#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ifeast/errors.hpp"
#include "ifeast/io.hpp"

namespace ifeast {

namespace {

enum class Field { real, integer, complex };
enum class Storage { general, symmetric, hermitian };

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw Error("io-cli", source + ":" + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

HermitianOperator read_matrix_market(std::istream& in, const std::string& source) {
  std::string text;
  std::size_t line_no = 0;
  if (!std::getline(in, text)) fail(source, 1, "empty file");
  ++line_no;

  std::istringstream head(text);
  std::string banner, object, format, field_s, storage_s;
  head >> banner >> object >> format >> field_s >> storage_s;
  if (banner != "%%MatrixMarket") fail(source, line_no, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field_s = lower(field_s);
  storage_s = lower(storage_s);
  if (object != "matrix") fail(source, line_no, "unsupported object '" + object + "'");
  if (format != "coordinate")
    fail(source, line_no, "unsupported format '" + format + "' (only coordinate is accepted)");

  Field field;
  if (field_s == "real") field = Field::real;
  else if (field_s == "integer") field = Field::integer;
  else if (field_s == "complex") field = Field::complex;
  else fail(source, line_no, "unsupported field '" + field_s + "'");

  Storage storage;
  if (storage_s == "general") storage = Storage::general;
  else if (storage_s == "symmetric") storage = Storage::symmetric;
  else if (storage_s == "hermitian") storage = Storage::hermitian;
  else fail(source, line_no, "unsupported symmetry '" + storage_s + "'");

  std::size_t rows = 0, cols = 0, entries = 0;
  for (;;) {
    if (!std::getline(in, text)) fail(source, line_no + 1, "missing size line");
    ++line_no;
    if (text.empty() || text[0] == '%') continue;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream size_line(text);
    if (!(size_line >> rows >> cols >> entries)) fail(source, line_no, "malformed size line");
    break;
  }
  if (rows != cols) fail(source, line_no, "matrix is not square");
  if (rows == 0) fail(source, line_no, "matrix dimension is zero");

  std::vector<Triplet> triplets;
  triplets.reserve(storage == Storage::general ? entries : 2 * entries);
  std::vector<std::size_t> entry_line;
  std::size_t read = 0;
  while (read < entries && std::getline(in, text)) {
    ++line_no;
    if (text.empty() || text[0] == '%') continue;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(text);
    std::size_t i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> i >> j >> re)) fail(source, line_no, "malformed entry");
    if (field == Field::complex && !(ls >> im)) fail(source, line_no, "missing imaginary part");
    if (i < 1 || j < 1 || i > rows || j > cols)
      fail(source, line_no, "index (" + std::to_string(i) + ", " + std::to_string(j) +
                                ") out of range");
    --i;
    --j;
    const Complex v{re, im};
    if (storage != Storage::general && i == j && im != 0.0)
      fail(source, line_no, "diagonal entry has a nonzero imaginary part");
    if (storage == Storage::symmetric && i != j && im != 0.0)
      fail(source, line_no, "complex symmetric storage is not Hermitian");
    triplets.push_back({i, j, v});
    if (storage != Storage::general && i != j) triplets.push_back({j, i, std::conj(v)});
    ++read;
  }
  if (read < entries)
    fail(source, line_no, "expected " + std::to_string(entries) + " entries, found " +
                              std::to_string(read));

  CsrMatrix csr = csr_from_triplets(rows, triplets);
  if (storage == Storage::general) {
    // Every a_ij must match conj(a_ji); report the first offender in row order.
    auto lookup = [&](std::size_t r, std::size_t c) -> Complex {
      const auto b = csr.col_idx.begin() + static_cast<std::ptrdiff_t>(csr.row_ptr[r]);
      const auto e = csr.col_idx.begin() + static_cast<std::ptrdiff_t>(csr.row_ptr[r + 1]);
      const auto it = std::lower_bound(b, e, c);
      if (it == e || *it != c) return 0.0;
      return csr.values[static_cast<std::size_t>(it - csr.col_idx.begin())];
    };
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t p = csr.row_ptr[r]; p < csr.row_ptr[r + 1]; ++p) {
        const std::size_t c = csr.col_idx[p];
        const Complex v = csr.values[p];
        const Complex w = std::conj(lookup(c, r));
        if (std::abs(v - w) > 1e-12 * std::max(std::abs(v), std::abs(w)))
          throw Error("io-cli", source + ": general matrix is not Hermitian: entry (" +
                                    std::to_string(r + 1) + ", " + std::to_string(c + 1) + ") = " +
                                    format_complex(v) + " but the mirrored entry gives " +
                                    format_complex(w));
      }
  }
  const bool real = std::all_of(csr.values.begin(), csr.values.end(),
                                [](Complex v) { return v.imag() == 0.0; });
  return HermitianOperator(std::move(csr), real ? Symmetry::real_symmetric
                                                : Symmetry::complex_hermitian);
}

HermitianOperator read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-cli", "cannot open matrix file " + path.string());
  return read_matrix_market(in, path.string());
}

void write_matrix_market(std::ostream& out, const HermitianOperator& op) {
  const CsrMatrix& a = op.csr();
  const bool real = op.is_real_symmetric();
  std::size_t count = 0;
  for (std::size_t r = 0; r < a.n; ++r)
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
      if (a.col_idx[p] <= r) ++count;
  out << "%%MatrixMarket matrix coordinate " << (real ? "real symmetric" : "complex hermitian")
      << "\n" << a.n << " " << a.n << " " << count << "\n";
  // Column-major lower triangle: (r, c) with c <= r, read as mirrored upper rows.
  for (std::size_t c = 0; c < a.n; ++c)
    for (std::size_t p = a.row_ptr[c]; p < a.row_ptr[c + 1]; ++p) {
      const std::size_t r = a.col_idx[p];
      if (r < c) continue;
      // a(r, c) = conj(a(c, r)).
      const Complex v = std::conj(a.values[p]);
      out << r + 1 << " " << c + 1 << " " << format_double(v.real());
      if (!real) out << " " << format_double(v.imag());
      out << "\n";
    }
}

void write_matrix_market(const std::filesystem::path& path, const HermitianOperator& op) {
  std::ofstream out(path);
  if (!out) throw Error("io-cli", "cannot write " + path.string());
  write_matrix_market(out, op);
}

}  // namespace ifeast
