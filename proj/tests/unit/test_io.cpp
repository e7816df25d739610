#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ifeast/errors.hpp"
#include "ifeast/feast.hpp"
#include "ifeast/generators.hpp"
#include "ifeast/io.hpp"
#include "test_support.hpp"

using namespace ifeast;
using namespace ifeast::testing;
namespace fs = std::filesystem;

namespace {

HermitianOperator parse(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in, "t.mtx");
}

std::string error_of(const std::string& text) {
  try {
    (void)parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ifeast_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("io-cli") {

TEST_CASE("matrix market: symmetric storage is mirrored") {
  const HermitianOperator op = parse(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "% comment\n"
      "3 3 4\n"
      "1 1 2.0\n"
      "2 1 -1\n"
      "2 2 2.0\n"
      "3 3 5e-1\n");
  CHECK(op.is_real_symmetric());
  const DenseMatrix d = op.to_dense();
  CHECK(d(0, 0) == 2.0);
  CHECK(d(0, 1) == -1.0);
  CHECK(d(1, 0) == -1.0);
  CHECK(d(2, 2) == 0.5);
  CHECK(d(0, 2) == 0.0);
}

TEST_CASE("matrix market: hermitian and general storage") {
  const HermitianOperator h = parse(
      "%%MatrixMarket matrix coordinate complex hermitian\n"
      "2 2 3\n1 1 1 0\n2 1 0 2\n2 2 3 0\n");
  CHECK_FALSE(h.is_real_symmetric());
  CHECK(h.to_dense()(1, 0) == Complex(0.0, 2.0));
  CHECK(h.to_dense()(0, 1) == Complex(0.0, -2.0));

  const HermitianOperator g = parse(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 4\n1 1 1\n1 2 4\n2 1 4\n2 2 1\n");
  CHECK(g.is_real_symmetric());
  CHECK(g.to_dense()(0, 1) == 4.0);

  const HermitianOperator i = parse(
      "%%MatrixMarket matrix coordinate integer symmetric\n2 2 2\n1 1 3\n2 1 7\n");
  CHECK(i.to_dense()(1, 0) == 7.0);
}

TEST_CASE("matrix market: duplicates are summed") {
  const HermitianOperator op = parse(
      "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n1 1 2\n2 2 1\n");
  CHECK(op.to_dense()(0, 0) == 3.0);
}

TEST_CASE("matrix market: malformed input names the problem") {
  CHECK(error_of("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").find("array") !=
        std::string::npos);
  CHECK(error_of("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n1 1\n")
            .find("pattern") != std::string::npos);
  CHECK(error_of("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1\n")
            .find("skew") != std::string::npos);
  CHECK(error_of("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n")
            .find("t.mtx:3") != std::string::npos);
  CHECK(error_of("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n") != "");
  CHECK(error_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n2 1 3\n")
            .find("(1, 2)") != std::string::npos);
  CHECK(error_of("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n") != "");
  CHECK(error_of("%%MatrixMarket matrix coordinate complex hermitian\n2 2 1\n1 1 1 1\n") != "");
  CHECK(error_of("not a header\n") != "");
  CHECK(error_of("") != "");
  CHECK_THROWS_AS(read_matrix_market(fs::path("/nonexistent/ifeast.mtx")), Error);
}

TEST_CASE("matrix market: write then read is exact") {
  for (bool complex_case : {false, true}) {
    const DenseMatrix a =
        complex_case ? random_hermitian_dense(25, 3) : random_symmetric_dense(25, 3);
    const HermitianOperator op = operator_from_dense(a);
    std::ostringstream out;
    write_matrix_market(out, op);
    CHECK(out.str().find(complex_case ? "complex hermitian" : "real symmetric") != std::string::npos);
    const HermitianOperator back = parse(out.str());
    CHECK(back.to_dense() == op.to_dense());
    CHECK(back.is_real_symmetric() == !complex_case);
  }
}

TEST_CASE("format_double is shortest and exact") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.5e-10) == "-1.5e-10");
  for (double v : {1.0 / 3.0, 6.02214076e23, std::numeric_limits<double>::max()})
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("manifest round trip and defaults") {
  RunManifest m;
  m.matrix = "data/x.mtx";
  m.emin = -1.25;
  m.emax = 0.1;
  m.config.m0 = 12;
  m.config.alpha = 0.01;
  m.config.solver = SolverKind::fom;
  m.config.nc_up = 6;
  m.config.seed = 99;
  m.config.threads = 3;
  m.out_dir = "out/run1";
  m.write_vectors = true;
  CHECK(parse_manifest(serialize_manifest(m)) == m);

  const RunManifest d = parse_manifest(
      R"({"schema":"ifeast.run/1","matrix":"a.mtx","interval":{"emin":0,"emax":1},"config":{"m0":4}})");
  CHECK(d.config.m0 == 4);
  CHECK(d.config.alpha == 0.1);
  CHECK(d.config.nc_up == 4);
  CHECK(d.result_file == "result.json");
  CHECK_THROWS_AS(parse_manifest(R"({"schema":"other/2","matrix":"a"})"), Error);
  CHECK_THROWS_AS(parse_manifest("{not json"), Error);
}

TEST_CASE("trace csv layout") {
  IterationRecord r;
  r.iter = 1;
  r.rf = 0.5;
  r.max_inner = 17;
  r.matvec_seq_cum = 17;
  r.matvec_total_cum = 140;
  r.inside_count = 3;
  const std::string csv = trace_csv({r});
  CHECK(csv == std::string(trace_header) + "\n1,0.5,17,17,140,3\n");
  CHECK(trace_csv({}) == std::string(trace_header) + "\n");
}

TEST_CASE("result json round trip") {
  std::vector<double> d{1, 2, 3, 4, 5, 6};
  const HermitianOperator op = make_diagonal(d);
  IFEASTConfig c;
  c.m0 = 4;
  c.solver = SolverKind::minres;
  const EigenResult r = ifeast_solve(op, 1.5, 3.5, c);
  RunManifest m;
  m.config = c;
  m.write_vectors = true;
  const EigenResult back = parse_result_json(result_json(r, m));
  CHECK(back == r);
  m.write_vectors = false;
  const EigenResult no_vectors = parse_result_json(result_json(r, m));
  CHECK(no_vectors.eigenvalues == r.eigenvalues);
  CHECK(no_vectors.eigenvectors.cols() == 0);
  CHECK_THROWS_AS(parse_result_json("{}"), Error);
}

TEST_CASE("run_solve: exit codes, files and reproducibility") {
  const fs::path dir = scratch("run");
  std::vector<double> d{1, 2, 3, 4, 5, 6, 7, 8};
  write_matrix_market(dir / "d.mtx", make_diagonal(d));

  RunManifest m;
  m.matrix = (dir / "d.mtx").string();
  m.emin = 1.5;
  m.emax = 4.5;
  m.config.m0 = 5;
  m.out_dir = (dir / "a").string();
  std::ostringstream err;
  REQUIRE(run_solve(m, err) == exit_converged);
  const std::string result = slurp(dir / "a" / "result.json");
  const std::string trace = slurp(dir / "a" / "trace.csv");
  CHECK(trace.rfind(std::string(trace_header), 0) == 0);
  const EigenResult parsed = parse_result_json(result);
  REQUIRE(parsed.eigenvalues.size() == 3);
  CHECK(parsed.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));

  m.out_dir = (dir / "b").string();
  REQUIRE(run_solve(m, err) == exit_converged);
  CHECK(slurp(dir / "b" / "trace.csv") == trace);
  CHECK(slurp(dir / "b" / "result.json").size() == result.size());

  RunManifest empty = m;
  empty.emin = 4.2;
  empty.emax = 4.8;
  empty.config.max_outer = 3;
  empty.out_dir = (dir / "c").string();
  CHECK(run_solve(empty, err) == exit_not_converged);

  RunManifest missing = m;
  missing.matrix = (dir / "nope.mtx").string();
  std::ostringstream err2;
  CHECK(run_solve(missing, err2) == exit_error);
  CHECK(err2.str().find("error:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("choose_interval: gap midpoints and mirrored edges") {
  const std::vector<double> e{0.0, 1.0, 3.0, 4.0, 8.0};
  IntervalChoice c = choose_interval(e, 1, 2);
  CHECK(c.emin == 0.5);
  CHECK(c.emax == 3.5);
  c = choose_interval(e, 0, 2);
  CHECK(c.emax == 2.0);
  CHECK(c.emin == -1.0);
  c = choose_interval(e, 3, 2);
  CHECK(c.emin == 3.5);
  CHECK(c.emax == 8.5);
  c = choose_interval(e, 2, 1, 0.25);
  CHECK(c.emin == 2.5);
  CHECK(c.emax == 3.25);
  CHECK_THROWS_AS(choose_interval(e, 4, 2), Error);
  CHECK_THROWS_AS(choose_interval(e, 0, 5), Error);
  CHECK_THROWS_AS(choose_interval(e, 1, 1, 1.0), Error);
}

}  // TEST_SUITE
