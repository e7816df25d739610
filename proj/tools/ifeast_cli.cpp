// Command line front end: solve, analyze, filter-plot, equivalence,
// intervals and generate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ifeast/analysis.hpp"
#include "ifeast/contour.hpp"
#include "ifeast/errors.hpp"
#include "ifeast/feast.hpp"
#include "ifeast/generators.hpp"
#include "ifeast/io.hpp"
#include "ifeast/linalg.hpp"

namespace fs = std::filesystem;
using namespace ifeast;

namespace {

// Flags shared by solve and analyze. Unset optionals leave the manifest
// (or default) value in place.
struct CommonFlags {
  std::optional<std::string> matrix;
  std::optional<double> emin, emax, alpha, tol;
  std::optional<std::size_t> m0, nc, max_outer, threads, max_inner;
  std::optional<std::string> solver;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

std::string open_unit_interval(const std::string& text) {
  try {
    const double v = std::stod(text);
    if (v > 0.0 && v < 1.0) return {};
  } catch (const std::exception&) {
  }
  return "alpha must lie strictly between 0 and 1, got " + text;
}

void add_common(CLI::App* app, CommonFlags& f, bool with_solver_flags) {
  app->add_option("--matrix", f.matrix, "Matrix Market file (coordinate, Hermitian)")
      ->envname("IFEAST_MATRIX");
  app->add_option("--emin", f.emin, "Lower end of the search interval")->envname("IFEAST_EMIN");
  app->add_option("--emax", f.emax, "Upper end of the search interval")->envname("IFEAST_EMAX");
  app->add_option("--m0", f.m0, "Search subspace dimension")->envname("IFEAST_M0");
  app->add_option("--nc", f.nc, "Quadrature nodes on the upper half circle")
      ->envname("IFEAST_NC");
  app->add_option("--alpha", f.alpha, "Inner tolerance factor, 0 < alpha < 1")
      ->envname("IFEAST_ALPHA")
      ->check(CLI::Validator(open_unit_interval, "(0,1)"));
  app->add_option("--solver", f.solver, "Shifted solver")
      ->envname("IFEAST_SOLVER")
      ->check(CLI::IsMember({"minres", "fom", "gmres", "direct"}));
  app->add_option("--seed", f.seed, "Seed of the random initial block")->envname("IFEAST_SEED");
  app->add_option("--out-dir", f.out_dir, "Output directory")->envname("IFEAST_OUT_DIR");
  if (with_solver_flags) {
    app->add_option("--tol", f.tol, "Outer residual tolerance")->envname("IFEAST_TOL");
    app->add_option("--max-outer", f.max_outer, "Outer iteration cap")
        ->envname("IFEAST_MAX_OUTER");
    app->add_option("--max-inner", f.max_inner, "Inner iteration cap (0 = 10 n)")
        ->envname("IFEAST_MAX_INNER");
    app->add_option("--threads", f.threads, "Worker threads (0 = all cores)")
        ->envname("IFEAST_THREADS");
  }
}

void overlay(RunManifest& m, const CommonFlags& f) {
  if (f.matrix) m.matrix = *f.matrix;
  if (f.emin) m.emin = *f.emin;
  if (f.emax) m.emax = *f.emax;
  if (f.m0) m.config.m0 = *f.m0;
  if (f.nc) m.config.nc_up = *f.nc;
  if (f.alpha) m.config.alpha = *f.alpha;
  if (f.tol) m.config.tol_outer = *f.tol;
  if (f.max_outer) m.config.max_outer = *f.max_outer;
  if (f.max_inner) m.config.max_inner = *f.max_inner;
  if (f.threads) m.config.threads = *f.threads;
  if (f.solver) m.config.solver = solver_kind_from_string(*f.solver);
  if (f.seed) m.config.seed = *f.seed;
  if (f.out_dir) m.out_dir = *f.out_dir;
}

void require_interval(const RunManifest& m) {
  if (m.matrix.empty()) throw Error("io-cli", "--matrix is required");
  if (!(m.emin < m.emax)) throw Error("io-cli", "--emin must be below --emax");
}

int cmd_solve(const RunManifest& m) {
  require_interval(m);
  if (m.config.m0 == 0) throw Error("io-cli", "--m0 is required");
  fs::create_directories(m.out_dir);
  std::ofstream(fs::path(m.out_dir) / "manifest.json") << serialize_manifest(m);
  const int code = run_solve(m, std::cerr);
  if (code == exit_error) return code;
  std::ifstream in(fs::path(m.out_dir) / m.result_file);
  std::stringstream ss;
  ss << in.rdbuf();
  const EigenResult r = parse_result_json(ss.str());
  std::cout << "status " << to_string(r.status) << " after " << r.iterations
            << " outer iterations\n";
  if (!r.log.empty())
    std::cout << "rf " << format_double(r.log.back().rf) << "  matvec_seq "
              << r.log.back().matvec_seq_cum << "  matvec_total " << r.log.back().matvec_total_cum
              << "\n";
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j)
    std::cout << format_double(r.eigenvalues[j]) << "  " << format_double(r.residuals[j]) << "\n";
  return code;
}

int cmd_analyze(const RunManifest& m, bool exact, std::size_t iters) {
  require_interval(m);
  BoundConfig cfg;
  cfg.m0 = m.config.m0;
  cfg.nc_up = m.config.nc_up;
  cfg.alpha = exact ? 0.0 : m.config.alpha;
  cfg.solver = m.config.solver == SolverKind::direct ? SolverKind::minres : m.config.solver;
  if (m.config.solver == SolverKind::direct) cfg.alpha = 0.0;
  cfg.seed = m.config.seed;
  cfg.n_iters = iters;
  cfg.max_inner = m.config.max_inner;
  const HermitianOperator op = read_matrix_market(fs::path(m.matrix));
  const BoundReport rep = verify_bound(op, m.emin, m.emax, cfg);

  std::string csv =
      "iter,j,lambda,gamma_abs,w_norm,w_next,w_next_oblique,epsilon,alpha_j,delta,predicted,"
      "observed,condition,holds,skipped\n";
  for (const auto& e : rep.entries) {
    csv += std::to_string(e.iter) + ',' + std::to_string(e.j) + ',' + format_double(e.lambda) +
           ',' + format_double(e.gamma_abs) + ',' + format_double(e.w_norm) + ',' +
           format_double(e.w_next_norm) + ',' + format_double(e.w_next_oblique) + ',' +
           format_double(e.epsilon) + ',' + format_double(e.alpha_j) + ',' +
           format_double(rep.delta) + ',' + format_double(e.predicted) + ',' +
           format_double(e.observed) + ',' + (e.condition ? "1" : "0") + ',' +
           (e.holds ? "1" : "0") + ',' + (e.skipped ? "1" : "0") + '\n';
  }
  fs::create_directories(m.out_dir);
  std::ofstream(fs::path(m.out_dir) / "bound.csv") << csv;
  std::cout << "delta " << format_double(rep.delta) << "  |gamma_m0+1| "
            << format_double(rep.gamma_next) << "\nflagged iterations " << rep.flagged_iterations
            << "  bound " << (rep.all_hold ? "holds" : "VIOLATED") << "\n";
  return rep.all_hold ? 0 : exit_error;
}

int cmd_filter_plot(double emin, double emax, std::size_t nc, std::size_t points,
                    const std::optional<std::string>& out_dir) {
  const ContourRule rule = build_trapezoid(emin, emax, nc);
  const double width = emax - emin;
  const double start = rule.center - 1.5 * width;
  std::string curve = "lambda,re,im\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(points - 1);
    const double lambda = start + 3.0 * width * t;
    const Complex v = filter_value(rule, lambda);
    curve += format_double(lambda) + ',' + format_double(v.real()) + ',' + format_double(v.imag()) +
             '\n';
  }
  std::string nodes = "k,z_re,z_im,w_re,w_im\n";
  const auto all = full_nodes(rule);
  for (std::size_t k = 0; k < all.size(); ++k)
    nodes += std::to_string(k + 1) + ',' + format_double(all[k].node.real()) + ',' +
             format_double(all[k].node.imag()) + ',' + format_double(all[k].weight.real()) + ',' +
             format_double(all[k].weight.imag()) + '\n';
  if (!out_dir) {
    std::cout << curve;
    return 0;
  }
  fs::create_directories(*out_dir);
  std::ofstream(fs::path(*out_dir) / "filter.csv") << curve;
  std::ofstream(fs::path(*out_dir) / "nodes.csv") << nodes;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ifeast: contour-filtered subspace iteration with inexact shifted solves.\n"
               "Options can also be set through IFEAST_<NAME> environment variables;\n"
               "command line flags take precedence."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CommonFlags solve_flags;
  std::optional<std::string> manifest_path;
  bool vectors = false;
  auto* solve = app.add_subcommand("solve", "Compute the eigenpairs inside [emin, emax]");
  add_common(solve, solve_flags, true);
  solve->add_option("--manifest", manifest_path, "Run manifest (JSON); flags override it")
      ->envname("IFEAST_MANIFEST");
  solve->add_flag("--vectors", vectors, "Store eigenvectors in result.json");

  CommonFlags analyze_flags;
  bool exact = false;
  std::size_t analyze_iters = 5;
  auto* analyze =
      app.add_subcommand("analyze", "Check the inexact-filter error bound against a dense oracle");
  add_common(analyze, analyze_flags, false);
  analyze->add_flag("--exact", exact, "Use exact dense shifted solves");
  analyze->add_option("--iters", analyze_iters, "Outer iterations to instrument");

  double fp_emin = -1.0, fp_emax = 1.0;
  std::size_t fp_nc = 4, fp_points = 1000;
  std::optional<std::string> fp_out;
  auto* plot = app.add_subcommand("filter-plot", "Sample the rational filter on the real axis");
  plot->add_option("--emin", fp_emin, "Lower interval end")->envname("IFEAST_EMIN");
  plot->add_option("--emax", fp_emax, "Upper interval end")->envname("IFEAST_EMAX");
  plot->add_option("--nc", fp_nc, "Quadrature nodes on the upper half circle")
      ->envname("IFEAST_NC");
  plot->add_option("--points", fp_points, "Samples over three interval widths");
  plot->add_option("--out-dir", fp_out, "Write filter.csv and nodes.csv here (default stdout)")
      ->envname("IFEAST_OUT_DIR");

  std::optional<std::string> eq_matrix;
  std::size_t eq_n = 200, eq_m0 = 6, eq_k = 10, eq_nc = 8, eq_seeds = 1;
  std::uint64_t eq_seed = 1;
  double eq_emin = -3.0, eq_emax = 3.0;
  auto* equiv = app.add_subcommand(
      "equivalence", "Compare one block FOM filter step with V rho(H) V^H X0 from block Arnoldi");
  equiv->add_option("--matrix", eq_matrix, "Matrix Market file (default: random symmetric)");
  equiv->add_option("--n", eq_n, "Dimension of the random matrix");
  equiv->add_option("--m0", eq_m0, "Block size");
  equiv->add_option("--k", eq_k, "Block Krylov steps");
  equiv->add_option("--nc", eq_nc, "Quadrature nodes on the upper half circle");
  equiv->add_option("--emin", eq_emin, "Lower interval end");
  equiv->add_option("--emax", eq_emax, "Upper interval end");
  equiv->add_option("--seed", eq_seed, "First seed");
  equiv->add_option("--seeds", eq_seeds, "Number of consecutive seeds");

  std::string iv_matrix, iv_position = "lowest";
  std::size_t iv_count = 20, iv_first = 0;
  double iv_margin = 0.5;
  auto* intervals = app.add_subcommand("intervals", "Pick a search interval from the dense spectrum");
  intervals->add_option("--matrix", iv_matrix, "Matrix Market file")->required();
  intervals->add_option("--count", iv_count, "Number of wanted eigenvalues");
  intervals->add_option("--position", iv_position, "lowest, middle or index")
      ->check(CLI::IsMember({"lowest", "middle", "index"}));
  intervals->add_option("--first", iv_first, "First wanted index (0-based) for --position index");
  intervals->add_option("--margin", iv_margin, "Fraction of the adjacent gap left as margin");

  std::string gen_kind = "surrogate", gen_out;
  std::size_t gen_n = 100;
  std::uint64_t gen_seed = 1;
  auto* generate = app.add_subcommand("generate", "Write a test matrix in Matrix Market format");
  generate->add_option("--kind", gen_kind, "diag, random, hermitian or surrogate")
      ->check(CLI::IsMember({"diag", "random", "hermitian", "surrogate"}));
  generate->add_option("--n", gen_n, "Dimension (diag, random, hermitian)");
  generate->add_option("--seed", gen_seed, "Seed (random, hermitian)");
  generate->add_option("--out", gen_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*solve) {
      RunManifest m = manifest_path ? load_manifest(*manifest_path) : RunManifest{};
      overlay(m, solve_flags);
      m.write_vectors = m.write_vectors || vectors;
      return cmd_solve(m);
    }
    if (*analyze) {
      RunManifest m;
      overlay(m, analyze_flags);
      if (m.config.m0 == 0) throw Error("io-cli", "--m0 is required");
      return cmd_analyze(m, exact, analyze_iters);
    }
    if (*plot) return cmd_filter_plot(fp_emin, fp_emax, fp_nc, fp_points, fp_out);
    if (*equiv) {
      std::cout << "seed,deviation\n";
      double worst = 0.0;
      for (std::size_t s = 0; s < eq_seeds; ++s) {
        const std::uint64_t seed = eq_seed + s;
        const HermitianOperator op = eq_matrix
                                         ? read_matrix_market(fs::path(*eq_matrix))
                                         : operator_from_dense(random_symmetric_dense(eq_n, seed));
        const VectorBlock x0 = initial_block(op.size(), eq_m0, seed);
        const double dev =
            fom_equivalence_check(op, x0, eq_k, build_trapezoid(eq_emin, eq_emax, eq_nc));
        worst = std::max(worst, dev);
        std::cout << seed << ',' << format_double(dev) << '\n';
      }
      std::cerr << "max deviation " << format_double(worst) << "\n";
      return 0;
    }
    if (*intervals) {
      const HermitianOperator op = read_matrix_market(fs::path(iv_matrix));
      const EigenDecomposition e = dense_eig(op);
      std::size_t first = iv_first;
      if (iv_position == "lowest") first = 0;
      if (iv_position == "middle") first = e.values.size() / 2 - iv_count / 2;
      const IntervalChoice c = choose_interval(e.values, first, iv_count, iv_margin);
      std::cout << format_double(c.emin) << ' ' << format_double(c.emax) << '\n';
      return 0;
    }
    if (*generate) {
      if (gen_kind == "diag") {
        std::vector<double> d(gen_n);
        for (std::size_t i = 0; i < gen_n; ++i) d[i] = static_cast<double>(i + 1);
        write_matrix_market(fs::path(gen_out), make_diagonal(d));
      } else if (gen_kind == "random") {
        write_matrix_market(fs::path(gen_out),
                            operator_from_dense(random_symmetric_dense(gen_n, gen_seed)));
      } else if (gen_kind == "hermitian") {
        write_matrix_market(fs::path(gen_out),
                            operator_from_dense(random_hermitian_dense(gen_n, gen_seed)));
      } else {
        write_matrix_market(fs::path(gen_out), make_dimer_surrogate());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_usage;
}
