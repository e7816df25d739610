#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ifeast/errors.hpp"
#include "ifeast/io.hpp"

namespace ifeast {

using nlohmann::json;

namespace {

json config_to_json(const IFEASTConfig& c) {
  return json{{"m0", c.m0},
              {"alpha", c.alpha},
              {"tol_outer", c.tol_outer},
              {"max_outer", c.max_outer},
              {"nc_up", c.nc_up},
              {"solver", std::string(to_string(c.solver))},
              {"seed", c.seed},
              {"initial_rf", c.initial_rf},
              {"max_inner", c.max_inner},
              {"threads", c.threads}};
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

IFEASTConfig config_from_json(const json& j) {
  IFEASTConfig c;
  read_opt(j, "m0", c.m0);
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "tol_outer", c.tol_outer);
  read_opt(j, "max_outer", c.max_outer);
  read_opt(j, "nc_up", c.nc_up);
  if (j.contains("solver")) c.solver = solver_kind_from_string(j.at("solver").get<std::string>());
  read_opt(j, "seed", c.seed);
  read_opt(j, "initial_rf", c.initial_rf);
  read_opt(j, "max_inner", c.max_inner);
  read_opt(j, "threads", c.threads);
  return c;
}

json manifest_to_json(const RunManifest& m) {
  return json{{"schema", m.schema},
              {"matrix", m.matrix},
              {"interval", {{"emin", m.emin}, {"emax", m.emax}}},
              {"config", config_to_json(m.config)},
              {"rule", m.rule},
              {"output",
               {{"dir", m.out_dir},
                {"result", m.result_file},
                {"trace", m.trace_file},
                {"vectors", m.write_vectors}}}};
}

json record_to_json(const IterationRecord& r) {
  return json{{"iter", r.iter},
              {"rf", r.rf},
              {"inside_count", r.inside_count},
              {"inner_tol", r.inner_tol},
              {"max_inner_per_shift", r.max_inner_per_shift},
              {"max_inner", r.max_inner},
              {"inner_converged", r.inner_converged},
              {"matvecs_sequential", r.matvecs_sequential},
              {"matvecs_inner", r.matvecs_inner},
              {"matvecs_total", r.matvecs_total},
              {"matvec_seq_cum", r.matvec_seq_cum},
              {"matvec_total_cum", r.matvec_total_cum},
              {"lane_iterations_total", r.lane_iterations_total},
              {"effective_dim", r.effective_dim}};
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  j.at("iter").get_to(r.iter);
  j.at("rf").get_to(r.rf);
  j.at("inside_count").get_to(r.inside_count);
  j.at("inner_tol").get_to(r.inner_tol);
  j.at("max_inner_per_shift").get_to(r.max_inner_per_shift);
  j.at("max_inner").get_to(r.max_inner);
  j.at("inner_converged").get_to(r.inner_converged);
  j.at("matvecs_sequential").get_to(r.matvecs_sequential);
  j.at("matvecs_inner").get_to(r.matvecs_inner);
  j.at("matvecs_total").get_to(r.matvecs_total);
  j.at("matvec_seq_cum").get_to(r.matvec_seq_cum);
  j.at("matvec_total_cum").get_to(r.matvec_total_cum);
  j.at("lane_iterations_total").get_to(r.lane_iterations_total);
  j.at("effective_dim").get_to(r.effective_dim);
  return r;
}

SolveStatus status_from_string(const std::string& s) {
  if (s == "converged") return SolveStatus::converged;
  if (s == "max_outer") return SolveStatus::max_outer;
  if (s == "empty") return SolveStatus::empty;
  throw Error("io-cli", "unknown status '" + s + "'");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-cli", "cannot write " + path.string());
  out << text;
  if (!out) throw Error("io-cli", "write failed for " + path.string());
}

}  // namespace

std::string serialize_manifest(const RunManifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

RunManifest parse_manifest(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("io-cli", std::string("manifest is not valid JSON: ") + e.what());
  }
  RunManifest m;
  try {
    read_opt(j, "schema", m.schema);
    if (m.schema != manifest_schema)
      throw Error("io-cli", "manifest schema '" + m.schema + "' is not " +
                                std::string(manifest_schema));
    read_opt(j, "matrix", m.matrix);
    if (j.contains("interval")) {
      read_opt(j.at("interval"), "emin", m.emin);
      read_opt(j.at("interval"), "emax", m.emax);
    }
    if (j.contains("config")) m.config = config_from_json(j.at("config"));
    read_opt(j, "rule", m.rule);
    if (j.contains("output")) {
      const json& o = j.at("output");
      read_opt(o, "dir", m.out_dir);
      read_opt(o, "result", m.result_file);
      read_opt(o, "trace", m.trace_file);
      read_opt(o, "vectors", m.write_vectors);
    }
  } catch (const json::exception& e) {
    throw Error("io-cli", std::string("manifest field has the wrong type: ") + e.what());
  }
  if (m.rule != "trapezoid") throw Error("io-cli", "unsupported quadrature rule '" + m.rule + "'");
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-cli", "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string trace_csv(const IterationLog& log) {
  std::string out(trace_header);
  out += '\n';
  for (const auto& r : log) {
    out += std::to_string(r.iter) + ',' + format_double(r.rf) + ',' + std::to_string(r.max_inner) +
           ',' + std::to_string(r.matvec_seq_cum) + ',' + std::to_string(r.matvec_total_cum) + ',' +
           std::to_string(r.inside_count) + '\n';
  }
  return out;
}

std::string result_json(const EigenResult& result, const RunManifest& manifest) {
  json log = json::array();
  for (const auto& r : result.log) log.push_back(record_to_json(r));
  json j{{"schema", "ifeast.result/1"},
         {"status", to_string(result.status)},
         {"converged", result.converged},
         {"iterations", result.iterations},
         {"eigenvalues", result.eigenvalues},
         {"residuals", result.residuals},
         {"warnings", result.warnings},
         {"totals",
          {{"matvec_seq", result.log.empty() ? 0 : result.log.back().matvec_seq_cum},
           {"matvec_total", result.log.empty() ? 0 : result.log.back().matvec_total_cum}}},
         {"log", log},
         {"manifest", manifest_to_json(manifest)}};
  if (manifest.write_vectors) {
    const VectorBlock& v = result.eigenvectors;
    json cols = json::array();
    for (std::size_t c = 0; c < v.cols(); ++c) {
      json re = json::array(), im = json::array();
      for (Complex e : v.col(c)) {
        re.push_back(e.real());
        im.push_back(e.imag());
      }
      cols.push_back({{"re", re}, {"im", im}});
    }
    j["eigenvectors"] = {{"rows", v.rows()}, {"columns", cols}};
  }
  return j.dump(2) + "\n";
}

EigenResult parse_result_json(std::string_view text) {
  EigenResult r;
  try {
    const json j = json::parse(text);
    r.status = status_from_string(j.at("status").get<std::string>());
    j.at("converged").get_to(r.converged);
    j.at("iterations").get_to(r.iterations);
    j.at("eigenvalues").get_to(r.eigenvalues);
    j.at("residuals").get_to(r.residuals);
    j.at("warnings").get_to(r.warnings);
    for (const auto& rec : j.at("log")) r.log.push_back(record_from_json(rec));
    if (j.contains("eigenvectors")) {
      const json& ev = j.at("eigenvectors");
      const auto rows = ev.at("rows").get<std::size_t>();
      const json& cols = ev.at("columns");
      r.eigenvectors = VectorBlock(rows, cols.size());
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto re = cols[c].at("re").get<std::vector<double>>();
        const auto im = cols[c].at("im").get<std::vector<double>>();
        if (re.size() != rows || im.size() != rows)
          throw Error("io-cli", "eigenvector column " + std::to_string(c) + " has wrong length");
        for (std::size_t i = 0; i < rows; ++i) r.eigenvectors(i, c) = {re[i], im[i]};
      }
    }
  } catch (const json::exception& e) {
    throw Error("io-cli", std::string("malformed result.json: ") + e.what());
  }
  return r;
}

IntervalChoice choose_interval(const std::vector<double>& eigvals, std::size_t first,
                               std::size_t count, double margin) {
  const std::size_t n = eigvals.size();
  if (count == 0 || first + count > n)
    throw Error("io-cli", "choose_interval: eigenvalues " + std::to_string(first) + ".." +
                              std::to_string(first + count) + " exceed the spectrum size " +
                              std::to_string(n));
  if (!(margin > 0.0 && margin < 1.0)) throw Error("io-cli", "choose_interval: margin must be in (0, 1)");
  const std::size_t last = first + count - 1;
  if (first == 0 && last + 1 == n)
    throw Error("io-cli", "choose_interval: interval would cover the whole spectrum");
  const double lo_gap = first > 0 ? eigvals[first] - eigvals[first - 1] : 0.0;
  const double hi_gap = last + 1 < n ? eigvals[last + 1] - eigvals[last] : 0.0;
  const double scale = std::max(std::abs(eigvals.front()), std::abs(eigvals.back()));
  const double min_gap = separation_tolerance * std::max(scale, 1.0);
  if ((first > 0 && lo_gap <= min_gap) || (last + 1 < n && hi_gap <= min_gap))
    throw Error("io-cli", "choose_interval: eigenvalues " + std::to_string(first) + ".." +
                              std::to_string(last) +
                              " split a degenerate cluster; choose another count");
  IntervalChoice c;
  c.emin = eigvals[first] - margin * (first > 0 ? lo_gap : hi_gap);
  c.emax = eigvals[last] + margin * (last + 1 < n ? hi_gap : lo_gap);
  return c;
}

int run_solve(const RunManifest& manifest, std::ostream& err) {
  try {
    const HermitianOperator op = read_matrix_market(std::filesystem::path(manifest.matrix));
    const EigenResult result =
        ifeast_solve(op, manifest.emin, manifest.emax, manifest.config);
    const std::filesystem::path dir(manifest.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / manifest.result_file, result_json(result, manifest));
    write_file(dir / manifest.trace_file, trace_csv(result.log));
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    return result.converged ? exit_converged : exit_not_converged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_error;
  }
}

}  // namespace ifeast
