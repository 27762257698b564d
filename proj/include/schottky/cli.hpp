#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "schottky/config.hpp"
#include "schottky/gem.hpp"
#include "schottky/parallel.hpp"
#include "schottky/poincare.hpp"
#include "schottky/suites.hpp"
#include "schottky/variation.hpp"

namespace schottky::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_fail = 1;
inline constexpr int exit_config = 2;

inline std::vector<double> split_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot read '" + item + "' as a number");
    }
  }
  return out;
}

inline cplx parse_complex(const std::string& s, const std::string& what) {
  const auto v = split_numbers(s, what);
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() != 2) throw ConfigError(what + ": expected re,im");
  return {v[0], v[1]};
}

struct Grid {
  double x0, x1, y0, y1;
  int nx, ny;

  [[nodiscard]] std::vector<cplx> points() const {
    std::vector<cplx> out;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        out.emplace_back(nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1), ny == 1 ? y0 : y0 + (y1 - y0) * j / (ny - 1));
    return out;
  }
};

inline Grid parse_grid(const std::string& s) {
  const auto v = split_numbers(s, "--grid");
  if (v.size() != 6) throw ConfigError("--grid expects x0,x1,nx,y0,y1,ny");
  Grid g{v[0], v[1], v[3], v[4], static_cast<int>(v[2]), static_cast<int>(v[5])};
  if (g.nx < 1 || g.ny < 1 || g.nx != v[2] || g.ny != v[5]) throw ConfigError("--grid counts must be positive integers");
  return g;
}

class Output {
 public:
  Output(std::ostream& out, std::string path) : out_(out), path_(std::move(path)) {}

  /// Writes `j` to the --json path when one was given, else to the stream.
  void document(const json& j) const {
    if (path_.empty()) {
      out_ << j.dump(2) << '\n';
    } else {
      write_file(j);
    }
  }
  /// Writes `j` to the --json path only.
  void report(const json& j) const {
    if (!path_.empty()) write_file(j);
  }

 private:
  void write_file(const json& j) const {
    std::ofstream f(path_);
    if (!f) throw ConfigError("cannot write " + path_);
    f << j.dump(2) << '\n';
  }
  std::ostream& out_;
  std::string path_;
};

/// One sample row per grid point; points where the series has a pole are
/// written as nan.
inline void write_grid_csv(std::ostream& os, const RunConfig& cfg, const std::string& what, const Grid& grid,
                           std::optional<cplx> y_opt) {
  const SchottkyParams& p = cfg.surface;
  const auto pts = grid.points();
  const cplx y = y_opt ? *y_opt : (cfg.punctures.empty() ? cplx{} : cfg.punctures[0]);
  std::function<std::vector<cplx>(cplx)> eval;
  std::vector<std::string> cols;
  std::shared_ptr<void> keep;
  if (what == "bers") {
    auto B = std::make_shared<BersSeries>(p, cfg.N, cfg.series);
    keep = B;
    eval = [B, y](cplx x) { return std::vector<cplx>{B->value(x, y)}; };
    cols = {"value"};
  } else if (what == "third-kind") {
    auto W = std::make_shared<ThirdKind>(p, cfg.series);
    keep = W;
    eval = [W, y](cplx x) { return std::vector<cplx>{W->value(x, y)}; };
    cols = {"value"};
  } else if (what == "nu") {
    auto nu = std::make_shared<NormalizedDifferentials>(p, cfg.series);
    keep = nu;
    eval = [nu](cplx x) { return nu->evaluate(x); };
    for (int a = 1; a <= p.genus(); ++a) cols.push_back("nu" + std::to_string(a));
  } else if (what == "gem") {
    GemConfig gc;
    gc.series = cfg.series;
    gc.contour_nodes = cfg.contour_nodes;
    gc.J = cfg.J;
    auto G = std::make_shared<CanonicalGem>(canonical_gem(p, cfg.N, gc));
    keep = G;
    eval = [G, y](cplx x) { return std::vector<cplx>{G->value(x, y)}; };
    cols = {"value"};
  } else {
    throw ConfigError("--what must be bers, third-kind, nu or gem");
  }
  std::vector<std::vector<cplx>> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    try {
      vals[i] = eval(pts[i]);
    } catch (const PoleError&) {
      vals[i].assign(cols.size(), cplx{NAN, NAN});
    }
  });
  os << "re,im";
  for (const auto& c : cols) os << ',' << c << "_re," << c << "_im";
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    os << pts[i].real() << ',' << pts[i].imag();
    for (const cplx& v : vals[i]) os << ',' << v.real() << ',' << v.imag();
    os << '\n';
  }
}

inline json enumeration_json(const SchottkyParams& p, int max_len) {
  require_valid(p, "enumerate");
  const Enumeration e(p, max_len);
  json shells = json::array();
  for (int l = 0; l <= max_len; ++l) {
    const std::size_t hi = l < max_len ? e.shell_begin(l + 1) : e.size();
    shells.push_back(hi - e.shell_begin(l));
  }
  json words = json::array();
  for (const auto& el : e.elements())
    words.push_back({{"word", el.word.letters},
                     {"matrix", to_json_value(std::vector<cplx>{el.map.a(), el.map.b(), el.map.c(), el.map.d()})}});
  return {{"genus", p.genus()}, {"max_len", max_len}, {"count", e.size()}, {"shells", shells}, {"words", words}};
}

inline json period_json(const PeriodMatrix& P) {
  json paths = json::array();
  for (const auto& path : P.paths) paths.push_back(to_json_value(path));
  return {{"omega", suites::matrix_json(P.omega)},
          {"symmetry_error", P.symmetry_error},
          {"gate_error", P.gate_error},
          {"normalization_error", P.normalization_error},
          {"paths", paths}};
}

/// Runs the command line; all output goes to `out` and `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Schottky uniformization: forms, cocycles, period matrices and property suites"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, json_path;
  int workers_opt = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_len;
  app.add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--json", json_path, "write the JSON report or document here");
  app.add_option("--workers", workers_opt, "worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for the random-sample property checks");
  app.add_option("--max-len", max_len, "word-length truncation, overriding the config")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check the surface parameters");
  auto* enumerate = app.add_subcommand("enumerate", "list the reduced words up to --max-len");
  auto* eval = app.add_subcommand("eval", "sample a form on a grid (CSV)");
  std::string what, grid_spec, y_spec, out_path;
  eval->add_option("--what", what, "bers | third-kind | nu | gem")->required();
  eval->add_option("--grid", grid_spec, "x0,x1,nx,y0,y1,ny")->required();
  eval->add_option("--y", y_spec, "second point re,im for two-point forms (default: first puncture)");
  eval->add_option("--out", out_path, "CSV file (default: standard output)");
  auto* basis = app.add_subcommand("basis", "pairing-matrix spectrum, J and the dual basis");
  auto* check = app.add_subcommand("check", "run property suites");
  std::vector<std::string> check_suites;
  check->add_option("--suite", check_suites, "suite name (repeatable)")->required();
  auto* periods = app.add_subcommand("period-matrix", "the period matrix");
  auto* rauch = app.add_subcommand("rauch", "variational formula for the period matrix");
  std::vector<std::string> xs;
  rauch->add_option("--x", xs, "sample point re,im (repeatable)");
  auto* report = app.add_subcommand("report", "run suites and write a JSON report");
  bool all = false;
  std::vector<std::string> report_suites;
  report->add_flag("--all", all, "every suite");
  report->add_option("--suite", report_suites, "suite name (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (max_len && !enumerate->parsed()) cfg.series.L = *max_len;
    for (const auto& x : xs) {
      if (&x == &xs.front()) cfg.x_samples.clear();
      cfg.x_samples.push_back(parse_complex(x, "--x"));
    }
    check_config(cfg);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  }
  set_workers(workers_opt > 0 ? workers_opt : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  const Output output(out, json_path);

  auto run_named = [&](const std::vector<std::string>& names) {
    for (const auto& n : names)
      if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
        throw ConfigError("unknown suite '" + n + "'");
    const RunReport rep = run_suites(cfg, names, &out);
    output.report(rep.to_json());
    out << (rep.pass() ? "all executed suites passed" : "some suites FAILED") << '\n';
    return rep.pass() ? exit_ok : exit_fail;
  };

  try {
    if (validate->parsed()) {
      const RunReport rep = run_suites(cfg, {"validity"});
      const SuiteReport& s = rep.suites.front();
      out << "\"valid\": " << (s.data.value("valid", false) ? "true" : "false") << '\n';
      print_suite(out, s);
      output.report(rep.to_json());
      return rep.pass() ? exit_ok : exit_fail;
    }
    if (enumerate->parsed()) {
      output.document(enumeration_json(cfg.surface, max_len ? *max_len : cfg.series.L));
      return exit_ok;
    }
    if (eval->parsed()) {
      const Grid grid = parse_grid(grid_spec);
      std::optional<cplx> y;
      if (!y_spec.empty()) y = parse_complex(y_spec, "--y");
      if (out_path.empty()) {
        write_grid_csv(out, cfg, what, grid, y);
      } else {
        std::ofstream f(out_path);
        if (!f) throw ConfigError("cannot write " + out_path);
        write_grid_csv(f, cfg, what, grid, y);
      }
      return exit_ok;
    }
    if (basis->parsed()) {
      Context ctx(cfg);
      json j;
      try {
        j = suites::basis_json(ctx.gem());
      } catch (const Error& e) {
        err << "basis selection failed: " << e.what() << '\n';
        if (dynamic_cast<const RankError*>(&e)) {
          const SpanningTheta th(cfg.surface, cfg.N, cfg.series);
          const auto sel = pairing_spectrum(pairing_matrix(th, cfg.contour_nodes), cfg.surface.genus(), cfg.N);
          err << "singular values:";
          for (double s : sel.singular_values) err << ' ' << s;
          err << '\n';
        }
        return exit_fail;
      }
      output.document(j);
      return exit_ok;
    }
    if (periods->parsed()) {
      Context ctx(cfg);
      output.document(period_json(ctx.periods()));
      return exit_ok;
    }
    if (check->parsed()) return run_named(check_suites);
    if (rauch->parsed()) return run_named({"rauch"});
    if (report->parsed()) {
      if (all == !report_suites.empty()) throw ConfigError("report needs either --all or --suite");
      return run_named(all ? suite_names() : report_suites);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const InvalidParamsError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_fail;
  }
  return exit_config;
}

}  // namespace schottky::cli
