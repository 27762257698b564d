#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "schottky/group.hpp"
#include "schottky/poincare.hpp"
#include "schottky/types.hpp"

namespace schottky {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON helpers

inline json to_json_value(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(where + ": expected a complex number [re, im]");
}

inline std::vector<cplx> complex_list_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list of complex numbers");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_from_json(j[i], where));
  return out;
}

inline json to_json_value(const std::vector<cplx>& v) {
  json out = json::array();
  for (const cplx& z : v) out.push_back(to_json_value(z));
  return out;
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

template <typename T>
T read_number(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  }
  return v.get<T>();
}

// ---------------------------------------------------------------------------
// Surfaces

inline SchottkyParams surface_from_json(const json& j, const std::string& where = "surface") {
  check_keys(j, {"genus", "handles"}, where);
  if (!j.contains("handles") || !j["handles"].is_array()) throw ConfigError(where + ": missing handles");
  SchottkyParams p;
  for (std::size_t i = 0; i < j["handles"].size(); ++i) {
    const json& h = j["handles"][i];
    const std::string at = where + ".handles[" + std::to_string(i) + "]";
    check_keys(h, {"w_plus", "w_minus", "rho"}, at);
    for (const char* k : {"w_plus", "w_minus", "rho"})
      if (!h.contains(k)) throw ConfigError(at + ": missing " + k);
    p.handles.push_back({complex_from_json(h["w_plus"], at + ".w_plus"), complex_from_json(h["w_minus"], at + ".w_minus"),
                         complex_from_json(h["rho"], at + ".rho")});
  }
  if (p.genus() < 1) throw ConfigError(where + ": at least one handle is required");
  if (j.contains("genus") && (!j["genus"].is_number_integer() || j["genus"].get<int>() != p.genus()))
    throw ConfigError(where + ": genus does not match the number of handles");
  return p;
}

inline json surface_to_json(const SchottkyParams& p) {
  json hs = json::array();
  for (const auto& h : p.handles)
    hs.push_back({{"w_plus", to_json_value(h.w_plus)}, {"w_minus", to_json_value(h.w_minus)}, {"rho", to_json_value(h.rho)}});
  return {{"genus", p.genus()}, {"handles", hs}};
}

inline bool same_surface(const SchottkyParams& a, const SchottkyParams& b) {
  if (a.genus() != b.genus()) return false;
  for (int i = 1; i <= a.genus(); ++i) {
    const auto &u = a.handle(i), &v = b.handle(i);
    if (u.w_plus != v.w_plus || u.w_minus != v.w_minus || u.rho != v.rho) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tolerances

/// Every threshold a suite compares against, by check name.
inline std::map<std::string, double> default_tolerances() {
  return {
      {"validity.round_trip", 1e-10},
      {"validity.sewing", 1e-12},
      {"cocycle.law", 1e-10},
      {"cocycle.decomposition", 1e-10},
      {"residue.periodicity", 1e-6},
      {"residue.residue", 1e-8},
      {"rank.gap", 1e6},
      {"quasiperiod.residual", 1e-8},
      {"duality.delta", 1e-8},
      {"coboundary.pairing", 1e-8},
      {"canonical.quasi_period", 1e-7},
      {"canonical.translate", 1e-7},
      {"gemcont.cocycle_contour", 1e-8},
      {"nu.residue", 1e-8},
      {"nu.base_point", 1e-8},
      {"nu.normalization", 1e-8},
      {"period.genus_one", 1e-8},
      {"period.symmetry", 1e-7},
      {"period.transport", 1e-6},
      {"rauch.relative", 1e-4},
      {"rauch.gem_invariance", 1e-6},
      {"rauch.order_min", 1.8},
      {"rauch.order_max", 2.2},
      {"punctured.derivative", 1e-6},
      {"punctured.covariance", 1e-5},
  };
}

// ---------------------------------------------------------------------------
// Run configuration

struct RankCase {
  std::optional<SchottkyParams> surface;  // default: the run surface
  int N = 2;
  std::optional<int> L;         // default: the run truncation
  std::optional<int> expected;  // default: (g-1)(2N-1)
};

struct RunConfig {
  SchottkyParams surface;
  int N = 2;
  SeriesConfig series{};
  int contour_nodes = 256;
  std::uint64_t seed = 1;
  std::vector<std::pair<int, int>> J;  // empty: pivoted
  std::vector<cplx> punctures{cplx{-0.4, 0.6}};

  std::vector<cplx> x_samples{{0.5, 0.9}, {-0.7, -0.4}, {0.1, 1.5}};
  std::vector<cplx> y_grid{{0.3, 0.4}, {-0.5, 1.0}, {1.0, -0.7}, {0.0, -1.2}, {-1.1, -0.3}};
  cplx y_inside{-6.1, 0.12};
  cplx nu_base{0.5, 1.5};

  double residue_radius = 0.05;
  int residue_nodes = 128;

  int cocycle_pairs = 100;
  int cocycle_max_len = 4;
  int sewing_points = 10;

  std::vector<RankCase> rank_cases{RankCase{}, RankCase{std::nullopt, 3, std::nullopt, std::nullopt}};

  std::optional<SchottkyParams> genus_one;  // default: the first handle alone
  int genus_one_L = 20;
  std::array<cplx, 4> transport{cplx{1.0}, cplx{0.2}, cplx{0.03}, cplx{1.0}};

  int duality_nodes = 128;
  double duality_scale = 1.1;

  double h = 1e-5;
  double order_h = 1e-2;

  std::vector<std::vector<int>> words{{1, 2, -1}, {-2, -2, 1, 2}};
  cplx word_point{0.3, 0.2};
  int covariance_generator = 1;

  std::map<std::string, double> tolerances = default_tolerances();

  [[nodiscard]] double tol(const std::string& name) const {
    const auto it = tolerances.find(name);
    if (it == tolerances.end()) throw ConfigError("no tolerance named " + name);
    return it->second;
  }

  [[nodiscard]] SchottkyParams genus_one_surface() const {
    if (genus_one) return *genus_one;
    return SchottkyParams{{surface.handle(1)}};
  }
};

inline void check_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.N < 2) fail("N must be at least 2");
  if (c.series.L < 1) fail("L must be at least 1");
  if (!(c.series.shell_tol > 0.0)) fail("shell_tol must be positive");
  if (c.contour_nodes < 16 || c.contour_nodes % 2 != 0) fail("contour_nodes must be even and at least 16");
  if (c.duality_nodes < 16 || c.duality_nodes % 2 != 0) fail("duality.nodes must be even and at least 16");
  if (c.residue_nodes < 16 || c.residue_nodes % 2 != 0) fail("residue.nodes must be even and at least 16");
  if (!(c.residue_radius > 0.0)) fail("residue.radius must be positive");
  if (!(c.duality_scale > 0.0)) fail("duality.scale must be positive");
  if (!(c.h > 0.0) || !(c.order_h > 0.0)) fail("finite-difference steps must be positive");
  if (c.cocycle_pairs < 1 || c.cocycle_max_len < 0 || c.sewing_points < 1) fail("cocycle sample counts must be positive");
  if (c.genus_one_L < 1) fail("period.genus_one_L must be at least 1");
  if (c.covariance_generator < 1 || c.covariance_generator > c.surface.genus())
    fail("punctured.generator out of range");
  for (const auto& [k, v] : c.tolerances)
    if (!(v > 0.0) || !std::isfinite(v)) fail("tolerance " + k + " must be positive");
  if (c.tol("rauch.order_min") >= c.tol("rauch.order_max")) fail("rauch.order_min must be below rauch.order_max");
  for (const auto& rc : c.rank_cases) {
    if (rc.N < 2) fail("rank case N must be at least 2");
    if (rc.L && *rc.L < 1) fail("rank case L must be at least 1");
  }
  for (const auto& w : c.words)
    for (int l : w)
      if (l == 0 || std::abs(l) > c.surface.genus()) fail("punctured.words letter out of range");
}

inline RunConfig config_from_json(const json& j) {
  check_keys(j, {"surface", "N", "L", "shell_tol", "contour_nodes", "seed", "J", "punctures", "samples", "residue",
                 "cocycle", "rank", "period", "duality", "rauch", "punctured", "tolerances"},
             "config");
  RunConfig c;
  if (!j.contains("surface")) throw ConfigError("config: missing surface");
  c.surface = surface_from_json(j["surface"]);
  c.N = read_number(j, "N", c.N, "config");
  c.series.L = read_number(j, "L", c.series.L, "config");
  c.series.shell_tol = read_number(j, "shell_tol", c.series.shell_tol, "config");
  c.contour_nodes = read_number(j, "contour_nodes", c.contour_nodes, "config");
  c.seed = read_number<std::uint64_t>(j, "seed", c.seed, "config");
  if (j.contains("J")) {
    if (!j["J"].is_array()) throw ConfigError("config.J: expected a list of [a, k] pairs");
    for (const auto& e : j["J"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw ConfigError("config.J: expected a list of [a, k] pairs");
      c.J.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  if (j.contains("punctures")) c.punctures = complex_list_from_json(j["punctures"], "config.punctures");

  if (j.contains("samples")) {
    const json& s = j["samples"];
    check_keys(s, {"x", "y_grid", "y_inside", "nu_base"}, "samples");
    if (s.contains("x")) c.x_samples = complex_list_from_json(s["x"], "samples.x");
    if (s.contains("y_grid")) c.y_grid = complex_list_from_json(s["y_grid"], "samples.y_grid");
    if (s.contains("y_inside")) c.y_inside = complex_from_json(s["y_inside"], "samples.y_inside");
    if (s.contains("nu_base")) c.nu_base = complex_from_json(s["nu_base"], "samples.nu_base");
  }
  if (j.contains("residue")) {
    const json& s = j["residue"];
    check_keys(s, {"radius", "nodes"}, "residue");
    c.residue_radius = read_number(s, "radius", c.residue_radius, "residue");
    c.residue_nodes = read_number(s, "nodes", c.residue_nodes, "residue");
  }
  if (j.contains("cocycle")) {
    const json& s = j["cocycle"];
    check_keys(s, {"pairs", "max_len", "sewing_points"}, "cocycle");
    c.cocycle_pairs = read_number(s, "pairs", c.cocycle_pairs, "cocycle");
    c.cocycle_max_len = read_number(s, "max_len", c.cocycle_max_len, "cocycle");
    c.sewing_points = read_number(s, "sewing_points", c.sewing_points, "cocycle");
  }
  if (j.contains("rank")) {
    if (!j["rank"].is_array()) throw ConfigError("rank: expected a list of cases");
    c.rank_cases.clear();
    for (std::size_t i = 0; i < j["rank"].size(); ++i) {
      const json& s = j["rank"][i];
      const std::string at = "rank[" + std::to_string(i) + "]";
      check_keys(s, {"surface", "N", "L", "expected"}, at);
      RankCase rc;
      if (s.contains("surface")) rc.surface = surface_from_json(s["surface"], at + ".surface");
      rc.N = read_number(s, "N", rc.N, at);
      if (s.contains("L")) rc.L = read_number(s, "L", 0, at);
      if (s.contains("expected")) rc.expected = read_number(s, "expected", 0, at);
      c.rank_cases.push_back(rc);
    }
  }
  if (j.contains("period")) {
    const json& s = j["period"];
    check_keys(s, {"genus_one", "genus_one_L", "transport"}, "period");
    if (s.contains("genus_one")) c.genus_one = surface_from_json(s["genus_one"], "period.genus_one");
    c.genus_one_L = read_number(s, "genus_one_L", c.genus_one_L, "period");
    if (s.contains("transport")) {
      const auto m = complex_list_from_json(s["transport"], "period.transport");
      if (m.size() != 4) throw ConfigError("period.transport: expected four entries a, b, c, d");
      for (std::size_t i = 0; i < 4; ++i) c.transport[i] = m[i];
    }
  }
  if (j.contains("duality")) {
    const json& s = j["duality"];
    check_keys(s, {"nodes", "scale"}, "duality");
    c.duality_nodes = read_number(s, "nodes", c.duality_nodes, "duality");
    c.duality_scale = read_number(s, "scale", c.duality_scale, "duality");
  }
  if (j.contains("rauch")) {
    const json& s = j["rauch"];
    check_keys(s, {"h", "order_h"}, "rauch");
    c.h = read_number(s, "h", c.h, "rauch");
    c.order_h = read_number(s, "order_h", c.order_h, "rauch");
  }
  if (j.contains("punctured")) {
    const json& s = j["punctured"];
    check_keys(s, {"words", "z", "generator"}, "punctured");
    if (s.contains("words")) {
      c.words.clear();
      for (const auto& w : s["words"]) {
        if (!w.is_array()) throw ConfigError("punctured.words: expected lists of letters");
        std::vector<int> letters;
        for (const auto& l : w) {
          if (!l.is_number_integer()) throw ConfigError("punctured.words: letters are integers");
          letters.push_back(l.get<int>());
        }
        c.words.push_back(letters);
      }
    }
    if (s.contains("z")) c.word_point = complex_from_json(s["z"], "punctured.z");
    c.covariance_generator = read_number(s, "generator", c.covariance_generator, "punctured");
  }
  if (j.contains("tolerances")) {
    const json& s = j["tolerances"];
    if (!s.is_object()) throw ConfigError("tolerances: expected an object");
    for (const auto& item : s.items()) {
      if (!c.tolerances.count(item.key())) throw ConfigError("tolerances: unknown check '" + item.key() + "'");
      if (!item.value().is_number()) throw ConfigError("tolerances." + item.key() + ": expected a number");
      c.tolerances[item.key()] = item.value().get<double>();
    }
  }
  check_config(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

/// The fully resolved configuration, defaults included.
inline json config_to_json(const RunConfig& c) {
  json j;
  j["surface"] = surface_to_json(c.surface);
  j["N"] = c.N;
  j["L"] = c.series.L;
  j["shell_tol"] = c.series.shell_tol;
  j["contour_nodes"] = c.contour_nodes;
  j["seed"] = c.seed;
  json J = json::array();
  for (auto [a, k] : c.J) J.push_back({a, k});
  j["J"] = J;
  j["punctures"] = to_json_value(c.punctures);
  j["samples"] = {{"x", to_json_value(c.x_samples)},
                  {"y_grid", to_json_value(c.y_grid)},
                  {"y_inside", to_json_value(c.y_inside)},
                  {"nu_base", to_json_value(c.nu_base)}};
  j["residue"] = {{"radius", c.residue_radius}, {"nodes", c.residue_nodes}};
  j["cocycle"] = {{"pairs", c.cocycle_pairs}, {"max_len", c.cocycle_max_len}, {"sewing_points", c.sewing_points}};
  json rank = json::array();
  for (const auto& rc : c.rank_cases) {
    json r = {{"N", rc.N}};
    if (rc.surface) r["surface"] = surface_to_json(*rc.surface);
    if (rc.L) r["L"] = *rc.L;
    if (rc.expected) r["expected"] = *rc.expected;
    rank.push_back(r);
  }
  j["rank"] = rank;
  j["period"] = {{"genus_one", surface_to_json(c.genus_one_surface())},
                 {"genus_one_L", c.genus_one_L},
                 {"transport", to_json_value(std::vector<cplx>(c.transport.begin(), c.transport.end()))}};
  j["duality"] = {{"nodes", c.duality_nodes}, {"scale", c.duality_scale}};
  j["rauch"] = {{"h", c.h}, {"order_h", c.order_h}};
  j["punctured"] = {{"words", c.words}, {"z", to_json_value(c.word_point)}, {"generator", c.covariance_generator}};
  j["tolerances"] = c.tolerances;
  return j;
}

}  // namespace schottky
