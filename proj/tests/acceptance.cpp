// Acceptance battery on the reference surface: one line per criterion.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>

#include "schottky/suites.hpp"

using namespace schottky;

namespace {

struct Criterion {
  int id;
  const char* title;
  std::vector<std::string> suites;
};

const std::vector<Criterion> criteria{
    {1, "Schottky validity and conversions", {"validity"}},
    {2, "Cocycle algebra", {"cocycle"}},
    {3, "Bers series structure", {"residue"}},
    {4, "Dimension counts", {"rank"}},
    {5, "Duality and annihilation", {"duality", "coboundary"}},
    {6, "Canonical GEM", {"canonical", "gemcont"}},
    {7, "Third-kind and normalized differentials", {"nu-norm"}},
    {8, "Period matrix", {"period"}},
    {9, "Rauch variational formula", {"rauch"}},
    {10, "Punctured operator", {"punctured"}},
};

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : SCHOTTKY_CONFIG_DIR "/s_star.json";
  RunConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  const auto names = suite_names();
  set_workers(1);
  const RunReport first = run_suites(cfg, names, &std::cout);
  set_workers(2);
  const RunReport second = run_suites(cfg, names, &std::cout);

  std::map<std::string, const SuiteReport*> by_name;
  for (const auto& s : first.suites) by_name[s.name] = &s;

  bool all = true;
  std::cout << '\n';
  for (const auto& c : criteria) {
    bool ok = true;
    for (const auto& n : c.suites) {
      const auto it = by_name.find(n);
      ok = ok && it != by_name.end() && it->second->executed() && it->second->pass();
    }
    all = all && ok;
    std::printf("[%s] %2d %s\n", ok ? "PASS" : "FAIL", c.id, c.title);
  }
  const bool same = strip_run_fields(first.to_json()).dump() == strip_run_fields(second.to_json()).dump();
  all = all && same;
  std::printf("[%s] %2d %s\n", same ? "PASS" : "FAIL", 11, "Determinism across worker counts");
  return all ? 0 : 1;
}
