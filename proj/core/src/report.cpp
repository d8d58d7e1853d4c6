#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "strainsim/scenario.hpp"

namespace strainsim::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<ScenarioResult> load_results(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "summary.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioResult> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(f.string() + ": " + e.what());
    }
    ScenarioResult r = result_from_json(doc);
    r.out_dir = f.parent_path();
    out.push_back(std::move(r));
  }
  return out;
}

Report emit_report(std::span<const ScenarioResult> results) {
  if (results.empty()) throw UsageError("report needs at least one scenario result");
  Report rep;
  json scenarios = json::array();
  int passed = 0, failed = 0;
  std::ostringstream t;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-34s %14s  %-26s %-6s\n", "scenario", "anchor", "value", "band", "result");
  t << line;
  for (const auto& r : results) {
    json s = to_json(r);
    s.erase("input");
    scenarios.push_back(std::move(s));
    for (const auto& a : r.anchors) {
      (a.pass ? passed : failed) += 1;
      const std::string band = "[" + (std::isfinite(a.lo) ? fmt(a.lo) : std::string("-inf")) + ", " +
                               (std::isfinite(a.hi) ? fmt(a.hi) : std::string("inf")) + "]" +
                               (a.unit.empty() ? "" : " " + a.unit);
      std::snprintf(line, sizeof line, "%-22s %-34s %14s  %-26s %-6s\n", r.name.c_str(), a.name.c_str(),
                    fmt(a.value).c_str(), band.c_str(), a.pass ? "PASS" : "FAIL");
      t << line;
    }
  }
  t << passed << " passed, " << failed << " failed\n";
  rep.document = {{"scenarios", scenarios}, {"passed", passed}, {"failed", failed}};
  rep.table = t.str();
  return rep;
}

}  // namespace strainsim::scenario
