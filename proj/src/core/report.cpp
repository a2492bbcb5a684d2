#include "core/report.hpp"

namespace smim::io {

const char* version() { return "0.1.0"; }

std::string build_stamp() {
  std::string s = std::string("smim ") + version();
#if defined(__clang__)
  s += " clang " __clang_version__;
#elif defined(__GNUC__)
  s += " gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__);
#endif
  return s;
}

std::string dump_report(const json& j) { return j.dump(2); }

json strip_timings(json j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto& [k, v] : j.items()) {
      if (k == "wall_ms" || k == "median_wall_ms" || k == "timestamp") continue;
      out[k] = strip_timings(v);
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (auto& v : j) out.push_back(strip_timings(v));
    return out;
  }
  return j;
}

}  // namespace smim::io
