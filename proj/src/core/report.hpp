#pragma once

#include <string>

#include <json.hpp>

namespace smim::io {

using json = nlohmann::ordered_json;  // stable field order in reports

const char* version();
std::string build_stamp();  // version + toolchain tag

// Serialization helper: JSON with stable key order and full double precision.
std::string dump_report(const json& j);

// Strips fields that are excluded from the determinism contract (wall times).
json strip_timings(json j);

}  // namespace smim::io
