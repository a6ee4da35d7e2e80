#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbm/besov.hpp"
#include "fbm/core.hpp"
#include "fbm/ergodics.hpp"
#include "fbm/grid.hpp"
#include "fbm/sde.hpp"
#include "fbm/sewing.hpp"

namespace fbm::io {

using json = nlohmann::json;

inline constexpr const char* kCodeVersion = "fbm-artifact 1.0.0";
inline constexpr std::int64_t kSchemaVersion = 1;

// strict UTF-8 JSON, comments rejected; open and parse errors surface as
// invalid_argument naming the path
json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

// rejects the first key of obj outside allowed, naming key and location
void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& where);

// typed field access with config-style diagnostics; where names the section
double req_double(const json& obj, const std::string& key, const std::string& where);
double opt_double(const json& obj, const std::string& key, double def, const std::string& where);
std::int64_t req_int(const json& obj, const std::string& key, const std::string& where);
std::int64_t opt_int(const json& obj, const std::string& key, std::int64_t def,
                     const std::string& where);
std::uint64_t opt_u64(const json& obj, const std::string& key, std::uint64_t def,
                      const std::string& where);
std::string opt_string(const json& obj, const std::string& key, const std::string& def,
                       const std::string& where);
bool opt_bool(const json& obj, const std::string& key, bool def, const std::string& where);
std::vector<double> req_double_array(const json& obj, const std::string& key,
                                     const std::string& where);

// 17 significant digits, round-trip exact for doubles
std::string format_double(double x);

json drift_to_json(const besov::BesovDrift& g);
besov::BesovDrift drift_from_json(const json& j);

// tabular artifact, one numeric row per record; written as CSV or as a JSON
// object {"header": [...], "rows": [[...]]}
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_table(const std::string& path, const Table& t, const std::string& format);

Table path_table(const core::FbmPath& p);            // t, x_*, db_* when present
Table past_table(const PastPath& w);                 // t, w_* with negative times
Table solution_table(const sde::SolutionPath& sol);  // t, x_*, theta_*, w_*
Table histogram_table(const ergodics::EmpiricalMeasure& m);  // bin_lo_*, bin_hi_*, count
Table ladder_table(const sewing::SewingResult& r);           // level, increment_norm
json sewing_summary(const sewing::SewingResult& r);

std::string digest_hex(const std::string& path);  // fnv1a64 of the raw file bytes

struct Manifest {
  std::string subcommand;
  json config;  // effective config: master seed, sections, derived constants
  std::string code_version = kCodeVersion;
  std::vector<std::string> files;
  std::vector<std::string> digests;
};

// records name and digest of an already-written file under dir
void add_output(Manifest& m, const std::string& dir, const std::string& name);
json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const json& j);
void write_manifest(const std::string& dir, const Manifest& m);  // dir/manifest.json

}  // namespace fbm::io
