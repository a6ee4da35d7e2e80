#include "fbm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fbm/numerics.hpp"

namespace fbm::io {

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open \"" + path + "\"");
  try {
    return json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: \"" + path + "\": " + e.what());
  }
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("io: cannot write \"" + path + "\"");
  out << j.dump(2) << '\n';
}

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& item : obj.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw std::invalid_argument(where + ": unknown key \"" + item.key() + "\"");
}

namespace {

const json* field(const json& obj, const std::string& key, const std::string& where,
                  bool required) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw std::invalid_argument(where + ": missing key \"" + key + "\"");
    return nullptr;
  }
  return &*it;
}

double as_double(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_number()) throw std::invalid_argument(where + ": key \"" + key + "\" must be a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& key, const std::string& where) {
  if (!v.is_number_integer())
    throw std::invalid_argument(where + ": key \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

double req_double(const json& obj, const std::string& key, const std::string& where) {
  return as_double(*field(obj, key, where, true), key, where);
}

double opt_double(const json& obj, const std::string& key, double def, const std::string& where) {
  const json* v = field(obj, key, where, false);
  return v ? as_double(*v, key, where) : def;
}

std::int64_t req_int(const json& obj, const std::string& key, const std::string& where) {
  return as_int(*field(obj, key, where, true), key, where);
}

std::int64_t opt_int(const json& obj, const std::string& key, std::int64_t def,
                     const std::string& where) {
  const json* v = field(obj, key, where, false);
  return v ? as_int(*v, key, where) : def;
}

std::uint64_t opt_u64(const json& obj, const std::string& key, std::uint64_t def,
                      const std::string& where) {
  const json* v = field(obj, key, where, false);
  if (!v) return def;
  if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                  v->get<std::int64_t>() < 0))
    throw std::invalid_argument(where + ": key \"" + key + "\" must be a non-negative integer");
  return v->get<std::uint64_t>();
}

std::string opt_string(const json& obj, const std::string& key, const std::string& def,
                       const std::string& where) {
  const json* v = field(obj, key, where, false);
  if (!v) return def;
  if (!v->is_string()) throw std::invalid_argument(where + ": key \"" + key + "\" must be a string");
  return v->get<std::string>();
}

bool opt_bool(const json& obj, const std::string& key, bool def, const std::string& where) {
  const json* v = field(obj, key, where, false);
  if (!v) return def;
  if (!v->is_boolean())
    throw std::invalid_argument(where + ": key \"" + key + "\" must be a boolean");
  return v->get<bool>();
}

std::vector<double> req_double_array(const json& obj, const std::string& key,
                                     const std::string& where) {
  const json& v = *field(obj, key, where, true);
  if (!v.is_array())
    throw std::invalid_argument(where + ": key \"" + key + "\" must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number())
      throw std::invalid_argument(where + ": key \"" + key + "\" must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json drift_to_json(const besov::BesovDrift& g) {
  json dirs = json::array();
  for (int j = 0; j <= g.J; ++j) dirs.push_back(g.direction(j));
  return json{{"alpha", g.alpha}, {"J", g.J},       {"A", g.A},        {"d", g.d},
              {"seed", g.seed},   {"phases", g.phases}, {"directions", dirs}};
}

besov::BesovDrift drift_from_json(const json& j) {
  const std::string where = "drift json";
  require_keys(j, {"alpha", "J", "A", "d", "seed", "phases", "directions"}, where);
  double alpha = req_double(j, "alpha", where);
  auto J = req_int(j, "J", where);
  double A = req_double(j, "A", where);
  auto d = req_int(j, "d", where);
  std::uint64_t seed = opt_u64(j, "seed", 0, where);
  auto phases = req_double_array(j, "phases", where);
  besov::BesovDrift g = besov::make_lacunary_drift(alpha, static_cast<int>(J), A,
                                                   static_cast<int>(d), seed);
  if (phases.size() != g.phases.size())
    throw std::invalid_argument(where + ": phases must hold (J+1)*d entries");
  g.phases = phases;
  const json& dirs = *field(j, "directions", where, true);
  if (!dirs.is_array() || dirs.size() != static_cast<std::size_t>(J) + 1)
    throw std::invalid_argument(where + ": directions must hold J+1 entries");
  for (int k = 0; k <= J; ++k)
    if (!dirs[k].is_number_integer() || dirs[k].get<std::int64_t>() != g.direction(k))
      throw std::invalid_argument(where + ": directions must cycle the coordinate axes");
  return g;
}

void write_table(const std::string& path, const Table& t, const std::string& format) {
  for (const auto& row : t.rows)
    if (row.size() != t.header.size())
      throw std::invalid_argument("write_table: row width does not match the header");
  if (format == "csv") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("io: cannot write \"" + path + "\"");
    for (std::size_t c = 0; c < t.header.size(); ++c)
      out << (c ? "," : "") << t.header[c];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << format_double(row[c]);
      out << '\n';
    }
    return;
  }
  if (format == "json") {
    save_json_file(path, json{{"header", t.header}, {"rows", t.rows}});
    return;
  }
  throw std::invalid_argument("write_table: format must be \"csv\" or \"json\"");
}

namespace {

void append_components(Table& t, const std::string& stem, int d) {
  for (int c = 0; c < d; ++c) t.header.push_back(stem + "_" + std::to_string(c + 1));
}

}  // namespace

Table path_table(const core::FbmPath& p) {
  const int d = p.par.d;
  Table t;
  t.header.push_back("t");
  append_components(t, "x", d);
  if (p.has_driver()) append_components(t, "db", d);
  t.rows.reserve(p.grid.n_nodes());
  for (std::size_t k = 0; k < p.grid.n_nodes(); ++k) {
    std::vector<double> row;
    row.push_back(p.grid.node(k));
    for (int c = 0; c < d; ++c) row.push_back(p.at(k, c));
    if (p.has_driver())
      for (int c = 0; c < d; ++c)
        row.push_back(k == 0 ? 0.0 : p.driver[(k - 1) * static_cast<std::size_t>(d) + c]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table past_table(const PastPath& w) {
  w.check();
  Table t;
  t.header.push_back("t");
  append_components(t, "w", w.d);
  for (std::size_t k = 0; k < w.n_nodes(); ++k) {
    std::vector<double> row;
    row.push_back(w.t[k]);
    for (int c = 0; c < w.d; ++c) row.push_back(w.at(k, c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table solution_table(const sde::SolutionPath& sol) {
  const int d = sol.x.d;
  Table t;
  t.header.push_back("t");
  append_components(t, "x", d);
  append_components(t, "theta", d);
  append_components(t, "w", d);
  for (std::size_t k = 0; k < sol.x.grid.n_nodes(); ++k) {
    std::vector<double> row;
    row.push_back(sol.x.grid.node(k));
    for (int c = 0; c < d; ++c) row.push_back(sol.x.at(k, c));
    for (int c = 0; c < d; ++c) row.push_back(sol.theta.at(k, c));
    for (int c = 0; c < d; ++c) row.push_back(sol.noise.at(k, c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table histogram_table(const ergodics::EmpiricalMeasure& m) {
  if (m.bins < 1 || m.d < 1) throw std::invalid_argument("histogram_table: empty measure");
  const double width = 2.0 * m.box / m.bins;
  Table t;
  append_components(t, "bin_lo", m.d);
  append_components(t, "bin_hi", m.d);
  t.header.push_back("count");
  std::vector<int> idx(m.d, 0);
  t.rows.reserve(m.cells());
  for (std::size_t cell = 0; cell < m.cells(); ++cell) {
    std::size_t rest = cell;
    for (int c = m.d - 1; c >= 0; --c) {
      idx[c] = static_cast<int>(rest % m.bins);
      rest /= m.bins;
    }
    std::vector<double> row;
    for (int c = 0; c < m.d; ++c) row.push_back(-m.box + idx[c] * width);
    for (int c = 0; c < m.d; ++c) row.push_back(-m.box + (idx[c] + 1) * width);
    row.push_back(static_cast<double>(m.histogram[cell]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table ladder_table(const sewing::SewingResult& r) {
  Table t;
  t.header = {"level", "increment_norm"};
  for (std::size_t k = 0; k < r.increments.size(); ++k)
    t.rows.push_back({static_cast<double>(k + 1), r.increments[k]});
  return t;
}

json sewing_summary(const sewing::SewingResult& r) {
  return json{{"rate", r.rate},
              {"r2", r.r2},
              {"exact", r.exact},
              {"levels", r.increments.size()},
              {"limit", r.limit}};
}

std::string digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("io: cannot digest \"" + path + "\"");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(num::fnv1a64(bytes)));
  return buf;
}

void add_output(Manifest& m, const std::string& dir, const std::string& name) {
  m.files.push_back(name);
  m.digests.push_back(digest_hex(dir + "/" + name));
}

json manifest_to_json(const Manifest& m) {
  json outputs = json::array();
  for (std::size_t i = 0; i < m.files.size(); ++i)
    outputs.push_back(json{{"file", m.files[i]}, {"fnv1a64", m.digests[i]}});
  return json{{"subcommand", m.subcommand},
              {"code_version", m.code_version},
              {"config", m.config},
              {"outputs", outputs}};
}

Manifest manifest_from_json(const json& j) {
  const std::string where = "manifest";
  require_keys(j, {"subcommand", "code_version", "config", "outputs"}, where);
  Manifest m;
  m.subcommand = opt_string(j, "subcommand", "", where);
  m.code_version = opt_string(j, "code_version", "", where);
  m.config = *field(j, "config", where, true);
  const json& outputs = *field(j, "outputs", where, true);
  if (!outputs.is_array()) throw std::invalid_argument(where + ": outputs must be an array");
  for (const auto& o : outputs) {
    require_keys(o, {"file", "fnv1a64"}, where + " output");
    m.files.push_back(opt_string(o, "file", "", where));
    m.digests.push_back(opt_string(o, "fnv1a64", "", where));
  }
  return m;
}

void write_manifest(const std::string& dir, const Manifest& m) {
  save_json_file(dir + "/manifest.json", manifest_to_json(m));
}

}  // namespace fbm::io
