// pressure-lab: orbit statistics, entropy, intersection, cross-ratio, and
// pressure-form experiments for free-group representations.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "preslab/crossratio.hpp"
#include "preslab/family.hpp"
#include "preslab/length_functional.hpp"
#include "preslab/orbit_table.hpp"
#include "preslab/representation.hpp"
#include "preslab/subshift.hpp"
#include "preslab/word.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace preslab;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kCacheMagic = "preslab-cache";
constexpr int kCacheVersion = 1;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// configuration

struct RunParams {
  int max_len = 10;
  int depth = 4;
  int flag_depth = 12;
  int cert_len = 6;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  double step = 2e-2;
  bool primitive_only = true;
};

struct RepSpec {
  std::string label;
  std::vector<std::vector<std::vector<std::string>>> matrices;  // [gen][row][col]
  int symmetric_power = 0;  // 0: as given
  json raw;
};

struct FamilySpec {
  std::string label;
  int params = 0;
  std::vector<std::vector<std::vector<std::string>>> matrices;
  std::vector<double> base;
  std::vector<std::pair<double, double>> box;
  std::vector<Eigen::MatrixXd> conj_directions;
  int symmetric_power = 0;
};

struct ExperimentConfig {
  int rank = 2;
  std::vector<RepSpec> reps;
  std::optional<FamilySpec> family;
  std::string alpha = "a", beta = "b";
  RunParams run;
  std::string out_dir = ".";
  std::string cache_path;
  std::string config_hash;
};

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: " + path + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("config: unknown key '" + path + "." + it.key() + "'");
  }
}

std::string entry_string(const json& cell) {
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number()) return cell.dump();
  throw ConfigError("config: matrix entries must be strings or numbers");
}

std::vector<std::vector<std::vector<std::string>>> parse_matrices(const json& j,
                                                                  const std::string& path) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config: " + path + " must be a nonempty array of matrices");
  std::vector<std::vector<std::vector<std::string>>> out;
  for (std::size_t g = 0; g < j.size(); ++g) {
    const json& m = j[g];
    if (!m.is_array() || m.empty())
      throw ConfigError("config: " + path + "[" + std::to_string(g) + "] must be a matrix");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < m.size(); ++r) {
      const json& row = m[r];
      if (!row.is_array() || row.size() != m.size())
        throw ConfigError("config: " + path + "[" + std::to_string(g) + "] row " +
                          std::to_string(r) + " is not square");
      std::vector<std::string> cells;
      for (std::size_t c = 0; c < row.size(); ++c) {
        try {
          cells.push_back(entry_string(row[c]));
        } catch (const ConfigError& e) {
          throw ConfigError(std::string(e.what()) + " (at " + path + "[" +
                            std::to_string(g) + "] row " + std::to_string(r) + " col " +
                            std::to_string(c) + ")");
        }
      }
      rows.push_back(std::move(cells));
    }
    out.push_back(std::move(rows));
  }
  return out;
}

// exact numeric parse of a constant matrix entry, with position diagnostics
double entry_value(const std::string& s, const std::string& where) {
  try {
    return parse_exact_number(s);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (at " + where + ")");
  }
}

Representation build_rep(const RepSpec& spec, int rank) {
  if (static_cast<int>(spec.matrices.size()) != rank)
    throw ConfigError("config: representation '" + spec.label + "' has " +
                      std::to_string(spec.matrices.size()) + " generators, group rank is " +
                      std::to_string(rank));
  std::vector<Eigen::MatrixXd> gens;
  for (std::size_t g = 0; g < spec.matrices.size(); ++g) {
    const auto& m = spec.matrices[g];
    Eigen::MatrixXd mat(m.size(), m.size());
    for (std::size_t r = 0; r < m.size(); ++r)
      for (std::size_t c = 0; c < m.size(); ++c)
        mat(static_cast<int>(r), static_cast<int>(c)) =
            entry_value(m[r][c], spec.label + " generator " + std::to_string(g) + " row " +
                                     std::to_string(r) + " col " + std::to_string(c));
    gens.push_back(std::move(mat));
  }
  Representation rep(std::move(gens), spec.label);
  if (spec.symmetric_power > 0) rep = symmetric_power_rep(rep, spec.symmetric_power);
  return rep;
}

RepFamily build_family(const FamilySpec& spec, int rank) {
  if (static_cast<int>(spec.matrices.size()) != rank)
    throw ConfigError("config: family generator count does not match group rank");
  RepFamily fam = RepFamily::parse(spec.matrices, spec.params, spec.label);
  if (spec.symmetric_power > 0) fam = RepFamily::symmetric_power(fam, spec.symmetric_power);
  if (!spec.conj_directions.empty())
    fam = RepFamily::conjugation(std::move(fam), spec.conj_directions);
  if (!spec.box.empty()) fam.with_box(spec.box);
  if (static_cast<int>(spec.base.size()) != fam.n_params())
    throw ConfigError("config: family.base has " + std::to_string(spec.base.size()) +
                      " entries, family has " + std::to_string(fam.n_params()) +
                      " parameters");
  return fam;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "$", {"group", "representations", "family", "words", "run", "output"});
  ExperimentConfig cfg;
  cfg.config_hash = hex64(fnv1a(j.dump()));

  if (!j.contains("group")) throw ConfigError("config: missing 'group'");
  check_keys(j.at("group"), "group", {"rank"});
  cfg.rank = j.at("group").value("rank", 2);

  if (j.contains("representations")) {
    const json& reps = j.at("representations");
    if (!reps.is_array()) throw ConfigError("config: 'representations' must be an array");
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const json& r = reps[i];
      check_keys(r, "representations[" + std::to_string(i) + "]",
                 {"label", "matrices", "symmetric_power"});
      RepSpec spec;
      spec.label = r.value("label", "rep" + std::to_string(i));
      if (!r.contains("matrices"))
        throw ConfigError("config: representation '" + spec.label + "' missing matrices");
      spec.matrices =
          parse_matrices(r.at("matrices"), "representations[" + std::to_string(i) + "]");
      spec.symmetric_power = r.value("symmetric_power", 0);
      spec.raw = r;
      cfg.reps.push_back(std::move(spec));
    }
  }

  if (j.contains("family")) {
    const json& f = j.at("family");
    check_keys(f, "family",
               {"label", "params", "matrices", "base", "box", "conjugation_directions",
                "symmetric_power"});
    FamilySpec spec;
    spec.label = f.value("label", "family");
    spec.params = f.value("params", 0);
    if (!f.contains("matrices")) throw ConfigError("config: family missing matrices");
    spec.matrices = parse_matrices(f.at("matrices"), "family");
    if (f.contains("base")) spec.base = f.at("base").get<std::vector<double>>();
    if (f.contains("box"))
      for (const auto& b : f.at("box"))
        spec.box.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    if (f.contains("conjugation_directions"))
      for (const auto& d : f.at("conjugation_directions")) {
        Eigen::MatrixXd x(d.size(), d.size());
        for (std::size_t r = 0; r < d.size(); ++r)
          for (std::size_t c = 0; c < d.size(); ++c)
            x(static_cast<int>(r), static_cast<int>(c)) = d[r][c].get<double>();
        spec.conj_directions.push_back(std::move(x));
      }
    spec.symmetric_power = f.value("symmetric_power", 0);
    cfg.family = std::move(spec);
  }

  if (j.contains("words")) {
    check_keys(j.at("words"), "words", {"alpha", "beta"});
    cfg.alpha = j.at("words").value("alpha", "a");
    cfg.beta = j.at("words").value("beta", "b");
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    check_keys(r, "run",
               {"max_len", "depth", "flag_depth", "cert_len", "threads", "seed", "step",
                "primitive_only"});
    cfg.run.max_len = r.value("max_len", cfg.run.max_len);
    cfg.run.depth = r.value("depth", cfg.run.depth);
    cfg.run.flag_depth = r.value("flag_depth", cfg.run.flag_depth);
    cfg.run.cert_len = r.value("cert_len", cfg.run.cert_len);
    cfg.run.threads = r.value("threads", cfg.run.threads);
    cfg.run.seed = r.value("seed", cfg.run.seed);
    cfg.run.step = r.value("step", cfg.run.step);
    cfg.run.primitive_only = r.value("primitive_only", cfg.run.primitive_only);
  }

  if (j.contains("output")) {
    check_keys(j.at("output"), "output", {"dir", "cache"});
    cfg.out_dir = j.at("output").value("dir", cfg.out_dir);
    cfg.cache_path = j.at("output").value("cache", cfg.cache_path);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// class cache: versioned JSON-lines keyed by (representation hash, max_len)

struct SpecRow {
  double logL = 0;
  double sign = 1;
  double gap = 0;
};

class ClassCache {
 public:
  explicit ClassCache(std::string path) : path_(std::move(path)) {
    if (path_.empty() || !fs::exists(path_)) return;
    std::ifstream in(path_);
    std::string line;
    if (!std::getline(in, line)) return;
    try {
      json header = json::parse(line);
      if (header.value("magic", "") != kCacheMagic ||
          header.value("version", -1) != kCacheVersion) {
        std::cerr << "warning: cache " << path_ << " has wrong magic/version, ignoring\n";
        return;
      }
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        json e = json::parse(line);
        entries_[e.at("key").get<std::string>()][e.at("class").get<std::string>()] = {
            e.at("logL").get<double>(), e.at("sign").get<double>(),
            e.at("gap").get<double>()};
      }
    } catch (const json::exception&) {
      std::cerr << "warning: cache " << path_ << " is corrupt, ignoring\n";
      entries_.clear();
    }
  }

  bool lookup(const std::string& key, const std::vector<ConjClass>& classes,
              std::vector<SpecRow>& rows) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    rows.clear();
    for (const auto& c : classes) {
      auto e = it->second.find(c.rep.str());
      if (e == it->second.end()) return false;
      rows.push_back(e->second);
    }
    return true;
  }

  void store(const std::string& key, const std::vector<ConjClass>& classes,
             const std::vector<SpecRow>& rows) {
    if (path_.empty()) return;
    auto& bucket = entries_[key];
    for (std::size_t i = 0; i < classes.size(); ++i) bucket[classes[i].rep.str()] = rows[i];
    std::ofstream out(path_, std::ios::trunc);
    out << json{{"magic", kCacheMagic}, {"version", kCacheVersion}}.dump() << "\n";
    for (const auto& [k, m] : entries_)
      for (const auto& [cls, row] : m)
        out << json{{"key", k},
                    {"class", cls},
                    {"logL", row.logL},
                    {"sign", row.sign},
                    {"gap", row.gap}}
                .dump()
            << "\n";
  }

 private:
  std::string path_;
  std::map<std::string, std::map<std::string, SpecRow>> entries_;
};

std::string rep_cache_key(const RepSpec& spec, int max_len) {
  return hex64(fnv1a(spec.raw.dump() + "#" + std::to_string(max_len)));
}

std::vector<SpecRow> spectral_rows(const Representation& rep,
                                   const std::vector<ConjClass>& classes,
                                   unsigned threads) {
  std::vector<SpecRow> rows(classes.size());
  parallel_for(
      classes.size(),
      [&](std::size_t i) {
        auto sd = spectral_data(rep, classes[i].rep);
        rows[i] = {sd.log_radius, static_cast<double>(sd.signed_top), sd.gap};
      },
      threads);
  return rows;
}

std::vector<SpecRow> cached_spectral_rows(const ExperimentConfig& cfg, ClassCache& cache,
                                          const RepSpec& spec, const Representation& rep,
                                          const std::vector<ConjClass>& classes) {
  std::string key = rep_cache_key(spec, cfg.run.max_len);
  std::vector<SpecRow> rows;
  if (cache.lookup(key, classes, rows)) {
    std::cout << "cache hit for " << spec.label << " (key " << key << ")\n";
    return rows;
  }
  std::cout << "cache miss for " << spec.label << " (key " << key << ")\n";
  rows = spectral_rows(rep, classes, cfg.run.threads);
  cache.store(key, classes, rows);
  return rows;
}

// ---------------------------------------------------------------------------
// output helpers

json meta_block(const ExperimentConfig& cfg) {
  return {{"version", kVersion},
          {"config_hash", cfg.config_hash},
          {"seed", cfg.run.seed}};
}

fs::path out_file(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

void write_json(const ExperimentConfig& cfg, const std::string& name, json body) {
  body["meta"] = meta_block(cfg);
  auto path = out_file(cfg, name);
  std::ofstream(path) << body.dump(2) << "\n";
  std::cout << "wrote " << path.string() << "\n";
}

std::string csv_header_comment(const ExperimentConfig& cfg) {
  return std::string("# pressure-lab ") + kVersion + " config " + cfg.config_hash + "\n";
}

// ---------------------------------------------------------------------------
// verbs

void cmd_enumerate(const ExperimentConfig& cfg) {
  auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
  ClassCache cache(cfg.cache_path);
  std::vector<std::pair<std::string, std::vector<SpecRow>>> columns;
  for (const auto& spec : cfg.reps) {
    Representation rep = build_rep(spec, cfg.rank);
    columns.emplace_back(spec.label, cached_spectral_rows(cfg, cache, spec, rep, classes));
  }
  auto path = out_file(cfg, "enumerate.csv");
  std::ofstream out(path);
  out << csv_header_comment(cfg);
  out << "class,length,primitive";
  for (const auto& [label, _] : columns) out << ",logL_" << label;
  out << "\n";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out << classes[i].rep.str() << "," << classes[i].length << ","
        << (classes[i].primitive ? 1 : 0);
    for (const auto& [_, rows] : columns) out << "," << fmt_double(rows[i].logL);
    out << "\n";
  }
  std::cout << "wrote " << path.string() << " (" << classes.size() << " classes)\n";
}

void cmd_spectrum(const ExperimentConfig& cfg) {
  if (cfg.reps.empty()) throw ConfigError("spectrum: no representations configured");
  auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
  ClassCache cache(cfg.cache_path);
  for (const auto& spec : cfg.reps) {
    Representation rep = build_rep(spec, cfg.rank);
    auto rows = cached_spectral_rows(cfg, cache, spec, rep, classes);
    auto path = out_file(cfg, "spectrum_" + spec.label + ".csv");
    std::ofstream out(path);
    out << csv_header_comment(cfg);
    out << "class,length,primitive,logL,sign,gap\n";
    for (std::size_t i = 0; i < classes.size(); ++i)
      out << classes[i].rep.str() << "," << classes[i].length << ","
          << (classes[i].primitive ? 1 : 0) << "," << fmt_double(rows[i].logL) << ","
          << fmt_double(rows[i].sign) << "," << fmt_double(rows[i].gap) << "\n";
    std::cout << "wrote " << path.string() << "\n";
  }
}

json entropy_count_block(const OrbitTable& table, std::size_t f, bool primitive_only) {
  auto e = entropy_count(table, f, primitive_only);
  json counts = json::array();
  for (auto [t, n] : e.counts) counts.push_back({{"T", t}, {"count", n}});
  return {{"h", e.h},           {"h_raw", e.h_raw},
          {"stderr", e.stderr_}, {"window", {e.window_lo, e.window_hi}},
          {"classes", e.classes_in_window}, {"counts", counts}};
}

json depth_table(int rank, int max_depth, const Representation* rep, int flag_depth) {
  json table = json::array();
  for (int d = 2; d <= max_depth; ++d) {
    auto shift = build_subshift(rank, d);
    EdgeWeights w;
    if (rep) {
      CocycleSampler cs(*rep, flag_depth);
      w = cylinder_weights(shift, cs);
    } else {
      w = constant_weights(shift, 1.0);
    }
    table.push_back({{"depth", d}, {"h_root", entropy_root(shift, w)}});
  }
  return table;
}

void cmd_entropy(const ExperimentConfig& cfg) {
  auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
  ClassCache cache(cfg.cache_path);
  json report;
  {
    // word-length functional: both routes, root is exactly log(2k-1)
    auto table = build_orbit_table(classes, {LengthFunctional::word_length()});
    json block;
    try {
      block["h_count"] = entropy_count_block(table, 0, cfg.run.primitive_only);
    } catch (const InsufficientData&) {
      // integer thresholds need a deeper ball than spectral functionals; a
      // word-length-only run still insists on the data
      if (cfg.reps.empty()) throw;
      block["h_count"] = {{"insufficient_data", true}};
    }
    block["depth_table"] = depth_table(cfg.rank, cfg.run.depth, nullptr, 0);
    block["h_root"] = block["depth_table"].back().at("h_root");
    report["word_length"] = block;
  }
  for (const auto& spec : cfg.reps) {
    Representation rep = build_rep(spec, cfg.rank);
    auto rows = cached_spectral_rows(cfg, cache, spec, rep, classes);
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].logL;
    auto table = build_orbit_table(classes, {col}, {spec.label});
    json block;
    block["h_count"] = entropy_count_block(table, 0, cfg.run.primitive_only);
    block["depth_table"] = depth_table(cfg.rank, cfg.run.depth, &rep, cfg.run.flag_depth);
    block["h_root"] = block["depth_table"].back().at("h_root");
    block["route_gap"] = std::abs(block["h_count"].at("h").get<double>() -
                                  block["h_root"].get<double>());
    report[spec.label] = block;
  }
  write_json(cfg, "entropy.json", std::move(report));
}

json intersection_block(const OrbitTable& table, std::size_t f, std::size_t g,
                        bool primitive_only) {
  auto est = intersection(table, f, g, primitive_only);
  json partial = json::array();
  for (auto [t, i] : est.partial) partial.push_back({{"T", t}, {"I_T", i}});
  return {{"intersection", est.intersection},
          {"j", est.j},
          {"trend", est.trend},
          {"h_f", est.h_f},
          {"h_g", est.h_g},
          {"partial", partial}};
}

void cmd_intersection(const ExperimentConfig& cfg) {
  auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
  ClassCache cache(cfg.cache_path);
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  if (cfg.reps.empty()) {
    throw ConfigError("intersection: need at least one representation");
  }
  if (cfg.reps.size() == 1) {
    auto wl = build_orbit_table(classes, {LengthFunctional::word_length()});
    cols.push_back(wl.values[0]);
    names.push_back("word_length");
  }
  for (const auto& spec : cfg.reps) {
    Representation rep = build_rep(spec, cfg.rank);
    auto rows = cached_spectral_rows(cfg, cache, spec, rep, classes);
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].logL;
    cols.push_back(std::move(col));
    names.push_back(spec.label);
  }
  auto table = build_orbit_table(classes, cols, names);
  json report;
  for (std::size_t f = 0; f < cols.size(); ++f)
    for (std::size_t g = 0; g < cols.size(); ++g) {
      if (f == g) continue;
      report[names[f] + "|" + names[g]] =
          intersection_block(table, f, g, cfg.run.primitive_only);
    }
  write_json(cfg, "intersection.json", std::move(report));
}

void cmd_jmetric(const ExperimentConfig& cfg) {
  json report;
  if (cfg.reps.size() >= 2) {
    auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
    ClassCache cache(cfg.cache_path);
    std::vector<std::vector<double>> cols;
    std::vector<std::string> names;
    for (const auto& spec : cfg.reps) {
      Representation rep = build_rep(spec, cfg.rank);
      auto rows = cached_spectral_rows(cfg, cache, spec, rep, classes);
      std::vector<double> col(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].logL;
      cols.push_back(std::move(col));
      names.push_back(spec.label);
    }
    auto table = build_orbit_table(classes, cols, names);
    json pairs;
    for (std::size_t f = 0; f < cols.size(); ++f)
      for (std::size_t g = 0; g < cols.size(); ++g) {
        if (f == g) continue;
        pairs[names[f] + "|" + names[g]] =
            intersection_block(table, f, g, cfg.run.primitive_only);
      }
    report["pairs"] = pairs;
  }
  if (cfg.family) {
    RepFamily fam = build_family(*cfg.family, cfg.rank);
    FamilyRunConfig frc;
    frc.max_len = cfg.run.max_len;
    frc.cert_len = cfg.run.cert_len;
    frc.depth = cfg.run.depth;
    frc.flag_depth = cfg.run.flag_depth;
    frc.step = cfg.run.step;
    FamilyWorkspace ws(fam, cfg.family->base, frc);
    const int d = fam.n_params();
    std::vector<std::vector<double>> basis;
    for (int i = 0; i < d; ++i) {
      std::vector<double> e(static_cast<std::size_t>(d), 0.0);
      e[static_cast<std::size_t>(i)] = 1.0;
      basis.push_back(std::move(e));
    }
    json first = json::array();
    for (int i = 0; i < d; ++i)
      first.push_back(first_derivative_check(ws, basis[static_cast<std::size_t>(i)],
                                             cfg.run.step));
    auto pf = pressure_form(ws, basis, cfg.run.step);
    json matrix = json::array();
    for (int i = 0; i < d; ++i) {
      json row = json::array();
      for (int j = 0; j < d; ++j) row.push_back(pf.matrix(i, j));
      matrix.push_back(row);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pf.matrix);
    json eigs = json::array();
    int gauge_null = 0;
    double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 0; i < d; ++i) {
      eigs.push_back(es.eigenvalues()(i));
      if (std::abs(es.eigenvalues()(i)) < 1e-9 * scale) ++gauge_null;
    }
    report["family"] = {{"label", cfg.family->label},
                       {"base", cfg.family->base},
                       {"h", ws.base_entropy()},
                       {"step", cfg.run.step},
                       {"first_derivative_residuals", first},
                       {"pressure_form", matrix},
                       {"quad_residuals", pf.quad_residuals},
                       {"eigenvalues", eigs},
                       {"psd", es.eigenvalues()(0) >= -1e-9 * scale},
                       {"gauge_null_count", gauge_null}};
  }
  if (report.empty())
    throw ConfigError("jmetric: need two representations or a family");
  write_json(cfg, "jmetric.json", std::move(report));
}

void cmd_crossratio(const ExperimentConfig& cfg) {
  if (cfg.reps.empty()) throw ConfigError("crossratio: no representations configured");
  ConjClass alpha = class_representative(Word::parse(cfg.alpha));
  ConjClass beta = class_representative(Word::parse(cfg.beta));
  json report;
  for (const auto& spec : cfg.reps) {
    Representation rep = build_rep(spec, cfg.rank);
    auto r = fixed_point_cross_ratio(rep, alpha, beta);
    json block = {{"value", r.value},
                  {"trace", r.trace},
                  {"word_trace", r.word_trace},
                  {"discrepancy", r.discrepancy}};
    auto seq = cr_product_limit(rep, alpha, beta, 12);
    json limit = json::array();
    bool geometric = true;
    for (std::size_t n = 0; n < seq.size(); ++n) {
      double err = std::abs(seq[n] - r.value);
      limit.push_back({{"n", n + 1}, {"value", seq[n]}, {"error", err}});
      if (n >= 4) {
        double prev = std::abs(seq[n - 1] - r.value);
        geometric = geometric && err <= 0.9 * prev;
      }
    }
    block["product_limit"] = limit;
    block["geometric_decay"] = geometric;

    // chi scan over a letter-spread default class battery
    std::vector<ConjClass> e, u;
    for (const char* s : {"a", "ab", "AAB", "Abb", "aabb"})
      e.push_back(class_representative(Word::parse(s)));
    for (const char* s : {"b", "Ab", "aaB", "ABB", "abaB"})
      u.push_back(class_representative(Word::parse(s)));
    json chi = json::array();
    int p_max = std::min(4, static_cast<int>(e.size()) - 1);
    for (int p = 1; p <= p_max; ++p)
      chi.push_back({{"p", p}, {"chi", chi_test(rep, e, u, p)}});
    block["chi"] = chi;
    block["detected_dimension"] = detected_dimension(rep, e, u, p_max);
    report[spec.label] = block;
  }
  write_json(cfg, "crossratio.json", std::move(report));
}

json certify_block(const Representation& rep, const std::vector<ConjClass>& classes) {
  auto rpt = certify_anosov(rep, classes);
  return {{"n_classes", rpt.n_classes},
          {"n_failures", rpt.n_failures},
          {"failed", rpt.failed},
          {"delta", rpt.delta},
          {"delta_c", rpt.delta_c},
          {"displacement_k", rpt.displacement.k},
          {"displacement_c", rpt.displacement.c},
          {"sandwich_violations", rpt.sandwich_violations},
          {"transversality_margin", rpt.transversality_margin},
          {"certified", rpt.certified}};
}

void cmd_certify(const ExperimentConfig& cfg) {
  if (cfg.reps.empty()) throw ConfigError("certify: no representations configured");
  auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
  json report;
  for (const auto& spec : cfg.reps)
    report[spec.label] = certify_block(build_rep(spec, cfg.rank), classes);
  write_json(cfg, "certify.json", std::move(report));
}

void cmd_report(const ExperimentConfig& cfg) {
  auto classes = enumerate_classes(cfg.rank, cfg.run.max_len);
  ClassCache cache(cfg.cache_path);
  json report;
  report["group"] = {{"rank", cfg.rank}, {"classes", classes.size()},
                     {"max_len", cfg.run.max_len}};
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (const auto& spec : cfg.reps) {
    Representation rep = build_rep(spec, cfg.rank);
    auto rows = cached_spectral_rows(cfg, cache, spec, rep, classes);
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].logL;
    auto table = build_orbit_table(classes, {col}, {spec.label});
    json block;
    block["certification"] = certify_block(rep, classes);
    block["h_count"] = entropy_count(table, 0, cfg.run.primitive_only).h;
    auto shift = build_subshift(cfg.rank, cfg.run.depth);
    CocycleSampler cs(rep, cfg.run.flag_depth);
    block["h_root"] = entropy_root(shift, cylinder_weights(shift, cs));
    report[spec.label] = block;
    cols.push_back(std::move(col));
    names.push_back(spec.label);
  }
  if (cols.size() >= 2) {
    auto table = build_orbit_table(classes, cols, names);
    json pairs;
    for (std::size_t f = 0; f < cols.size(); ++f)
      for (std::size_t g = f + 1; g < cols.size(); ++g) {
        auto est = intersection(table, f, g, cfg.run.primitive_only);
        pairs[names[f] + "|" + names[g]] = {{"intersection", est.intersection},
                                            {"j", est.j}};
      }
    report["pairs"] = pairs;
  }
  write_json(cfg, "report.json", std::move(report));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pressure-lab: dynamical invariants of convex Anosov representations"};
  app.require_subcommand(1);

  std::string config_path, cache_path, out_dir;
  int max_len = -1, depth = -1, flag_depth = -1;
  unsigned threads = 0;
  bool threads_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;

  std::vector<CLI::App*> subs;
  for (const char* verb : {"enumerate", "spectrum", "entropy", "intersection", "jmetric",
                           "crossratio", "certify", "report"}) {
    CLI::App* s = app.add_subcommand(verb);
    s->add_option("--config", config_path, "experiment configuration file")->required();
    s->add_option("--max-len", max_len, "override run.max_len");
    s->add_option("--depth", depth, "override run.depth");
    s->add_option("--flag-depth", flag_depth, "override run.flag_depth");
    s->add_option("--threads", threads, "override run.threads")
        ->each([&](const std::string&) { threads_set = true; });
    s->add_option("--cache", cache_path, "class cache file");
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--seed", seed, "override run.seed")
        ->each([&](const std::string&) { seed_set = true; });
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    json raw;
    try {
      raw = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    ExperimentConfig cfg = parse_config(raw);
    if (max_len >= 0) cfg.run.max_len = max_len;
    if (depth >= 0) cfg.run.depth = depth;
    if (flag_depth >= 0) cfg.run.flag_depth = flag_depth;
    if (threads_set) cfg.run.threads = threads;
    if (seed_set) cfg.run.seed = seed;
    if (!cache_path.empty()) cfg.cache_path = cache_path;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    const std::string verb = app.get_subcommands().front()->get_name();
    if (verb == "enumerate")
      cmd_enumerate(cfg);
    else if (verb == "spectrum")
      cmd_spectrum(cfg);
    else if (verb == "entropy")
      cmd_entropy(cfg);
    else if (verb == "intersection")
      cmd_intersection(cfg);
    else if (verb == "jmetric")
      cmd_jmetric(cfg);
    else if (verb == "crossratio")
      cmd_crossratio(cfg);
    else if (verb == "certify")
      cmd_certify(cfg);
    else if (verb == "report")
      cmd_report(cfg);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what()
              << " (increase max_len or relax the budget)\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
