#include "drcc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "drcc/errors.hpp"

namespace drcc {
namespace {

using json = nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
T get(const json& doc, const char* key, const T& fallback) {
  if (!doc.contains(key) || doc[key].is_null()) return fallback;
  try {
    return doc[key].get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config.") + key + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  RunConfig cfg;
  cfg.raw = doc;
  if (!doc.contains("case")) throw ParseError("config.case: missing");
  cfg.case_path = resolve(base_dir, get<std::string>(doc, "case", ""));
  if (doc.contains("contingencies") && doc["contingencies"].is_array())
    cfg.contingencies = get<std::vector<std::string>>(doc, "contingencies", {});
  cfg.partition = get<std::vector<std::vector<std::string>>>(doc, "partition", {});
  cfg.kappas = get<std::vector<int>>(doc, "kappa", {});
  cfg.epsilon = get<double>(doc, "epsilon", cfg.epsilon);
  cfg.theta = get<double>(doc, "theta", cfg.theta);
  cfg.thetas = get<std::vector<double>>(doc, "thetas", cfg.thetas);
  cfg.method = get<std::string>(doc, "method", cfg.method);
  if (doc.contains("samples")) {
    const auto& s = doc["samples"];
    if (s.contains("file") && s["file"].is_string()) cfg.samples_file = resolve(base_dir, s["file"].get<std::string>());
    cfg.n_samples = get<Eigen::Index>(s, "n", cfg.n_samples);
    if (s.contains("seed") && !s["seed"].is_null()) cfg.seed = get<std::uint64_t>(s, "seed", 0);
  }
  if (doc.contains("validation")) cfg.n_validation = get<Eigen::Index>(doc["validation"], "n", cfg.n_validation);
  cfg.repeats = get<int>(doc, "repeats", cfg.repeats);
  cfg.jobs = get<int>(doc, "jobs", cfg.jobs);
  cfg.output = resolve(base_dir, get<std::string>(doc, "output", cfg.output.string()));
  cfg.generator = doc.value("generator", json::object());
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void validate_config(const RunConfig& cfg, const NetworkCase& net) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ValidationError("epsilon", "must lie in (0, 1)");
  if (!(cfg.theta >= 0.0)) throw ValidationError("theta", "must be nonnegative");
  for (double t : cfg.thetas)
    if (!(t >= 0.0)) throw ValidationError("thetas", "must be nonnegative");
  static const std::set<std::string> methods{"drpoly", "drbox", "scenario", "worstcase"};
  if (!methods.count(cfg.method)) throw ValidationError("method", "unknown method '" + cfg.method + "'");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < cfg.partition.size(); ++i) {
    for (const auto& id : cfg.partition[i]) {
      const std::string path = "partition[" + std::to_string(i) + "]";
      try {
        net.wind_index(id);
      } catch (const IndexOutOfRange&) {
        throw ValidationError(path, "unknown wind unit '" + id + "'");
      }
      if (!seen.insert(id).second) throw ValidationError(path, "wind unit '" + id + "' listed twice");
    }
  }
  if (!cfg.partition.empty() && seen.size() != net.wind_units.size())
    throw ValidationError("partition", "groups must cover every wind unit");
  const std::size_t groups = cfg.partition.empty() ? (net.wind_units.empty() ? 0 : 1) : cfg.partition.size();
  if (!cfg.kappas.empty() && cfg.kappas.size() != groups)
    throw ValidationError("kappa", "one value per partition group is required");
  for (std::size_t i = 0; i < cfg.kappas.size(); ++i) {
    const std::size_t size = cfg.partition.empty() ? net.wind_units.size() : cfg.partition[i].size();
    if (cfg.kappas[i] < 0 || static_cast<std::size_t>(cfg.kappas[i]) >= size)
      throw KappaOutOfRange("kappa[" + std::to_string(i) + "] = " + std::to_string(cfg.kappas[i]) +
                            " outside [0, " + std::to_string(size - 1) + "]");
  }
  if (cfg.repeats < 1) throw ValidationError("repeats", "must be at least 1");
  if (cfg.n_samples < 0 || cfg.n_validation < 0) throw ValidationError("samples.n", "must be nonnegative");
}

std::vector<Contingency> resolve_contingencies(const RunConfig& cfg, const NetworkCase& net) {
  if (cfg.contingencies.empty()) {
    const std::set<std::string> excluded(net.excluded_lines.begin(), net.excluded_lines.end());
    return enumerate_contingencies(net, excluded);
  }
  std::vector<Contingency> out;
  for (const auto& key : cfg.contingencies) {
    const Contingency c = parse_contingency(net, key);
    if (c.kind == Contingency::Kind::LineOut && !is_connected(net, static_cast<std::ptrdiff_t>(c.element)))
      throw ValidationError("contingencies", "outage of '" + key + "' disconnects the network");
    out.push_back(c);
  }
  return out;
}

PartitionSpec make_partition(const RunConfig& cfg, const NetworkCase& net) {
  std::vector<IndexGroup> groups;
  if (cfg.partition.empty()) {
    if (!net.wind_units.empty()) {
      IndexGroup all(net.wind_units.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      groups.push_back(all);
    }
  } else {
    groups = resolve_groups(net, cfg.partition);
  }
  PartitionSpec spec = box_partition(net, groups);
  validate_partition(spec, static_cast<Eigen::Index>(net.wind_units.size()));
  return spec;
}

GeneratorConfig make_generator(const RunConfig& cfg, const NetworkCase& net) {
  const auto n = static_cast<Eigen::Index>(net.wind_units.size());
  const PartitionSpec partition = make_partition(cfg, net);
  const json& g = cfg.generator;
  GeneratorConfig out;
  out.groups = partition.groups;
  out.columns = sample_columns(net);
  try {
    out.mean.resize(n);
    if (g.contains("mean") && g["mean"].is_array()) {
      const auto m = g["mean"].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(m.size()) != n) throw ValidationError("generator.mean", "one value per wind unit");
      for (Eigen::Index w = 0; w < n; ++w) out.mean[w] = m[static_cast<std::size_t>(w)];
    } else if (g.contains("mean")) {
      out.mean.setConstant(g["mean"].get<double>());
    } else {
      for (Eigen::Index w = 0; w < n; ++w) out.mean[w] = net.wind_units[static_cast<std::size_t>(w)].forecast;
    }

    out.lower.resize(n);
    out.upper.resize(n);
    if (g.contains("truncation")) {
      const auto t = g["truncation"].get<std::vector<double>>();
      if (t.size() != 2) throw ValidationError("generator.truncation", "expected [lower, upper]");
      out.lower.setConstant(t[0]);
      out.upper.setConstant(t[1]);
    } else {
      for (Eigen::Index w = 0; w < n; ++w) {
        out.lower[w] = net.wind_units[static_cast<std::size_t>(w)].support_lower;
        out.upper[w] = net.wind_units[static_cast<std::size_t>(w)].support_upper;
      }
    }

    const json cov = g.value("covariance", json::object());
    for (std::size_t i = 0; i < out.groups.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(out.groups[i].size());
      Eigen::MatrixXd block(k, k);
      if (cov.contains("blocks")) {
        const auto rows = cov["blocks"].at(i).get<std::vector<std::vector<double>>>();
        if (static_cast<Eigen::Index>(rows.size()) != k)
          throw ValidationError("generator.covariance.blocks[" + std::to_string(i) + "]", "wrong size");
        for (Eigen::Index r = 0; r < k; ++r) {
          if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != k)
            throw ValidationError("generator.covariance.blocks[" + std::to_string(i) + "]", "wrong size");
          for (Eigen::Index c = 0; c < k; ++c) block(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
      } else {
        block.setConstant(cov.value("off_diagonal", 0.0));
        block.diagonal().setConstant(cov.value("diagonal", 0.0));
      }
      out.covariance.push_back(block);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config.generator: ") + e.what());
  }
  return out;
}

json effective_json(const RunConfig& cfg) {
  json j = {{"case", cfg.case_path.string()},
            {"contingencies", cfg.contingencies},
            {"partition", cfg.partition},
            {"kappa", cfg.kappas},
            {"epsilon", cfg.epsilon},
            {"theta", cfg.theta},
            {"thetas", cfg.thetas},
            {"method", cfg.method},
            {"samples", {{"n", cfg.n_samples}}},
            {"validation", {{"n", cfg.n_validation}}},
            {"repeats", cfg.repeats},
            {"generator", cfg.generator}};
  if (cfg.samples_file) j["samples"]["file"] = cfg.samples_file->string();
  if (cfg.seed) j["samples"]["seed"] = *cfg.seed;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = effective_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace drcc
