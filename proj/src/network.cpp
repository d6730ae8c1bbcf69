#include "drcc/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "drcc/errors.hpp"

namespace drcc {
namespace {

using nlohmann::json;

template <typename T>
T field(const json& obj, const char* key, const std::string& path) {
  const std::string where = path.empty() ? std::string(key) : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw ParseError("missing field '" + where + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError("bad value for '" + where + "': " + e.what());
  }
}

const json& array_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array())
    throw ParseError(std::string("field '") + key + "' must be an array");
  return doc.at(key);
}

std::string at(const char* list, std::size_t i, const char* member) {
  return std::string(list) + "[" + std::to_string(i) + "]." + member;
}

// Minimal union-find for the connectivity checks.
struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::size_t NetworkCase::bus_index(BusId bus) const {
  auto it = std::find(buses.begin(), buses.end(), bus);
  if (it == buses.end()) throw IndexOutOfRange("unknown bus " + std::to_string(bus));
  return static_cast<std::size_t>(it - buses.begin());
}

std::size_t NetworkCase::line_index(const std::string& id) const {
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].id == id) return i;
  throw IndexOutOfRange("unknown line '" + id + "'");
}

std::size_t NetworkCase::generator_index(const std::string& id) const {
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i].id == id) return i;
  throw IndexOutOfRange("unknown generator '" + id + "'");
}

std::size_t NetworkCase::wind_index(const std::string& id) const {
  for (std::size_t i = 0; i < wind_units.size(); ++i)
    if (wind_units[i].id == id) return i;
  throw IndexOutOfRange("unknown wind unit '" + id + "'");
}

double NetworkCase::total_demand() const {
  double total = 0.0;
  for (const auto& l : loads) total += l.demand;
  return total;
}

double NetworkCase::total_forecast() const {
  double total = 0.0;
  for (const auto& w : wind_units) total += w.forecast;
  return total;
}

NetworkCase parse_case(const json& doc) {
  if (!doc.is_object()) throw ParseError("case document must be a JSON object");
  NetworkCase net;
  net.name = doc.value("name", std::string{});
  net.base_mva = doc.value("base_mva", 100.0);

  for (const auto& b : array_field(doc, "buses")) {
    if (!b.is_number_integer()) throw ParseError("buses must be integer ids");
    net.buses.push_back(b.get<BusId>());
  }

  const auto& lines = array_field(doc, "lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string path = "lines[" + std::to_string(i) + "]";
    const auto& l = lines[i];
    net.lines.push_back({field<std::string>(l, "id", path), field<BusId>(l, "from_bus", path),
                         field<BusId>(l, "to_bus", path), field<double>(l, "reactance", path),
                         field<double>(l, "flow_limit", path)});
  }

  const auto& gens = array_field(doc, "generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string path = "generators[" + std::to_string(i) + "]";
    const auto& g = gens[i];
    net.generators.push_back({field<std::string>(g, "id", path), field<BusId>(g, "bus", path),
                              field<double>(g, "p_min", path), field<double>(g, "p_max", path),
                              field<double>(g, "r_max", path), field<double>(g, "h", path),
                              field<double>(g, "h_plus", path), field<double>(g, "h_minus", path),
                              field<double>(g, "h_con", path)});
  }

  if (doc.contains("wind_units")) {
    const auto& wind = array_field(doc, "wind_units");
    for (std::size_t i = 0; i < wind.size(); ++i) {
      const std::string path = "wind_units[" + std::to_string(i) + "]";
      const auto& w = wind[i];
      net.wind_units.push_back({field<std::string>(w, "id", path), field<BusId>(w, "bus", path),
                                field<double>(w, "forecast", path),
                                field<double>(w, "support_lower", path),
                                field<double>(w, "support_upper", path)});
    }
  }

  const auto& loads = array_field(doc, "loads");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const std::string path = "loads[" + std::to_string(i) + "]";
    net.loads.push_back({field<BusId>(loads[i], "bus", path), field<double>(loads[i], "demand", path)});
  }

  if (doc.contains("excluded_lines"))
    net.excluded_lines = field<std::vector<std::string>>(doc, "excluded_lines", "");

  if (doc.contains("slack_bus") && !doc.at("slack_bus").is_null()) {
    net.slack_bus = field<BusId>(doc, "slack_bus", "");
  } else {
    if (net.generators.empty()) throw ValidationError("slack_bus", "no generator to host a default slack");
    net.slack_bus = std::min_element(net.generators.begin(), net.generators.end(),
                                     [](const auto& a, const auto& b) { return a.bus < b.bus; })
                        ->bus;
  }

  validate_case(net);
  return net;
}

NetworkCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_case(doc);
}

json to_json(const NetworkCase& net) {
  json doc;
  doc["name"] = net.name;
  doc["base_mva"] = net.base_mva;
  doc["buses"] = net.buses;
  doc["lines"] = json::array();
  for (const auto& l : net.lines)
    doc["lines"].push_back({{"id", l.id},
                            {"from_bus", l.from_bus},
                            {"to_bus", l.to_bus},
                            {"reactance", l.reactance},
                            {"flow_limit", l.flow_limit}});
  doc["generators"] = json::array();
  for (const auto& g : net.generators)
    doc["generators"].push_back({{"id", g.id},
                                 {"bus", g.bus},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"r_max", g.r_max},
                                 {"h", g.h},
                                 {"h_plus", g.h_plus},
                                 {"h_minus", g.h_minus},
                                 {"h_con", g.h_con}});
  doc["wind_units"] = json::array();
  for (const auto& w : net.wind_units)
    doc["wind_units"].push_back({{"id", w.id},
                                 {"bus", w.bus},
                                 {"forecast", w.forecast},
                                 {"support_lower", w.support_lower},
                                 {"support_upper", w.support_upper}});
  doc["loads"] = json::array();
  for (const auto& l : net.loads) doc["loads"].push_back({{"bus", l.bus}, {"demand", l.demand}});
  doc["slack_bus"] = net.slack_bus;
  doc["excluded_lines"] = net.excluded_lines;
  return doc;
}

void validate_case(const NetworkCase& net) {
  if (net.buses.empty()) throw ValidationError("buses", "at least one bus required");
  {
    auto sorted = net.buses;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError("buses", "duplicate bus id");
  }
  if (!(net.base_mva > 0.0)) throw ValidationError("base_mva", "must be positive");

  auto check_bus = [&](BusId bus, const std::string& path) {
    if (std::find(net.buses.begin(), net.buses.end(), bus) == net.buses.end())
      throw ValidationError(path, "references unknown bus " + std::to_string(bus));
  };

  for (std::size_t i = 0; i < net.lines.size(); ++i) {
    const auto& l = net.lines[i];
    check_bus(l.from_bus, at("lines", i, "from_bus"));
    check_bus(l.to_bus, at("lines", i, "to_bus"));
    if (l.from_bus == l.to_bus) throw ValidationError(at("lines", i, "to_bus"), "self-loop on line '" + l.id + "'");
    if (!(l.reactance > 0.0))
      throw ValidationError(at("lines", i, "reactance"), "reactance of line '" + l.id + "' must be > 0");
    if (!(l.flow_limit > 0.0))
      throw ValidationError(at("lines", i, "flow_limit"), "flow limit of line '" + l.id + "' must be > 0");
    for (std::size_t j = 0; j < i; ++j)
      if (net.lines[j].id == l.id) throw ValidationError(at("lines", i, "id"), "duplicate line id '" + l.id + "'");
  }

  for (std::size_t i = 0; i < net.generators.size(); ++i) {
    const auto& g = net.generators[i];
    check_bus(g.bus, at("generators", i, "bus"));
    if (!(g.p_min <= g.p_max))
      throw ValidationError(at("generators", i, "p_min"), "p_min exceeds p_max for '" + g.id + "'");
    if (!(g.r_max >= 0.0)) throw ValidationError(at("generators", i, "r_max"), "must be >= 0");
    for (std::size_t j = 0; j < i; ++j)
      if (net.generators[j].id == g.id)
        throw ValidationError(at("generators", i, "id"), "duplicate generator id '" + g.id + "'");
  }

  for (std::size_t i = 0; i < net.wind_units.size(); ++i) {
    const auto& w = net.wind_units[i];
    check_bus(w.bus, at("wind_units", i, "bus"));
    if (!(w.support_lower <= w.support_upper))
      throw ValidationError(at("wind_units", i, "support_lower"), "support bounds out of order");
    for (std::size_t j = 0; j < i; ++j)
      if (net.wind_units[j].id == w.id)
        throw ValidationError(at("wind_units", i, "id"), "duplicate wind id '" + w.id + "'");
  }

  for (std::size_t i = 0; i < net.loads.size(); ++i) {
    check_bus(net.loads[i].bus, at("loads", i, "bus"));
    if (!(net.loads[i].demand >= 0.0)) throw ValidationError(at("loads", i, "demand"), "must be >= 0");
  }
  if (!(net.total_demand() > 0.0)) throw ValidationError("loads", "total demand must be > 0");

  check_bus(net.slack_bus, "slack_bus");
  for (std::size_t i = 0; i < net.excluded_lines.size(); ++i) {
    const auto& id = net.excluded_lines[i];
    if (std::none_of(net.lines.begin(), net.lines.end(), [&](const Line& l) { return l.id == id; }))
      throw ValidationError("excluded_lines[" + std::to_string(i) + "]", "unknown line '" + id + "'");
  }

  if (!is_connected(net)) throw ValidationError("lines", "network graph is not connected");
}

bool is_connected(const NetworkCase& net, std::ptrdiff_t removed_line) {
  Components comp(net.buses.size());
  for (std::size_t i = 0; i < net.lines.size(); ++i) {
    if (static_cast<std::ptrdiff_t>(i) == removed_line) continue;
    comp.join(net.bus_index(net.lines[i].from_bus), net.bus_index(net.lines[i].to_bus));
  }
  const auto root = comp.find(0);
  for (std::size_t b = 1; b < net.buses.size(); ++b)
    if (comp.find(b) != root) return false;
  return true;
}

std::string contingency_key(const NetworkCase& net, const Contingency& c) {
  switch (c.kind) {
    case Contingency::Kind::Intact:
      return "intact";
    case Contingency::Kind::GenOut:
      return "gen:" + net.generators.at(c.element).id;
    case Contingency::Kind::LineOut:
      return "line:" + net.lines.at(c.element).id;
  }
  return {};
}

Contingency parse_contingency(const NetworkCase& net, const std::string& key) {
  if (key == "intact") return Contingency::intact();
  if (key.rfind("gen:", 0) == 0) return Contingency::gen_out(net.generator_index(key.substr(4)));
  if (key.rfind("line:", 0) == 0) {
    const auto line = net.line_index(key.substr(5));
    if (!is_connected(net, static_cast<std::ptrdiff_t>(line)))
      throw ValidationError("contingencies", "outage of line '" + net.lines[line].id + "' disconnects the network");
    return Contingency::line_out(line);
  }
  throw ParseError("bad contingency key '" + key + "' (expected intact, gen:<id> or line:<id>)");
}

std::vector<Contingency> enumerate_contingencies(const NetworkCase& net,
                                                 const std::set<std::string>& excluded_lines) {
  std::vector<Contingency> out;
  out.push_back(Contingency::intact());
  for (std::size_t g = 0; g < net.generators.size(); ++g) out.push_back(Contingency::gen_out(g));
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (excluded_lines.contains(net.lines[l].id)) continue;
    if (!is_connected(net, static_cast<std::ptrdiff_t>(l))) {
      spdlog::info("line '{}' is a bridge; its outage is not enumerated", net.lines[l].id);
      continue;
    }
    out.push_back(Contingency::line_out(l));
  }
  return out;
}

std::ptrdiff_t PtdfMatrix::row_of(std::size_t line) const {
  auto it = std::find(line_rows.begin(), line_rows.end(), line);
  return it == line_rows.end() ? -1 : static_cast<std::ptrdiff_t>(it - line_rows.begin());
}

Eigen::MatrixXd susceptance_matrix(const NetworkCase& net, std::ptrdiff_t removed_line) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < net.lines.size(); ++i) {
    if (static_cast<std::ptrdiff_t>(i) == removed_line) continue;
    const auto f = static_cast<Eigen::Index>(net.bus_index(net.lines[i].from_bus));
    const auto t = static_cast<Eigen::Index>(net.bus_index(net.lines[i].to_bus));
    const double y = 1.0 / net.lines[i].reactance;
    bbus(f, f) += y;
    bbus(t, t) += y;
    bbus(f, t) -= y;
    bbus(t, f) -= y;
  }
  return bbus;
}

PtdfMatrix compute_ptdf(const NetworkCase& net, const Contingency& contingency) {
  const std::ptrdiff_t removed =
      contingency.kind == Contingency::Kind::LineOut ? static_cast<std::ptrdiff_t>(contingency.element) : -1;
  if (removed >= static_cast<std::ptrdiff_t>(net.lines.size()))
    throw IndexOutOfRange("line contingency index out of range");
  if (!is_connected(net, removed))
    throw SingularTopology("network is disconnected under contingency " + contingency_key(net, contingency));

  const auto n = static_cast<Eigen::Index>(net.buses.size());
  const auto slack = static_cast<Eigen::Index>(net.bus_index(net.slack_bus));
  const Eigen::MatrixXd bbus = susceptance_matrix(net, removed);

  // Reduced matrix without the slack row/column; SPD for a connected graph.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index b = 0; b < n; ++b)
    if (b != slack) keep.push_back(b);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd reduced(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) reduced(i, j) = bbus(keep[i], keep[j]);

  // angles(:, b) = bus angles for 1 p.u. injected at b and withdrawn at the slack
  Eigen::MatrixXd angles = Eigen::MatrixXd::Zero(n, n);
  if (m > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(reduced);
    if (llt.info() != Eigen::Success) throw SingularTopology("reduced susceptance matrix is singular");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) angles(keep[i], keep[j]) = inv(i, j);
  }

  PtdfMatrix out;
  out.contingency = contingency;
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    if (static_cast<std::ptrdiff_t>(l) != removed) out.line_rows.push_back(l);
  out.entries.resize(static_cast<Eigen::Index>(out.line_rows.size()), n);
  for (std::size_t r = 0; r < out.line_rows.size(); ++r) {
    const auto& line = net.lines[out.line_rows[r]];
    const auto f = static_cast<Eigen::Index>(net.bus_index(line.from_bus));
    const auto t = static_cast<Eigen::Index>(net.bus_index(line.to_bus));
    out.entries.row(static_cast<Eigen::Index>(r)) = (angles.row(f) - angles.row(t)) / line.reactance;
  }
  out.entries.col(slack).setZero();
  return out;
}

}  // namespace drcc
