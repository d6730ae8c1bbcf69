#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace drcc {

using BusId = int;

struct Line {
  std::string id;
  BusId from_bus = 0;
  BusId to_bus = 0;
  double reactance = 0.0;   // p.u. on base_mva
  double flow_limit = 0.0;  // MW
};

struct Generator {
  std::string id;
  BusId bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double r_max = 0.0;
  double h = 0.0;        // energy cost, $/MWh
  double h_plus = 0.0;   // up-reserve cost
  double h_minus = 0.0;  // down-reserve cost
  double h_con = 0.0;    // contingency-reserve cost
};

struct WindUnit {
  std::string id;
  BusId bus = 0;
  double forecast = 0.0;
  double support_lower = 0.0;
  double support_upper = 0.0;
};

struct Load {
  BusId bus = 0;
  double demand = 0.0;
};

/// Static grid description. Immutable once validated.
struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<BusId> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<WindUnit> wind_units;
  std::vector<Load> loads;
  BusId slack_bus = 0;
  std::vector<std::string> excluded_lines;

  /// Position of `bus` in `buses`; throws IndexOutOfRange for unknown ids.
  std::size_t bus_index(BusId bus) const;
  std::size_t line_index(const std::string& id) const;
  std::size_t generator_index(const std::string& id) const;
  std::size_t wind_index(const std::string& id) const;

  double total_demand() const;
  double total_forecast() const;
};

/// Parses a case document; missing `slack_bus` defaults to the lowest-numbered
/// bus hosting a generator. The result is validated.
NetworkCase parse_case(const nlohmann::json& doc);
NetworkCase load_case(const std::filesystem::path& path);
nlohmann::json to_json(const NetworkCase& net);

/// Throws ValidationError naming the first broken invariant.
void validate_case(const NetworkCase& net);

/// True when the graph stays connected with `removed_line` (if any) taken out.
bool is_connected(const NetworkCase& net, std::ptrdiff_t removed_line = -1);

struct Contingency {
  enum class Kind { Intact, LineOut, GenOut };
  Kind kind = Kind::Intact;
  std::size_t element = 0;  // line or generator index; unused for Intact

  static Contingency intact() { return {}; }
  static Contingency line_out(std::size_t line) { return {Kind::LineOut, line}; }
  static Contingency gen_out(std::size_t gen) { return {Kind::GenOut, gen}; }

  bool operator==(const Contingency&) const = default;
};

/// Stable textual key: `intact`, `gen:<id>`, `line:<id>`.
std::string contingency_key(const NetworkCase& net, const Contingency& c);
Contingency parse_contingency(const NetworkCase& net, const std::string& key);

/// Intact first, then every generator outage, then every non-excluded line whose
/// removal keeps the network connected. Bridges are skipped with a logged notice.
std::vector<Contingency> enumerate_contingencies(const NetworkCase& net,
                                                 const std::set<std::string>& excluded_lines);

/// Line flow sensitivities for one topology. Rows are the surviving lines
/// (`line_rows[r]` is the case line index), columns follow `NetworkCase::buses`.
/// Injections are withdrawn at the slack bus, whose column is zero.
struct PtdfMatrix {
  Contingency contingency;
  std::vector<std::size_t> line_rows;
  Eigen::MatrixXd entries;

  /// Row of `line` in `entries`, or -1 when the line is out of service.
  std::ptrdiff_t row_of(std::size_t line) const;
};

PtdfMatrix compute_ptdf(const NetworkCase& net, const Contingency& contingency);

/// Nodal susceptance matrix of the topology with `removed_line` (if any) out.
Eigen::MatrixXd susceptance_matrix(const NetworkCase& net, std::ptrdiff_t removed_line = -1);

}  // namespace drcc
