// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the algorithm it is meant to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "drcc/compact.hpp"
#include "drcc/lp.hpp"
#include "drcc/network.hpp"
#include "drcc/robust.hpp"
#include "drcc/uncertainty.hpp"

namespace oracle {

using nlohmann::json;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- cases

inline json line(const std::string& id, int f, int t, double x, double limit) {
  return {{"id", id}, {"from_bus", f}, {"to_bus", t}, {"reactance", x}, {"flow_limit", limit}};
}

inline json gen(const std::string& id, int bus, double pmin, double pmax, double rmax, double h) {
  return {{"id", id},       {"bus", bus},           {"p_min", pmin},          {"p_max", pmax}, {"r_max", rmax},
          {"h", h},         {"h_plus", 0.5 * h},    {"h_minus", 0.4 * h},     {"h_con", 0.6 * h}};
}

inline json wind(const std::string& id, int bus, double forecast, double lo, double hi) {
  return {{"id", id}, {"bus", bus}, {"forecast", forecast}, {"support_lower", lo}, {"support_upper", hi}};
}

inline drcc::NetworkCase two_bus() {
  json d = {{"name", "two-bus"},
            {"buses", {1, 2}},
            {"lines", {line("1-2", 1, 2, 0.1, 50.0)}},
            {"generators", {gen("g1", 1, 0.0, 200.0, 50.0, 10.0)}},
            {"loads", {{{"bus", 2}, {"demand", 100.0}}}}};
  return drcc::parse_case(d);
}

// Equal-reactance triangle, slack at bus 3.
inline json triangle_doc() {
  return {{"name", "triangle"},
          {"buses", {1, 2, 3}},
          {"lines", {line("1-2", 1, 2, 0.1, 100.0), line("1-3", 1, 3, 0.1, 100.0), line("2-3", 2, 3, 0.1, 100.0)}},
          {"generators", {gen("g1", 1, 0.0, 150.0, 60.0, 10.0), gen("g2", 2, 0.0, 150.0, 60.0, 12.0)}},
          {"loads", {{{"bus", 3}, {"demand", 120.0}}}},
          {"slack_bus", 3}};
}

// Triangle with three generators and `n_wind` wind units (at buses 1..n_wind).
inline drcc::NetworkCase small_wind_case(int n_wind, double demand = 150.0, double limit = 120.0) {
  json d = triangle_doc();
  d["lines"] = {line("1-2", 1, 2, 0.1, limit), line("1-3", 1, 3, 0.15, limit), line("2-3", 2, 3, 0.12, limit)};
  d["generators"] = {gen("g1", 1, 0.0, 160.0, 70.0, 10.0), gen("g2", 2, 0.0, 160.0, 70.0, 14.0),
                     gen("g3", 3, 0.0, 160.0, 70.0, 18.0)};
  d["loads"] = {{{"bus", 3}, {"demand", demand}}, {{"bus", 2}, {"demand", 0.25 * demand}}};
  json w = json::array();
  for (int i = 0; i < n_wind; ++i) w.push_back(wind("w" + std::to_string(i + 1), i + 1, 20.0, 10.0, 30.0));
  d["wind_units"] = w;
  return drcc::parse_case(d);
}

// Random connected graph: a random spanning tree plus extra edges.
inline drcc::NetworkCase random_case(std::mt19937_64& rng, int n_bus, int extra_edges) {
  std::uniform_real_distribution<double> ux(0.02, 0.3);
  json lines = json::array();
  std::map<std::pair<int, int>, bool> used;
  auto add = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == b || used[{a, b}]) return;
    used[{a, b}] = true;
    lines.push_back(line(std::to_string(a) + "-" + std::to_string(b), a, b, ux(rng), 100.0));
  };
  for (int b = 2; b <= n_bus; ++b) add(std::uniform_int_distribution<int>(1, b - 1)(rng), b);
  std::uniform_int_distribution<int> ub(1, n_bus);
  for (int e = 0; e < extra_edges; ++e) add(ub(rng), ub(rng));
  json buses = json::array();
  for (int b = 1; b <= n_bus; ++b) buses.push_back(b);
  json d = {{"name", "random"},
            {"buses", buses},
            {"lines", lines},
            {"generators", {gen("g1", 1, 0.0, 500.0, 100.0, 10.0)}},
            {"loads", {{{"bus", n_bus}, {"demand", 50.0}}}}};
  return drcc::parse_case(d);
}

// ---------------------------------------------------------------- DC flow

// Flows for nodal injections `u` (indexed like net.buses, summing to zero) on the
// topology without `removed` (-1 keeps all lines). B is assembled from scratch,
// the slack row/column dropped and the reduced system solved directly.
inline Eigen::VectorXd dc_flows(const drcc::NetworkCase& net, std::ptrdiff_t removed, const Eigen::VectorXd& u) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  auto pos = [&](int bus) {
    return static_cast<Eigen::Index>(std::find(net.buses.begin(), net.buses.end(), bus) - net.buses.begin());
  };
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (static_cast<std::ptrdiff_t>(l) == removed) continue;
    const auto i = pos(net.lines[l].from_bus), j = pos(net.lines[l].to_bus);
    const double b = 1.0 / net.lines[l].reactance;
    B(i, i) += b;
    B(j, j) += b;
    B(i, j) -= b;
    B(j, i) -= b;
  }
  const Eigen::Index s = pos(net.slack_bus);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != s) keep.push_back(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Br(m, m);
  Eigen::VectorXd ur(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    ur[a] = u[keep[a]];
    for (Eigen::Index b = 0; b < m; ++b) Br(a, b) = B(keep[a], keep[b]);
  }
  const Eigen::VectorXd th_r = Br.fullPivLu().solve(ur);
  Eigen::VectorXd th = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) th[keep[a]] = th_r[a];
  Eigen::VectorXd flows = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.lines.size()));
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (static_cast<std::ptrdiff_t>(l) == removed) continue;
    flows[static_cast<Eigen::Index>(l)] =
        (th[pos(net.lines[l].from_bus)] - th[pos(net.lines[l].to_bus)]) / net.lines[l].reactance;
  }
  return flows;
}

// Net injection at each bus implied by line flows (out of the bus is positive).
inline Eigen::VectorXd nodal_balance(const drcc::NetworkCase& net, const Eigen::VectorXd& flows) {
  Eigen::VectorXd inj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.buses.size()));
  auto pos = [&](int bus) {
    return static_cast<Eigen::Index>(std::find(net.buses.begin(), net.buses.end(), bus) - net.buses.begin());
  };
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    inj[pos(net.lines[l].from_bus)] += flows[static_cast<Eigen::Index>(l)];
    inj[pos(net.lines[l].to_bus)] -= flows[static_cast<Eigen::Index>(l)];
  }
  return inj;
}

// ---------------------------------------------------------------- LP

// Brute-force LP: min c'x over {A x <= b} (bounds must be included as rows and
// the feasible set bounded). Enumerates every basis of n active rows.
inline double vertex_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        double feas_tol = 1e-9) {
  const Eigen::Index n = c.size(), m = A.rows();
  double best = kInf;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index depth) {
    if (depth == n) {
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd r(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        M.row(i) = A.row(pick[static_cast<std::size_t>(i)]);
        r[i] = b[pick[static_cast<std::size_t>(i)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(r);
      if (((A * x - b).array() > feas_tol * (1.0 + b.cwiseAbs().array())).any()) return;
      best = std::min(best, c.dot(x));
      return;
    }
    for (Eigen::Index i = start; i < m; ++i) {
      pick[static_cast<std::size_t>(depth)] = static_cast<int>(i);
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Vertices of a bounded polyhedron {G xi <= g}, deduplicated.
inline std::vector<Eigen::VectorXd> vertices(const Eigen::MatrixXd& G, const Eigen::VectorXd& g) {
  const Eigen::Index n = G.cols(), m = G.rows();
  std::vector<Eigen::VectorXd> out;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index depth) {
    if (depth == n) {
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd r(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        M.row(i) = G.row(pick[static_cast<std::size_t>(i)]);
        r[i] = g[pick[static_cast<std::size_t>(i)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (lu.rank() < n) return;
      const Eigen::VectorXd v = lu.solve(r);
      if (((G * v - g).array() > 1e-9).any()) return;
      for (const auto& w : out)
        if ((w - v).cwiseAbs().maxCoeff() < 1e-9) return;
      out.push_back(v);
      return;
    }
    for (Eigen::Index i = start; i < m; ++i) {
      pick[static_cast<std::size_t>(depth)] = static_cast<int>(i);
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

// Robust LP with the uncertain rows imposed at every vertex of the set: a
// formulation that shares nothing with the dual reformulation.
inline drcc::LinearProgram vertex_robust_lp(const drcc::CompactProblem& p, const Eigen::MatrixXd& G,
                                            const Eigen::VectorXd& g) {
  const auto verts = vertices(G, g);
  drcc::LpBuilder lp(p.n_x());
  for (Eigen::Index i = 0; i < p.n_x(); ++i) {
    lp.set_bounds(i, -drcc::kInf, drcc::kInf);
    lp.set_cost(i, p.c[i]);
  }
  for (Eigen::Index r = 0; r < p.Lambda.rows(); ++r) {
    drcc::LpBuilder::Terms t;
    for (drcc::SparseRowMatrix::InnerIterator it(p.Lambda, r); it; ++it) t.emplace_back(it.col(), it.value());
    lp.add_le(t, p.beta[r]);
  }
  for (const auto& row : p.uncertain_rows) {
    for (const auto& v : verts) {
      Eigen::VectorXd coef = Eigen::VectorXd(row.e);
      coef += row.F * v;
      drcc::LpBuilder::Terms t;
      for (Eigen::Index i = 0; i < coef.size(); ++i)
        if (coef[i] != 0.0) t.emplace_back(i, coef[i]);
      lp.add_le(t, row.h - row.f.dot(v));
    }
  }
  return lp.build();
}

// ---------------------------------------------------------------- DR oracles

// l1 distance from `s` to {xi in [lo, hi] box : normal'xi = b} by the greedy
// fractional-knapsack argument: move the coordinates with the largest |normal_j|
// first, each up to its box limit. +inf when the hyperplane misses the box.
inline double box_hyperplane_distance(const Eigen::VectorXd& s, const Eigen::VectorXd& normal, double b,
                                      const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  double need = b - normal.dot(s);
  if (std::abs(need) < 1e-15) return 0.0;
  std::vector<std::pair<double, double>> moves;  // (rate, capacity in normal units)
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double a = normal[j];
    if (a == 0.0) continue;
    const bool up = (need > 0) == (a > 0);
    const double room = up ? hi[j] - s[j] : s[j] - lo[j];
    moves.emplace_back(std::abs(a), std::abs(a) * room);
  }
  std::sort(moves.begin(), moves.end(), [](auto& x, auto& y) { return x.first > y.first; });
  double left = std::abs(need), cost = 0.0;
  for (auto [rate, cap] : moves) {
    const double take = std::min(left, cap);
    cost += take / rate;
    left -= take;
    if (left <= 1e-12) return cost;
  }
  return kInf;
}

// min over lambda >= 0 of lambda*theta + mean(max(0, 1 - lambda*d)) by a
// dense grid followed by ternary refinement of the best bracket (the function
// is convex). Infinite distances contribute nothing.
inline double wc_prob_grid(const Eigen::VectorXd& d, double theta) {
  const Eigen::Index n = d.size();
  if (n == 0) return 0.0;
  auto f = [&](double lam) {
    double s = 0.0;
    for (Eigen::Index m = 0; m < n; ++m)
      if (std::isfinite(d[m])) s += std::max(0.0, 1.0 - lam * d[m]);
    return lam * theta + s / static_cast<double>(n);
  };
  double dmin = kInf;
  for (Eigen::Index m = 0; m < n; ++m)
    if (d[m] > 0 && std::isfinite(d[m])) dmin = std::min(dmin, d[m]);
  if (!std::isfinite(dmin)) return std::clamp(f(0.0), 0.0, 1.0);
  const double lmax = 1.0 / dmin;  // beyond this f only grows
  const int grid = 20000;
  double best = kInf;
  int arg = 0;
  for (int i = 0; i <= grid; ++i) {
    const double v = f(lmax * i / grid);
    if (v < best) best = v, arg = i;
  }
  double a = lmax * std::max(0, arg - 1) / grid, b = lmax * std::min(grid, arg + 1) / grid;
  for (int it = 0; it < 200; ++it) {
    const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (f(m1) <= f(m2)) b = m2; else a = m1;
  }
  best = std::min({best, f(a), f(b), f(lmax)});
  return std::clamp(best, 0.0, 1.0);
}

// Worst-case probability of the violation region {x <= lo} U {x >= hi} over
// distributions within W1 distance theta of the empirical one, for a 1-D
// group. Distributions live on `grid`; every subset of grid points is tried
// as the support and the best transport plan onto it found by LP.
inline double wc_prob_exhaustive(const std::vector<double>& samples, const std::vector<double>& grid, double lo,
                                 double hi, double theta) {
  const auto N = samples.size(), P = grid.size();
  double best = 0.0;
  for (unsigned mask = 1; mask < (1u << P); ++mask) {
    std::vector<std::size_t> pts;
    for (std::size_t j = 0; j < P; ++j)
      if (mask & (1u << j)) pts.push_back(j);
    // variables pi(m, j) >= 0; sum_j pi(m, j) = 1/N; sum pi*|s - p| <= theta.
    drcc::LpBuilder lp(static_cast<Eigen::Index>(N * pts.size()));
    drcc::LpBuilder::Terms budget;
    for (std::size_t m = 0; m < N; ++m) {
      drcc::LpBuilder::Terms row;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto v = static_cast<Eigen::Index>(m * pts.size() + k);
        const double p = grid[pts[k]];
        row.emplace_back(v, 1.0);
        budget.emplace_back(v, std::abs(samples[m] - p));
        if (p <= lo || p >= hi) lp.set_cost(v, -1.0);
      }
      lp.add_eq(row, 1.0 / static_cast<double>(N));
    }
    lp.add_le(budget, theta);
    const auto res = drcc::solve_lp(lp.build(), drcc::LpBackend::Simplex);
    if (res.status == drcc::LpStatus::Optimal) best = std::max(best, -res.objective);
  }
  return best;
}

// Same quantity in closed form: move the samples that are cheapest to push
// into the violation region first (fractional knapsack).
inline double wc_prob_knapsack(const std::vector<double>& samples, double lo, double hi, double theta) {
  const double N = static_cast<double>(samples.size());
  std::vector<double> cost;
  double mass = 0.0;
  for (double s : samples) {
    const double c = std::min(std::max(0.0, s - lo), std::max(0.0, hi - s));
    if (s <= lo || s >= hi) mass += 1.0 / N;
    else cost.push_back(c);
  }
  std::sort(cost.begin(), cost.end());
  double left = theta;
  for (double c : cost) {
    const double full = c / N;
    if (full <= left) {
      mass += 1.0 / N;
      left -= full;
    } else {
      mass += left / c;
      break;
    }
  }
  return std::min(1.0, mass);
}

// ---------------------------------------------------------------- compact

// Left-hand side minus right-hand side of each inequality of the joint chance
// constraint, written out from the model statement: reserve rows
// (alpha * Pmis <= r+, -alpha * Pmis <= r-) and |flow| <= Pmax per surviving line,
// with Pmis = sum_w (forecast_w - xi_w) and loads withdrawn at their buses.
struct Longhand {
  std::vector<double> reserve_up, reserve_down, line_upper, line_lower;
};

inline Longhand longhand(const drcc::NetworkCase& net, const drcc::Contingency& cont,
                         const drcc::DecisionLayout& L, std::size_t c, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& xi) {
  Longhand out;
  const std::size_t ng = net.generators.size();
  double pmis = 0.0;
  for (std::size_t w = 0; w < net.wind_units.size(); ++w)
    pmis += net.wind_units[w].forecast - xi[static_cast<Eigen::Index>(w)];
  for (std::size_t g = 0; g < ng; ++g) {
    out.reserve_up.push_back(x[L.alpha(c, g)] * pmis - x[L.r_plus(g)]);
    out.reserve_down.push_back(-x[L.alpha(c, g)] * pmis - x[L.r_minus(g)]);
  }
  auto pos = [&](int bus) {
    return static_cast<Eigen::Index>(std::find(net.buses.begin(), net.buses.end(), bus) - net.buses.begin());
  };
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.buses.size()));
  for (std::size_t g = 0; g < ng; ++g)
    u[pos(net.generators[g].bus)] += x[L.p(g)] + x[L.alpha(c, g)] * pmis + x[L.delta(c, g)];
  for (std::size_t w = 0; w < net.wind_units.size(); ++w) u[pos(net.wind_units[w].bus)] += xi[static_cast<Eigen::Index>(w)];
  for (const auto& d : net.loads) u[pos(d.bus)] -= d.demand;
  // Imbalance is absorbed at the slack, as in the PTDF convention.
  u[pos(net.slack_bus)] -= u.sum();
  const std::ptrdiff_t removed =
      cont.kind == drcc::Contingency::Kind::LineOut ? static_cast<std::ptrdiff_t>(cont.element) : -1;
  const Eigen::VectorXd flows = dc_flows(net, removed, u);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    if (static_cast<std::ptrdiff_t>(l) == removed) continue;
    out.line_upper.push_back(flows[static_cast<Eigen::Index>(l)] - net.lines[l].flow_limit);
    out.line_lower.push_back(-flows[static_cast<Eigen::Index>(l)] - net.lines[l].flow_limit);
  }
  return out;
}

}  // namespace oracle
