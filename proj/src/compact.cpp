#include "drcc/compact.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "drcc/errors.hpp"

namespace drcc {
namespace {

using Terms = std::vector<std::pair<Eigen::Index, double>>;

class RowSink {
 public:
  void le(const Terms& terms, double rhs, std::string label) {
    const auto r = static_cast<Eigen::Index>(rhs_.size());
    for (const auto& [col, v] : terms)
      if (v != 0.0) trip_.emplace_back(r, col, v);
    rhs_.push_back(rhs);
    labels_.push_back(std::move(label));
  }

  // Equality as two opposite inequalities.
  void eq(const Terms& terms, double rhs, const std::string& label) {
    le(terms, rhs, label + ":le");
    Terms neg = terms;
    for (auto& t : neg) t.second = -t.second;
    le(neg, -rhs, label + ":ge");
  }

  void finish(CompactProblem& out, Eigen::Index n_x) {
    out.Lambda.resize(static_cast<Eigen::Index>(rhs_.size()), n_x);
    out.Lambda.setFromTriplets(trip_.begin(), trip_.end());
    out.beta = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
    out.det_labels = std::move(labels_);
  }

 private:
  std::vector<Eigen::Triplet<double>> trip_;
  std::vector<double> rhs_;
  std::vector<std::string> labels_;
};

Eigen::SparseVector<double> sparse_vec(Eigen::Index n, const Terms& terms) {
  Eigen::SparseVector<double> v(n);
  for (const auto& [i, x] : terms)
    if (x != 0.0) v.coeffRef(i) += x;
  return v;
}

std::string fmt_terms(const Eigen::SparseVector<double>& v, const CompactProblem& p) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (Eigen::SparseVector<double>::InnerIterator it(v); it; ++it) {
    os << (first ? "" : " ") << (it.value() < 0 ? "- " : (first ? "" : "+ ")) << std::abs(it.value()) << " "
       << p.layout.name(it.index(), p.generator_ids, p.contingency_keys);
    first = false;
  }
  return first ? "0" : os.str();
}

}  // namespace

std::string DecisionLayout::name(Eigen::Index i, const std::vector<std::string>& gen_ids,
                                 const std::vector<std::string>& cont_keys) const {
  if (i < 0 || i >= n_x()) throw IndexOutOfRange("decision index " + std::to_string(i));
  const auto u = static_cast<std::size_t>(i);
  const std::size_t g = u % n_gen;
  auto gen = [&](std::size_t k) { return k < gen_ids.size() ? gen_ids[k] : std::to_string(k); };
  auto cont = [&](std::size_t k) { return k < cont_keys.size() ? cont_keys[k] : std::to_string(k); };
  if (u < 4 * n_gen) {
    static const char* kBlock[] = {"p", "r_plus", "r_minus", "r_con"};
    return std::string(kBlock[u / n_gen]) + "[" + gen(g) + "]";
  }
  const std::size_t rest = u - 4 * n_gen;
  const std::size_t c = (rest / n_gen) % n_cont;
  const char* block = rest < n_cont * n_gen ? "alpha" : "delta";
  return std::string(block) + "[" + cont(c) + "][" + gen(g) + "]";
}

const char* to_string(RowFamily family) {
  switch (family) {
    case RowFamily::ReserveUp:
      return "reserve_up";
    case RowFamily::ReserveDown:
      return "reserve_down";
    case RowFamily::LineUpper:
      return "line_upper";
    case RowFamily::LineLower:
      return "line_lower";
  }
  return "unknown";
}

Eigen::VectorXd UncertainRow::xi_coefficients(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = f;
  if (F.nonZeros() > 0) out.noalias() += F.transpose() * x;
  return out;
}

std::string CompactProblem::row_label(std::size_t k) const {
  const auto& row = uncertain_rows.at(k);
  std::string elem;
  if (row.family == RowFamily::ReserveUp || row.family == RowFamily::ReserveDown)
    elem = row.element < generator_ids.size() ? generator_ids[row.element] : std::to_string(row.element);
  else
    elem = row.element < line_ids.size() ? line_ids[row.element] : "line#" + std::to_string(row.element);
  return std::string(to_string(row.family)) + "[" + contingency_keys.at(row.contingency) + "][" + elem + "]";
}

CompactProblem build_compact(const NetworkCase& net, const std::vector<Contingency>& contingencies,
                             const std::vector<PtdfMatrix>& ptdfs, double epsilon) {
  if (ptdfs.size() != contingencies.size())
    throw DimensionMismatch("build_compact: " + std::to_string(ptdfs.size()) + " PTDFs for " +
                            std::to_string(contingencies.size()) + " contingencies");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon", "must lie in (0, 1)");
  for (std::size_t i = 0; i < ptdfs.size(); ++i) {
    if (!(ptdfs[i].contingency == contingencies[i]))
      throw DimensionMismatch("build_compact: PTDF " + std::to_string(i) + " belongs to another contingency");
    if (ptdfs[i].entries.cols() != static_cast<Eigen::Index>(net.buses.size()))
      throw DimensionMismatch("build_compact: PTDF column count differs from bus count");
  }

  CompactProblem out;
  const std::size_t ng = net.generators.size();
  const std::size_t nc = contingencies.size();
  const auto nw = static_cast<Eigen::Index>(net.wind_units.size());
  out.layout = DecisionLayout{ng, nc};
  out.epsilon = epsilon;
  out.n_xi = nw;
  out.contingencies = contingencies;
  for (const auto& c : contingencies) out.contingency_keys.push_back(contingency_key(net, c));
  for (const auto& g : net.generators) out.generator_ids.push_back(g.id);
  for (const auto& l : net.lines) out.line_ids.push_back(l.id);
  out.forecast.resize(nw);
  for (Eigen::Index w = 0; w < nw; ++w) out.forecast[w] = net.wind_units[static_cast<std::size_t>(w)].forecast;

  const auto& L = out.layout;
  const Eigen::Index n_x = L.n_x();
  const double demand = net.total_demand();
  const double S = net.total_forecast();

  out.c = Eigen::VectorXd::Zero(n_x);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = net.generators[g];
    out.c[L.p(g)] = gen.h;
    out.c[L.r_plus(g)] = gen.h_plus;
    out.c[L.r_minus(g)] = gen.h_minus;
    out.c[L.r_con(g)] = gen.h_con;
  }

  RowSink det;
  {
    Terms bal;
    for (std::size_t g = 0; g < ng; ++g) bal.emplace_back(L.p(g), 1.0);
    det.eq(bal, demand - S, "balance");
  }
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = net.generators[g];
    const std::string& id = gen.id;
    det.le({{L.p(g), 1.0}, {L.r_plus(g), 1.0}, {L.r_con(g), 1.0}}, gen.p_max, "cap_up[" + id + "]");
    det.le({{L.p(g), -1.0}, {L.r_minus(g), 1.0}}, -gen.p_min, "cap_down[" + id + "]");
    const std::pair<Eigen::Index, const char*> reserves[] = {
        {L.r_plus(g), "r_plus"}, {L.r_minus(g), "r_minus"}, {L.r_con(g), "r_con"}};
    for (const auto& [col, nm] : reserves) {
      det.le({{col, -1.0}}, 0.0, std::string(nm) + "_nonneg[" + id + "]");
      det.le({{col, 1.0}}, gen.r_max, std::string(nm) + "_max[" + id + "]");
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cont = contingencies[c];
    const std::string& key = out.contingency_keys[c];
    const bool gen_out = cont.kind == Contingency::Kind::GenOut;
    Terms sum_alpha, sum_delta;
    for (std::size_t g = 0; g < ng; ++g) {
      sum_alpha.emplace_back(L.alpha(c, g), 1.0);
      sum_delta.emplace_back(L.delta(c, g), 1.0);
    }
    det.eq(sum_alpha, 1.0, "alpha_sum[" + key + "]");
    for (std::size_t g = 0; g < ng; ++g)
      det.le({{L.alpha(c, g), -1.0}}, 0.0, "alpha_nonneg[" + key + "][" + net.generators[g].id + "]");
    det.eq(sum_delta, 0.0, "delta_sum[" + key + "]");
    if (gen_out) {
      const std::size_t gc = cont.element;
      det.eq({{L.alpha(c, gc), 1.0}}, 0.0, "alpha_failed[" + key + "]");
      det.eq({{L.delta(c, gc), 1.0}, {L.p(gc), 1.0}}, 0.0, "delta_failed[" + key + "]");
      for (std::size_t g = 0; g < ng; ++g)
        det.le({{L.delta(c, g), 1.0}, {L.r_con(g), -1.0}}, 0.0,
               "delta_max[" + key + "][" + net.generators[g].id + "]");
    }
    for (std::size_t g = 0; g < ng; ++g) {
      if (gen_out && g == cont.element) continue;
      det.le({{L.delta(c, g), -1.0}}, 0.0, "delta_nonneg[" + key + "][" + net.generators[g].id + "]");
    }
    if (!gen_out) {
      for (std::size_t g = 0; g < ng; ++g)
        det.eq({{L.delta(c, g), 1.0}}, 0.0, "delta_zero[" + key + "][" + net.generators[g].id + "]");
    }
  }

  auto push = [&](UncertainRow row, const std::string& label) {
    if (nw == 0) {
      Terms t;
      for (Eigen::SparseVector<double>::InnerIterator it(row.e); it; ++it) t.emplace_back(it.index(), it.value());
      det.le(t, row.h, label);
    } else {
      out.uncertain_rows.push_back(std::move(row));
    }
  };

  for (std::size_t c = 0; c < nc; ++c) {
    const std::string& key = out.contingency_keys[c];
    for (int sign : {1, -1}) {
      for (std::size_t g = 0; g < ng; ++g) {
        UncertainRow row;
        row.family = sign > 0 ? RowFamily::ReserveUp : RowFamily::ReserveDown;
        row.contingency = c;
        row.element = g;
        const Eigen::Index rcol = sign > 0 ? L.r_plus(g) : L.r_minus(g);
        row.e = sparse_vec(n_x, {{L.alpha(c, g), sign * S}, {rcol, -1.0}});
        row.f = Eigen::VectorXd::Zero(nw);
        row.F.resize(n_x, nw);
        std::vector<Eigen::Triplet<double>> trip;
        for (Eigen::Index j = 0; j < nw; ++j) trip.emplace_back(L.alpha(c, g), j, -sign);
        row.F.setFromTriplets(trip.begin(), trip.end());
        row.h = 0.0;
        push(std::move(row), std::string(sign > 0 ? "reserve_up" : "reserve_down") + "[" + key + "][" +
                                 net.generators[g].id + "]");
      }
    }

    const auto& ptdf = ptdfs[c];
    for (std::size_t r = 0; r < ptdf.line_rows.size(); ++r) {
      const std::size_t line = ptdf.line_rows[r];
      const auto M = ptdf.entries.row(static_cast<Eigen::Index>(r));
      Terms e;
      std::vector<Eigen::Triplet<double>> trip;
      for (std::size_t g = 0; g < ng; ++g) {
        const double m = M[static_cast<Eigen::Index>(net.bus_index(net.generators[g].bus))];
        if (m == 0.0) continue;
        e.emplace_back(L.p(g), m);
        e.emplace_back(L.alpha(c, g), S * m);
        e.emplace_back(L.delta(c, g), m);
        for (Eigen::Index j = 0; j < nw; ++j) trip.emplace_back(L.alpha(c, g), j, -m);
      }
      Eigen::VectorXd f(nw);
      for (Eigen::Index w = 0; w < nw; ++w)
        f[w] = M[static_cast<Eigen::Index>(net.bus_index(net.wind_units[static_cast<std::size_t>(w)].bus))];
      double load_flow = 0.0;
      for (const auto& d : net.loads) load_flow += M[static_cast<Eigen::Index>(net.bus_index(d.bus))] * d.demand;
      const double limit = net.lines[line].flow_limit;

      for (int sign : {1, -1}) {
        UncertainRow row;
        row.family = sign > 0 ? RowFamily::LineUpper : RowFamily::LineLower;
        row.contingency = c;
        row.element = line;
        Terms es = e;
        for (auto& t : es) t.second *= sign;
        row.e = sparse_vec(n_x, es);
        row.f = sign * f;
        row.F.resize(n_x, nw);
        std::vector<Eigen::Triplet<double>> ts = trip;
        for (auto& t : ts) t = Eigen::Triplet<double>(t.row(), t.col(), sign * t.value());
        row.F.setFromTriplets(ts.begin(), ts.end());
        row.h = limit + sign * load_flow;
        push(std::move(row), std::string(sign > 0 ? "line_upper" : "line_lower") + "[" + key + "][" +
                                 net.lines[line].id + "]");
      }
    }
  }
  det.finish(out, n_x);

  double pmax = 0.0, rmax = 0.0, lo = 0.0, hi = 0.0;
  for (const auto& g : net.generators) {
    pmax += g.p_max;
    rmax += g.r_max;
  }
  for (const auto& w : net.wind_units) {
    lo += w.support_lower;
    hi += w.support_upper;
  }
  if (pmax < demand - S) {
    out.diagnostics.push_back("total P_max " + std::to_string(pmax) + " is below demand minus forecast " +
                              std::to_string(demand - S));
  }
  const double mismatch = std::max(S - lo, hi - S);
  if (rmax < mismatch) {
    out.diagnostics.push_back("total R_max " + std::to_string(rmax) + " is below the largest support mismatch " +
                              std::to_string(mismatch));
  }
  for (const auto& d : out.diagnostics) spdlog::warn("{}", d);
  return out;
}

CompactProblem build_compact(const NetworkCase& net, const std::vector<Contingency>& contingencies,
                             double epsilon) {
  std::vector<PtdfMatrix> ptdfs;
  ptdfs.reserve(contingencies.size());
  for (const auto& c : contingencies) ptdfs.push_back(compute_ptdf(net, c));
  return build_compact(net, contingencies, ptdfs, epsilon);
}

double evaluate_row(const CompactProblem& problem, std::size_t k, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xi) {
  if (k >= problem.K()) throw IndexOutOfRange("uncertain row " + std::to_string(k));
  if (x.size() != problem.n_x() || xi.size() != problem.n_xi)
    throw DimensionMismatch("evaluate_row: x or xi has the wrong length");
  const auto& row = problem.uncertain_rows[k];
  return row.e.dot(x) + row.xi_coefficients(x).dot(xi) - row.h;
}

std::string dump_listing(const CompactProblem& p) {
  std::ostringstream os;
  os.precision(12);
  os << "# n_x " << p.n_x() << " n_xi " << p.n_xi << " K " << p.K() << " deterministic " << p.Lambda.rows()
     << " epsilon " << p.epsilon << "\n";
  os << "[objective]\n";
  for (Eigen::Index i = 0; i < p.c.size(); ++i)
    if (p.c[i] != 0.0) os << "  " << p.c[i] << " " << p.layout.name(i, p.generator_ids, p.contingency_keys) << "\n";
  os << "[deterministic]\n";
  for (Eigen::Index r = 0; r < p.Lambda.rows(); ++r) {
    Eigen::SparseVector<double> row = p.Lambda.row(r).transpose();
    os << "  " << p.det_labels[static_cast<std::size_t>(r)] << ": " << fmt_terms(row, p) << " <= " << p.beta[r]
       << "\n";
  }
  os << "[uncertain]\n";
  for (std::size_t k = 0; k < p.K(); ++k) {
    const auto& row = p.uncertain_rows[k];
    os << "  " << p.row_label(k) << ": " << fmt_terms(row.e, p);
    for (Eigen::Index j = 0; j < row.f.size(); ++j)
      if (row.f[j] != 0.0) os << " + " << row.f[j] << " xi[" << j << "]";
    for (Eigen::Index col = 0; col < row.F.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(row.F, col); it; ++it)
        os << " + " << it.value() << " " << p.layout.name(it.row(), p.generator_ids, p.contingency_keys) << "*xi["
           << col << "]";
    os << " <= " << row.h << "\n";
  }
  return os.str();
}

}  // namespace drcc
