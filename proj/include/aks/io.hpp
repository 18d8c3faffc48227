#pragma once

// File formats: algebra descriptors and scenario configs as JSON, trajectories
// as CSV with a documenting comment header. All numeric output uses 17
// significant digits so identical inputs reproduce byte-identical files.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aks/solver.hpp"

namespace aks {

using nlohmann::json;

// Config and file-format problems; the message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

inline const json& need(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

// ---------------------------------------------------------------------------
// Algebra descriptor files

struct Descriptor {
  AlgebraPtr alg;
  BilinearForm form;
  Splitting split;
};

inline json descriptor_to_json(const LieAlgebra& alg, const BilinearForm& form,
                               const Splitting& split) {
  json j;
  j["dim"] = alg.dim;
  j["level"] = alg.level;
  j["labels"] = alg.labels;
  json c = json::array();
  for (int i = 0; i < alg.dim; ++i) {
    json ci = json::array();
    for (int jx = 0; jx < alg.dim; ++jx) {
      json cij = json::array();
      for (int k = 0; k < alg.dim; ++k) cij.push_back(alg.c(i, jx, k));
      ci.push_back(cij);
    }
    c.push_back(ci);
  }
  j["c"] = c;
  json f = json::array();
  for (int i = 0; i < alg.dim; ++i) {
    json fi = json::array();
    for (int jx = 0; jx < alg.dim; ++jx) fi.push_back(form.m(i, jx));
    f.push_back(fi);
  }
  j["form"] = f;
  j["plus"] = split.plus_idx;
  j["minus"] = split.minus_idx;
  return j;
}

inline json descriptor_to_json(const Tower& tw, int alevel) {
  const Tower::Level& L = tw.lv(alevel);
  return descriptor_to_json(*L.alg, L.form, L.split);
}

inline Descriptor descriptor_from_json(const json& j) {
  const std::string ctx = "descriptor";
  int dim = need(j, "dim", ctx).get<int>();
  int level = need(j, "level", ctx).get<int>();
  auto labels = need(j, "labels", ctx).get<std::vector<std::string>>();
  if (static_cast<int>(labels.size()) != dim)
    throw ConfigError("descriptor: field 'labels' must have length dim");
  const json& c = need(j, "c", ctx);
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(dim) * dim * dim);
  if (static_cast<int>(c.size()) != dim)
    throw ConfigError("descriptor: field 'c' must be a dim x dim x dim array");
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(c[i].size()) != dim)
      throw ConfigError("descriptor: field 'c' must be a dim x dim x dim array");
    for (int jx = 0; jx < dim; ++jx) {
      if (static_cast<int>(c[i][jx].size()) != dim)
        throw ConfigError("descriptor: field 'c' must be a dim x dim x dim array");
      for (int k = 0; k < dim; ++k) flat.push_back(c[i][jx][k].get<double>());
    }
  }
  Descriptor d;
  d.alg = make_algebra(level, labels, flat);
  const json& f = need(j, "form", ctx);
  Eigen::MatrixXd m(dim, dim);
  if (static_cast<int>(f.size()) != dim)
    throw ConfigError("descriptor: field 'form' must be a dim x dim matrix");
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(f[i].size()) != dim)
      throw ConfigError("descriptor: field 'form' must be a dim x dim matrix");
    for (int jx = 0; jx < dim; ++jx) m(i, jx) = f[i][jx].get<double>();
  }
  d.form = make_form(d.alg, m, false);
  d.split = make_splitting(d.alg, need(j, "plus", ctx).get<std::vector<int>>(),
                           need(j, "minus", ctx).get<std::vector<int>>());
  return d;
}

// ---------------------------------------------------------------------------
// Scenario configs

struct Scenario {
  std::string name;
  int alevel = 1;            // phase space is H_alevel x h_alevel
  std::string hamiltonian;   // quadratic_km | sl2c_h2 | zero
  std::string coordinates;   // omega_gamma | phase
  GammaForm gamma_form = GammaForm::full_minus;
  AlgebraElement gamma0;     // omega_gamma seed
  AlgebraElement z0;         // phase seed
  Eigen::VectorXd z_minus;   // phase base fiber data (h_minus = identity)
  bool sl2c_seed = false;    // gamma0 came from (X0_plus, Y0_plus)
  Eigen::Vector3d x0_plus = Eigen::Vector3d::Zero();
  Eigen::Vector3d y0_plus = Eigen::Vector3d::Zero();
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  int samples = 0;           // 0: sample every integrator step
  std::uint64_t seed = 0;
  double strict_theta = 1e-7;
  double strict_energy = 1e-6;
};

inline Eigen::VectorXd vector_field(const json& j, const std::string& ctx, int expect) {
  if (!j.is_array() || (expect >= 0 && static_cast<int>(j.size()) != expect))
    throw ConfigError(ctx + ": expected an array of " + std::to_string(expect) + " numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

// Physical data must be explicit in the file; only numerical knobs default.
inline Scenario parse_scenario(const json& j, const Tower& tw) {
  Scenario s;
  s.name = need(j, "name", "scenario").get<std::string>();
  int phase_level = need(j, "phase_level", "scenario").get<int>();
  if (phase_level < 1 || phase_level > tw.max_level() + 1)
    throw ConfigError("scenario: field 'phase_level' out of range");
  s.alevel = phase_level - 1;
  const Tower::Level& L = tw.lv(s.alevel);

  s.hamiltonian = need(j, "hamiltonian", "scenario").get<std::string>();
  s.coordinates = need(j, "coordinates", "scenario").get<std::string>();
  if (s.coordinates != "omega_gamma" && s.coordinates != "phase")
    throw ConfigError("scenario: field 'coordinates' must be 'omega_gamma' or 'phase'");
  if (j.contains("gamma_form")) {
    int f = j.at("gamma_form").get<int>();
    if (f < 0 || f > 2) throw ConfigError("scenario: field 'gamma_form' must be 0, 1 or 2");
    s.gamma_form = static_cast<GammaForm>(f);
  }

  const json& init = need(j, "initial", "scenario");
  if (init.contains("X0_plus") || init.contains("Y0_plus")) {
    if (s.alevel != 1)
      throw ConfigError("scenario.initial: X0_plus/Y0_plus seeds need phase_level = 2");
    Eigen::VectorXd x = vector_field(need(init, "X0_plus", "scenario.initial"),
                                     "scenario.initial.X0_plus", 3);
    Eigen::VectorXd y = vector_field(need(init, "Y0_plus", "scenario.initial"),
                                     "scenario.initial.Y0_plus", 3);
    s.sl2c_seed = true;
    s.x0_plus = x;
    s.y0_plus = y;
    s.gamma0 = tw.pair_join(su2_element(tw, s.x0_plus), su2_element(tw, s.y0_plus));
  } else if (init.contains("gamma0")) {
    s.gamma0 = element(
        L.alg, vector_field(init.at("gamma0"), "scenario.initial.gamma0", L.alg->dim));
  } else {
    throw ConfigError("scenario.initial: need either X0_plus/Y0_plus or gamma0");
  }

  if (s.coordinates == "phase") {
    const json& init2 = init;
    if (!init2.contains("z0"))
      throw ConfigError("scenario.initial: phase coordinates need field 'z0'");
    s.z0 = element(L.alg, vector_field(init2.at("z0"), "scenario.initial.z0", L.alg->dim));
    const json& base = need(j, "base", "scenario");
    s.z_minus = vector_field(need(base, "z_minus", "scenario.base"), "scenario.base.z_minus",
                             L.alg->dim);
  } else {
    s.z_minus = Eigen::VectorXd::Zero(L.alg->dim);
  }

  const json& time = need(j, "time", "scenario");
  s.t_end = need(time, "t_end", "scenario.time").get<double>();
  if (time.contains("t0")) s.t0 = time.at("t0").get<double>();
  if (time.contains("dt")) s.dt = time.at("dt").get<double>();
  if (time.contains("samples")) s.samples = time.at("samples").get<int>();
  if (s.dt <= 0) throw ConfigError("scenario.time: field 'dt' must be positive");
  if (s.t_end < s.t0) throw ConfigError("scenario.time: field 't_end' must be >= t0");
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("strict")) {
    const json& st = j.at("strict");
    if (st.contains("theta_drift")) s.strict_theta = st.at("theta_drift").get<double>();
    if (st.contains("energy_drift")) s.strict_energy = st.at("energy_drift").get<double>();
  }
  return s;
}

inline Scenario load_scenario(const std::string& path, const Tower& tw) {
  return parse_scenario(load_json(path), tw);
}

// ---------------------------------------------------------------------------
// Trajectory CSV

inline void write_trajectory_csv(const std::string& path, const Trajectory& tr,
                                 const std::string& name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "# trajectory: " << name << "\n";
  out << "# coordinates: " << tr.coordinates << ", group_level: " << tr.group_level << "\n";
  out << "# columns: t, then state columns as named (group entries re/im row-major,\n";
  out << "# recursion flattened depth-first, base before fiber; algebra coefficients\n";
  out << "# in descriptor basis order), then invariant series columns.\n";
  out << "t";
  for (const auto& c : tr.columns) out << "," << c;
  for (const auto& inv : tr.invariants) out << "," << inv.first;
  out << "\n";
  for (size_t i = 0; i < tr.times.size(); ++i) {
    out << fmt17(tr.times[i]);
    const Eigen::VectorXd& y = tr.states[i];
    for (int k = 0; k < y.size(); ++k) out << "," << fmt17(y(k));
    for (const auto& inv : tr.invariants) out << "," << fmt17(inv.second[i]);
    out << "\n";
  }
}

inline void write_invariant_csv(const std::string& path, const Trajectory& tr,
                                const std::string& name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "# invariant report: " << name << "\n";
  for (const auto& inv : tr.invariants) {
    double mx = 0.0;
    for (double v : inv.second) mx = std::max(mx, std::abs(v));
    out << "# max |" << inv.first << "| = " << fmt17(mx) << "\n";
  }
  out << "t";
  for (const auto& inv : tr.invariants) out << "," << inv.first;
  out << "\n";
  for (size_t i = 0; i < tr.times.size(); ++i) {
    out << fmt17(tr.times[i]);
    for (const auto& inv : tr.invariants) out << "," << fmt17(inv.second[i]);
    out << "\n";
  }
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<Eigen::VectorXd> rows;
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      t.columns = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw ConfigError(path + ": row with " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(t.columns.size()));
    Eigen::VectorXd r(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
      size_t pos = 0;
      r(static_cast<int>(i)) = std::stod(cells[i], &pos);
      if (pos != cells[i].size())
        throw ConfigError(path + ": cell '" + cells[i] + "' is not a number");
    }
    t.rows.push_back(std::move(r));
  }
  if (!have_header) throw ConfigError(path + ": no header row");
  return t;
}

// Rows are matched on the shared 't' column, columns by name; the report
// carries per-column sup deviations over the matched rows.
struct CompareReport {
  std::vector<std::pair<std::string, double>> per_column;
  double overall = 0.0;
  int rows_compared = 0;
};

inline CompareReport compare_tables(const CsvTable& a, const CsvTable& b,
                                    double time_tol = 1e-12) {
  auto index_of = [](const CsvTable& t, const std::string& name) {
    for (size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == name) return static_cast<int>(i);
    return -1;
  };
  int ta = index_of(a, "t"), tb = index_of(b, "t");
  if (ta < 0 || tb < 0) throw ConfigError("compare: both files need a 't' column");

  std::vector<std::pair<int, int>> cols;  // (a index, b index), shared non-t names
  for (size_t i = 0; i < a.columns.size(); ++i) {
    if (static_cast<int>(i) == ta) continue;
    int bi = index_of(b, a.columns[i]);
    if (bi >= 0) cols.push_back({static_cast<int>(i), bi});
  }

  CompareReport rep;
  rep.per_column.reserve(cols.size());
  for (auto& c : cols) rep.per_column.push_back({a.columns[c.first], 0.0});

  size_t jb = 0;
  for (const auto& ra : a.rows) {
    while (jb < b.rows.size() && b.rows[jb](tb) < ra(ta) - time_tol) ++jb;
    if (jb >= b.rows.size()) break;
    if (std::abs(b.rows[jb](tb) - ra(ta)) > time_tol) continue;
    const Eigen::VectorXd& rb = b.rows[jb];
    for (size_t k = 0; k < cols.size(); ++k) {
      double d = std::abs(ra(cols[k].first) - rb(cols[k].second));
      rep.per_column[k].second = std::max(rep.per_column[k].second, d);
      rep.overall = std::max(rep.overall, d);
    }
    ++rep.rows_compared;
  }
  return rep;
}

}  // namespace aks
