// Config / gain-file / CSV input-output.
//
// Configs and gain files are JSON with explicit matrix shapes (row-major
// data), so fixtures are bit-stable and locale-independent.  Unknown keys
// are rejected everywhere to catch typos in hand-written configs.
#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrkf/design.hpp"
#include "mrkf/errors.hpp"
#include "mrkf/model.hpp"
#include "mrkf/sim.hpp"

namespace mrkf {

using Json = nlohmann::json;

/// Parsed contents of a config file; sections other than the model are
/// optional and default-constructed when absent.
struct ConfigFile {
  MultirateModel model;
  DesignSpec design;
  ScenarioConfig scenario;
  std::string gains_path;       // output.gains
  std::string timeseries_path;  // output.timeseries
};

namespace detail {

inline void reject_unknown(const Json& j, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known)
      throw ConfigParseError("unknown key \"" + item.key() + "\" in " + where);
  }
}

inline Matrix parse_matrix(const Json& j, const std::string& where) {
  if (!j.is_object())
    throw ConfigParseError(where + ": expected {rows, cols, data}");
  reject_unknown(j, where, {"rows", "cols", "data"});
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ConfigParseError(where + ": expected {rows, cols, data}");
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      static_cast<int>(data.size()) != rows * cols)
    throw ConfigParseError(where + ": data length != rows * cols");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  return m;
}

inline Json dump_matrix(const Matrix& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Vector parse_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigParseError(where + ": expected an array");
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), data.size());
}

}  // namespace detail

inline MultirateModel parse_model(const Json& j) {
  detail::reject_unknown(j, "config",
                         {"plant", "noise", "schedule", "design", "simulation",
                          "output"});
  if (!j.contains("plant") || !j.contains("noise") || !j.contains("schedule"))
    throw ConfigParseError("config requires plant, noise, and schedule");

  MultirateModel m;
  const Json& plant = j.at("plant");
  detail::reject_unknown(plant, "plant", {"A", "B", "C"});
  m.sys.A = detail::parse_matrix(plant.at("A"), "plant.A");
  m.sys.B = detail::parse_matrix(plant.at("B"), "plant.B");
  m.sys.C = detail::parse_matrix(plant.at("C"), "plant.C");

  const Json& noise = j.at("noise");
  detail::reject_unknown(noise, "noise", {"Q", "R"});
  m.noise = NoiseModel::from_covariances(
      detail::parse_matrix(noise.at("Q"), "noise.Q"),
      detail::parse_matrix(noise.at("R"), "noise.R"));

  const Json& sched = j.at("schedule");
  detail::reject_unknown(sched, "schedule", {"period", "divisors", "masks"});
  const int period = sched.at("period").get<int>();
  if (sched.contains("divisors") == sched.contains("masks"))
    throw ConfigParseError("schedule needs exactly one of divisors / masks");
  if (sched.contains("divisors")) {
    m.schedule = schedule_from_rates(
        period, sched.at("divisors").get<std::vector<int>>());
  } else {
    m.schedule.period = period;
    for (const Json& row : sched.at("masks"))
      m.schedule.masks.push_back(
          detail::parse_vector(row, "schedule.masks"));
    if (static_cast<int>(m.schedule.masks.size()) != period)
      throw ConfigParseError("schedule.masks length != period");
  }
  return m;
}

inline DesignSpec parse_design(const Json& j, const MultirateModel& m) {
  DesignSpec spec;
  if (!j.contains("design")) return spec;
  const Json& d = j.at("design");
  detail::reject_unknown(
      d, "design", {"Gamma", "pole_radius", "l2_bound", "Cz", "alpha"});
  if (d.contains("Gamma")) {
    const Vector g = detail::parse_vector(d.at("Gamma"), "design.Gamma");
    const int n = m.sys.n(), N = m.schedule.period;
    if (g.size() == n) {
      spec.Gamma = Matrix::Zero(N * n, N * n);
      for (int k = 0; k < N; ++k)
        spec.Gamma.block(k * n, k * n, n, n) = Matrix(g.asDiagonal());
    } else if (g.size() == N * n) {
      spec.Gamma = g.asDiagonal();
    } else {
      throw ConfigParseError("design.Gamma length must be n or N*n");
    }
  }
  if (d.contains("pole_radius"))
    spec.pole_radius = d.at("pole_radius").get<double>();
  if (d.contains("l2_bound")) spec.l2_bound = d.at("l2_bound").get<double>();
  if (d.contains("Cz")) spec.Cz = detail::parse_matrix(d.at("Cz"), "design.Cz");
  if (d.contains("alpha")) spec.alpha = d.at("alpha").get<double>();
  return spec;
}

inline ScenarioConfig parse_scenario(const Json& j, const MultirateModel& m) {
  ScenarioConfig cfg;
  cfg.x0 = Vector::Zero(m.sys.n());
  cfg.xhat0 = Vector::Zero(m.sys.n());
  cfg.horizon = 1;
  if (!j.contains("simulation")) return cfg;
  const Json& s = j.at("simulation");
  detail::reject_unknown(s, "simulation",
                         {"horizon", "x0", "xhat0", "input", "seed",
                          "process_noise", "measurement_noise"});
  if (s.contains("horizon")) cfg.horizon = s.at("horizon").get<int>();
  if (s.contains("x0")) cfg.x0 = detail::parse_vector(s.at("x0"), "x0");
  if (s.contains("xhat0"))
    cfg.xhat0 = detail::parse_vector(s.at("xhat0"), "xhat0");
  if (s.contains("seed")) cfg.seed = s.at("seed").get<std::uint64_t>();
  if (s.contains("process_noise"))
    cfg.process_noise = s.at("process_noise").get<bool>();
  if (s.contains("measurement_noise"))
    cfg.measurement_noise = s.at("measurement_noise").get<bool>();
  if (s.contains("input")) {
    const Json& in = s.at("input");
    detail::reject_unknown(in, "simulation.input",
                           {"type", "value", "amplitude", "frequency",
                            "sequence"});
    const std::string type = in.at("type").get<std::string>();
    if (type == "zero") {
      cfg.input = InputSignal::zero();
    } else if (type == "constant") {
      cfg.input = InputSignal::constant_input(in.at("value").get<double>());
    } else if (type == "sinusoid") {
      cfg.input = InputSignal::sinusoid(in.at("amplitude").get<double>(),
                                        in.at("frequency").get<double>());
    } else if (type == "external") {
      std::vector<Vector> seq;
      for (const Json& row : in.at("sequence"))
        seq.push_back(detail::parse_vector(row, "input.sequence"));
      cfg.input = InputSignal::external(std::move(seq));
    } else {
      throw ConfigParseError("unknown input type \"" + type + "\"");
    }
  }
  return cfg;
}

inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config \"" + path + "\"");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigParseError(std::string("config parse error: ") + e.what());
  }
  ConfigFile cfg;
  cfg.model = parse_model(j);
  cfg.design = parse_design(j, cfg.model);
  cfg.scenario = parse_scenario(j, cfg.model);
  if (j.contains("output")) {
    const Json& out = j.at("output");
    detail::reject_unknown(out, "output", {"gains", "timeseries"});
    if (out.contains("gains"))
      cfg.gains_path = out.at("gains").get<std::string>();
    if (out.contains("timeseries"))
      cfg.timeseries_path = out.at("timeseries").get<std::string>();
  }
  return cfg;
}

/// Serialized filter design: header plus the N periodic gains.
struct GainFile {
  int n = 0, q = 0, N = 0;
  std::string design;  // "optimal" | "weighted" | "pole" | "l2" | combined
  double objective = 0.0;
  double spectral_radius = 0.0;
  std::vector<Matrix> gains;
};

inline GainFile gain_file_from_design(const FilterDesign& fd,
                                      const std::string& design_label) {
  GainFile gf;
  gf.N = fd.gains.N();
  gf.n = static_cast<int>(fd.gains.periodic.front().rows());
  gf.q = static_cast<int>(fd.gains.periodic.front().cols());
  gf.design = design_label;
  gf.objective = fd.objective;
  gf.spectral_radius = fd.verification.spectral_radius;
  gf.gains = fd.gains.periodic;
  return gf;
}

inline void save_gains(const GainFile& gf, const std::string& path) {
  Json j{{"n", gf.n},
         {"q", gf.q},
         {"N", gf.N},
         {"design", gf.design},
         {"objective", gf.objective},
         {"spectral_radius", gf.spectral_radius}};
  Json body = Json::array();
  for (const Matrix& l : gf.gains) body.push_back(detail::dump_matrix(l));
  j["gains"] = body;
  std::ofstream out(path);
  if (!out) throw ConfigParseError("cannot write gain file \"" + path + "\"");
  out << j.dump(2) << "\n";
}

inline GainFile load_gains(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open gain file \"" + path + "\"");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigParseError(std::string("gain file parse error: ") + e.what());
  }
  detail::reject_unknown(
      j, "gain file",
      {"n", "q", "N", "design", "objective", "spectral_radius", "gains"});
  GainFile gf;
  gf.n = j.at("n").get<int>();
  gf.q = j.at("q").get<int>();
  gf.N = j.at("N").get<int>();
  gf.design = j.at("design").get<std::string>();
  gf.objective = j.at("objective").get<double>();
  gf.spectral_radius = j.at("spectral_radius").get<double>();
  for (const Json& g : j.at("gains"))
    gf.gains.push_back(detail::parse_matrix(g, "gains"));
  if (static_cast<int>(gf.gains.size()) != gf.N)
    throw ConfigParseError("gain file: gains length != N");
  for (const Matrix& l : gf.gains)
    if (l.rows() != gf.n || l.cols() != gf.q)
      throw ConfigParseError("gain file: gain shape != n x q");
  return gf;
}

/// Fixed-width scientific-free formatting: 6 significant digits, so console
/// output lines up with the reference tables.
inline std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// RFC-4180-style time-series CSV: header row, '.' decimals, absent
/// measurements as empty fields.
inline void write_timeseries_csv(const SimulationRun& run, std::ostream& out) {
  const int n = static_cast<int>(run.x_true.front().size());
  const int q = static_cast<int>(run.y.front().size());
  out << "k,phase";
  for (int i = 0; i < n; ++i) out << ",x_true_" << i + 1;
  for (int i = 0; i < q; ++i) out << ",y_" << i + 1;
  for (int i = 0; i < n; ++i) out << ",x_hat_" << i + 1;
  for (int i = 0; i < n; ++i) out << ",e_" << i + 1;
  out << "\r\n";
  char buf[32];
  auto cell = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    out << ',' << buf;
  };
  for (int k = 0; k < run.steps(); ++k) {
    out << k << ',' << run.phase[k];
    for (int i = 0; i < n; ++i) cell(run.x_true[k](i));
    for (int i = 0; i < q; ++i) {
      if (std::isnan(run.y[k](i)))
        out << ',';
      else
        cell(run.y[k](i));
    }
    for (int i = 0; i < n; ++i) cell(run.x_hat[k](i));
    for (int i = 0; i < n; ++i) cell(run.error[k](i));
    out << "\r\n";
  }
}

inline void write_timeseries_csv(const SimulationRun& run,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigParseError("cannot write CSV \"" + path + "\"");
  write_timeseries_csv(run, out);
}

}  // namespace mrkf
