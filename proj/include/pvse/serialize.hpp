#pragma once

#include <json.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "pvse/solver.hpp"
#include "pvse/variations.hpp"

namespace pvse {

using Json = nlohmann::json;

/// Rejects keys outside the schema; typos in config files should fail loudly.
inline void check_keys(const Json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || (k == it.key());
    if (!ok)
      throw Error(ErrorCode::ConfigError, "unknown key \"" + it.key() + "\" in " + where);
  }
}

/// Declarative basis/warp descriptor; the JSON surface of the config files.
/// kinds: similarity | affine | vibration (M,N or order) | composite (parts).
struct BasisSpecDesc {
  std::string kind = "similarity";
  int M = 0, N = 0, order = 0;
  std::vector<BasisSpecDesc> parts;

  static BasisSpecDesc parse(const Json& j) {
    BasisSpecDesc d;
    check_keys(j, {"kind", "M", "N", "order", "parts"}, "basis");
    d.kind = j.at("kind").get<std::string>();
    d.M = j.value("M", 0);
    d.N = j.value("N", 0);
    d.order = j.value("order", 0);
    if (j.contains("parts"))
      for (const auto& p : j.at("parts")) d.parts.push_back(parse(p));
    if (d.kind == "vibration" && d.order == 0 && (d.M < 1 || d.N < 1))
      throw Error(ErrorCode::ConfigError, "vibration basis needs M,N >= 1 or order >= 2");
    if (d.kind == "composite" && d.parts.empty())
      throw Error(ErrorCode::ConfigError, "composite basis needs parts");
    return d;
  }

  /// Shorthand strings: "similarity", "affine", "vibration:3x3", "order:3",
  /// "affine+order:3" (composite).
  static BasisSpecDesc parse_shorthand(const std::string& text) {
    const size_t plus = text.find('+');
    if (plus != std::string::npos) {
      BasisSpecDesc d;
      d.kind = "composite";
      d.parts.push_back(parse_shorthand(text.substr(0, plus)));
      d.parts.push_back(parse_shorthand(text.substr(plus + 1)));
      return d;
    }
    BasisSpecDesc d;
    if (text == "similarity" || text == "affine") {
      d.kind = text;
      return d;
    }
    if (text.rfind("vibration:", 0) == 0) {
      const std::string rest = text.substr(10);
      const size_t x = rest.find('x');
      if (x == std::string::npos)
        throw Error(ErrorCode::UsageError, "expected vibration:MxN");
      d.kind = "vibration";
      d.M = std::stoi(rest.substr(0, x));
      d.N = std::stoi(rest.substr(x + 1));
      return d;
    }
    if (text.rfind("order:", 0) == 0) {
      d.kind = "vibration";
      d.order = std::stoi(text.substr(6));
      return d;
    }
    throw Error(ErrorCode::UsageError, "unknown basis \"" + text + "\"");
  }

  Json to_json() const {
    Json j;
    j["kind"] = kind;
    if (M > 0) j["M"] = M;
    if (N > 0) j["N"] = N;
    if (order > 0) j["order"] = order;
    if (!parts.empty()) {
      Json arr = Json::array();
      for (const auto& p : parts) arr.push_back(p.to_json());
      j["parts"] = arr;
    }
    return j;
  }

  HarmonicModes modes() const {
    return order > 0 ? HarmonicModes::order_bound(order) : HarmonicModes::rectangle(M, N);
  }

  PriorVariationBasis build(const GridSpec& spec) const {
    if (kind == "similarity") return PriorVariationBasis::similarity(spec);
    if (kind == "affine") return PriorVariationBasis::affine(spec);
    if (kind == "vibration") return PriorVariationBasis::vibration(spec, modes());
    if (kind == "composite") {
      std::vector<PriorVariationBasis> ps;
      for (const auto& p : parts) ps.push_back(p.build(spec));
      return PriorVariationBasis::composite(std::move(ps));
    }
    throw Error(ErrorCode::ConfigError, "unknown basis kind \"" + kind + "\"");
  }

  WarpModel build_warp(const GridSpec& spec) const {
    if (kind == "similarity") return WarpModel::similarity(spec);
    if (kind == "affine") return WarpModel::affine(spec);
    if (kind == "vibration") return WarpModel::harmonic_warp(spec, modes());
    throw Error(ErrorCode::ConfigError, "no warp model for basis kind \"" + kind + "\"");
  }
};

/// DeformationParams round trip: a kind tag plus the theta array (harmonic
/// carries its mode list so the coefficient layout is explicit).
inline Json params_to_json(const WarpModel& model, const ParamVector& theta) {
  Json j;
  j["kind"] = warp_kind_name(model.kind);
  j["theta"] = theta;
  if (model.kind == WarpKind::Harmonic) {
    Json modes = Json::array();
    for (const auto& [m, n] : model.harmonic.modes) modes.push_back({m, n});
    j["modes"] = modes;
  }
  return j;
}

inline ParamVector params_from_json(const Json& j, const WarpModel& model) {
  check_keys(j, {"kind", "theta", "modes"}, "params");
  if (j.at("kind").get<std::string>() != warp_kind_name(model.kind))
    throw Error(ErrorCode::KindMismatch, "params kind does not match model");
  ParamVector theta = j.at("theta").get<ParamVector>();
  model.check_params(theta);
  return theta;
}

inline Json solver_config_to_json(const SolverConfig& c) {
  Json j;
  j["dt"] = c.dt;
  j["max_iterations"] = c.max_iterations;
  j["convergence_window"] = c.convergence_window;
  j["convergence_threshold"] = c.convergence_threshold;
  j["reinit_period"] = c.reinit_period;
  j["velocity_normalization"] =
      c.velocity_normalization == VelocityNormalization::None      ? "none"
      : c.velocity_normalization == VelocityNormalization::UnitTheta ? "unit_theta"
                                                                     : "unit_speed";
  j["target_step_cells"] = c.target_step_cells;
  return j;
}

inline SolverConfig solver_config_from_json(const Json& j) {
  check_keys(j,
             {"dt", "max_iterations", "convergence_window", "convergence_threshold",
              "reinit_period", "velocity_normalization", "target_step_cells"},
             "solver config");
  SolverConfig c;
  c.dt = j.value("dt", c.dt);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.convergence_window = j.value("convergence_window", c.convergence_window);
  c.convergence_threshold = j.value("convergence_threshold", c.convergence_threshold);
  c.reinit_period = j.value("reinit_period", c.reinit_period);
  c.target_step_cells = j.value("target_step_cells", c.target_step_cells);
  const std::string vn = j.value("velocity_normalization", std::string("unit_speed"));
  if (vn == "none") c.velocity_normalization = VelocityNormalization::None;
  else if (vn == "unit_theta") c.velocity_normalization = VelocityNormalization::UnitTheta;
  else if (vn == "unit_speed") c.velocity_normalization = VelocityNormalization::UnitSpeed;
  else throw Error(ErrorCode::ConfigError, "unknown velocity_normalization \"" + vn + "\"");
  c.validate();
  return c;
}

/// Fixed numeric formatting for machine outputs; reruns must be byte-stable.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string trace_to_csv(const SolverTrace& trace) {
  std::string out = "iteration,energy,dtheta_norm,max_speed_cells\n";
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.iteration) + "," + csv_number(r.energy) + "," +
           csv_number(r.dtheta_norm) + "," + csv_number(r.max_speed_cells) + "\n";
  }
  return out;
}

}  // namespace pvse
