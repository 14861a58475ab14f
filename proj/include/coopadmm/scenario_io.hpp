// Copyright 2026 The coopadmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COOPADMM_SCENARIO_IO_HPP
#define COOPADMM_SCENARIO_IO_HPP

/**
 * @file
 * @brief YAML scenario files.
 *
 * Every physical quantity carries a unit suffix on its key: `_s`, `_m`,
 * `_kmh` or `_mps`, `_deg` or `_rad`. A bare key such as `speed` is rejected
 * with a "missing unit tag" error, as is any key the schema does not know.
 * See scenarios/README.md for the field list.
 */

#include "coopadmm/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace coopadmm {

namespace detail::io {

inline std::string where(const YAML::Node & n, const std::string & source)
{
  const auto m = n.Mark();
  std::string out = source.empty() ? std::string("<input>") : source;
  if (m.line >= 0) { out += ":" + std::to_string(m.line + 1); }
  return out;
}

[[noreturn]] inline void fail(const YAML::Node & n, const std::string & source,
  const std::string & field, const std::string & message)
{
  throw ParseError(field, where(n, source) + ": " + field + ": " + message);
}

/// Quantities that need a unit suffix, with the accepted suffixes and SI factors.
struct Quantity
{
  const char * base;
  std::vector<std::pair<const char *, double>> units;
};

inline const std::vector<std::pair<const char *, double>> & seconds_units()
{
  static const std::vector<std::pair<const char *, double>> u{{"_s", 1.0}};
  return u;
}
inline const std::vector<std::pair<const char *, double>> & meter_units()
{
  static const std::vector<std::pair<const char *, double>> u{{"_m", 1.0}};
  return u;
}
inline const std::vector<std::pair<const char *, double>> & speed_units()
{
  static const std::vector<std::pair<const char *, double>> u{{"_kmh", 1.0 / 3.6}, {"_mps", 1.0}};
  return u;
}
inline const std::vector<std::pair<const char *, double>> & angle_units()
{
  static const std::vector<std::pair<const char *, double>> u{{"_deg", kPi / 180.0}, {"_rad", 1.0}};
  return u;
}

class Block
{
public:
  Block(YAML::Node node, std::string path, std::string source)
      : node_(std::move(node)), path_(std::move(path)), source_(std::move(source))
  {
    if (!node_.IsMap()) { fail(node_, source_, path_, "expected a mapping"); }
  }

  /// Declare the allowed keys, then reject anything else.
  void check_keys(const std::set<std::string> & plain,
    const std::vector<std::pair<std::string, const std::vector<std::pair<const char *, double>> *>> & tagged) const
  {
    for (const auto & kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (plain.count(key)) { continue; }
      bool known = false;
      for (const auto & [base, units] : tagged) {
        if (key == base) {
          std::string list;
          for (const auto & u : *units) { list += (list.empty() ? "" : " or ") + base + u.first; }
          fail(kv.first, source_, field(key), "missing unit tag (use " + list + ")");
        }
        for (const auto & u : *units) {
          if (key == base + u.first) { known = true; }
        }
      }
      if (!known) { fail(kv.first, source_, field(key), "unknown key"); }
    }
  }

  std::string field(const std::string & key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string & key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string & key) const
  {
    const YAML::Node n = node_[key];
    if (!n) { fail(node_, source_, field(key), "required field is missing"); }
    return n;
  }

  double number(const YAML::Node & n, const std::string & key) const
  {
    try {
      return n.as<double>();
    } catch (const YAML::Exception &) {
      fail(n, source_, field(key), "expected a number");
    }
  }

  double scalar(const std::string & key) const { return number(get(key), key); }

  int integer(const std::string & key) const
  {
    const YAML::Node n = get(key);
    try {
      return n.as<int>();
    } catch (const YAML::Exception &) {
      fail(n, source_, field(key), "expected an integer");
    }
  }

  /// Value of `base` with one of its unit suffixes, converted to SI.
  std::optional<double> tagged(const std::string & base,
    const std::vector<std::pair<const char *, double>> & units, bool required) const
  {
    std::optional<double> out;
    for (const auto & [suffix, factor] : units) {
      const std::string key = base + suffix;
      if (!has(key)) { continue; }
      if (out) { fail(node_, source_, field(base), "given with more than one unit"); }
      out = scalar(key) * factor;
    }
    if (!out && required) { fail(node_, source_, field(base), "required field is missing"); }
    return out;
  }

  const YAML::Node & node() const { return node_; }
  const std::string & source() const { return source_; }

private:
  YAML::Node node_;
  std::string path_;
  std::string source_;
};

inline std::string vehicle_path(std::size_t index) { return "vehicles[" + std::to_string(index) + "]"; }

inline VehicleState parse_pose(const Block & b)
{
  b.check_keys({}, {{"x", &meter_units()}, {"y", &meter_units()}, {"heading", &angle_units()}});
  return {*b.tagged("x", meter_units(), true), *b.tagged("y", meter_units(), true),
    normalize_angle(*b.tagged("heading", angle_units(), true))};
}

inline VehicleSpec parse_vehicle(const Block & b, std::size_t index)
{
  b.check_keys({"id", "reference_path", "initial_pose"},
    {{"wheelbase", &meter_units()}, {"speed", &speed_units()}, {"steer_min", &angle_units()},
      {"steer_max", &angle_units()}, {"position_bounds", &meter_units()}});
  VehicleSpec v;
  v.id = b.integer("id");
  v.wheelbase = *b.tagged("wheelbase", meter_units(), true);
  v.speed = *b.tagged("speed", speed_units(), true);
  v.steer_min = *b.tagged("steer_min", angle_units(), true);
  v.steer_max = *b.tagged("steer_max", angle_units(), true);
  if (b.has("position_bounds_m")) {
    const YAML::Node pb = b.get("position_bounds_m");
    const std::string f = b.field("position_bounds_m");
    if (!pb.IsSequence() || pb.size() != 4) {
      fail(pb, b.source(), f, "expected [x_min, x_max, y_min, y_max]");
    }
    v.position_bounds = {b.number(pb[0], "position_bounds_m"), b.number(pb[1], "position_bounds_m"),
      b.number(pb[2], "position_bounds_m"), b.number(pb[3], "position_bounds_m")};
  }
  v.initial_state = parse_pose(Block(b.get("initial_pose"), b.field("initial_pose"), b.source()));

  const YAML::Node path = b.get("reference_path");
  if (!path.IsSequence()) { fail(path, b.source(), b.field("reference_path"), "expected a list"); }
  bool all_headings = path.size() > 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Block w(path[i], b.field("reference_path") + "[" + std::to_string(i) + "]", b.source());
    w.check_keys({}, {{"x", &meter_units()}, {"y", &meter_units()}, {"heading", &angle_units()}});
    const auto heading = w.tagged("heading", angle_units(), false);
    all_headings = all_headings && heading.has_value();
    v.reference_path.push_back({*w.tagged("x", meter_units(), true), *w.tagged("y", meter_units(), true),
      heading ? normalize_angle(*heading) : 0.0});
  }
  if (!all_headings) { assign_tangent_headings(v.reference_path); }
  try {
    v.validate();
  } catch (const ScenarioError & e) {
    fail(b.node(), b.source(), vehicle_path(index), e.what());
  }
  return v;
}

inline ScenarioParams parse_params(const Block & b)
{
  b.check_keys({"Np", "q_position", "q_heading", "r_weight", "rho0", "eps_abs", "eps_rel", "max_iters",
                 "slack_penalty", "reference_anchor"},
    {{"Ts", &seconds_units()}, {"d_safe", &meter_units()}, {"d_perc", &meter_units()},
      {"sim_duration", &seconds_units()}});
  ScenarioParams p;
  if (auto v = b.tagged("Ts", seconds_units(), false)) { p.Ts = *v; }
  if (b.has("Np")) { p.Np = b.integer("Np"); }
  if (auto v = b.tagged("d_safe", meter_units(), false)) { p.d_safe = *v; }
  p.d_perc = b.tagged("d_perc", meter_units(), false);
  if (b.has("q_position")) { p.q_position = b.scalar("q_position"); }
  if (b.has("q_heading")) { p.q_heading = b.scalar("q_heading"); }
  if (b.has("r_weight")) { p.r_weight = b.scalar("r_weight"); }
  if (b.has("rho0")) { p.rho0 = b.scalar("rho0"); }
  if (b.has("eps_abs")) { p.eps_abs = b.scalar("eps_abs"); }
  if (b.has("eps_rel")) { p.eps_rel = b.scalar("eps_rel"); }
  if (b.has("max_iters")) { p.max_iters = b.integer("max_iters"); }
  if (auto v = b.tagged("sim_duration", seconds_units(), false)) { p.sim_duration = *v; }
  if (b.has("slack_penalty")) { p.slack_penalty = b.scalar("slack_penalty"); }
  if (b.has("reference_anchor")) {
    const YAML::Node n = b.get("reference_anchor");
    const std::string a = n.IsScalar() ? n.as<std::string>() : std::string();
    if (a == "projection") {
      p.reference_anchor = ReferenceAnchor::projection;
    } else if (a == "clock") {
      p.reference_anchor = ReferenceAnchor::clock;
    } else {
      fail(n, b.source(), b.field("reference_anchor"), "expected projection or clock");
    }
  }
  return p;
}

}  // namespace detail::io

/**
 * @brief Parse and validate a scenario document.
 * @param source name used in error messages (usually the file path)
 * @throws ParseError naming the offending field, with file:line context
 */
inline Scenario parse_scenario(const std::string & text, const std::string & source = {})
{
  using namespace detail::io;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException & e) {
    throw ParseError("<document>", (source.empty() ? std::string("<input>") : source) + ":" +
                                     std::to_string(e.mark.line + 1) + ": malformed YAML: " + e.msg);
  }
  if (!root || root.IsNull()) { throw ParseError("<document>", source + ": empty scenario document"); }
  const Block top(root, "", source);
  top.check_keys({"name", "params", "vehicles"}, {});
  Scenario sc;
  if (top.has("name")) { sc.name = top.get("name").as<std::string>(); }
  if (top.has("params")) { sc.params = parse_params(Block(top.get("params"), "params", source)); }
  const YAML::Node vehicles = top.get("vehicles");
  if (!vehicles.IsSequence() || vehicles.size() == 0) {
    fail(vehicles, source, "vehicles", "expected a non-empty list");
  }
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    sc.vehicles.push_back(parse_vehicle(Block(vehicles[i], vehicle_path(i), source), i));
  }
  try {
    sc.validate();
  } catch (const Error & e) {
    fail(root, source, "params", e.what());
  }
  return sc;
}

inline Scenario load_scenario(const std::string & path)
{
  std::ifstream in(path);
  if (!in) { throw ParseError("<file>", path + ": cannot open scenario file"); }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

/// YAML text in SI units that parse_scenario() maps back to an equal Scenario.
inline std::string serialize_scenario(const Scenario & sc)
{
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  const auto & p = sc.params;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << sc.name;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "Ts_s" << YAML::Value << p.Ts;
  out << YAML::Key << "Np" << YAML::Value << p.Np;
  out << YAML::Key << "d_safe_m" << YAML::Value << p.d_safe;
  if (p.d_perc) { out << YAML::Key << "d_perc_m" << YAML::Value << *p.d_perc; }
  out << YAML::Key << "q_position" << YAML::Value << p.q_position;
  out << YAML::Key << "q_heading" << YAML::Value << p.q_heading;
  out << YAML::Key << "r_weight" << YAML::Value << p.r_weight;
  out << YAML::Key << "rho0" << YAML::Value << p.rho0;
  out << YAML::Key << "eps_abs" << YAML::Value << p.eps_abs;
  out << YAML::Key << "eps_rel" << YAML::Value << p.eps_rel;
  out << YAML::Key << "max_iters" << YAML::Value << p.max_iters;
  out << YAML::Key << "sim_duration_s" << YAML::Value << p.sim_duration;
  out << YAML::Key << "slack_penalty" << YAML::Value << p.slack_penalty;
  out << YAML::Key << "reference_anchor" << YAML::Value << to_string(p.reference_anchor);
  out << YAML::EndMap;
  out << YAML::Key << "vehicles" << YAML::Value << YAML::BeginSeq;
  for (const auto & v : sc.vehicles) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << v.id;
    out << YAML::Key << "wheelbase_m" << YAML::Value << v.wheelbase;
    out << YAML::Key << "speed_mps" << YAML::Value << v.speed;
    out << YAML::Key << "steer_min_rad" << YAML::Value << v.steer_min;
    out << YAML::Key << "steer_max_rad" << YAML::Value << v.steer_max;
    out << YAML::Key << "position_bounds_m" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << v.position_bounds.x_min << v.position_bounds.x_max << v.position_bounds.y_min
        << v.position_bounds.y_max << YAML::EndSeq;
    out << YAML::Key << "initial_pose" << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "x_m" << YAML::Value << v.initial_state.rx << YAML::Key << "y_m"
        << YAML::Value << v.initial_state.ry << YAML::Key << "heading_rad" << YAML::Value
        << v.initial_state.theta << YAML::EndMap;
    out << YAML::Key << "reference_path" << YAML::Value << YAML::BeginSeq;
    for (const auto & w : v.reference_path) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "x_m" << YAML::Value << w.x << YAML::Key
          << "y_m" << YAML::Value << w.y << YAML::Key << "heading_rad" << YAML::Value << w.heading
          << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace coopadmm

#endif  // COOPADMM_SCENARIO_IO_HPP
