#pragma once

#include <kinprim/kinematics.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

enum class PathFamily { circle, line, ellipse, zigzag, spiral };
enum class SpeedLaw { constant, two_thirds_power };

std::string to_string(PathFamily f);
std::string to_string(SpeedLaw s);
PathFamily parse_path_family(const std::string& name);
SpeedLaw parse_speed_law(const std::string& name);

// Geometry of the hand path, meters. Each family reads only its own fields:
//   circle: radius              line: extent
//   ellipse: semi_major, semi_minor
//   zigzag: extent, amplitude, teeth
//   spiral: inner_radius, outer_radius, turns
struct PathGeometry {
  double radius = 0.12;
  double extent = 0.30;
  double semi_major = 0.18;
  double semi_minor = 0.08;
  double amplitude = 0.06;
  int teeth = 4;
  double inner_radius = 0.03;
  double outer_radius = 0.15;
  double turns = 2.0;
};

// Parametric recipe for one synthetic action class.
//
// With SpeedLaw::constant the hand moves at `gain` m/s along the path; with
// SpeedLaw::two_thirds_power its speed is gain * curvature^(-1/3). Closed
// paths (circle, ellipse) loop; open paths run back and forth.
struct SynthSpec {
  std::string class_name;
  PathFamily path_family = PathFamily::circle;
  PathGeometry geometry;
  SpeedLaw speed_law = SpeedLaw::constant;
  double gain = 0.3;
  double duration = 4.0;  // seconds
  double fps = 100.0;
  double noise_std = 0.0;  // meters, per coordinate
  std::uint64_t seed = 0;
  int instances = 1;         // recordings per class (used by the generator command)
  double gain_jitter = 0.0;  // relative, uniform in [-jitter, +jitter] per recording
  bool random_phase = true;  // seeded random starting point along the path

  void validate() const;
};

SynthSpec synth_spec_from_json(const nlohmann::json& doc);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

// Names of the six arm markers produced by the generator.
const std::vector<std::string>& arm_marker_names();

// Deterministic in spec (including seed); equal specs give bit-identical output.
Trajectory generate_action(const SynthSpec& spec);

}  // namespace kinprim
