#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

enum class TrajectoryFormat { csv, json };

TrajectoryFormat parse_format(const std::string& name);
std::string to_string(TrajectoryFormat f);

// Time-indexed marker positions (meters) for one recording. Positions are
// stored frame-major: positions[frame * marker_count() + marker]. Planar
// recordings keep z = 0 and dim = 2.
struct Trajectory {
  std::string action_label;
  std::string recording_id;
  double fps = 0.0;
  int dim = 3;
  std::vector<std::string> markers;
  std::vector<Eigen::Vector3d> positions;

  std::size_t frame_count() const { return markers.empty() ? 0 : positions.size() / markers.size(); }
  std::size_t marker_count() const { return markers.size(); }

  const Eigen::Vector3d& at(std::size_t frame, std::size_t marker) const {
    return positions[frame * markers.size() + marker];
  }
  Eigen::Vector3d& at(std::size_t frame, std::size_t marker) {
    return positions[frame * markers.size() + marker];
  }

  std::optional<std::size_t> marker_index(const std::string& name) const;

  // Throws ValidationError on a broken invariant.
  void validate() const;
};

struct VelocityProfile {
  std::vector<double> samples;  // m/s
  double dt = 0.0;              // seconds per sample
  std::string source_recording;
  std::string action_label;

  std::size_t size() const { return samples.size(); }
};

// Which markers contribute to the speed signal.
struct MarkerSelect {
  std::optional<std::string> name;  // empty = mean over all markers

  static MarkerSelect all_mean() { return {}; }
  static MarkerSelect named(std::string marker) { return {std::move(marker)}; }
};

Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryFormat format);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path, TrajectoryFormat format);

Trajectory trajectory_from_json(const nlohmann::json& doc);
nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text, std::string action_label,
                               std::string recording_id, double fps);
std::string trajectory_to_csv(const Trajectory& traj);

// Per-frame speed: boxcar-smoothed (centered, edges truncated) mean over the
// selected markers of |p[t+1] - p[t]| * fps. Length is frame_count() - 1.
VelocityProfile tangential_velocity(const Trajectory& traj,
                                    const MarkerSelect& select = MarkerSelect::all_mean(),
                                    int smooth_window = 5);

// Centered boxcar with truncated edges. window must be odd and positive.
std::vector<double> boxcar_smooth(const std::vector<double>& x, int window);

}  // namespace kinprim
