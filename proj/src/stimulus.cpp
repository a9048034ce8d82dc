#include <kinprim/stimulus.hpp>

#include <kinprim/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinprim {

StimulusTransform parse_stimulus_transform(const std::string& name) {
  if (name == "UP") return StimulusTransform::UP;
  if (name == "INV") return StimulusTransform::INV;
  if (name == "MIRROR") return StimulusTransform::MIRROR;
  throw ParameterError("unknown orientation '" + name + "' (expected UP, INV or MIRROR)");
}

std::string to_string(StimulusTransform t) {
  switch (t) {
    case StimulusTransform::UP: return "UP";
    case StimulusTransform::INV: return "INV";
    case StimulusTransform::MIRROR: return "MIRROR";
  }
  return "?";
}

nlohmann::json export_stimulus(const Trajectory& traj, const StimulusOptions& options) {
  traj.validate();
  if (!(options.fps > 0.0)) throw ParameterError("stimulus fps must be > 0");
  const std::size_t src_frames = traj.frame_count();
  const std::size_t dots = traj.marker_count();
  const double duration = static_cast<double>(src_frames - 1) / traj.fps;
  const auto out_frames = static_cast<std::size_t>(std::floor(duration * options.fps + 1e-9)) + 1;

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(out_frames * dots);
  for (std::size_t f = 0; f < out_frames; ++f) {
    const double pos = std::min(static_cast<double>(f) / options.fps * traj.fps, static_cast<double>(src_frames - 1));
    const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), src_frames - 2);
    const double w = pos - static_cast<double>(i);
    for (std::size_t m = 0; m < dots; ++m) {
      const Eigen::Vector3d p = (1.0 - w) * traj.at(i, m) + w * traj.at(i + 1, m);
      pts.emplace_back(p.x(), p.y());
    }
  }

  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector2d center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo).maxCoeff();
  const double scale = half > 0.0 ? 1.0 / half : 1.0;

  auto frames = nlohmann::json::array();
  for (std::size_t f = 0; f < out_frames; ++f) {
    auto frame = nlohmann::json::array();
    for (std::size_t m = 0; m < dots; ++m) {
      const Eigen::Vector2d q = (pts[f * dots + m] - center) * scale;
      frame.push_back({q.x(), q.y()});
    }
    frames.push_back(std::move(frame));
  }

  nlohmann::json transforms = nlohmann::json::object();
  for (auto t : options.transforms) {
    nlohmann::json matrix;
    switch (t) {
      case StimulusTransform::UP: matrix = {{1, 0}, {0, 1}}; break;
      case StimulusTransform::INV: matrix = {{1, 0}, {0, -1}}; break;
      case StimulusTransform::MIRROR: matrix = {{-1, 0}, {0, 1}}; break;
    }
    transforms[to_string(t)] = {{"matrix", matrix}, {"about", {0.0, 0.0}}};
  }

  return {{"action", traj.action_label},
          {"recording_id", traj.recording_id},
          {"fps", options.fps},
          {"markers", traj.markers},
          {"dot_count", dots},
          {"frame_count", out_frames},
          {"dots", std::move(frames)},
          {"display", {{"units", "normalized"}, {"center", {0.0, 0.0}}, {"half_extent", 1.0}, {"y_axis", "up"}}},
          {"orientation_transforms", std::move(transforms)},
          {"source", {{"fps", traj.fps}, {"frames", src_frames}, {"scale_m", half}}}};
}

}  // namespace kinprim
