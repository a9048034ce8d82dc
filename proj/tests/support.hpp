#pragma once

#include <kinprim/kinematics.hpp>
#include <kinprim/segmentation.hpp>

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace test_support {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("kinprim_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline kinprim::Trajectory planar_trajectory(const std::vector<std::vector<Eigen::Vector3d>>& frames,
                                             std::vector<std::string> markers, double fps) {
  kinprim::Trajectory t;
  t.action_label = "test";
  t.recording_id = "test_000";
  t.fps = fps;
  t.dim = 3;
  t.markers = std::move(markers);
  for (const auto& f : frames)
    for (const auto& p : f) t.positions.push_back(p);
  return t;
}

inline kinprim::VelocityProfile profile_of(std::vector<double> samples, double dt = 0.01) {
  kinprim::VelocityProfile vp;
  vp.samples = std::move(samples);
  vp.dt = dt;
  vp.source_recording = "rec";
  vp.action_label = "act";
  return vp;
}

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace test_support
