#pragma once

#include <kinprim/kinematics.hpp>

#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

// Display-space transforms applied to the shared dot coordinates by the
// experiment UI. INV is the upside-down flip about the display center;
// MIRROR is the left-right flip.
enum class StimulusTransform { UP, INV, MIRROR };

StimulusTransform parse_stimulus_transform(const std::string& name);
std::string to_string(StimulusTransform t);

struct StimulusOptions {
  double fps = 30.0;
  std::vector<StimulusTransform> transforms{StimulusTransform::UP, StimulusTransform::INV};
};

// Point-light stimulus package: the recording resampled in time to options.fps,
// projected onto the frontal (x, y) plane and normalized so the dot cloud is
// centered at the origin with max |coordinate| = 1.
nlohmann::json export_stimulus(const Trajectory& traj, const StimulusOptions& options = {});

}  // namespace kinprim
