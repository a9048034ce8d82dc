#pragma once

#include <kinprim/kinematics.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace kinprim {

struct SegmentationParams {
  // Minimum dip below the lower of the two flanking maxima, as a fraction of
  // the profile maximum.
  double prominence_frac = 0.05;
  double min_duration = 0.1;  // seconds between consecutive boundaries
  std::size_t length = 50;    // resampled profile length L

  void validate() const;
};

// One velocity segment between consecutive boundaries, resampled to L points.
struct SubMovement {
  std::string recording_id;
  std::string action_label;
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  double raw_duration = 0.0;  // seconds
  std::vector<double> profile;
};

struct RecordingMeta {
  std::string recording_id;
  std::string action_label;
};

struct SegmentationResult {
  std::vector<SubMovement> submovements;
  std::size_t skipped = 0;  // segments shorter than 2 samples
};

// Boundary indices: 0, accepted interior minima, last index (sorted, unique).
std::vector<std::size_t> detect_boundaries(const VelocityProfile& vp, const SegmentationParams& params);

SegmentationResult extract_submovements(const VelocityProfile& vp, std::span<const std::size_t> boundaries,
                                        const SegmentationParams& params, const RecordingMeta& meta);

// detect_boundaries + extract_submovements, metadata taken from the profile.
SegmentationResult segment_profile(const VelocityProfile& vp, const SegmentationParams& params);

// Linear interpolation of x onto `length` uniformly spaced points spanning it.
// Endpoints are reproduced exactly.
std::vector<double> resample_linear(std::span<const double> x, std::size_t length);

nlohmann::json submovements_to_json(std::span<const SubMovement> subs);
std::vector<SubMovement> submovements_from_json(const nlohmann::json& doc);

}  // namespace kinprim
