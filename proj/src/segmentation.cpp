#include <kinprim/segmentation.hpp>

#include <kinprim/error.hpp>

#include <algorithm>
#include <cmath>

namespace kinprim {

void SegmentationParams::validate() const {
  if (!(prominence_frac >= 0.0 && prominence_frac < 1.0)) throw ParameterError("prominence_frac must be in [0,1)");
  if (!(min_duration >= 0.0)) throw ParameterError("min_duration must be >= 0");
  if (length < 2) throw ParameterError("resample length L must be >= 2");
}

namespace {

struct Candidate {
  std::size_t index;
  double prominence;
};

// Local minima (plateaus resolve to their middle sample) with their
// topographic prominence in the inverted profile.
std::vector<Candidate> find_minima(const std::vector<double>& v) {
  std::vector<Candidate> out;
  const std::size_t n = v.size();
  if (n < 3) return out;
  std::size_t i = 1;
  while (i + 1 < n) {
    std::size_t j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    if (j + 1 >= n) break;
    if (v[i - 1] > v[i] && v[j + 1] > v[j]) {
      const double m = v[i];
      double left = m;
      for (std::size_t k = i; k-- > 0;) {
        if (v[k] < m) break;
        left = std::max(left, v[k]);
      }
      double right = m;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (v[k] < m) break;
        right = std::max(right, v[k]);
      }
      out.push_back({(i + j) / 2, std::min(left, right) - m});
    }
    i = j + 1;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> detect_boundaries(const VelocityProfile& vp, const SegmentationParams& params) {
  params.validate();
  if (vp.samples.empty()) throw ParameterError("detect_boundaries: empty velocity profile");
  const std::size_t last = vp.samples.size() - 1;
  if (last == 0) return {0};

  std::size_t min_gap = 1;
  if (vp.dt > 0.0 && params.min_duration > 0.0)
    min_gap = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(params.min_duration / vp.dt - 1e-9)));

  const double peak = *std::max_element(vp.samples.begin(), vp.samples.end());
  const double threshold = params.prominence_frac * peak;
  auto candidates = find_minima(vp.samples);
  std::erase_if(candidates, [&](const Candidate& c) { return c.prominence < threshold; });
  // Most prominent minima claim their neighborhood first; the accepted set
  // for a higher threshold is therefore a subset of that for a lower one.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.prominence > b.prominence; });

  std::vector<std::size_t> accepted{0, last};
  for (const auto& c : candidates) {
    const bool clear = std::all_of(accepted.begin(), accepted.end(), [&](std::size_t b) {
      return (c.index > b ? c.index - b : b - c.index) >= min_gap;
    });
    if (clear) accepted.push_back(c.index);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

std::vector<double> resample_linear(std::span<const double> x, std::size_t length) {
  if (x.empty()) throw ParameterError("resample_linear: empty input");
  if (length < 2) throw ParameterError("resample_linear: length must be >= 2");
  std::vector<double> out(length);
  const std::size_t n = x.size();
  if (n == 1) {
    std::fill(out.begin(), out.end(), x[0]);
    return out;
  }
  const double span = static_cast<double>(n - 1);
  const double steps = static_cast<double>(length - 1);
  for (std::size_t k = 0; k < length; ++k) {
    const double pos = static_cast<double>(k) * span / steps;
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= n - 1) {
      out[k] = x[n - 1];
      continue;
    }
    const double f = pos - static_cast<double>(i);
    out[k] = f == 0.0 ? x[i] : x[i] + f * (x[i + 1] - x[i]);
  }
  out[length - 1] = x[n - 1];
  return out;
}

SegmentationResult extract_submovements(const VelocityProfile& vp, std::span<const std::size_t> boundaries,
                                        const SegmentationParams& params, const RecordingMeta& meta) {
  params.validate();
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (boundaries[i] >= vp.samples.size()) throw ParameterError("boundary index beyond profile end");
    if (i > 0 && boundaries[i] < boundaries[i - 1]) throw ParameterError("boundaries must be sorted");
  }
  SegmentationResult result;
  for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
    const std::size_t a = boundaries[i], b = boundaries[i + 1];
    if (b - a + 1 < 2) {
      ++result.skipped;
      continue;
    }
    SubMovement s;
    s.recording_id = meta.recording_id;
    s.action_label = meta.action_label;
    s.start_idx = a;
    s.end_idx = b;
    s.raw_duration = static_cast<double>(b - a) * vp.dt;
    s.profile = resample_linear(std::span<const double>(vp.samples).subspan(a, b - a + 1), params.length);
    result.submovements.push_back(std::move(s));
  }
  return result;
}

SegmentationResult segment_profile(const VelocityProfile& vp, const SegmentationParams& params) {
  const auto boundaries = detect_boundaries(vp, params);
  if (boundaries.size() < 2) return {{}, 1};
  return extract_submovements(vp, boundaries, params, {vp.source_recording, vp.action_label});
}

nlohmann::json submovements_to_json(std::span<const SubMovement> subs) {
  auto out = nlohmann::json::array();
  for (const auto& s : subs) {
    out.push_back({{"recording_id", s.recording_id},
                   {"action", s.action_label},
                   {"start_idx", s.start_idx},
                   {"end_idx", s.end_idx},
                   {"duration_s", s.raw_duration},
                   {"profile", s.profile}});
  }
  return out;
}

std::vector<SubMovement> submovements_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw SchemaError("sub-movement set must be a JSON array");
  std::vector<SubMovement> out;
  try {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& e = doc[i];
      SubMovement s;
      s.recording_id = e.at("recording_id").get<std::string>();
      s.action_label = e.at("action").get<std::string>();
      s.start_idx = e.at("start_idx").get<std::size_t>();
      s.end_idx = e.at("end_idx").get<std::size_t>();
      s.raw_duration = e.at("duration_s").get<double>();
      s.profile = e.at("profile").get<std::vector<double>>();
      if (s.start_idx >= s.end_idx) throw SchemaError("sub-movement " + std::to_string(i) + ": start_idx >= end_idx");
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("sub-movement set: ") + e.what());
  }
  return out;
}

}  // namespace kinprim
