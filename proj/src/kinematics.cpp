#include <kinprim/kinematics.hpp>

#include <kinprim/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace kinprim {

using nlohmann::json;

TrajectoryFormat parse_format(const std::string& name) {
  if (name == "csv") return TrajectoryFormat::csv;
  if (name == "json") return TrajectoryFormat::json;
  throw ParameterError("unknown trajectory format '" + name + "' (expected csv or json)");
}

std::string to_string(TrajectoryFormat f) { return f == TrajectoryFormat::csv ? "csv" : "json"; }

std::optional<std::size_t> Trajectory::marker_index(const std::string& name) const {
  auto it = std::find(markers.begin(), markers.end(), name);
  if (it == markers.end()) return std::nullopt;
  return static_cast<std::size_t>(it - markers.begin());
}

void Trajectory::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError("fps must be positive and finite");
  if (dim != 2 && dim != 3) throw ValidationError("points must be 2-D or 3-D");
  if (markers.empty()) throw ValidationError("trajectory has no markers");
  if (positions.size() % markers.size() != 0)
    throw ValidationError("every frame must carry exactly " + std::to_string(markers.size()) + " points");
  if (frame_count() < 2)
    throw ValidationError("trajectory too short: " + std::to_string(frame_count()) + " frame(s), need at least 2");
  for (std::size_t f = 0; f < frame_count(); ++f) {
    for (std::size_t m = 0; m < markers.size(); ++m) {
      if (!at(f, m).allFinite())
        throw ValidationError("non-finite coordinate at (" + std::to_string(f) + "," + std::to_string(m) +
                              ") [frame " + std::to_string(f) + ", marker '" + markers[m] + "']");
    }
  }
}

// --- JSON -------------------------------------------------------------------

Trajectory trajectory_from_json(const json& doc) {
  auto require = [&](const char* key) -> const json& {
    if (!doc.is_object() || !doc.contains(key)) throw SchemaError(std::string("trajectory: missing field '") + key + "'");
    return doc.at(key);
  };
  Trajectory t;
  try {
    t.action_label = require("action").get<std::string>();
    t.recording_id = require("recording_id").get<std::string>();
    t.fps = require("fps").get<double>();
    t.markers = require("markers").get<std::vector<std::string>>();
  } catch (const json::type_error& e) {
    throw SchemaError(std::string("trajectory: wrong field type: ") + e.what());
  }
  const json& frames = require("frames");
  if (!frames.is_array()) throw SchemaError("trajectory: 'frames' must be an array");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  int dim = 0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const json& frame = frames[f];
    if (!frame.is_array() || frame.size() != t.markers.size())
      throw SchemaError("trajectory: frames[" + std::to_string(f) + "] must hold " + std::to_string(t.markers.size()) +
                        " points");
    for (std::size_t m = 0; m < frame.size(); ++m) {
      const json& p = frame[m];
      const std::string where = "frames[" + std::to_string(f) + "][" + std::to_string(m) + "]";
      if (!p.is_array() || p.size() < 2 || p.size() > 3) throw SchemaError("trajectory: " + where + " must be [x,y] or [x,y,z]");
      if (dim == 0) dim = static_cast<int>(p.size());
      if (static_cast<int>(p.size()) != dim) throw SchemaError("trajectory: " + where + " has inconsistent dimension");
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c].is_null()) v[c] = nan;  // serialized NaN
        else if (p[c].is_number()) v[c] = p[c].get<double>();
        else throw SchemaError("trajectory: " + where + " coordinate " + std::to_string(c) + " is not a number");
      }
      t.positions.push_back(v);
    }
  }
  t.dim = dim == 0 ? 3 : dim;
  t.validate();
  return t;
}

json trajectory_to_json(const Trajectory& traj) {
  json frames = json::array();
  for (std::size_t f = 0; f < traj.frame_count(); ++f) {
    json frame = json::array();
    for (std::size_t m = 0; m < traj.marker_count(); ++m) {
      const auto& p = traj.at(f, m);
      json pt = json::array();
      for (int c = 0; c < traj.dim; ++c) pt.push_back(p[c]);
      frame.push_back(std::move(pt));
    }
    frames.push_back(std::move(frame));
  }
  return json{{"action", traj.action_label},
              {"recording_id", traj.recording_id},
              {"fps", traj.fps},
              {"markers", traj.markers},
              {"frames", std::move(frames)}};
}

// --- CSV --------------------------------------------------------------------
//
// Metadata travels in leading comment lines:
//   # action=<label>
//   # recording_id=<id>
//   # fps=<number>
// followed by the header `frame,marker,x,y[,z]` and one row per (frame, marker).

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::size_t row, const char* field) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw SchemaError("trajectory csv: row " + std::to_string(row) + ": field '" + field + "' is not a number");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Trajectory trajectory_from_csv(const std::string& text, std::string action_label, std::string recording_id, double fps) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  int dim = 0;
  struct Row {
    long frame;
    std::size_t marker;
    Eigen::Vector3d p;
  };
  std::vector<Row> rows;
  std::vector<std::string> markers;
  std::map<std::string, std::size_t> marker_ids;

  while (std::getline(in, line)) {
    ++row;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      sv.remove_prefix(1);
      sv = trim(sv);
      auto eq = sv.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = trim(sv.substr(0, eq));
      auto value = trim(sv.substr(eq + 1));
      if (key == "action") action_label = std::string(value);
      else if (key == "recording_id") recording_id = std::string(value);
      else if (key == "fps") fps = parse_double(value, row, "fps");
      continue;
    }
    auto fields = split(sv);
    if (!have_header) {
      if (fields.size() < 4 || fields.size() > 5 || trim(fields[0]) != "frame" || trim(fields[1]) != "marker" ||
          trim(fields[2]) != "x" || trim(fields[3]) != "y" || (fields.size() == 5 && trim(fields[4]) != "z"))
        throw SchemaError("trajectory csv: row " + std::to_string(row) + ": expected header frame,marker,x,y[,z]");
      dim = static_cast<int>(fields.size()) - 2;
      have_header = true;
      continue;
    }
    if (static_cast<int>(fields.size()) != dim + 2)
      throw SchemaError("trajectory csv: row " + std::to_string(row) + ": expected " + std::to_string(dim + 2) +
                        " fields, got " + std::to_string(fields.size()));
    Row r{};
    auto frame_str = trim(fields[0]);
    auto fres = std::from_chars(frame_str.data(), frame_str.data() + frame_str.size(), r.frame);
    if (fres.ec != std::errc{} || fres.ptr != frame_str.data() + frame_str.size() || r.frame < 0)
      throw SchemaError("trajectory csv: row " + std::to_string(row) + ": field 'frame' is not a nonnegative integer");
    std::string name(trim(fields[1]));
    if (name.empty()) throw SchemaError("trajectory csv: row " + std::to_string(row) + ": field 'marker' is empty");
    auto [it, inserted] = marker_ids.emplace(name, markers.size());
    if (inserted) markers.push_back(name);
    r.marker = it->second;
    r.p = Eigen::Vector3d::Zero();
    static const char* names[] = {"x", "y", "z"};
    for (int c = 0; c < dim; ++c) r.p[c] = parse_double(trim(fields[2 + c]), row, names[c]);
    rows.push_back(r);
  }
  if (!have_header) throw SchemaError("trajectory csv: missing header frame,marker,x,y[,z]");
  if (action_label.empty()) throw SchemaError("trajectory csv: missing '# action=' metadata");
  if (!(fps > 0.0)) throw SchemaError("trajectory csv: missing or invalid '# fps=' metadata");

  Trajectory t;
  t.action_label = std::move(action_label);
  t.recording_id = std::move(recording_id);
  t.fps = fps;
  t.dim = dim;
  t.markers = markers;
  long max_frame = -1;
  for (const auto& r : rows) max_frame = std::max(max_frame, r.frame);
  const std::size_t frames = static_cast<std::size_t>(max_frame + 1);
  const std::size_t m = markers.size();
  t.positions.assign(frames * m, Eigen::Vector3d::Zero());
  std::vector<char> seen(frames * m, 0);
  for (const auto& r : rows) {
    const std::size_t idx = static_cast<std::size_t>(r.frame) * m + r.marker;
    if (seen[idx])
      throw SchemaError("trajectory csv: duplicate row for frame " + std::to_string(r.frame) + ", marker '" +
                        markers[r.marker] + "'");
    seen[idx] = 1;
    t.positions[idx] = r.p;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw SchemaError("trajectory csv: frame " + std::to_string(i / m) + " is missing marker '" + markers[i % m] + "'");
  t.validate();
  return t;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "# action=" << traj.action_label << '\n';
  os << "# recording_id=" << traj.recording_id << '\n';
  os << "# fps=" << format_double(traj.fps) << '\n';
  os << (traj.dim == 3 ? "frame,marker,x,y,z\n" : "frame,marker,x,y\n");
  for (std::size_t f = 0; f < traj.frame_count(); ++f) {
    for (std::size_t m = 0; m < traj.marker_count(); ++m) {
      const auto& p = traj.at(f, m);
      os << f << ',' << traj.markers[m];
      for (int c = 0; c < traj.dim; ++c) os << ',' << format_double(p[c]);
      os << '\n';
    }
  }
  return os.str();
}

Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open trajectory file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (format == TrajectoryFormat::json) {
    json doc;
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw SchemaError("trajectory " + path.string() + ": " + e.what());
    }
    return trajectory_from_json(doc);
  }
  return trajectory_from_csv(buf.str(), "", path.stem().string(), 0.0);
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path, TrajectoryFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  if (format == TrajectoryFormat::json) out << trajectory_to_json(traj).dump() << '\n';
  else out << trajectory_to_csv(traj);
}

// --- velocity ---------------------------------------------------------------

std::vector<double> boxcar_smooth(const std::vector<double>& x, int window) {
  if (window <= 0 || window % 2 == 0) throw ParameterError("smooth_window must be an odd positive integer");
  if (window == 1) return x;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double s = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) s += x[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

VelocityProfile tangential_velocity(const Trajectory& traj, const MarkerSelect& select, int smooth_window) {
  traj.validate();
  std::vector<std::size_t> chosen;
  if (select.name) {
    auto idx = traj.marker_index(*select.name);
    if (!idx) throw ParameterError("unknown marker '" + *select.name + "'");
    chosen.push_back(*idx);
  } else {
    for (std::size_t m = 0; m < traj.marker_count(); ++m) chosen.push_back(m);
  }
  const std::size_t n = traj.frame_count() - 1;
  if (smooth_window <= 0 || smooth_window % 2 == 0) throw ParameterError("smooth_window must be an odd positive integer");
  if (static_cast<std::size_t>(smooth_window) > n)
    throw ParameterError("smooth_window " + std::to_string(smooth_window) + " exceeds profile length " +
                         std::to_string(n));

  std::vector<double> raw(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (auto m : chosen) s += (traj.at(t + 1, m) - traj.at(t, m)).norm();
    raw[t] = s * traj.fps / static_cast<double>(chosen.size());
  }
  VelocityProfile vp;
  vp.samples = boxcar_smooth(raw, smooth_window);
  vp.dt = 1.0 / traj.fps;
  vp.source_recording = traj.recording_id;
  vp.action_label = traj.action_label;
  return vp;
}

}  // namespace kinprim
