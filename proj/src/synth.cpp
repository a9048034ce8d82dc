#include <kinprim/synth.hpp>

#include <kinprim/error.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

namespace kinprim {

namespace {

using Vec2 = Eigen::Vector2d;
constexpr double pi = std::numbers::pi;

// Planar curve over parameter s in [0, length()].
class Curve {
public:
  virtual ~Curve() = default;
  virtual Vec2 pos(double s) const = 0;
  virtual Vec2 d1(double s) const = 0;
  virtual Vec2 d2(double s) const = 0;
  virtual double length() const = 0;
  virtual bool closed() const = 0;

  double curvature(double s) const {
    const Vec2 a = d1(s), b = d2(s);
    const double speed = a.norm();
    return std::abs(a.x() * b.y() - a.y() * b.x()) / (speed * speed * speed);
  }
};

class Ellipse final : public Curve {
public:
  Ellipse(double a, double b) : a_(a), b_(b) {}
  Vec2 pos(double s) const override { return {a_ * std::cos(s), b_ * std::sin(s)}; }
  Vec2 d1(double s) const override { return {-a_ * std::sin(s), b_ * std::cos(s)}; }
  Vec2 d2(double s) const override { return {-a_ * std::cos(s), -b_ * std::sin(s)}; }
  double length() const override { return 2 * pi; }
  bool closed() const override { return true; }

private:
  double a_, b_;
};

class Line final : public Curve {
public:
  explicit Line(double extent) : extent_(extent) {}
  Vec2 pos(double s) const override { return {extent_ * (s - 0.5), 0.0}; }
  Vec2 d1(double) const override { return {extent_, 0.0}; }
  Vec2 d2(double) const override { return {0.0, 0.0}; }
  double length() const override { return 1.0; }
  bool closed() const override { return false; }

private:
  double extent_;
};

// Polyline alternating between +amplitude/2 and -amplitude/2; one unit of s per stroke.
class Zigzag final : public Curve {
public:
  Zigzag(double extent, double amplitude, int teeth) : extent_(extent), amp_(amplitude), teeth_(teeth) {}
  Vec2 pos(double s) const override {
    const int k = segment(s);
    const double f = s - k;
    return vertex(k) + f * (vertex(k + 1) - vertex(k));
  }
  Vec2 d1(double s) const override {
    const int k = segment(s);
    return vertex(k + 1) - vertex(k);
  }
  Vec2 d2(double) const override { return {0.0, 0.0}; }
  double length() const override { return teeth_; }
  bool closed() const override { return false; }

private:
  int segment(double s) const { return std::clamp(static_cast<int>(std::floor(s)), 0, teeth_ - 1); }
  Vec2 vertex(int k) const {
    return {extent_ * (static_cast<double>(k) / teeth_ - 0.5), (k % 2 == 0 ? 0.5 : -0.5) * amp_};
  }
  double extent_, amp_;
  int teeth_;
};

// Archimedean spiral r(s) = r0 + (r1 - r0) s / (2 pi turns), s = polar angle.
class Spiral final : public Curve {
public:
  Spiral(double r0, double r1, double turns) : r0_(r0), turns_(turns), rate_((r1 - r0) / (2 * pi * turns)) {}
  Vec2 pos(double s) const override {
    const double r = r0_ + rate_ * s;
    return {r * std::cos(s), r * std::sin(s)};
  }
  Vec2 d1(double s) const override {
    const double r = r0_ + rate_ * s;
    return {rate_ * std::cos(s) - r * std::sin(s), rate_ * std::sin(s) + r * std::cos(s)};
  }
  Vec2 d2(double s) const override {
    const double r = r0_ + rate_ * s;
    return {-2 * rate_ * std::sin(s) - r * std::cos(s), 2 * rate_ * std::cos(s) - r * std::sin(s)};
  }
  double length() const override { return 2 * pi * turns_; }
  bool closed() const override { return false; }

private:
  double r0_, turns_, rate_;
};

std::unique_ptr<Curve> make_curve(const SynthSpec& spec) {
  const auto& g = spec.geometry;
  switch (spec.path_family) {
    case PathFamily::circle: return std::make_unique<Ellipse>(g.radius, g.radius);
    case PathFamily::ellipse: return std::make_unique<Ellipse>(g.semi_major, g.semi_minor);
    case PathFamily::line: return std::make_unique<Line>(g.extent);
    case PathFamily::zigzag: return std::make_unique<Zigzag>(g.extent, g.amplitude, g.teeth);
    case PathFamily::spiral: return std::make_unique<Spiral>(g.inner_radius, g.outer_radius, g.turns);
  }
  throw ParameterError("unknown path family");
}

// Maps the unbounded travel parameter onto the curve: closed curves wrap,
// open curves reflect at their ends.
double fold(const Curve& c, double u) {
  const double len = c.length();
  if (c.closed()) return std::fmod(u, len);
  const double m = std::fmod(u, 2 * len);
  return len - std::abs(len - m);
}

// Travel-parameter rate du/dt giving the configured path speed.
double travel_rate(const Curve& c, SpeedLaw law, double gain, double u) {
  const double s = fold(c, u);
  const double ds = c.d1(s).norm();
  const double speed = law == SpeedLaw::constant ? gain : gain * std::pow(c.curvature(s), -1.0 / 3.0);
  return speed / ds;
}

}  // namespace

std::string to_string(PathFamily f) {
  switch (f) {
    case PathFamily::circle: return "circle";
    case PathFamily::line: return "line";
    case PathFamily::ellipse: return "ellipse";
    case PathFamily::zigzag: return "zigzag";
    case PathFamily::spiral: return "spiral";
  }
  return "?";
}

std::string to_string(SpeedLaw s) { return s == SpeedLaw::constant ? "constant" : "two_thirds_power"; }

PathFamily parse_path_family(const std::string& name) {
  if (name == "circle") return PathFamily::circle;
  if (name == "line") return PathFamily::line;
  if (name == "ellipse") return PathFamily::ellipse;
  if (name == "zigzag") return PathFamily::zigzag;
  if (name == "spiral") return PathFamily::spiral;
  throw ParameterError("unknown path_family '" + name + "'");
}

SpeedLaw parse_speed_law(const std::string& name) {
  if (name == "constant") return SpeedLaw::constant;
  if (name == "two_thirds_power") return SpeedLaw::two_thirds_power;
  throw ParameterError("unknown speed_law '" + name + "'");
}

void SynthSpec::validate() const {
  if (class_name.empty()) throw ParameterError("synth spec: class_name is empty");
  if (!(duration > 0.0)) throw ParameterError("synth spec '" + class_name + "': duration must be > 0");
  if (!(fps > 0.0)) throw ParameterError("synth spec '" + class_name + "': fps must be > 0");
  if (!(noise_std >= 0.0)) throw ParameterError("synth spec '" + class_name + "': noise_std must be >= 0");
  if (!(gain > 0.0)) throw ParameterError("synth spec '" + class_name + "': gain must be > 0");
  if (!(gain_jitter >= 0.0 && gain_jitter < 1.0))
    throw ParameterError("synth spec '" + class_name + "': gain_jitter must be in [0,1)");
  if (instances < 1) throw ParameterError("synth spec '" + class_name + "': instances must be >= 1");
  if (duration * fps < 2.0) throw ParameterError("synth spec '" + class_name + "': fewer than 2 frames");
  const auto& g = geometry;
  auto positive = [&](double v, const char* what) {
    if (!(v > 0.0)) throw ParameterError("synth spec '" + class_name + "': " + what + " must be > 0");
  };
  switch (path_family) {
    case PathFamily::circle: positive(g.radius, "radius"); break;
    case PathFamily::ellipse:
      positive(g.semi_major, "semi_major");
      positive(g.semi_minor, "semi_minor");
      break;
    case PathFamily::line: positive(g.extent, "extent"); break;
    case PathFamily::zigzag:
      positive(g.extent, "extent");
      positive(g.amplitude, "amplitude");
      if (g.teeth < 1) throw ParameterError("synth spec '" + class_name + "': teeth must be >= 1");
      break;
    case PathFamily::spiral:
      positive(g.inner_radius, "inner_radius");
      positive(g.turns, "turns");
      if (!(g.outer_radius > g.inner_radius))
        throw ParameterError("synth spec '" + class_name + "': outer_radius must exceed inner_radius");
      break;
  }
  if (speed_law == SpeedLaw::two_thirds_power &&
      (path_family == PathFamily::line || path_family == PathFamily::zigzag))
    throw ParameterError("synth spec '" + class_name + "': two_thirds_power is undefined on the zero-curvature " +
                         to_string(path_family) + " family; use the constant speed law");
}

const std::vector<std::string>& arm_marker_names() {
  static const std::vector<std::string> names{"shoulder", "elbow", "wrist", "palm_1", "palm_2", "palm_3"};
  return names;
}

Trajectory generate_action(const SynthSpec& spec) {
  spec.validate();
  const auto curve = make_curve(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double gain = spec.gain;
  if (spec.gain_jitter > 0.0) gain *= 1.0 + spec.gain_jitter * (2.0 * unit(rng) - 1.0);
  const double span = curve->closed() ? curve->length() : 2.0 * curve->length();
  double u = spec.random_phase ? span * unit(rng) : 0.0;

  const auto frames = static_cast<std::size_t>(std::floor(spec.duration * spec.fps)) + 1;
  const double dt = 1.0 / spec.fps;
  constexpr int substeps = 16;
  const double h = dt / substeps;
  auto rate = [&](double x) { return travel_rate(*curve, spec.speed_law, gain, x); };

  // Shoulder at the origin, hand path centered in front of it; the elbow and
  // wrist follow the hand on scaled copies of its path.
  const Vec2 center{0.35, -0.10};
  const double scale[] = {0.0, 0.4, 0.8, 1.0, 1.0, 1.0};
  const Vec2 offset[] = {{0, 0}, {0, -0.12}, {0, -0.05}, {0, 0}, {0.02, 0.0}, {0.0, 0.02}};

  Trajectory t;
  t.action_label = spec.class_name;
  t.recording_id = spec.class_name + "_s" + std::to_string(spec.seed);
  t.fps = spec.fps;
  t.dim = 2;
  t.markers = arm_marker_names();
  t.positions.reserve(frames * t.markers.size());

  std::normal_distribution<double> noise(0.0, spec.noise_std > 0.0 ? spec.noise_std : 1.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const Vec2 hand = center + curve->pos(fold(*curve, u));
    for (std::size_t m = 0; m < t.markers.size(); ++m) {
      Vec2 p = scale[m] * hand + offset[m];
      if (spec.noise_std > 0.0) p += Vec2{noise(rng), noise(rng)};
      t.positions.emplace_back(p.x(), p.y(), 0.0);
    }
    for (int k = 0; k < substeps; ++k) {
      const double k1 = rate(u);
      const double k2 = rate(u + 0.5 * h * k1);
      const double k3 = rate(u + 0.5 * h * k2);
      const double k4 = rate(u + h * k3);
      u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return t;
}

// --- JSON -------------------------------------------------------------------

SynthSpec synth_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("synth spec must be a JSON object");
  SynthSpec s;
  try {
    if (!doc.contains("class_name")) throw SchemaError("synth spec: missing field 'class_name'");
    s.class_name = doc.at("class_name").get<std::string>();
    if (!doc.contains("path_family")) throw SchemaError("synth spec '" + s.class_name + "': missing field 'path_family'");
    s.path_family = parse_path_family(doc.at("path_family").get<std::string>());
    s.speed_law = parse_speed_law(doc.value("speed_law", std::string("constant")));
    s.gain = doc.value("gain", s.gain);
    s.duration = doc.value("duration", s.duration);
    s.fps = doc.value("fps", s.fps);
    s.noise_std = doc.value("noise_std", s.noise_std);
    s.seed = doc.value("seed", s.seed);
    s.instances = doc.value("instances", s.instances);
    s.gain_jitter = doc.value("gain_jitter", s.gain_jitter);
    s.random_phase = doc.value("random_phase", s.random_phase);
    if (doc.contains("geometry")) {
      const auto& g = doc.at("geometry");
      auto& o = s.geometry;
      o.radius = g.value("radius", o.radius);
      o.extent = g.value("extent", o.extent);
      o.semi_major = g.value("semi_major", o.semi_major);
      o.semi_minor = g.value("semi_minor", o.semi_minor);
      o.amplitude = g.value("amplitude", o.amplitude);
      o.teeth = g.value("teeth", o.teeth);
      o.inner_radius = g.value("inner_radius", o.inner_radius);
      o.outer_radius = g.value("outer_radius", o.outer_radius);
      o.turns = g.value("turns", o.turns);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  const auto& g = s.geometry;
  return {{"class_name", s.class_name},
          {"path_family", to_string(s.path_family)},
          {"speed_law", to_string(s.speed_law)},
          {"gain", s.gain},
          {"duration", s.duration},
          {"fps", s.fps},
          {"noise_std", s.noise_std},
          {"seed", s.seed},
          {"instances", s.instances},
          {"gain_jitter", s.gain_jitter},
          {"random_phase", s.random_phase},
          {"geometry",
           {{"radius", g.radius},
            {"extent", g.extent},
            {"semi_major", g.semi_major},
            {"semi_minor", g.semi_minor},
            {"amplitude", g.amplitude},
            {"teeth", g.teeth},
            {"inner_radius", g.inner_radius},
            {"outer_radius", g.outer_radius},
            {"turns", g.turns}}}};
}

}  // namespace kinprim
