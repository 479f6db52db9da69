#include "cohere/stream.hpp"

#include "binary_io.hpp"
#include "png_io.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace cohere {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

float quantize(std::uint8_t v) { return static_cast<float>(v) / 255.0f; }

std::uint8_t gray_of(Rgb8 c) {
  return static_cast<std::uint8_t>(std::lround(0.299 * c.r + 0.587 * c.g + 0.114 * c.b));
}

double triangle_profile(double f, int lap_frames) {
  const double half = 0.5 * lap_frames;
  return f <= half ? f : lap_frames - f;
}

std::vector<Vec2> outline(const ObjectSpec& o) {
  switch (o.shape) {
    case ShapeKind::rectangle:
      return {{o.size.x(), o.size.y()}, {-o.size.x(), o.size.y()}, {o.size.x(), -o.size.y()}, {-o.size.x(), -o.size.y()}};
    case ShapeKind::triangle: {
      const double r = o.size.x();
      return {{0.0, -r}, {r * std::cos(std::numbers::pi / 6), 0.5 * r}, {-r * std::cos(std::numbers::pi / 6), 0.5 * r}};
    }
    case ShapeKind::circle: {
      const double r = o.size.x();
      return {{r, 0.0}, {-r, 0.0}, {0.0, r}, {0.0, -r}};
    }
  }
  return {};
}

Vec2 to_world(const ObjectPose& pose, const Vec2& local) {
  return pose.center + pose.scale * (Eigen::Rotation2Dd(pose.angle) * local);
}

Vec2 to_local(const ObjectPose& pose, const Vec2& world) {
  return (Eigen::Rotation2Dd(-pose.angle) * (world - pose.center)) / pose.scale;
}

bool inside_shape(const ObjectSpec& o, const Vec2& q) {
  switch (o.shape) {
    case ShapeKind::rectangle:
      return std::abs(q.x()) <= o.size.x() && std::abs(q.y()) <= o.size.y();
    case ShapeKind::circle:
      return q.squaredNorm() <= o.size.x() * o.size.x();
    case ShapeKind::triangle: {
      const auto v = outline(o);
      auto edge = [](const Vec2& a, const Vec2& b, const Vec2& p) {
        return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
      };
      const double d0 = edge(v[0], v[1], q), d1 = edge(v[1], v[2], q), d2 = edge(v[2], v[0], q);
      const bool has_neg = d0 < 0 || d1 < 0 || d2 < 0;
      const bool has_pos = d0 > 0 || d1 > 0 || d2 > 0;
      return !(has_neg && has_pos);
    }
  }
  return false;
}

Rgb8 object_color(const ObjectSpec& o, const Vec2& q) {
  if (!o.checker) return o.color;
  const auto cx = static_cast<long>(std::floor(q.x() / o.checker_cell));
  const auto cy = static_cast<long>(std::floor(q.y() / o.checker_cell));
  return ((cx + cy) & 1) ? *o.checker : o.color;
}

void validate_scene(const SceneSpec& scene) {
  if (scene.width < 2 || scene.height < 2) throw ValidationError("scene: frame must be at least 2x2");
  if (scene.channels != 1 && scene.channels != 3) throw ValidationError("scene: channels must be 1 or 3");
  if (scene.laps_total < 1) throw ValidationError("scene: laps_total must be >= 1");
  if (scene.objects.empty()) throw ValidationError("scene: at least one object required");
  if (scene.class_names.empty()) throw ValidationError("scene: class_names must start with the unknown class");
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    const std::string tag = "scene: object " + std::to_string(i) + ": ";
    if (o.class_id < 1 || o.class_id >= static_cast<int>(scene.class_names.size())) {
      throw ValidationError(tag + "class id " + std::to_string(o.class_id) + " not in class_names");
    }
    if (o.lap_frames < 2) throw ValidationError(tag + "lap_frames must be >= 2");
    if (o.path == PathKind::shuttle && o.lap_frames % 2 != 0) throw ValidationError(tag + "shuttle needs even lap_frames");
    const double turns = o.rotation_rate * o.lap_frames / kTwoPi;
    if (std::abs(turns - std::round(turns)) > 1e-9) {
      throw ValidationError(tag + "rotation does not return to the start pose at lap end");
    }
    if (o.size.x() <= 0 || o.size.y() <= 0) throw ValidationError(tag + "size must be positive");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

bool operator==(const Frame& a, const Frame& b) {
  if (a.index != b.index || a.channels.size() != b.channels.size()) return false;
  for (std::size_t c = 0; c < a.channels.size(); ++c) {
    if (a.channels[c].rows() != b.channels[c].rows() || a.channels[c].cols() != b.channels[c].cols()) return false;
    if (!(a.channels[c] == b.channels[c]).all()) return false;
  }
  return true;
}

bool operator==(const StreamBundle& a, const StreamBundle& b) {
  if (!(a.manifest == b.manifest) || a.frames != b.frames || a.flows != b.flows || a.supervisions != b.supervisions) {
    return false;
  }
  if (a.masks.size() != b.masks.size()) return false;
  for (std::size_t i = 0; i < a.masks.size(); ++i) {
    if (a.masks[i].rows() != b.masks[i].rows() || a.masks[i].cols() != b.masks[i].cols()) return false;
    if (!(a.masks[i] == b.masks[i]).all()) return false;
  }
  return true;
}

std::vector<LapRange> StreamManifest::laps_of(int object) const {
  std::vector<LapRange> out;
  for (const auto& l : laps) {
    if (l.object == object) out.push_back(l);
  }
  return out;
}

void StreamManifest::validate() const {
  if (width < 1 || height < 1) throw FormatError("manifest: non-positive frame size");
  if (channels != 1 && channels != 3) throw FormatError("manifest: channels must be 1 or 3");
  if (frame_count < 0) throw FormatError("manifest: negative frame count");
  if (class_names.empty()) throw FormatError("manifest: class list must include the unknown class");
  for (int c : object_classes) {
    if (c < 1 || c >= class_count()) throw FormatError("manifest: object class id " + std::to_string(c) + " out of range");
  }
  std::vector<LapRange> sorted = laps;
  std::sort(sorted.begin(), sorted.end(), [](const LapRange& a, const LapRange& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& l = sorted[i];
    if (l.object < 0 || l.object >= object_count()) throw FormatError("manifest: lap refers to unknown object");
    if (l.start > l.end || l.start < 0 || l.end >= frame_count) throw FormatError("manifest: lap range outside stream");
    if (i > 0 && l.start <= sorted[i - 1].end) throw FormatError("manifest: lap ranges overlap in time");
  }
}

std::string StreamManifest::to_text() const {
  std::ostringstream os;
  os << "w=" << width << "\nh=" << height << "\nc=" << channels << "\nframes=" << frame_count << "\nclasses=";
  for (std::size_t i = 0; i < class_names.size(); ++i) os << (i ? "," : "") << class_names[i];
  os << "\nseed=" << seed << "\nobjects=";
  for (std::size_t i = 0; i < object_classes.size(); ++i) os << (i ? "," : "") << object_classes[i];
  os << "\nlaps=";
  for (std::size_t i = 0; i < laps.size(); ++i) {
    os << (i ? ";" : "") << laps[i].object << ':' << laps[i].start << '-' << laps[i].end;
  }
  os << '\n';
  return os.str();
}

StreamManifest StreamManifest::parse(std::string_view text) {
  StreamManifest m;
  bool seen[8] = {};
  const char* keys[8] = {"w", "h", "c", "frames", "classes", "seed", "objects", "laps"};
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("manifest: malformed line \"" + std::string(line) + "\"");
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    int k = -1;
    for (int i = 0; i < 8; ++i) {
      if (key == keys[i]) k = i;
    }
    if (k < 0) throw FormatError("manifest: unknown key \"" + std::string(key) + "\"");
    seen[k] = true;
    try {
      switch (k) {
        case 0: m.width = static_cast<int>(io::parse_int(value)); break;
        case 1: m.height = static_cast<int>(io::parse_int(value)); break;
        case 2: m.channels = static_cast<int>(io::parse_int(value)); break;
        case 3: m.frame_count = static_cast<int>(io::parse_int(value)); break;
        case 4:
          for (auto c : split(value, ',')) m.class_names.emplace_back(c);
          break;
        case 5: m.seed = static_cast<std::uint64_t>(std::stoull(std::string(value))); break;
        case 6:
          if (!value.empty()) {
            for (auto c : split(value, ',')) m.object_classes.push_back(static_cast<int>(io::parse_int(c)));
          }
          break;
        case 7:
          if (!value.empty()) {
            for (auto entry : split(value, ';')) {
              const auto colon = entry.find(':');
              const auto dash = entry.find('-', colon == std::string_view::npos ? 0 : colon);
              if (colon == std::string_view::npos || dash == std::string_view::npos) {
                throw FormatError("manifest: malformed lap \"" + std::string(entry) + "\"");
              }
              m.laps.push_back({static_cast<int>(io::parse_int(entry.substr(0, colon))),
                                static_cast<int>(io::parse_int(entry.substr(colon + 1, dash - colon - 1))),
                                static_cast<int>(io::parse_int(entry.substr(dash + 1)))});
            }
          }
          break;
      }
    } catch (const std::invalid_argument&) {
      throw FormatError("manifest: bad value for " + std::string(key));
    } catch (const std::out_of_range&) {
      throw FormatError("manifest: bad value for " + std::string(key));
    }
  }
  for (int i = 0; i < 8; ++i) {
    if (!seen[i]) throw FormatError(std::string("manifest: missing key ") + keys[i]);
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------

ObjectPose object_pose(const ObjectSpec& o, double f) {
  ObjectPose pose;
  const double phase = kTwoPi * f / o.lap_frames;
  switch (o.path) {
    case PathKind::still:
      pose.center = o.anchor;
      break;
    case PathKind::ellipse:
      pose.center = o.anchor + Vec2(o.radii.x() * std::cos(phase), o.radii.y() * std::sin(phase));
      break;
    case PathKind::shuttle:
      pose.center = o.anchor + o.velocity * triangle_profile(f, o.lap_frames);
      break;
  }
  pose.angle = o.angle0 + o.rotation_rate * f;
  pose.scale = 1.0 + o.scale_rate * triangle_profile(f, o.lap_frames);
  return pose;
}

bool object_contains(const ObjectSpec& object, const ObjectPose& pose, const Vec2& p) {
  return inside_shape(object, to_local(pose, p));
}

StreamBundle generate_stream(const SceneSpec& scene, std::uint64_t seed) {
  validate_scene(scene);
  const int w = scene.width, h = scene.height;
  const int n = static_cast<int>(scene.objects.size());

  StreamBundle bundle;
  auto& m = bundle.manifest;
  m.width = w;
  m.height = h;
  m.channels = scene.channels;
  m.class_names = scene.class_names;
  m.seed = seed;
  for (const auto& o : scene.objects) m.object_classes.push_back(o.class_id);

  int cursor = 0;
  for (int lap = 0; lap < scene.laps_total; ++lap) {
    for (int i = 0; i < n; ++i) {
      const int len = scene.objects[static_cast<std::size_t>(i)].lap_frames;
      m.laps.push_back({i, cursor, cursor + len - 1});
      cursor += len;
    }
  }
  m.frame_count = cursor;

  auto check_bounds = [&](int i, const ObjectPose& pose, int t) {
    for (const auto& v : outline(scene.objects[static_cast<std::size_t>(i)])) {
      const Vec2 p = to_world(pose, v);
      if (p.x() < 0.5 || p.x() > w + 0.5 || p.y() < 0.5 || p.y() > h + 0.5) {
        throw BoundsError("generate_stream: object " + std::to_string(i) + " out of bounds at frame " + std::to_string(t));
      }
    }
  };

  // Static background, shared by every frame.
  std::vector<FieldF> background(static_cast<std::size_t>(scene.channels), FieldF(h, w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb8 c = scene.background.color;
      if (scene.background.checker && (((x / scene.background.cell) + (y / scene.background.cell)) & 1)) {
        c = *scene.background.checker;
      }
      if (scene.channels == 1) {
        background[0](y, x) = quantize(gray_of(c));
      } else {
        background[0](y, x) = quantize(c.r);
        background[1](y, x) = quantize(c.g);
        background[2](y, x) = quantize(c.b);
      }
    }
  }

  bundle.frames.reserve(static_cast<std::size_t>(m.frame_count));
  bundle.flows.reserve(static_cast<std::size_t>(m.frame_count));
  bundle.masks.reserve(static_cast<std::size_t>(m.frame_count));

  for (const auto& lap : m.laps) {
    const auto& active = scene.objects[static_cast<std::size_t>(lap.object)];
    for (int t = lap.start; t <= lap.end; ++t) {
      const int f = t - lap.start;
      struct Drawn {
        int index;
        ObjectPose pose;
      };
      std::vector<Drawn> drawn;
      if (scene.idle_visible) {
        for (int i = 0; i < n; ++i) {
          if (i == lap.object) continue;
          const ObjectPose p = object_pose(scene.objects[static_cast<std::size_t>(i)], 0.0);
          check_bounds(i, p, t);
          drawn.push_back({i, p});
        }
      }
      const ObjectPose pose = object_pose(active, f);
      const ObjectPose next = object_pose(active, f + 1);
      check_bounds(lap.object, pose, t);
      drawn.push_back({lap.object, pose});

      Frame frame;
      frame.index = t;
      frame.channels = background;
      FlowField flow{FieldF::Zero(h, w), FieldF::Zero(h, w)};
      Mask mask = Mask::Zero(h, w);

      for (int y = 1; y <= h; ++y) {
        for (int x = 1; x <= w; ++x) {
          const Vec2 p(x, y);
          for (const auto& d : drawn) {
            const auto& o = scene.objects[static_cast<std::size_t>(d.index)];
            const Vec2 q = to_local(d.pose, p);
            if (!inside_shape(o, q)) continue;
            const Rgb8 c = object_color(o, q);
            if (scene.channels == 1) {
              frame.channels[0](y - 1, x - 1) = quantize(gray_of(c));
            } else {
              frame.channels[0](y - 1, x - 1) = quantize(c.r);
              frame.channels[1](y - 1, x - 1) = quantize(c.g);
              frame.channels[2](y - 1, x - 1) = quantize(c.b);
            }
            mask(y - 1, x - 1) = static_cast<std::uint16_t>(o.class_id);
            if (d.index == lap.object) {
              const Vec2 v = to_world(next, q) - p;
              flow.vx(y - 1, x - 1) = static_cast<float>(v.x());
              flow.vy(y - 1, x - 1) = static_cast<float>(v.y());
            } else {
              flow.vx(y - 1, x - 1) = 0.0f;
              flow.vy(y - 1, x - 1) = 0.0f;
            }
          }
        }
      }
      bundle.frames.push_back(std::move(frame));
      bundle.flows.push_back(std::move(flow));
      bundle.masks.push_back(std::move(mask));
    }
  }
  return bundle;
}

// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() { return {"empty-2", "empty-3", "solid-3", "clutter-2"}; }

SceneSpec scene_preset(std::string_view name, const PresetOptions& opt) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ValidationError("unknown scene preset \"" + std::string(name) + "\"");
  }
  if (opt.size < 32) throw ValidationError("preset size must be >= 32");
  if (opt.laps < 1 || opt.lap_frames < 4 || opt.lap_frames % 2 != 0) {
    throw ValidationError("preset laps must be >= 1 and lap_frames an even number >= 4");
  }

  const double s = opt.size / 64.0;
  std::mt19937_64 rng(opt.seed);
  auto jitter = [&] { return static_cast<double>(static_cast<int>(rng() % 5) - 2) * s; };
  auto angle = [&] { return kTwoPi * static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  SceneSpec scene;
  scene.width = scene.height = opt.size;
  scene.idle_visible = true;
  scene.laps_total = opt.laps;
  const double turn = kTwoPi / opt.lap_frames;
  const double grow = 0.4 / opt.lap_frames;

  ObjectSpec box;
  box.shape = ShapeKind::rectangle;
  box.class_id = 1;
  box.size = Vec2(6.0, 4.0) * s;
  box.color = {220, 40, 40};
  box.anchor = Vec2(22.0 * s + jitter(), 28.0 * s + jitter());
  box.radii = Vec2(8.0, 6.0) * s;
  box.rotation_rate = turn;
  box.scale_rate = grow;
  box.lap_frames = opt.lap_frames;
  box.angle0 = angle();

  ObjectSpec tri;
  tri.shape = ShapeKind::triangle;
  tri.class_id = 2;
  tri.size = Vec2(7.0, 7.0) * s;
  tri.color = {40, 60, 220};
  tri.anchor = Vec2(42.0 * s + jitter(), 36.0 * s + jitter());
  tri.radii = Vec2(7.0, 8.0) * s;
  tri.rotation_rate = -turn;
  tri.scale_rate = grow;
  tri.lap_frames = opt.lap_frames;
  tri.angle0 = angle();

  ObjectSpec disc;
  disc.shape = ShapeKind::circle;
  disc.class_id = 3;
  disc.size = Vec2(6.0, 6.0) * s;
  disc.color = {40, 180, 60};
  disc.checker = Rgb8{20, 110, 30};
  disc.anchor = Vec2(32.0 * s + jitter(), 20.0 * s + jitter());
  disc.radii = Vec2(10.0, 5.0) * s;
  disc.rotation_rate = 2.0 * turn;
  disc.scale_rate = grow;
  disc.lap_frames = opt.lap_frames;
  disc.angle0 = angle();

  if (name == "empty-2") {
    scene.class_names = {"unknown", "box", "triangle"};
    scene.objects = {box, tri};
  } else if (name == "empty-3") {
    scene.class_names = {"unknown", "box", "triangle", "disc"};
    scene.objects = {box, tri, disc};
  } else if (name == "solid-3") {
    scene.channels = 1;
    scene.background.color = {90, 90, 90};
    scene.class_names = {"unknown", "box", "triangle", "disc"};
    for (ObjectSpec* o : {&box, &tri, &disc}) {
      o->color = {255, 255, 255};
      o->checker.reset();
    }
    scene.objects = {box, tri, disc};
  } else {  // clutter-2
    scene.background.color = {110, 110, 110};
    scene.background.checker = Rgb8{150, 150, 150};
    box.checker = Rgb8{250, 200, 60};
    scene.class_names = {"unknown", "box", "triangle"};
    scene.objects = {box, tri};
  }
  return scene;
}

// ---------------------------------------------------------------------------

std::filesystem::path frame_file(std::string_view dir, std::string_view prefix, int t, std::string_view ext) {
  char group[16];
  char file[64];
  std::snprintf(group, sizeof group, "%08d", (t / 100) * 100);
  std::snprintf(file, sizeof file, "%.*s_%06d.%.*s", static_cast<int>(prefix.size()), prefix.data(), t,
                static_cast<int>(ext.size()), ext.data());
  return std::filesystem::path(dir) / group / file;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  io::ByteWriter out;
  out.magic("MSK1");
  out.u32(static_cast<std::uint32_t>(mask.cols()));
  out.u32(static_cast<std::uint32_t>(mask.rows()));
  for (Eigen::Index i = 0; i < mask.size(); ++i) out.u16(mask.data()[i]);
  out.save(path);
}

Mask read_mask(const std::filesystem::path& path) {
  auto in = io::ByteReader::load(path);
  in.expect_magic("MSK1");
  const auto w = in.u32(), h = in.u32();
  if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1u << 28)) throw FormatError(path.string() + ": bad size");
  Mask mask(h, w);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = in.u16();
  in.expect_end();
  return mask;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  io::ByteWriter out;
  out.magic("MOT1");
  out.u32(static_cast<std::uint32_t>(flow.vx.cols()));
  out.u32(static_cast<std::uint32_t>(flow.vx.rows()));
  for (Eigen::Index i = 0; i < flow.vx.size(); ++i) {
    out.f32(flow.vx.data()[i]);
    out.f32(flow.vy.data()[i]);
  }
  out.save(path);
}

FlowField read_flow(const std::filesystem::path& path) {
  auto in = io::ByteReader::load(path);
  in.expect_magic("MOT1");
  const auto w = in.u32(), h = in.u32();
  if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1u << 28)) throw FormatError(path.string() + ": bad size");
  FlowField flow{FieldF(h, w), FieldF(h, w)};
  for (Eigen::Index i = 0; i < flow.vx.size(); ++i) {
    flow.vx.data()[i] = in.f32();
    flow.vy.data()[i] = in.f32();
  }
  in.expect_end();
  return flow;
}

std::string format_supervisions(const std::vector<SupervisionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += std::to_string(e.frame) + ',' + std::to_string(e.pixel_index) + ',' + std::to_string(e.class_id) + '\n';
  }
  return out;
}

std::vector<SupervisionEvent> parse_supervisions(std::string_view text) {
  std::vector<SupervisionEvent> out;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw FormatError("sup.csv line " + std::to_string(line_no) + ": expected t,index,class");
    try {
      out.push_back({static_cast<int>(io::parse_int(parts[0])), io::parse_int(parts[1]),
                     static_cast<int>(io::parse_int(parts[2]))});
    } catch (const FormatError& e) {
      throw FormatError("sup.csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_bundle(const StreamBundle& bundle, const std::filesystem::path& dir) {
  const auto& m = bundle.manifest;
  m.validate();
  const auto frames = static_cast<std::size_t>(m.frame_count);
  if (bundle.frames.size() != frames || bundle.flows.size() != frames || bundle.masks.size() != frames) {
    throw FormatError("write_bundle: frame/flow/mask counts disagree with the manifest");
  }
  std::filesystem::create_directories(dir);
  io::write_text_file(dir / "manifest.txt", m.to_text());

  for (std::size_t t = 0; t < frames; ++t) {
    const Frame& f = bundle.frames[t];
    if (f.width() != m.width || f.height() != m.height || f.channel_count() != m.channels) {
      throw FormatError("write_bundle: frame " + std::to_string(t) + " does not match manifest size");
    }
    io::Image8 img{m.width, m.height, m.channels, {}};
    img.pixels.resize(static_cast<std::size_t>(m.width) * m.height * m.channels);
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        for (int c = 0; c < m.channels; ++c) {
          const float v = f.channels[static_cast<std::size_t>(c)](y, x);
          const long q = std::lround(static_cast<double>(v) * 255.0);
          if (q < 0 || q > 255 || quantize(static_cast<std::uint8_t>(q)) != v) {
            throw FormatError("write_bundle: frame " + std::to_string(t) + " holds a value that is not 8-bit representable");
          }
          img.pixels[(static_cast<std::size_t>(y) * m.width + x) * m.channels + c] = static_cast<std::uint8_t>(q);
        }
      }
    }
    const int ti = static_cast<int>(t);
    io::write_png(dir / frame_file("frames", "frame", ti, "png"), img);
    write_flow(dir / frame_file("motion", "motion", ti, "mot"), bundle.flows[t]);
    write_mask(dir / frame_file("masks", "mask", ti, "msk"), bundle.masks[t]);
  }
  io::write_text_file(dir / "sup" / "sup.csv", format_supervisions(bundle.supervisions));
}

StreamBundle read_bundle(const std::filesystem::path& dir) {
  StreamBundle bundle;
  bundle.manifest = StreamManifest::parse(io::read_text_file(dir / "manifest.txt"));
  const auto& m = bundle.manifest;
  for (int t = 0; t < m.frame_count; ++t) {
    const auto img = io::read_png(dir / frame_file("frames", "frame", t, "png"));
    if (img.width != m.width || img.height != m.height || img.channels != m.channels) {
      throw FormatError("read_bundle: frame " + std::to_string(t) + " size disagrees with manifest");
    }
    Frame f;
    f.index = t;
    f.channels.assign(static_cast<std::size_t>(m.channels), FieldF(m.height, m.width));
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        for (int c = 0; c < m.channels; ++c) {
          f.channels[static_cast<std::size_t>(c)](y, x) =
              quantize(img.pixels[(static_cast<std::size_t>(y) * m.width + x) * m.channels + c]);
        }
      }
    }
    bundle.frames.push_back(std::move(f));

    auto flow = read_flow(dir / frame_file("motion", "motion", t, "mot"));
    if (flow.vx.cols() != m.width || flow.vx.rows() != m.height) {
      throw FormatError("read_bundle: motion " + std::to_string(t) + " size disagrees with manifest");
    }
    bundle.flows.push_back(std::move(flow));

    auto mask = read_mask(dir / frame_file("masks", "mask", t, "msk"));
    if (mask.cols() != m.width || mask.rows() != m.height) {
      throw FormatError("read_bundle: mask " + std::to_string(t) + " size disagrees with manifest");
    }
    if ((mask.cast<int>() >= m.class_count()).any()) {
      throw FormatError("read_bundle: mask " + std::to_string(t) + " holds an unknown class id");
    }
    bundle.masks.push_back(std::move(mask));
  }

  bundle.supervisions = parse_supervisions(io::read_text_file(dir / "sup" / "sup.csv"));
  const std::int64_t pixels = static_cast<std::int64_t>(m.width) * m.height;
  for (const auto& e : bundle.supervisions) {
    if (e.pixel_index < 0 || e.pixel_index >= pixels) {
      throw FormatError("read_bundle: supervision at frame " + std::to_string(e.frame) + " has pixel index " +
                        std::to_string(e.pixel_index) + " >= w*h");
    }
    if (e.class_id < 1 || e.class_id >= m.class_count()) throw FormatError("read_bundle: supervision class out of range");
    if (e.frame < 0 || e.frame >= m.frame_count) throw FormatError("read_bundle: supervision frame out of range");
  }
  return bundle;
}

FieldD brightness(const Frame& frame) {
  if (frame.channel_count() == 1) return frame.channels[0].cast<double>();
  if (frame.channel_count() != 3) throw ShapeError("brightness: frame must have 1 or 3 channels");
  return 0.299 * frame.channels[0].cast<double>() + 0.587 * frame.channels[1].cast<double>() +
         0.114 * frame.channels[2].cast<double>();
}

}  // namespace cohere
