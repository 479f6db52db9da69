#pragma once

#include "cohere/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cohere {

/// One video frame; each channel is an h x w field with values in [0, 1].
struct Frame {
  int index = 0;
  std::vector<FieldF> channels;

  int width() const { return channels.empty() ? 0 : static_cast<int>(channels.front().cols()); }
  int height() const { return channels.empty() ? 0 : static_cast<int>(channels.front().rows()); }
  int channel_count() const { return static_cast<int>(channels.size()); }

  friend bool operator==(const Frame& a, const Frame& b);
};

/// Per-pixel forward displacement to the next frame, in pixels/frame.
struct FlowField {
  FieldF vx;
  FieldF vy;

  /// Speed per pixel, evaluated in double precision.
  FieldD magnitude() const {
    return (vx.cast<double>().square() + vy.cast<double>().square()).sqrt();
  }
  friend bool operator==(const FlowField& a, const FlowField& b) {
    return a.vx.rows() == b.vx.rows() && a.vx.cols() == b.vx.cols() && (a.vx == b.vx).all() && (a.vy == b.vy).all();
  }
};

struct SupervisionEvent {
  int frame = 0;
  std::int64_t pixel_index = 0;  // raveled, row-major
  int class_id = 1;

  friend bool operator==(const SupervisionEvent&, const SupervisionEvent&) = default;
};

/// Frames [start, end] (inclusive) of one lap of one object.
struct LapRange {
  int object = 0;
  int start = 0;
  int end = 0;

  friend bool operator==(const LapRange&, const LapRange&) = default;
};

struct StreamManifest {
  int width = 0;
  int height = 0;
  int channels = 3;
  int frame_count = 0;
  std::vector<std::string> class_names;  // [0] is "unknown"
  std::vector<int> object_classes;       // class id of each object
  std::vector<LapRange> laps;            // in temporal order
  std::uint64_t seed = 0;

  int object_count() const { return static_cast<int>(object_classes.size()); }
  int class_count() const { return static_cast<int>(class_names.size()); }
  std::vector<LapRange> laps_of(int object) const;

  /// Throws FormatError on any violated invariant.
  void validate() const;

  std::string to_text() const;
  static StreamManifest parse(std::string_view text);

  friend bool operator==(const StreamManifest&, const StreamManifest&) = default;
};

struct StreamBundle {
  StreamManifest manifest;
  std::vector<Frame> frames;
  std::vector<FlowField> flows;
  std::vector<Mask> masks;
  std::vector<SupervisionEvent> supervisions;

  friend bool operator==(const StreamBundle& a, const StreamBundle& b);
};

// --- scene description -----------------------------------------------------

enum class ShapeKind { rectangle, triangle, circle };
enum class PathKind { still, ellipse, shuttle };

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
};

struct ObjectSpec {
  ShapeKind shape = ShapeKind::rectangle;
  int class_id = 1;
  /// Rectangle: half extents. Circle and triangle: x is the (circum)radius.
  Vec2 size{6.0, 4.0};
  Rgb8 color{200, 40, 40};
  std::optional<Rgb8> checker;  // second texture color, moves with the object
  double checker_cell = 3.0;

  PathKind path = PathKind::ellipse;
  Vec2 anchor{32.5, 32.5};  // ellipse center, or start position
  Vec2 radii{10.0, 6.0};    // ellipse semi-axes
  Vec2 velocity{1.0, 0.0};  // shuttle: px/frame on the outbound half
  double angle0 = 0.0;
  double rotation_rate = 0.0;  // rad/frame; rate * lap_frames must be a multiple of 2 pi
  double scale_rate = 0.0;     // per frame, triangular profile returning to 1 at lap end
  int lap_frames = 40;
};

struct Background {
  Rgb8 color{128, 128, 128};
  std::optional<Rgb8> checker;
  int cell = 8;
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  int channels = 3;
  Background background;
  std::vector<ObjectSpec> objects;
  std::vector<std::string> class_names{"unknown"};
  int laps_total = 31;
  /// Draw idle objects static at their start pose; otherwise only the active one is visible.
  bool idle_visible = false;
};

struct ObjectPose {
  Vec2 center;
  double angle = 0.0;
  double scale = 1.0;
};

/// Pose after `frame_in_lap` frames of the object's closed route.
ObjectPose object_pose(const ObjectSpec& object, double frame_in_lap);

/// Whether pixel center `p` (1-based, continuous) lies inside the posed object.
bool object_contains(const ObjectSpec& object, const ObjectPose& pose, const Vec2& p);

/// Objects move one at a time, lap k of every object before lap k + 1 of any.
StreamBundle generate_stream(const SceneSpec& scene, std::uint64_t seed);

struct PresetOptions {
  std::uint64_t seed = 7;
  int size = 64;
  int laps = 31;
  int lap_frames = 40;
};

std::vector<std::string> preset_names();
SceneSpec scene_preset(std::string_view name, const PresetOptions& options = {});

// --- on-disk bundle ----------------------------------------------------------

void write_bundle(const StreamBundle& bundle, const std::filesystem::path& dir);
StreamBundle read_bundle(const std::filesystem::path& dir);

/// Relative location of a per-frame file, grouped in directories of 100 frames.
std::filesystem::path frame_file(std::string_view dir, std::string_view prefix, int t, std::string_view ext);

void write_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_mask(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

std::string format_supervisions(const std::vector<SupervisionEvent>& events);
std::vector<SupervisionEvent> parse_supervisions(std::string_view text);

/// Luminance 0.299 R + 0.587 G + 0.114 B for RGB frames, identity for gray.
FieldD brightness(const Frame& frame);

}  // namespace cohere
