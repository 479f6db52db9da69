#include "cohere/openset.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cohere {

double template_distance(DistanceKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ShapeError("template_distance: dimension " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (kind == DistanceKind::squared_euclidean) return (a - b).squaredNorm();
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - a.dot(b) / (na * nb);
}

TemplateStore::TemplateStore(DistanceKind kind, double xi, int b) : kind_(kind), xi_(0.0), b_(b) {
  if (b < 1) throw ValidationError("template store: b must be >= 1");
  set_xi(xi);
}

void TemplateStore::set_xi(double xi) {
  if (!(xi > 0) || !std::isfinite(xi)) throw ValidationError("template store: xi must be > 0");
  if (kind_ == DistanceKind::cosine && xi > 2.0) throw ValidationError("template store: cosine xi must lie in (0, 2]");
  xi_ = xi;
}

std::set<int> TemplateStore::known_classes() const {
  std::set<int> out;
  for (const auto& e : entries_) out.insert(e.class_id);
  return out;
}

void TemplateStore::add_supervision(const Eigen::VectorXd& k, int class_id, int frame, Pixel at, int width, int height,
                                    std::uint64_t version) {
  if (class_id < 1) throw ValidationError("add_supervision: class id must be >= 1");
  if (!in_frame(at, width, height)) {
    throw BoundsError("add_supervision: (" + std::to_string(at.x) + "," + std::to_string(at.y) + ") off-frame");
  }
  if (!entries_.empty() && entries_.front().k.size() != k.size()) {
    throw ShapeError("add_supervision: template dimension " + std::to_string(k.size()) + " vs store " +
                     std::to_string(entries_.front().k.size()));
  }
  if (!k.allFinite()) throw NumericError("add_supervision: non-finite template");
  entries_.push_back({k, class_id, frame, at, version, false});
}

Prediction TemplateStore::predict(const Eigen::VectorXd& f) const {
  Prediction p;
  if (entries_.empty()) return p;
  std::map<int, double> per_class;
  for (const auto& e : entries_) {
    const double d = template_distance(kind_, e.k, f);
    auto [it, fresh] = per_class.emplace(e.class_id, d);
    if (!fresh) it->second = std::min(it->second, d);
    if (d < p.min_distance || (d == p.min_distance && e.class_id < p.nearest_class)) {
      p.min_distance = d;
      p.nearest_class = e.class_id;
    }
  }
  for (const auto& [c, d] : per_class) p.scores.emplace_back(c, -d);
  p.class_id = p.min_distance <= xi_ ? p.nearest_class : 0;
  return p;
}

TemplateStore::MapPrediction TemplateStore::predict_map(const FeatureMap& map) const {
  MapPrediction out{Mask::Zero(map.height, map.width), Field<std::uint16_t>::Zero(map.height, map.width),
                    FieldD::Constant(map.height, map.width, std::numeric_limits<double>::infinity())};
  if (entries_.empty()) return out;
  if (map.dim() != entries_.front().k.size()) {
    throw ShapeError("predict_map: feature dimension " + std::to_string(map.dim()) + " vs templates " +
                     std::to_string(entries_.front().k.size()));
  }
  const Eigen::Index n = map.values.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd f = map.values.row(i).transpose();
    double best = std::numeric_limits<double>::infinity();
    int best_class = 0;
    for (const auto& e : entries_) {
      const double d = template_distance(kind_, e.k, f);
      if (d < best || (d == best && e.class_id < best_class)) {
        best = d;
        best_class = e.class_id;
      }
    }
    out.min_distance.data()[i] = best;
    out.nearest.data()[i] = static_cast<std::uint16_t>(best_class);
    out.classes.data()[i] = static_cast<std::uint16_t>(best <= xi_ ? best_class : 0);
  }
  return out;
}

std::vector<int> TemplateStore::refresh_templates(const Weights& weights, const ExtractorConfig& config,
                                                  const FrameSource& frames) {
  std::vector<int> refreshed;
  if (b_ <= 1 || entries_.empty()) return refreshed;
  std::vector<int> history;
  for (const auto& e : entries_) {
    if (std::find(history.begin(), history.end(), e.frame) == history.end()) history.push_back(e.frame);
  }
  const std::size_t take = std::min(static_cast<std::size_t>(b_ - 1), history.size());
  for (std::size_t i = 0; i < take; ++i) {
    const int r = history[(cursor_ + i) % history.size()];
    bool current = true;
    for (const auto& e : entries_) {
      if (e.frame == r && (e.version != weights.version || e.stale)) current = false;
    }
    if (current) continue;
    const Frame* frame = frames(r);
    if (frame == nullptr) {
      for (auto& e : entries_) {
        if (e.frame == r) e.stale = true;
      }
      continue;
    }
    const FeatureMap map = extract(*frame, weights, config);
    for (auto& e : entries_) {
      if (e.frame != r) continue;
      e.k = restrict(map, e.at);
      e.version = weights.version;
      e.stale = false;
    }
    refreshed.push_back(r);
  }
  cursor_ = (cursor_ + take) % history.size();
  return refreshed;
}

void TemplateStore::save(const std::filesystem::path& path) const {
  io::ByteWriter out;
  out.magic("TPL1");
  out.u32(static_cast<std::uint32_t>(entries_.size()));
  out.u32(entries_.empty() ? 0u : static_cast<std::uint32_t>(entries_.front().k.size()));
  for (const auto& e : entries_) {
    out.u32(static_cast<std::uint32_t>(e.class_id));
    out.u32(static_cast<std::uint32_t>(e.frame));
    out.u32(static_cast<std::uint32_t>(e.at.x));
    out.u32(static_cast<std::uint32_t>(e.at.y));
    for (Eigen::Index i = 0; i < e.k.size(); ++i) out.f64(e.k[i]);
  }
  out.save(path);
}

TemplateStore TemplateStore::load(const std::filesystem::path& path, DistanceKind kind, double xi, int b) {
  auto in = io::ByteReader::load(path);
  in.expect_magic("TPL1");
  const auto count = in.u32();
  const auto d = in.u32();
  if (count > (1u << 20) || d > (1u << 16)) throw FormatError(path.string() + ": implausible template header");
  TemplateStore store(kind, xi, b);
  for (std::uint32_t i = 0; i < count; ++i) {
    TemplateEntry e;
    e.class_id = static_cast<int>(in.u32());
    e.frame = static_cast<int>(in.u32());
    e.at.x = static_cast<int>(in.u32());
    e.at.y = static_cast<int>(in.u32());
    e.k.resize(d);
    for (std::uint32_t j = 0; j < d; ++j) e.k[j] = in.f64();
    if (e.class_id < 1) throw FormatError(path.string() + ": template with class id 0");
    store.entries_.push_back(std::move(e));
  }
  in.expect_end();
  return store;
}

}  // namespace cohere
