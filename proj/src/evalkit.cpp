#include "cohere/evalkit.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

namespace cohere {

F1Report f1_scores(std::span<const int> predicted, std::span<const int> truth, int m, std::string scope) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("f1_scores: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " labels");
  }
  if (m < 1) throw ValidationError("f1_scores: m must be >= 1");
  std::vector<std::int64_t> tp(static_cast<std::size_t>(m)), fp(tp.size()), fn(tp.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i], t = truth[i];
    if (p < 0 || p >= m || t < 0 || t >= m) {
      throw ValidationError("f1_scores: class id " + std::to_string(p < 0 || p >= m ? p : t) + " outside [0, " +
                            std::to_string(m) + ")");
    }
    if (p == t) {
      ++tp[static_cast<std::size_t>(p)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(t)];
    }
  }
  F1Report r;
  r.scope = std::move(scope);
  for (std::size_t c = 0; c < tp.size(); ++c) {
    ClassScore s;
    if (tp[c] + fp[c] + fn[c] == 0) {
      s = {1.0, 1.0, 1.0};
    } else {
      const double tpd = static_cast<double>(tp[c]);
      s.precision = tp[c] + fp[c] > 0 ? tpd / static_cast<double>(tp[c] + fp[c]) : 0.0;
      s.recall = tp[c] + fn[c] > 0 ? tpd / static_cast<double>(tp[c] + fn[c]) : 0.0;
      s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    }
    r.classes.push_back(s);
    r.mean_precision += s.precision;
    r.mean_recall += s.recall;
    r.macro_f1 += s.f1;
  }
  r.mean_precision /= m;
  r.mean_recall /= m;
  r.macro_f1 /= m;
  return r;
}

void ProtocolConfig::validate() const {
  if (learn_laps < 0) throw ValidationError("protocol: learn_laps must be >= 0");
  if (!(learn_laps < supervise_through_lap && supervise_through_lap <= eval_lap)) {
    throw ValidationError("protocol: need learn_laps < supervise_through_lap <= eval_lap");
  }
  if (supervisions_per_object < 0) throw ValidationError("protocol: supervisions_per_object must be >= 0");
  if (min_spacing < 0) throw ValidationError("protocol: min_spacing must be >= 0");
}

std::vector<double> XiGrid::values() const {
  if (!(lo > 0) || !(hi >= lo) || !(step > 0)) throw ValidationError("xi grid: need 0 < lo <= hi and step > 0");
  const double span = (hi - lo) / step;
  if (span > 1e6) throw ValidationError("xi grid: too many points");
  const auto n = static_cast<long>(std::floor(span + 1e-9));
  std::vector<double> out;
  // snap to 12 decimals so 10 * 0.01 prints as 0.1
  for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  return out;
}

void RunSettings::validate(const StreamManifest& m) const {
  extractor.validate();
  loss.validate();
  attention.validate();
  protocol.validate();
  if (extractor.in_channels != m.channels) {
    throw ValidationError("run: extractor expects " + std::to_string(extractor.in_channels) +
                          " channels, stream has " + std::to_string(m.channels));
  }
  if (!(gamma > 0)) throw ValidationError("run: gamma must be > 0");
  if (e < 1) throw ValidationError("run: e must be >= 1");
  if (sampler.beta < 1) throw ValidationError("run: beta must be >= 1");
  if (sampler.max_rounds < 0) throw ValidationError("run: max_rounds must be >= 0");
  if (b < 0) throw ValidationError("run: b must be >= 0");
  if (xi) {
    if (!(*xi > 0)) throw ValidationError("run: xi must be > 0");
    if (distance == DistanceKind::cosine && *xi > 2.0) throw ValidationError("run: cosine xi must lie in (0, 2]");
  } else {
    (void)xi_grid.values();
  }
  for (int o = 0; o < m.object_count(); ++o) {
    if (static_cast<int>(m.laps_of(o).size()) < protocol.eval_lap) {
      throw ValidationError("run: object " + std::to_string(o) + " has fewer than eval_lap = " +
                            std::to_string(protocol.eval_lap) + " laps");
    }
  }
}

namespace {

bool interior(const Mask& mask, Pixel p) {
  const int w = static_cast<int>(mask.cols()), h = static_cast<int>(mask.rows());
  const auto c = mask(p.y - 1, p.x - 1);
  const Pixel n[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
  for (const Pixel& q : n) {
    if (in_frame(q, w, h) && mask(q.y - 1, q.x - 1) != c) return false;
  }
  return true;
}

std::optional<Pixel> centroid_pixel(const Mask& mask, int class_id) {
  double sx = 0, sy = 0;
  long count = 0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x) == class_id) {
        sx += static_cast<double>(x + 1);
        sy += static_cast<double>(y + 1);
        ++count;
      }
    }
  }
  if (count == 0) return std::nullopt;
  const double cx = sx / count, cy = sy / count;
  std::optional<Pixel> best;
  double best_d = 0;
  for (Eigen::Index y = 0; y < mask.rows(); ++y) {
    for (Eigen::Index x = 0; x < mask.cols(); ++x) {
      if (mask(y, x) != class_id) continue;
      const double d = (x + 1 - cx) * (x + 1 - cx) + (y + 1 - cy) * (y + 1 - cy);
      if (!best || d < best_d) {
        best = Pixel{static_cast<int>(x + 1), static_cast<int>(y + 1)};
        best_d = d;
      }
    }
  }
  return best;
}

}  // namespace

std::vector<PlannedSupervision> schedule_supervisions(const StreamBundle& bundle,
                                                      const std::vector<AttentionState>& trajectory,
                                                      const ProtocolConfig& protocol) {
  protocol.validate();
  const auto& m = bundle.manifest;
  if (static_cast<int>(trajectory.size()) != m.frame_count) {
    throw ShapeError("schedule_supervisions: trajectory has " + std::to_string(trajectory.size()) + " entries for " +
                     std::to_string(m.frame_count) + " frames");
  }
  std::vector<PlannedSupervision> out;
  const int window = protocol.supervise_through_lap - protocol.learn_laps;
  for (int o = 0; o < m.object_count(); ++o) {
    const auto laps = m.laps_of(o);
    const int class_id = m.object_classes[static_cast<std::size_t>(o)];
    if (static_cast<int>(laps.size()) < protocol.supervise_through_lap) {
      throw ValidationError("schedule_supervisions: object " + std::to_string(o) + " has only " +
                            std::to_string(laps.size()) + " laps");
    }
    int prev = INT_MIN / 2;
    for (int k = 0; k < protocol.supervisions_per_object; ++k) {
      const int first_lap = protocol.learn_laps + (k * window) / protocol.supervisions_per_object;
      const int earliest = std::max(laps[static_cast<std::size_t>(first_lap)].start, prev + protocol.min_spacing);
      std::optional<PlannedSupervision> pick;
      for (int li = first_lap; li < protocol.supervise_through_lap && !pick; ++li) {
        const auto& lap = laps[static_cast<std::size_t>(li)];
        for (int t = std::max(lap.start, earliest); t <= lap.end; ++t) {
          const auto& mask = bundle.masks[static_cast<std::size_t>(t)];
          const Pixel p = round_to_pixel(trajectory[static_cast<std::size_t>(t)].position, m.width, m.height);
          if (mask(p.y - 1, p.x - 1) == class_id && interior(mask, p)) {
            pick = PlannedSupervision{{t, ravel(p, m.width), class_id}, o, false};
            break;
          }
        }
      }
      for (int li = first_lap; li < protocol.supervise_through_lap && !pick; ++li) {
        const auto& lap = laps[static_cast<std::size_t>(li)];
        for (int t = std::max(lap.start, earliest); t <= lap.end; ++t) {
          if (const auto p = centroid_pixel(bundle.masks[static_cast<std::size_t>(t)], class_id)) {
            pick = PlannedSupervision{{t, ravel(*p, m.width), class_id}, o, true};
            break;
          }
        }
      }
      if (!pick) {
        throw ValidationError("schedule_supervisions: no frame can host supervision " + std::to_string(k + 1) +
                              " of object " + std::to_string(o));
      }
      prev = pick->event.frame;
      out.push_back(*pick);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PlannedSupervision& a, const PlannedSupervision& b) { return a.event.frame < b.event.frame; });
  return out;
}

F1Report trajectory_f1(const std::vector<TrajectoryScore>& scores, double xi, int m, bool exclude_saccades) {
  std::vector<int> pred, truth;
  for (const auto& s : scores) {
    if (exclude_saccades && s.saccade) continue;
    pred.push_back(s.min_distance <= xi ? s.nearest_class : 0);
    truth.push_back(s.truth);
  }
  return f1_scores(pred, truth, m, "trajectory");
}

F1Report frame_f1(const std::vector<FrameScore>& scores, double xi, int m) {
  std::vector<int> pred, truth;
  for (const auto& s : scores) {
    for (Eigen::Index i = 0; i < s.truth.size(); ++i) {
      pred.push_back(s.min_distance.data()[i] <= xi ? s.nearest.data()[i] : 0);
      truth.push_back(s.truth.data()[i]);
    }
  }
  return f1_scores(pred, truth, m, "frame");
}

XiChoice tune_xi(const std::vector<TrajectoryScore>& scores, int m, const XiGrid& grid, bool exclude_saccades) {
  XiChoice best{0.0, -1.0};
  for (double xi : grid.values()) {
    const double f = trajectory_f1(scores, xi, m, exclude_saccades).macro_f1;
    if (f > best.macro_f1) best = {xi, f};
  }
  return best;
}

RunResult run_protocol(const StreamBundle& bundle, const RunSettings& settings) {
  const auto& m = bundle.manifest;
  settings.validate(m);
  const auto& proto = settings.protocol;
  const int b = settings.batch_cap(m);

  RunResult r;
  r.class_count = m.class_count();
  r.extractor = settings.extractor;
  r.trajectory = simulate_trajectory(bundle, settings.attention,
                                     settings.initial.value_or(default_initial_state(m.width, m.height)));

  if (settings.supervision_source == SupervisionSource::bundle) {
    for (const auto& e : bundle.supervisions) {
      int object = -1;
      for (const auto& lap : m.laps) {
        if (e.frame >= lap.start && e.frame <= lap.end) object = lap.object;
      }
      r.supervisions.push_back({e, object, false});
    }
  } else {
    r.supervisions = schedule_supervisions(bundle, r.trajectory, proto);
  }
  for (const auto& s : r.supervisions) {
    if (s.fallback) {
      r.log.push_back("supervision fallback: object " + std::to_string(s.object) + " at frame " +
                      std::to_string(s.event.frame) + " uses the object centroid");
    }
  }

  // Lap number (1-based, per object) of each frame; 0 outside every lap.
  std::vector<int> lap_of(static_cast<std::size_t>(m.frame_count), 0);
  for (int o = 0; o < m.object_count(); ++o) {
    const auto laps = m.laps_of(o);
    for (std::size_t k = 0; k < laps.size(); ++k) {
      for (int t = laps[k].start; t <= laps[k].end; ++t) lap_of[static_cast<std::size_t>(t)] = static_cast<int>(k) + 1;
    }
  }

  r.weights = init_weights(settings.extractor);
  r.store = TemplateStore(settings.distance, settings.xi.value_or(settings.distance == DistanceKind::cosine ? 2.0 : 1.0), b);
  if (b == 1) r.log.push_back("b = 1: template refresh disabled");
  const GraphBudget budget = node_budget(settings.e);
  std::seed_seq seq{static_cast<std::uint32_t>(settings.seed), static_cast<std::uint32_t>(settings.seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  const FrameSource frames = [&](int t) -> const Frame* {
    return t >= 0 && t < m.frame_count ? &bundle.frames[static_cast<std::size_t>(t)] : nullptr;
  };
  const int d = settings.extractor.d;
  const bool normalized = settings.loss.normalized;

  std::optional<Eigen::VectorXd> prev_feature;
  std::optional<Weights> eval_start_weights;
  std::size_t next_sup = 0;

  for (int t = 0; t < m.frame_count; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    const int lap = lap_of[ti];
    const bool learning = lap >= 1 && lap <= proto.supervise_through_lap && lap < proto.eval_lap;
    const bool eval = lap == proto.eval_lap;
    const PlannedSupervision* sup = nullptr;
    while (next_sup < r.supervisions.size() && r.supervisions[next_sup].event.frame < t) ++next_sup;
    if (next_sup < r.supervisions.size() && r.supervisions[next_sup].event.frame == t) sup = &r.supervisions[next_sup];
    if (!learning && !eval && sup == nullptr) {
      prev_feature.reset();
      continue;
    }

    const AttentionState& att = r.trajectory[ti];
    const Pixel a = round_to_pixel(att.position, m.width, m.height);
    const Frame& frame = bundle.frames[ti];
    Eigen::VectorXd current;
    std::optional<FeatureMap> map;

    try {
      if (learning) {
        Tape tape;
        const ForwardGraph g = forward(tape, frame_tensor(frame), r.weights, settings.extractor, true);
        const Var f_now = tape.reshape(gather_pixels(tape, g.features, m.width, m.height, {a}), {d});
        current = tape.value(f_now).data();

        LossReport report;
        const bool delta = t > 0 && prev_feature.has_value() && !att.saccade;
        report.delta = delta ? 1 : 0;
        const Var l_t =
            temporal_loss(tape, f_now, prev_feature.value_or(Eigen::VectorXd::Zero(d)), delta, normalized);

        Var l_s = tape.constant(Tensor::scalar(0.0));
        Var l_c = tape.constant(Tensor::scalar(0.0));
        const MovingRegion region = segment_moving_region(bundle.flows[ti], a, settings.gamma, settings.connectivity);
        if (auto graph = sample_graph(region, a, budget, settings.sampler, rng)) {
          report.inside = static_cast<int>(graph->inside.size());
          report.outside = static_cast<int>(graph->outside.size());
          const Var inside = gather_pixels(tape, g.features, m.width, m.height, graph->inside);
          l_s = spatial_loss(tape, inside, normalized);
          if (!graph->outside.empty()) {
            const Var outside = gather_pixels(tape, g.features, m.width, m.height, graph->outside);
            l_c = contrastive_loss(tape, inside, outside, settings.loss.epsilon, normalized);
          }
        }
        const Var total = total_loss(tape, l_t, l_s, l_c, settings.loss);
        report.l_t = tape.value(l_t).item();
        report.l_s = tape.value(l_s).item();
        report.l_c = tape.value(l_c).item();
        report.total = tape.value(total).item();
        r.losses.emplace_back(t, report);

        if (sup != nullptr) {
          r.store.add_supervision(current, sup->event.class_id, t, a, m.width, m.height, r.weights.version);
        }
        if (tape.requires_grad(total)) {
          const Gradients grads = tape.backward(total);
          std::vector<Tensor> per_param;
          for (const Var& p : g.params) per_param.push_back(grads[p]);
          if (!online_step(r.weights, per_param, settings.loss.alpha)) {
            ++r.skipped_steps;
            r.log.push_back("non-finite gradient at frame " + std::to_string(t) + ": step skipped");
          }
        }
      } else {
        map = extract(frame, r.weights, settings.extractor);
        current = restrict(*map, a);
        if (sup != nullptr) {
          r.store.add_supervision(current, sup->event.class_id, t, a, m.width, m.height, r.weights.version);
        }
      }
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(t) + ": " + e.what());
    }
    prev_feature = current;

    r.store.refresh_templates(r.weights, settings.extractor, frames);

    if (eval) {
      if (!eval_start_weights) eval_start_weights = r.weights;
      const auto pred = r.store.predict_map(*map);
      const auto& truth = bundle.masks[ti];
      r.trajectory_scores.push_back({t, a, truth(a.y - 1, a.x - 1), pred.nearest(a.y - 1, a.x - 1),
                                     pred.min_distance(a.y - 1, a.x - 1), att.saccade});
      r.frame_scores.push_back({t, truth, pred.nearest, pred.min_distance});
    }
  }
  if (eval_start_weights) r.eval_weights_unchanged = *eval_start_weights == r.weights;

  if (settings.xi) {
    r.xi = *settings.xi;
  } else {
    r.xi = tune_xi(r.trajectory_scores, m.class_count(), settings.xi_grid, proto.exclude_saccades).xi;
    r.xi_tuned = true;
  }
  r.store.set_xi(r.xi);
  r.trajectory_f1 = trajectory_f1(r.trajectory_scores, r.xi, m.class_count(), proto.exclude_saccades);
  r.frame_f1 = frame_f1(r.frame_scores, r.xi, m.class_count());
  return r;
}

// ---------------------------------------------------------------------------

std::string format_metrics(const std::vector<F1Report>& reports) {
  std::string out = "scope,class,precision,recall,f1\n";
  for (const auto& r : reports) {
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
      const auto& s = r.classes[c];
      out += r.scope + ',' + std::to_string(c) + ',' + io::format_double(s.precision) + ',' +
             io::format_double(s.recall) + ',' + io::format_double(s.f1) + '\n';
    }
    out += r.scope + ",macro," + io::format_double(r.mean_precision) + ',' + io::format_double(r.mean_recall) + ',' +
           io::format_double(r.macro_f1) + '\n';
  }
  return out;
}

std::string format_trajectory_scores(const std::vector<TrajectoryScore>& scores) {
  std::string out = std::string(kTrajectoryScoresHeader) + '\n';
  for (const auto& s : scores) {
    out += std::to_string(s.frame) + ',' + std::to_string(s.at.x) + ',' + std::to_string(s.at.y) + ',' +
           std::to_string(s.truth) + ',' + std::to_string(s.nearest_class) + ',' + io::format_double(s.min_distance) +
           ',' + (s.saccade ? '1' : '0') + '\n';
  }
  return out;
}

std::vector<TrajectoryScore> parse_trajectory_scores(std::string_view text) {
  std::vector<TrajectoryScore> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kTrajectoryScoresHeader) throw FormatError("trajectory scores: unexpected header");
      continue;
    }
    std::vector<std::string> f;
    std::istringstream parts(line);
    std::string part;
    while (std::getline(parts, part, ',')) f.push_back(part);
    if (f.size() != 7) throw FormatError("trajectory scores line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      TrajectoryScore s;
      s.frame = static_cast<int>(io::parse_int(f[0]));
      s.at = {static_cast<int>(io::parse_int(f[1])), static_cast<int>(io::parse_int(f[2]))};
      s.truth = static_cast<int>(io::parse_int(f[3]));
      s.nearest_class = static_cast<int>(io::parse_int(f[4]));
      s.min_distance = f[5] == "inf" ? std::numeric_limits<double>::infinity() : io::parse_double(f[5]);
      s.saccade = io::parse_int(f[6]) != 0;
      out.push_back(s);
    } catch (const FormatError& e) {
      throw FormatError("trajectory scores line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_frame_scores(const std::filesystem::path& path, const std::vector<FrameScore>& scores) {
  io::ByteWriter out;
  out.magic("EVS1");
  out.u32(static_cast<std::uint32_t>(scores.size()));
  for (const auto& s : scores) {
    out.u32(static_cast<std::uint32_t>(s.frame));
    out.u32(static_cast<std::uint32_t>(s.truth.cols()));
    out.u32(static_cast<std::uint32_t>(s.truth.rows()));
    for (Eigen::Index i = 0; i < s.truth.size(); ++i) {
      out.u16(s.truth.data()[i]);
      out.u16(s.nearest.data()[i]);
      out.f64(s.min_distance.data()[i]);
    }
  }
  out.save(path);
}

std::vector<FrameScore> read_frame_scores(const std::filesystem::path& path) {
  auto in = io::ByteReader::load(path);
  in.expect_magic("EVS1");
  const auto n = in.u32();
  std::vector<FrameScore> out;
  for (std::uint32_t k = 0; k < n; ++k) {
    FrameScore s;
    s.frame = static_cast<int>(in.u32());
    const auto w = in.u32(), h = in.u32();
    if (static_cast<std::uint64_t>(w) * h > (1u << 26)) throw FormatError(path.string() + ": bad frame size");
    s.truth.resize(h, w);
    s.nearest.resize(h, w);
    s.min_distance.resize(h, w);
    for (Eigen::Index i = 0; i < s.truth.size(); ++i) {
      s.truth.data()[i] = in.u16();
      s.nearest.data()[i] = in.u16();
      s.min_distance.data()[i] = in.f64();
    }
    out.push_back(std::move(s));
  }
  in.expect_end();
  return out;
}

std::vector<std::filesystem::path> write_run_artifacts(const RunResult& r, const std::string& config_echo,
                                                       const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto text = [&](const std::filesystem::path& p, const std::string& s) {
    io::write_text_file(dir / p, s);
    written.push_back(dir / p);
  };
  std::filesystem::create_directories(dir);
  text("config.txt", config_echo);
  text("metrics.csv", format_metrics({r.trajectory_f1, r.frame_f1}));

  std::string loss = std::string(kLossCsvHeader) + '\n';
  for (const auto& [t, report] : r.losses) loss += loss_csv_row(t, report) + '\n';
  text("loss.csv", loss);

  write_foa(r.trajectory, dir / "trajectory.foa");
  written.push_back(dir / "trajectory.foa");
  save_weights(dir / "weights.wgt", r.extractor, r.weights);
  written.push_back(dir / "weights.wgt");
  r.store.save(dir / "templates.tpl");
  written.push_back(dir / "templates.tpl");
  text("trajectory_scores.csv", format_trajectory_scores(r.trajectory_scores));
  write_frame_scores(dir / "frame_scores.evs", r.frame_scores);
  written.push_back(dir / "frame_scores.evs");

  std::vector<SupervisionEvent> events;
  for (const auto& s : r.supervisions) events.push_back(s.event);
  text("supervisions.csv", format_supervisions(events));

  for (const auto& s : r.frame_scores) {
    Mask overlay(s.nearest.rows(), s.nearest.cols());
    for (Eigen::Index i = 0; i < overlay.size(); ++i) {
      overlay.data()[i] = s.min_distance.data()[i] <= r.xi ? s.nearest.data()[i] : 0;
    }
    write_mask(dir / frame_file("overlays", "pred", s.frame, "msk"), overlay);
  }
  if (!r.frame_scores.empty()) written.push_back(dir / "overlays");

  std::string meta;
  meta += "xi=" + io::format_double(r.xi) + '\n';
  meta += std::string("xi_tuned=") + (r.xi_tuned ? "1" : "0") + '\n';
  meta += "classes=" + std::to_string(r.class_count) + '\n';
  meta += "skipped_steps=" + std::to_string(r.skipped_steps) + '\n';
  meta += std::string("eval_weights_unchanged=") + (r.eval_weights_unchanged ? "1" : "0") + '\n';
  meta += "weights_version=" + std::to_string(r.weights.version) + '\n';
  for (const auto& s : r.supervisions) {
    meta += "supervision=" + std::to_string(s.event.frame) + ',' + std::to_string(s.event.pixel_index) + ',' +
            std::to_string(s.event.class_id) + ',' + std::to_string(s.object) + ',' + (s.fallback ? "fallback" : "foa") +
            '\n';
  }
  for (const auto& line : r.log) meta += "event=" + line + '\n';
  text("run_meta.txt", meta);
  return written;
}

}  // namespace cohere
