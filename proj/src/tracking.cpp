#include "aerogeo/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "aerogeo/errors.hpp"
#include "aerogeo/oracle.hpp"

namespace aerogeo {

namespace {

struct OpenTrack {
  std::size_t index; // into the output vector
  std::int64_t last_frame;
};

struct Candidate {
  std::int64_t distance_nm;
  std::int64_t track_id;
  int detection_index;
  std::size_t fix_pos;
  std::size_t open_pos;

  auto key() const { return std::tie(distance_nm, track_id, detection_index, fix_pos); }
};

} // namespace

std::vector<Track> associate(std::span<const FrameFixes> frames, const GateConfig& cfg,
                             std::optional<GeoPoint> anchor) {
  if (!(cfg.gate_m > 0.0) || cfg.max_coast_frames < 0) {
    throw ConfigError("gate_m must be > 0 and max_coast_frames >= 0");
  }

  std::vector<const FrameFixes*> ordered;
  for (const auto& f : frames) {
    ordered.push_back(&f);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->frame_id < b->frame_id; });

  std::optional<oracle::EnuAnchor> enu;
  if (anchor) {
    enu.emplace(*anchor);
  }

  std::vector<Track> tracks;
  std::vector<OpenTrack> open;

  for (const FrameFixes* frame : ordered) {
    const std::int64_t f = frame->frame_id;
    std::erase_if(open, [&](const OpenTrack& t) {
      return f - t.last_frame - 1 > cfg.max_coast_frames;
    });
    if (frame->fixes.empty()) {
      continue;
    }
    if (!enu) {
      enu.emplace(frame->fixes.front().estimate);
    }

    std::vector<EnuOffset> positions;
    positions.reserve(frame->fixes.size());
    for (const auto& fix : frame->fixes) {
      positions.push_back(enu->to_enu(fix.estimate));
    }

    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      for (std::size_t j = 0; j < open.size(); ++j) {
        const EnuOffset& last = tracks[open[j].index].last_enu;
        const double d =
            std::hypot(positions[i].north_m - last.north_m, positions[i].east_m - last.east_m);
        if (d <= cfg.gate_m) {
          candidates.push_back(Candidate{std::llround(d * 1e9), tracks[open[j].index].track_id,
                                         frame->fixes[i].detection_index, i, j});
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });

    std::vector<bool> fix_taken(positions.size(), false);
    std::vector<bool> track_taken(open.size(), false);
    std::vector<std::optional<std::size_t>> assignment(positions.size());
    for (const auto& c : candidates) {
      if (fix_taken[c.fix_pos] || track_taken[c.open_pos]) {
        continue;
      }
      fix_taken[c.fix_pos] = true;
      track_taken[c.open_pos] = true;
      assignment[c.fix_pos] = c.open_pos;
    }

    // New tracks open in detection_index order.
    std::vector<std::size_t> order(positions.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return frame->fixes[a].detection_index < frame->fixes[b].detection_index;
    });
    for (const std::size_t i : order) {
      std::size_t track_index = 0;
      if (assignment[i]) {
        OpenTrack& ot = open[*assignment[i]];
        ot.last_frame = f;
        track_index = ot.index;
      } else {
        track_index = tracks.size();
        tracks.push_back(Track{static_cast<std::int64_t>(tracks.size()), {}, {}});
        open.push_back(OpenTrack{track_index, f});
      }
      Track& t = tracks[track_index];
      PositionFix fix = frame->fixes[i];
      fix.track_id = t.track_id;
      t.fixes.push_back(fix);
      t.last_enu = positions[i];
    }
  }
  return tracks;
}

std::vector<FrameFixes> group_by_frame(std::span<const FixOutcome> outcomes) {
  std::map<std::int64_t, FrameFixes> frames;
  for (const auto& o : outcomes) {
    FrameFixes& ff = frames[o.frame_id];
    ff.frame_id = o.frame_id;
    if (o.fix) {
      ff.fixes.push_back(*o.fix);
    }
  }
  std::vector<FrameFixes> out;
  out.reserve(frames.size());
  for (auto& [id, ff] : frames) {
    out.push_back(std::move(ff));
  }
  return out;
}

} // namespace aerogeo
