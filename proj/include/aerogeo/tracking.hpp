#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aerogeo/geodesy.hpp"
#include "aerogeo/projection.hpp"

namespace aerogeo {

struct GateConfig {
  double gate_m = 10.0;       ///< maximum fix-to-track association distance
  int max_coast_frames = 90;  ///< frames a track may go without a fix
};

struct Track {
  std::int64_t track_id = 0;
  std::vector<PositionFix> fixes; ///< strictly increasing frame_id
  EnuOffset last_enu;             ///< relative to the session anchor
};

/// Fixes estimated from one frame.
struct FrameFixes {
  std::int64_t frame_id = 0;
  std::vector<PositionFix> fixes;
};

/// Greedy gated nearest-neighbour association.
///
/// Per frame, every (fix, open track) pair within gate_m is ranked by
/// distance, then lower track_id, then lower detection_index, and accepted
/// greedily when neither side is taken yet. Distances are compared on a
/// 1 nm grid so that numerically equal distances tie. Unmatched fixes open
/// new tracks (ids from 0 in creation order); a track that has gone more
/// than max_coast_frames frames without a fix is closed.
///
/// Distances are measured in a tangent plane at `anchor`, or at the first
/// fix when no anchor is given. Frames are processed in frame_id order.
/// Returned tracks are ordered by track_id, and every input fix appears in
/// exactly one track with its track_id set.
std::vector<Track> associate(std::span<const FrameFixes> frames, const GateConfig& cfg = {},
                             std::optional<GeoPoint> anchor = std::nullopt);

/// Groups per-detection outcomes by frame, dropping unestimable ones.
std::vector<FrameFixes> group_by_frame(std::span<const FixOutcome> outcomes);

} // namespace aerogeo
