#include "aerogeo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

namespace aerogeo {

namespace {

std::string join_ids(const std::vector<std::int64_t>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    s += (i ? ", " : "") + std::to_string(ids[i]);
  }
  return s;
}

double percentile(const std::vector<double>& sorted, double q) {
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

const TruthRecord* covering(std::span<const TruthRecord> truth, const std::string& label,
                            std::int64_t frame) {
  for (const auto& t : truth) {
    if (t.robot_label == label && t.valid_from_frame <= frame && frame <= t.valid_to_frame) {
      return &t;
    }
  }
  return nullptr;
}

std::optional<std::string> auto_label(const Track& track, std::span<const TruthRecord> truth,
                                      double gate_m) {
  for (const auto& fix : track.fixes) {
    const TruthRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& t : truth) {
      if (t.valid_from_frame <= fix.frame_id && fix.frame_id <= t.valid_to_frame) {
        const double d = haversine_distance(fix.estimate, t.position());
        if (d < best_d) {
          best_d = d;
          best = &t;
        }
      }
    }
    if (best != nullptr) {
      if (best_d <= gate_m) {
        return best->robot_label;
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

nlohmann::ordered_json summary_to_json(const ErrorSummary& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["min_m"] = s.min_m;
  j["max_m"] = s.max_m;
  j["mean_m"] = s.mean_m;
  j["rms_m"] = s.rms_m;
  j["median_m"] = s.median_m;
  j["p95_m"] = s.p95_m;
  return j;
}

ErrorSummary summary_from_json(const nlohmann::json& j) {
  ErrorSummary s;
  s.count = j.at("count").get<std::size_t>();
  s.min_m = j.at("min_m").get<double>();
  s.max_m = j.at("max_m").get<double>();
  s.mean_m = j.at("mean_m").get<double>();
  s.rms_m = j.at("rms_m").get<double>();
  s.median_m = j.at("median_m").get<double>();
  s.p95_m = j.at("p95_m").get<double>();
  return s;
}

} // namespace

UnmatchedTrack::UnmatchedTrack(std::vector<std::int64_t> track_ids)
    : Error("UnmatchedTrack: no truth record matches track(s) " + join_ids(track_ids)),
      track_ids_(std::move(track_ids)) {}

ErrorSummary summarize(std::span<const double> values) {
  ErrorSummary s;
  s.count = values.size();
  if (values.empty()) {
    return s;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const double v : sorted) {
    sum += v;
    sum_sq += v * v;
  }
  const auto n = static_cast<double>(sorted.size());
  s.min_m = sorted.front();
  s.max_m = sorted.back();
  s.mean_m = sum / n;
  s.rms_m = std::sqrt(sum_sq / n);
  s.median_m = percentile(sorted, 0.5);
  s.p95_m = percentile(sorted, 0.95);
  return s;
}

ErrorSample measure_error(const GeoPoint& estimate, const GeoPoint& truth,
                          std::int64_t frame_id, std::int64_t track_id) {
  const DegreeScale scale = degree_scale_at(truth.lat_deg());
  ErrorSample e;
  e.frame_id = frame_id;
  e.track_id = track_id;
  e.haversine_m = haversine_distance(estimate, truth);
  e.dlat_err_m = (estimate.lat_deg() - truth.lat_deg()) * scale.meters_per_deg_lat;
  e.dlon_err_m = lon_difference_deg(truth.lon_deg(), estimate.lon_deg()) *
                 scale.meters_per_deg_lon;
  return e;
}

ErrorReport score(std::span<const Track> tracks, std::span<const TruthRecord> truth,
                  const MatchOptions& matching, std::size_t frames_unestimable) {
  // track_id -> label
  std::map<std::int64_t, std::string> assigned;
  if (matching.labels) {
    for (const auto& [label, track_id] : *matching.labels) {
      const bool known_track = std::any_of(tracks.begin(), tracks.end(),
                                           [&](const Track& t) { return t.track_id == track_id; });
      const bool known_label = std::any_of(truth.begin(), truth.end(), [&](const TruthRecord& t) {
        return t.robot_label == label;
      });
      if (!known_track || !known_label) {
        throw UnmatchedTrack({track_id});
      }
      if (!assigned.emplace(track_id, label).second) {
        throw AmbiguousMatch("track " + std::to_string(track_id) + " mapped to several labels");
      }
    }
  } else {
    std::vector<std::int64_t> unmatched;
    for (const auto& t : tracks) {
      if (auto label = auto_label(t, truth, matching.auto_gate_m)) {
        assigned.emplace(t.track_id, *label);
      } else {
        unmatched.push_back(t.track_id);
      }
    }
    if (!unmatched.empty()) {
      throw UnmatchedTrack(unmatched);
    }
  }

  // A robot may be claimed by several tracks only if their spans are disjoint.
  std::map<std::string, std::vector<const Track*>> claims;
  for (const auto& t : tracks) {
    if (auto it = assigned.find(t.track_id); it != assigned.end() && !t.fixes.empty()) {
      claims[it->second].push_back(&t);
    }
  }
  for (auto& [label, claimants] : claims) {
    std::sort(claimants.begin(), claimants.end(), [](const Track* a, const Track* b) {
      return a->fixes.front().frame_id < b->fixes.front().frame_id;
    });
    for (std::size_t i = 1; i < claimants.size(); ++i) {
      if (claimants[i]->fixes.front().frame_id <= claimants[i - 1]->fixes.back().frame_id) {
        throw AmbiguousMatch("tracks " + std::to_string(claimants[i - 1]->track_id) + " and " +
                             std::to_string(claimants[i]->track_id) + " both claim robot '" +
                             label + "'");
      }
    }
  }

  ErrorReport report;
  report.frames_unestimable = frames_unestimable;
  std::vector<double> all;
  for (const auto& t : tracks) {
    const auto it = assigned.find(t.track_id);
    if (it == assigned.end()) {
      continue;
    }
    TrackReport tr;
    tr.track_id = t.track_id;
    tr.robot_label = it->second;
    std::vector<double> values;
    for (const auto& fix : t.fixes) {
      const TruthRecord* rec = covering(truth, tr.robot_label, fix.frame_id);
      if (rec == nullptr) {
        continue;
      }
      tr.samples.push_back(measure_error(fix.estimate, rec->position(), fix.frame_id, t.track_id));
      values.push_back(tr.samples.back().haversine_m);
    }
    tr.summary = summarize(values);
    all.insert(all.end(), values.begin(), values.end());
    report.tracks.push_back(std::move(tr));
  }
  std::sort(report.tracks.begin(), report.tracks.end(),
            [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
  report.overall = summarize(all);
  report.frames_evaluated = all.size();
  return report;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") {
    return ReportFormat::Csv;
  }
  if (name == "json") {
    return ReportFormat::Json;
  }
  throw ParseError(ParseErrorKind::UnknownFormat, "format", 0, "",
                   "'" + name + "' (expected csv or json)");
}

void write_errors_csv(std::ostream& out, const ErrorReport& report) {
  std::vector<const ErrorSample*> rows;
  for (const auto& t : report.tracks) {
    for (const auto& s : t.samples) {
      rows.push_back(&s);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return std::tie(a->track_id, a->frame_id) < std::tie(b->track_id, b->frame_id);
  });
  out << "frame_id,track_id,haversine_m,dlat_err_m,dlon_err_m\n";
  for (const auto* s : rows) {
    out << s->frame_id << ',' << s->track_id << ',' << format_double(s->haversine_m) << ','
        << format_double(s->dlat_err_m) << ',' << format_double(s->dlon_err_m) << '\n';
  }
}

void write_errors_json(std::ostream& out, const ErrorReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& t : report.tracks) {
    for (const auto& s : t.samples) {
      nlohmann::ordered_json row;
      row["frame_id"] = s.frame_id;
      row["track_id"] = s.track_id;
      row["haversine_m"] = s.haversine_m;
      row["dlat_err_m"] = s.dlat_err_m;
      row["dlon_err_m"] = s.dlon_err_m;
      rows.push_back(std::move(row));
    }
  }
  out << rows.dump(2) << '\n';
}

void write_summary_json(std::ostream& out, const ErrorReport& report) {
  nlohmann::ordered_json j;
  j["frames_evaluated"] = report.frames_evaluated;
  j["frames_unestimable"] = report.frames_unestimable;
  j["overall"] = summary_to_json(report.overall);
  j["tracks"] = nlohmann::ordered_json::array();
  for (const auto& t : report.tracks) {
    nlohmann::ordered_json tj;
    tj["track_id"] = t.track_id;
    tj["robot_label"] = t.robot_label;
    const nlohmann::ordered_json stats = summary_to_json(t.summary);
    for (const auto& [k, v] : stats.items()) {
      tj[k] = v;
    }
    j["tracks"].push_back(std::move(tj));
  }
  out << j.dump(2) << '\n';
}

ErrorReport parse_report(std::istream& errors_csv, std::istream& summary_json) {
  ErrorReport report;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(summary_json);
    report.frames_evaluated = j.at("frames_evaluated").get<std::size_t>();
    report.frames_unestimable = j.at("frames_unestimable").get<std::size_t>();
    report.overall = summary_from_json(j.at("overall"));
    for (const auto& tj : j.at("tracks")) {
      TrackReport tr;
      tr.track_id = tj.at("track_id").get<std::int64_t>();
      tr.robot_label = tj.at("robot_label").get<std::string>();
      tr.summary = summary_from_json(tj);
      report.tracks.push_back(std::move(tr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::MalformedRow, "summary.json", 0, "", e.what());
  }

  std::map<std::int64_t, TrackReport*> by_id;
  for (auto& t : report.tracks) {
    by_id[t.track_id] = &t;
  }
  csv::Reader reader(errors_csv, "errors.csv");
  reader.require_columns({"frame_id", "track_id", "haversine_m", "dlat_err_m", "dlon_err_m"});
  while (reader.next_row()) {
    ErrorSample s;
    s.frame_id = reader.integer("frame_id");
    s.track_id = reader.integer("track_id");
    s.haversine_m = reader.number("haversine_m");
    s.dlat_err_m = reader.number("dlat_err_m");
    s.dlon_err_m = reader.number("dlon_err_m");
    const auto it = by_id.find(s.track_id);
    if (it == by_id.end()) {
      reader.fail(ParseErrorKind::MalformedRow, "track_id", "track absent from summary.json");
    }
    it->second->samples.push_back(s);
  }
  return report;
}

} // namespace aerogeo
