#include "seqact/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "seqact/common.hpp"
#include "seqact/postprocess.hpp"

namespace seqact::eval {

namespace {

void check_interval(double start, double end, const char* which) {
  if (!(end > start))
    throw Error(std::string(which) + " interval [" + std::to_string(start) +
                ", " + std::to_string(end) + ") is degenerate");
}

void check_result(const ClassificationResult& r, Eigen::Index K) {
  if (r.scores.size() != K)
    throw ShapeError("video '" + r.video_id + "' has " +
                     std::to_string(r.scores.size()) + " class scores, expected " +
                     std::to_string(K));
  if (r.truth < 1 || r.truth > K)
    throw Error("video '" + r.video_id + "' has ground-truth class " +
                std::to_string(r.truth) + " outside [1, " + std::to_string(K) +
                "]");
}

// AP from a ranked TP/FP sequence: mean of precision at each hit.
double average_precision(const std::vector<bool>& is_hit, std::int64_t npos) {
  double ap = 0.0;
  std::int64_t hits = 0, rank = 0;
  for (bool hit : is_hit) {
    ++rank;
    if (!hit) continue;
    ++hits;
    ap += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return npos > 0 ? ap / static_cast<double>(npos) : 0.0;
}

}  // namespace

double temporal_iou(double a_start, double a_end, double b_start,
                    double b_end) {
  check_interval(a_start, a_end, "first");
  check_interval(b_start, b_end, "second");
  const double inter =
      std::max(0.0, std::min(a_end, b_end) - std::max(a_start, b_start));
  const double uni = (a_end - a_start) + (b_end - b_start) - inter;
  return inter / uni;
}

double hit_at_3(const std::vector<ClassificationResult>& results) {
  if (results.empty()) throw Error("no classification results");
  std::int64_t hits = 0;
  for (const auto& r : results) {
    if (r.scores.size() < 1)
      throw ShapeError("video '" + r.video_id + "' has no class scores");
    check_result(r, r.scores.size());
    // Rank classes by score descending, class index ascending on ties.
    std::vector<int> classes(static_cast<std::size_t>(r.scores.size()));
    for (std::size_t i = 0; i < classes.size(); ++i)
      classes[i] = static_cast<int>(i) + 1;
    std::stable_sort(classes.begin(), classes.end(), [&](int a, int b) {
      return r.scores[a - 1] > r.scores[b - 1];
    });
    const std::size_t top = std::min<std::size_t>(3, classes.size());
    for (std::size_t i = 0; i < top; ++i)
      if (classes[i] == r.truth) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double classification_map(const std::vector<ClassificationResult>& results) {
  if (results.empty()) throw Error("no classification results");
  const Eigen::Index K = results.front().scores.size();
  if (K < 1) throw ShapeError("results carry no class scores");
  for (const auto& r : results) check_result(r, K);

  double map_sum = 0.0;
  int evaluated = 0;
  for (int c = 1; c <= static_cast<int>(K); ++c) {
    std::int64_t npos = 0;
    for (const auto& r : results) npos += r.truth == c ? 1 : 0;
    if (npos == 0) continue;  // zero-positive classes are excluded

    std::vector<const ClassificationResult*> ranked;
    ranked.reserve(results.size());
    for (const auto& r : results) ranked.push_back(&r);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const ClassificationResult* a,
                         const ClassificationResult* b) {
                       if (a->scores[c - 1] != b->scores[c - 1])
                         return a->scores[c - 1] > b->scores[c - 1];
                       return a->video_id < b->video_id;
                     });
    std::vector<bool> is_hit;
    is_hit.reserve(ranked.size());
    for (const auto* r : ranked) is_hit.push_back(r->truth == c);
    map_sum += average_precision(is_hit, npos);
    ++evaluated;
  }
  if (evaluated == 0) throw Error("no class has a positive instance");
  return map_sum / static_cast<double>(evaluated);
}

double detection_map(const std::vector<VideoDetections>& results,
                     double iou_threshold) {
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0)
    throw Error("iou_threshold must lie in (0, 1], got " +
                std::to_string(iou_threshold));

  std::set<int> classes;
  for (const auto& v : results)
    for (const auto& g : v.ground_truth) {
      if (g.label < 1)
        throw Error("video '" + v.video_id +
                    "' has a ground-truth segment with label " +
                    std::to_string(g.label));
      check_interval(g.start_s, g.end_s, "ground-truth");
      classes.insert(g.label);
    }
  for (const auto& v : results)
    for (const auto& p : v.predictions)
      check_interval(p.start_s, p.end_s, "predicted");
  if (classes.empty()) throw Error("no ground-truth segments to score against");

  struct RankedPrediction {
    const VideoDetections* video;
    const Segment* segment;
  };

  double map_sum = 0.0;
  for (int c : classes) {
    std::int64_t npos = 0;
    // Per video: ground-truth segments of this class plus matched flags.
    std::map<const VideoDetections*, std::pair<std::vector<const Segment*>,
                                               std::vector<bool>>> gt;
    for (const auto& v : results) {
      std::vector<const Segment*> segs;
      for (const auto& g : v.ground_truth)
        if (g.label == c) segs.push_back(&g);
      npos += static_cast<std::int64_t>(segs.size());
      if (!segs.empty())
        gt.emplace(&v, std::make_pair(std::move(segs),
                                      std::vector<bool>()));
    }
    for (auto& [video, entry] : gt)
      entry.second.assign(entry.first.size(), false);

    std::vector<RankedPrediction> ranked;
    for (const auto& v : results)
      for (const auto& p : v.predictions)
        if (p.label == c) ranked.push_back({&v, &p});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedPrediction& a, const RankedPrediction& b) {
                       if (a.segment->score != b.segment->score)
                         return a.segment->score > b.segment->score;
                       if (a.video->video_id != b.video->video_id)
                         return a.video->video_id < b.video->video_id;
                       return a.segment->start_s < b.segment->start_s;
                     });

    std::vector<bool> is_hit;
    is_hit.reserve(ranked.size());
    for (const auto& rp : ranked) {
      bool hit = false;
      auto it = gt.find(rp.video);
      if (it != gt.end()) {
        auto& [segs, matched] = it->second;
        double best_iou = 0.0;
        std::size_t best = segs.size();
        for (std::size_t i = 0; i < segs.size(); ++i) {
          if (matched[i]) continue;
          const double iou =
              temporal_iou(rp.segment->start_s, rp.segment->end_s,
                           segs[i]->start_s, segs[i]->end_s);
          if (iou > best_iou) {
            best_iou = iou;
            best = i;
          }
        }
        if (best < segs.size() && best_iou > iou_threshold) {
          matched[best] = true;
          hit = true;
        }
      }
      is_hit.push_back(hit);
    }
    map_sum += average_precision(is_hit, npos);
  }
  return map_sum / static_cast<double>(classes.size());
}

GridResult grid_search(const std::vector<GridVideo>& videos,
                       const std::vector<int>& k_values,
                       const std::vector<double>& gamma_values,
                       double iou_threshold) {
  if (videos.empty()) throw Error("grid search needs at least one video");
  if (k_values.empty() || gamma_values.empty())
    throw Error("grid search needs nonempty k and gamma grids");

  // The video label does not depend on (k, gamma); classify once.
  std::vector<int> labels;
  labels.reserve(videos.size());
  for (const auto& v : videos)
    labels.push_back(post::classify_video(v.probs).label);

  GridResult result;
  result.cells.reserve(k_values.size() * gamma_values.size());
  bool have_best = false;
  for (int k : k_values) {
    for (double gamma : gamma_values) {
      post::PostprocessConfig config;
      config.smooth_k = k;
      config.gamma = gamma;
      std::vector<VideoDetections> detections;
      detections.reserve(videos.size());
      for (std::size_t i = 0; i < videos.size(); ++i) {
        VideoDetections d;
        d.video_id = videos[i].video_id;
        d.predictions = post::localize(videos[i].probs, labels[i], config);
        d.ground_truth = videos[i].ground_truth;
        detections.push_back(std::move(d));
      }
      GridCell cell{k, gamma, detection_map(detections, iou_threshold)};
      result.cells.push_back(cell);
      if (!have_best || cell.map > result.best.map) {
        result.best = cell;
        have_best = true;
      }
    }
  }
  return result;
}

}  // namespace seqact::eval
