#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "seqact/common.hpp"
#include "seqact/eval.hpp"
#include "seqact/postprocess.hpp"

using namespace seqact;

namespace {

eval::ClassificationResult cls(std::string id, std::vector<double> scores,
                               int truth) {
  eval::ClassificationResult r;
  r.video_id = std::move(id);
  r.scores = Eigen::Map<Eigen::VectorXd>(scores.data(),
                                         Eigen::Index(scores.size()));
  r.truth = truth;
  return r;
}

Segment seg(int label, double start, double end, double score = 0.0) {
  return Segment{label, start, end, score};
}

}  // namespace

TEST_CASE("temporal_iou basics") {
  CHECK(eval::temporal_iou(1.0, 4.0, 1.0, 4.0) == 1.0);
  CHECK(eval::temporal_iou(0.0, 1.0, 2.0, 3.0) == 0.0);
  CHECK(eval::temporal_iou(0.0, 1.0, 1.0, 2.0) == 0.0);  // touching
  CHECK(std::abs(eval::temporal_iou(0.0, 10.0, 5.0, 15.0) - 1.0 / 3) < 1e-12);
}

TEST_CASE("temporal_iou is symmetric and bounded") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(0, 10);
    const double b = a + rng.uniform(0.01, 5);
    const double c = rng.uniform(0, 10);
    const double d = c + rng.uniform(0.01, 5);
    const double ab = eval::temporal_iou(a, b, c, d);
    CHECK(ab == eval::temporal_iou(c, d, a, b));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    if (ab == 1.0) {
      CHECK(a == c);
      CHECK(b == d);
    }
  }
}

TEST_CASE("temporal_iou rejects degenerate intervals") {
  CHECK_THROWS_AS(eval::temporal_iou(1.0, 1.0, 0.0, 2.0), Error);
  CHECK_THROWS_AS(eval::temporal_iou(0.0, 2.0, 3.0, 2.0), Error);
}

TEST_CASE("hit_at_3 counts top-3 membership") {
  // Four classes; scores listed for classes 1..4.
  std::vector<eval::ClassificationResult> first = {
      cls("a", {0.9, 0.05, 0.03, 0.02}, 1),
      cls("b", {0.1, 0.7, 0.1, 0.1}, 2)};
  CHECK(eval::hit_at_3(first) == 1.0);

  std::vector<eval::ClassificationResult> fourth = {
      cls("a", {0.4, 0.3, 0.2, 0.1}, 4), cls("b", {0.5, 0.2, 0.2, 0.1}, 4)};
  CHECK(eval::hit_at_3(fourth) == 0.0);

  std::vector<eval::ClassificationResult> half = {
      cls("a", {0.5, 0.4, 0.05, 0.05}, 2),   // rank 2: hit
      cls("b", {0.4, 0.3, 0.2, 0.1}, 4)};    // rank 4: miss
  CHECK(eval::hit_at_3(half) == 0.5);
}

TEST_CASE("hit_at_3 breaks score ties by class index") {
  // Classes 2,3,4 tie at 0.2; class 1 leads. Ranking: 1,2,3 in the top 3.
  std::vector<eval::ClassificationResult> tied = {
      cls("a", {0.4, 0.2, 0.2, 0.2}, 3)};
  CHECK(eval::hit_at_3(tied) == 1.0);
  std::vector<eval::ClassificationResult> tied4 = {
      cls("a", {0.4, 0.2, 0.2, 0.2}, 4)};
  CHECK(eval::hit_at_3(tied4) == 0.0);
}

TEST_CASE("classification_map on perfect and simple rankings") {
  std::vector<eval::ClassificationResult> perfect = {
      cls("a", {1.0, 0.0, 0.0}, 1), cls("b", {0.0, 1.0, 0.0}, 2),
      cls("c", {0.0, 0.0, 1.0}, 3)};
  CHECK(eval::classification_map(perfect) == doctest::Approx(1.0));

  // class 1: its positive "a" ranks second of two -> AP 0.5;
  // class 2: positive "b" ranks first -> AP 1.0. Mean 0.75.
  std::vector<eval::ClassificationResult> ranked = {
      cls("a", {0.5, 0.1}, 1), cls("b", {0.9, 0.8}, 2)};
  CHECK(eval::classification_map(ranked) == doctest::Approx(0.75));
}

TEST_CASE("classification_map matches a brute-force PR oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int videos = 5, classes = 3;
    std::vector<eval::ClassificationResult> results;
    for (int v = 0; v < videos; ++v) {
      std::vector<double> scores;
      for (int c = 0; c < classes; ++c)
        scores.push_back(rng.uniform(0, 1));
      results.push_back(cls("v" + std::to_string(v), scores,
                            1 + int(rng.uniform_int(0, classes - 1))));
    }
    double expected = 0.0;
    int scored = 0;
    for (int c = 1; c <= classes; ++c) {
      long npos = 0;
      for (const auto& r : results) npos += r.truth == c;
      if (npos == 0) continue;
      auto order = results;
      std::stable_sort(order.begin(), order.end(),
                       [&](const auto& x, const auto& y) {
                         if (x.scores[c - 1] != y.scores[c - 1])
                           return x.scores[c - 1] > y.scores[c - 1];
                         return x.video_id < y.video_id;
                       });
      std::vector<bool> hits;
      for (const auto& r : order) hits.push_back(r.truth == c);
      expected += oracles::ap_from_hits(hits, npos);
      ++scored;
    }
    expected /= scored;
    CHECK(std::abs(eval::classification_map(results) - expected) < 1e-12);
  }
}

TEST_CASE("classification_map input validation") {
  CHECK_THROWS_AS(eval::classification_map({}), Error);
  // Ground truth outside the scored classes.
  std::vector<eval::ClassificationResult> bad = {cls("a", {0.5}, 2)};
  CHECK_THROWS_AS(eval::classification_map(bad), Error);
  // Ragged score vectors.
  std::vector<eval::ClassificationResult> ragged = {
      cls("a", {0.5, 0.5}, 1), cls("b", {0.9}, 1)};
  CHECK_THROWS_AS(eval::classification_map(ragged), ShapeError);
}

TEST_CASE("detection_map trivial cases") {
  std::vector<eval::VideoDetections> exact = {
      {"v", {seg(1, 0, 10, 0.9)}, {seg(1, 0, 10)}}};
  CHECK(eval::detection_map(exact, 0.5) == doctest::Approx(1.0));

  std::vector<eval::VideoDetections> none = {{"v", {}, {seg(1, 0, 10)}}};
  CHECK(eval::detection_map(none, 0.5) == 0.0);
}

TEST_CASE("detection_map orders TP/FP by score") {
  // TP above FP: precision 1 at the hit -> AP 1. FP above TP: precision 1/2.
  std::vector<eval::VideoDetections> tp_first = {
      {"v", {seg(1, 0, 10, 0.9), seg(1, 50, 60, 0.4)}, {seg(1, 0, 10)}}};
  CHECK(eval::detection_map(tp_first, 0.5) == doctest::Approx(1.0));

  std::vector<eval::VideoDetections> fp_first = {
      {"v", {seg(1, 0, 10, 0.4), seg(1, 50, 60, 0.9)}, {seg(1, 0, 10)}}};
  CHECK(eval::detection_map(fp_first, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("detection_map uses a strict IoU threshold") {
  // IoU exactly 0.5: [0,10] vs [0,5] -> inter 5, union 10.
  std::vector<eval::VideoDetections> at = {
      {"v", {seg(1, 0, 10, 0.9)}, {seg(1, 0, 5)}}};
  CHECK(eval::detection_map(at, 0.5) == 0.0);
  std::vector<eval::VideoDetections> above = {
      {"v", {seg(1, 0, 10, 0.9)}, {seg(1, 0, 5.1)}}};
  CHECK(eval::detection_map(above, 0.5) > 0.0);
}

TEST_CASE("detection_map matches each ground truth at most once") {
  // Two identical predictions chase one GT: the second must be a FP.
  std::vector<eval::VideoDetections> dup = {
      {"v", {seg(1, 0, 10, 0.9), seg(1, 0, 10, 0.8)}, {seg(1, 0, 10)}}};
  CHECK(eval::detection_map(dup, 0.5) == doctest::Approx(1.0));
  // With two GTs both get matched.
  std::vector<eval::VideoDetections> two = {
      {"v",
       {seg(1, 0, 10, 0.9), seg(1, 0.5, 10.5, 0.8)},
       {seg(1, 0, 10), seg(1, 0.4, 10.4)}}};
  CHECK(eval::detection_map(two, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("detection_map is invariant under monotone score transforms") {
  Rng rng(17);
  std::vector<eval::VideoDetections> results;
  for (int v = 0; v < 4; ++v) {
    eval::VideoDetections vd;
    vd.video_id = "v" + std::to_string(v);
    for (int g = 0; g < 2; ++g) {
      const double s = rng.uniform(0, 50);
      vd.ground_truth.push_back(seg(1 + int(rng.uniform_int(0, 1)), s,
                                    s + rng.uniform(2, 10)));
    }
    for (int p = 0; p < 3; ++p) {
      const double s = rng.uniform(0, 50);
      vd.predictions.push_back(seg(1 + int(rng.uniform_int(0, 1)), s,
                                   s + rng.uniform(2, 10),
                                   rng.uniform(0.1, 0.9)));
    }
    results.push_back(std::move(vd));
  }
  const double base = eval::detection_map(results, 0.3);
  auto transformed = results;
  for (auto& vd : transformed)
    for (auto& p : vd.predictions) p.score = 2.0 * p.score + 1.0;
  CHECK(eval::detection_map(transformed, 0.3) == doctest::Approx(base));
}

TEST_CASE("removing a false positive never lowers detection mAP") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<eval::VideoDetections> results(2);
    for (int v = 0; v < 2; ++v) {
      results[v].video_id = "v" + std::to_string(v);
      for (int g = 0; g < 2; ++g) {
        const double s = 20.0 * g + rng.uniform(0, 5);
        results[v].ground_truth.push_back(
            seg(1, s, s + rng.uniform(3, 8)));
      }
      for (int p = 0; p < 4; ++p) {
        const double s = rng.uniform(0, 40);
        results[v].predictions.push_back(
            seg(1, s, s + rng.uniform(1, 8), rng.uniform(0, 1)));
      }
    }
    const double base = eval::detection_map(results, 0.5);

    // Find one unmatched (false-positive) prediction and delete it: that is
    // any prediction whose IoU with every GT is below threshold.
    for (auto& vd : results) {
      for (std::size_t i = 0; i < vd.predictions.size(); ++i) {
        bool overlaps = false;
        for (const auto& g : vd.ground_truth)
          if (eval::temporal_iou(vd.predictions[i].start_s,
                                 vd.predictions[i].end_s, g.start_s,
                                 g.end_s) > 0.5)
            overlaps = true;
        if (!overlaps) {
          auto pruned = results;
          auto& preds =
              pruned[&vd - results.data()].predictions;
          preds.erase(preds.begin() + std::ptrdiff_t(i));
          CHECK(eval::detection_map(pruned, 0.5) >= base - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("detection_map agrees with the brute-force oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int videos = 1 + int(rng.uniform_int(0, 3));
    const int classes = 1 + int(rng.uniform_int(0, 2));
    std::vector<eval::VideoDetections> results;
    for (int v = 0; v < videos; ++v) {
      eval::VideoDetections vd;
      vd.video_id = "v" + std::to_string(v);
      const int gts = 1 + int(rng.uniform_int(0, 2));
      for (int g = 0; g < gts; ++g) {
        const double s = rng.uniform(0, 30);
        vd.ground_truth.push_back(seg(1 + int(rng.uniform_int(0, classes - 1)),
                                      s, s + rng.uniform(1, 10)));
      }
      const int preds = int(rng.uniform_int(0, 5));
      for (int p = 0; p < preds; ++p) {
        const double s = rng.uniform(0, 30);
        // Coarse scores force ties to exercise the documented ordering.
        const double score = std::round(rng.uniform(0, 1) * 4) / 4.0;
        vd.predictions.push_back(seg(1 + int(rng.uniform_int(0, classes - 1)),
                                     s, s + rng.uniform(1, 10), score));
      }
      results.push_back(std::move(vd));
    }
    const double threshold = 0.2 + 0.2 * (trial % 4);
    const double got = eval::detection_map(results, threshold);
    const double want = oracles::brute_detection_map(results, threshold);
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("detection_map validates inputs") {
  std::vector<eval::VideoDetections> ok = {
      {"v", {}, {seg(1, 0, 10)}}};
  CHECK_THROWS_AS(eval::detection_map(ok, 0.0), Error);
  CHECK_THROWS_AS(eval::detection_map(ok, 1.5), Error);

  std::vector<eval::VideoDetections> no_gt = {{"v", {seg(1, 0, 1, 0.5)}, {}}};
  CHECK_THROWS_AS(eval::detection_map(no_gt, 0.5), Error);

  std::vector<eval::VideoDetections> bg_gt = {{"v", {}, {seg(0, 0, 10)}}};
  CHECK_THROWS_AS(eval::detection_map(bg_gt, 0.5), Error);
}

namespace {

eval::GridVideo grid_video(std::string id, const Eigen::MatrixXd& probs,
                           std::vector<Segment> gt, double clip_s) {
  eval::GridVideo v;
  v.video_id = std::move(id);
  v.probs.probs = probs;
  v.probs.clip_duration_s = clip_s;
  v.ground_truth = std::move(gt);
  return v;
}

}  // namespace

TEST_CASE("grid_search single cell equals a direct evaluation") {
  Rng rng(31);
  std::vector<eval::GridVideo> videos;
  for (int v = 0; v < 3; ++v) {
    Eigen::MatrixXd probs(20, 3);
    for (int t = 0; t < 20; ++t) {
      const bool active = t >= 5 && t < 15;
      const double a = active ? 0.8 : 0.1;
      probs(t, 0) = 1.0 - a;
      probs(t, 1 + v % 2) = a;
      probs(t, 2 - v % 2) = 0.0;
    }
    videos.push_back(grid_video("v" + std::to_string(v), probs,
                                {seg(1 + v % 2, 5.0, 15.0)}, 1.0));
  }

  auto grid = eval::grid_search(videos, {2}, {0.3}, 0.5);
  REQUIRE(grid.cells.size() == 1);
  CHECK(grid.best.k == 2);
  CHECK(grid.best.gamma == 0.3);

  std::vector<eval::VideoDetections> direct;
  for (const auto& v : videos) {
    auto label = post::classify_video(v.probs).label;
    post::PostprocessConfig cfg{2, 0.3};
    direct.push_back(
        {v.video_id, post::localize(v.probs, label, cfg), v.ground_truth});
  }
  CHECK(grid.cells[0].map ==
        doctest::Approx(eval::detection_map(direct, 0.5)).epsilon(1e-12));
  CHECK(grid.best.map == grid.cells[0].map);
}

TEST_CASE("grid_search lays out cells k-major and duplicates columns") {
  Rng rng(37);
  Eigen::MatrixXd probs(10, 2);
  for (int t = 0; t < 10; ++t) {
    const double a = t < 5 ? 0.9 : 0.05;
    probs(t, 0) = 1.0 - a;
    probs(t, 1) = a;
  }
  std::vector<eval::GridVideo> videos = {
      grid_video("v", probs, {seg(1, 0.0, 5.0)}, 1.0)};

  auto grid = eval::grid_search(videos, {0, 1}, {0.2, 0.2, 0.5}, 0.5);
  REQUIRE(grid.cells.size() == 6);
  CHECK(grid.cells[0].k == 0);
  CHECK(grid.cells[0].gamma == 0.2);
  CHECK(grid.cells[1].k == 0);
  CHECK(grid.cells[1].gamma == 0.2);
  CHECK(grid.cells[2].gamma == 0.5);
  CHECK(grid.cells[3].k == 1);
  // Duplicated gamma duplicates the cell value.
  CHECK(grid.cells[0].map == grid.cells[1].map);
  CHECK(grid.cells[3].map == grid.cells[4].map);
  // Best is the first cell attaining the max.
  double best = 0.0;
  for (const auto& c : grid.cells) best = std::max(best, c.map);
  CHECK(grid.best.map == best);
  for (const auto& c : grid.cells) {
    if (c.map == best) {
      CHECK(grid.best.k == c.k);
      CHECK(grid.best.gamma == c.gamma);
      break;
    }
  }
}

TEST_CASE("grid_search rejects empty grids") {
  Eigen::MatrixXd probs = Eigen::MatrixXd::Constant(4, 2, 0.5);
  std::vector<eval::GridVideo> videos = {
      grid_video("v", probs, {seg(1, 0.0, 2.0)}, 1.0)};
  CHECK_THROWS_AS(eval::grid_search(videos, {}, {0.2}, 0.5), Error);
  CHECK_THROWS_AS(eval::grid_search(videos, {0}, {}, 0.5), Error);
  CHECK_THROWS_AS(eval::grid_search({}, {0}, {0.2}, 0.5), Error);
}

TEST_CASE("smoothing rescues noisy probabilities in the grid") {
  // Clean block structure plus salt-and-pepper flips: k=0 fragments the
  // segments, moderate k recovers them.
  Rng rng(43);
  std::vector<eval::GridVideo> videos;
  for (int v = 0; v < 10; ++v) {
    const int t_total = 60;
    Eigen::MatrixXd probs(t_total, 2);
    std::vector<Segment> gt;
    for (int t = 0; t < t_total; ++t) {
      const bool active = t >= 15 && t < 45;
      double a = active ? 0.85 : 0.08;
      if (rng.uniform() < 0.18) a = 1.0 - a;  // flip noise
      probs(t, 0) = 1.0 - a;
      probs(t, 1) = a;
    }
    gt.push_back(seg(1, 15.0, 45.0));
    videos.push_back(
        grid_video("v" + std::to_string(v), probs, std::move(gt), 1.0));
  }
  auto grid = eval::grid_search(videos, {0, 5}, {0.3}, 0.5);
  REQUIRE(grid.cells.size() == 2);
  CHECK(grid.cells[1].map > grid.cells[0].map);
}
