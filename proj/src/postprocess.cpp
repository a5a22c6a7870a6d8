#include "seqact/postprocess.hpp"

#include <sstream>

namespace seqact {

void validate_row_stochastic(const ClipProbSequence& seq, double tol) {
  if (seq.length() < 1) throw Error("probability sequence is empty");
  if (seq.num_classes() < 1)
    throw ShapeError("probability rows need at least 2 columns (K+1, K >= 1)");
  if (!(seq.clip_duration_s > 0.0))
    throw Error("clip_duration_s must be positive");
  for (Eigen::Index t = 0; t < seq.length(); ++t) {
    double sum = seq.probs.row(t).sum();
    if (std::abs(sum - 1.0) > tol || seq.probs.row(t).minCoeff() < -tol ||
        seq.probs.row(t).maxCoeff() > 1.0 + tol) {
      std::ostringstream msg;
      msg << "row " << t << " is not a probability vector (sum " << sum << ")";
      throw Error(msg.str());
    }
  }
}

}  // namespace seqact

namespace seqact::post {

ClipProbSequence smooth(const ClipProbSequence& seq, int k) {
  if (k < 0) throw Error("smooth: k must be non-negative");
  if (seq.length() < 1) throw Error("smooth: empty sequence");
  if (k == 0) return seq;
  Eigen::Index T = seq.length();
  ClipProbSequence out;
  out.clip_duration_s = seq.clip_duration_s;
  out.probs.resize(T, seq.probs.cols());
  for (Eigen::Index i = 0; i < T; ++i) {
    Eigen::Index lo = std::max<Eigen::Index>(0, i - k);
    Eigen::Index hi = std::min<Eigen::Index>(T - 1, i + k);
    Eigen::Index width = hi - lo + 1;
    out.probs.row(i) =
        seq.probs.middleRows(lo, width).colwise().sum() / static_cast<double>(width);
  }
  return out;
}

VideoClassification classify_video(const ClipProbSequence& seq) {
  if (seq.length() < 1) throw Error("classify_video: empty sequence");
  Eigen::Index K = seq.num_classes();
  if (K < 1) throw ShapeError("classify_video: no activity classes");
  Eigen::VectorXd mean = seq.probs.colwise().mean().transpose();
  Eigen::VectorXd activity = mean.tail(K);

  int best = 0;
  for (Eigen::Index c = 1; c < K; ++c)
    if (activity[c] > activity[best]) best = static_cast<int>(c);

  VideoClassification result;
  result.label = best + 1;
  double total = activity.sum();
  result.class_scores =
      total > 0.0 ? Eigen::VectorXd(activity / total)
                  : Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  return result;
}

Eigen::VectorXd activity_probability(const ClipProbSequence& seq) {
  if (seq.length() < 1) throw Error("activity_probability: empty sequence");
  return Eigen::VectorXd::Ones(seq.length()) - seq.probs.col(0);
}

std::vector<Segment> localize(const ClipProbSequence& seq, int video_label,
                              const PostprocessConfig& config) {
  if (video_label < 1 || video_label > seq.num_classes()) {
    std::ostringstream msg;
    msg << "localize: label " << video_label << " outside [1, "
        << seq.num_classes() << "]";
    throw Error(msg.str());
  }
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0))
    throw Error("localize: gamma must be in [0, 1]");

  ClipProbSequence smoothed = smooth(seq, config.smooth_k);
  Eigen::VectorXd activity = activity_probability(smoothed);
  double dur = seq.clip_duration_s;

  std::vector<Segment> segments;
  Eigen::Index T = activity.size();
  Eigen::Index run_start = -1;
  for (Eigen::Index i = 0; i <= T; ++i) {
    bool keep = i < T && activity[i] > config.gamma;
    if (keep && run_start < 0) run_start = i;
    if (!keep && run_start >= 0) {
      Eigen::Index len = i - run_start;
      Segment seg;
      seg.label = video_label;
      seg.start_s = static_cast<double>(run_start) * dur;
      seg.end_s = static_cast<double>(i) * dur;
      seg.score = activity.segment(run_start, len).mean();
      segments.push_back(seg);
      run_start = -1;
    }
  }
  return segments;
}

}  // namespace seqact::post
