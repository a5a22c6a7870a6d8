// seqact: generate data, train, predict and evaluate untrimmed-video
// activity classification/localization on clip feature sequences.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "seqact/common.hpp"
#include "seqact/data/features.hpp"
#include "seqact/data/manifest.hpp"
#include "seqact/data/synthetic.hpp"
#include "seqact/defaults.hpp"
#include "seqact/eval.hpp"
#include "seqact/nn/checkpoint.hpp"
#include "seqact/nn/model.hpp"
#include "seqact/postprocess.hpp"
#include "seqact/train/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seqact;

constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  data::SyntheticSpec spec;
  std::string output_dir;
};

int run_synth(const SynthArgs& args) {
  auto dataset = data::generate_synthetic(args.spec, args.output_dir);
  std::cout << "wrote " << dataset.records.size() << " videos\n"
            << "manifest: " << dataset.manifest_path.string() << "\n"
            << "labels:   " << dataset.labels_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string manifest;
  std::string labels;
  std::string output;
  std::string loss_log;  // empty = <output>.loss
  train::TrainConfig config;
};

int run_train(const TrainArgs& args) {
  const auto records = data::read_manifest(args.manifest);
  const auto labels = data::read_labels(args.labels);
  const int K = static_cast<int>(labels.size());
  if (K < 1)
    throw DataError(DataError::Kind::kMalformed,
                    args.labels + ": no classes listed");
  const auto train_records = data::split(records, data::Subset::kTrain);
  if (train_records.empty())
    throw DataError(DataError::Kind::kMalformed,
                    args.manifest + ": no videos in the train subset");

  std::vector<train::LabeledSequence> dataset;
  dataset.reserve(train_records.size());
  for (const auto& record : train_records) {
    const auto features = data::read_features(
        data::resolve_feature_path(args.manifest, record), record.video_id);
    if (features.length() != record.num_clips)
      throw DataError(DataError::Kind::kDimensionMismatch,
                      "video '" + record.video_id + "': manifest says " +
                          std::to_string(record.num_clips) +
                          " clips but the feature file has " +
                          std::to_string(features.length()));
    train::LabeledSequence seq;
    seq.video_id = record.video_id;
    seq.features = features.as_double();
    seq.targets = data::clip_targets(record, K);
    dataset.push_back(std::move(seq));
  }

  train::TrainConfig config = args.config;
  config.num_classes = K;
  auto result = train::train(dataset, config);
  nn::save_checkpoint(result.params, args.output);

  const std::string loss_path =
      args.loss_log.empty() ? args.output + ".loss" : args.loss_log;
  {
    fs::path p(loss_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream log(loss_path, std::ios::trunc);
    if (!log)
      throw DataError(DataError::Kind::kIo, "cannot create " + loss_path);
    for (double loss : result.epoch_losses)
      log << format_double(loss) << '\n';
    if (!log)
      throw DataError(DataError::Kind::kIo, "write failed on " + loss_path);
  }

  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e)
    std::cout << "epoch " << (e + 1) << "/" << result.epoch_losses.size()
              << " loss " << result.epoch_losses[e] << "\n";
  std::cout << "checkpoint: " << args.output << "\n"
            << "loss log:   " << loss_path << "\n";
  return 0;
}

// -------------------------------------------------------------- predict ----

struct PredictArgs {
  std::string checkpoint;
  std::string manifest;
  std::string labels;
  std::string output_dir;
  std::string subset = "validation";
  int smooth_k = defaults::kSmoothK;
  double gamma = defaults::kGamma;
  int threads = 1;
};

struct VideoPrediction {
  std::string video_id;
  std::string probs_path;
  post::VideoClassification classification;
  std::vector<Segment> segments;
};

int run_predict(const PredictArgs& args) {
  const auto params = nn::load_checkpoint(args.checkpoint);
  const auto labels = data::read_labels(args.labels);
  if (static_cast<Eigen::Index>(labels.size()) != params.num_classes())
    throw DataError(DataError::Kind::kDimensionMismatch,
                    "checkpoint has " + std::to_string(params.num_classes()) +
                        " activity classes but " + args.labels + " lists " +
                        std::to_string(labels.size()));

  const auto records = data::split(data::read_manifest(args.manifest),
                                   data::parse_subset(args.subset));
  if (records.empty())
    throw DataError(DataError::Kind::kMalformed,
                    args.manifest + ": no videos in subset '" + args.subset +
                        "'");

  const fs::path out_dir(args.output_dir);
  fs::create_directories(out_dir / "probs");

  post::PostprocessConfig post_config;
  post_config.smooth_k = args.smooth_k;
  post_config.gamma = args.gamma;

  std::vector<VideoPrediction> predictions(records.size());
  parallel_chunks(records.size(), args.threads,
                  [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& record = records[i];
      const auto features = data::read_features(
          data::resolve_feature_path(args.manifest, record), record.video_id);
      if (features.length() != record.num_clips)
        throw DataError(DataError::Kind::kDimensionMismatch,
                        "video '" + record.video_id + "': manifest says " +
                            std::to_string(record.num_clips) +
                            " clips but the feature file has " +
                            std::to_string(features.length()));
      auto fwd = nn::model_forward(params, features.as_double(),
                                   nn::RunMode::kEval, 0);
      ClipProbSequence seq;
      seq.probs = std::move(fwd.probs);
      seq.clip_duration_s = record.clip_duration_s();

      VideoPrediction& p = predictions[i];
      p.video_id = record.video_id;
      p.classification = post::classify_video(seq);
      p.segments = post::localize(seq, p.classification.label, post_config);

      // Probability files reuse the feature container (rows = clips,
      // columns = K+1 classes).
      data::FeatureSequence probs_file;
      probs_file.video_id = record.video_id;
      probs_file.clips = seq.probs.cast<float>();
      p.probs_path = "probs/" + record.video_id + ".probs";
      data::write_features(probs_file, out_dir / p.probs_path);
    }
  });

  json videos = json::array();
  for (const auto& p : predictions) {
    json segments = json::array();
    for (const auto& s : p.segments)
      segments.push_back(
          {{"label", s.label},
           {"label_name", labels[static_cast<std::size_t>(s.label - 1)]},
           {"segment", {s.start_s, s.end_s}},
           {"score", s.score}});
    std::vector<double> scores(
        p.classification.class_scores.data(),
        p.classification.class_scores.data() +
            p.classification.class_scores.size());
    videos.push_back(
        {{"video_id", p.video_id},
         {"probs_path", p.probs_path},
         {"label", p.classification.label},
         {"label_name",
          labels[static_cast<std::size_t>(p.classification.label - 1)]},
         {"class_scores", scores},
         {"segments", segments}});
  }
  json doc{{"subset", args.subset},
           {"smooth_k", args.smooth_k},
           {"gamma", args.gamma},
           {"videos", videos}};

  const fs::path pred_path = out_dir / "predictions.json";
  std::ofstream out(pred_path, std::ios::trunc);
  if (!out)
    throw DataError(DataError::Kind::kIo,
                    "cannot create " + pred_path.string());
  out << doc.dump(2) << '\n';
  if (!out)
    throw DataError(DataError::Kind::kIo,
                    "write failed on " + pred_path.string());
  std::cout << "predictions: " << pred_path.string() << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string predictions;
  std::string manifest;
  std::string labels;
  std::string output;  // empty = metrics.json next to predictions
  std::string subset = "validation";
  double iou = defaults::kIouThreshold;
  std::vector<int> grid_k;
  std::vector<double> grid_gamma;
};

// Ground-truth video class: the label with the largest total annotated
// duration (ties to the smaller label); 0 when the video has no annotations.
int majority_label(const data::VideoRecord& record) {
  std::map<int, double> durations;
  for (const auto& a : record.annotations)
    durations[a.label] += a.end_s - a.start_s;
  int best = 0;
  double best_duration = 0.0;
  for (const auto& [label, duration] : durations)
    if (duration > best_duration) {
      best = label;
      best_duration = duration;
    }
  return best;
}

int run_eval(const EvalArgs& args) {
  if ((args.grid_k.empty()) != (args.grid_gamma.empty()))
    throw Error("--grid-k and --grid-gamma must be given together");
  const auto labels = data::read_labels(args.labels);
  const int K = static_cast<int>(labels.size());
  const auto records = data::split(data::read_manifest(args.manifest),
                                   data::parse_subset(args.subset));
  if (records.empty())
    throw DataError(DataError::Kind::kMalformed,
                    args.manifest + ": no videos in subset '" + args.subset +
                        "'");

  std::ifstream in(args.predictions);
  if (!in)
    throw DataError(DataError::Kind::kIo, "cannot open " + args.predictions);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::kMalformed,
                    args.predictions + ": " + e.what());
  }

  std::map<std::string, const json*> by_video;
  try {
    for (const auto& v : doc.at("videos"))
      by_video[v.at("video_id").get<std::string>()] = &v;
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::kMalformed,
                    args.predictions + ": " + e.what());
  }

  std::vector<std::string> missing;
  for (const auto& record : records)
    if (!by_video.count(record.video_id)) missing.push_back(record.video_id);
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += "\n  " + id;
    throw DataError(DataError::Kind::kMalformed,
                    args.predictions + ": missing predictions for " +
                        std::to_string(missing.size()) + " video(s):" + list);
  }

  std::vector<eval::ClassificationResult> classification;
  std::vector<eval::VideoDetections> detections;
  for (const auto& record : records) {
    const json& entry = *by_video.at(record.video_id);
    try {
      const int truth = majority_label(record);
      if (truth > K)
        throw DataError(DataError::Kind::kMalformed,
                        "video '" + record.video_id + "' is annotated with class " +
                            std::to_string(truth) + " but " + args.labels +
                            " lists only " + std::to_string(K));
      if (truth > 0) {  // annotation-less videos can't be classified
        eval::ClassificationResult c;
        c.video_id = record.video_id;
        c.truth = truth;
        const auto& raw = entry.at("class_scores");
        c.scores.resize(static_cast<Eigen::Index>(raw.size()));
        for (std::size_t s = 0; s < raw.size(); ++s)
          c.scores[static_cast<Eigen::Index>(s)] = raw[s].get<double>();
        classification.push_back(std::move(c));
      }

      eval::VideoDetections d;
      d.video_id = record.video_id;
      for (const auto& s : entry.at("segments")) {
        Segment seg;
        seg.label = s.at("label").get<int>();
        const auto& span = s.at("segment");
        if (!span.is_array() || span.size() != 2)
          throw DataError(DataError::Kind::kMalformed,
                          "segment must be [start_s, end_s]");
        seg.start_s = span[0].get<double>();
        seg.end_s = span[1].get<double>();
        seg.score = s.at("score").get<double>();
        d.predictions.push_back(seg);
      }
      for (const auto& a : record.annotations)
        d.ground_truth.push_back({a.label, a.start_s, a.end_s, 1.0});
      detections.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw DataError(DataError::Kind::kMalformed,
                      args.predictions + ": video '" + record.video_id +
                          "': " + e.what());
    }
  }
  if (classification.empty())
    throw DataError(DataError::Kind::kMalformed,
                    args.manifest + ": no annotated videos in subset '" +
                        args.subset + "'");

  json metrics{
      {"classification",
       {{"map", eval::classification_map(classification)},
        {"hit_at_3", eval::hit_at_3(classification)}}},
      {"detection",
       {{"map", eval::detection_map(detections, args.iou)},
        {"iou_threshold", args.iou}}},
      {"grid", json::array()},
  };

  if (!args.grid_k.empty()) {
    const fs::path pred_dir = fs::path(args.predictions).parent_path();
    std::vector<eval::GridVideo> grid_videos;
    grid_videos.reserve(records.size());
    for (const auto& record : records) {
      const json& entry = *by_video.at(record.video_id);
      std::string probs_path;
      try {
        probs_path = entry.at("probs_path").get<std::string>();
      } catch (const json::exception& e) {
        throw DataError(DataError::Kind::kMalformed,
                        args.predictions + ": video '" + record.video_id +
                            "': " + e.what());
      }
      fs::path resolved(probs_path);
      if (!resolved.is_absolute()) resolved = pred_dir / resolved;
      const auto probs_file = data::read_features(resolved, record.video_id);
      eval::GridVideo gv;
      gv.video_id = record.video_id;
      gv.probs.probs = probs_file.as_double();
      gv.probs.clip_duration_s = record.clip_duration_s();
      validate_row_stochastic(gv.probs, 1e-4);  // f32 storage rounds a little
      for (const auto& a : record.annotations)
        gv.ground_truth.push_back({a.label, a.start_s, a.end_s, 1.0});
      grid_videos.push_back(std::move(gv));
    }
    const auto grid =
        eval::grid_search(grid_videos, args.grid_k, args.grid_gamma, args.iou);
    for (const auto& cell : grid.cells)
      metrics["grid"].push_back({cell.k, cell.gamma, cell.map});
    metrics["grid_best"] = {grid.best.k, grid.best.gamma, grid.best.map};
  }

  const std::string out_path =
      args.output.empty()
          ? (fs::path(args.predictions).parent_path() / "metrics.json")
                .string()
          : args.output;
  {
    fs::path p(out_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(out_path, std::ios::trunc);
    if (!out)
      throw DataError(DataError::Kind::kIo, "cannot create " + out_path);
    out << metrics.dump(2) << '\n';
    if (!out)
      throw DataError(DataError::Kind::kIo, "write failed on " + out_path);
  }

  std::printf("%-28s %8.4f\n", "classification mAP",
              metrics["classification"]["map"].get<double>());
  std::printf("%-28s %8.4f\n", "classification Hit@3",
              metrics["classification"]["hit_at_3"].get<double>());
  std::printf("%-28s %8.4f\n",
              ("detection mAP @ IoU " + format_double(args.iou)).c_str(),
              metrics["detection"]["map"].get<double>());
  if (!metrics["grid"].empty()) {
    std::printf("\n%6s %8s %10s\n", "k", "gamma", "mAP");
    for (const auto& cell : metrics["grid"])
      std::printf("%6d %8.3f %10.4f\n", cell[0].get<int>(),
                  cell[1].get<double>(), cell[2].get<double>());
    std::printf("best: k=%d gamma=%.3f mAP=%.4f\n",
                metrics["grid_best"][0].get<int>(),
                metrics["grid_best"][1].get<double>(),
                metrics["grid_best"][2].get<double>());
  }
  std::cout << "metrics: " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Activity classification and temporal localization on untrimmed "
      "videos: LSTM over per-clip features, probability post-processing, "
      "challenge-style metrics."};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic feature dataset with exact ground truth");
  synth->add_option("--output-dir", synth_args.output_dir,
                    "Directory for features/, manifest.jsonl, labels.txt")
      ->required();
  synth->add_option("--classes", synth_args.spec.num_classes,
                    "Activity classes K (background is extra)")->capture_default_str();
  synth->add_option("--dim", synth_args.spec.feature_dim,
                    "Feature dimension D")->capture_default_str();
  synth->add_option("--train-videos", synth_args.spec.train_videos,
                    "Videos in the train subset")->capture_default_str();
  synth->add_option("--validation-videos", synth_args.spec.validation_videos,
                    "Videos in the validation subset")->capture_default_str();
  synth->add_option("--testing-videos", synth_args.spec.testing_videos,
                    "Videos in the testing subset")->capture_default_str();
  synth->add_option("--min-clips", synth_args.spec.min_clips,
                    "Minimum clips per video")->capture_default_str();
  synth->add_option("--max-clips", synth_args.spec.max_clips,
                    "Maximum clips per video")->capture_default_str();
  synth->add_option("--min-segments", synth_args.spec.min_segments,
                    "Minimum activity segments per video")->capture_default_str();
  synth->add_option("--max-segments", synth_args.spec.max_segments,
                    "Maximum activity segments per video")->capture_default_str();
  synth->add_option("--min-segment-clips", synth_args.spec.min_segment_clips,
                    "Shortest activity segment, in clips")->capture_default_str();
  synth->add_option("--min-gap-clips", synth_args.spec.min_gap_clips,
                    "Shortest background gap between segments, in clips")->capture_default_str();
  synth->add_option("--separation", synth_args.spec.class_separation,
                    "Class centroid norm")->capture_default_str();
  synth->add_option("--noise-sigma", synth_args.spec.noise_sigma,
                    "Per-dimension feature noise")->capture_default_str();
  synth->add_option("--fps", synth_args.spec.fps,
                    "Frame rate (clip duration = 16/fps s)")->capture_default_str();
  synth->add_option("--seed", synth_args.spec.seed, "Random seed")->capture_default_str();

  TrainArgs train_args;
  train_args.config.num_layers = defaults::kLstmLayers;
  train_args.config.cells = defaults::kLstmCells;
  train_args.config.input_dim = defaults::kInputDim;
  train_args.config.dropout_p = defaults::kDropout;
  train_args.config.rho = defaults::kBackgroundWeight;
  train_args.config.learning_rate = defaults::kLearningRate;
  train_args.config.epochs = defaults::kEpochs;
  train_args.config.batch_size = defaults::kBatchSize;
  train_args.config.seq_len = defaults::kSeqLen;
  auto* train_cmd = app.add_subcommand(
      "train", "Train the LSTM classifier on the manifest's train subset");
  train_cmd->add_option("--manifest", train_args.manifest, "Manifest path")
      ->required();
  train_cmd->add_option("--labels", train_args.labels, "Labels file")
      ->required();
  train_cmd->add_option("--output", train_args.output, "Checkpoint path")
      ->required();
  train_cmd->add_option("--loss-log", train_args.loss_log,
                        "Per-epoch loss file (default <output>.loss)");
  train_cmd->add_option("--layers", train_args.config.num_layers,
                        "LSTM layers N")->capture_default_str();
  train_cmd->add_option("--cells", train_args.config.cells,
                        "LSTM cells per layer c")->capture_default_str();
  train_cmd->add_option("--input-dim", train_args.config.input_dim,
                        "Feature dimension D")->capture_default_str();
  train_cmd->add_option("--dropout", train_args.config.dropout_p,
                        "Dropout probability p")->capture_default_str();
  train_cmd->add_option("--rho", train_args.config.rho,
                        "Background loss weight")->capture_default_str();
  train_cmd->add_option("--lr", train_args.config.learning_rate,
                        "RMSprop learning rate")->capture_default_str();
  train_cmd->add_option("--decay", train_args.config.decay,
                        "RMSprop decay")->capture_default_str();
  train_cmd->add_option("--epsilon", train_args.config.epsilon,
                        "RMSprop epsilon")->capture_default_str();
  train_cmd->add_option("--epochs", train_args.config.epochs,
                        "Training epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", train_args.config.batch_size,
                        "Windows per optimizer step")->capture_default_str();
  train_cmd->add_option("--seq-len", train_args.config.seq_len,
                        "Clips per training window")->capture_default_str();
  train_cmd->add_option("--seed", train_args.config.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--threads", train_args.config.threads,
                        "Worker threads (floats may round differently per "
                        "thread count)")->capture_default_str();

  PredictArgs predict_args;
  auto* predict = app.add_subcommand(
      "predict",
      "Run the model over a subset and write probabilities, labels and "
      "segments");
  predict->add_option("--checkpoint", predict_args.checkpoint,
                      "Checkpoint path")
      ->required();
  predict->add_option("--manifest", predict_args.manifest, "Manifest path")
      ->required();
  predict->add_option("--labels", predict_args.labels, "Labels file")
      ->required();
  predict->add_option("--output-dir", predict_args.output_dir,
                      "Directory for predictions.json and probs/")
      ->required();
  predict->add_option("--subset", predict_args.subset,
                      "train, validation or testing")->capture_default_str();
  predict->add_option("--smooth-k", predict_args.smooth_k,
                      "Mean-filter half window k")->capture_default_str();
  predict->add_option("--gamma", predict_args.gamma,
                      "Activity threshold gamma")->capture_default_str();
  predict->add_option("--threads", predict_args.threads, "Worker threads")->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Score predictions against the manifest's ground truth");
  eval_cmd->add_option("--predictions", eval_args.predictions,
                       "predictions.json from the predict step")
      ->required();
  eval_cmd->add_option("--manifest", eval_args.manifest, "Manifest path")
      ->required();
  eval_cmd->add_option("--labels", eval_args.labels, "Labels file")
      ->required();
  eval_cmd->add_option("--output", eval_args.output,
                       "Metrics JSON path (default metrics.json next to "
                       "predictions)");
  eval_cmd->add_option("--subset", eval_args.subset,
                       "train, validation or testing")->capture_default_str();
  eval_cmd->add_option("--iou", eval_args.iou,
                       "Detection IoU threshold")->capture_default_str();
  auto* grid_k_opt =
      eval_cmd->add_option("--grid-k", eval_args.grid_k,
                           "Smoothing k values for the grid search");
  auto* grid_gamma_opt =
      eval_cmd->add_option("--grid-gamma", eval_args.grid_gamma,
                           "Gamma values for the grid search");
  grid_k_opt->needs(grid_gamma_opt);
  grid_gamma_opt->needs(grid_k_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit clean, usage errors -> 1
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (train_cmd->parsed()) return run_train(train_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
