#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gestfuse/cnn.hpp"
#include "gestfuse/emg_features.hpp"
#include "gestfuse/svm.hpp"
#include "gestfuse/types.hpp"
#include "gestfuse/vision_features.hpp"

namespace gestfuse {

// The seven benchmark rows: each sensor alone, then EMG fused with each
// vision source (DVS event frames, DAVIS event frames, DAVIS APS frames).
enum class Modality { EMG, DVS, DAV, FRM, FUS_DVS, FUS_DAV, FUS_FRM };

const char* modality_name(Modality m);  // "EMG", "DVS", ..., "FUS-DVS", ...
Modality parse_modality(const std::string& name);
bool is_fusion(Modality m);
// The vision source feeding a modality (DVS for FUS-DVS, etc.).
// EMG has none; passing it raises BadConfig.
Modality vision_source_of(Modality m);

enum class ModelKind { LinearSvm, RbfSvm, Cnn };
const char* model_kind_name(ModelKind k);  // "SVM-linear", "SVM-rbf", "CNN"
ModelKind parse_model_kind(const std::string& name);

// Paired per-window samples: a 1x16 time-domain feature tensor and a
// 1x60x60 patch tensor per window, plus the gesture label. `subjects` is
// optional (parallel to labels when present) and only consulted by
// subject-wise fold assignment.
struct PairedDataset {
  std::vector<Tensor> emg;
  std::vector<Tensor> vision;
  std::vector<int> labels;
  std::vector<int> subjects;

  std::size_t size() const { return labels.size(); }
};

// EMG block first, then the 900 orientation values: a 916-dim vector.
// Both inputs must carry the same window index.
std::vector<double> concat_features(const EmgFeatureVector& emg, const HogDescriptor& vision);

// Feature row for the maximum-margin models: the 16 time-domain values
// (EMG), the 900 orientation values of the patch (vision modalities), or
// their 916-value concatenation (fusion modalities).
std::vector<double> svm_feature_row(const Tensor& emg, const Tensor& vision, Modality modality);

// Two unimodal networks plus one layer of 5 perceptrons fully connected to
// their ten output activities.
struct FusionModel {
  CnnModel emg_cnn;
  CnnModel vision_cnn;
  Tensor weights;  // 5x10; columns 0..4 read the EMG net, 5..9 the vision net
  Tensor bias;     // 5
  bool use_logits = false;  // feed pre-softmax activities instead of probabilities
};

// softmax(W * [emg_activity; vision_activity] + bias)
std::vector<double> fusion_forward(const FusionModel& model, const Tensor& emg_input,
                                   const Tensor& vision_input);

struct FusionTrainConfig {
  TrainConfig cnn;         // step 1, applied to both unimodal networks
  int fusion_epochs = 50;  // step 2
  int fusion_batch_size = 32;
  bool use_logits = false;
  std::string vision_modality = "DVS";
};

// Step 1 trains the two unimodal networks; step 2 freezes them and trains
// only the perceptron layer (Adadelta on softmax cross-entropy over the
// concatenated activities).
FusionModel train_two_step(const PairedDataset& data, const FusionTrainConfig& config,
                           std::uint64_t seed);

// Same binary container as the unimodal networks; the descriptor embeds
// both network architectures and the blobs append the perceptron layer.
void save_fusion(const std::filesystem::path& path, const FusionModel& model);
FusionModel load_fusion(const std::filesystem::path& path);

// 5-class paired set where the EMG-like modality cannot separate classes
// 0/1 on odd repetitions and the vision-like modality cannot separate 3/4
// on odd repetitions; every sample stays identifiable from the pair. With
// noise=0 each single modality's Bayes accuracy is 0.9, the pair's 1.0.
// n_per_class must be at least 20.
PairedDataset make_complementary_synthetic(int n_per_class, double noise, std::uint64_t seed);

struct EvalConfig {
  int folds = 5;
  std::uint64_t seed = 0;
  double svm_c = 10.0;
  TrainConfig cnn;         // unimodal network training
  int fusion_epochs = 50;
  bool use_logits = false;
  bool per_subject = false;  // group folds by subject id instead of mixing
};

struct EvalReport {
  Modality modality = Modality::EMG;
  ModelKind model = ModelKind::Cnn;
  int window_ms = 0;
  std::vector<double> fold_accuracies;  // one per fold, in fold order
  double mean_accuracy = 0.0;           // arithmetic mean of the folds
  double std_accuracy = 0.0;            // population standard deviation
};

// Cross-validated accuracy of one (modality, model) cell: train on all but
// one fold, test on the held-out fold, rotating. Folds are stratified by
// class (or grouped by subject when configured) and trained independently;
// results merge in fold order.
EvalReport evaluate(const PairedDataset& data, Modality modality, ModelKind kind, int window_ms,
                    const EvalConfig& config = {});

// Text table, modality rows x model columns, "mean ± std" percent cells.
std::string format_report_table(std::span<const EvalReport> reports);
std::string reports_to_json(std::span<const EvalReport> reports);

// Window -> paired-sample glue shared by the evaluation harness and the
// training commands. The vision tensor comes from the window's events
// (DVS/DAV) or its averaged APS frames (FRM).
Tensor emg_tensor(const SyncWindow& window);
Tensor vision_tensor(const SyncWindow& window, const SensorGeometry& geometry,
                     Modality vision_source);
// Appends one labeled window; windows without a label are skipped.
void append_window(PairedDataset& data, const SyncWindow& window,
                   const SensorGeometry& geometry, Modality vision_source, int subject = 0);

}  // namespace gestfuse
