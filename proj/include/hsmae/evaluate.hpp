#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hsmae/checkpoint.hpp"
#include "hsmae/manifest.hpp"
#include "hsmae/masking.hpp"
#include "hsmae/model.hpp"
#include "hsmae/optimizer.hpp"

namespace hsmae {

struct LabelScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct EvalReport {
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    std::vector<LabelScore> per_label;
};

// Row-major binary matrices [n_samples x n_labels]. Per-label F1 = 2pr/(p+r)
// with 0/0 treated as 0; micro from pooled counts, macro unweighted.
EvalReport f1_scores(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth,
                     std::size_t n_samples, std::size_t n_labels);

std::string eval_report_to_json(const EvalReport& r);

// Sigmoid of the head outputs on mean-pooled encoder tokens. The cube is
// resized to the model grid and reduced to channels_m evenly spaced channels.
std::vector<double> predict_multilabel(const MaeParams<float>& params, const SpectralCube& cube,
                                       int channels_m);

std::vector<std::uint8_t> binarize(const std::vector<double>& probs, double threshold = 0.5);

struct FinetuneConfig {
    int epochs = 100;
    int channels_m = 50;
    int batch_size = 1;
    double lr = 1e-3;
    double min_lr = 0.0;
    double flip_prob = 0.5;
    double mix_prob = 0.5;       // chance a sample is mixed at all
    double mixup_alpha = 0.8;
    double cutmix_alpha = 1.0;
    bool linear_probe = false;   // freeze everything but the head
    AdamWConfig adamw;
    std::uint64_t seed = 0;
    std::string out_dir;  // empty: nothing written
};

struct FinetuneResult {
    MaeParams<float> params;  // best-validation-F1 snapshot
    EvalReport best_val;
    std::vector<double> val_f1_per_epoch;
};

using EpochLogger = std::function<void(int epoch, double train_loss, double val_macro_f1)>;

// Full finetuning of the pretrained encoder plus a fresh mean-pool head,
// with flips, Mixup, and CutMix; mean BCE over labels against soft targets.
FinetuneResult finetune(const MaeParams<float>& pretrained, const DatasetManifest& manifest,
                        const FinetuneConfig& cfg, const EpochLogger& log = nullptr);

// In-memory variant used by harnesses: (cube, multi-hot labels) pairs.
struct LabeledCube {
    SpectralCube cube;
    std::vector<float> labels;
};
FinetuneResult finetune_cubes(const MaeParams<float>& pretrained,
                              const std::vector<LabeledCube>& train,
                              const std::vector<LabeledCube>& val, std::size_t n_labels,
                              const FinetuneConfig& cfg, const EpochLogger& log = nullptr);

EvalReport evaluate_cubes(const MaeParams<float>& params, const std::vector<LabeledCube>& samples,
                          int channels_m, double threshold = 0.5);

EvalReport evaluate_manifest(const MaeParams<float>& params, const DatasetManifest& manifest,
                             Split split, int channels_m, double threshold = 0.5);

// Writes input / masked / reconstruction RGB previews plus the mask plan JSON.
void reconstruct_dump(const MaeParams<float>& params, const SpectralCube& cube,
                      const MaskPlan& plan, const std::string& out_dir);

}  // namespace hsmae
