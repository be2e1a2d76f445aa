#include "hsmae/evaluate.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "hsmae/augment.hpp"
#include "hsmae/native_io.hpp"
#include "hsmae/png_io.hpp"
#include "hsmae/sampling.hpp"

namespace hsmae {

namespace fs = std::filesystem;

EvalReport f1_scores(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth,
                     std::size_t n_samples, std::size_t n_labels) {
    if (pred.size() != n_samples * n_labels || truth.size() != pred.size())
        throw Error(ErrorCode::ShapeMismatch, "prediction and truth matrices must match");
    EvalReport rep;
    rep.per_label.resize(n_labels);
    std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
    double macro_sum = 0.0;
    for (std::size_t l = 0; l < n_labels; ++l) {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < n_samples; ++i) {
            bool p = pred[i * n_labels + l] != 0;
            bool t = truth[i * n_labels + l] != 0;
            if (t) ++support;
            if (p && t) ++tp;
            else if (p) ++fp;
            else if (t) ++fn;
        }
        LabelScore& s = rep.per_label[l];
        s.support = support;
        s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        s.f1 = 2 * tp + fp + fn > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
        macro_sum += s.f1;
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;
    }
    rep.f1_macro = n_labels > 0 ? macro_sum / n_labels : 0.0;
    rep.f1_micro = 2 * tp_all + fp_all + fn_all > 0
                       ? 2.0 * tp_all / (2.0 * tp_all + fp_all + fn_all)
                       : 0.0;
    return rep;
}

std::string eval_report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["f1_micro"] = r.f1_micro;
    j["f1_macro"] = r.f1_macro;
    j["per_label"] = nlohmann::json::array();
    for (const auto& s : r.per_label)
        j["per_label"].push_back({{"precision", s.precision},
                                  {"recall", s.recall},
                                  {"f1", s.f1},
                                  {"support", s.support}});
    return j.dump(2);
}

namespace {

// Resize to the model grid and select evenly spaced channels, then tokenize.
TokenBatch prepare_tokens(const MaeParams<float>& params, const SpectralCube& cube, int channels_m) {
    const MaeConfig& cfg = params.cfg;
    SpectralCube view = resize_bilinear(cube, cfg.grid_h * cfg.patch, cfg.grid_w * cfg.patch);
    int m = std::min(channels_m, view.channel_count());
    if (m < view.channel_count()) view = take_channels(view, select_channels_even(view.channels, m));
    return patchify(view, cfg.patch).first;
}

}  // namespace

std::vector<double> predict_multilabel(const MaeParams<float>& params, const SpectralCube& cube,
                                       int channels_m) {
    TokenBatch tokens = prepare_tokens(params, cube, channels_m);
    return sigmoid_vec(classifier_logits(params, tokens));
}

std::vector<std::uint8_t> binarize(const std::vector<double>& probs, double threshold) {
    std::vector<std::uint8_t> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > threshold ? 1 : 0;
    return out;
}

EvalReport evaluate_cubes(const MaeParams<float>& params, const std::vector<LabeledCube>& samples,
                          int channels_m, double threshold) {
    if (samples.empty()) throw Error(ErrorCode::EmptySplit, "nothing to evaluate");
    std::size_t n_labels = static_cast<std::size_t>(params.n_labels);
    std::vector<std::uint8_t> pred, truth;
    for (const auto& s : samples) {
        std::vector<double> probs = predict_multilabel(params, s.cube, channels_m);
        std::vector<std::uint8_t> p = binarize(probs, threshold);
        pred.insert(pred.end(), p.begin(), p.end());
        for (std::size_t l = 0; l < n_labels; ++l)
            truth.push_back(s.labels[l] >= 0.5f ? 1 : 0);
    }
    return f1_scores(pred, truth, samples.size(), n_labels);
}

namespace {

std::vector<LabeledCube> load_split(const DatasetManifest& manifest, Split split,
                                    std::size_t n_labels, bool require_labels) {
    std::vector<LabeledCube> out;
    for (const auto& rec : manifest.records) {
        if (rec.split != split) continue;
        if (!rec.labels) {
            if (require_labels)
                throw Error(ErrorCode::MissingLabels, rec.cube_path + " has no labels");
            continue;
        }
        LabeledCube lc;
        try {
            lc.cube = read_native_file(rec.cube_path);
        } catch (const Error& e) {
            throw Error(ErrorCode::DataError, rec.cube_path + ": " + e.what());
        }
        lc.labels.assign(n_labels, 0.0f);
        for (int id : *rec.labels) lc.labels[static_cast<std::size_t>(id)] = 1.0f;
        out.push_back(std::move(lc));
    }
    return out;
}

}  // namespace

EvalReport evaluate_manifest(const MaeParams<float>& params, const DatasetManifest& manifest,
                             Split split, int channels_m, double threshold) {
    auto samples = load_split(manifest, split, static_cast<std::size_t>(params.n_labels), true);
    if (samples.empty()) throw Error(ErrorCode::EmptySplit, std::string(split_name(split)) + " split is empty");
    return evaluate_cubes(params, samples, channels_m, threshold);
}

FinetuneResult finetune_cubes(const MaeParams<float>& pretrained,
                              const std::vector<LabeledCube>& train,
                              const std::vector<LabeledCube>& val, std::size_t n_labels,
                              const FinetuneConfig& cfg, const EpochLogger& log) {
    if (train.empty()) throw Error(ErrorCode::EmptySplit, "train split is empty");
    if (n_labels < 1) throw Error(ErrorCode::MissingLabels, "no labels defined");

    Rng rng(cfg.seed);
    MaeParams<float> params = pretrained;
    if (params.n_labels != static_cast<int>(n_labels)) {
        if (params.n_labels != 0)
            throw Error(ErrorCode::ConfigError, "checkpoint head width does not match dataset");
        params.add_head(static_cast<int>(n_labels), rng);
    }
    AdamWState<float> opt = AdamWState<float>::init(params.store, cfg.adamw);
    TensorStore<float> grads = params.store.zeros_like();

    std::vector<bool> mask;
    if (cfg.linear_probe) {
        mask.assign(params.store.entries.size(), false);
        mask[params.head_w] = true;
        mask[params.head_b] = true;
    }

    ScheduleConfig sched;
    sched.base_lr = cfg.lr;
    sched.min_lr = cfg.min_lr;
    sched.mode = ScheduleMode::single_cosine;
    sched.total_epochs = std::max(1, cfg.epochs);
    sched.warmup_epochs = 0.0;

    FinetuneResult result;
    result.params = params;
    result.best_val = val.empty() ? EvalReport{} : evaluate_cubes(params, val, cfg.channels_m);
    double best_f1 = val.empty() ? -1.0 : result.best_val.f1_macro;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::size_t j = i + rng.uniform_index(order.size() - i);
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t steps = 0;
        std::size_t done = 0;
        while (done < order.size()) {
            std::size_t batch = std::min<std::size_t>(cfg.batch_size, order.size() - done);
            grads.fill_zero();
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < batch; ++b, ++done) {
                LabeledSample sample{train[order[done]].cube, train[order[done]].labels};
                if (rng.bernoulli(cfg.flip_prob)) sample.cube = flip_h(sample.cube);
                if (rng.bernoulli(cfg.flip_prob)) sample.cube = flip_v(sample.cube);
                if (train.size() > 1 && rng.bernoulli(cfg.mix_prob)) {
                    std::size_t other = rng.uniform_index(train.size());
                    LabeledSample partner{train[other].cube, train[other].labels};
                    sample = rng.bernoulli(0.5) ? mixup(sample, partner, cfg.mixup_alpha, rng)
                                                : cutmix(sample, partner, cfg.cutmix_alpha, rng);
                }
                TokenBatch tokens = prepare_tokens(params, sample.cube, cfg.channels_m);
                batch_loss += classify_forward_backward(params, tokens, sample.labels, grads,
                                                        1.0 / batch);
            }
            batch_loss /= batch;
            double lr = lr_at(epoch + static_cast<double>(done) / train.size(), sched);
            adamw_step(params.store, grads, opt, lr, mask.empty() ? nullptr : &mask);
            epoch_loss += batch_loss;
            ++steps;
        }
        epoch_loss /= std::max<std::size_t>(1, steps);

        double val_f1 = 0.0;
        if (!val.empty()) {
            EvalReport rep = evaluate_cubes(params, val, cfg.channels_m);
            val_f1 = rep.f1_macro;
            if (val_f1 > best_f1) {
                best_f1 = val_f1;
                result.params = params;
                result.best_val = rep;
            }
        } else {
            result.params = params;
        }
        result.val_f1_per_epoch.push_back(val_f1);
        if (log) log(epoch, epoch_loss, val_f1);
    }

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        save_checkpoint((fs::path(cfg.out_dir) / "finetuned.hsck").string(), result.params);
        std::ofstream rep(fs::path(cfg.out_dir) / "val_report.json");
        rep << eval_report_to_json(result.best_val) << "\n";
    }
    return result;
}

FinetuneResult finetune(const MaeParams<float>& pretrained, const DatasetManifest& manifest,
                        const FinetuneConfig& cfg, const EpochLogger& log) {
    std::size_t n_labels = manifest.label_names.size();
    if (n_labels < 1) throw Error(ErrorCode::MissingLabels, "manifest defines no label names");
    auto train = load_split(manifest, Split::train, n_labels, true);
    auto val = load_split(manifest, Split::val, n_labels, true);
    if (train.empty()) throw Error(ErrorCode::EmptySplit, "train split is empty");
    return finetune_cubes(pretrained, train, val, n_labels, cfg, log);
}

void reconstruct_dump(const MaeParams<float>& params, const SpectralCube& cube,
                      const MaskPlan& plan, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const MaeConfig& cfg = params.cfg;
    SpectralCube view = resize_bilinear(cube, plan.grid.grid_h * cfg.patch,
                                        plan.grid.grid_w * cfg.patch);
    if (view.channel_count() != plan.grid.channels)
        throw Error(ErrorCode::GridMismatch, "mask plan channel count does not match the cube");
    auto [tokens, grid] = patchify(view, cfg.patch);
    if (!(grid == plan.grid)) throw Error(ErrorCode::GridMismatch, "mask plan grid does not match");

    auto dump = [&](const SpectralCube& c, const char* name) {
        std::vector<float> planes = rgb_preview(c);
        write_png_rgb((fs::path(out_dir) / name).string(), c.width, c.height,
                      planes_to_rgb8(planes, c.width, c.height));
    };
    dump(view, "input.png");

    TokenBatch masked_tokens = tokens;
    for (int id : plan.masked_token_ids)
        std::fill_n(masked_tokens.patch(static_cast<std::size_t>(id)), kPatchValues, 0.0f);
    dump(unpatchify(masked_tokens, grid), "masked.png");

    TokenBatch recon_tokens = tokens;
    if (!plan.masked_token_ids.empty()) {
        MaeForwardCache<float> cache;
        mae_forward(params, tokens, tokens, plan, &cache);
        for (std::size_t k = 0; k < plan.masked_token_ids.size(); ++k)
            std::copy_n(cache.pred.data() + k * kPatchValues, kPatchValues,
                        recon_tokens.patch(static_cast<std::size_t>(plan.masked_token_ids[k])));
    }
    dump(unpatchify(recon_tokens, grid), "reconstruction.png");

    std::ofstream pj(fs::path(out_dir) / "mask_plan.json");
    if (!pj) throw Error(ErrorCode::IoError, "cannot write mask_plan.json");
    pj << mask_plan_to_json(plan) << "\n";
}

}  // namespace hsmae
