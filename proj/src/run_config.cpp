#include "hsmae/run_config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hsmae/evaluate.hpp"
#include "hsmae/native_io.hpp"
#include "hsmae/train.hpp"

namespace hsmae {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string(key) + ": " + e.what());
    }
}

MaeConfig model_from_json(const json& j, int grid_hw) {
    MaeConfig m;
    m.grid_h = m.grid_w = grid_hw;
    if (j.is_null()) return m;
    m.embed_dim = get_or(j, "embed_dim", m.embed_dim);
    m.enc_depth = get_or(j, "enc_depth", m.enc_depth);
    m.enc_heads = get_or(j, "enc_heads", m.enc_heads);
    m.dec_dim = get_or(j, "dec_dim", m.dec_dim);
    m.dec_depth = get_or(j, "dec_depth", m.dec_depth);
    m.dec_heads = get_or(j, "dec_heads", m.dec_heads);
    m.mlp_ratio = get_or(j, "mlp_ratio", m.mlp_ratio);
    m.grid_h = get_or(j, "grid_h", m.grid_h);
    m.grid_w = get_or(j, "grid_w", m.grid_w);
    m.normalize_targets = get_or(j, "normalize_targets", m.normalize_targets);
    m.check();
    return m;
}

json model_to_json(const MaeConfig& m) {
    return {{"embed_dim", m.embed_dim}, {"enc_depth", m.enc_depth}, {"enc_heads", m.enc_heads},
            {"dec_dim", m.dec_dim},     {"dec_depth", m.dec_depth}, {"dec_heads", m.dec_heads},
            {"mlp_ratio", m.mlp_ratio}, {"grid_h", m.grid_h},       {"grid_w", m.grid_w},
            {"normalize_targets", m.normalize_targets}};
}

void write_resolved(const std::string& out_dir, const json& resolved) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "config.json");
    f << resolved.dump(2) << "\n";
}

}  // namespace

void run_pretrain(const std::string& config_path) {
    json j = load_json(config_path);
    PretrainConfig cfg;
    std::string manifest_path = j.at("manifest").get<std::string>();
    cfg.out_dir = get_or<std::string>(j, "out_dir", "");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.epochs = get_or(j, "epochs", 100);
    cfg.batch_size = get_or(j, "batch_size", 1);
    cfg.channels_m = get_or(j, "channels_m", 100);
    cfg.variable_m = get_or(j, "variable_m", false);
    cfg.m_lo = get_or(j, "m_lo", cfg.m_lo);
    cfg.m_hi = get_or(j, "m_hi", cfg.m_hi);
    cfg.crop_hw = get_or(j, "crop", 224);
    if (j.contains("scale")) {
        auto s = j.at("scale").get<std::vector<double>>();
        if (s.size() != 2) throw Error(ErrorCode::ConfigError, "scale must be [lo, hi]");
        cfg.scale_lo = s[0];
        cfg.scale_hi = s[1];
    }
    cfg.r_spatial = get_or(j, "r_spatial", 0.75);
    cfg.r_channel = get_or(j, "r_channel", 0.75);
    cfg.variable_r_channel = get_or(j, "variable_r_channel", false);
    if (j.contains("r_channel_range")) {
        auto r = j.at("r_channel_range").get<std::vector<double>>();
        if (r.size() != 2) throw Error(ErrorCode::ConfigError, "r_channel_range must be [lo, hi]");
        cfg.r_channel_lo = r[0];
        cfg.r_channel_hi = r[1];
    }
    cfg.model = model_from_json(j.contains("model") ? j["model"] : json(nullptr),
                                cfg.crop_hw / kPatchSize);

    json oj = j.contains("optim") ? j["optim"] : json::object();
    cfg.schedule.base_lr = get_or(oj, "base_lr", cfg.schedule.base_lr);
    cfg.schedule.min_lr = get_or(oj, "min_lr", cfg.schedule.min_lr);
    cfg.schedule.warmup_epochs = get_or(oj, "warmup_epochs", cfg.schedule.warmup_epochs);
    cfg.schedule.restart_period = get_or(oj, "restart_period", cfg.schedule.restart_period);
    cfg.schedule.total_epochs = get_or(oj, "total_epochs", static_cast<double>(cfg.epochs));
    std::string mode = get_or<std::string>(oj, "mode", "warm_restarts");
    if (mode == "warm_restarts") cfg.schedule.mode = ScheduleMode::warm_restarts;
    else if (mode == "single_cosine") cfg.schedule.mode = ScheduleMode::single_cosine;
    else throw Error(ErrorCode::ConfigError, "optim.mode must be warm_restarts or single_cosine");
    cfg.adamw.beta1 = get_or(oj, "beta1", cfg.adamw.beta1);
    cfg.adamw.beta2 = get_or(oj, "beta2", cfg.adamw.beta2);
    cfg.adamw.eps = get_or(oj, "eps", cfg.adamw.eps);
    cfg.adamw.weight_decay = get_or(oj, "weight_decay", cfg.adamw.weight_decay);

    json resolved = j;
    resolved["model"] = model_to_json(cfg.model);
    resolved["crop"] = cfg.crop_hw;
    resolved["epochs"] = cfg.epochs;
    resolved["seed"] = cfg.seed;
    write_resolved(cfg.out_dir, resolved);

    DatasetManifest manifest = load_manifest(manifest_path);
    pretrain(manifest, cfg);
}

void run_finetune(const std::string& config_path) {
    json j = load_json(config_path);
    std::string manifest_path = j.at("manifest").get<std::string>();
    std::string checkpoint_path = j.at("checkpoint").get<std::string>();
    FinetuneConfig cfg;
    cfg.out_dir = get_or<std::string>(j, "out_dir", "");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.epochs = get_or(j, "epochs", 100);
    cfg.channels_m = get_or(j, "channels_m", 50);
    cfg.batch_size = get_or(j, "batch_size", 1);
    cfg.lr = get_or(j, "lr", cfg.lr);
    cfg.min_lr = get_or(j, "min_lr", cfg.min_lr);
    cfg.flip_prob = get_or(j, "flip_prob", cfg.flip_prob);
    cfg.mix_prob = get_or(j, "mix_prob", cfg.mix_prob);
    cfg.mixup_alpha = get_or(j, "mixup_alpha", cfg.mixup_alpha);
    cfg.cutmix_alpha = get_or(j, "cutmix_alpha", cfg.cutmix_alpha);
    cfg.linear_probe = get_or(j, "linear_probe", false);
    cfg.adamw.weight_decay = get_or(j, "weight_decay", cfg.adamw.weight_decay);

    DatasetManifest manifest = load_manifest(manifest_path);
    if (j.contains("subsample_fraction"))
        manifest = subsample_manifest(manifest, j["subsample_fraction"].get<double>(), cfg.seed);

    write_resolved(cfg.out_dir, j);
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    finetune(ckpt.params, manifest, cfg);
}

void run_eval(const std::string& config_path) {
    json j = load_json(config_path);
    std::string manifest_path = j.at("manifest").get<std::string>();
    std::string checkpoint_path = j.at("checkpoint").get<std::string>();
    Split split = split_from_string(get_or<std::string>(j, "split", "test"));
    int channels_m = get_or(j, "channels_m", 50);
    double threshold = get_or(j, "threshold", 0.5);

    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    DatasetManifest manifest = load_manifest(manifest_path);
    EvalReport rep = evaluate_manifest(ckpt.params, manifest, split, channels_m, threshold);
    std::string out = eval_report_to_json(rep);
    if (j.contains("out")) {
        std::ofstream f(j["out"].get<std::string>());
        if (!f) throw Error(ErrorCode::IoError, "cannot write report");
        f << out << "\n";
    }
    std::printf("%s\n", out.c_str());
}

void run_reconstruct(const std::string& checkpoint_path, const std::string& cube_path,
                     double r_spatial, double r_channel, std::uint64_t seed,
                     const std::string& out_dir) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    SpectralCube cube = read_native_file(cube_path);
    const MaeConfig& mc = ckpt.params.cfg;
    PatchGrid grid;
    grid.grid_h = mc.grid_h;
    grid.grid_w = mc.grid_w;
    grid.channels = cube.channel_count();
    grid.patch = mc.patch;
    Rng rng(seed);
    MaskPlan plan = make_mask(grid, r_spatial, r_channel, rng);
    reconstruct_dump(ckpt.params, cube, plan, out_dir);
}

}  // namespace hsmae
