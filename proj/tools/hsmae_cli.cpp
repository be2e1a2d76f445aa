// Command-line driver over the shared-library C API.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsmae.h"

namespace {

int exit_code_for(hsmae_status st) {
    switch (st) {
        case HSMAE_OK: return 0;
        case HSMAE_ERR_INVALID:
        case HSMAE_ERR_IO: return 2;
        default: return 1;
    }
}

int report(hsmae_status st) {
    if (st != HSMAE_OK) std::cerr << "error: " << hsmae_last_error() << "\n";
    return exit_code_for(st);
}

// Applies --seed / --out overrides by rewriting the config to a temp file, so
// the run still logs one canonical resolved config.
std::string apply_overrides(const std::string& config_path, const std::int64_t* seed,
                            const std::string* out_dir) {
    if (!seed && !out_dir) return config_path;
    std::ifstream f(config_path);
    if (!f) return config_path;  // let the library produce the error
    nlohmann::json j;
    try {
        std::stringstream ss;
        ss << f.rdbuf();
        j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception&) {
        return config_path;
    }
    if (seed) j["seed"] = *seed;
    if (out_dir) j["out_dir"] = *out_dir;
    std::string tmp = config_path + ".resolved.json";
    std::ofstream o(tmp);
    o << j.dump(2) << "\n";
    return tmp;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperspectral masked-autoencoder pipeline"};
    app.require_subcommand(1);

    std::string config_path, hdr_path, raw_path, out_path, catalog_path, checkpoint_path, cube_path;
    std::int64_t seed = 0;
    bool seed_set = false, json_output = false, deterministic = true;
    double default_bandwidth = 0.0, r_spatial = 0.75, r_channel = 0.75;
    std::string out_dir;
    bool out_dir_set = false;

    auto add_run = [&](const char* name, const char* desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->add_option("config", config_path, "JSON config file")->required();
        cmd->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--out-dir", out_dir, "override the output directory")
            ->each([&](const std::string&) { out_dir_set = true; });
        cmd->add_flag("--deterministic,!--no-deterministic", deterministic,
                      "single-worker deterministic execution (default on)");
        return cmd;
    };
    CLI::App* cmd_pretrain = add_run("pretrain", "self-supervised MAE pretraining");
    CLI::App* cmd_finetune = add_run("finetune", "multi-label finetuning from a checkpoint");
    CLI::App* cmd_eval = add_run("eval", "evaluate a finetuned checkpoint");

    CLI::App* cmd_inspect = app.add_subcommand("inspect-header", "summarize an ENVI .hdr file");
    cmd_inspect->add_option("path", hdr_path, "header file")->required();
    cmd_inspect->add_flag("--json", json_output, "machine-readable output");

    CLI::App* cmd_stratify =
        app.add_subcommand("stratify", "one tile per (lat, lon, season, biome) stratum");
    cmd_stratify->add_option("catalog", catalog_path, "catalog JSON file")->required();
    cmd_stratify->add_option("--seed", seed, "sampling seed");

    CLI::App* cmd_reconstruct = app.add_subcommand("reconstruct", "dump masked reconstructions");
    cmd_reconstruct->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
    cmd_reconstruct->add_option("cube", cube_path, "native .hsc cube")->required();
    cmd_reconstruct->add_option("--r-spatial", r_spatial, "spatial mask ratio");
    cmd_reconstruct->add_option("--r-channel", r_channel, "channel mask ratio");
    cmd_reconstruct->add_option("--seed", seed, "mask seed");
    cmd_reconstruct->add_option("--out", out_path, "output directory")->required();

    CLI::App* cmd_convert = app.add_subcommand("convert", "ENVI pair to native .hsc");
    cmd_convert->add_option("header", hdr_path, "ENVI .hdr file")->required();
    cmd_convert->add_option("raw", raw_path, "ENVI raw binary file")->required();
    cmd_convert->add_option("output", out_path, "output .hsc path")->required();
    cmd_convert->add_option("--default-bandwidth", default_bandwidth,
                            "bandwidth (nm) when the header lacks fwhm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (cmd_pretrain->parsed() || cmd_finetune->parsed() || cmd_eval->parsed()) {
        std::string path = apply_overrides(config_path, seed_set ? &seed : nullptr,
                                           out_dir_set ? &out_dir : nullptr);
        hsmae_status st;
        if (cmd_pretrain->parsed()) st = hsmae_run_pretrain(path.c_str());
        else if (cmd_finetune->parsed()) st = hsmae_run_finetune(path.c_str());
        else st = hsmae_run_eval(path.c_str());
        return report(st);
    }

    if (cmd_inspect->parsed()) {
        char* json_text = nullptr;
        hsmae_status st = hsmae_envi_header_to_json(hdr_path.c_str(), &json_text);
        if (st != HSMAE_OK) return report(st);
        if (json_output) {
            std::cout << json_text << "\n";
        } else {
            auto j = nlohmann::json::parse(json_text);
            std::cout << "samples: " << j["samples"].get<int>() << "\n"
                      << "lines: " << j["lines"].get<int>() << "\n"
                      << "bands: " << j["bands"].get<int>() << "\n"
                      << "interleave: " << j["interleave"].get<std::string>() << "\n"
                      << "data type: " << j["data_type"].get<int>() << "\n"
                      << "byte order: " << j["byte_order"].get<std::string>() << "\n"
                      << "wavelength: " << (j["has_wavelength"].get<bool>() ? "yes" : "no") << "\n"
                      << "fwhm: " << (j["has_fwhm"].get<bool>() ? "yes" : "no") << "\n";
        }
        hsmae_string_free(json_text);
        return 0;
    }

    if (cmd_stratify->parsed()) {
        char* ids = nullptr;
        hsmae_status st = hsmae_stratify(catalog_path.c_str(), static_cast<uint64_t>(seed), &ids);
        if (st != HSMAE_OK) return report(st);
        std::cout << ids;
        hsmae_string_free(ids);
        return 0;
    }

    if (cmd_reconstruct->parsed()) {
        return report(hsmae_run_reconstruct(checkpoint_path.c_str(), cube_path.c_str(), r_spatial,
                                            r_channel, static_cast<uint64_t>(seed),
                                            out_path.c_str()));
    }

    if (cmd_convert->parsed()) {
        hsmae_cube* cube = nullptr;
        hsmae_status st =
            hsmae_cube_read_envi(hdr_path.c_str(), raw_path.c_str(), default_bandwidth, &cube);
        if (st != HSMAE_OK) return report(st);
        st = hsmae_cube_write_native(cube, out_path.c_str());
        hsmae_cube_free(cube);
        return report(st);
    }
    return 2;
}
