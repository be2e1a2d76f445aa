#pragma once

#include <string>

namespace hsmae {

// JSON-config-driven entry points behind the CLI subcommands. Each run writes
// its fully resolved configuration next to its outputs. Schemas are
// documented in the README.
void run_pretrain(const std::string& config_path);
void run_finetune(const std::string& config_path);
void run_eval(const std::string& config_path);
void run_reconstruct(const std::string& checkpoint_path, const std::string& cube_path,
                     double r_spatial, double r_channel, std::uint64_t seed,
                     const std::string& out_dir);

}  // namespace hsmae
