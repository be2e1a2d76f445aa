#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsmae/errors.hpp"
#include "hsmae/rng.hpp"

namespace hsmae {

enum class Split { train, val, test };

struct ManifestRecord {
    std::string cube_path;
    std::optional<std::vector<int>> labels;  // indices into label_names
    Split split = Split::train;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;
    std::vector<std::string> label_names;

    std::vector<const ManifestRecord*> split_records(Split s) const;
};

Split split_from_string(const std::string& s);
const char* split_name(Split s);

DatasetManifest parse_manifest(const std::string& json_text);
DatasetManifest load_manifest(const std::string& path);
std::string manifest_to_json(const DatasetManifest& m);

// Deterministic stratified-by-label subsample of the train and val splits
// (BigEarthNet-style few-percent finetuning). Test records are kept whole.
DatasetManifest subsample_manifest(const DatasetManifest& m, double fraction, std::uint64_t seed);

}  // namespace hsmae
