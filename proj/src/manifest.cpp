#include "hsmae/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace hsmae {

using nlohmann::json;

std::vector<const ManifestRecord*> DatasetManifest::split_records(Split s) const {
    std::vector<const ManifestRecord*> out;
    for (const auto& r : records)
        if (r.split == s) out.push_back(&r);
    return out;
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw Error(ErrorCode::ConfigError, "unknown split '" + s + "'");
}

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

DatasetManifest parse_manifest(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("manifest is not valid JSON: ") + e.what());
    }
    DatasetManifest m;
    try {
        if (j.contains("label_names")) m.label_names = j["label_names"].get<std::vector<std::string>>();
        for (const auto& rj : j.at("records")) {
            ManifestRecord r;
            r.cube_path = rj.at("cube_path").get<std::string>();
            r.split = split_from_string(rj.at("split").get<std::string>());
            if (rj.contains("labels") && !rj["labels"].is_null()) {
                r.labels = rj["labels"].get<std::vector<int>>();
                for (int id : *r.labels)
                    if (id < 0 || id >= static_cast<int>(m.label_names.size()))
                        throw Error(ErrorCode::ConfigError,
                                    "label id " + std::to_string(id) + " out of range for " + r.cube_path);
            }
            m.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("manifest schema error: ") + e.what());
    }
    return m;
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_manifest(ss.str());
}

std::string manifest_to_json(const DatasetManifest& m) {
    json j;
    j["label_names"] = m.label_names;
    j["records"] = json::array();
    for (const auto& r : m.records) {
        json rj;
        rj["cube_path"] = r.cube_path;
        rj["split"] = split_name(r.split);
        if (r.labels) rj["labels"] = *r.labels;
        else rj["labels"] = nullptr;
        j["records"].push_back(std::move(rj));
    }
    return j.dump(2);
}

DatasetManifest subsample_manifest(const DatasetManifest& m, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw Error(ErrorCode::ConfigError, "subsample fraction must be in (0,1]");
    DatasetManifest out;
    out.label_names = m.label_names;
    Rng rng(seed);
    // stratify by (split, first label) so rare labels survive small fractions
    std::map<std::pair<int, int>, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        const auto& r = m.records[i];
        if (r.split == Split::test) {
            out.records.push_back(r);
            continue;
        }
        int first_label = r.labels && !r.labels->empty() ? r.labels->front() : -1;
        buckets[{static_cast<int>(r.split), first_label}].push_back(i);
    }
    for (auto& [key, idxs] : buckets) {
        std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(idxs.size() * fraction));
        // partial Fisher-Yates
        for (std::size_t i = 0; i < keep; ++i) {
            std::size_t j = i + rng.uniform_index(idxs.size() - i);
            std::swap(idxs[i], idxs[j]);
        }
        idxs.resize(keep);
        std::sort(idxs.begin(), idxs.end());
        for (std::size_t i : idxs) out.records.push_back(m.records[i]);
    }
    return out;
}

}  // namespace hsmae
