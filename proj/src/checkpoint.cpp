#include "hsmae/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace hsmae {

using nlohmann::json;

namespace {

json config_to_json(const MaeConfig& c) {
    return {{"embed_dim", c.embed_dim}, {"enc_depth", c.enc_depth}, {"enc_heads", c.enc_heads},
            {"dec_dim", c.dec_dim},     {"dec_depth", c.dec_depth}, {"dec_heads", c.dec_heads},
            {"mlp_ratio", c.mlp_ratio}, {"grid_h", c.grid_h},       {"grid_w", c.grid_w},
            {"patch", c.patch},         {"normalize_targets", c.normalize_targets}};
}

MaeConfig config_from_json(const json& j) {
    MaeConfig c;
    c.embed_dim = j.at("embed_dim").get<int>();
    c.enc_depth = j.at("enc_depth").get<int>();
    c.enc_heads = j.at("enc_heads").get<int>();
    c.dec_dim = j.at("dec_dim").get<int>();
    c.dec_depth = j.at("dec_depth").get<int>();
    c.dec_heads = j.at("dec_heads").get<int>();
    c.mlp_ratio = j.at("mlp_ratio").get<double>();
    c.grid_h = j.at("grid_h").get<int>();
    c.grid_w = j.at("grid_w").get<int>();
    c.patch = j.at("patch").get<int>();
    c.normalize_targets = j.at("normalize_targets").get<bool>();
    return c;
}

void write_store(std::ofstream& f, const TensorStore<float>& s) {
    for (const auto& e : s.entries)
        f.write(reinterpret_cast<const char*>(e.data.data()),
                static_cast<std::streamsize>(e.data.size() * sizeof(float)));
}

void read_store(std::ifstream& f, TensorStore<float>& s) {
    for (auto& e : s.entries) {
        f.read(reinterpret_cast<char*>(e.data.data()),
               static_cast<std::streamsize>(e.data.size() * sizeof(float)));
        if (static_cast<std::size_t>(f.gcount()) != e.data.size() * sizeof(float))
            throw Error(ErrorCode::TruncatedData, "checkpoint payload ended inside " + e.name);
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const MaeParams<float>& params,
                     const AdamWState<float>* opt) {
    json h;
    h["format"] = "HSCK";
    h["version"] = 1;
    h["config"] = config_to_json(params.cfg);
    h["n_labels"] = params.n_labels;
    h["tensors"] = json::array();
    for (const auto& e : params.store.entries)
        h["tensors"].push_back({{"name", e.name}, {"shape", e.shape}, {"dtype", "f32"}});
    if (opt) {
        h["optimizer"] = {{"step", opt->step},
                          {"beta1", opt->cfg.beta1},
                          {"beta2", opt->cfg.beta2},
                          {"eps", opt->cfg.eps},
                          {"weight_decay", opt->cfg.weight_decay}};
    }
    std::string header = h.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    f.write("HSCK", 4);
    std::uint64_t len = header.size();
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    write_store(f, params.store);
    if (opt) {
        write_store(f, opt->m);
        write_store(f, opt->v);
    }
    if (!f) throw Error(ErrorCode::IoError, "checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (f.gcount() != 4 || std::memcmp(magic, "HSCK", 4) != 0)
        throw Error(ErrorCode::CorruptHeader, "not a checkpoint file");
    std::uint64_t len = 0;
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (static_cast<std::size_t>(f.gcount()) != sizeof(len) || len > (1u << 30))
        throw Error(ErrorCode::CorruptHeader, "bad header length");
    std::string header(len, '\0');
    f.read(header.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::uint64_t>(f.gcount()) != len)
        throw Error(ErrorCode::TruncatedData, "header truncated");

    json h;
    try {
        h = json::parse(header);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptHeader, std::string("checkpoint header: ") + e.what());
    }

    LoadedCheckpoint out;
    try {
        MaeConfig cfg = config_from_json(h.at("config"));
        Rng rng(0);  // structure only; data is overwritten below
        out.params = MaeParams<float>::init(cfg, rng);
        int labels = h.at("n_labels").get<int>();
        if (labels > 0) out.params.add_head(labels, rng);

        const auto& tensors = h.at("tensors");
        if (tensors.size() != out.params.store.entries.size())
            throw Error(ErrorCode::CorruptHeader, "tensor list does not match the model layout");
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            if (tensors[i].at("name").get<std::string>() != out.params.store.entries[i].name ||
                tensors[i].at("shape").get<std::vector<int>>() != out.params.store.entries[i].shape)
                throw Error(ErrorCode::CorruptHeader,
                            "tensor mismatch at " + out.params.store.entries[i].name);
        }
        read_store(f, out.params.store);
        if (h.contains("optimizer")) {
            AdamWConfig ac;
            ac.beta1 = h["optimizer"].at("beta1").get<double>();
            ac.beta2 = h["optimizer"].at("beta2").get<double>();
            ac.eps = h["optimizer"].at("eps").get<double>();
            ac.weight_decay = h["optimizer"].at("weight_decay").get<double>();
            auto st = AdamWState<float>::init(out.params.store, ac);
            st.step = h["optimizer"].at("step").get<std::int64_t>();
            read_store(f, st.m);
            read_store(f, st.v);
            out.opt = std::move(st);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptHeader, std::string("checkpoint schema: ") + e.what());
    }
    return out;
}

}  // namespace hsmae
