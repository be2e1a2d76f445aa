#pragma once

#include <map>
#include <string>
#include <vector>

#include "hsmae/errors.hpp"

namespace hsmae {

// Flat named-tensor registry. The optimizer, checkpoint I/O, and the
// finite-difference harness all iterate entries generically; the model
// addresses tensors by cached index.
template <typename T>
struct TensorStore {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<T> data;
        bool decay = false;  // weight-decay eligible
    };

    std::vector<Entry> entries;
    std::map<std::string, std::size_t> by_name;

    std::size_t add(std::string name, std::vector<int> shape, bool decay) {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        Entry e;
        e.name = std::move(name);
        e.shape = std::move(shape);
        e.data.assign(n, T(0));
        e.decay = decay;
        if (by_name.count(e.name)) throw Error(ErrorCode::ConfigError, "duplicate tensor " + e.name);
        by_name[e.name] = entries.size();
        entries.push_back(std::move(e));
        return entries.size() - 1;
    }

    Entry& at(std::size_t idx) { return entries[idx]; }
    const Entry& at(std::size_t idx) const { return entries[idx]; }

    T* data(std::size_t idx) { return entries[idx].data.data(); }
    const T* data(std::size_t idx) const { return entries[idx].data.data(); }

    // Same names/shapes, zero-filled. Used for gradients and moments.
    TensorStore zeros_like() const {
        TensorStore out;
        out.by_name = by_name;
        out.entries.reserve(entries.size());
        for (const auto& e : entries) {
            Entry z;
            z.name = e.name;
            z.shape = e.shape;
            z.data.assign(e.data.size(), T(0));
            z.decay = e.decay;
            out.entries.push_back(std::move(z));
        }
        return out;
    }

    void fill_zero() {
        for (auto& e : entries) std::fill(e.data.begin(), e.data.end(), T(0));
    }

    template <typename U>
    TensorStore<U> cast() const {
        TensorStore<U> out;
        out.by_name = by_name;
        for (const auto& e : entries) {
            typename TensorStore<U>::Entry z;
            z.name = e.name;
            z.shape = e.shape;
            z.decay = e.decay;
            z.data.resize(e.data.size());
            for (std::size_t i = 0; i < e.data.size(); ++i) z.data[i] = static_cast<U>(e.data[i]);
            out.entries.push_back(std::move(z));
        }
        return out;
    }
};

}  // namespace hsmae
