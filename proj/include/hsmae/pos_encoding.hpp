#pragma once

#include "hsmae/cube.hpp"

namespace hsmae {

// Wavelength and bandwidth are normalized by the sensor envelope before the
// affine spectral layers: 2500 nm and 250 nm map to exactly 1.0.
inline constexpr double kLambdaScale = 1.0 / 2500.0;
inline constexpr double kBandScale = 1.0 / 250.0;

// Spectral embedding: concat of two half-width affine maps of the scaled
// wavelength and bandwidth. out has length 2*half_dim.
template <typename T>
void spectral_embedding(const ChannelMeta& meta, const T* w_lambda, const T* b_lambda,
                        const T* w_band, const T* b_band, int half_dim, T* out) {
    const double ls = meta.wavelength_nm * kLambdaScale;
    const double bs = meta.bandwidth_nm * kBandScale;
    for (int i = 0; i < half_dim; ++i)
        out[i] = static_cast<T>(static_cast<double>(w_lambda[i]) * ls + static_cast<double>(b_lambda[i]));
    for (int i = 0; i < half_dim; ++i)
        out[half_dim + i] =
            static_cast<T>(static_cast<double>(w_band[i]) * bs + static_cast<double>(b_band[i]));
}

template <typename T>
void spectral_embedding_backward(const ChannelMeta& meta, const T* d_out, int half_dim,
                                 T* d_w_lambda, T* d_b_lambda, T* d_w_band, T* d_b_band) {
    const double ls = meta.wavelength_nm * kLambdaScale;
    const double bs = meta.bandwidth_nm * kBandScale;
    for (int i = 0; i < half_dim; ++i) {
        d_w_lambda[i] += static_cast<T>(static_cast<double>(d_out[i]) * ls);
        d_b_lambda[i] += d_out[i];
    }
    for (int i = 0; i < half_dim; ++i) {
        d_w_band[i] += static_cast<T>(static_cast<double>(d_out[half_dim + i]) * bs);
        d_b_band[i] += d_out[half_dim + i];
    }
}

// Positional embedding = learned spatial table row + spectral embedding.
template <typename T>
void positional_embedding(int row, int col, int grid_w, const ChannelMeta& meta,
                          const T* spatial_table, const T* w_lambda, const T* b_lambda,
                          const T* w_band, const T* b_band, int embed_dim, T* out) {
    spectral_embedding(meta, w_lambda, b_lambda, w_band, b_band, embed_dim / 2, out);
    const T* spatial = spatial_table + static_cast<std::size_t>(row * grid_w + col) * embed_dim;
    for (int i = 0; i < embed_dim; ++i) out[i] += spatial[i];
}

}  // namespace hsmae
