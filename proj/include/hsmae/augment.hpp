#pragma once

#include <vector>

#include "hsmae/cube.hpp"
#include "hsmae/rng.hpp"

namespace hsmae {

struct LabeledSample {
    SpectralCube cube;
    std::vector<float> labels;  // soft multi-hot
};

SpectralCube flip_h(const SpectralCube& cube);  // mirrors columns
SpectralCube flip_v(const SpectralCube& cube);  // mirrors rows

// Area fraction in [scale_lo, scale_hi], aspect ratio log-uniform in
// [3/4, 4/3], uniform placement, bilinear resize to out_hw x out_hw applied
// per channel. Falls back to a centered min(H,W) square when no aspect fits.
SpectralCube random_resized_crop(const SpectralCube& cube, int out_hw, double scale_lo,
                                 double scale_hi, Rng& rng);

SpectralCube resize_bilinear(const SpectralCube& cube, int out_h, int out_w);

// lam*A + (1-lam)*B on both pixels and labels, lam ~ Beta(alpha, alpha).
LabeledSample mixup(const LabeledSample& a, const LabeledSample& b, double alpha, Rng& rng);
LabeledSample mixup_with_lambda(const LabeledSample& a, const LabeledSample& b, double lam);

// Pastes a rectangle of B into A across all channels; labels mixed by the
// realized kept-area fraction.
LabeledSample cutmix(const LabeledSample& a, const LabeledSample& b, double alpha, Rng& rng);

}  // namespace hsmae
