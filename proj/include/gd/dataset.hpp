#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gd/matrix.hpp"
#include "gd/rng.hpp"

namespace gd {

// Features plus per-row class labels. Labels are consumed by evaluation
// only; training code paths accept the features matrix alone.
struct LabeledDataset {
    Matrix features;
    std::vector<std::uint32_t> labels;
    std::uint32_t class_count = 0;
};

struct AugmentPolicy {
    double gaussian_sigma = 0.0;
    double mask_fraction = 0.0;  // in [0, 1)
    double scale_jitter = 0.0;   // >= 0

    void validate() const;
};

// Isotropic Gaussian blobs with stddev `spread` around class_count random
// unit-norm centers; n_per_class rows per class, grouped by class.
LabeledDataset gen_clusters(std::size_t n_per_class, std::size_t class_count, std::size_t dim,
                            double spread, std::uint64_t seed);

// Applies, in order: multiplicative scale (1+u), additive Gaussian noise,
// random zero-mask of floor(mask_fraction * D) coordinates. Stages whose
// parameter is zero draw nothing from the stream.
std::vector<double> augment(std::span<const double> x, const AugmentPolicy& policy,
                            SeededRng& rng);

}  // namespace gd
