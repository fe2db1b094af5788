#include "gd/dataset.hpp"

#include <cmath>
#include <numeric>

namespace gd {

void AugmentPolicy::validate() const {
    if (!std::isfinite(gaussian_sigma) || gaussian_sigma < 0.0)
        throw BadSpec("augment policy: gaussian_sigma must be finite and >= 0");
    if (!std::isfinite(mask_fraction) || mask_fraction < 0.0 || mask_fraction >= 1.0)
        throw BadSpec("augment policy: mask_fraction must be in [0, 1)");
    if (!std::isfinite(scale_jitter) || scale_jitter < 0.0)
        throw BadSpec("augment policy: scale_jitter must be >= 0");
}

LabeledDataset gen_clusters(std::size_t n_per_class, std::size_t class_count, std::size_t dim,
                            double spread, std::uint64_t seed) {
    if (n_per_class < 1 || class_count < 1 || dim < 1)
        throw BadSpec("gen_clusters: counts must be >= 1");
    if (!std::isfinite(spread) || spread <= 0.0)
        throw BadSpec("gen_clusters: spread must be > 0");

    SeededRng rng(seed);
    Matrix centers(class_count, dim);
    for (std::size_t c = 0; c < class_count; ++c) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            centers(c, j) = rng.normal();
            n2 += centers(c, j) * centers(c, j);
        }
        double n = std::sqrt(n2);
        if (n == 0.0) n = 1.0;
        for (std::size_t j = 0; j < dim; ++j) centers(c, j) /= n;
    }

    const std::size_t n = n_per_class * class_count;
    LabeledDataset ds;
    ds.features = Matrix(n, dim);
    ds.labels.resize(n);
    ds.class_count = static_cast<std::uint32_t>(class_count);
    std::size_t row = 0;
    for (std::size_t c = 0; c < class_count; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
            ds.labels[row] = static_cast<std::uint32_t>(c);
            for (std::size_t j = 0; j < dim; ++j)
                ds.features(row, j) = centers(c, j) + spread * rng.normal();
        }
    }
    return ds;
}

std::vector<double> augment(std::span<const double> x, const AugmentPolicy& policy,
                            SeededRng& rng) {
    policy.validate();
    std::vector<double> y(x.begin(), x.end());
    const std::size_t d = y.size();

    if (policy.scale_jitter > 0.0) {
        double u = rng.uniform(-policy.scale_jitter, policy.scale_jitter);
        for (double& v : y) v *= 1.0 + u;
    }
    if (policy.gaussian_sigma > 0.0) {
        for (double& v : y) v += policy.gaussian_sigma * rng.normal();
    }
    const std::size_t mask_count =
        static_cast<std::size_t>(policy.mask_fraction * static_cast<double>(d));
    if (mask_count > 0) {
        // partial Fisher-Yates picks mask_count distinct coordinates
        std::vector<std::size_t> idx(d);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t t = 0; t < mask_count; ++t) {
            std::size_t j = t + static_cast<std::size_t>(rng.below(d - t));
            std::swap(idx[t], idx[j]);
            y[idx[t]] = 0.0;
        }
    }
    return y;
}

}  // namespace gd
