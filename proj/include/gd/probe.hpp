#pragma once

#include <cstdint>
#include <vector>

#include "gd/matrix.hpp"

namespace gd {

struct Split {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> val;
};

Split make_split(std::size_t n, double train_fraction, std::uint64_t seed);

struct ProbeReport {
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    std::uint32_t epochs = 0;
    double final_loss = 0.0;
};

// Multinomial logistic regression on frozen features by full-batch
// gradient descent from zero weights. Only the train rows' labels are read
// during fitting.
ProbeReport train_linear_probe(const Matrix& features, const std::vector<std::uint32_t>& labels,
                               const Split& split, std::uint32_t epochs, double lr);

// Cosine k-NN vote from train rows onto val rows; ties broken by ascending
// label index. Returns validation accuracy.
double knn_eval(const Matrix& features, const std::vector<std::uint32_t>& labels,
                const Split& split, std::uint32_t k_eval);

}  // namespace gd
