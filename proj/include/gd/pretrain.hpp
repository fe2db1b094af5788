#pragma once

#include <cstdint>
#include <vector>

#include "gd/dataset.hpp"
#include "gd/knn_graph.hpp"
#include "gd/matrix.hpp"
#include "gd/mlp.hpp"
#include "gd/neighbor_store.hpp"

namespace gd {

struct EncoderSpec {
    std::vector<std::size_t> widths;  // input dim ... embed dim
    Activation act = Activation::Tanh;
};

struct DistillHeadConfig {
    std::vector<std::size_t> projector_widths = {64, 128, 128, 256};  // 3-layer MLP
    double student_temp = 0.1;
    double teacher_temp = 0.04;

    void validate() const;  // teacher_temp < student_temp, both > 0
};

struct PretrainConfig {
    std::uint32_t epochs = 30;
    std::uint32_t batch_size = 32;
    double lr = 0.06;
    double momentum = 0.9;
    double ema_momentum = 0.99;
    NeighborConfig neighbor;
    AugmentPolicy augment{0.5, 0.2, 0.2};
    std::uint64_t seed = 1;
    EncoderSpec encoder{{32, 64, 64}, Activation::Tanh};
    DistillHeadConfig head;

    void validate() const;
};

struct TrainArtifacts {
    Matrix teacher_embeddings;  // clean full-dataset pass, final epoch
    Matrix student_embeddings;
    KnnGraph teacher_graph;
    KnnGraph student_graph;
    CircularEdgeStore teacher_store;
    CircularEdgeStore student_store;
    std::vector<double> loss_curve;  // per epoch
    std::vector<double> mode_log;    // per-epoch fraction of neighbor-mode picks
};

// subtract the column-wise batch mean
Matrix center_logits(const Matrix& logits);
// row softmax at temperature
Matrix sharpen(const Matrix& logits, double temperature);
Matrix center_and_sharpen(const Matrix& teacher_logits, double teacher_temp);

// mean over rows of -t_i . log s_i; rows must be distributions
double distill_loss(const Matrix& teacher_probs, const Matrix& student_probs);

std::vector<double> select_teacher_input(std::size_t sample_index,
                                         const std::vector<double>& view_b,
                                         TeacherInputMode mode,
                                         const SimilarityDistribution& dist,
                                         const Matrix& features, SeededRng& rng);

// Per-sample stability flags: sample i is mature when its current embedding
// is closer to its own previous-epoch embedding than to any other sample's
// (ties broken by ascending index, so i itself wins exact ties).
std::vector<std::uint8_t> maturity_flags(const Matrix& current, const Matrix& previous);

// Two-view self-distillation over the feature rows. Per epoch the teacher
// and student embeddings of a clean pass feed top-e scans pushed into the
// two circular stores; the final stores are materialized as graphs.
TrainArtifacts run_pretrain(const Matrix& features, const PretrainConfig& cfg);

}  // namespace gd
