#pragma once

#include <cstdint>
#include <string>

#include "gd/dataset.hpp"
#include "gd/gnn.hpp"
#include "gd/pretrain.hpp"

namespace gd {

enum class ProbeInput { Refined, Student, Teacher, Raw };

// Everything the pipeline stages need, parsed from a line-oriented
// "section.key = value" file. Unknown keys are rejected; absent keys take
// the documented defaults.
struct PipelineConfig {
    // data
    std::size_t data_n_per_class = 100;
    std::size_t data_class_count = 5;
    std::size_t data_dim = 32;
    double data_spread = 0.42;

    // pretrain
    std::uint32_t pretrain_epochs = 30;
    std::uint32_t pretrain_batch_size = 32;
    double pretrain_lr = 0.06;
    double pretrain_momentum = 0.9;
    double pretrain_ema_momentum = 0.99;
    double student_temp = 0.1;
    double teacher_temp = 0.04;
    std::size_t hidden_dim = 64;
    std::size_t embed_dim = 64;
    Activation activation = Activation::Tanh;

    // neighbor tracking; e == 0 means "auto", resolved to 4*k
    std::uint32_t neighbor_e = 0;
    std::uint32_t neighbor_k = 1;
    std::uint32_t neighbor_w = 15;

    AugmentPolicy augment_policy{0.5, 0.2, 0.2};

    // gnn refinement
    GnnLayerKind gnn_layer = GnnLayerKind::GCN;
    std::uint32_t gnn_depth = 3;
    std::size_t gnn_hidden = 64;
    JkMode gnn_jk = JkMode::Concat;
    std::uint32_t refine_epochs = 1000;
    double refine_lr = 1e-4;
    double refine_momentum = 0.99;
    double refine_ema_momentum = 0.99;
    bool refine_symmetrize = false;

    // probe
    std::uint32_t probe_epochs = 500;
    double probe_lr = 0.1;
    double probe_train_fraction = 0.8;
    ProbeInput probe_input = ProbeInput::Refined;

    // run
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    std::uint32_t resolved_e() const { return neighbor_e == 0 ? 4 * neighbor_k : neighbor_e; }
    NeighborConfig neighbor_config() const;
    PretrainConfig pretrain_config() const;
    GnnStack gnn_stack() const;
    RefineConfig refine_config() const;

    void validate() const;  // cross-field consistency
};

PipelineConfig parse_config(const std::string& path);
PipelineConfig parse_config_text(const std::string& text);

std::string to_string(GnnLayerKind kind);
std::string to_string(JkMode mode);

}  // namespace gd
