#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gd/autodiff.hpp"
#include "gd/knn_graph.hpp"
#include "gd/optim.hpp"
#include "gd/pretrain.hpp"
#include "gd/rng.hpp"

namespace gd {

enum class GnnLayerKind { GCN, GAT, SAGE, GIN };
enum class JkMode { Disabled, Sum, Max, Concat };

struct GnnStack {
    GnnLayerKind kind = GnnLayerKind::GCN;
    std::uint32_t depth = 3;
    std::size_t hidden = 64;
    Activation act = Activation::Relu;
    JkMode jk = JkMode::Concat;

    void validate() const;
    std::size_t output_width(std::size_t) const;
};

struct RefineConfig {
    std::uint32_t epochs = 1000;
    double lr = 1e-4;
    double momentum = 0.99;
    double ema_momentum = 0.99;
    std::uint64_t seed = 1;
    bool symmetrize = false;

    void validate() const;
};

// Fixed linear operators derived from one graph, shared by every layer.
//   gcn_norm: D^-1/2 (A_sym + I) D^-1/2 over the unweighted symmetrized
//             adjacency
//   mean_agg: row-normalized out-neighbor adjacency (self for isolated
//             nodes)
//   sum_agg:  0/1 out-neighbor adjacency
//   attention_edges: out-edges plus a self edge per node, sorted
struct GraphOperators {
    SparseMatrix gcn_norm;
    SparseMatrix mean_agg;
    SparseMatrix sum_agg;
    EdgeEndpoints attention_edges;
};

GraphOperators build_operators(const KnnGraph& graph);

// Parameter shapes per layer l (prefix "l<l>."):
//   GCN  W            GAT  W, a_src, a_dst
//   SAGE W (2*in x out)
//   GIN  eps, W1, b1, W2, b2
ParamSet init_gnn(const GnnStack& stack, std::size_t in_dim, SeededRng& rng);

std::size_t layer_param_count(GnnLayerKind kind);

Var gnn_layer_forward_tape(Tape& tape, GnnLayerKind kind, const std::vector<Var>& params,
                           std::size_t param_offset, const GraphOperators& ops, Var h,
                           Activation act);

// Single-layer forward as a plain value function; params must hold exactly
// one layer's parameters.
Matrix gnn_layer_forward(GnnLayerKind kind, const ParamSet& params, const KnnGraph& graph,
                         const Matrix& h, Activation act = Activation::Relu);

Var gnn_stack_forward_tape(Tape& tape, const GnnStack& stack, const std::vector<Var>& params,
                           const GraphOperators& ops, Var features);

Matrix gnn_stack_apply(const GnnStack& stack, const ParamSet& params, const GraphOperators& ops,
                       const Matrix& features);

Matrix jk_combine(const std::vector<Matrix>& layer_outputs, JkMode mode);

// mean over rows of 2 - 2 cos(student_i, teacher_i)
double refine_loss(const Matrix& student_out, const Matrix& teacher_out, bool symmetrize);

struct RefinedEmbeddings {
    Matrix values;
    std::string source_stream = "student";
    std::vector<double> loss_curve;
};

// BGRL-style alignment: the student GNN trains on the student graph and
// features, the teacher GNN tracks it by EMA on the teacher graph, and the
// student's Jumping Knowledge output is returned.
RefinedEmbeddings run_refine(const TrainArtifacts& artifacts, const GnnStack& stack,
                             const RefineConfig& cfg);

}  // namespace gd
