#pragma once

#include <cstdint>
#include <vector>

#include "gd/matrix.hpp"

namespace gd {

// Constant CSR matrix used as a fixed linear operator inside the tape
// (graph aggregation, normalized adjacency).
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_start;  // rows + 1
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    Matrix multiply(const Matrix& x) const;             // S  * X
    Matrix multiply_transposed(const Matrix& x) const;  // S^T * X
};

// Directed edge list sorted by (src, dst) with per-source segments; the
// carrier for edge-level attention.
struct EdgeEndpoints {
    std::size_t node_count = 0;
    std::vector<std::uint32_t> src;
    std::vector<std::uint32_t> dst;
    std::vector<std::size_t> seg_start;  // node_count + 1, segments by src

    std::size_t edge_count() const { return src.size(); }
};

enum class Activation { Tanh, Relu, LeakyRelu };

struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

// Reverse-mode tape over Matrix values. Forward values are computed
// eagerly as ops are recorded; backward() fills per-node gradients.
// All reductions are sequential and index-ascending.
class Tape {
public:
    Var constant(Matrix value);
    Var param(Matrix value);

    Var matmul(Var a, Var b);
    Var spmm(const SparseMatrix& s, Var x);
    Var add(Var a, Var b);
    Var subtract(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var a, double c);
    Var square(Var a);
    Var add_row_bias(Var a, Var bias);  // bias is 1 x cols
    Var activation(Var a, Activation kind, double leaky_slope = 0.2);
    Var row_softmax(Var a, double temperature);
    Var concat_cols(const std::vector<Var>& parts);
    Var elementwise_max(const std::vector<Var>& parts);
    Var gate_scale(Var x, Var eps);  // (1 + eps) * x, eps is 1x1

    // edge-level ops for attention: scores live in E x 1 column vectors
    Var edge_pair_sum(Var per_src, Var per_dst, const EdgeEndpoints& e);
    Var segment_softmax(Var edge_scores, const EdgeEndpoints& e);
    Var edge_weighted_gather(Var edge_weights, Var node_values, const EdgeEndpoints& e);

    Var sum_all(Var a);
    Var mean_all(Var a);

    // mean_i -t_i . log softmax(x_i / T); targets held constant
    Var softmax_cross_entropy_mean(Var logits, Matrix target_probs, double temperature);
    // mean_i (2 - 2 cos(pred_i, target_i)); targets held constant
    Var cosine_alignment_mean(Var pred, Matrix target);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    void backward(Var scalar_loss);
    const Matrix& grad(Var v) const;
    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : std::uint8_t {
        Constant, Param, MatMul, Spmm, Add, Subtract, Hadamard, Scale, Square,
        AddRowBias, Activation_, RowSoftmax, ConcatCols, ElementwiseMax,
        GateScale, EdgePairSum, SegmentSoftmax, EdgeWeightedGather,
        SumAll, MeanAll, SoftmaxCrossEntropyMean, CosineAlignmentMean,
    };

    struct Node {
        Op op;
        Matrix value;
        std::vector<std::size_t> inputs;
        double aux = 0.0;
        Activation act = Activation::Tanh;
        const SparseMatrix* sparse = nullptr;
        const EdgeEndpoints* edges = nullptr;
        Matrix target;  // constant operand of loss ops
        bool needs_grad = false;
    };

    Var push(Node n);
    bool any_needs_grad(const std::vector<std::size_t>& ids) const;
    void accumulate(std::size_t id, const Matrix& g);

    std::vector<Node> nodes_;
    std::vector<Matrix> grads_;
};

}  // namespace gd
