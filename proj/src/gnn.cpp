#include "gd/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gd/losses.hpp"

namespace gd {

void GnnStack::validate() const {
    if (depth < 1) throw BadSpec("gnn stack: depth must be >= 1");
    if (hidden < 1) throw BadSpec("gnn stack: hidden width must be >= 1");
}

std::size_t GnnStack::output_width(std::size_t) const {
    return jk == JkMode::Concat ? hidden * depth : hidden;
}

void RefineConfig::validate() const {
    if (epochs < 1) throw BadSpec("refine: epochs must be >= 1");
    if (lr <= 0.0) throw BadSpec("refine: lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw BadSpec("refine: momentum must be in [0, 1)");
    if (ema_momentum < 0.0 || ema_momentum > 1.0)
        throw BadSpec("refine: ema_momentum must be in [0, 1]");
}

GraphOperators build_operators(const KnnGraph& graph) {
    const std::size_t n = graph.node_count();
    GraphOperators ops;

    // symmetrized 0/1 adjacency with self-loops for the GCN normalization
    std::vector<std::set<std::uint32_t>> sym(n);
    for (std::size_t v = 0; v < n; ++v) sym[v].insert(static_cast<std::uint32_t>(v));
    for (const Edge& e : graph.edges()) {
        sym[e.src].insert(e.dst);
        sym[e.dst].insert(e.src);
    }
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t v = 0; v < n; ++v)
        inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(sym[v].size()));

    ops.gcn_norm.rows = ops.gcn_norm.cols = n;
    ops.gcn_norm.row_start.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
        ops.gcn_norm.row_start[v + 1] = ops.gcn_norm.row_start[v] + sym[v].size();
        for (std::uint32_t u : sym[v]) {
            ops.gcn_norm.col.push_back(u);
            ops.gcn_norm.val.push_back(inv_sqrt_deg[v] * inv_sqrt_deg[u]);
        }
    }

    ops.mean_agg.rows = ops.mean_agg.cols = n;
    ops.mean_agg.row_start.assign(n + 1, 0);
    ops.sum_agg.rows = ops.sum_agg.cols = n;
    ops.sum_agg.row_start.assign(n + 1, 0);
    ops.attention_edges.node_count = n;
    ops.attention_edges.seg_start.assign(n + 1, 0);

    for (std::size_t v = 0; v < n; ++v) {
        auto out = graph.out_neighbors(static_cast<std::uint32_t>(v));
        if (out.empty()) {
            // isolated node: self-only neighborhood for the mean aggregator
            ops.mean_agg.col.push_back(static_cast<std::uint32_t>(v));
            ops.mean_agg.val.push_back(1.0);
        } else {
            const double inv = 1.0 / static_cast<double>(out.size());
            for (const Edge& e : out) {
                ops.mean_agg.col.push_back(e.dst);
                ops.mean_agg.val.push_back(inv);
                ops.sum_agg.col.push_back(e.dst);
                ops.sum_agg.val.push_back(1.0);
            }
        }
        ops.mean_agg.row_start[v + 1] = ops.mean_agg.col.size();
        ops.sum_agg.row_start[v + 1] = ops.sum_agg.col.size();

        // attention support: out-neighborhood plus self, dst ascending
        bool self_added = false;
        for (const Edge& e : out) {
            if (!self_added && e.dst > v) {
                ops.attention_edges.src.push_back(static_cast<std::uint32_t>(v));
                ops.attention_edges.dst.push_back(static_cast<std::uint32_t>(v));
                self_added = true;
            }
            ops.attention_edges.src.push_back(static_cast<std::uint32_t>(v));
            ops.attention_edges.dst.push_back(e.dst);
        }
        if (!self_added) {
            ops.attention_edges.src.push_back(static_cast<std::uint32_t>(v));
            ops.attention_edges.dst.push_back(static_cast<std::uint32_t>(v));
        }
        ops.attention_edges.seg_start[v + 1] = ops.attention_edges.src.size();
    }
    return ops;
}

std::size_t layer_param_count(GnnLayerKind kind) {
    switch (kind) {
        case GnnLayerKind::GCN: return 1;
        case GnnLayerKind::GAT: return 3;
        case GnnLayerKind::SAGE: return 1;
        case GnnLayerKind::GIN: return 5;
    }
    throw UnsupportedPrimitive("layer_param_count: unknown layer kind");
}

namespace {

// weight matrices use the relu-gain bound sqrt(6/fan_in), which keeps layer
// output scale flat through act(...W) stages; scalar heads (attention
// vectors, biases) use 1/sqrt(fan_in)
Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, SeededRng& rng,
                    bool relu_gain = true) {
    const double bound = (relu_gain ? std::sqrt(6.0) : 1.0) /
                         std::sqrt(static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
    return m;
}

}  // namespace

ParamSet init_gnn(const GnnStack& stack, std::size_t in_dim, SeededRng& rng) {
    stack.validate();
    ParamSet params;
    for (std::uint32_t l = 0; l < stack.depth; ++l) {
        const std::size_t din = l == 0 ? in_dim : stack.hidden;
        const std::size_t dout = stack.hidden;
        const std::string p = "l" + std::to_string(l) + ".";
        switch (stack.kind) {
            case GnnLayerKind::GCN:
                params.add(p + "W", uniform_init(din, dout, din, rng));
                break;
            case GnnLayerKind::GAT:
                params.add(p + "W", uniform_init(din, dout, din, rng));
                params.add(p + "a_src", uniform_init(dout, 1, dout, rng, false));
                params.add(p + "a_dst", uniform_init(dout, 1, dout, rng, false));
                break;
            case GnnLayerKind::SAGE:
                params.add(p + "W", uniform_init(2 * din, dout, 2 * din, rng));
                break;
            case GnnLayerKind::GIN:
                params.add(p + "eps", Matrix(1, 1));
                params.add(p + "W1", uniform_init(din, dout, din, rng));
                params.add(p + "b1", uniform_init(1, dout, din, rng, false));
                params.add(p + "W2", uniform_init(dout, dout, dout, rng));
                params.add(p + "b2", uniform_init(1, dout, dout, rng, false));
                break;
        }
    }
    return params;
}

Var gnn_layer_forward_tape(Tape& tape, GnnLayerKind kind, const std::vector<Var>& params,
                           std::size_t param_offset, const GraphOperators& ops, Var h,
                           Activation act) {
    switch (kind) {
        case GnnLayerKind::GCN:
            return tape.activation(tape.matmul(tape.spmm(ops.gcn_norm, h), params[param_offset]),
                                   act);
        case GnnLayerKind::GAT: {
            Var z = tape.matmul(h, params[param_offset]);
            Var s_src = tape.matmul(z, params[param_offset + 1]);
            Var s_dst = tape.matmul(z, params[param_offset + 2]);
            Var scores = tape.activation(
                tape.edge_pair_sum(s_src, s_dst, ops.attention_edges), Activation::LeakyRelu, 0.2);
            Var alpha = tape.segment_softmax(scores, ops.attention_edges);
            return tape.activation(tape.edge_weighted_gather(alpha, z, ops.attention_edges), act);
        }
        case GnnLayerKind::SAGE: {
            Var m = tape.spmm(ops.mean_agg, h);
            Var cat = tape.concat_cols({h, m});
            return tape.activation(tape.matmul(cat, params[param_offset]), act);
        }
        case GnnLayerKind::GIN: {
            Var s = tape.spmm(ops.sum_agg, h);
            Var x = tape.add(tape.gate_scale(h, params[param_offset]), s);
            Var h1 = tape.activation(
                tape.add_row_bias(tape.matmul(x, params[param_offset + 1]),
                                  params[param_offset + 2]),
                act);
            return tape.add_row_bias(tape.matmul(h1, params[param_offset + 3]),
                                     params[param_offset + 4]);
        }
    }
    throw UnsupportedPrimitive("gnn_layer_forward: unknown layer kind");
}

Matrix gnn_layer_forward(GnnLayerKind kind, const ParamSet& params, const KnnGraph& graph,
                         const Matrix& h, Activation act) {
    if (params.size() != layer_param_count(kind))
        throw ShapeMismatch("gnn_layer_forward: wrong parameter count for layer kind");
    GraphOperators ops = build_operators(graph);
    Tape tape;
    std::vector<Var> vars;
    for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.constant(params.at(i)));
    Var out = gnn_layer_forward_tape(tape, kind, vars, 0, ops, tape.constant(h), act);
    return tape.value(out);
}

Var gnn_stack_forward_tape(Tape& tape, const GnnStack& stack, const std::vector<Var>& params,
                           const GraphOperators& ops, Var features) {
    stack.validate();
    const std::size_t per_layer = layer_param_count(stack.kind);
    std::vector<Var> outputs;
    Var h = features;
    for (std::uint32_t l = 0; l < stack.depth; ++l) {
        h = gnn_layer_forward_tape(tape, stack.kind, params, l * per_layer, ops, h, stack.act);
        outputs.push_back(h);
    }
    switch (stack.jk) {
        case JkMode::Disabled: return outputs.back();
        case JkMode::Sum: {
            Var acc = outputs[0];
            for (std::size_t i = 1; i < outputs.size(); ++i) acc = tape.add(acc, outputs[i]);
            return acc;
        }
        case JkMode::Max: return tape.elementwise_max(outputs);
        case JkMode::Concat: return tape.concat_cols(outputs);
    }
    throw UnsupportedPrimitive("gnn_stack_forward: unknown jk mode");
}

Matrix gnn_stack_apply(const GnnStack& stack, const ParamSet& params, const GraphOperators& ops,
                       const Matrix& features) {
    Tape tape;
    std::vector<Var> vars;
    for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.constant(params.at(i)));
    Var out = gnn_stack_forward_tape(tape, stack, vars, ops, tape.constant(features));
    return tape.value(out);
}

Matrix jk_combine(const std::vector<Matrix>& layer_outputs, JkMode mode) {
    if (layer_outputs.empty()) throw ShapeMismatch("jk_combine: no layer outputs");
    Tape tape;
    std::vector<Var> vars;
    for (const Matrix& m : layer_outputs) vars.push_back(tape.constant(m));
    switch (mode) {
        case JkMode::Disabled: return layer_outputs.back();
        case JkMode::Sum: {
            Matrix acc = layer_outputs[0];
            for (std::size_t i = 1; i < layer_outputs.size(); ++i)
                acc = add(acc, layer_outputs[i]);
            return acc;
        }
        case JkMode::Max: return tape.value(tape.elementwise_max(vars));
        case JkMode::Concat: return tape.value(tape.concat_cols(vars));
    }
    throw UnsupportedPrimitive("jk_combine: unknown mode");
}

double refine_loss(const Matrix& student_out, const Matrix& teacher_out, bool symmetrize) {
    if (!student_out.same_shape(teacher_out)) throw ShapeMismatch("refine_loss: shapes differ");
    if (student_out.rows() == 0) throw ShapeMismatch("refine_loss: empty matrices");
    double forward = 0.0, reverse = 0.0;
    for (std::size_t i = 0; i < student_out.rows(); ++i) {
        forward += cosine_distance_loss(student_out.row(i), teacher_out.row(i));
        if (symmetrize) reverse += cosine_distance_loss(teacher_out.row(i), student_out.row(i));
    }
    const double n = static_cast<double>(student_out.rows());
    return symmetrize ? 0.5 * (forward + reverse) / n : forward / n;
}

RefinedEmbeddings run_refine(const TrainArtifacts& artifacts, const GnnStack& stack,
                             const RefineConfig& cfg) {
    stack.validate();
    cfg.validate();
    const std::size_t n = artifacts.student_embeddings.rows();
    if (n == 0 || artifacts.teacher_embeddings.rows() != n)
        throw ShapeMismatch("run_refine: embeddings missing or inconsistent");
    if (artifacts.student_graph.node_count() != n || artifacts.teacher_graph.node_count() != n)
        throw ShapeMismatch("run_refine: graph node counts do not match embeddings");
    if (artifacts.student_graph.edge_count() == 0 || artifacts.teacher_graph.edge_count() == 0)
        throw EmptyStore("run_refine: empty graph");

    GraphOperators student_ops = build_operators(artifacts.student_graph);
    GraphOperators teacher_ops = build_operators(artifacts.teacher_graph);

    SeededRng init_rng = SeededRng(cfg.seed).derive(0x6E);
    ParamSet student = init_gnn(stack, artifacts.student_embeddings.cols(), init_rng);
    ParamSet teacher = student;  // teacher starts as a copy
    ParamSet state = ParamSet::zeros_like(student);

    RefinedEmbeddings out;
    out.loss_curve.reserve(cfg.epochs);

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Matrix teacher_out =
            gnn_stack_apply(stack, teacher, teacher_ops, artifacts.teacher_embeddings);

        Tape tape;
        std::vector<Var> vars;
        for (std::size_t i = 0; i < student.size(); ++i) vars.push_back(tape.param(student.at(i)));
        Var student_out = gnn_stack_forward_tape(tape, stack, vars, student_ops,
                                                 tape.constant(artifacts.student_embeddings));
        Var loss = tape.cosine_alignment_mean(student_out, std::move(teacher_out));
        const double loss_value = tape.value(loss)(0, 0);
        if (!std::isfinite(loss_value)) throw Error("run_refine: loss diverged");
        out.loss_curve.push_back(loss_value);

        tape.backward(loss);
        ParamSet grads;
        for (std::size_t i = 0; i < student.size(); ++i)
            grads.add(student.name(i), tape.grad(vars[i]));
        sgd_momentum_step(student, grads, cfg.lr, cfg.momentum, state);
        ema_update(teacher, student, cfg.ema_momentum);
    }

    out.values = gnn_stack_apply(stack, student, student_ops, artifacts.student_embeddings);
    return out;
}

}  // namespace gd
