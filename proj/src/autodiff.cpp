#include "gd/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "gd/losses.hpp"

namespace gd {

Matrix SparseMatrix::multiply(const Matrix& x) const {
    if (cols != x.rows()) throw ShapeMismatch("spmm: inner dimensions differ");
    Matrix out(rows, x.cols());
    for (std::size_t i = 0; i < rows; ++i) {
        double* orow = out.data() + i * out.cols();
        for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) {
            const double v = val[e];
            const double* xrow = x.data() + static_cast<std::size_t>(col[e]) * x.cols();
            for (std::size_t j = 0; j < x.cols(); ++j) orow[j] += v * xrow[j];
        }
    }
    return out;
}

Matrix SparseMatrix::multiply_transposed(const Matrix& x) const {
    if (rows != x.rows()) throw ShapeMismatch("spmm_t: inner dimensions differ");
    Matrix out(cols, x.cols());
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xrow = x.data() + i * x.cols();
        for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) {
            const double v = val[e];
            double* orow = out.data() + static_cast<std::size_t>(col[e]) * out.cols();
            for (std::size_t j = 0; j < x.cols(); ++j) orow[j] += v * xrow[j];
        }
    }
    return out;
}

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

bool Tape::any_needs_grad(const std::vector<std::size_t>& ids) const {
    for (std::size_t id : ids)
        if (nodes_[id].needs_grad) return true;
    return false;
}

Var Tape::constant(Matrix value) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::param(Matrix value) {
    Node n;
    n.op = Op::Param;
    n.value = std::move(value);
    n.needs_grad = true;
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
    Node n;
    n.op = Op::MatMul;
    n.inputs = {a.id, b.id};
    n.value = gd::matmul(nodes_[a.id].value, nodes_[b.id].value);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::spmm(const SparseMatrix& s, Var x) {
    Node n;
    n.op = Op::Spmm;
    n.inputs = {x.id};
    n.sparse = &s;
    n.value = s.multiply(nodes_[x.id].value);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    Node n;
    n.op = Op::Add;
    n.inputs = {a.id, b.id};
    n.value = gd::add(nodes_[a.id].value, nodes_[b.id].value);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::subtract(Var a, Var b) {
    Node n;
    n.op = Op::Subtract;
    n.inputs = {a.id, b.id};
    n.value = gd::subtract(nodes_[a.id].value, nodes_[b.id].value);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
    Node n;
    n.op = Op::Hadamard;
    n.inputs = {a.id, b.id};
    n.value = gd::hadamard(nodes_[a.id].value, nodes_[b.id].value);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
    Node n;
    n.op = Op::Scale;
    n.inputs = {a.id};
    n.aux = c;
    n.value = gd::scale(nodes_[a.id].value, c);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::square(Var a) {
    Node n;
    n.op = Op::Square;
    n.inputs = {a.id};
    n.value = gd::hadamard(nodes_[a.id].value, nodes_[a.id].value);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::add_row_bias(Var a, Var bias) {
    const Matrix& av = nodes_[a.id].value;
    const Matrix& bv = nodes_[bias.id].value;
    if (bv.rows() != 1 || bv.cols() != av.cols())
        throw ShapeMismatch("add_row_bias: bias must be 1 x cols");
    Node n;
    n.op = Op::AddRowBias;
    n.inputs = {a.id, bias.id};
    Matrix out = av;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::activation(Var a, Activation kind, double leaky_slope) {
    Node n;
    n.op = Op::Activation_;
    n.inputs = {a.id};
    n.act = kind;
    n.aux = leaky_slope;
    const Matrix& x = nodes_[a.id].value;
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = x.data()[i];
        switch (kind) {
            case Activation::Tanh: out.data()[i] = std::tanh(v); break;
            case Activation::Relu: out.data()[i] = v > 0.0 ? v : 0.0; break;
            case Activation::LeakyRelu: out.data()[i] = v > 0.0 ? v : leaky_slope * v; break;
        }
    }
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::row_softmax(Var a, double temperature) {
    if (temperature <= 0.0) throw BadTemperature("row_softmax: temperature must be > 0");
    Node n;
    n.op = Op::RowSoftmax;
    n.inputs = {a.id};
    n.aux = temperature;
    const Matrix& x = nodes_[a.id].value;
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto p = gd::softmax(x.row(i), temperature);
        std::copy(p.begin(), p.end(), out.row(i).begin());
    }
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
    Node n;
    n.op = Op::ConcatCols;
    std::size_t rows = nodes_[parts[0].id].value.rows();
    std::size_t cols = 0;
    for (Var p : parts) {
        if (nodes_[p.id].value.rows() != rows)
            throw ShapeMismatch("concat_cols: row counts differ");
        cols += nodes_[p.id].value.cols();
        n.inputs.push_back(p.id);
    }
    Matrix out(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
        const Matrix& v = nodes_[p.id].value;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
        off += v.cols();
    }
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::elementwise_max(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeMismatch("elementwise_max: no inputs");
    Node n;
    n.op = Op::ElementwiseMax;
    const Matrix& first = nodes_[parts[0].id].value;
    for (Var p : parts) {
        if (!nodes_[p.id].value.same_shape(first))
            throw ShapeMismatch("elementwise_max: shapes differ");
        n.inputs.push_back(p.id);
    }
    Matrix out = first;
    for (std::size_t k = 1; k < parts.size(); ++k) {
        const Matrix& v = nodes_[parts[k].id].value;
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data()[i] = std::max(out.data()[i], v.data()[i]);
    }
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::gate_scale(Var x, Var eps) {
    const Matrix& ev = nodes_[eps.id].value;
    if (ev.rows() != 1 || ev.cols() != 1) throw ShapeMismatch("gate_scale: eps must be 1x1");
    Node n;
    n.op = Op::GateScale;
    n.inputs = {x.id, eps.id};
    n.value = gd::scale(nodes_[x.id].value, 1.0 + ev(0, 0));
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::edge_pair_sum(Var per_src, Var per_dst, const EdgeEndpoints& e) {
    const Matrix& p = nodes_[per_src.id].value;
    const Matrix& q = nodes_[per_dst.id].value;
    if (p.cols() != 1 || q.cols() != 1 || p.rows() != e.node_count || q.rows() != e.node_count)
        throw ShapeMismatch("edge_pair_sum: expects N x 1 inputs");
    Node n;
    n.op = Op::EdgePairSum;
    n.inputs = {per_src.id, per_dst.id};
    n.edges = &e;
    Matrix out(e.edge_count(), 1);
    for (std::size_t i = 0; i < e.edge_count(); ++i)
        out(i, 0) = p(e.src[i], 0) + q(e.dst[i], 0);
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::segment_softmax(Var edge_scores, const EdgeEndpoints& e) {
    const Matrix& s = nodes_[edge_scores.id].value;
    if (s.cols() != 1 || s.rows() != e.edge_count())
        throw ShapeMismatch("segment_softmax: expects E x 1 scores");
    Node n;
    n.op = Op::SegmentSoftmax;
    n.inputs = {edge_scores.id};
    n.edges = &e;
    Matrix out(e.edge_count(), 1);
    for (std::size_t v = 0; v < e.node_count; ++v) {
        std::size_t b = e.seg_start[v], t = e.seg_start[v + 1];
        if (b == t) continue;
        double mx = s(b, 0);
        for (std::size_t i = b; i < t; ++i) mx = std::max(mx, s(i, 0));
        double sum = 0.0;
        for (std::size_t i = b; i < t; ++i) {
            out(i, 0) = std::exp(s(i, 0) - mx);
            sum += out(i, 0);
        }
        for (std::size_t i = b; i < t; ++i) out(i, 0) /= sum;
    }
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::edge_weighted_gather(Var edge_weights, Var node_values, const EdgeEndpoints& e) {
    const Matrix& w = nodes_[edge_weights.id].value;
    const Matrix& z = nodes_[node_values.id].value;
    if (w.cols() != 1 || w.rows() != e.edge_count() || z.rows() != e.node_count)
        throw ShapeMismatch("edge_weighted_gather: operand shapes");
    Node n;
    n.op = Op::EdgeWeightedGather;
    n.inputs = {edge_weights.id, node_values.id};
    n.edges = &e;
    Matrix out(e.node_count, z.cols());
    for (std::size_t i = 0; i < e.edge_count(); ++i) {
        const double wi = w(i, 0);
        const double* zrow = z.data() + static_cast<std::size_t>(e.dst[i]) * z.cols();
        double* orow = out.data() + static_cast<std::size_t>(e.src[i]) * out.cols();
        for (std::size_t j = 0; j < z.cols(); ++j) orow[j] += wi * zrow[j];
    }
    n.value = std::move(out);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::sum_all(Var a) {
    Node n;
    n.op = Op::SumAll;
    n.inputs = {a.id};
    double s = 0.0;
    for (double v : nodes_[a.id].value.values()) s += v;
    n.value = Matrix(1, 1, {s});
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::mean_all(Var a) {
    Node n;
    n.op = Op::MeanAll;
    n.inputs = {a.id};
    const Matrix& x = nodes_[a.id].value;
    double s = 0.0;
    for (double v : x.values()) s += v;
    n.value = Matrix(1, 1, {s / static_cast<double>(x.size())});
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::softmax_cross_entropy_mean(Var logits, Matrix target_probs, double temperature) {
    if (temperature <= 0.0) throw BadTemperature("softmax_cross_entropy_mean: temperature");
    const Matrix& x = nodes_[logits.id].value;
    if (!x.same_shape(target_probs))
        throw ShapeMismatch("softmax_cross_entropy_mean: shapes differ");
    Node n;
    n.op = Op::SoftmaxCrossEntropyMean;
    n.inputs = {logits.id};
    n.aux = temperature;
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double mx = x(i, 0);
        for (std::size_t j = 0; j < x.cols(); ++j) mx = std::max(mx, x(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j)
            lse += std::exp((x(i, j) - mx) / temperature);
        lse = std::log(lse) + mx / temperature;
        for (std::size_t j = 0; j < x.cols(); ++j)
            loss -= target_probs(i, j) * (x(i, j) / temperature - lse);
    }
    n.value = Matrix(1, 1, {loss / static_cast<double>(x.rows())});
    n.target = std::move(target_probs);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

Var Tape::cosine_alignment_mean(Var pred, Matrix target) {
    const Matrix& p = nodes_[pred.id].value;
    if (!p.same_shape(target)) throw ShapeMismatch("cosine_alignment_mean: shapes differ");
    Node n;
    n.op = Op::CosineAlignmentMean;
    n.inputs = {pred.id};
    double loss = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        loss += cosine_distance_loss(p.row(i), target.row(i));
    n.value = Matrix(1, 1, {loss / static_cast<double>(p.rows())});
    n.target = std::move(target);
    n.needs_grad = any_needs_grad(n.inputs);
    return push(std::move(n));
}

const Matrix& Tape::grad(Var v) const {
    static const Matrix empty;
    if (v.id >= grads_.size() || grads_[v.id].size() == 0) {
        if (nodes_[v.id].value.size() == 0) return empty;
        // untouched by backward: zero gradient of matching shape
        const_cast<Tape*>(this)->grads_.resize(nodes_.size());
        const_cast<Tape*>(this)->grads_[v.id] =
            Matrix(nodes_[v.id].value.rows(), nodes_[v.id].value.cols());
    }
    return grads_[v.id];
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
    if (!nodes_[id].needs_grad) return;
    if (grads_[id].size() == 0)
        grads_[id] = Matrix(nodes_[id].value.rows(), nodes_[id].value.cols());
    for (std::size_t i = 0; i < g.size(); ++i) grads_[id].data()[i] += g.data()[i];
}

void Tape::backward(Var scalar_loss) {
    const Matrix& lv = nodes_[scalar_loss.id].value;
    if (lv.rows() != 1 || lv.cols() != 1)
        throw ShapeMismatch("backward: loss must be a 1x1 scalar");
    grads_.assign(nodes_.size(), Matrix());
    grads_[scalar_loss.id] = Matrix(1, 1, {1.0});

    for (std::size_t idx = scalar_loss.id + 1; idx-- > 0;) {
        Node& n = nodes_[idx];
        if (!n.needs_grad || grads_[idx].size() == 0) continue;
        const Matrix& g = grads_[idx];
        switch (n.op) {
            case Op::Constant:
            case Op::Param:
                break;
            case Op::MatMul: {
                const Matrix& a = nodes_[n.inputs[0]].value;
                const Matrix& b = nodes_[n.inputs[1]].value;
                if (nodes_[n.inputs[0]].needs_grad) accumulate(n.inputs[0], matmul_nt(g, b));
                if (nodes_[n.inputs[1]].needs_grad) accumulate(n.inputs[1], matmul_tn(a, g));
                break;
            }
            case Op::Spmm:
                accumulate(n.inputs[0], n.sparse->multiply_transposed(g));
                break;
            case Op::Add:
                accumulate(n.inputs[0], g);
                accumulate(n.inputs[1], g);
                break;
            case Op::Subtract:
                accumulate(n.inputs[0], g);
                accumulate(n.inputs[1], gd::scale(g, -1.0));
                break;
            case Op::Hadamard:
                if (nodes_[n.inputs[0]].needs_grad)
                    accumulate(n.inputs[0], gd::hadamard(g, nodes_[n.inputs[1]].value));
                if (nodes_[n.inputs[1]].needs_grad)
                    accumulate(n.inputs[1], gd::hadamard(g, nodes_[n.inputs[0]].value));
                break;
            case Op::Scale:
                accumulate(n.inputs[0], gd::scale(g, n.aux));
                break;
            case Op::Square:
                accumulate(n.inputs[0], gd::scale(gd::hadamard(g, nodes_[n.inputs[0]].value), 2.0));
                break;
            case Op::AddRowBias: {
                accumulate(n.inputs[0], g);
                if (nodes_[n.inputs[1]].needs_grad) {
                    auto cs = column_sums(g);
                    const std::size_t width = cs.size();
                    accumulate(n.inputs[1], Matrix(1, width, std::move(cs)));
                }
                break;
            }
            case Op::Activation_: {
                const Matrix& x = nodes_[n.inputs[0]].value;
                Matrix dx(x.rows(), x.cols());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    double d = 0.0;
                    switch (n.act) {
                        case Activation::Tanh: {
                            double y = n.value.data()[i];
                            d = 1.0 - y * y;
                            break;
                        }
                        case Activation::Relu:
                            d = x.data()[i] > 0.0 ? 1.0 : 0.0;
                            break;
                        case Activation::LeakyRelu:
                            d = x.data()[i] > 0.0 ? 1.0 : n.aux;
                            break;
                    }
                    dx.data()[i] = g.data()[i] * d;
                }
                accumulate(n.inputs[0], dx);
                break;
            }
            case Op::RowSoftmax: {
                const Matrix& y = n.value;
                Matrix dx(y.rows(), y.cols());
                for (std::size_t i = 0; i < y.rows(); ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < y.cols(); ++j) s += g(i, j) * y(i, j);
                    for (std::size_t j = 0; j < y.cols(); ++j)
                        dx(i, j) = y(i, j) * (g(i, j) - s) / n.aux;
                }
                accumulate(n.inputs[0], dx);
                break;
            }
            case Op::ConcatCols: {
                std::size_t off = 0;
                for (std::size_t k = 0; k < n.inputs.size(); ++k) {
                    const Matrix& part = nodes_[n.inputs[k]].value;
                    if (nodes_[n.inputs[k]].needs_grad) {
                        Matrix gp(part.rows(), part.cols());
                        for (std::size_t i = 0; i < part.rows(); ++i)
                            for (std::size_t j = 0; j < part.cols(); ++j)
                                gp(i, j) = g(i, off + j);
                        accumulate(n.inputs[k], gp);
                    }
                    off += part.cols();
                }
                break;
            }
            case Op::ElementwiseMax: {
                // subgradient routed to the earliest input attaining the max
                std::vector<Matrix> gs;
                gs.reserve(n.inputs.size());
                for (std::size_t k = 0; k < n.inputs.size(); ++k)
                    gs.emplace_back(n.value.rows(), n.value.cols());
                for (std::size_t i = 0; i < n.value.size(); ++i) {
                    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
                        if (nodes_[n.inputs[k]].value.data()[i] == n.value.data()[i]) {
                            gs[k].data()[i] = g.data()[i];
                            break;
                        }
                    }
                }
                for (std::size_t k = 0; k < n.inputs.size(); ++k)
                    accumulate(n.inputs[k], gs[k]);
                break;
            }
            case Op::GateScale: {
                const Matrix& x = nodes_[n.inputs[0]].value;
                const double eps = nodes_[n.inputs[1]].value(0, 0);
                if (nodes_[n.inputs[0]].needs_grad)
                    accumulate(n.inputs[0], gd::scale(g, 1.0 + eps));
                if (nodes_[n.inputs[1]].needs_grad) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < x.size(); ++i) s += g.data()[i] * x.data()[i];
                    accumulate(n.inputs[1], Matrix(1, 1, {s}));
                }
                break;
            }
            case Op::EdgePairSum: {
                const EdgeEndpoints& e = *n.edges;
                Matrix dp(e.node_count, 1), dq(e.node_count, 1);
                for (std::size_t i = 0; i < e.edge_count(); ++i) {
                    dp(e.src[i], 0) += g(i, 0);
                    dq(e.dst[i], 0) += g(i, 0);
                }
                accumulate(n.inputs[0], dp);
                accumulate(n.inputs[1], dq);
                break;
            }
            case Op::SegmentSoftmax: {
                const EdgeEndpoints& e = *n.edges;
                const Matrix& y = n.value;
                Matrix dx(y.rows(), 1);
                for (std::size_t v = 0; v < e.node_count; ++v) {
                    std::size_t b = e.seg_start[v], t = e.seg_start[v + 1];
                    double s = 0.0;
                    for (std::size_t i = b; i < t; ++i) s += g(i, 0) * y(i, 0);
                    for (std::size_t i = b; i < t; ++i) dx(i, 0) = y(i, 0) * (g(i, 0) - s);
                }
                accumulate(n.inputs[0], dx);
                break;
            }
            case Op::EdgeWeightedGather: {
                const EdgeEndpoints& e = *n.edges;
                const Matrix& w = nodes_[n.inputs[0]].value;
                const Matrix& z = nodes_[n.inputs[1]].value;
                if (nodes_[n.inputs[0]].needs_grad) {
                    Matrix dw(w.rows(), 1);
                    for (std::size_t i = 0; i < e.edge_count(); ++i) {
                        const double* grow = g.data() + static_cast<std::size_t>(e.src[i]) * g.cols();
                        const double* zrow = z.data() + static_cast<std::size_t>(e.dst[i]) * z.cols();
                        double s = 0.0;
                        for (std::size_t j = 0; j < z.cols(); ++j) s += grow[j] * zrow[j];
                        dw(i, 0) = s;
                    }
                    accumulate(n.inputs[0], dw);
                }
                if (nodes_[n.inputs[1]].needs_grad) {
                    Matrix dz(z.rows(), z.cols());
                    for (std::size_t i = 0; i < e.edge_count(); ++i) {
                        const double wi = w(i, 0);
                        const double* grow = g.data() + static_cast<std::size_t>(e.src[i]) * g.cols();
                        double* zrow = dz.data() + static_cast<std::size_t>(e.dst[i]) * dz.cols();
                        for (std::size_t j = 0; j < z.cols(); ++j) zrow[j] += wi * grow[j];
                    }
                    accumulate(n.inputs[1], dz);
                }
                break;
            }
            case Op::SumAll: {
                const Matrix& x = nodes_[n.inputs[0]].value;
                Matrix dx(x.rows(), x.cols());
                for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] = g(0, 0);
                accumulate(n.inputs[0], dx);
                break;
            }
            case Op::MeanAll: {
                const Matrix& x = nodes_[n.inputs[0]].value;
                Matrix dx(x.rows(), x.cols());
                const double gv = g(0, 0) / static_cast<double>(x.size());
                for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] = gv;
                accumulate(n.inputs[0], dx);
                break;
            }
            case Op::SoftmaxCrossEntropyMean: {
                const Matrix& x = nodes_[n.inputs[0]].value;
                const Matrix& t = n.target;
                const double temperature = n.aux;
                const double gv = g(0, 0) / static_cast<double>(x.rows());
                Matrix dx(x.rows(), x.cols());
                for (std::size_t i = 0; i < x.rows(); ++i) {
                    auto p = gd::softmax(x.row(i), temperature);
                    double tsum = 0.0;
                    for (std::size_t j = 0; j < x.cols(); ++j) tsum += t(i, j);
                    for (std::size_t j = 0; j < x.cols(); ++j)
                        dx(i, j) = gv * (p[j] * tsum - t(i, j)) / temperature;
                }
                accumulate(n.inputs[0], dx);
                break;
            }
            case Op::CosineAlignmentMean: {
                const Matrix& p = nodes_[n.inputs[0]].value;
                const Matrix& t = n.target;
                const double gv = g(0, 0) / static_cast<double>(p.rows());
                Matrix dx(p.rows(), p.cols());
                for (std::size_t i = 0; i < p.rows(); ++i) {
                    const double np = norm(p.row(i));
                    const double nt = norm(t.row(i));
                    if (np == 0.0 || nt == 0.0)
                        throw ZeroVector("cosine_alignment_mean: zero-norm row");
                    double c = dot(p.row(i), t.row(i)) / (np * nt);
                    for (std::size_t j = 0; j < p.cols(); ++j) {
                        double u = p(i, j) / np;
                        double v = t(i, j) / nt;
                        dx(i, j) = -2.0 * gv * (v - c * u) / np;
                    }
                }
                accumulate(n.inputs[0], dx);
                break;
            }
            default:
                throw UnsupportedPrimitive("backward: unknown op");
        }
    }
}

}  // namespace gd
