#include "gd/mlp.hpp"

#include <cmath>

namespace gd {

void MlpSpec::validate() const {
    if (widths.size() < 2) throw BadSpec("mlp: need at least input and output widths");
    for (std::size_t w : widths)
        if (w < 1) throw BadSpec("mlp: widths must be >= 1");
}

namespace {

// semi-orthogonal matrix: rows orthonormal when fan_in <= fan_out, columns
// orthonormal otherwise, so the linear map preserves input geometry at init
Matrix orthogonal_init(std::size_t fan_in, std::size_t fan_out, SeededRng& rng) {
    const bool by_rows = fan_in <= fan_out;
    const std::size_t vecs = by_rows ? fan_in : fan_out;
    const std::size_t dim = by_rows ? fan_out : fan_in;
    std::vector<std::vector<double>> basis;
    basis.reserve(vecs);
    while (basis.size() < vecs) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.normal();
        for (const auto& u : basis) {
            double proj = 0.0;
            for (std::size_t i = 0; i < dim; ++i) proj += v[i] * u[i];
            for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * u[i];
        }
        double n2 = 0.0;
        for (double x : v) n2 += x * x;
        if (n2 < 1e-12) continue;  // degenerate draw, try again
        double inv = 1.0 / std::sqrt(n2);
        for (double& x : v) x *= inv;
        basis.push_back(std::move(v));
    }
    Matrix w(fan_in, fan_out);
    for (std::size_t r = 0; r < fan_in; ++r)
        for (std::size_t c = 0; c < fan_out; ++c)
            w(r, c) = by_rows ? basis[r][c] : basis[c][r];
    return w;
}

}  // namespace

ParamSet init_mlp(const MlpSpec& spec, SeededRng& rng, const std::string& prefix) {
    spec.validate();
    ParamSet params;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const std::size_t fan_in = spec.widths[l];
        const std::size_t fan_out = spec.widths[l + 1];
        params.add(prefix + "W" + std::to_string(l), orthogonal_init(fan_in, fan_out, rng));
        params.add(prefix + "b" + std::to_string(l), Matrix(1, fan_out));
    }
    return params;
}

Var mlp_forward(Tape& tape, const MlpSpec& spec, const std::vector<Var>& params, Var input,
                std::size_t param_offset) {
    if (tape.value(input).cols() != spec.widths.front())
        throw ShapeMismatch("mlp_forward: input width mismatch");
    Var h = input;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        Var w = params[param_offset + 2 * l];
        Var b = params[param_offset + 2 * l + 1];
        h = tape.add_row_bias(tape.matmul(h, w), b);
        if (l + 2 < spec.widths.size()) h = tape.activation(h, spec.act);
    }
    return h;
}

Matrix mlp_apply(const MlpSpec& spec, const ParamSet& params, const Matrix& input) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.constant(params.at(i)));
    Var out = mlp_forward(tape, spec, vars, tape.constant(input));
    return tape.value(out);
}

}  // namespace gd
