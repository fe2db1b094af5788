#pragma once

#include <string>
#include <vector>

#include "gd/autodiff.hpp"
#include "gd/optim.hpp"
#include "gd/rng.hpp"

namespace gd {

// Fully connected stack: widths[0] inputs through widths.back() outputs,
// activation between layers, linear final layer.
struct MlpSpec {
    std::vector<std::size_t> widths;
    Activation act = Activation::Tanh;

    std::size_t layer_count() const { return widths.size() - 1; }
    void validate() const;
};

// Parameters "<prefix>W0", "<prefix>b0", ... initialized uniform
// (-1/sqrt(fan_in), +1/sqrt(fan_in)).
ParamSet init_mlp(const MlpSpec& spec, SeededRng& rng, const std::string& prefix);

Var mlp_forward(Tape& tape, const MlpSpec& spec, const std::vector<Var>& params, Var input,
                std::size_t param_offset = 0);

Matrix mlp_apply(const MlpSpec& spec, const ParamSet& params, const Matrix& input);

}  // namespace gd
