#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gd/autodiff.hpp"
#include "gd/matrix.hpp"

namespace gd {

// Named list of parameter matrices with stable ordering. Names are unique;
// shapes are fixed once added.
class ParamSet {
public:
    void add(std::string name, Matrix value);
    std::size_t size() const { return items_.size(); }
    const std::string& name(std::size_t i) const { return items_[i].first; }
    const Matrix& at(std::size_t i) const { return items_[i].second; }
    Matrix& at(std::size_t i) { return items_[i].second; }
    const Matrix& by_name(const std::string& name) const;
    Matrix& by_name(const std::string& name);
    bool has(const std::string& name) const;
    bool same_shapes(const ParamSet& o) const;

    static ParamSet zeros_like(const ParamSet& p);

private:
    std::vector<std::pair<std::string, Matrix>> items_;
};

// state' = momentum * state + grads; params' = params - lr * state'
void sgd_momentum_step(ParamSet& params, const ParamSet& grads, double lr, double momentum,
                       ParamSet& state);

// teacher' = m * teacher + (1 - m) * student, elementwise
void ema_update(ParamSet& teacher, const ParamSet& student, double m);

// A model maps (tape, parameter vars, input var) to an output var; a loss
// maps the output var to a 1x1 scalar var on the same tape.
using ModelFn = std::function<Var(Tape&, const std::vector<Var>&, Var)>;
using LossFn = std::function<Var(Tape&, Var)>;

double eval_loss(const ModelFn& model, const LossFn& loss, const ParamSet& params,
                 const Matrix& input);

// Exact reverse-mode gradients of loss(model(params, input)) per parameter.
ParamSet backward_grad(const ModelFn& model, const LossFn& loss, const ParamSet& params,
                       const Matrix& input);

struct GradReport {
    std::vector<std::pair<std::string, double>> per_param_max_rel_err;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Compares backward_grad against central finite differences entry by entry.
GradReport grad_check(const ModelFn& model, const LossFn& loss, const ParamSet& params,
                      const Matrix& input, double tolerance, double h = 1e-5);

}  // namespace gd
