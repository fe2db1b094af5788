#include "gd/optim.hpp"

#include <algorithm>
#include <cmath>

namespace gd {

void ParamSet::add(std::string name, Matrix value) {
    if (has(name)) throw BadSpec("ParamSet: duplicate name " + name);
    items_.emplace_back(std::move(name), std::move(value));
}

const Matrix& ParamSet::by_name(const std::string& name) const {
    for (const auto& [n, m] : items_)
        if (n == name) return m;
    throw BadSpec("ParamSet: no parameter named " + name);
}

Matrix& ParamSet::by_name(const std::string& name) {
    for (auto& [n, m] : items_)
        if (n == name) return m;
    throw BadSpec("ParamSet: no parameter named " + name);
}

bool ParamSet::has(const std::string& name) const {
    for (const auto& [n, m] : items_)
        if (n == name) return true;
    return false;
}

bool ParamSet::same_shapes(const ParamSet& o) const {
    if (size() != o.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
        if (name(i) != o.name(i) || !at(i).same_shape(o.at(i))) return false;
    return true;
}

ParamSet ParamSet::zeros_like(const ParamSet& p) {
    ParamSet z;
    for (std::size_t i = 0; i < p.size(); ++i)
        z.add(p.name(i), Matrix(p.at(i).rows(), p.at(i).cols()));
    return z;
}

void sgd_momentum_step(ParamSet& params, const ParamSet& grads, double lr, double momentum,
                       ParamSet& state) {
    if (!params.same_shapes(grads) || !params.same_shapes(state))
        throw ShapeMismatch("sgd_momentum_step: params/grads/state shapes differ");
    if (lr <= 0.0) throw BadSpec("sgd_momentum_step: lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0)
        throw BadSpec("sgd_momentum_step: momentum must be in [0, 1)");
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = params.at(i);
        Matrix& s = state.at(i);
        const Matrix& g = grads.at(i);
        for (std::size_t j = 0; j < p.size(); ++j) {
            s.data()[j] = momentum * s.data()[j] + g.data()[j];
            p.data()[j] -= lr * s.data()[j];
        }
    }
}

void ema_update(ParamSet& teacher, const ParamSet& student, double m) {
    if (!teacher.same_shapes(student)) throw ShapeMismatch("ema_update: shapes differ");
    if (m < 0.0 || m > 1.0) throw BadSpec("ema_update: momentum must be in [0, 1]");
    for (std::size_t i = 0; i < teacher.size(); ++i) {
        Matrix& t = teacher.at(i);
        const Matrix& s = student.at(i);
        for (std::size_t j = 0; j < t.size(); ++j)
            t.data()[j] = m * t.data()[j] + (1.0 - m) * s.data()[j];
    }
}

static Var run_model(Tape& tape, const ModelFn& model, const LossFn& loss,
                     const ParamSet& params, const Matrix& input, std::vector<Var>* param_vars) {
    std::vector<Var> pv;
    pv.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) pv.push_back(tape.param(params.at(i)));
    Var x = tape.constant(input);
    Var out = model(tape, pv, x);
    Var l = loss(tape, out);
    if (param_vars) *param_vars = pv;
    return l;
}

double eval_loss(const ModelFn& model, const LossFn& loss, const ParamSet& params,
                 const Matrix& input) {
    Tape tape;
    Var l = run_model(tape, model, loss, params, input, nullptr);
    return tape.value(l)(0, 0);
}

ParamSet backward_grad(const ModelFn& model, const LossFn& loss, const ParamSet& params,
                       const Matrix& input) {
    Tape tape;
    std::vector<Var> pv;
    Var l = run_model(tape, model, loss, params, input, &pv);
    tape.backward(l);
    ParamSet grads;
    for (std::size_t i = 0; i < params.size(); ++i) grads.add(params.name(i), tape.grad(pv[i]));
    return grads;
}

GradReport grad_check(const ModelFn& model, const LossFn& loss, const ParamSet& params,
                      const Matrix& input, double tolerance, double h) {
    ParamSet analytic = backward_grad(model, loss, params, input);
    GradReport report;
    report.tolerance = tolerance;
    ParamSet perturbed = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < params.at(i).size(); ++j) {
            double saved = perturbed.at(i).data()[j];
            perturbed.at(i).data()[j] = saved + h;
            double lp = eval_loss(model, loss, perturbed, input);
            perturbed.at(i).data()[j] = saved - h;
            double lm = eval_loss(model, loss, perturbed, input);
            perturbed.at(i).data()[j] = saved;
            double fd = (lp - lm) / (2.0 * h);
            double an = analytic.at(i).data()[j];
            double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            worst = std::max(worst, std::abs(fd - an) / denom);
        }
        report.per_param_max_rel_err.emplace_back(params.name(i), worst);
        report.max_rel_err = std::max(report.max_rel_err, worst);
    }
    report.pass = report.max_rel_err < tolerance;
    return report;
}

}  // namespace gd
