#include "gd/pretrain.hpp"

#include <cmath>
#include <numeric>

#include "gd/losses.hpp"

namespace gd {

void DistillHeadConfig::validate() const {
    if (projector_widths.size() != 4)
        throw BadSpec("distill head: projector must be a 3-layer MLP (4 widths)");
    if (student_temp <= 0.0 || teacher_temp <= 0.0)
        throw BadTemperature("distill head: temperatures must be > 0");
    if (teacher_temp >= student_temp)
        throw ValidationError("distill head: teacher_temp must be < student_temp");
}

void PretrainConfig::validate() const {
    if (epochs < 1) throw BadSpec("pretrain: epochs must be >= 1");
    if (batch_size < 1) throw BadSpec("pretrain: batch_size must be >= 1");
    if (lr <= 0.0) throw BadSpec("pretrain: lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0) throw BadSpec("pretrain: momentum must be in [0, 1)");
    if (ema_momentum < 0.0 || ema_momentum > 1.0)
        throw BadSpec("pretrain: ema_momentum must be in [0, 1]");
    neighbor.validate();
    augment.validate();
    head.validate();
    if (encoder.widths.size() < 2) throw BadSpec("pretrain: encoder needs >= 1 layer");
    if (encoder.widths.back() != head.projector_widths.front())
        throw ShapeMismatch("pretrain: projector input width != encoder output width");
}

Matrix center_logits(const Matrix& logits) {
    if (logits.rows() < 1) throw ShapeMismatch("center_logits: empty batch");
    std::vector<double> mean = column_means(logits);
    Matrix out = logits;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) -= mean[j];
    return out;
}

Matrix sharpen(const Matrix& logits, double temperature) {
    if (temperature <= 0.0) throw BadTemperature("sharpen: temperature must be > 0");
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto p = softmax(logits.row(i), temperature);
        std::copy(p.begin(), p.end(), out.row(i).begin());
    }
    return out;
}

Matrix center_and_sharpen(const Matrix& teacher_logits, double teacher_temp) {
    return sharpen(center_logits(teacher_logits), teacher_temp);
}

double distill_loss(const Matrix& teacher_probs, const Matrix& student_probs) {
    if (!teacher_probs.same_shape(student_probs))
        throw ShapeMismatch("distill_loss: shapes differ");
    if (teacher_probs.rows() == 0) throw ShapeMismatch("distill_loss: empty batch");
    double loss = 0.0;
    for (std::size_t i = 0; i < teacher_probs.rows(); ++i)
        loss += cross_entropy(teacher_probs.row(i), student_probs.row(i));
    return loss / static_cast<double>(teacher_probs.rows());
}

std::vector<double> select_teacher_input(std::size_t sample_index,
                                         const std::vector<double>& view_b,
                                         TeacherInputMode mode,
                                         const SimilarityDistribution& dist,
                                         const Matrix& features, SeededRng& rng) {
    if (mode == TeacherInputMode::Augmented) return view_b;
    (void)sample_index;
    std::uint32_t picked = sample_neighbor(dist, rng);
    auto row = features.row(picked);
    return std::vector<double>(row.begin(), row.end());
}

std::vector<std::uint8_t> maturity_flags(const Matrix& current, const Matrix& previous) {
    if (!current.same_shape(previous)) throw ShapeMismatch("maturity_flags: shapes differ");
    const std::size_t n = current.rows();
    std::vector<std::uint8_t> flags(n, 0);
    std::vector<double> prev_norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        prev_norms[j] = norm(previous.row(j));
        if (prev_norms[j] == 0.0) throw ZeroVector("maturity_flags: zero-norm embedding row");
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto cur = current.row(i);
        const double cur_norm = norm(cur);
        if (cur_norm == 0.0) throw ZeroVector("maturity_flags: zero-norm embedding row");
        std::size_t best = 0;
        double best_sim = -2.0;
        for (std::size_t j = 0; j < n; ++j) {
            double c = dot(cur, previous.row(j)) / (cur_norm * prev_norms[j]);
            if (c > best_sim) {
                best_sim = c;
                best = j;
            }
        }
        flags[i] = best == i ? 1 : 0;
    }
    return flags;
}

namespace {

struct StudentModel {
    MlpSpec encoder;
    MlpSpec projector;
    ParamSet params;  // encoder params then projector params

    std::size_t encoder_param_count() const { return 2 * encoder.layer_count(); }

    Matrix logits(const Matrix& x) const {
        Tape tape;
        std::vector<Var> vars;
        for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(tape.constant(params.at(i)));
        Var h = mlp_forward(tape, encoder, vars, tape.constant(x), 0);
        Var out = mlp_forward(tape, projector, vars, h, encoder_param_count());
        return tape.value(out);
    }

    Matrix embed(const Matrix& x) const {
        ParamSet enc_only;
        for (std::size_t i = 0; i < encoder_param_count(); ++i)
            enc_only.add(params.name(i), params.at(i));
        return mlp_apply(encoder, enc_only, x);
    }
};

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    return m;
}

}  // namespace

TrainArtifacts run_pretrain(const Matrix& features, const PretrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = features.rows();
    if (n < static_cast<std::size_t>(cfg.neighbor.e) + 1)
        throw TooFewSamples("run_pretrain: need N >= e+1 samples");
    if (features.cols() != cfg.encoder.widths.front())
        throw ShapeMismatch("run_pretrain: feature dim != encoder input width");

    SeededRng base(cfg.seed);
    SeededRng init_rng = base.derive(0x1217);

    StudentModel student;
    student.encoder = MlpSpec{cfg.encoder.widths, cfg.encoder.act};
    student.projector = MlpSpec{cfg.head.projector_widths, cfg.encoder.act};
    ParamSet enc_params = init_mlp(student.encoder, init_rng, "enc.");
    ParamSet proj_params = init_mlp(student.projector, init_rng, "proj.");
    for (std::size_t i = 0; i < enc_params.size(); ++i)
        student.params.add(enc_params.name(i), enc_params.at(i));
    for (std::size_t i = 0; i < proj_params.size(); ++i)
        student.params.add(proj_params.name(i), proj_params.at(i));

    StudentModel teacher = student;  // same initial weights
    ParamSet opt_state = ParamSet::zeros_like(student.params);

    CircularEdgeStore teacher_store(cfg.neighbor, n);
    CircularEdgeStore student_store(cfg.neighbor, n);
    std::vector<std::uint8_t> mature(n, 0);
    Matrix prev_teacher_emb;

    TrainArtifacts art;
    art.loss_curve.reserve(cfg.epochs);
    art.mode_log.reserve(cfg.epochs);

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        SeededRng epoch_rng = base.derive(1 + epoch);
        SeededRng shuffle_rng = epoch_rng.derive(0);
        for (std::size_t i = n - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.below(i + 1));
            std::swap(order[i], order[j]);
        }

        double loss_sum = 0.0;
        std::size_t neighbor_picks = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const std::size_t b = stop - start;

            std::vector<std::vector<double>> view_a(b), teacher_in(b);
            for (std::size_t r = 0; r < b; ++r) {
                const std::uint32_t i = order[start + r];
                SeededRng aug_rng = epoch_rng.derive(1 + 2ULL * i);
                view_a[r] = augment(features.row(i), cfg.augment, aug_rng);
                std::vector<double> view_b = augment(features.row(i), cfg.augment, aug_rng);

                TeacherInputMode mode = epoch == 0
                                            ? TeacherInputMode::Augmented
                                            : maturity_check(mature[i] != 0);
                if (mode == TeacherInputMode::Neighbor) {
                    SimilarityDistribution dist =
                        similarity_distribution(teacher_store.aggregate_scores(i));
                    SeededRng pick_rng = epoch_rng.derive(2 + 2ULL * i);
                    teacher_in[r] =
                        select_teacher_input(i, view_b, mode, dist, features, pick_rng);
                    ++neighbor_picks;
                } else {
                    teacher_in[r] = std::move(view_b);
                }
            }

            Matrix teacher_logits = teacher.logits(rows_to_matrix(teacher_in));
            Matrix teacher_probs = center_and_sharpen(teacher_logits, cfg.head.teacher_temp);

            Tape tape;
            std::vector<Var> vars;
            for (std::size_t i = 0; i < student.params.size(); ++i)
                vars.push_back(tape.param(student.params.at(i)));
            Var h = mlp_forward(tape, student.encoder, vars, tape.constant(rows_to_matrix(view_a)), 0);
            Var logits = mlp_forward(tape, student.projector, vars, h,
                                     student.encoder_param_count());
            Var loss = tape.softmax_cross_entropy_mean(logits, std::move(teacher_probs),
                                                       cfg.head.student_temp);
            const double loss_value = tape.value(loss)(0, 0);
            if (!std::isfinite(loss_value)) throw Error("run_pretrain: loss diverged");
            tape.backward(loss);

            ParamSet grads;
            for (std::size_t i = 0; i < student.params.size(); ++i)
                grads.add(student.params.name(i), tape.grad(vars[i]));
            sgd_momentum_step(student.params, grads, cfg.lr, cfg.momentum, opt_state);
            ema_update(teacher.params, student.params, cfg.ema_momentum);

            loss_sum += loss_value * static_cast<double>(b);
        }
        art.loss_curve.push_back(loss_sum / static_cast<double>(n));
        art.mode_log.push_back(static_cast<double>(neighbor_picks) / static_cast<double>(n));

        // clean full-dataset pass defines this epoch's latent representations
        Matrix student_emb = student.embed(features);
        Matrix teacher_emb = teacher.embed(features);
        EpochNeighborSet student_set = topk_all(student_emb, cfg.neighbor.e, epoch);
        EpochNeighborSet teacher_set = topk_all(teacher_emb, cfg.neighbor.e, epoch);
        student_store.push_epoch(student_set);
        teacher_store.push_epoch(teacher_set);
        // maturity for the next epoch: is each sample's student embedding
        // still nearest to its own slot in the previous teacher table?
        mature = prev_teacher_emb.size() == 0 ? std::vector<std::uint8_t>(n, 0)
                                              : maturity_flags(student_emb, prev_teacher_emb);
        prev_teacher_emb = teacher_emb;

        if (epoch + 1 == cfg.epochs) {
            art.student_embeddings = std::move(student_emb);
            art.teacher_embeddings = std::move(teacher_emb);
        }
    }

    art.teacher_graph = KnnGraph::build(teacher_store);
    art.student_graph = KnnGraph::build(student_store);
    art.teacher_store = std::move(teacher_store);
    art.student_store = std::move(student_store);
    return art;
}

}  // namespace gd
