#include "gd/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gd/losses.hpp"
#include "gd/rng.hpp"

namespace gd {

Split make_split(std::size_t n, double train_fraction, std::uint64_t seed) {
    if (n < 2) throw DegenerateSplit("make_split: need at least 2 rows");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw DegenerateSplit("make_split: train_fraction must be in (0, 1)");
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng = SeededRng(seed).derive(0x5117);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }
    std::size_t cut = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
    cut = std::min(std::max<std::size_t>(cut, 1), n - 1);
    Split s;
    s.train.assign(order.begin(), order.begin() + cut);
    s.val.assign(order.begin() + cut, order.end());
    return s;
}

namespace {

void check_split(const Split& split, std::size_t n, const std::vector<std::uint32_t>& labels) {
    if (labels.size() != n) throw DegenerateSplit("split: labels length != feature rows");
    if (split.train.empty() || split.val.empty())
        throw DegenerateSplit("split: both sides must be non-empty");
    std::set<std::uint32_t> seen;
    for (const auto* side : {&split.train, &split.val}) {
        for (std::uint32_t i : *side) {
            if (i >= n) throw DegenerateSplit("split: index out of range");
            if (!seen.insert(i).second) throw DegenerateSplit("split: duplicate index");
        }
    }
}

std::uint32_t argmax_row(std::span<const double> row) {
    std::uint32_t best = 0;
    for (std::uint32_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

}  // namespace

ProbeReport train_linear_probe(const Matrix& features, const std::vector<std::uint32_t>& labels,
                               const Split& split, std::uint32_t epochs, double lr) {
    check_split(split, features.rows(), labels);
    if (epochs < 1 || lr <= 0.0) throw BadSpec("probe: epochs >= 1 and lr > 0 required");

    std::set<std::uint32_t> train_classes;
    std::uint32_t class_count = 0;
    for (std::uint32_t lab : labels) class_count = std::max(class_count, lab + 1);
    for (std::uint32_t i : split.train) train_classes.insert(labels[i]);
    if (train_classes.size() < 2)
        throw DegenerateSplit("probe: need >= 2 classes in the train split");

    const std::size_t d = features.cols();
    const std::size_t ntr = split.train.size();
    Matrix x_train(ntr, d);
    for (std::size_t r = 0; r < ntr; ++r) {
        auto row = features.row(split.train[r]);
        std::copy(row.begin(), row.end(), x_train.row(r).begin());
    }

    Matrix weights(d, class_count);
    Matrix bias(1, class_count);
    Matrix probs(ntr, class_count);
    double final_loss = 0.0;

    for (std::uint32_t epoch = 0; epoch < epochs; ++epoch) {
        Matrix logits = matmul(x_train, weights);
        for (std::size_t i = 0; i < ntr; ++i)
            for (std::size_t j = 0; j < class_count; ++j) logits(i, j) += bias(0, j);
        final_loss = 0.0;
        for (std::size_t i = 0; i < ntr; ++i) {
            auto p = softmax(logits.row(i), 1.0);
            std::copy(p.begin(), p.end(), probs.row(i).begin());
            final_loss -= std::log(std::max(p[labels[split.train[i]]], 1e-12));
        }
        final_loss /= static_cast<double>(ntr);

        Matrix dlogits = probs;
        for (std::size_t i = 0; i < ntr; ++i) dlogits(i, labels[split.train[i]]) -= 1.0;
        const double inv_n = 1.0 / static_cast<double>(ntr);
        Matrix gw = matmul_tn(x_train, dlogits);
        for (std::size_t i = 0; i < weights.size(); ++i)
            weights.data()[i] -= lr * inv_n * gw.data()[i];
        std::vector<double> gb = column_sums(dlogits);
        for (std::size_t j = 0; j < class_count; ++j) bias(0, j) -= lr * inv_n * gb[j];
    }

    auto accuracy = [&](const std::vector<std::uint32_t>& idx) {
        std::size_t hits = 0;
        std::vector<double> logit(class_count);
        for (std::uint32_t i : idx) {
            auto row = features.row(i);
            for (std::uint32_t j = 0; j < class_count; ++j) {
                double s = bias(0, j);
                for (std::size_t f = 0; f < d; ++f) s += row[f] * weights(f, j);
                logit[j] = s;
            }
            if (argmax_row(logit) == labels[i]) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(idx.size());
    };

    ProbeReport report;
    report.train_accuracy = accuracy(split.train);
    report.val_accuracy = accuracy(split.val);
    report.epochs = epochs;
    report.final_loss = final_loss;
    return report;
}

double knn_eval(const Matrix& features, const std::vector<std::uint32_t>& labels,
                const Split& split, std::uint32_t k_eval) {
    check_split(split, features.rows(), labels);
    if (k_eval < 1) throw DegenerateSplit("knn_eval: k_eval must be >= 1");
    if (k_eval > split.train.size())
        throw DegenerateSplit("knn_eval: k_eval exceeds train split size");

    std::uint32_t class_count = 0;
    for (std::uint32_t lab : labels) class_count = std::max(class_count, lab + 1);

    std::size_t hits = 0;
    std::vector<std::pair<double, std::uint32_t>> scored(split.train.size());
    for (std::uint32_t vi : split.val) {
        for (std::size_t t = 0; t < split.train.size(); ++t) {
            double c = cosine_similarity(features.row(vi), features.row(split.train[t]));
            scored[t] = {c, split.train[t]};
        }
        std::partial_sort(scored.begin(), scored.begin() + k_eval, scored.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
        std::vector<std::uint32_t> votes(class_count, 0);
        for (std::uint32_t t = 0; t < k_eval; ++t) ++votes[labels[scored[t].second]];
        std::uint32_t best = 0;
        for (std::uint32_t c = 1; c < class_count; ++c)
            if (votes[c] > votes[best]) best = c;
        if (best == labels[vi]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(split.val.size());
}

}  // namespace gd
