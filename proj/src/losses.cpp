#include "gd/losses.hpp"

#include <algorithm>
#include <cmath>

namespace gd {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimMismatch("dot: vector lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimMismatch("cosine_similarity: vector lengths differ");
    if (a.empty()) throw DimMismatch("cosine_similarity: empty vectors");
    double na = norm(a);
    double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine_similarity: zero-norm vector");
    double c = dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

std::vector<double> softmax(std::span<const double> scores, double temperature) {
    if (temperature <= 0.0) throw BadTemperature("softmax: temperature must be > 0");
    std::vector<double> out(scores.size());
    if (scores.empty()) return out;
    double mx = scores[0];
    for (double v : scores) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp((scores[i] - mx) / temperature);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

static void check_distribution(std::span<const double> p, const char* who) {
    double sum = 0.0;
    for (double v : p) {
        if (v < -1e-12 || v > 1.0 + 1e-12)
            throw NotADistribution(std::string(who) + ": entry outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw NotADistribution(std::string(who) + ": entries do not sum to 1");
}

double cross_entropy(std::span<const double> t, std::span<const double> s) {
    if (t.size() != s.size()) throw DimMismatch("cross_entropy: vector lengths differ");
    check_distribution(t, "cross_entropy(t)");
    check_distribution(s, "cross_entropy(s)");
    double loss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == 0.0) continue;
        loss -= t[i] * std::log(std::max(s[i], 1e-12));
    }
    return loss;
}

double cosine_distance_loss(std::span<const double> s, std::span<const double> t) {
    return 2.0 - 2.0 * cosine_similarity(s, t);
}

}  // namespace gd
