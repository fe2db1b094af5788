#pragma once

#include <span>
#include <vector>

#include "gd/matrix.hpp"

namespace gd {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// a.b / (|a||b|), clamped into [-1, 1]
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// max-subtracted softmax of scores/temperature
std::vector<double> softmax(std::span<const double> scores, double temperature = 1.0);

// -sum t_i log s_i with 0*log 0 = 0 and log clamped at 1e-12.
// Both arguments must be probability vectors (sum within 1e-6 of 1).
double cross_entropy(std::span<const double> t, std::span<const double> s);

// 2 - 2 cos(s, t), in [0, 4]
double cosine_distance_loss(std::span<const double> s, std::span<const double> t);

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    return cosine_similarity(std::span<const double>(a), std::span<const double>(b));
}
inline double cross_entropy(const std::vector<double>& t, const std::vector<double>& s) {
    return cross_entropy(std::span<const double>(t), std::span<const double>(s));
}
inline double cosine_distance_loss(const std::vector<double>& s, const std::vector<double>& t) {
    return cosine_distance_loss(std::span<const double>(s), std::span<const double>(t));
}

}  // namespace gd
