#include "gd/neighbor_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "gd/io.hpp"
#include "gd/losses.hpp"

namespace gd {

void NeighborConfig::validate() const {
    if (k < 1) throw BadSpec("neighbor config: k must be >= 1");
    if (w < 1) throw BadSpec("neighbor config: w must be >= 1");
    if (k >= e) throw ValidationError("neighbor config: k must be < e");
}

namespace {

std::vector<double> row_norms(const Matrix& embeddings) {
    std::vector<double> norms(embeddings.rows());
    for (std::size_t i = 0; i < embeddings.rows(); ++i) {
        norms[i] = norm(embeddings.row(i));
        if (norms[i] == 0.0) throw ZeroVector("topk_neighbors: zero-norm embedding row");
    }
    return norms;
}

AnchorNeighbors topk_one(const Matrix& embeddings, const std::vector<double>& norms,
                         std::uint32_t anchor, std::uint32_t e) {
    const std::size_t n = embeddings.rows();
    std::vector<double> sim(n);
    auto arow = embeddings.row(anchor);
    for (std::size_t j = 0; j < n; ++j) {
        double c = dot(arow, embeddings.row(j)) / (norms[anchor] * norms[j]);
        sim[j] = std::clamp(c, -1.0, 1.0);
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (sim[a] != sim[b]) return sim[a] > sim[b];
        return a < b;
    };
    std::size_t keep = std::min<std::size_t>(n, static_cast<std::size_t>(e) + 1);
    std::partial_sort(order.begin(), order.begin() + keep, order.end(), better);

    AnchorNeighbors out;
    out.top1_is_self = order[0] == anchor;
    out.neighbors.reserve(e);
    for (std::size_t i = 0; i < keep && out.neighbors.size() < e; ++i) {
        if (order[i] == anchor) continue;
        out.neighbors.push_back({order[i], sim[order[i]]});
    }
    return out;
}

}  // namespace

AnchorNeighbors topk_neighbors(const Matrix& embeddings, std::uint32_t anchor, std::uint32_t e) {
    const std::size_t n = embeddings.rows();
    if (anchor >= n) throw BadNode("topk_neighbors: anchor out of range");
    if (e < 1 || e > n - 1) throw TooFewSamples("topk_neighbors: need 1 <= e <= N-1");
    return topk_one(embeddings, row_norms(embeddings), anchor, e);
}

EpochNeighborSet topk_all(const Matrix& embeddings, std::uint32_t e, std::uint64_t epoch) {
    const std::size_t n = embeddings.rows();
    if (e < 1 || n < 2 || e > n - 1) throw TooFewSamples("topk_all: need 1 <= e <= N-1");
    auto norms = row_norms(embeddings);
    EpochNeighborSet set;
    set.epoch = epoch;
    set.per_anchor.resize(n);
    set.top1_is_self.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        AnchorNeighbors an = topk_one(embeddings, norms, static_cast<std::uint32_t>(i), e);
        set.per_anchor[i] = std::move(an.neighbors);
        set.top1_is_self[i] = an.top1_is_self ? 1 : 0;
    }
    return set;
}

CircularEdgeStore::CircularEdgeStore(NeighborConfig config, std::size_t n)
    : config_(config), n_(n) {
    config_.validate();
    if (n_ < 2) throw BadSpec("edge store: need at least 2 nodes");
    slots_.resize(config_.w);
    for (auto& s : slots_) {
        s.dst.assign(n_ * config_.k, 0);
        s.sim.assign(n_ * config_.k, 0.0);
    }
}

void CircularEdgeStore::push_epoch(const EpochNeighborSet& sets) {
    if (sets.per_anchor.size() != n_)
        throw ConfigMismatch("push_epoch: anchor count does not match store");
    for (std::size_t i = 0; i < n_; ++i) {
        if (sets.per_anchor[i].size() < config_.k)
            throw ConfigMismatch("push_epoch: fewer than k neighbors for an anchor");
        for (std::uint32_t j = 0; j < config_.k; ++j) {
            const Neighbor& nb = sets.per_anchor[i][j];
            if (nb.id == i) throw ConfigMismatch("push_epoch: self-loop neighbor");
            if (nb.id >= n_) throw ConfigMismatch("push_epoch: neighbor id out of range");
        }
    }
    Slot& slot = slots_[sets.epoch % config_.w];
    if (slot.epoch == kEmptyEpoch) ++filled_;
    slot.epoch = sets.epoch;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = 0; j < config_.k; ++j) {
            slot.dst[i * config_.k + j] = sets.per_anchor[i][j].id;
            slot.sim[i * config_.k + j] = sets.per_anchor[i][j].similarity;
        }
    }
    next_epoch_ = std::max(next_epoch_, sets.epoch + 1);
}

SimilarityScores CircularEdgeStore::aggregate_scores(std::uint32_t anchor) const {
    if (filled_ == 0) throw EmptyStore("aggregate_scores: no epochs pushed");
    if (anchor >= n_) throw BadNode("aggregate_scores: anchor out of range");
    std::map<std::uint32_t, double> acc;
    for (const Slot& slot : slots_) {
        if (slot.epoch == kEmptyEpoch) continue;
        for (std::uint32_t j = 0; j < config_.k; ++j) {
            const std::size_t at = static_cast<std::size_t>(anchor) * config_.k + j;
            acc[slot.dst[at]] += slot.sim[at];
        }
    }
    SimilarityScores out;
    out.anchor = anchor;
    out.scores.assign(acc.begin(), acc.end());
    return out;
}

CircularEdgeStore::SlotView CircularEdgeStore::slot(std::uint32_t index) const {
    const Slot& s = slots_.at(index);
    return {s.epoch, s.dst, s.sim};
}

void CircularEdgeStore::save(std::ostream& out) const {
    write_magic(out, "GDNS");
    write_u32le(out, 1);
    write_u64le(out, n_);
    write_u32le(out, config_.k);
    write_u32le(out, config_.w);
    write_u32le(out, filled_);
    write_u64le(out, next_epoch_);
    for (const Slot& s : slots_) {
        write_u64le(out, s.epoch);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::uint32_t j = 0; j < config_.k; ++j) write_u64le(out, i);
        for (std::uint32_t d : s.dst) write_u64le(out, d);
        for (double v : s.sim) write_f32le(out, static_cast<float>(v));
    }
}

void CircularEdgeStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save(out);
    if (!out) throw IoError("write failed: " + path);
}

CircularEdgeStore CircularEdgeStore::load(std::istream& in) {
    check_magic(in, "GDNS");
    if (read_u32le(in) != 1) throw BadMagic("GDNS: unsupported version");
    std::uint64_t n = read_u64le(in);
    std::uint32_t k = read_u32le(in);
    std::uint32_t w = read_u32le(in);
    std::uint32_t filled = read_u32le(in);
    std::uint64_t next_epoch = read_u64le(in);
    if (n < 2 || k < 1 || w < 1) throw IoError("GDNS: invalid header");

    CircularEdgeStore store(NeighborConfig{k + 1, k, w}, n);
    std::uint32_t nonempty = 0;
    for (std::uint32_t si = 0; si < w; ++si) {
        Slot& slot = store.slots_[si];
        slot.epoch = read_u64le(in);
        const bool empty = slot.epoch == kEmptyEpoch;
        if (!empty) {
            ++nonempty;
            if (slot.epoch % w != si) throw IoError("GDNS: slot/epoch mismatch");
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::uint32_t j = 0; j < k; ++j)
                if (read_u64le(in) != i) throw IoError("GDNS: source row mismatch");
        for (std::size_t i = 0; i < n * k; ++i) {
            std::uint64_t d = read_u64le(in);
            if (!empty) {
                if (d >= n) throw IoError("GDNS: destination id out of range");
                if (d == i / k) throw IoError("GDNS: self-loop destination");
            }
            slot.dst[i] = static_cast<std::uint32_t>(d);
        }
        for (std::size_t i = 0; i < n * k; ++i)
            slot.sim[i] = static_cast<double>(read_f32le(in));
    }
    if (nonempty != filled) throw IoError("GDNS: filled count mismatch");
    store.filled_ = filled;
    store.next_epoch_ = next_epoch;
    return store;
}

CircularEdgeStore CircularEdgeStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return load(in);
}

SimilarityDistribution similarity_distribution(const SimilarityScores& scores) {
    if (scores.scores.empty()) throw EmptySupport("similarity_distribution: empty support");
    std::vector<double> vals;
    vals.reserve(scores.scores.size());
    for (const auto& [id, s] : scores.scores) vals.push_back(s);
    std::vector<double> probs = softmax(vals, 1.0);
    SimilarityDistribution dist;
    dist.anchor = scores.anchor;
    dist.candidates.reserve(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        dist.candidates.emplace_back(scores.scores[i].first, probs[i]);
    return dist;
}

std::uint32_t sample_neighbor(const SimilarityDistribution& dist, SeededRng& rng) {
    if (dist.candidates.empty()) throw EmptySupport("sample_neighbor: empty distribution");
    const double u = rng.uniform();
    double cum = 0.0;
    for (const auto& [id, p] : dist.candidates) {
        cum += p;
        if (u < cum) return id;
    }
    return dist.candidates.back().first;
}

TeacherInputMode maturity_check(bool top1_is_self) {
    return top1_is_self ? TeacherInputMode::Neighbor : TeacherInputMode::Augmented;
}

}  // namespace gd
