#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gd/matrix.hpp"
#include "gd/rng.hpp"

namespace gd {

struct NeighborConfig {
    std::uint32_t e = 4;   // neighbors tracked per epoch
    std::uint32_t k = 1;   // edges kept per epoch
    std::uint32_t w = 15;  // epochs of memory

    void validate() const;  // k < e, k >= 1, w >= 1
};

struct Neighbor {
    std::uint32_t id;
    double similarity;
};

// Output of the per-anchor top-e scan: neighbors sorted by similarity
// descending (ties by ascending node index), self excluded. top1_is_self
// reports whether the anchor itself wins the scan when self-matching is
// allowed, the signal consumed by the maturity check.
struct AnchorNeighbors {
    std::vector<Neighbor> neighbors;
    bool top1_is_self = false;
};

struct EpochNeighborSet {
    std::uint64_t epoch = 0;
    std::vector<std::vector<Neighbor>> per_anchor;   // each of length e
    std::vector<std::uint8_t> top1_is_self;          // per anchor
};

AnchorNeighbors topk_neighbors(const Matrix& embeddings, std::uint32_t anchor, std::uint32_t e);
EpochNeighborSet topk_all(const Matrix& embeddings, std::uint32_t e, std::uint64_t epoch);

// Aggregated multi-epoch similarity scores of one anchor's candidates,
// ascending candidate id.
struct SimilarityScores {
    std::uint32_t anchor = 0;
    std::vector<std::pair<std::uint32_t, double>> scores;
};

struct SimilarityDistribution {
    std::uint32_t anchor = 0;
    std::vector<std::pair<std::uint32_t, double>> candidates;  // ascending id, probs sum to 1
};

// Rolling w-epoch record of every anchor's k nearest neighbors and their
// similarities. Slot of epoch tau is tau mod w; a new epoch overwrites the
// slot's previous occupant. Capacity is exactly N*k*w destination entries.
class CircularEdgeStore {
public:
    static constexpr std::uint64_t kEmptyEpoch = ~0ULL;

    CircularEdgeStore() = default;
    CircularEdgeStore(NeighborConfig config, std::size_t n);

    void push_epoch(const EpochNeighborSet& sets);
    SimilarityScores aggregate_scores(std::uint32_t anchor) const;

    const NeighborConfig& config() const { return config_; }
    std::size_t node_count() const { return n_; }
    std::uint32_t filled() const { return filled_; }
    std::uint64_t next_epoch() const { return next_epoch_; }

    struct SlotView {
        std::uint64_t epoch;
        std::span<const std::uint32_t> dst;  // N*k, anchor-major, similarity descending
        std::span<const double> sim;
    };
    SlotView slot(std::uint32_t index) const;

    // Store file "GDNS v1": magic GDNS, u32 version, u64 N, u32 k, u32 w,
    // u32 filled, u64 next_epoch, then w slots of (u64 epoch_id, N*k u64
    // sources, N*k u64 destinations, N*k f32 similarities). Empty slots
    // carry epoch_id 2^64-1 and zeroed destination/similarity arrays.
    void save(const std::string& path) const;
    void save(std::ostream& out) const;
    static CircularEdgeStore load(const std::string& path);
    static CircularEdgeStore load(std::istream& in);

private:
    struct Slot {
        std::uint64_t epoch = kEmptyEpoch;
        std::vector<std::uint32_t> dst;
        std::vector<double> sim;
    };

    NeighborConfig config_;
    std::size_t n_ = 0;
    std::vector<Slot> slots_;
    std::uint32_t filled_ = 0;
    std::uint64_t next_epoch_ = 0;
};

SimilarityDistribution similarity_distribution(const SimilarityScores& scores);
std::uint32_t sample_neighbor(const SimilarityDistribution& dist, SeededRng& rng);

enum class TeacherInputMode { Augmented, Neighbor };

// Mature samples (nearest candidate is the sample itself) draw the teacher
// input from the neighbor distribution; immature ones use the second view.
TeacherInputMode maturity_check(bool top1_is_self);

}  // namespace gd
