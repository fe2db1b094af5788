#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gd/neighbor_store.hpp"

namespace gd {

struct Edge {
    std::uint32_t src;
    std::uint32_t dst;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::size_t min_out_degree = 0;
    double mean_out_degree = 0.0;
    std::size_t max_out_degree = 0;
    std::size_t component_count = 0;  // weakly connected
};

// Directed KNN graph. Edges are unique (src, dst) pairs sorted by (src,
// dst); weight is the multi-epoch aggregated similarity of the pair.
class KnnGraph {
public:
    KnnGraph() = default;
    KnnGraph(std::size_t n, std::vector<Edge> sorted_edges);

    // Edge (i, j) exists iff j appears in at least one filled slot's top-k
    // list for i; duplicate picks across epochs collapse into one edge.
    static KnnGraph build(const CircularEdgeStore& store);

    std::size_t node_count() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const Edge> out_neighbors(std::uint32_t v) const;

    GraphStats stats() const;

    // Graph file "GDGR v1": magic GDGR, u32 version, u64 N, u64 E, then E
    // records of (u64 src, u64 dst, f32 weight) sorted by (src, dst).
    void save(const std::string& path) const;
    void save(std::ostream& out) const;
    static KnnGraph load(const std::string& path);
    static KnnGraph load(std::istream& in);

    friend bool operator==(const KnnGraph&, const KnnGraph&) = default;

private:
    void index_edges();

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> out_start_;  // n + 1
};

}  // namespace gd
