#include "gd/knn_graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "gd/io.hpp"

namespace gd {

KnnGraph::KnnGraph(std::size_t n, std::vector<Edge> sorted_edges)
    : n_(n), edges_(std::move(sorted_edges)) {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.src >= n_ || e.dst >= n_) throw CorruptEdge("edge endpoint out of range");
        if (e.src == e.dst) throw CorruptEdge("self-loop edge");
        if (i > 0) {
            const Edge& p = edges_[i - 1];
            if (p.src > e.src || (p.src == e.src && p.dst >= e.dst))
                throw CorruptEdge("edges not strictly sorted by (src, dst)");
        }
    }
    index_edges();
}

void KnnGraph::index_edges() {
    out_start_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) ++out_start_[e.src + 1];
    for (std::size_t i = 0; i < n_; ++i) out_start_[i + 1] += out_start_[i];
}

KnnGraph KnnGraph::build(const CircularEdgeStore& store) {
    if (store.filled() == 0) throw EmptyStore("build_graph: no epochs pushed");
    const std::size_t n = store.node_count();
    std::vector<Edge> edges;
    edges.reserve(n * store.config().k * store.filled());
    for (std::uint32_t v = 0; v < n; ++v) {
        SimilarityScores s = store.aggregate_scores(v);
        for (const auto& [dst, weight] : s.scores) edges.push_back({v, dst, weight});
    }
    return KnnGraph(n, std::move(edges));
}

std::span<const Edge> KnnGraph::out_neighbors(std::uint32_t v) const {
    if (v >= n_) throw BadNode("out_neighbors: node out of range");
    return {edges_.data() + out_start_[v], out_start_[v + 1] - out_start_[v]};
}

namespace {
std::uint32_t uf_find(std::vector<std::uint32_t>& parent, std::uint32_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}
}  // namespace

GraphStats KnnGraph::stats() const {
    GraphStats st;
    st.node_count = n_;
    st.edge_count = edges_.size();
    st.min_out_degree = n_ == 0 ? 0 : static_cast<std::size_t>(-1);
    for (std::size_t v = 0; v < n_; ++v) {
        std::size_t deg = out_start_[v + 1] - out_start_[v];
        st.min_out_degree = std::min(st.min_out_degree, deg);
        st.max_out_degree = std::max(st.max_out_degree, deg);
    }
    st.mean_out_degree = n_ == 0 ? 0.0
                                 : static_cast<double>(edges_.size()) / static_cast<double>(n_);
    std::vector<std::uint32_t> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    for (const Edge& e : edges_) {
        std::uint32_t a = uf_find(parent, e.src);
        std::uint32_t b = uf_find(parent, e.dst);
        if (a != b) parent[a] = b;
    }
    for (std::uint32_t v = 0; v < n_; ++v)
        if (uf_find(parent, v) == v) ++st.component_count;
    return st;
}

void KnnGraph::save(std::ostream& out) const {
    write_magic(out, "GDGR");
    write_u32le(out, 1);
    write_u64le(out, n_);
    write_u64le(out, edges_.size());
    for (const Edge& e : edges_) {
        write_u64le(out, e.src);
        write_u64le(out, e.dst);
        write_f32le(out, static_cast<float>(e.weight));
    }
}

void KnnGraph::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save(out);
    if (!out) throw IoError("write failed: " + path);
}

KnnGraph KnnGraph::load(std::istream& in) {
    check_magic(in, "GDGR");
    if (read_u32le(in) != 1) throw BadMagic("GDGR: unsupported version");
    std::uint64_t n = read_u64le(in);
    std::uint64_t m = read_u64le(in);
    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        std::uint64_t src = read_u64le(in);
        std::uint64_t dst = read_u64le(in);
        double w = static_cast<double>(read_f32le(in));
        if (src >= n || dst >= n) throw CorruptEdge("GDGR: edge endpoint out of range");
        if (src == dst) throw CorruptEdge("GDGR: self-loop edge");
        edges.push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst), w});
    }
    return KnnGraph(n, std::move(edges));
}

KnnGraph KnnGraph::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return load(in);
}

}  // namespace gd
