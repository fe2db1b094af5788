#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "gd/io.hpp"
#include "gd/losses.hpp"
#include "gd/neighbor_store.hpp"

using namespace gd;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/gd_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

Matrix random_embeddings(SeededRng& rng, std::size_t n, std::size_t d) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

// hand-built epoch set: every anchor gets the same (id, sim) pairs
EpochNeighborSet uniform_set(std::uint64_t epoch, std::size_t n,
                             const std::vector<std::pair<std::uint32_t, double>>& pairs) {
    EpochNeighborSet set;
    set.epoch = epoch;
    set.per_anchor.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto [id, sim] : pairs) {
            std::uint32_t dst = id == i ? static_cast<std::uint32_t>((id + 1) % n) : id;
            set.per_anchor[i].push_back({dst, sim});
        }
    }
    return set;
}

// reference for Eqs. 1-3 computed straight from the pushed per-epoch sets
std::map<std::uint32_t, double> brute_scores(
    const std::vector<EpochNeighborSet>& pushed, std::uint32_t anchor, std::uint32_t k,
    std::uint32_t w) {
    // keep only the latest epoch per slot
    std::map<std::uint64_t, const EpochNeighborSet*> by_slot;
    for (const auto& set : pushed) {
        auto it = by_slot.find(set.epoch % w);
        if (it == by_slot.end() || it->second->epoch <= set.epoch) by_slot[set.epoch % w] = &set;
    }
    std::map<std::uint32_t, double> acc;
    for (const auto& [slot, set] : by_slot)
        for (std::uint32_t j = 0; j < k; ++j)
            acc[set->per_anchor[anchor][j].id] += set->per_anchor[anchor][j].similarity;
    return acc;
}

}  // namespace

TEST_CASE("topk_neighbors: simple planar geometry") {
    const double ten_deg = 10.0 * 3.14159265358979323846 / 180.0;
    Matrix emb = Matrix::from_rows({{1.0, 0.0}, {std::cos(ten_deg), std::sin(ten_deg)}, {0.0, 1.0}});
    AnchorNeighbors out = topk_neighbors(emb, 0, 1);
    REQUIRE(out.neighbors.size() == 1);
    CHECK(out.neighbors[0].id == 1);
    CHECK(out.neighbors[0].similarity == doctest::Approx(std::cos(ten_deg)));
}

TEST_CASE("topk_neighbors: duplicates chosen first, self never chosen") {
    Matrix emb = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.7, 0.7}});
    AnchorNeighbors out = topk_neighbors(emb, 0, 2);
    REQUIRE(out.neighbors.size() == 2);
    CHECK(out.neighbors[0].id == 2);  // the exact copy wins
    CHECK(out.neighbors[0].similarity == doctest::Approx(1.0));
    CHECK(out.neighbors[1].id == 3);
    for (const Neighbor& nb : out.neighbors) CHECK(nb.id != 0);
    // anchor 0 ties its copy at index 2; the lower index wins the top-1
    CHECK(out.top1_is_self);
    AnchorNeighbors dup = topk_neighbors(emb, 2, 2);
    CHECK_FALSE(dup.top1_is_self);  // the copy at index 0 wins instead
}

TEST_CASE("topk_neighbors: agrees with an exhaustive pairwise sort") {
    SeededRng rng(1001);
    Matrix emb = random_embeddings(rng, 50, 8);
    for (std::uint32_t anchor = 0; anchor < 50; ++anchor) {
        AnchorNeighbors out = topk_neighbors(emb, anchor, 5);
        std::vector<std::pair<double, std::uint32_t>> all;
        for (std::uint32_t j = 0; j < 50; ++j) {
            if (j == anchor) continue;
            all.emplace_back(cosine_similarity(emb.row(anchor), emb.row(j)), j);
        }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        REQUIRE(out.neighbors.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(out.neighbors[i].id == all[i].second);
            CHECK(out.neighbors[i].similarity == all[i].first);
        }
    }
}

TEST_CASE("topk_neighbors: errors") {
    Matrix emb = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    CHECK_THROWS_AS((void)topk_neighbors(emb, 0, 2), TooFewSamples);
    CHECK_THROWS_AS((void)topk_neighbors(emb, 0, 0), TooFewSamples);
    Matrix zero = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}});
    CHECK_THROWS_AS((void)topk_neighbors(zero, 1, 1), ZeroVector);
}

TEST_CASE("push_epoch: rolling slots follow the tau mod w rule") {
    const std::size_t n = 12;
    CircularEdgeStore store(NeighborConfig{4, 2, 3}, n);
    // epoch tau writes destinations (2 tau, 2 tau + 1) mod n with distinct sims
    auto set_for = [&](std::uint64_t tau) {
        std::uint32_t a = static_cast<std::uint32_t>((2 * tau) % n);
        std::uint32_t b = static_cast<std::uint32_t>((2 * tau + 1) % n);
        return uniform_set(tau, n, {{a, 0.9}, {b, 0.8}});
    };
    for (std::uint64_t tau = 0; tau <= 3; ++tau) store.push_epoch(set_for(tau));

    CHECK(store.filled() == 3);
    CHECK(store.slot(0).epoch == 3);  // epoch 3 overwrote epoch 0
    CHECK(store.slot(1).epoch == 1);
    CHECK(store.slot(2).epoch == 2);
    // anchor 5's entries in slot 0 come from epoch 3: neighbors 6 and 7
    CHECK(store.slot(0).dst[5 * 2 + 0] == 6);
    CHECK(store.slot(0).dst[5 * 2 + 1] == 7);
    CHECK(store.slot(1).dst[5 * 2 + 0] == 2);
    CHECK(store.slot(2).dst[5 * 2 + 0] == 4);
}

TEST_CASE("push_epoch: single push fills one slot; re-push is idempotent") {
    CircularEdgeStore store(NeighborConfig{4, 1, 3}, 4);
    EpochNeighborSet set = uniform_set(0, 4, {{1, 0.5}});
    store.push_epoch(set);
    CHECK(store.filled() == 1);
    CHECK(store.slot(1).epoch == CircularEdgeStore::kEmptyEpoch);
    CHECK(store.slot(2).epoch == CircularEdgeStore::kEmptyEpoch);
    auto before = std::vector<std::uint32_t>(store.slot(0).dst.begin(), store.slot(0).dst.end());
    store.push_epoch(set);
    CHECK(store.filled() == 1);
    auto after = std::vector<std::uint32_t>(store.slot(0).dst.begin(), store.slot(0).dst.end());
    CHECK(before == after);
}

TEST_CASE("push_epoch: config mismatches rejected") {
    CircularEdgeStore store(NeighborConfig{4, 2, 2}, 4);
    EpochNeighborSet wrong_n = uniform_set(0, 3, {{1, 0.5}, {2, 0.4}});
    CHECK_THROWS_AS(store.push_epoch(wrong_n), ConfigMismatch);
    EpochNeighborSet too_few = uniform_set(0, 4, {{1, 0.5}});
    CHECK_THROWS_AS(store.push_epoch(too_few), ConfigMismatch);
    EpochNeighborSet self_loop = uniform_set(0, 4, {{1, 0.5}, {2, 0.4}});
    self_loop.per_anchor[2][1] = {2, 0.4};
    CHECK_THROWS_AS(store.push_epoch(self_loop), ConfigMismatch);
}

TEST_CASE("aggregate_scores: direct sums over slots") {
    const std::size_t n = 6;
    CircularEdgeStore store(NeighborConfig{4, 1, 3}, n);
    store.push_epoch(uniform_set(0, n, {{3, 0.9}}));
    store.push_epoch(uniform_set(1, n, {{3, 0.8}}));
    store.push_epoch(uniform_set(2, n, {{5, 0.5}}));

    SimilarityScores s = store.aggregate_scores(0);
    REQUIRE(s.scores.size() == 2);
    CHECK(s.scores[0].first == 3);
    CHECK(s.scores[0].second == doctest::Approx(1.7));  // present in two slots
    CHECK(s.scores[1].first == 5);
    CHECK(s.scores[1].second == doctest::Approx(0.5));  // present in one slot

    CircularEdgeStore empty(NeighborConfig{4, 1, 3}, n);
    CHECK_THROWS_AS((void)empty.aggregate_scores(0), EmptyStore);
}

TEST_CASE("similarity_distribution: closed forms and support preservation") {
    SimilarityScores even{0, {{2, 0.0}, {4, 0.0}}};
    SimilarityDistribution d = similarity_distribution(even);
    CHECK(d.candidates[0].second == doctest::Approx(0.5));
    CHECK(d.candidates[1].second == doctest::Approx(0.5));

    SimilarityScores skew{0, {{1, std::log(2.0)}, {3, 0.0}}};
    SimilarityDistribution d2 = similarity_distribution(skew);
    CHECK(d2.candidates[0].first == 1);
    CHECK(d2.candidates[0].second == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(d2.candidates[1].second == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)similarity_distribution(SimilarityScores{0, {}}), EmptySupport);
}

TEST_CASE("aggregate scores and distribution match brute-force recomputation") {
    SeededRng rng(2024);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 8 + rng.below(56);
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(3));
        const std::uint32_t w = 1 + static_cast<std::uint32_t>(rng.below(4));
        const std::uint32_t e = k + 1 + static_cast<std::uint32_t>(rng.below(3));
        CircularEdgeStore store(NeighborConfig{e, k, w}, n);
        std::vector<EpochNeighborSet> pushed;
        const std::uint64_t epochs = 1 + rng.below(2 * w);
        for (std::uint64_t tau = 0; tau < epochs; ++tau) {
            Matrix emb = random_embeddings(rng, n, 6);
            pushed.push_back(topk_all(emb, e, tau));
            store.push_epoch(pushed.back());
        }
        for (std::uint32_t anchor = 0; anchor < n; anchor += 3) {
            auto expect = brute_scores(pushed, anchor, k, w);
            SimilarityScores got = store.aggregate_scores(anchor);
            REQUIRE(got.scores.size() == expect.size());
            std::size_t i = 0;
            std::vector<double> expect_vals;
            for (const auto& [id, val] : expect) {
                CHECK(got.scores[i].first == id);
                CHECK(got.scores[i].second == doctest::Approx(val).epsilon(1e-9));
                expect_vals.push_back(val);
                ++i;
            }
            SimilarityDistribution dist = similarity_distribution(got);
            auto expect_probs = softmax(expect_vals, 1.0);
            for (std::size_t c = 0; c < expect_probs.size(); ++c)
                CHECK(dist.candidates[c].second ==
                      doctest::Approx(expect_probs[c]).epsilon(1e-9));
        }
    }
}

TEST_CASE("store invariants: capacity, self-loop freedom, slot assignment") {
    SeededRng rng(99);
    const std::size_t n = 10;
    const std::uint32_t k = 2, w = 4, e = 5;
    CircularEdgeStore store(NeighborConfig{e, k, w}, n);
    for (std::uint64_t tau = 0; tau < 11; ++tau) {
        Matrix emb = random_embeddings(rng, n, 4);
        store.push_epoch(topk_all(emb, e, tau));
        // capacity is fixed at N*k per slot, w slots
        for (std::uint32_t s = 0; s < w; ++s) {
            CHECK(store.slot(s).dst.size() == n * k);
            if (store.slot(s).epoch != CircularEdgeStore::kEmptyEpoch) {
                CHECK(store.slot(s).epoch % w == s);
                // slot holds the most recent epoch mapping to it
                CHECK(store.slot(s).epoch == (tau >= s ? (tau - ((tau - s) % w)) : s));
                for (std::size_t i = 0; i < n; ++i)
                    for (std::uint32_t j = 0; j < k; ++j)
                        CHECK(store.slot(s).dst[i * k + j] != i);
            }
        }
    }
    CHECK(store.filled() == w);
    // after >= w pushes every anchor holds exactly k*w destination entries
    std::size_t total = 0;
    for (std::uint32_t s = 0; s < w; ++s) total += store.slot(s).dst.size();
    CHECK(total == n * k * w);
}

TEST_CASE("sample_neighbor: degenerate and Monte Carlo behavior") {
    SimilarityDistribution one{0, {{7, 1.0}}};
    SeededRng rng(3);
    for (int i = 0; i < 10; ++i) CHECK(sample_neighbor(one, rng) == 7);

    SimilarityDistribution half{0, {{2, 0.5}, {9, 0.5}}};
    SeededRng mc(1234);
    std::size_t count2 = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        if (sample_neighbor(half, mc) == 2) ++count2;
    CHECK(std::abs(count2 / static_cast<double>(draws) - 0.5) < 0.01);

    SeededRng s1(5), s2(5);
    for (int i = 0; i < 50; ++i) CHECK(sample_neighbor(half, s1) == sample_neighbor(half, s2));
}

TEST_CASE("maturity_check maps the top-1 flag to the teacher input mode") {
    CHECK(maturity_check(true) == TeacherInputMode::Neighbor);
    CHECK(maturity_check(false) == TeacherInputMode::Augmented);
}

TEST_CASE("store file: byte-exact round-trip") {
    SeededRng rng(77);
    const std::size_t n = 9;
    CircularEdgeStore store(NeighborConfig{4, 2, 3}, n);
    for (std::uint64_t tau = 0; tau < 2; ++tau) {
        Matrix emb = random_embeddings(rng, n, 5);
        store.push_epoch(topk_all(emb, 4, tau));
    }
    TempFile f1("store1.gdns"), f2("store2.gdns");
    store.save(f1.path);
    CircularEdgeStore back = CircularEdgeStore::load(f1.path);
    CHECK(back.filled() == store.filled());
    CHECK(back.node_count() == n);
    CHECK(back.next_epoch() == store.next_epoch());
    back.save(f2.path);
    CHECK(read_file_bytes(f1.path) == read_file_bytes(f2.path));

    SimilarityScores a = store.aggregate_scores(4);
    SimilarityScores b = back.aggregate_scores(4);
    REQUIRE(a.scores.size() == b.scores.size());
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        CHECK(a.scores[i].first == b.scores[i].first);
        // store files hold float32 similarities
        CHECK(b.scores[i].second ==
              doctest::Approx(a.scores[i].second).epsilon(1e-6));
    }
}

TEST_CASE("store file: corrupt inputs rejected") {
    TempFile f("badstore.gdns");
    std::ofstream(f.path, std::ios::binary).close();
    CHECK_THROWS_AS((void)CircularEdgeStore::load(f.path), BadMagic);
    {
        std::ofstream out(f.path, std::ios::binary);
        write_magic(out, "GDNS");
        write_u32le(out, 1);
        write_u64le(out, 5);  // header promises more than the file holds
    }
    CHECK_THROWS_AS((void)CircularEdgeStore::load(f.path), TruncatedFile);
}
