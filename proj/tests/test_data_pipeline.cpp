#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "gd/dataset.hpp"
#include "gd/io.hpp"
#include "gd/losses.hpp"

using namespace gd;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/gd_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

Matrix class_centroids(const LabeledDataset& ds) {
    Matrix centroids(ds.class_count, ds.features.cols());
    std::vector<std::size_t> counts(ds.class_count, 0);
    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
        ++counts[ds.labels[i]];
        for (std::size_t j = 0; j < ds.features.cols(); ++j)
            centroids(ds.labels[i], j) += ds.features(i, j);
    }
    for (std::size_t c = 0; c < ds.class_count; ++c)
        for (std::size_t j = 0; j < centroids.cols(); ++j)
            centroids(c, j) /= static_cast<double>(counts[c]);
    return centroids;
}

}  // namespace

TEST_CASE("gen_clusters: single point sits near a unit-norm center") {
    LabeledDataset ds = gen_clusters(1, 1, 2, 0.1, 99);
    CHECK(ds.features.rows() == 1);
    CHECK(ds.labels == std::vector<std::uint32_t>{0});
    double n = norm(ds.features.row(0));
    CHECK(n > 0.5);
    CHECK(n < 1.5);
}

TEST_CASE("gen_clusters: nearest-centroid classification recovers labels") {
    LabeledDataset ds = gen_clusters(100, 5, 16, 0.05, 4242);
    Matrix centroids = class_centroids(ds);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.features.rows(); ++i) {
        double best = -1.0;
        std::uint32_t best_c = 0;
        for (std::uint32_t c = 0; c < ds.class_count; ++c) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < ds.features.cols(); ++j) {
                double diff = ds.features(i, j) - centroids(c, j);
                d2 += diff * diff;
            }
            if (best < 0.0 || d2 < best) {
                best = d2;
                best_c = c;
            }
        }
        if (best_c == ds.labels[i]) ++hits;
    }
    CHECK(static_cast<double>(hits) / 500.0 >= 0.99);
}

TEST_CASE("gen_clusters: identical seeds give bit-identical datasets") {
    LabeledDataset a = gen_clusters(7, 3, 5, 0.3, 1234);
    LabeledDataset b = gen_clusters(7, 3, 5, 0.3, 1234);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    LabeledDataset c = gen_clusters(7, 3, 5, 0.3, 1235);
    CHECK_FALSE(a.features == c.features);
}

TEST_CASE("gen_clusters: argument validation") {
    CHECK_THROWS_AS((void)gen_clusters(0, 1, 2, 0.1, 1), BadSpec);
    CHECK_THROWS_AS((void)gen_clusters(1, 1, 2, 0.0, 1), BadSpec);
    CHECK_THROWS_AS((void)gen_clusters(1, 1, 2, -1.0, 1), BadSpec);
}

TEST_CASE("gen_clusters: tight clusters are more similar within class than across") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        LabeledDataset ds = gen_clusters(10, 3, 8, 1e-4, seed);
        double within = 0.0, between = 0.0;
        std::size_t nw = 0, nb = 0;
        for (std::size_t i = 0; i < ds.features.rows(); ++i) {
            for (std::size_t j = i + 1; j < ds.features.rows(); ++j) {
                double c = cosine_similarity(ds.features.row(i), ds.features.row(j));
                if (ds.labels[i] == ds.labels[j]) {
                    within += c;
                    ++nw;
                } else {
                    between += c;
                    ++nb;
                }
            }
        }
        CHECK(within / nw > between / nb);
    }
}

TEST_CASE("augment: zero policy is the identity") {
    SeededRng rng(5);
    std::vector<double> x{1.5, -2.0, 0.25, 8.0};
    auto y = augment(x, AugmentPolicy{}, rng);
    CHECK(y == x);
}

TEST_CASE("augment: mask count follows floor arithmetic") {
    SeededRng rng(6);
    std::vector<double> x{1, 2, 3, 4};
    AugmentPolicy policy;
    policy.mask_fraction = 1.0 - 1e-9;
    auto y = augment(x, policy, rng);
    std::size_t zeros = 0;
    for (double v : y) zeros += v == 0.0;
    CHECK(zeros == 3);
    CHECK(y.size() == x.size());
}

TEST_CASE("augment: deterministic per seed and length-preserving") {
    std::vector<double> x{0.5, -1.0, 2.0, 0.0, 3.5};
    AugmentPolicy policy{0.2, 0.3, 0.1};
    SeededRng r1(77), r2(77), r3(78);
    auto a = augment(x, policy, r1);
    auto b = augment(x, policy, r2);
    auto c = augment(x, policy, r3);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.size() == x.size());
}

TEST_CASE("augment: policy validation") {
    SeededRng rng(1);
    std::vector<double> x{1.0};
    CHECK_THROWS_AS((void)augment(x, AugmentPolicy{-0.1, 0, 0}, rng), BadSpec);
    CHECK_THROWS_AS((void)augment(x, AugmentPolicy{0, 1.0, 0}, rng), BadSpec);
    CHECK_THROWS_AS((void)augment(x, AugmentPolicy{0, 0, -2.0}, rng), BadSpec);
}

TEST_CASE("embedding files: save/load round-trips at 32-bit precision") {
    SeededRng rng(8);
    Matrix m(7, 3);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-10, 10);
    TempFile f("roundtrip.gdem");
    save_embeddings(m, f.path);
    Matrix back = load_embeddings(f.path);
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 3);
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(back.data()[i] == static_cast<double>(static_cast<float>(m.data()[i])));

    // a second save must reproduce the file byte for byte
    TempFile f2("roundtrip2.gdem");
    save_embeddings(back, f2.path);
    CHECK(read_file_bytes(f.path) == read_file_bytes(f2.path));
}

TEST_CASE("embedding files: empty file rejected as BadMagic") {
    TempFile f("empty.gdem");
    std::ofstream(f.path, std::ios::binary).close();
    CHECK_THROWS_AS((void)load_embeddings(f.path), BadMagic);
}

TEST_CASE("embedding files: short payload rejected as TruncatedFile") {
    TempFile f("short.gdem");
    {
        Matrix m(4, 4);
        std::ofstream out(f.path, std::ios::binary);
        save_embeddings(m, out);
    }
    auto bytes = read_file_bytes(f.path);
    std::ofstream out(f.path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 6));
    out.close();
    CHECK_THROWS_AS((void)load_embeddings(f.path), TruncatedFile);
}

TEST_CASE("embedding files: missing path raises IoError") {
    CHECK_THROWS_AS((void)load_embeddings("/tmp/gd_does_not_exist.gdem"), IoError);
}

TEST_CASE("label sidecar round-trip") {
    TempFile f("labels.gdlb");
    std::vector<std::uint32_t> labels{0, 1, 2, 1, 0};
    save_labels(labels, 3, f.path);
    LoadedLabels back = load_labels(f.path);
    CHECK(back.labels == labels);
    CHECK(back.class_count == 3);
}

TEST_CASE("seeded rng streams are stable and well-ranged") {
    SeededRng a(42), b(42);
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
    SeededRng c(42);
    SeededRng d1 = c.derive(1), d2 = c.derive(2);
    CHECK(d1.next_u64() != d2.next_u64());
    SeededRng u(7);
    for (int i = 0; i < 1000; ++i) {
        double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}
