#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gd/cli.hpp"
#include "gd/config.hpp"
#include "gd/dataset.hpp"
#include "gd/gnn.hpp"
#include "gd/io.hpp"
#include "gd/losses.hpp"
#include "gd/neighbor_store.hpp"
#include "gd/pretrain.hpp"
#include "gd/probe.hpp"

namespace py = pybind11;
using namespace gd;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ShapeMismatch("expected a 2-D float array");
    std::vector<double> data(a.data(), a.data() + a.size());
    return Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                  std::move(data));
}

py::array_t<double> numpy_from_matrix(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data(), m.data() + m.size(), out.mutable_data());
    return out;
}

std::vector<std::uint32_t> indices_from_list(const std::vector<std::uint64_t>& v) {
    return std::vector<std::uint32_t>(v.begin(), v.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Self-distillation pretraining with KNN-graph refinement";

    py::register_exception<FileError>(m, "FileError", PyExc_IOError);
    py::register_exception<InvalidInput>(m, "InvalidInputError", PyExc_ValueError);

    // core numerics
    m.def("cosine_similarity",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              return cosine_similarity(std::span<const double>(a), std::span<const double>(b));
          });
    m.def("softmax",
          [](const std::vector<double>& s, double temperature) { return softmax(s, temperature); },
          py::arg("scores"), py::arg("temperature") = 1.0);
    m.def("cross_entropy", [](const std::vector<double>& t, const std::vector<double>& s) {
        return cross_entropy(std::span<const double>(t), std::span<const double>(s));
    });
    m.def("cosine_distance_loss", [](const std::vector<double>& s, const std::vector<double>& t) {
        return cosine_distance_loss(std::span<const double>(s), std::span<const double>(t));
    });

    // data pipeline
    m.def("gen_clusters",
          [](std::size_t n_per_class, std::size_t class_count, std::size_t dim, double spread,
             std::uint64_t seed) {
              LabeledDataset ds = gen_clusters(n_per_class, class_count, dim, spread, seed);
              py::array_t<std::uint32_t> labels(ds.labels.size());
              std::copy(ds.labels.begin(), ds.labels.end(), labels.mutable_data());
              return py::make_tuple(numpy_from_matrix(ds.features), labels, ds.class_count);
          },
          py::arg("n_per_class"), py::arg("class_count"), py::arg("dim"), py::arg("spread"),
          py::arg("seed"));
    m.def("augment",
          [](const std::vector<double>& x, double sigma, double mask_fraction, double jitter,
             std::uint64_t seed) {
              SeededRng rng(seed);
              return augment(x, AugmentPolicy{sigma, mask_fraction, jitter}, rng);
          },
          py::arg("x"), py::arg("gaussian_sigma"), py::arg("mask_fraction"),
          py::arg("scale_jitter"), py::arg("seed"));
    m.def("save_embeddings",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
             const std::string& path) { save_embeddings(matrix_from_numpy(a), path); });
    m.def("load_embeddings",
          [](const std::string& path) { return numpy_from_matrix(load_embeddings(path)); });

    // neighbor tracking
    py::class_<NeighborConfig>(m, "NeighborConfig")
        .def(py::init([](std::uint32_t e, std::uint32_t k, std::uint32_t w) {
                 NeighborConfig c{e, k, w};
                 c.validate();
                 return c;
             }),
             py::arg("e"), py::arg("k"), py::arg("w"))
        .def_readonly("e", &NeighborConfig::e)
        .def_readonly("k", &NeighborConfig::k)
        .def_readonly("w", &NeighborConfig::w);

    m.def("topk_neighbors",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& emb,
             std::uint32_t anchor, std::uint32_t e) {
              AnchorNeighbors out = topk_neighbors(matrix_from_numpy(emb), anchor, e);
              std::vector<std::pair<std::uint32_t, double>> pairs;
              for (const Neighbor& nb : out.neighbors) pairs.emplace_back(nb.id, nb.similarity);
              return py::make_tuple(pairs, out.top1_is_self);
          },
          py::arg("embeddings"), py::arg("anchor"), py::arg("e"));

    py::class_<CircularEdgeStore>(m, "CircularEdgeStore")
        .def(py::init([](const NeighborConfig& cfg, std::size_t n) {
                 return CircularEdgeStore(cfg, n);
             }),
             py::arg("config"), py::arg("n"))
        .def("push_epoch",
             [](CircularEdgeStore& store,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& emb,
                std::uint64_t epoch) {
                 store.push_epoch(topk_all(matrix_from_numpy(emb), store.config().e, epoch));
             },
             py::arg("embeddings"), py::arg("epoch"))
        .def("aggregate_scores",
             [](const CircularEdgeStore& store, std::uint32_t anchor) {
                 return store.aggregate_scores(anchor).scores;
             })
        .def("similarity_distribution",
             [](const CircularEdgeStore& store, std::uint32_t anchor) {
                 return similarity_distribution(store.aggregate_scores(anchor)).candidates;
             })
        .def_property_readonly("filled", &CircularEdgeStore::filled)
        .def_property_readonly("node_count", &CircularEdgeStore::node_count)
        .def("save", py::overload_cast<const std::string&>(&CircularEdgeStore::save, py::const_))
        .def_static("load",
                    py::overload_cast<const std::string&>(&CircularEdgeStore::load));

    py::class_<KnnGraph>(m, "KnnGraph")
        .def_static("build", &KnnGraph::build)
        .def_property_readonly("node_count", &KnnGraph::node_count)
        .def_property_readonly("edge_count", &KnnGraph::edge_count)
        .def("edges",
             [](const KnnGraph& g) {
                 std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> out;
                 for (const Edge& e : g.edges()) out.emplace_back(e.src, e.dst, e.weight);
                 return out;
             })
        .def("out_neighbors",
             [](const KnnGraph& g, std::uint32_t v) {
                 std::vector<std::pair<std::uint32_t, double>> out;
                 for (const Edge& e : g.out_neighbors(v)) out.emplace_back(e.dst, e.weight);
                 return out;
             })
        .def("stats",
             [](const KnnGraph& g) {
                 GraphStats st = g.stats();
                 py::dict d;
                 d["node_count"] = st.node_count;
                 d["edge_count"] = st.edge_count;
                 d["min_out_degree"] = st.min_out_degree;
                 d["mean_out_degree"] = st.mean_out_degree;
                 d["max_out_degree"] = st.max_out_degree;
                 d["component_count"] = st.component_count;
                 return d;
             })
        .def("save", py::overload_cast<const std::string&>(&KnnGraph::save, py::const_))
        .def_static("load", py::overload_cast<const std::string&>(&KnnGraph::load));

    // pretraining
    py::class_<PretrainConfig>(m, "PretrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &PretrainConfig::epochs)
        .def_readwrite("batch_size", &PretrainConfig::batch_size)
        .def_readwrite("lr", &PretrainConfig::lr)
        .def_readwrite("momentum", &PretrainConfig::momentum)
        .def_readwrite("ema_momentum", &PretrainConfig::ema_momentum)
        .def_readwrite("neighbor", &PretrainConfig::neighbor)
        .def_readwrite("seed", &PretrainConfig::seed)
        .def_property(
            "encoder_widths",
            [](const PretrainConfig& c) { return c.encoder.widths; },
            [](PretrainConfig& c, std::vector<std::size_t> w) { c.encoder.widths = std::move(w); })
        .def_property(
            "projector_widths",
            [](const PretrainConfig& c) { return c.head.projector_widths; },
            [](PretrainConfig& c, std::vector<std::size_t> w) {
                c.head.projector_widths = std::move(w);
            })
        .def_property(
            "student_temp", [](const PretrainConfig& c) { return c.head.student_temp; },
            [](PretrainConfig& c, double v) { c.head.student_temp = v; })
        .def_property(
            "teacher_temp", [](const PretrainConfig& c) { return c.head.teacher_temp; },
            [](PretrainConfig& c, double v) { c.head.teacher_temp = v; })
        .def_property(
            "augment_sigma", [](const PretrainConfig& c) { return c.augment.gaussian_sigma; },
            [](PretrainConfig& c, double v) { c.augment.gaussian_sigma = v; });

    py::class_<TrainArtifacts>(m, "TrainArtifacts")
        .def_property_readonly(
            "teacher_embeddings",
            [](const TrainArtifacts& a) { return numpy_from_matrix(a.teacher_embeddings); })
        .def_property_readonly(
            "student_embeddings",
            [](const TrainArtifacts& a) { return numpy_from_matrix(a.student_embeddings); })
        .def_readonly("teacher_graph", &TrainArtifacts::teacher_graph)
        .def_readonly("student_graph", &TrainArtifacts::student_graph)
        .def_readonly("loss_curve", &TrainArtifacts::loss_curve)
        .def_readonly("mode_log", &TrainArtifacts::mode_log);

    m.def("run_pretrain",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
             const PretrainConfig& cfg) { return run_pretrain(matrix_from_numpy(features), cfg); },
          py::arg("features"), py::arg("config"));

    // refinement
    py::enum_<GnnLayerKind>(m, "GnnLayerKind")
        .value("GCN", GnnLayerKind::GCN)
        .value("GAT", GnnLayerKind::GAT)
        .value("SAGE", GnnLayerKind::SAGE)
        .value("GIN", GnnLayerKind::GIN);
    py::enum_<JkMode>(m, "JkMode")
        .value("DISABLED", JkMode::Disabled)
        .value("SUM", JkMode::Sum)
        .value("MAX", JkMode::Max)
        .value("CONCAT", JkMode::Concat);

    py::class_<GnnStack>(m, "GnnStack")
        .def(py::init<>())
        .def_readwrite("kind", &GnnStack::kind)
        .def_readwrite("depth", &GnnStack::depth)
        .def_readwrite("hidden", &GnnStack::hidden)
        .def_readwrite("jk", &GnnStack::jk);

    py::class_<RefineConfig>(m, "RefineConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &RefineConfig::epochs)
        .def_readwrite("lr", &RefineConfig::lr)
        .def_readwrite("momentum", &RefineConfig::momentum)
        .def_readwrite("ema_momentum", &RefineConfig::ema_momentum)
        .def_readwrite("seed", &RefineConfig::seed)
        .def_readwrite("symmetrize", &RefineConfig::symmetrize);

    m.def("run_refine",
          [](const TrainArtifacts& artifacts, const GnnStack& stack, const RefineConfig& cfg) {
              RefinedEmbeddings out = run_refine(artifacts, stack, cfg);
              return py::make_tuple(numpy_from_matrix(out.values), out.loss_curve);
          },
          py::arg("artifacts"), py::arg("stack"), py::arg("config"));

    // evaluation
    py::class_<ProbeReport>(m, "ProbeReport")
        .def_readonly("train_accuracy", &ProbeReport::train_accuracy)
        .def_readonly("val_accuracy", &ProbeReport::val_accuracy)
        .def_readonly("epochs", &ProbeReport::epochs)
        .def_readonly("final_loss", &ProbeReport::final_loss);

    m.def("make_split",
          [](std::size_t n, double train_fraction, std::uint64_t seed) {
              Split s = make_split(n, train_fraction, seed);
              return py::make_tuple(s.train, s.val);
          },
          py::arg("n"), py::arg("train_fraction"), py::arg("seed"));
    m.def("train_linear_probe",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
             const std::vector<std::uint64_t>& labels, const std::vector<std::uint64_t>& train_idx,
             const std::vector<std::uint64_t>& val_idx, std::uint32_t epochs, double lr) {
              Split split{indices_from_list(train_idx), indices_from_list(val_idx)};
              return train_linear_probe(matrix_from_numpy(features), indices_from_list(labels),
                                        split, epochs, lr);
          },
          py::arg("features"), py::arg("labels"), py::arg("train_idx"), py::arg("val_idx"),
          py::arg("epochs") = 500, py::arg("lr") = 0.1);
    m.def("knn_eval",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& features,
             const std::vector<std::uint64_t>& labels, const std::vector<std::uint64_t>& train_idx,
             const std::vector<std::uint64_t>& val_idx, std::uint32_t k_eval) {
              Split split{indices_from_list(train_idx), indices_from_list(val_idx)};
              return knn_eval(matrix_from_numpy(features), indices_from_list(labels), split,
                              k_eval);
          },
          py::arg("features"), py::arg("labels"), py::arg("train_idx"), py::arg("val_idx"),
          py::arg("k_eval"));

    m.def("cli_run", &cli_run, py::arg("args"),
          "Run a CLI invocation; returns the process exit code");
}
