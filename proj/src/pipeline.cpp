#include "gd/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "gd/io.hpp"

namespace gd {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir);
}

void note(bool quiet, const std::string& msg) {
    if (!quiet) std::cout << msg << "\n";
}

TrainArtifacts load_artifacts(const RunPaths& paths) {
    TrainArtifacts art;
    art.teacher_embeddings = load_embeddings(paths.teacher_embeddings());
    art.student_embeddings = load_embeddings(paths.student_embeddings());
    art.teacher_graph = KnnGraph::load(paths.teacher_graph());
    art.student_graph = KnnGraph::load(paths.student_graph());
    return art;
}

}  // namespace

void stage_synth(const PipelineConfig& cfg, bool quiet) {
    cfg.validate();
    ensure_dir(cfg.out_dir);
    RunPaths paths{cfg.out_dir};
    LabeledDataset ds = gen_clusters(cfg.data_n_per_class, cfg.data_class_count, cfg.data_dim,
                                     cfg.data_spread, cfg.seed);
    save_embeddings(ds.features, paths.dataset());
    save_labels(ds.labels, ds.class_count, paths.labels());
    note(quiet, "synth: wrote " + std::to_string(ds.features.rows()) + " samples to " +
                    paths.dataset());
}

void stage_pretrain(const PipelineConfig& cfg, bool quiet) {
    cfg.validate();
    RunPaths paths{cfg.out_dir};
    // training touches only the feature file; labels stay on disk
    Matrix features = load_embeddings(paths.dataset());
    PretrainConfig pc = cfg.pretrain_config();
    pc.encoder.widths.front() = features.cols();
    TrainArtifacts art = run_pretrain(features, pc);

    save_embeddings(art.teacher_embeddings, paths.teacher_embeddings());
    save_embeddings(art.student_embeddings, paths.student_embeddings());
    art.teacher_graph.save(paths.teacher_graph());
    art.student_graph.save(paths.student_graph());
    art.teacher_store.save(paths.teacher_store());
    art.student_store.save(paths.student_store());

    std::ostringstream log;
    log << "epoch,loss,neighbor_mode_fraction\n";
    for (std::size_t i = 0; i < art.loss_curve.size(); ++i)
        log << i << "," << format_double(art.loss_curve[i]) << ","
            << format_double(art.mode_log[i]) << "\n";
    write_text_file(paths.pretrain_log(), log.str());
    note(quiet, "pretrain: " + std::to_string(pc.epochs) + " epochs, final loss " +
                    format_double(art.loss_curve.back()));
}

void stage_refine(const PipelineConfig& cfg, bool quiet) {
    cfg.validate();
    RunPaths paths{cfg.out_dir};
    TrainArtifacts art = load_artifacts(paths);
    RefinedEmbeddings refined = run_refine(art, cfg.gnn_stack(), cfg.refine_config());

    save_embeddings(refined.values, paths.refined());
    std::ostringstream log;
    log << "epoch,loss\n";
    for (std::size_t i = 0; i < refined.loss_curve.size(); ++i)
        log << i << "," << format_double(refined.loss_curve[i]) << "\n";
    write_text_file(paths.refine_log(), log.str());
    note(quiet, "refine: " + std::to_string(cfg.refine_epochs) + " epochs, final loss " +
                    format_double(refined.loss_curve.back()));
}

ProbeReport stage_probe(const PipelineConfig& cfg, bool quiet) {
    cfg.validate();
    RunPaths paths{cfg.out_dir};
    std::string source;
    switch (cfg.probe_input) {
        case ProbeInput::Refined: source = paths.refined(); break;
        case ProbeInput::Student: source = paths.student_embeddings(); break;
        case ProbeInput::Teacher: source = paths.teacher_embeddings(); break;
        case ProbeInput::Raw: source = paths.dataset(); break;
    }
    Matrix features = load_embeddings(source);
    LoadedLabels labels = load_labels(paths.labels());
    Split split = make_split(features.rows(), cfg.probe_train_fraction, cfg.seed);
    ProbeReport report =
        train_linear_probe(features, labels.labels, split, cfg.probe_epochs, cfg.probe_lr);

    std::ostringstream csv;
    csv << "train_accuracy,val_accuracy,epochs,final_loss\n";
    csv << format_double(report.train_accuracy) << "," << format_double(report.val_accuracy)
        << "," << report.epochs << "," << format_double(report.final_loss) << "\n";
    write_text_file(paths.probe_report(), csv.str());
    note(quiet, "probe: train accuracy " + format_double(report.train_accuracy) +
                    ", val accuracy " + format_double(report.val_accuracy));
    return report;
}

ProbeReport run_pipeline(const PipelineConfig& cfg, bool quiet) {
    stage_synth(cfg, quiet);
    stage_pretrain(cfg, quiet);
    stage_refine(cfg, quiet);
    return stage_probe(cfg, quiet);
}

void run_ablate(const PipelineConfig& cfg, SweepKind sweep, bool quiet) {
    cfg.validate();
    ensure_dir(cfg.out_dir);
    RunPaths paths{cfg.out_dir};

    struct Point {
        std::string param;
        std::string value;
        PipelineConfig cfg;
    };
    std::vector<Point> points;
    switch (sweep) {
        case SweepKind::KW: {
            const std::pair<std::uint32_t, std::uint32_t> kws[] = {{1, 15}, {2, 8}, {3, 5}, {4, 5}};
            for (auto [k, w] : kws) {
                PipelineConfig c = cfg;
                c.neighbor_k = k;
                c.neighbor_w = w;
                c.neighbor_e = 0;  // auto 4k
                points.push_back({"kw", "k" + std::to_string(k) + "w" + std::to_string(w), c});
            }
            break;
        }
        case SweepKind::Layer:
            for (GnnLayerKind kind : {GnnLayerKind::GCN, GnnLayerKind::GAT, GnnLayerKind::SAGE,
                                      GnnLayerKind::GIN}) {
                PipelineConfig c = cfg;
                c.gnn_layer = kind;
                points.push_back({"layer", to_string(kind), c});
            }
            break;
        case SweepKind::JK:
            for (JkMode mode : {JkMode::Disabled, JkMode::Sum, JkMode::Max, JkMode::Concat}) {
                PipelineConfig c = cfg;
                c.gnn_jk = mode;
                points.push_back({"jk", to_string(mode), c});
            }
            break;
    }

    std::ostringstream csv;
    csv << "param,value,probe_val_acc,seed\n";
    for (Point& p : points) {
        p.cfg.out_dir = cfg.out_dir + "/ablate_" + p.param + "_" + p.value;
        note(quiet, "ablate: " + p.param + "=" + p.value);
        ProbeReport report = run_pipeline(p.cfg, true);
        csv << p.param << "," << p.value << "," << format_double(report.val_accuracy) << ","
            << p.cfg.seed << "\n";
    }
    write_text_file(paths.ablate_report(), csv.str());
    note(quiet, "ablate: wrote " + paths.ablate_report());
}

}  // namespace gd
