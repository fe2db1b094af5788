#pragma once

#include <string>
#include <vector>

#include "gd/config.hpp"
#include "gd/probe.hpp"

namespace gd {

// Fixed file names inside the run's output directory.
struct RunPaths {
    std::string dir;

    std::string dataset() const { return dir + "/dataset.gdem"; }
    std::string labels() const { return dir + "/labels.gdlb"; }
    std::string teacher_embeddings() const { return dir + "/teacher_embeddings.gdem"; }
    std::string student_embeddings() const { return dir + "/student_embeddings.gdem"; }
    std::string teacher_graph() const { return dir + "/teacher_graph.gdgr"; }
    std::string student_graph() const { return dir + "/student_graph.gdgr"; }
    std::string teacher_store() const { return dir + "/teacher_store.gdns"; }
    std::string student_store() const { return dir + "/student_store.gdns"; }
    std::string pretrain_log() const { return dir + "/pretrain_log.csv"; }
    std::string refined() const { return dir + "/refined.gdem"; }
    std::string refine_log() const { return dir + "/refine_log.csv"; }
    std::string probe_report() const { return dir + "/probe_report.csv"; }
    std::string ablate_report() const { return dir + "/ablate.csv"; }
};

std::string format_double(double v);  // shortest round-trip text, CSV cell

void stage_synth(const PipelineConfig& cfg, bool quiet);
void stage_pretrain(const PipelineConfig& cfg, bool quiet);
void stage_refine(const PipelineConfig& cfg, bool quiet);
ProbeReport stage_probe(const PipelineConfig& cfg, bool quiet);
ProbeReport run_pipeline(const PipelineConfig& cfg, bool quiet);

enum class SweepKind { KW, Layer, JK };
void run_ablate(const PipelineConfig& cfg, SweepKind sweep, bool quiet);

}  // namespace gd
