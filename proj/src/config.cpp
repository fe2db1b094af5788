#include "gd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gd/io.hpp"

namespace gd {

NeighborConfig PipelineConfig::neighbor_config() const {
    return NeighborConfig{resolved_e(), neighbor_k, neighbor_w};
}

PretrainConfig PipelineConfig::pretrain_config() const {
    PretrainConfig cfg;
    cfg.epochs = pretrain_epochs;
    cfg.batch_size = pretrain_batch_size;
    cfg.lr = pretrain_lr;
    cfg.momentum = pretrain_momentum;
    cfg.ema_momentum = pretrain_ema_momentum;
    cfg.neighbor = neighbor_config();
    cfg.augment = augment_policy;
    cfg.seed = seed;
    cfg.encoder = EncoderSpec{{data_dim, hidden_dim, embed_dim}, activation};
    cfg.head.projector_widths = {embed_dim, 2 * embed_dim, 2 * embed_dim, 4 * embed_dim};
    cfg.head.student_temp = student_temp;
    cfg.head.teacher_temp = teacher_temp;
    return cfg;
}

GnnStack PipelineConfig::gnn_stack() const {
    return GnnStack{gnn_layer, gnn_depth, gnn_hidden, Activation::Relu, gnn_jk};
}

RefineConfig PipelineConfig::refine_config() const {
    RefineConfig cfg;
    cfg.epochs = refine_epochs;
    cfg.lr = refine_lr;
    cfg.momentum = refine_momentum;
    cfg.ema_momentum = refine_ema_momentum;
    cfg.seed = seed;
    cfg.symmetrize = refine_symmetrize;
    return cfg;
}

void PipelineConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ValidationError(field + ": " + why);
    };
    if (data_n_per_class < 1) fail("data.n_per_class", "must be >= 1");
    if (data_class_count < 1) fail("data.class_count", "must be >= 1");
    if (data_dim < 1) fail("data.dim", "must be >= 1");
    if (!(data_spread > 0.0)) fail("data.spread", "must be > 0");
    if (pretrain_epochs < 1) fail("pretrain.epochs", "must be >= 1");
    if (pretrain_batch_size < 1) fail("pretrain.batch_size", "must be >= 1");
    if (!(pretrain_lr > 0.0)) fail("pretrain.lr", "must be > 0");
    if (pretrain_momentum < 0.0 || pretrain_momentum >= 1.0)
        fail("pretrain.momentum", "must be in [0, 1)");
    if (pretrain_ema_momentum < 0.0 || pretrain_ema_momentum > 1.0)
        fail("pretrain.ema_momentum", "must be in [0, 1]");
    if (!(student_temp > 0.0)) fail("pretrain.student_temp", "must be > 0");
    if (!(teacher_temp > 0.0)) fail("pretrain.teacher_temp", "must be > 0");
    if (teacher_temp >= student_temp)
        fail("pretrain.teacher_temp", "must be < pretrain.student_temp");
    if (hidden_dim < 1) fail("pretrain.hidden_dim", "must be >= 1");
    if (embed_dim < 1) fail("pretrain.embed_dim", "must be >= 1");
    if (neighbor_k < 1) fail("neighbor.k", "must be >= 1");
    if (neighbor_w < 1) fail("neighbor.w", "must be >= 1");
    if (resolved_e() <= neighbor_k) fail("neighbor.k", "must be < neighbor.e");
    const std::size_t n = data_n_per_class * data_class_count;
    if (n < static_cast<std::size_t>(resolved_e()) + 1)
        fail("neighbor.e", "dataset too small for e neighbors");
    if (augment_policy.gaussian_sigma < 0.0) fail("augment.sigma", "must be >= 0");
    if (augment_policy.mask_fraction < 0.0 || augment_policy.mask_fraction >= 1.0)
        fail("augment.mask_fraction", "must be in [0, 1)");
    if (augment_policy.scale_jitter < 0.0) fail("augment.scale_jitter", "must be >= 0");
    if (gnn_depth < 1) fail("gnn.depth", "must be >= 1");
    if (gnn_hidden < 1) fail("gnn.hidden", "must be >= 1");
    if (refine_epochs < 1) fail("refine.epochs", "must be >= 1");
    if (!(refine_lr > 0.0)) fail("refine.lr", "must be > 0");
    if (refine_momentum < 0.0 || refine_momentum >= 1.0)
        fail("refine.momentum", "must be in [0, 1)");
    if (refine_ema_momentum < 0.0 || refine_ema_momentum > 1.0)
        fail("refine.ema_momentum", "must be in [0, 1]");
    if (probe_epochs < 1) fail("probe.epochs", "must be >= 1");
    if (!(probe_lr > 0.0)) fail("probe.lr", "must be > 0");
    if (probe_train_fraction <= 0.0 || probe_train_fraction >= 1.0)
        fail("probe.train_fraction", "must be in (0, 1)");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& why) {
    throw ParseError("line " + std::to_string(line) + ": " + why);
}

std::uint64_t parse_u64(const std::string& v, std::size_t line) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        std::uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        parse_fail(line, "expected unsigned integer, got '" + v + "'");
    }
}

double parse_f64(const std::string& v, std::size_t line) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(out)) throw std::invalid_argument("bad");
        return out;
    } catch (const std::exception&) {
        parse_fail(line, "expected real number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    parse_fail(line, "expected true/false, got '" + v + "'");
}

}  // namespace

std::string to_string(GnnLayerKind kind) {
    switch (kind) {
        case GnnLayerKind::GCN: return "gcn";
        case GnnLayerKind::GAT: return "gat";
        case GnnLayerKind::SAGE: return "sage";
        case GnnLayerKind::GIN: return "gin";
    }
    return "?";
}

std::string to_string(JkMode mode) {
    switch (mode) {
        case JkMode::Disabled: return "disabled";
        case JkMode::Sum: return "sum";
        case JkMode::Max: return "max";
        case JkMode::Concat: return "concat";
    }
    return "?";
}

PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) parse_fail(lineno, "expected 'section.key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) parse_fail(lineno, "empty key or value");

        if (key == "data.n_per_class") cfg.data_n_per_class = parse_u64(value, lineno);
        else if (key == "data.class_count") cfg.data_class_count = parse_u64(value, lineno);
        else if (key == "data.dim") cfg.data_dim = parse_u64(value, lineno);
        else if (key == "data.spread") cfg.data_spread = parse_f64(value, lineno);
        else if (key == "pretrain.epochs") cfg.pretrain_epochs = parse_u64(value, lineno);
        else if (key == "pretrain.batch_size") cfg.pretrain_batch_size = parse_u64(value, lineno);
        else if (key == "pretrain.lr") cfg.pretrain_lr = parse_f64(value, lineno);
        else if (key == "pretrain.momentum") cfg.pretrain_momentum = parse_f64(value, lineno);
        else if (key == "pretrain.ema_momentum")
            cfg.pretrain_ema_momentum = parse_f64(value, lineno);
        else if (key == "pretrain.student_temp") cfg.student_temp = parse_f64(value, lineno);
        else if (key == "pretrain.teacher_temp") cfg.teacher_temp = parse_f64(value, lineno);
        else if (key == "pretrain.hidden_dim") cfg.hidden_dim = parse_u64(value, lineno);
        else if (key == "pretrain.embed_dim") cfg.embed_dim = parse_u64(value, lineno);
        else if (key == "pretrain.activation") {
            if (value == "tanh") cfg.activation = Activation::Tanh;
            else if (value == "relu") cfg.activation = Activation::Relu;
            else parse_fail(lineno, "pretrain.activation must be tanh or relu");
        } else if (key == "neighbor.e") cfg.neighbor_e = parse_u64(value, lineno);
        else if (key == "neighbor.k") cfg.neighbor_k = parse_u64(value, lineno);
        else if (key == "neighbor.w") cfg.neighbor_w = parse_u64(value, lineno);
        else if (key == "augment.sigma") cfg.augment_policy.gaussian_sigma = parse_f64(value, lineno);
        else if (key == "augment.mask_fraction")
            cfg.augment_policy.mask_fraction = parse_f64(value, lineno);
        else if (key == "augment.scale_jitter")
            cfg.augment_policy.scale_jitter = parse_f64(value, lineno);
        else if (key == "gnn.layer") {
            if (value == "gcn") cfg.gnn_layer = GnnLayerKind::GCN;
            else if (value == "gat") cfg.gnn_layer = GnnLayerKind::GAT;
            else if (value == "sage") cfg.gnn_layer = GnnLayerKind::SAGE;
            else if (value == "gin") cfg.gnn_layer = GnnLayerKind::GIN;
            else parse_fail(lineno, "gnn.layer must be one of gcn|gat|sage|gin");
        } else if (key == "gnn.depth") cfg.gnn_depth = parse_u64(value, lineno);
        else if (key == "gnn.hidden") cfg.gnn_hidden = parse_u64(value, lineno);
        else if (key == "gnn.jk") {
            if (value == "disabled") cfg.gnn_jk = JkMode::Disabled;
            else if (value == "sum") cfg.gnn_jk = JkMode::Sum;
            else if (value == "max") cfg.gnn_jk = JkMode::Max;
            else if (value == "concat") cfg.gnn_jk = JkMode::Concat;
            else parse_fail(lineno, "gnn.jk must be one of disabled|sum|max|concat");
        } else if (key == "refine.epochs") cfg.refine_epochs = parse_u64(value, lineno);
        else if (key == "refine.lr") cfg.refine_lr = parse_f64(value, lineno);
        else if (key == "refine.momentum") cfg.refine_momentum = parse_f64(value, lineno);
        else if (key == "refine.ema_momentum")
            cfg.refine_ema_momentum = parse_f64(value, lineno);
        else if (key == "refine.symmetrize") cfg.refine_symmetrize = parse_bool(value, lineno);
        else if (key == "probe.epochs") cfg.probe_epochs = parse_u64(value, lineno);
        else if (key == "probe.lr") cfg.probe_lr = parse_f64(value, lineno);
        else if (key == "probe.train_fraction")
            cfg.probe_train_fraction = parse_f64(value, lineno);
        else if (key == "probe.input") {
            if (value == "refined") cfg.probe_input = ProbeInput::Refined;
            else if (value == "student") cfg.probe_input = ProbeInput::Student;
            else if (value == "teacher") cfg.probe_input = ProbeInput::Teacher;
            else if (value == "raw") cfg.probe_input = ProbeInput::Raw;
            else parse_fail(lineno, "probe.input must be refined|student|teacher|raw");
        } else if (key == "run.seed") cfg.seed = parse_u64(value, lineno);
        else if (key == "run.out_dir") cfg.out_dir = value;
        else parse_fail(lineno, "unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

PipelineConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace gd
