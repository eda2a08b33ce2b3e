#include "vos/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace vos {

namespace {

struct KeyInfo {
    const char* key;
    const char* def;
    const char* doc;
};

// The whole configuration surface. Every key has a default; anything else is
// rejected. Keep docs to one line -- they feed --help.
const KeyInfo kKeys[] = {
    {"data.seed", "1", "base dataset seed (validation uses seed+1, OOD stream seed+2)"},
    {"data.classes", "3", "number of ID classes K"},
    {"data.dim", "2", "input dimension d"},
    {"data.mean_radius", "4", "class means sit on this circle at even angles"},
    {"data.cov_scale", "0.5", "shared ID covariance = cov_scale * I"},
    {"data.n_per_class", "500", "training points per class"},
    {"data.n_val_per_class", "200", "validation points per class"},
    {"data.n_ood", "1000", "OOD evaluation points"},
    {"data.ood_shape", "annulus", "annulus | box"},
    {"data.ood_r_min", "8", "annulus inner radius"},
    {"data.ood_r_max", "12", "annulus outer radius"},
    {"data.ood_box_half_width", "12", "box OOD: half width of [-w, w]^d"},
    {"net.hidden", "128,128", "comma-separated backbone hidden widths"},
    {"net.feature_dim", "64", "penultimate feature dimension m"},
    {"net.phi_hidden", "512", "hidden width of the scalar uncertainty head"},
    {"net.cls_bias", "false", "add a bias to the classification head"},
    {"train.iters", "600", "total training iterations"},
    {"train.start_iter", "-1", "absolute regularizer start Z; -1 defers to train.start_fraction"},
    {"train.start_fraction", "0.66666666666666663", "Z = ceil(fraction * iters) when start_iter = -1"},
    {"train.beta", "0.1", "uncertainty loss weight"},
    {"train.lr", "0.1", "SGD learning rate"},
    {"train.momentum", "0.9", "SGD momentum"},
    {"train.batch_size", "128", "mini-batch size"},
    {"train.queue_capacity", "1000", "per-class feature queue capacity |Q_k|"},
    {"train.ridge", "0.0001", "diagonal ridge added to the fitted covariance"},
    {"train.seed", "0", "training seed (init, shuffling, synthesis)"},
    {"train.mode", "vos", "vos | hinge | constant_w | kplus1"},
    {"train.hinge_m_in", "-25", "hinge mode: ID energy margin"},
    {"train.hinge_m_out", "-7", "hinge mode: outlier energy margin"},
    {"train.log_interval", "10", "iterations per metrics-log line"},
    {"synthesis.t", "1", "outliers kept per class per step (t-th smallest likelihood)"},
    {"synthesis.pool_size", "10000", "candidate pool size M per class"},
    {"synthesis.source", "model", "model (fitted Gaussians) | noise (N(0, scale^2 I))"},
    {"synthesis.noise_scale", "1", "scale of the noise-outlier ablation"},
    {"eval.target_tpr", "0.95", "ID true-positive rate the threshold is chosen for"},
    {"plot.x_min", "-12", "heatmap window"},
    {"plot.x_max", "12", "heatmap window"},
    {"plot.y_min", "-12", "heatmap window"},
    {"plot.y_max", "12", "heatmap window"},
    {"plot.resolution", "200", "heatmap points per axis"},
    {"plot.level", "0.5", "contour level for the optional SVG boundary"},
};
constexpr std::size_t kNumKeys = sizeof(kKeys) / sizeof(kKeys[0]);

std::size_t key_index(const std::string& key) {
    for (std::size_t i = 0; i < kNumKeys; ++i) {
        if (key == kKeys[i].key) return i;
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string leaf_of(const std::string& key) {
    auto dot = key.rfind('.');
    return dot == std::string::npos ? key : key.substr(dot + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    }
    return v;
}

long long parse_int(const std::string& key, const std::string& value) {
    char* end = nullptr;
    long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0') {
        throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
    }
    return v;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::string cur;
    auto flush = [&]() {
        cur = trim(cur);
        if (cur.empty()) {
            throw std::invalid_argument("config key '" + key + "': empty list entry");
        }
        long long v = parse_int(key, cur);
        if (v < 1) throw std::invalid_argument("config key '" + key + "': entries must be >= 1");
        out.push_back(static_cast<std::size_t>(v));
        cur.clear();
    };
    for (char c : value) {
        if (c == ',') flush();
        else cur.push_back(c);
    }
    flush();
    return out;
}

}  // namespace

Config::Config() {
    values_.reserve(kNumKeys);
    for (std::size_t i = 0; i < kNumKeys; ++i) values_.push_back(kKeys[i].def);
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key_index(key)] = value;
}

const std::string& Config::raw(const std::string& key) const { return values_[key_index(key)]; }

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ": line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        try {
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ": line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
}

std::string Config::resolve_key(const std::string& name) const {
    if (name.find('.') != std::string::npos) {
        key_index(name);  // existence check
        return name;
    }
    std::string match;
    for (std::size_t i = 0; i < kNumKeys; ++i) {
        if (leaf_of(kKeys[i].key) == name) {
            if (!match.empty()) {
                throw std::invalid_argument("config key '" + name + "' is ambiguous (" + match +
                                            " vs " + kKeys[i].key + "); use the dotted form");
            }
            match = kKeys[i].key;
        }
    }
    if (match.empty()) throw std::invalid_argument("unknown config key '" + name + "'");
    return match;
}

double Config::get_double(const std::string& key) const { return parse_double(key, raw(key)); }

long long Config::get_int(const std::string& key) const { return parse_int(key, raw(key)); }

std::size_t Config::get_size(const std::string& key) const {
    long long v = get_int(key);
    if (v < 0) throw std::invalid_argument("config key '" + key + "': must be >= 0");
    return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string& value = raw(key);
    char* end = nullptr;
    unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || value.front() == '-') {
        throw std::invalid_argument("config key '" + key + "': bad unsigned '" + value + "'");
    }
    return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = raw(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config key '" + key + "': bad bool '" + v + "'");
}

const std::string& Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::dump() const {
    std::string out;
    for (std::size_t i = 0; i < kNumKeys; ++i) {
        out += kKeys[i].key;
        out += " = ";
        out += values_[i];
        out += '\n';
    }
    return out;
}

std::string Config::describe_keys() {
    std::string out;
    for (std::size_t i = 0; i < kNumKeys; ++i) {
        out += "  ";
        out += kKeys[i].key;
        out += " (default ";
        out += kKeys[i].def;
        out += "): ";
        out += kKeys[i].doc;
        out += '\n';
    }
    return out;
}

DatasetSpec Config::dataset_spec() const {
    DatasetSpec spec;
    spec.num_classes = get_size("data.classes");
    spec.dim = get_size("data.dim");
    if (spec.dim < 2) throw std::invalid_argument("config: data.dim must be >= 2");
    const double radius = get_double("data.mean_radius");
    spec.means.clear();
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        // Even spacing on a circle in the first two coordinates.
        double angle = 2.0 * 3.14159265358979323846 * static_cast<double>(k) /
                       static_cast<double>(spec.num_classes);
        Vector mean(spec.dim, 0.0);
        mean[0] = radius * std::cos(angle);
        mean[1] = radius * std::sin(angle);
        spec.means.push_back(std::move(mean));
    }
    const double cov_scale = get_double("data.cov_scale");
    Matrix cov(spec.dim, spec.dim);
    for (std::size_t i = 0; i < spec.dim; ++i) cov(i, i) = cov_scale;
    spec.covs = {cov};
    spec.n_per_class = get_size("data.n_per_class");
    spec.seed = get_u64("data.seed");
    const std::string& shape = get_string("data.ood_shape");
    if (shape == "annulus") spec.ood.shape = OodSpec::Shape::Annulus;
    else if (shape == "box") spec.ood.shape = OodSpec::Shape::Box;
    else throw std::invalid_argument("config key 'data.ood_shape': expected annulus or box");
    spec.ood.r_min = get_double("data.ood_r_min");
    spec.ood.r_max = get_double("data.ood_r_max");
    spec.ood.box_half_width = get_double("data.ood_box_half_width");
    spec.ood.n = get_size("data.n_ood");
    return spec;
}

RunConfig Config::run_config(std::size_t input_dim) const {
    RunConfig rc;
    rc.total_iters = get_size("train.iters");
    rc.start_iter = get_int("train.start_iter");
    rc.start_fraction = get_double("train.start_fraction");
    rc.beta = get_double("train.beta");
    rc.t = get_size("synthesis.t");
    rc.pool_size = get_size("synthesis.pool_size");
    rc.queue_capacity = get_size("train.queue_capacity");
    rc.ridge = get_double("train.ridge");
    rc.learning_rate = get_double("train.lr");
    rc.momentum = get_double("train.momentum");
    rc.batch_size = get_size("train.batch_size");
    rc.seed = get_u64("train.seed");
    rc.log_interval = get_size("train.log_interval");

    const std::string& mode = get_string("train.mode");
    if (mode == "vos") rc.mode = LossMode::vos_logistic();
    else if (mode == "hinge")
        rc.mode = LossMode::squared_hinge(get_double("train.hinge_m_in"),
                                          get_double("train.hinge_m_out"));
    else if (mode == "constant_w") rc.mode = LossMode::constant_w();
    else if (mode == "kplus1") rc.mode = LossMode::kplus1();
    else
        throw std::invalid_argument(
            "config key 'train.mode': expected vos, hinge, constant_w or kplus1");

    const std::string& source = get_string("synthesis.source");
    if (source == "noise") rc.noise_outliers = true;
    else if (source != "model")
        throw std::invalid_argument("config key 'synthesis.source': expected model or noise");
    rc.noise_scale = get_double("synthesis.noise_scale");

    rc.net.backbone_sizes.clear();
    rc.net.backbone_sizes.push_back(input_dim);
    for (std::size_t w : parse_size_list("net.hidden", get_string("net.hidden"))) {
        rc.net.backbone_sizes.push_back(w);
    }
    rc.net.backbone_sizes.push_back(get_size("net.feature_dim"));
    rc.net.num_classes = get_size("data.classes");
    rc.net.extra_class = rc.mode.kind == LossMode::Kind::KPlusOne;
    rc.net.phi_hidden = get_size("net.phi_hidden");
    rc.net.cls_bias = get_bool("net.cls_bias");
    return rc;
}

GridSpec Config::grid_spec() const {
    GridSpec grid;
    grid.x_min = get_double("plot.x_min");
    grid.x_max = get_double("plot.x_max");
    grid.y_min = get_double("plot.y_min");
    grid.y_max = get_double("plot.y_max");
    grid.resolution = get_size("plot.resolution");
    return grid;
}

double Config::target_tpr() const { return get_double("eval.target_tpr"); }

}  // namespace vos
