#include "vos/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vos {

void NetworkConfig::validate() const {
    if (backbone_sizes.size() < 2)
        throw std::invalid_argument("NetworkConfig: backbone needs at least [input, feature] sizes");
    for (std::size_t s : backbone_sizes)
        if (s == 0) throw std::invalid_argument("NetworkConfig: zero layer size");
    if (num_classes < 2) throw std::invalid_argument("NetworkConfig: need at least 2 classes");
    if (phi_hidden == 0) throw std::invalid_argument("NetworkConfig: phi_hidden must be >= 1");
}

Model::Model(NetworkConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build_layout();
}

void Model::build_layout() {
    std::size_t offset = 0;
    auto add = [&](const std::string& name, std::size_t size) {
        TensorRange r{offset, size};
        layout_.emplace_back(name, r);
        offset += size;
        return r;
    };
    const auto& sizes = cfg_.backbone_sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        bb_w_.push_back(add("backbone.w" + std::to_string(l), sizes[l + 1] * sizes[l]));
        bb_b_.push_back(add("backbone.b" + std::to_string(l), sizes[l + 1]));
    }
    const std::size_t m = cfg_.feature_dim();
    const std::size_t width = cfg_.head_width();
    w_cls_ = add("w_cls", m * width);
    cls_bias_ = cfg_.cls_bias ? add("cls_bias", width) : TensorRange{offset, 0};
    w_raw_ = add("w_raw", width);
    phi_w1_ = add("phi.w1", cfg_.phi_hidden);
    phi_b1_ = add("phi.b1", cfg_.phi_hidden);
    phi_w2_ = add("phi.w2", cfg_.phi_hidden);
    phi_b2_ = add("phi.b2", 1);
    params_.assign(offset, 0.0);
}

TensorRange Model::range(const std::string& name) const {
    for (const auto& [n, r] : layout_)
        if (n == name) return r;
    throw std::invalid_argument("Model: unknown tensor '" + name + "'");
}

Model Model::init(NetworkConfig cfg, RngState& rng) {
    Model model(std::move(cfg));
    auto fill_uniform = [&](TensorRange r, std::size_t fan_in, std::size_t fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < r.size; ++i)
            model.params_[r.offset + i] = (2.0 * rng.next_uniform() - 1.0) * limit;
    };
    const auto& sizes = model.cfg_.backbone_sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
        fill_uniform(model.bb_w_[l], sizes[l], sizes[l + 1]);
    fill_uniform(model.w_cls_, model.cfg_.feature_dim(), model.cfg_.head_width());
    const double w_raw_init = softplus_inverse(1.0);
    for (std::size_t i = 0; i < model.w_raw_.size; ++i)
        model.params_[model.w_raw_.offset + i] = w_raw_init;
    fill_uniform(model.phi_w1_, 1, model.cfg_.phi_hidden);
    fill_uniform(model.phi_w2_, model.cfg_.phi_hidden, 1);
    return model;
}

Vector Model::features(const Vector& x, FeatureTrace* trace) const {
    if (x.size() != cfg_.input_dim())
        throw std::invalid_argument("Model: input dimension mismatch");
    const auto& sizes = cfg_.backbone_sizes;
    const std::size_t num_layers = sizes.size() - 1;
    Vector act = x;
    if (trace) {
        trace->activations.clear();
        trace->pre.clear();
        trace->activations.push_back(act);
    }
    for (std::size_t l = 0; l < num_layers; ++l) {
        const double* w = tensor(bb_w_[l]);
        const double* b = tensor(bb_b_[l]);
        const std::size_t in = sizes[l], out = sizes[l + 1];
        Vector pre(out);
        for (std::size_t i = 0; i < out; ++i) {
            double s = b[i];
            const double* row = w + i * in;
            for (std::size_t j = 0; j < in; ++j) s += row[j] * act[j];
            pre[i] = s;
        }
        if (trace) trace->pre.push_back(pre);
        if (l + 1 < num_layers)
            for (double& v : pre) v = std::max(0.0, v);
        act = std::move(pre);
        if (trace) trace->activations.push_back(act);
    }
    return act;
}

Vector Model::logits(const Vector& h) const {
    const std::size_t m = cfg_.feature_dim();
    if (h.size() != m) throw std::invalid_argument("Model: feature dimension mismatch");
    const std::size_t width = cfg_.head_width();
    const double* w = tensor(w_cls_);
    Vector f(width, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double hi = h[i];
        const double* row = w + i * width;
        for (std::size_t k = 0; k < width; ++k) f[k] += row[k] * hi;
    }
    if (cfg_.cls_bias) {
        const double* b = tensor(cls_bias_);
        for (std::size_t k = 0; k < width; ++k) f[k] += b[k];
    }
    return f;
}

Vector Model::effective_w() const {
    Vector w(w_raw_.size);
    const double* raw = tensor(w_raw_);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = softplus(raw[k]);
    return w;
}

double Model::energy(const Vector& f, bool learnable_w) const {
    if (f.size() != cfg_.head_width())
        throw std::invalid_argument("Model: logits dimension mismatch");
    if (!learnable_w) return -logsumexp(f);
    return -logsumexp_weighted(f, effective_w());
}

double Model::phi(double e, PhiTrace* trace) const {
    const std::size_t hidden = cfg_.phi_hidden;
    const double* w1 = tensor(phi_w1_);
    const double* b1 = tensor(phi_b1_);
    const double* w2 = tensor(phi_w2_);
    const double b2 = *tensor(phi_b2_);
    if (trace) {
        trace->input = e;
        trace->pre.resize(hidden);
    }
    double out = b2;
    for (std::size_t i = 0; i < hidden; ++i) {
        const double pre = w1[i] * e + b1[i];
        if (trace) trace->pre[i] = pre;
        if (pre > 0.0) out += w2[i] * pre;
    }
    return out;
}

void Model::backprop_features(const FeatureTrace& trace, const Vector& grad_h,
                              ParamGradients& grads) const {
    const auto& sizes = cfg_.backbone_sizes;
    const std::size_t num_layers = sizes.size() - 1;
    Vector delta = grad_h;  // dL/d(pre) of the current layer once masked
    for (std::size_t l = num_layers; l-- > 0;) {
        if (l + 1 < num_layers) {
            // ReLU mask from the cached pre-activations
            const Vector& pre = trace.pre[l];
            for (std::size_t i = 0; i < delta.size(); ++i)
                if (pre[i] <= 0.0) delta[i] = 0.0;
        }
        const Vector& input = trace.activations[l];
        const std::size_t in = sizes[l], out = sizes[l + 1];
        double* gw = grads.data() + bb_w_[l].offset;
        double* gb = grads.data() + bb_b_[l].offset;
        for (std::size_t i = 0; i < out; ++i) {
            const double di = delta[i];
            gb[i] += di;
            double* grow = gw + i * in;
            for (std::size_t j = 0; j < in; ++j) grow[j] += di * input[j];
        }
        if (l > 0) {
            const double* w = tensor(bb_w_[l]);
            Vector next(in, 0.0);
            for (std::size_t i = 0; i < out; ++i) {
                const double di = delta[i];
                const double* row = w + i * in;
                for (std::size_t j = 0; j < in; ++j) next[j] += row[j] * di;
            }
            delta = std::move(next);
        }
    }
}

void Model::backprop_logits(const Vector& h, const Vector& grad_f, ParamGradients& grads,
                            Vector* grad_h) const {
    const std::size_t m = cfg_.feature_dim();
    const std::size_t width = cfg_.head_width();
    double* gw = grads.data() + w_cls_.offset;
    for (std::size_t i = 0; i < m; ++i) {
        const double hi = h[i];
        double* grow = gw + i * width;
        for (std::size_t k = 0; k < width; ++k) grow[k] += hi * grad_f[k];
    }
    if (cfg_.cls_bias) {
        double* gb = grads.data() + cls_bias_.offset;
        for (std::size_t k = 0; k < width; ++k) gb[k] += grad_f[k];
    }
    if (grad_h) {
        grad_h->assign(m, 0.0);
        const double* w = tensor(w_cls_);
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = w + i * width;
            double s = 0.0;
            for (std::size_t k = 0; k < width; ++k) s += row[k] * grad_f[k];
            (*grad_h)[i] = s;
        }
    }
}

double Model::energy_backward(const Vector& f, double upstream, bool learnable_w,
                              Vector& grad_f, ParamGradients& grads) const {
    const std::size_t width = cfg_.head_width();
    if (f.size() != width) throw std::invalid_argument("Model: logits dimension mismatch");
    const double* raw = tensor(w_raw_);
    Vector log_w(width, 0.0);
    if (learnable_w)
        for (std::size_t k = 0; k < width; ++k) log_w[k] = std::log(softplus(raw[k]));
    Vector shifted(width);
    for (std::size_t k = 0; k < width; ++k) shifted[k] = f[k] + log_w[k];
    const double log_sum = logsumexp(shifted);
    // dE/df_k = -w_k e^{f_k} / S; dE/dw_raw_k = -(e^{f_k} / S) * sigmoid(w_raw_k)
    for (std::size_t k = 0; k < width; ++k) {
        const double soft = std::exp(shifted[k] - log_sum);
        grad_f[k] += upstream * (-soft);
        if (learnable_w)
            grads[w_raw_.offset + k] +=
                upstream * (-std::exp(f[k] - log_sum) * sigmoid(raw[k]));
    }
    return -log_sum;
}

double Model::backprop_phi(const PhiTrace& trace, double upstream, ParamGradients& grads) const {
    const std::size_t hidden = cfg_.phi_hidden;
    const double* w1 = tensor(phi_w1_);
    const double* w2 = tensor(phi_w2_);
    double* g_w1 = grads.data() + phi_w1_.offset;
    double* g_b1 = grads.data() + phi_b1_.offset;
    double* g_w2 = grads.data() + phi_w2_.offset;
    grads[phi_b2_.offset] += upstream;
    double grad_input = 0.0;
    for (std::size_t i = 0; i < hidden; ++i) {
        const double pre = trace.pre[i];
        if (pre > 0.0) {
            g_w2[i] += upstream * pre;
            const double d_pre = upstream * w2[i];
            g_w1[i] += d_pre * trace.input;
            g_b1[i] += d_pre;
            grad_input += d_pre * w1[i];
        }
    }
    return grad_input;
}

Vector softmax_posterior(const Vector& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax_posterior: empty logits");
    const double shift = *std::max_element(logits.begin(), logits.end());
    Vector p(logits.size());
    double total = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        p[k] = std::exp(logits[k] - shift);
        total += p[k];
    }
    for (double& v : p) v /= total;
    return p;
}

// ---- checkpoint I/O ----

namespace {

constexpr char kMagic[8] = {'V', 'O', 'S', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
public:
    explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                    << (8 * i);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    void expect_magic() {
        need(8);
        if (std::memcmp(bytes_.data(), kMagic, 8) != 0)
            throw std::runtime_error("checkpoint: bad magic (not a VOSCKPT1 file)");
        pos_ = 8;
    }
    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw std::runtime_error("checkpoint: truncated file");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_bytes(const Model& model) {
    const NetworkConfig& cfg = model.config();
    std::string out;
    out.append(kMagic, 8);
    put_u32(out, static_cast<std::uint32_t>(cfg.backbone_sizes.size()));
    for (std::size_t s : cfg.backbone_sizes) put_u32(out, static_cast<std::uint32_t>(s));
    put_u32(out, static_cast<std::uint32_t>(cfg.num_classes));
    put_u32(out, static_cast<std::uint32_t>(cfg.head_width()));
    put_u32(out, static_cast<std::uint32_t>(cfg.feature_dim()));
    put_u32(out, static_cast<std::uint32_t>(cfg.phi_hidden));
    put_u32(out, cfg.cls_bias ? 1u : 0u);
    for (double v : model.params()) put_f64(out, v);
    return out;
}

Model model_from_checkpoint_bytes(const std::string& bytes) {
    ByteReader reader(bytes);
    reader.expect_magic();
    NetworkConfig cfg;
    const std::uint32_t num_sizes = reader.u32();
    if (num_sizes < 2 || num_sizes > 64) throw std::runtime_error("checkpoint: bad layer count");
    cfg.backbone_sizes.clear();
    for (std::uint32_t i = 0; i < num_sizes; ++i) cfg.backbone_sizes.push_back(reader.u32());
    cfg.num_classes = reader.u32();
    const std::uint32_t head_width = reader.u32();
    const std::uint32_t feature_dim = reader.u32();
    cfg.phi_hidden = reader.u32();
    cfg.cls_bias = reader.u32() != 0;
    if (head_width == cfg.num_classes + 1)
        cfg.extra_class = true;
    else if (head_width != cfg.num_classes)
        throw std::runtime_error("checkpoint: inconsistent head width");
    if (feature_dim != cfg.backbone_sizes.back())
        throw std::runtime_error("checkpoint: inconsistent feature dim");
    Model model(cfg);
    for (double& v : model.params()) v = reader.f64();
    if (!reader.exhausted()) throw std::runtime_error("checkpoint: trailing bytes");
    return model;
}

void save_checkpoint(const std::string& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    const std::string bytes = checkpoint_bytes(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_checkpoint_bytes(bytes);
}

}  // namespace vos
