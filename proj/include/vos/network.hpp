#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vos/mathkit.hpp"

namespace vos {

/// Architecture of the learnable model.
struct NetworkConfig {
    /// Backbone layer sizes [d, hidden..., m]; ReLU after every layer except
    /// the last, whose linear output is the feature vector h(x).
    std::vector<std::size_t> backbone_sizes{2, 128, 128, 64};
    std::size_t num_classes = 3;  // K
    /// Widens the classification head by one column (outlier class ablation).
    bool extra_class = false;
    std::size_t phi_hidden = 512;
    /// Adds a bias to the classification head (off by default: f = W_cls^T h).
    bool cls_bias = false;

    std::size_t input_dim() const { return backbone_sizes.front(); }
    std::size_t feature_dim() const { return backbone_sizes.back(); }
    std::size_t head_width() const { return num_classes + (extra_class ? 1 : 0); }

    void validate() const;
};

/// Gradient buffer with the same flat layout as Model's parameters.
using ParamGradients = std::vector<double>;

struct TensorRange {
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// The full learnable model: MLP backbone producing features h(x), linear
/// classification head, energy weights (stored pre-softplus so the effective
/// weights stay positive), and the scalar uncertainty head phi.
///
/// All parameters live in one flat vector, in declaration order:
///   backbone W0 (out x in, row-major), b0, W1, b1, ..., W_cls (m x head_width,
///   row-major), [cls_bias], w_raw, phi_w1 (hidden x 1), phi_b1, phi_w2
///   (1 x hidden), phi_b2.
/// This order is also the checkpoint tensor order.
class Model {
public:
    explicit Model(NetworkConfig cfg);

    /// Seeded initialization: every weight entry is one uniform draw in
    /// +-sqrt(6 / (fan_in + fan_out)), consumed in flat layout order; biases
    /// are zero; w_raw entries start at softplus_inverse(1) so the energy
    /// begins exactly at the constant-weight form.
    static Model init(NetworkConfig cfg, RngState& rng);

    const NetworkConfig& config() const { return cfg_; }
    std::size_t num_params() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    /// Named tensor ranges into the flat parameter vector, in layout order.
    const std::vector<std::pair<std::string, TensorRange>>& tensor_layout() const {
        return layout_;
    }
    TensorRange range(const std::string& name) const;

    // ---- forward ----

    /// Cached intermediates of one backbone pass, consumed by backprop.
    struct FeatureTrace {
        std::vector<Vector> activations;  // [x, a1, ..., h]; h is the last
        std::vector<Vector> pre;          // pre-activation per layer
    };

    /// h(x). Throws std::invalid_argument on an input dimension mismatch.
    Vector features(const Vector& x, FeatureTrace* trace = nullptr) const;

    /// f = W_cls^T h (+ bias when enabled); length head_width.
    Vector logits(const Vector& h) const;

    /// Effective energy weights softplus(w_raw), all strictly positive.
    Vector effective_w() const;

    /// E(f) = -log sum_k w_k exp(f_k), with w = softplus(w_raw) when
    /// learnable_w, else w = 1 (in which case this is exactly -logsumexp(f)).
    double energy(const Vector& f, bool learnable_w = true) const;

    struct PhiTrace {
        double input = 0.0;
        Vector pre;  // hidden pre-activations
    };

    /// Scalar uncertainty head: ReLU MLP 1 -> phi_hidden -> 1.
    double phi(double e, PhiTrace* trace = nullptr) const;

    // ---- backward building blocks (all accumulate into `grads`) ----

    /// Backbone gradients given dL/dh; `trace` must come from features().
    void backprop_features(const FeatureTrace& trace, const Vector& grad_h,
                           ParamGradients& grads) const;

    /// Head gradients given dL/df; optionally yields dL/dh.
    void backprop_logits(const Vector& h, const Vector& grad_f, ParamGradients& grads,
                         Vector* grad_h) const;

    /// Adds upstream * dE/df into grad_f and (when learnable_w) the
    /// upstream * dE/dw_raw contribution into grads. Returns E(f).
    double energy_backward(const Vector& f, double upstream, bool learnable_w,
                           Vector& grad_f, ParamGradients& grads) const;

    /// Phi parameter gradients given dL/dphi; returns dL/d(input).
    double backprop_phi(const PhiTrace& trace, double upstream, ParamGradients& grads) const;

    ParamGradients zero_gradients() const { return ParamGradients(params_.size(), 0.0); }

private:
    NetworkConfig cfg_;
    std::vector<double> params_;
    std::vector<std::pair<std::string, TensorRange>> layout_;

    // cached ranges for the hot paths
    std::vector<TensorRange> bb_w_, bb_b_;
    TensorRange w_cls_, cls_bias_, w_raw_, phi_w1_, phi_b1_, phi_w2_, phi_b2_;

    void build_layout();
    const double* tensor(const TensorRange& r) const { return params_.data() + r.offset; }
};

/// Softmax with a max shift; entries are positive and sum to 1.
Vector softmax_posterior(const Vector& logits);

// ---- checkpoint I/O ----
//
// Flat binary layout, all integers little-endian:
//   bytes 0..7   magic "VOSCKPT1"
//   u32          number of backbone layer sizes
//   u32 each     backbone layer sizes [d, ..., m]
//   u32          K (number of classes)
//   u32          head width (K, or K+1 with the extra-class head)
//   u32          m (feature dim, redundant with the last layer size)
//   u32          phi hidden width
//   u32          cls_bias flag (0/1)
//   f64 each     parameters in declaration order (see Model)
// Round-trips are bit-exact.

std::string checkpoint_bytes(const Model& model);
Model model_from_checkpoint_bytes(const std::string& bytes);
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace vos
