#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vos/datagen.hpp"
#include "vos/density.hpp"
#include "vos/losses.hpp"
#include "vos/network.hpp"

namespace vos {

/// Everything a training run needs. The uncertainty regularizer switches on
/// at iteration Z = start_iter when start_iter >= 0, else
/// ceil(start_fraction * total_iters); before that only the classification
/// term is applied.
struct RunConfig {
    std::size_t total_iters = 600;
    long long start_iter = -1;         // -1: use start_fraction
    double start_fraction = 2.0 / 3.0;
    double beta = 0.1;
    std::size_t t = 1;                 // outliers per class per step
    std::size_t pool_size = 10000;     // M
    std::size_t queue_capacity = 1000; // |Q_k|
    double ridge = 1e-4;
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 128;
    LossMode mode;
    std::uint64_t seed = 0;
    NetworkConfig net;
    /// Baseline ablation: draw N(0, noise_scale^2 I) feature noise instead of
    /// fitting Gaussians and sampling low-likelihood outliers.
    bool noise_outliers = false;
    double noise_scale = 1.0;
    std::size_t log_interval = 10;

    std::size_t resolved_start_iter() const;
    void validate() const;
};

/// v <- momentum * v + grad;  p <- p - lr * v   (classic momentum SGD).
void sgd_update(std::vector<double>& params, const ParamGradients& grads,
                std::vector<double>& velocity, double learning_rate, double momentum);

/// Single-threaded, fully deterministic training loop.
///
/// RNG discipline: one root stream is seeded from config.seed and split, in
/// this order, into (1) the parameter-init stream, (2) the batch-shuffle
/// stream, (3) the synthesis stream. Synthesis draws therefore never perturb
/// batch order, and a run with beta = 0 is bitwise identical to a plain
/// cross-entropy run under the same seed.
///
/// Each step: draw the next slice of the current seeded epoch permutation;
/// when the regularizer is active (iteration >= Z and beta > 0), push the
/// batch's features into the per-class queues, refit the tied-covariance
/// Gaussians over every class with >= 2 queued samples (classes below that
/// are warned about once and skipped), synthesize t outliers per usable
/// class in ascending class order, and apply the full objective; finally one
/// momentum-SGD update. In KPlusOne mode the outliers join the batch under
/// the extra label instead of feeding an uncertainty term.
class Trainer {
public:
    Trainer(RunConfig config, std::vector<LabeledExample> data);

    /// One iteration. Throws std::runtime_error naming the offending term if
    /// the loss goes non-finite.
    LossReport step();

    /// Runs the remaining iterations; returns the metrics log: a header line
    /// `iter,cls_loss,unc_loss,total_loss` then one line per log interval
    /// with the interval means, all values printed with %.17g.
    std::string run();

    const RunConfig& config() const { return config_; }
    const Model& model() const { return model_; }
    Model& model() { return model_; }
    std::size_t iteration() const { return iteration_; }
    const std::vector<ClassQueue>& queues() const { return queues_; }

private:
    Batch next_batch();
    std::vector<Vector> make_outliers();

    RunConfig config_;
    std::vector<LabeledExample> data_;
    Model model_;
    RngState data_rng_;
    RngState synth_rng_;
    std::vector<ClassQueue> queues_;
    std::vector<double> velocity_;
    std::vector<std::size_t> perm_;
    std::size_t cursor_ = 0;
    std::size_t iteration_ = 0;
    std::size_t start_resolved_ = 0;
    std::vector<bool> warned_degenerate_;
};

/// Full Algorithm-1 run: train on `data` per `config`, return the final model
/// and write the metrics log to `metrics_log` when non-null.
Model train(const RunConfig& config, const std::vector<LabeledExample>& data,
            std::string* metrics_log = nullptr);

}  // namespace vos
