#include "vos/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <stdexcept>

#include "vos/synthesis.hpp"

namespace vos {

std::size_t RunConfig::resolved_start_iter() const {
    if (start_iter >= 0) return static_cast<std::size_t>(start_iter);
    // The tiny backoff keeps ceil() from bumping an exact integer product
    // that rounded up in floating point (e.g. 2/3 * 600 -> 400).
    double z = std::ceil(start_fraction * static_cast<double>(total_iters) - 1e-9);
    return static_cast<std::size_t>(z < 0.0 ? 0.0 : z);
}

void RunConfig::validate() const {
    if (total_iters < 1) throw std::invalid_argument("run config: total_iters must be >= 1");
    if (resolved_start_iter() > total_iters) {
        throw std::invalid_argument("run config: start iteration exceeds total_iters");
    }
    if (start_iter < 0 && !(start_fraction >= 0.0 && start_fraction <= 1.0)) {
        throw std::invalid_argument("run config: start_fraction must be in [0, 1]");
    }
    if (!(beta >= 0.0)) throw std::invalid_argument("run config: beta must be >= 0");
    if (t < 1 || pool_size < 1 || queue_capacity < 1 || batch_size < 1 || log_interval < 1) {
        throw std::invalid_argument("run config: counts must be >= 1");
    }
    if (t > pool_size) throw std::invalid_argument("run config: t must be <= pool_size");
    if (!(ridge >= 0.0)) throw std::invalid_argument("run config: ridge must be >= 0");
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("run config: learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("run config: momentum must be in [0, 1)");
    }
    if (noise_outliers && !(noise_scale > 0.0)) {
        throw std::invalid_argument("run config: noise_scale must be positive");
    }
    if ((mode.kind == LossMode::Kind::KPlusOne) != net.extra_class) {
        throw std::invalid_argument("run config: KPlusOne mode and net.extra_class must agree");
    }
    net.validate();
}

void sgd_update(std::vector<double>& params, const ParamGradients& grads,
                std::vector<double>& velocity, double learning_rate, double momentum) {
    if (params.size() != grads.size() || params.size() != velocity.size()) {
        throw std::invalid_argument("sgd_update: size mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grads[i];
        params[i] -= learning_rate * velocity[i];
    }
}

namespace {

std::size_t draw_index(RngState& rng, std::size_t n) {
    std::size_t i = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(n));
    return i >= n ? n - 1 : i;
}

void make_streams(const RunConfig& cfg, Model& model_out, RngState& data_rng_out,
                  RngState& synth_rng_out) {
    RngState root(cfg.seed);
    RngState init_rng = root.split();
    model_out = Model::init(cfg.net, init_rng);
    data_rng_out = root.split();
    synth_rng_out = root.split();
}

}  // namespace

Trainer::Trainer(RunConfig config, std::vector<LabeledExample> data)
    : config_(std::move(config)),
      data_(std::move(data)),
      model_(NetworkConfig{}),
      data_rng_(0),
      synth_rng_(0) {
    config_.validate();
    if (data_.empty()) throw std::invalid_argument("trainer: empty dataset");
    const std::size_t k = config_.net.num_classes;
    std::vector<std::size_t> counts(k, 0);
    for (const LabeledExample& ex : data_) {
        if (ex.x.size() != config_.net.input_dim()) {
            throw std::invalid_argument("trainer: example dimension != net input dim");
        }
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= k) {
            throw std::invalid_argument("trainer: label out of range");
        }
        ++counts[static_cast<std::size_t>(ex.label)];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] < 2) {
            std::cerr << "warning: class " << c << " has " << counts[c]
                      << " training samples; its outliers will be skipped\n";
        }
    }

    make_streams(config_, model_, data_rng_, synth_rng_);
    start_resolved_ = config_.resolved_start_iter();
    velocity_.assign(model_.num_params(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        queues_.emplace_back(static_cast<int>(c), config_.queue_capacity,
                             config_.net.feature_dim());
    }
    warned_degenerate_.assign(k, false);
    perm_.resize(data_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = i;
    cursor_ = perm_.size();  // forces a shuffle on the first batch
}

Batch Trainer::next_batch() {
    if (cursor_ >= perm_.size()) {
        // Fresh seeded epoch permutation (Fisher-Yates).
        for (std::size_t i = perm_.size() - 1; i > 0; --i) {
            std::size_t j = draw_index(data_rng_, i + 1);
            std::swap(perm_[i], perm_[j]);
        }
        cursor_ = 0;
    }
    std::size_t end = std::min(cursor_ + config_.batch_size, perm_.size());
    Batch batch;
    batch.inputs.reserve(end - cursor_);
    batch.labels.reserve(end - cursor_);
    for (std::size_t i = cursor_; i < end; ++i) {
        batch.inputs.push_back(data_[perm_[i]].x);
        batch.labels.push_back(data_[perm_[i]].label);
    }
    cursor_ = end;
    return batch;
}

std::vector<Vector> Trainer::make_outliers() {
    const std::size_t k = config_.net.num_classes;
    if (config_.noise_outliers) {
        return gaussian_noise_outliers(config_.net.feature_dim(), k * config_.t,
                                       config_.noise_scale, synth_rng_);
    }

    std::vector<const std::deque<Vector>*> usable;
    std::vector<std::size_t> usable_classes;
    for (std::size_t c = 0; c < k; ++c) {
        if (queues_[c].size() >= 2) {
            usable.push_back(&queues_[c].buffer());
            usable_classes.push_back(c);
        } else if (!warned_degenerate_[c]) {
            std::cerr << "warning: iteration " << iteration_ << ": class " << c
                      << " has < 2 queued features; skipping its outliers\n";
            warned_degenerate_[c] = true;
        }
    }
    std::vector<Vector> outliers;
    if (usable.empty()) return outliers;
    GaussianModel gm = estimate_gaussian_model(usable, config_.ridge);
    outliers.reserve(usable.size() * config_.t);
    for (std::size_t idx = 0; idx < usable.size(); ++idx) {
        OutlierBatch ob = synthesize(gm, static_cast<int>(idx), config_.pool_size,
                                     config_.t, synth_rng_);
        for (Vector& v : ob.outliers) outliers.push_back(std::move(v));
    }
    return outliers;
}

LossReport Trainer::step() {
    if (iteration_ >= config_.total_iters) {
        throw std::logic_error("trainer: stepping past total_iters");
    }
    Batch batch = next_batch();

    const bool active = iteration_ >= start_resolved_ && config_.beta > 0.0;
    std::vector<Vector> outliers;
    if (active) {
        for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
            queues_[static_cast<std::size_t>(batch.labels[i])].enqueue(
                model_.features(batch.inputs[i]));
        }
        outliers = make_outliers();
    }

    ParamGradients grads = model_.zero_gradients();
    LossReport report =
        total_loss_and_gradients(model_, batch, outliers, config_.mode, config_.beta, grads);
    if (!std::isfinite(report.total)) {
        const char* term = !std::isfinite(report.cls) ? "classification"
                           : !std::isfinite(report.uncertainty) ? "uncertainty"
                                                                : "total";
        throw std::runtime_error("trainer: non-finite " + std::string(term) +
                                 " loss at iteration " + std::to_string(iteration_));
    }
    sgd_update(model_.params(), grads, velocity_, config_.learning_rate, config_.momentum);
    ++iteration_;
    return report;
}

std::string Trainer::run() {
    std::string log = "iter,cls_loss,unc_loss,total_loss\n";
    double acc_cls = 0.0, acc_unc = 0.0, acc_total = 0.0;
    std::size_t n = 0;
    char buf[96];
    while (iteration_ < config_.total_iters) {
        LossReport r = step();
        acc_cls += r.cls;
        acc_unc += r.uncertainty;
        acc_total += r.total;
        ++n;
        if (iteration_ % config_.log_interval == 0 || iteration_ == config_.total_iters) {
            double dn = static_cast<double>(n);
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", iteration_,
                          acc_cls / dn, acc_unc / dn, acc_total / dn);
            log += buf;
            acc_cls = acc_unc = acc_total = 0.0;
            n = 0;
        }
    }
    return log;
}

Model train(const RunConfig& config, const std::vector<LabeledExample>& data,
            std::string* metrics_log) {
    Trainer trainer(config, data);
    std::string log = trainer.run();
    if (metrics_log) *metrics_log = std::move(log);
    return std::move(trainer.model());
}

}  // namespace vos
