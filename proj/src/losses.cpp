#include "vos/losses.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace vos {

LossMode LossMode::squared_hinge(double m_in, double m_out) {
    if (!(m_in < m_out)) {
        throw std::invalid_argument("squared_hinge: requires m_in < m_out");
    }
    LossMode m;
    m.kind = Kind::SquaredHinge;
    m.hinge_m_in = m_in;
    m.hinge_m_out = m_out;
    return m;
}

double cross_entropy(const Vector& logits, int label) {
    if (logits.empty()) {
        throw std::invalid_argument("cross_entropy: empty logits");
    }
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw std::invalid_argument("cross_entropy: label out of range");
    }
    return logsumexp(logits) - logits[static_cast<std::size_t>(label)];
}

double uncertainty_loss(const std::vector<double>& id_energies,
                        const std::vector<double>& outlier_energies,
                        const std::function<double(double)>& phi) {
    if (id_energies.empty() || outlier_energies.empty()) {
        throw std::invalid_argument("uncertainty_loss: both energy lists must be non-empty");
    }
    // -log sigmoid(z) == softplus(-z)
    double out_sum = 0.0;
    for (double e : outlier_energies) out_sum += softplus(-phi(e));
    double id_sum = 0.0;
    for (double e : id_energies) id_sum += softplus(phi(e));
    return out_sum / static_cast<double>(outlier_energies.size()) +
           id_sum / static_cast<double>(id_energies.size());
}

double hinge_uncertainty_loss(const std::vector<double>& id_energies,
                              const std::vector<double>& outlier_energies, double m_in,
                              double m_out) {
    if (!(m_in < m_out)) {
        throw std::invalid_argument("hinge_uncertainty_loss: requires m_in < m_out");
    }
    if (id_energies.empty() || outlier_energies.empty()) {
        throw std::invalid_argument(
            "hinge_uncertainty_loss: both energy lists must be non-empty");
    }
    double id_sum = 0.0;
    for (double e : id_energies) {
        double v = std::max(0.0, e - m_in);
        id_sum += v * v;
    }
    double out_sum = 0.0;
    for (double e : outlier_energies) {
        double v = std::max(0.0, m_out - e);
        out_sum += v * v;
    }
    return id_sum / static_cast<double>(id_energies.size()) +
           out_sum / static_cast<double>(outlier_energies.size());
}

double kplus1_cross_entropy(const Vector& extended_logits, int extended_label) {
    return cross_entropy(extended_logits, extended_label);
}

namespace {

// Shared forward (+ optional backward) pass; total_loss and
// total_loss_and_gradients must agree bit for bit, so both call this.
LossReport evaluate(const Model& model, const Batch& batch,
                    const std::vector<Vector>& outlier_features, const LossMode& mode,
                    double beta, ParamGradients* grads) {
    if (batch.inputs.size() != batch.labels.size()) {
        throw std::invalid_argument("total_loss: inputs/labels size mismatch");
    }
    if (batch.inputs.empty()) {
        throw std::invalid_argument("total_loss: batch must be non-empty");
    }
    const bool kplus1 = mode.kind == LossMode::Kind::KPlusOne;
    if (kplus1 != model.config().extra_class) {
        throw std::invalid_argument(
            kplus1 ? "total_loss: KPlusOne mode needs a model with the extra class"
                   : "total_loss: model has an extra class but mode is not KPlusOne");
    }

    LossReport report;
    report.beta = beta;

    const std::size_t num_id = batch.inputs.size();
    const std::size_t num_out = outlier_features.size();
    const double id_scale = 1.0 / static_cast<double>(num_id);

    if (kplus1) {
        // Combined-batch cross-entropy; outliers take the extra label K.
        const double denom = static_cast<double>(num_id + num_out);
        const int outlier_label = static_cast<int>(model.config().num_classes);
        double cls_sum = 0.0;
        for (std::size_t i = 0; i < num_id; ++i) {
            Model::FeatureTrace tr;
            Vector h = model.features(batch.inputs[i], grads ? &tr : nullptr);
            Vector f = model.logits(h);
            cls_sum += cross_entropy(f, batch.labels[i]);
            if (grads) {
                Vector grad_f = softmax_posterior(f);
                grad_f[static_cast<std::size_t>(batch.labels[i])] -= 1.0;
                for (double& g : grad_f) g /= denom;
                Vector grad_h;
                model.backprop_logits(h, grad_f, *grads, &grad_h);
                model.backprop_features(tr, grad_h, *grads);
            }
        }
        for (const Vector& v : outlier_features) {
            Vector f = model.logits(v);
            cls_sum += cross_entropy(f, outlier_label);
            if (grads) {
                Vector grad_f = softmax_posterior(f);
                grad_f[static_cast<std::size_t>(outlier_label)] -= 1.0;
                for (double& g : grad_f) g /= denom;
                model.backprop_logits(v, grad_f, *grads, nullptr);
            }
        }
        report.cls = cls_sum / denom;
        report.uncertainty = 0.0;
        report.total = report.cls;
        return report;
    }

    const bool unc_active = num_out > 0;
    const bool learnable = mode.learnable_w();
    const double out_scale = unc_active ? 1.0 / static_cast<double>(num_out) : 0.0;

    double cls_sum = 0.0;
    double id_unc_sum = 0.0;
    for (std::size_t i = 0; i < num_id; ++i) {
        Model::FeatureTrace tr;
        Vector h = model.features(batch.inputs[i], grads ? &tr : nullptr);
        Vector f = model.logits(h);
        cls_sum += cross_entropy(f, batch.labels[i]);

        Vector grad_f;
        if (grads) {
            grad_f = softmax_posterior(f);
            grad_f[static_cast<std::size_t>(batch.labels[i])] -= 1.0;
            for (double& g : grad_f) g *= id_scale;
        }

        if (unc_active) {
            const double e = model.energy(f, learnable);
            double upstream_e = 0.0;  // d(beta * uncertainty)/dE for this sample
            if (mode.uses_phi()) {
                Model::PhiTrace pt;
                const double p = model.phi(e, grads ? &pt : nullptr);
                id_unc_sum += softplus(p);
                if (grads) {
                    upstream_e =
                        model.backprop_phi(pt, beta * id_scale * sigmoid(p), *grads);
                }
            } else {
                const double slack = std::max(0.0, e - mode.hinge_m_in);
                id_unc_sum += slack * slack;
                upstream_e = beta * id_scale * 2.0 * slack;
            }
            if (grads) {
                model.energy_backward(f, upstream_e, learnable, grad_f, *grads);
            }
        }

        if (grads) {
            Vector grad_h;
            model.backprop_logits(h, grad_f, *grads, &grad_h);
            model.backprop_features(tr, grad_h, *grads);
        }
    }

    double out_unc_sum = 0.0;
    for (const Vector& v : outlier_features) {
        Vector f = model.logits(v);
        const double e = model.energy(f, learnable);
        double upstream_e = 0.0;
        if (mode.uses_phi()) {
            Model::PhiTrace pt;
            const double p = model.phi(e, grads ? &pt : nullptr);
            out_unc_sum += softplus(-p);
            if (grads) {
                // d softplus(-p)/dp = -sigmoid(-p)
                upstream_e =
                    model.backprop_phi(pt, -beta * out_scale * sigmoid(-p), *grads);
            }
        } else {
            const double slack = std::max(0.0, mode.hinge_m_out - e);
            out_unc_sum += slack * slack;
            upstream_e = -beta * out_scale * 2.0 * slack;
        }
        if (grads) {
            Vector grad_f(f.size(), 0.0);
            model.energy_backward(f, upstream_e, learnable, grad_f, *grads);
            model.backprop_logits(v, grad_f, *grads, nullptr);
        }
    }

    report.cls = cls_sum * id_scale;
    report.uncertainty = unc_active ? id_unc_sum * id_scale + out_unc_sum * out_scale : 0.0;
    report.total = report.cls + beta * report.uncertainty;
    return report;
}

}  // namespace

LossReport total_loss(const Model& model, const Batch& batch,
                      const std::vector<Vector>& outlier_features, const LossMode& mode,
                      double beta) {
    return evaluate(model, batch, outlier_features, mode, beta, nullptr);
}

LossReport total_loss_and_gradients(const Model& model, const Batch& batch,
                                    const std::vector<Vector>& outlier_features,
                                    const LossMode& mode, double beta,
                                    ParamGradients& grads) {
    if (grads.size() != model.num_params()) {
        throw std::invalid_argument("total_loss_and_gradients: gradient buffer size mismatch");
    }
    return evaluate(model, batch, outlier_features, mode, beta, &grads);
}

}  // namespace vos
