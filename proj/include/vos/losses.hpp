#pragma once

#include <functional>
#include <vector>

#include "vos/mathkit.hpp"
#include "vos/network.hpp"

namespace vos {

/// Which uncertainty objective a run trains with. Exactly one mode is active
/// per run; the hinge margins only apply to SquaredHinge.
struct LossMode {
    enum class Kind { VosLogistic, SquaredHinge, ConstantW, KPlusOne };

    Kind kind = Kind::VosLogistic;
    double hinge_m_in = -25.0;
    double hinge_m_out = -7.0;

    static LossMode vos_logistic() { return {}; }
    static LossMode squared_hinge(double m_in, double m_out);
    static LossMode constant_w() { return {Kind::ConstantW}; }
    static LossMode kplus1() { return {Kind::KPlusOne}; }

    /// Energy uses softplus(w_raw) except in ConstantW, where w is fixed at 1.
    bool learnable_w() const { return kind != Kind::ConstantW; }
    bool uses_phi() const { return kind == Kind::VosLogistic || kind == Kind::ConstantW; }
};

/// Per-step loss decomposition; total == cls + beta * uncertainty exactly
/// in every mode with a separate uncertainty term.
struct LossReport {
    double total = 0.0;
    double cls = 0.0;
    double uncertainty = 0.0;
    double beta = 0.0;
};

/// A labeled mini-batch in input space.
struct Batch {
    std::vector<Vector> inputs;
    std::vector<int> labels;
};

/// -log softmax(f)[y], computed as logsumexp(f) - f[y].
double cross_entropy(const Vector& logits, int label);

/// Logistic level-set objective on energies:
///   mean over outliers of -log sigmoid(phi(E_v))
/// + mean over ID      of -log sigmoid(-phi(E_x)).
/// Both lists must be non-empty. Strictly positive; equals 2 ln 2 when phi
/// is identically zero.
double uncertainty_loss(const std::vector<double>& id_energies,
                        const std::vector<double>& outlier_energies,
                        const std::function<double(double)>& phi);

/// Squared-hinge alternative with margins m_in < m_out:
///   mean over ID of max(0, E - m_in)^2 + mean over outliers of max(0, m_out - E)^2.
double hinge_uncertainty_loss(const std::vector<double>& id_energies,
                              const std::vector<double>& outlier_energies, double m_in,
                              double m_out);

/// Cross-entropy over a head widened by one class; outliers carry label K.
double kplus1_cross_entropy(const Vector& extended_logits, int extended_label);

/// Full objective for one step: classification term over the ID batch plus
/// the mode's uncertainty term over (batch, outlier features), weighted by
/// beta. `outlier_features` may be empty (no regularization this step); in
/// KPlusOne mode the outliers instead join the classification batch with the
/// extra-class label and the uncertainty field is reported as 0.
LossReport total_loss(const Model& model, const Batch& batch,
                      const std::vector<Vector>& outlier_features, const LossMode& mode,
                      double beta);

/// Same objective with exact reverse-mode gradients accumulated into `grads`
/// (must be zero-initialized with Model::zero_gradients or compatible).
LossReport total_loss_and_gradients(const Model& model, const Batch& batch,
                                    const std::vector<Vector>& outlier_features,
                                    const LossMode& mode, double beta, ParamGradients& grads);

}  // namespace vos
