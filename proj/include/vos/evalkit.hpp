#pragma once

#include <string>
#include <vector>

#include "vos/mathkit.hpp"
#include "vos/network.hpp"

namespace vos {

struct ScoredSample {
    double score = 0.0;  // higher = more ID
    bool is_id = false;
};

struct MetricsReport {
    double fpr95 = 0.0;
    double auroc = 0.0;
    double aupr = 0.0;
    double gamma = 0.0;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;

    /// Flat `key = value` lines, values with 17 significant digits.
    std::string to_text() const;
};

/// Probabilistic ID score sigmoid(-phi(E(x))) in (0, 1); higher = more ID.
double ood_score(const Model& model, const Vector& x);

/// Baseline: maximum softmax posterior over the classification head.
double msp_score(const Model& model, const Vector& x);

/// Baseline: negative free energy with unit weights, i.e. logsumexp(f(x)).
double raw_energy_score(const Model& model, const Vector& x);

/// Largest threshold gamma with fraction(id_scores >= gamma) >= target_tpr,
/// found by exhaustive sweep over the distinct ID scores. Ties at the
/// threshold count as ID (the boundary is inclusive).
double choose_gamma(const std::vector<double>& id_scores, double target_tpr = 0.95);

/// 1 when score >= gamma (inclusive boundary), else 0.
int classify(double score, double gamma);

/// Fraction of ood_scores admitted at choose_gamma(id_scores, tpr).
double fpr_at_tpr(const std::vector<double>& id_scores, const std::vector<double>& ood_scores,
                  double target_tpr = 0.95);

/// Mann-Whitney AUROC: P(ID > OOD) + 0.5 * P(tie), via rank sums with
/// midrank tie handling.
double auroc(const std::vector<double>& id_scores, const std::vector<double>& ood_scores);

/// Area under precision-recall by step interpolation over the score sweep.
/// ID is the positive class by default; with id_positive = false the OOD set
/// is positive and lower scores count as detections.
double aupr(const std::vector<double>& id_scores, const std::vector<double>& ood_scores,
            bool id_positive = true);

MetricsReport compute_metrics(const std::vector<double>& id_scores,
                              const std::vector<double>& ood_scores,
                              double target_tpr = 0.95);

/// Score-dump files: header `score,is_id`, one `%.17g,%d` row per sample.
void write_scores(const std::string& path, const std::vector<ScoredSample>& samples);
std::vector<ScoredSample> read_scores(const std::string& path);

}  // namespace vos
