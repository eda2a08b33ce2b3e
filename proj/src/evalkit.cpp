#include "vos/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace vos {

namespace {

void require_scores(const std::vector<double>& scores, const char* who) {
    if (scores.empty()) throw std::invalid_argument(std::string(who) + ": empty score list");
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument(std::string(who) + ": scores must be finite");
        }
    }
}

}  // namespace

std::string MetricsReport::to_text() const {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "fpr95 = %.17g\n", fpr95);
    out += buf;
    std::snprintf(buf, sizeof(buf), "auroc = %.17g\n", auroc);
    out += buf;
    std::snprintf(buf, sizeof(buf), "aupr = %.17g\n", aupr);
    out += buf;
    std::snprintf(buf, sizeof(buf), "gamma = %.17g\n", gamma);
    out += buf;
    std::snprintf(buf, sizeof(buf), "n_id = %zu\n", n_id);
    out += buf;
    std::snprintf(buf, sizeof(buf), "n_ood = %zu\n", n_ood);
    out += buf;
    return out;
}

double ood_score(const Model& model, const Vector& x) {
    Vector f = model.logits(model.features(x));
    return sigmoid(-model.phi(model.energy(f)));
}

double msp_score(const Model& model, const Vector& x) {
    Vector p = softmax_posterior(model.logits(model.features(x)));
    return *std::max_element(p.begin(), p.end());
}

double raw_energy_score(const Model& model, const Vector& x) {
    return logsumexp(model.logits(model.features(x)));
}

double choose_gamma(const std::vector<double>& id_scores, double target_tpr) {
    require_scores(id_scores, "choose_gamma");
    if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
        throw std::invalid_argument("choose_gamma: target_tpr must be in (0, 1]");
    }
    std::vector<double> sorted = id_scores;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const double n = static_cast<double>(sorted.size());
    // Walk the distinct values from high to low; admitted counts only grow,
    // so the first value reaching the target is the largest valid gamma.
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        if (static_cast<double>(i + 1) / n >= target_tpr) return sorted[i];
    }
    return sorted.back();
}

int classify(double score, double gamma) { return score >= gamma ? 1 : 0; }

double fpr_at_tpr(const std::vector<double>& id_scores, const std::vector<double>& ood_scores,
                  double target_tpr) {
    require_scores(ood_scores, "fpr_at_tpr");
    const double gamma = choose_gamma(id_scores, target_tpr);
    std::size_t fp = 0;
    for (double s : ood_scores) fp += static_cast<std::size_t>(classify(s, gamma));
    return static_cast<double>(fp) / static_cast<double>(ood_scores.size());
}

double auroc(const std::vector<double>& id_scores, const std::vector<double>& ood_scores) {
    require_scores(id_scores, "auroc");
    require_scores(ood_scores, "auroc");
    struct Entry {
        double score;
        bool is_id;
    };
    std::vector<Entry> all;
    all.reserve(id_scores.size() + ood_scores.size());
    for (double s : id_scores) all.push_back({s, true});
    for (double s : ood_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Rank sum over ID with midranks for ties.
    double id_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].is_id) id_rank_sum += midrank;
        }
        i = j;
    }
    const double n1 = static_cast<double>(id_scores.size());
    const double n0 = static_cast<double>(ood_scores.size());
    double u = id_rank_sum - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * n0);
}

double aupr(const std::vector<double>& id_scores, const std::vector<double>& ood_scores,
            bool id_positive) {
    require_scores(id_scores, "aupr");
    require_scores(ood_scores, "aupr");
    struct Entry {
        double stat;  // higher = more likely positive
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(id_scores.size() + ood_scores.size());
    for (double s : id_scores) all.push_back({id_positive ? s : -s, id_positive});
    for (double s : ood_scores) all.push_back({id_positive ? s : -s, !id_positive});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.stat > b.stat; });

    const double total_pos =
        static_cast<double>(id_positive ? id_scores.size() : ood_scores.size());
    double tp = 0.0, fp = 0.0, area = 0.0, prev_recall = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        // Tied statistics enter together: one step per distinct value.
        while (j < all.size() && all[j].stat == all[i].stat) {
            if (all[j].positive) tp += 1.0;
            else fp += 1.0;
            ++j;
        }
        if (tp > 0.0) {
            double recall = tp / total_pos;
            double precision = tp / (tp + fp);
            area += (recall - prev_recall) * precision;
            prev_recall = recall;
        }
        i = j;
    }
    return area;
}

MetricsReport compute_metrics(const std::vector<double>& id_scores,
                              const std::vector<double>& ood_scores, double target_tpr) {
    MetricsReport report;
    report.gamma = choose_gamma(id_scores, target_tpr);
    report.fpr95 = fpr_at_tpr(id_scores, ood_scores, target_tpr);
    report.auroc = auroc(id_scores, ood_scores);
    report.aupr = aupr(id_scores, ood_scores);
    report.n_id = id_scores.size();
    report.n_ood = ood_scores.size();
    return report;
}

void write_scores(const std::string& path, const std::vector<ScoredSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("write_scores: no samples");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_scores: cannot open " + path);
    out << "score,is_id\n";
    char buf[48];
    for (const ScoredSample& s : samples) {
        if (!std::isfinite(s.score)) throw std::invalid_argument("write_scores: non-finite score");
        std::snprintf(buf, sizeof(buf), "%.17g,%d\n", s.score, s.is_id ? 1 : 0);
        out << buf;
    }
    if (!out) throw std::runtime_error("write_scores: write failed for " + path);
}

std::vector<ScoredSample> read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_scores: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_scores: " + path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "score,is_id") {
        throw std::runtime_error(path + ": line 1: expected header score,is_id");
    }
    std::vector<ScoredSample> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": expected 2 fields");
        }
        std::string score_str = line.substr(0, comma);
        std::string flag_str = line.substr(comma + 1);
        char* end = nullptr;
        double score = std::strtod(score_str.c_str(), &end);
        if (end == score_str.c_str() || *end != '\0' || !std::isfinite(score)) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": bad score '" + score_str + "'");
        }
        if (flag_str != "0" && flag_str != "1") {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": bad is_id '" + flag_str + "'");
        }
        out.push_back({score, flag_str == "1"});
    }
    if (out.empty()) throw std::runtime_error("read_scores: " + path + " has no data rows");
    return out;
}

}  // namespace vos
