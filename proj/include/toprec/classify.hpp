#pragma once

// OneVsRest multi-label classifiers: class-weighted binary logistic
// regression trained by full-batch gradient descent, and a multinomial
// naive Bayes baseline with Laplace smoothing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "toprec/common.hpp"
#include "toprec/features.hpp"
#include "toprec/topicnorm.hpp"

namespace toprec {

struct ClassWeights {
    std::vector<double> weights;  // weight[t] = N / frequency[t]
};

// Inverse-frequency weights, N / frequency. Requires every topic column to have
// at least one positive (run filter_by_support first).
inline ClassWeights compute_class_weights(const std::vector<LabelVector>& labels) {
    if (labels.empty()) throw DataError("compute_class_weights: no rows");
    std::size_t m = labels[0].bits.size();
    std::vector<std::size_t> freq(m, 0);
    for (const auto& row : labels) {
        if (row.bits.size() != m)
            throw DataError("compute_class_weights: ragged label matrix");
        for (std::size_t t = 0; t < m; ++t)
            if (row.bits[t]) ++freq[t];
    }
    ClassWeights w;
    w.weights.resize(m);
    double n = static_cast<double>(labels.size());
    for (std::size_t t = 0; t < m; ++t) {
        if (freq[t] == 0)
            throw DataError("compute_class_weights: topic column " + std::to_string(t) +
                            " has zero support; apply filter_by_support first");
        w.weights[t] = n / static_cast<double>(freq[t]);
    }
    return w;
}

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t max_iters = 1000;
    double l2 = 1e-4;
    double tol = 1e-6;
    std::uint64_t seed = 42;
    bool use_class_weights = true;
};

struct BinaryLinearModel {
    std::vector<double> weights;
    double bias = 0.0;
};

// Per-topic binary MNB tables (two classes: positive / rest).
struct BinaryNbModel {
    double log_prior_pos = 0.0;
    double log_prior_neg = 0.0;
    std::vector<double> log_theta_pos;
    std::vector<double> log_theta_neg;
};

enum class ClassifierKind { logistic, mnb };

struct OvrModel {
    ClassifierKind kind = ClassifierKind::logistic;
    std::vector<BinaryLinearModel> logistic;  // one per topic
    std::vector<BinaryNbModel> mnb;           // one per topic
    std::size_t feature_width = 0;
    TrainConfig train_config;

    std::size_t num_topics() const {
        return kind == ClassifierKind::logistic ? logistic.size() : mnb.size();
    }
};

struct ScoreVector {
    std::vector<double> scores;  // one per topic, each in (0,1)
};

struct RecommendationList {
    std::vector<std::pair<std::string, double>> items;  // (topic, score), descending
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace detail {

inline double dot(const SparseVector& x, const std::vector<double>& w) {
    double s = 0;
    for (std::size_t k = 0; k < x.indices.size(); ++k)
        s += x.values[k] * w[x.indices[k]];
    return s;
}

inline double clamp_prob(double p) {
    constexpr double eps = 1e-12;
    return std::min(1.0 - eps, std::max(eps, p));
}

}  // namespace detail

// Mean weighted binary cross-entropy with L2 penalty (bias unpenalized):
//   J(w,b) = (1/N) sum_i c_i * BCE(sigmoid(w.x_i + b), y_i) + (l2/2)|w|^2
// where c_i = pos_weight for positives, 1 for negatives.
inline double weighted_logistic_loss(const std::vector<SparseVector>& rows,
                                     const std::vector<std::uint8_t>& y,
                                     double pos_weight, double l2,
                                     const std::vector<double>& w, double bias) {
    double loss = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double z = detail::dot(rows[i], w) + bias;
        // log(1+exp(z)) computed stably
        double log1pez = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        double c = y[i] ? pos_weight : 1.0;
        loss += c * (log1pez - (y[i] ? z : 0.0));
    }
    loss /= static_cast<double>(rows.size());
    double reg = 0;
    for (double wi : w) reg += wi * wi;
    return loss + 0.5 * l2 * reg;
}

// Analytic gradient of weighted_logistic_loss.
inline void weighted_logistic_gradient(const std::vector<SparseVector>& rows,
                                       const std::vector<std::uint8_t>& y,
                                       double pos_weight, double l2,
                                       const std::vector<double>& w, double bias,
                                       std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double z = detail::dot(rows[i], w) + bias;
        double c = (y[i] ? pos_weight : 1.0) * (sigmoid(z) - (y[i] ? 1.0 : 0.0));
        for (std::size_t k = 0; k < rows[i].indices.size(); ++k)
            grad_w[rows[i].indices[k]] += c * rows[i].values[k];
        grad_b += c;
    }
    double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t j = 0; j < w.size(); ++j)
        grad_w[j] = grad_w[j] * inv_n + l2 * w[j];
    grad_b *= inv_n;
}

// Trains one binary subproblem from zero initialization; stops at max_iters
// or when the loss improvement drops below tol.
inline BinaryLinearModel train_binary_logistic(const std::vector<SparseVector>& rows,
                                               const std::vector<std::uint8_t>& y,
                                               double pos_weight,
                                               std::size_t feature_width,
                                               const TrainConfig& cfg,
                                               const std::string& topic_name) {
    BinaryLinearModel m;
    m.weights.assign(feature_width, 0.0);
    m.bias = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0;
    double prev_loss = weighted_logistic_loss(rows, y, pos_weight, cfg.l2,
                                              m.weights, m.bias);
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
        weighted_logistic_gradient(rows, y, pos_weight, cfg.l2, m.weights, m.bias,
                                   grad_w, grad_b);
        for (std::size_t j = 0; j < m.weights.size(); ++j)
            m.weights[j] -= cfg.learning_rate * grad_w[j];
        m.bias -= cfg.learning_rate * grad_b;
        double loss = weighted_logistic_loss(rows, y, pos_weight, cfg.l2,
                                             m.weights, m.bias);
        if (!std::isfinite(loss))
            throw ModelError("training diverged for topic '" + topic_name +
                             "' at iteration " + std::to_string(iter) +
                             "; try a smaller learning_rate");
        if (prev_loss - loss < cfg.tol) break;
        prev_loss = loss;
    }
    return m;
}

inline OvrModel train_logistic_ovr(const std::vector<SparseVector>& rows,
                                   const std::vector<LabelVector>& labels,
                                   const ClassWeights& weights,
                                   const TrainConfig& cfg,
                                   std::size_t feature_width,
                                   const std::vector<std::string>& topic_names) {
    if (rows.size() != labels.size())
        throw DataError("train_logistic_ovr: rows/labels misaligned");
    std::size_t m = topic_names.size();
    OvrModel model;
    model.kind = ClassifierKind::logistic;
    model.feature_width = feature_width;
    model.train_config = cfg;
    model.logistic.resize(m);
    for (std::size_t t = 0; t < m; ++t) {
        std::vector<std::uint8_t> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) y[i] = labels[i].bits[t];
        double pw = cfg.use_class_weights ? weights.weights[t] : 1.0;
        model.logistic[t] =
            train_binary_logistic(rows, y, pw, feature_width, cfg, topic_names[t]);
    }
    return model;
}

// Binary multinomial NB per topic, Laplace alpha=1 over fractional TF-IDF
// counts. The topic score is the normalized two-class posterior.
inline OvrModel train_mnb_ovr(const std::vector<SparseVector>& rows,
                              const std::vector<LabelVector>& labels,
                              const TrainConfig& cfg,
                              std::size_t feature_width,
                              const std::vector<std::string>& topic_names) {
    if (rows.size() != labels.size())
        throw DataError("train_mnb_ovr: rows/labels misaligned");
    for (const auto& r : rows)
        for (double v : r.values)
            if (v < 0) throw DataError("train_mnb_ovr: negative feature value");
    constexpr double alpha = 1.0;
    std::size_t m = topic_names.size();
    OvrModel model;
    model.kind = ClassifierKind::mnb;
    model.feature_width = feature_width;
    model.train_config = cfg;
    model.mnb.resize(m);
    double n = static_cast<double>(rows.size());
    for (std::size_t t = 0; t < m; ++t) {
        BinaryNbModel& nb = model.mnb[t];
        std::vector<double> count_pos(feature_width, 0.0), count_neg(feature_width, 0.0);
        double n_pos = 0, n_neg = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            bool pos = labels[i].bits[t];
            auto& counts = pos ? count_pos : count_neg;
            (pos ? n_pos : n_neg) += 1.0;
            for (std::size_t k = 0; k < rows[i].indices.size(); ++k)
                counts[rows[i].indices[k]] += rows[i].values[k];
        }
        double total_pos = alpha * static_cast<double>(feature_width);
        double total_neg = total_pos;
        for (double v : count_pos) total_pos += v;
        for (double v : count_neg) total_neg += v;
        nb.log_theta_pos.resize(feature_width);
        nb.log_theta_neg.resize(feature_width);
        for (std::size_t f = 0; f < feature_width; ++f) {
            nb.log_theta_pos[f] = std::log((count_pos[f] + alpha) / total_pos);
            nb.log_theta_neg[f] = std::log((count_neg[f] + alpha) / total_neg);
        }
        nb.log_prior_pos = n_pos > 0 ? std::log(n_pos / n)
                                     : -std::numeric_limits<double>::infinity();
        nb.log_prior_neg = n_neg > 0 ? std::log(n_neg / n)
                                     : -std::numeric_limits<double>::infinity();
    }
    return model;
}

inline ScoreVector predict_scores(const OvrModel& model, const SparseVector& x) {
    for (std::size_t idx : x.indices)
        if (idx >= model.feature_width)
            throw ModelError("predict_scores: feature index " + std::to_string(idx) +
                             " outside model width " + std::to_string(model.feature_width));
    ScoreVector s;
    std::size_t m = model.num_topics();
    s.scores.resize(m);
    if (model.kind == ClassifierKind::logistic) {
        for (std::size_t t = 0; t < m; ++t) {
            const auto& lm = model.logistic[t];
            s.scores[t] = detail::clamp_prob(sigmoid(detail::dot(x, lm.weights) + lm.bias));
        }
    } else {
        for (std::size_t t = 0; t < m; ++t) {
            const auto& nb = model.mnb[t];
            double lp = nb.log_prior_pos, ln = nb.log_prior_neg;
            for (std::size_t k = 0; k < x.indices.size(); ++k) {
                lp += x.values[k] * nb.log_theta_pos[x.indices[k]];
                ln += x.values[k] * nb.log_theta_neg[x.indices[k]];
            }
            double hi = std::max(lp, ln);
            double num = std::exp(lp - hi);
            double den = num + std::exp(ln - hi);
            s.scores[t] = detail::clamp_prob(num / den);
        }
    }
    return s;
}

// Top-n topics by descending score, ties broken lexicographically by name.
inline std::vector<std::size_t> top_n_indices(const std::vector<double>& scores,
                                              std::size_t n,
                                              const std::vector<std::string>& topic_names) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return topic_names[a] < topic_names[b];
    });
    if (order.size() > n) order.resize(n);
    return order;
}

inline RecommendationList recommend(const ScoreVector& scores, std::size_t n,
                                    const TopicVocabulary& vocab) {
    if (n < 1 || n > vocab.size())
        throw DataError("recommend: n out of range [1, " +
                        std::to_string(vocab.size()) + "]");
    RecommendationList out;
    for (std::size_t t : top_n_indices(scores.scores, n, vocab.topics))
        out.items.emplace_back(vocab.topics[t], scores.scores[t]);
    return out;
}

}  // namespace toprec
