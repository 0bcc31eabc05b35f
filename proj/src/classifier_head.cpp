#include "embal/classifier_head.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embal/errors.hpp"

namespace embal {

std::string to_string(LossKind kind) {
    return kind == LossKind::softmax_ce ? "softmax_ce" : "hinge_ovr";
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "softmax_ce") return LossKind::softmax_ce;
    if (name == "hinge_ovr") return LossKind::hinge_ovr;
    throw DataError("unknown loss kind '" + name + "'");
}

std::vector<double> LinearHead::logits(std::span<const double> row) const {
    std::vector<double> out(class_count);
    for (std::size_t c = 0; c < class_count; ++c) {
        const double* w = weights.data() + c * dim;
        double z = biases[c];
        for (std::size_t f = 0; f < dim; ++f) z += row[f] * w[f];
        out[c] = z;
    }
    return out;
}

void LinearHead::validate() const {
    if (class_count < 2 || dim == 0) throw DataError("head must have C >= 2 and d >= 1");
    if (weights.size() != class_count * dim || biases.size() != class_count) {
        throw DataError("head parameter shapes do not match C=" + std::to_string(class_count) +
                        ", d=" + std::to_string(dim));
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(weights.begin(), weights.end(), finite) || !std::all_of(biases.begin(), biases.end(), finite)) {
        throw DataError("head has non-finite parameters");
    }
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    const double top = *std::max_element(p.begin(), p.end());
    double total = 0.0;
    for (double& v : p) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

namespace {

void check_batch(const LinearHead& head, std::span<const double> features, std::span<const ClassId> labels) {
    if (features.size() != labels.size() * head.dim) throw DataError("batch shape does not match head dimension");
}

void add_decay(const LinearHead& head, double weight_decay, LossGradient& g) {
    double sq = 0.0;
    for (std::size_t k = 0; k < head.weights.size(); ++k) {
        sq += head.weights[k] * head.weights[k];
        g.grad_weights[k] += weight_decay * head.weights[k];
    }
    g.loss += 0.5 * weight_decay * sq;
}

} // namespace

LossGradient softmax_ce_loss(const LinearHead& head, std::span<const double> features,
                             std::span<const ClassId> labels, double weight_decay) {
    check_batch(head, features, labels);
    const std::size_t n = labels.size();
    const std::size_t d = head.dim;
    LossGradient g;
    g.grad_weights.assign(head.weights.size(), 0.0);
    g.grad_biases.assign(head.class_count, 0.0);
    if (n == 0) return g;

    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.subspan(i * d, d);
        const auto z = head.logits(row);
        const double top = *std::max_element(z.begin(), z.end());
        double total = 0.0;
        for (double v : z) total += std::exp(v - top);
        const double log_norm = top + std::log(total);
        g.loss += (log_norm - z[labels[i]]) * scale;
        for (std::size_t c = 0; c < head.class_count; ++c) {
            const double residual = (std::exp(z[c] - log_norm) - (c == labels[i] ? 1.0 : 0.0)) * scale;
            g.grad_biases[c] += residual;
            double* gw = g.grad_weights.data() + c * d;
            for (std::size_t f = 0; f < d; ++f) gw[f] += residual * row[f];
        }
    }
    add_decay(head, weight_decay, g);
    return g;
}

LossGradient hinge_ovr_loss(const LinearHead& head, std::span<const double> features,
                            std::span<const ClassId> labels, double weight_decay) {
    check_batch(head, features, labels);
    const std::size_t n = labels.size();
    const std::size_t d = head.dim;
    LossGradient g;
    g.grad_weights.assign(head.weights.size(), 0.0);
    g.grad_biases.assign(head.class_count, 0.0);
    if (n == 0) return g;

    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.subspan(i * d, d);
        const auto z = head.logits(row);
        for (std::size_t c = 0; c < head.class_count; ++c) {
            const double target = c == labels[i] ? 1.0 : -1.0;
            const double slack = 1.0 - target * z[c];
            if (slack <= 0.0) continue;
            g.loss += slack * scale;
            g.grad_biases[c] -= target * scale;
            double* gw = g.grad_weights.data() + c * d;
            for (std::size_t f = 0; f < d; ++f) gw[f] -= target * row[f] * scale;
        }
    }
    add_decay(head, weight_decay, g);
    return g;
}

LinearHead init_head(std::size_t class_count, std::size_t dim, LossKind loss, Seed seed) {
    LinearHead head;
    head.class_count = class_count;
    head.dim = dim;
    head.loss = loss;
    head.weights.resize(class_count * dim);
    head.biases.assign(class_count, 0.0);
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : head.weights) w = dist(rng);
    return head;
}

namespace {

LinearHead run_sgd(LinearHead head, const LabeledEmbeddingSet& set, const TrainConfig& config,
                   std::vector<double>* epoch_losses) {
    config.validate();
    if (head.class_count != set.class_count() || head.dim != set.dim()) {
        throw DataError("head shape (C=" + std::to_string(head.class_count) + ", d=" + std::to_string(head.dim) +
                        ") does not match data (C=" + std::to_string(set.class_count()) +
                        ", d=" + std::to_string(set.dim()) + ")");
    }
    if (set.size() == 0) throw DataError("cannot train on an empty set");
    if (epoch_losses) epoch_losses->clear();

    const auto loss_fn = head.loss == LossKind::softmax_ce ? softmax_ce_loss : hinge_ovr_loss;
    const std::size_t n = set.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed);

    std::vector<double> batch_features;
    std::vector<ClassId> batch_labels;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            batch_features.clear();
            batch_labels.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto row = set.row(order[k]);
                batch_features.insert(batch_features.end(), row.begin(), row.end());
                batch_labels.push_back(set.label(order[k]));
            }
            const auto g = loss_fn(head, batch_features, batch_labels, config.weight_decay);
            if (!std::isfinite(g.loss)) {
                throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch) + " (learning rate too large?)");
            }
            epoch_loss += g.loss * static_cast<double>(stop - start);
            for (std::size_t k = 0; k < head.weights.size(); ++k) {
                head.weights[k] -= config.learning_rate * g.grad_weights[k];
            }
            for (std::size_t c = 0; c < head.class_count; ++c) {
                head.biases[c] -= config.learning_rate * g.grad_biases[c];
            }
        }
        if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(n));
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(head.weights.begin(), head.weights.end(), finite) ||
        !std::all_of(head.biases.begin(), head.biases.end(), finite)) {
        throw NumericalError("training diverged: non-finite parameters after " + std::to_string(config.epochs) +
                             " epochs");
    }
    return head;
}

} // namespace

LinearHead train_head(const LabeledEmbeddingSet& set, const TrainConfig& config, std::vector<double>* epoch_losses) {
    config.validate();
    auto head = init_head(set.class_count(), set.dim(), LossKind::softmax_ce, derive_seed(config.seed, 0x1417));
    return run_sgd(std::move(head), set, config, epoch_losses);
}

LinearHead fine_tune(const LinearHead& head, const LabeledEmbeddingSet& set, const TrainConfig& config,
                     std::vector<double>* epoch_losses) {
    head.validate();
    return run_sgd(head, set, config, epoch_losses);
}

LinearHead train_svm(const LabeledEmbeddingSet& set, const TrainConfig& config, std::vector<double>* epoch_losses) {
    LinearHead head;
    head.class_count = set.class_count();
    head.dim = set.dim();
    head.loss = LossKind::hinge_ovr;
    head.weights.assign(head.class_count * head.dim, 0.0);
    head.biases.assign(head.class_count, 0.0);
    return run_sgd(std::move(head), set, config, epoch_losses);
}

Predictions predict(const LinearHead& head, std::span<const double> features, bool with_probabilities) {
    if (head.dim == 0 || features.size() % head.dim != 0) {
        throw DataError("feature width does not match head dimension " + std::to_string(head.dim));
    }
    const std::size_t n = features.size() / head.dim;
    Predictions out;
    out.labels.resize(n);
    if (with_probabilities) out.probabilities.reserve(n * head.class_count);
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = head.logits(features.subspan(i * head.dim, head.dim));
        out.labels[i] = static_cast<ClassId>(std::max_element(z.begin(), z.end()) - z.begin());
        if (with_probabilities) {
            const auto p = softmax(z);
            out.probabilities.insert(out.probabilities.end(), p.begin(), p.end());
        }
    }
    return out;
}

std::vector<std::vector<double>> classification_layer_embeddings(const LinearHead& head,
                                                                 std::span<const double> features) {
    if (head.dim == 0 || features.size() % head.dim != 0) {
        throw DataError("feature width does not match head dimension " + std::to_string(head.dim));
    }
    const std::size_t n = features.size() / head.dim;
    std::vector<std::vector<double>> out(n, std::vector<double>(head.class_count * head.dim));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = features.data() + i * head.dim;
        for (std::size_t c = 0; c < head.class_count; ++c) {
            for (std::size_t f = 0; f < head.dim; ++f) {
                out[i][c * head.dim + f] = row[f] * head.weights[c * head.dim + f];
            }
        }
    }
    return out;
}

std::vector<double> weight_norms(const LinearHead& head) {
    std::vector<double> norms(head.class_count);
    for (std::size_t c = 0; c < head.class_count; ++c) {
        const auto w = head.weight_row(static_cast<ClassId>(c));
        norms[c] = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    }
    return norms;
}

} // namespace embal
