#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "embal/embedding_store.hpp"
#include "embal/random.hpp"

namespace embal {

enum class LossKind { softmax_ce, hinge_ovr };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

/// Linear classification layer: logit[c] = row . weights[c] + biases[c].
struct LinearHead {
    std::size_t class_count = 0;
    std::size_t dim = 0;
    std::vector<double> weights;  // C*d, row c holds class c's weights
    std::vector<double> biases;   // C
    LossKind loss = LossKind::softmax_ce;

    std::span<const double> weight_row(ClassId c) const { return {weights.data() + c * dim, dim}; }
    std::vector<double> logits(std::span<const double> row) const;

    /// Throws DataError on shape mismatch or non-finite parameters.
    void validate() const;

    bool operator==(const LinearHead&) const = default;
};

struct TrainConfig {
    std::size_t epochs = 10;
    double learning_rate = 0.1;
    std::size_t batch_size = 128;
    double weight_decay = 2e-4;
    Seed seed = 0;

    void validate() const;
};

/// Mean batch loss plus (weight_decay/2)*||W||^2, with gradients w.r.t. weights and biases.
struct LossGradient {
    double loss = 0.0;
    std::vector<double> grad_weights;
    std::vector<double> grad_biases;
};

LossGradient softmax_ce_loss(const LinearHead& head, std::span<const double> features,
                             std::span<const ClassId> labels, double weight_decay);

/// One-vs-rest hinge: sum over classes of max(0, 1 - t_c * logit_c), t_c = +1 for the
/// true class and -1 otherwise, averaged over rows. Subgradient 0 at the kink.
LossGradient hinge_ovr_loss(const LinearHead& head, std::span<const double> features,
                            std::span<const ClassId> labels, double weight_decay);

/// Weights uniform in [-1/sqrt(d), 1/sqrt(d)], zero biases.
LinearHead init_head(std::size_t class_count, std::size_t dim, LossKind loss, Seed seed);

/// Mini-batch SGD on softmax cross-entropy from a fresh init. `epoch_losses`, if
/// given, receives the mean training loss of each epoch.
LinearHead train_head(const LabeledEmbeddingSet& set, const TrainConfig& config,
                      std::vector<double>* epoch_losses = nullptr);

/// Same optimizer, warm-started from `head`.
LinearHead fine_tune(const LinearHead& head, const LabeledEmbeddingSet& set, const TrainConfig& config,
                     std::vector<double>* epoch_losses = nullptr);

/// One-vs-rest linear SVM (hinge + L2) by stochastic subgradient descent from zero weights.
LinearHead train_svm(const LabeledEmbeddingSet& set, const TrainConfig& config,
                     std::vector<double>* epoch_losses = nullptr);

struct Predictions {
    std::vector<ClassId> labels;
    std::vector<double> probabilities;  // n*C softmax rows; empty unless requested
};

/// argmax logit per row (lowest class on ties); softmax probabilities on request.
Predictions predict(const LinearHead& head, std::span<const double> features, bool with_probabilities = false);

std::vector<double> softmax(std::span<const double> logits);

/// Per row, a C*d matrix with entry (c, f) = row[f] * weights[c][f].
std::vector<std::vector<double>> classification_layer_embeddings(const LinearHead& head,
                                                                 std::span<const double> features);

/// L2 norm of each class's weight row.
std::vector<double> weight_norms(const LinearHead& head);

} // namespace embal
