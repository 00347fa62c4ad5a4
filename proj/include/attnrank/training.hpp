#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attnrank/data_io.hpp"
#include "attnrank/instance.hpp"
#include "attnrank/model.hpp"

namespace attnrank {

struct TrainConfig {
    int batch_size = 50;
    double learning_rate = 0.1;
    int epochs = 25;
    uint64_t seed = 1;
    bool shuffle = true;
    int a_max_len_observed = 0;  // 0: derive from the training set
    int grade_threshold = 1;     // grade >= threshold counts as relevant
    bool early_stopping = false;
    int patience = 5;
    bool fine_tune_embeddings = false;
    double positive_weight = 1.0;  // optional reweighting of the relevant class
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double mean_loss = 0.0;
    std::optional<double> dev_mrr;
    double seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct TrainResult {
    ModelParams last;
    ModelParams best;  // by dev MRR when a dev set is given, else the last
    int best_epoch = 0;
    TrainHistory history;
    EmbeddingMatrix embeddings;  // updated table when fine-tuning, else the input
};

/// One Instance per (question, candidate) pair. Graded labels binarize with
/// grade >= threshold; the original grade is retained.
std::vector<Instance> make_instances(const std::vector<QuestionGroup>& groups, int grade_threshold);

/// Plain SGD: theta <- theta - lr * g.
void sgd_step(ModelParams& params, const Gradients& grads, double lr, EmbeddingMatrix* emb = nullptr);

/// Mini-batch SGD over shuffled epochs. Initializes with
/// bound sqrt(6/|a_max|) where |a_max| is the longest answer the model sees.
/// Deterministic given the seed. Throws TrainingDiverged on non-finite loss.
TrainResult train(const std::vector<QuestionGroup>& dataset,
                  const std::vector<QuestionGroup>* dev, const TrainConfig& tcfg,
                  const ModelConfig& mcfg, const Vocab& vocab, const EmbeddingMatrix& emb);

/// history.csv: one row per epoch (epoch, loss, dev_mrr, seconds).
void save_history_csv(const std::string& path, const TrainHistory& history);

}  // namespace attnrank
