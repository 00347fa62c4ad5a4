#include "attnrank/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "attnrank/evaluation.hpp"

namespace attnrank {

namespace {

void axpy_dense(DenseLayerParams& p, const DenseLayerParams& g, double alpha) {
    if (!p.W.same_shape(g.W) || p.b.size() != g.b.size())
        throw DimensionError("sgd_step: gradient shape does not match parameters");
    for (size_t i = 0; i < p.W.data.size(); ++i) p.W.data[i] += alpha * g.W.data[i];
    for (size_t i = 0; i < p.b.size(); ++i) p.b[i] += alpha * g.b[i];
}

void axpy_branch(BranchParams& p, const BranchParams& g, double alpha) {
    axpy_dense(p.attention, g.attention, alpha);
    if (p.attention_score.size() != g.attention_score.size())
        throw DimensionError("sgd_step: gradient shape does not match parameters");
    for (size_t i = 0; i < p.attention_score.size(); ++i)
        p.attention_score[i] += alpha * g.attention_score[i];
    axpy_dense(p.hidden1, g.hidden1, alpha);
    axpy_dense(p.hidden2, g.hidden2, alpha);
}

}  // namespace

std::vector<Instance> make_instances(const std::vector<QuestionGroup>& groups, int grade_threshold) {
    std::vector<Instance> out;
    for (const QuestionGroup& g : groups) {
        if (g.candidates.empty())
            throw DataError("make_instances: question '" + g.question_id + "' has no candidates");
        const TokenList q_tokens = tokenize(g.question);
        if (q_tokens.empty())
            throw DataError("make_instances: question '" + g.question_id + "' has no tokens");
        for (const Candidate& c : g.candidates) {
            TokenList a_tokens = tokenize(c.answer);
            if (a_tokens.empty())
                throw DataError("make_instances: answer '" + c.answer_id + "' has no tokens");
            Instance inst;
            inst.question_id = g.question_id;
            inst.answer_id = c.answer_id;
            inst.q_tokens = q_tokens;
            inst.a_tokens = std::move(a_tokens);
            inst.grade = c.grade;
            inst.label = c.grade >= grade_threshold ? 1 : 0;
            out.push_back(std::move(inst));
        }
    }
    return out;
}

void sgd_step(ModelParams& params, const Gradients& grads, double lr, EmbeddingMatrix* emb) {
    axpy_branch(params.question, grads.params.question, -lr);
    axpy_branch(params.answer, grads.params.answer, -lr);
    axpy_dense(params.head.hidden, grads.params.head.hidden, -lr);
    axpy_dense(params.head.output, grads.params.head.output, -lr);
    if (emb) {
        for (const auto& [idx, g] : grads.embedding) {
            if (idx == Vocab::kPad) continue;
            if (idx < 0 || idx >= emb->vocab_size() || static_cast<int>(g.size()) != emb->dim())
                throw DimensionError("sgd_step: embedding gradient shape mismatch");
            std::span<double> row = emb->vectors.row(idx);
            for (int j = 0; j < emb->dim(); ++j) row[j] -= lr * g[j];
        }
    }
}

TrainResult train(const std::vector<QuestionGroup>& dataset,
                  const std::vector<QuestionGroup>* dev, const TrainConfig& tcfg,
                  const ModelConfig& mcfg, const Vocab& vocab, const EmbeddingMatrix& emb) {
    if (dataset.empty()) throw DataError("train: empty dataset");
    if (tcfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(tcfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (tcfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    mcfg.validate();

    std::vector<Instance> instances = make_instances(dataset, tcfg.grade_threshold);

    int a_max = tcfg.a_max_len_observed;
    if (a_max <= 0) {
        for (const Instance& inst : instances)
            a_max = std::max(a_max, static_cast<int>(inst.a_tokens.size()));
        a_max = std::min(a_max, mcfg.max_a_len);
    }

    SeededRng rng(tcfg.seed);
    TrainResult result;
    result.last = init_params(mcfg, a_max, rng);
    result.embeddings = emb;
    EmbeddingMatrix* emb_ptr = tcfg.fine_tune_embeddings ? &result.embeddings : nullptr;

    result.best = result.last;
    result.best_epoch = 0;
    double best_mrr = -1.0;
    int epochs_since_best = 0;

    std::vector<size_t> order(instances.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (tcfg.shuffle) rng.shuffle(order);

        double loss_sum = 0.0;
        size_t seen = 0;
        int batch_no = 0;
        std::vector<Instance> batch;
        batch.reserve(tcfg.batch_size);
        for (size_t pos = 0; pos < order.size(); pos += tcfg.batch_size) {
            ++batch_no;
            batch.clear();
            const size_t end = std::min(order.size(), pos + tcfg.batch_size);
            for (size_t i = pos; i < end; ++i) batch.push_back(instances[order[i]]);

            BackwardResult b;
            try {
                b = backward(batch, result.last, mcfg, vocab, result.embeddings,
                             tcfg.fine_tune_embeddings, tcfg.positive_weight);
            } catch (const NumericError& e) {
                throw TrainingDiverged(epoch, batch_no,
                                       "training diverged at epoch " + std::to_string(epoch) +
                                           ", batch " + std::to_string(batch_no) + ": " +
                                           e.what());
            }
            if (!std::isfinite(b.mean_loss))
                throw TrainingDiverged(epoch, batch_no,
                                       "training diverged: non-finite loss at epoch " +
                                           std::to_string(epoch) + ", batch " +
                                           std::to_string(batch_no));
            sgd_step(result.last, b.grads, tcfg.learning_rate, emb_ptr);
            loss_sum += b.mean_loss * static_cast<double>(batch.size());
            seen += batch.size();
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.mean_loss = loss_sum / static_cast<double>(seen);
        if (dev && !dev->empty()) {
            RankedRun run = rank_dataset(result.last, mcfg, vocab, result.embeddings, *dev);
            rec.dev_mrr = mrr(run, tcfg.grade_threshold);
        }
        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(rec);

        if (rec.dev_mrr.has_value()) {
            if (*rec.dev_mrr > best_mrr) {
                best_mrr = *rec.dev_mrr;
                result.best = result.last;
                result.best_epoch = epoch;
                epochs_since_best = 0;
            } else {
                ++epochs_since_best;
                if (tcfg.early_stopping && epochs_since_best >= tcfg.patience) break;
            }
        }
    }

    if (!dev || dev->empty()) {
        result.best = result.last;
        result.best_epoch = static_cast<int>(result.history.size());
    }
    return result;
}

void save_history_csv(const std::string& path, const TrainHistory& history) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_history_csv: cannot open " + path);
    os << "epoch,loss,dev_mrr,seconds\n";
    char buf[96];
    for (const EpochRecord& r : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,", r.epoch, r.mean_loss);
        os << buf;
        if (r.dev_mrr.has_value()) {
            std::snprintf(buf, sizeof(buf), "%.10g", *r.dev_mrr);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.3f\n", r.seconds);
        os << buf;
    }
    if (!os) throw IoError("save_history_csv: write failed for " + path);
}

}  // namespace attnrank
