#pragma once

#include <map>
#include <string>
#include <vector>

#include "attnrank/instance.hpp"
#include "attnrank/numerics.hpp"
#include "attnrank/text.hpp"

namespace attnrank {

enum class AttentionMode { kScalar, kFeaturewise };
enum class PoolingMode { kMax, kSum };
enum class Side { kQuestion, kAnswer };

struct ModelConfig {
    int emb_dim = 100;
    int att_dim = 100;      // width of the attention dense layer output
    int hidden1_dim = 100;  // tanh layer
    int hidden2_dim = 100;  // lrelu layer
    int head_hidden_dim = 100;
    double lrelu_slope = 0.01002;
    AttentionMode attention_mode = AttentionMode::kScalar;
    PoolingMode pooling_mode = PoolingMode::kMax;
    bool uniform_attention = false;  // ablation: constant 1/n weights
    int max_q_len = 40;
    int max_a_len = 1000;

    int input_dim() const { return emb_dim + 1; }  // embedding plus overlap flag

    void validate() const;
};

/// Parameters of one branch encoder. attention_score is the scoring vector
/// used in scalar attention mode; it is carried (and checkpointed) in both
/// modes so the parameter layout does not depend on the mode.
struct BranchParams {
    DenseLayerParams attention;  // input_dim x att_dim
    Vector attention_score;     // att_dim
    DenseLayerParams hidden1;    // att_dim x hidden1_dim, tanh
    DenseLayerParams hidden2;    // hidden1_dim x hidden2_dim, lrelu
};

struct HeadParams {
    DenseLayerParams hidden;  // 2*hidden2_dim x head_hidden_dim, tanh
    DenseLayerParams output;  // head_hidden_dim x 2
};

/// All trainable weights. The question and answer branches are not tied.
struct ModelParams {
    BranchParams question;
    BranchParams answer;
    HeadParams head;
};

/// Per-token attention weights captured for visualization. Weights over
/// unmasked tokens sum to 1; masked positions carry exactly 0.
struct AttentionTrace {
    TokenList tokens;
    Vector weights;
    Side side = Side::kAnswer;
};

struct AttendResult {
    Matrix weighted_states;  // length x att_dim, zero at masked rows
    AttentionTrace trace;
};

struct EncodeResult {
    Vector branch_vector;  // hidden2_dim, independent of sequence length
    AttentionTrace trace;
};

struct ScoreResult {
    double relevance_prob = 0.0;
    Vector joint;  // concat(question_vector, answer_vector)
};

struct ForwardResult {
    double relevance_prob = 0.0;
    AttentionTrace q_trace;
    AttentionTrace a_trace;
};

/// Gradients mirror ModelParams; embedding rows are collected sparsely and
/// only when fine-tuning is requested.
struct Gradients {
    ModelParams params;
    std::map<int, Vector> embedding;  // vocab index -> d(emb row)
};

struct BackwardResult {
    Gradients grads;
    double mean_loss = 0.0;
};

/// Uniform init on +-sqrt(6/a_max_len) for every weight matrix, zero biases.
ModelParams init_params(const ModelConfig& cfg, int a_max_len, SeededRng& rng);

/// Attention layer: h = xW + b, scores through lrelu (and the scoring vector
/// in scalar mode), softmax over unmasked tokens, weighted states w_t * h_t.
AttendResult attend(const SequenceMatrix& x, const BranchParams& bp, const ModelConfig& cfg,
                    Side side);

/// Full branch: attend, per-token tanh and lrelu dense layers, then max or
/// sum aggregation over tokens.
EncodeResult encode_branch(const SequenceMatrix& x, const BranchParams& bp, const ModelConfig& cfg,
                           Side side);

/// Scoring head over the concatenated branch vectors; returns the
/// probability of the relevant class.
ScoreResult score_pair(const Vector& question_vec, const Vector& answer_vec, const HeadParams& head,
                       const ModelConfig& cfg);

/// End-to-end pipeline for one (question, answer) pair.
ForwardResult forward(const TokenList& q_tokens, const TokenList& a_tokens, const ModelParams& params,
                      const ModelConfig& cfg, const Vocab& vocab, const EmbeddingMatrix& emb);

/// Mean cross-entropy over the batch and gradients for every parameter.
/// Embedding gradients are collected only when with_embedding_grads is set.
/// positive_weight scales the loss of label-1 instances.
BackwardResult backward(const std::vector<Instance>& batch, const ModelParams& params,
                        const ModelConfig& cfg, const Vocab& vocab, const EmbeddingMatrix& emb,
                        bool with_embedding_grads = false, double positive_weight = 1.0);

/// Forward-only mean cross-entropy; shares no code with the backward pass
/// beyond the forward computation itself.
double batch_loss(const std::vector<Instance>& batch, const ModelParams& params,
                  const ModelConfig& cfg, const Vocab& vocab, const EmbeddingMatrix& emb);

/// Flat parameter order: per branch (question then answer) attention.W,
/// attention.b, attention_score, hidden1.W, hidden1.b, hidden2.W, hidden2.b;
/// then head.hidden.W, head.hidden.b, head.output.W, head.output.b.
/// Matrices are row-major.
Vector flatten(const ModelParams& params);
ModelParams unflatten(const ModelConfig& cfg, const Vector& flat);
size_t param_count(const ModelConfig& cfg);

/// Binary checkpoint: versioned header with the full config, then every
/// tensor in flat order with explicit dims, 64-bit little-endian floats.
void save_checkpoint(const std::string& path, const ModelConfig& cfg, const ModelParams& params);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path);

const char* to_string(AttentionMode m);
const char* to_string(PoolingMode m);
AttentionMode attention_mode_from_string(const std::string& s);
PoolingMode pooling_mode_from_string(const std::string& s);

}  // namespace attnrank
