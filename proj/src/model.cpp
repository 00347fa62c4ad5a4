#include "attnrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "attnrank/detail/binio.hpp"

namespace attnrank {

using detail::read_f64;
using detail::read_u32;
using detail::write_f64;
using detail::write_u32;

namespace {

constexpr double kLogitClamp = 30.0;

// out = x W + b over spans, no allocation
void dense_into(std::span<const double> x, const DenseLayerParams& p, std::span<double> out) {
    for (int j = 0; j < p.out_dim(); ++j) out[j] = p.b[j];
    for (int i = 0; i < p.in_dim(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        std::span<const double> wrow = p.W.row(i);
        for (int j = 0; j < p.out_dim(); ++j) out[j] += xi * wrow[j];
    }
}

// grad.W += outer(x, dy), grad.b += dy
void accumulate_dense_grad(DenseLayerParams& grad, std::span<const double> x,
                           std::span<const double> dy) {
    for (size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        std::span<double> grow = grad.W.row(static_cast<int>(i));
        for (size_t j = 0; j < dy.size(); ++j) grow[j] += xi * dy[j];
    }
    for (size_t j = 0; j < dy.size(); ++j) grad.b[j] += dy[j];
}

// dx = W dy
void backprop_dense(const DenseLayerParams& p, std::span<const double> dy, std::span<double> dx) {
    for (int i = 0; i < p.in_dim(); ++i) {
        std::span<const double> wrow = p.W.row(i);
        double s = 0.0;
        for (int j = 0; j < p.out_dim(); ++j) s += wrow[j] * dy[j];
        dx[i] = s;
    }
}

double lrelu_scalar(double x, double slope) { return x > 0.0 ? x : slope * x; }
double lrelu_grad_scalar(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

struct BranchCache {
    std::vector<int> active;  // unmasked row indices into the sequence
    Matrix h;                 // m x att_dim
    Matrix act;               // lrelu(h)
    Vector scores;            // m, scalar mode
    Vector weights;           // m, scalar or uniform mode
    Matrix fw_weights;        // m x att_dim, featurewise mode
    Matrix weighted;          // m x att_dim
    Matrix pre3, u;           // m x hidden1_dim
    Matrix pre4, z;           // m x hidden2_dim
    Vector pooled;            // hidden2_dim
    std::vector<int> argmax;  // per output dim, max pooling
};

BranchCache branch_forward(const SequenceMatrix& seq, const BranchParams& bp,
                           const ModelConfig& cfg) {
    if (seq.width() != cfg.input_dim())
        throw DimensionError("branch: sequence width does not match emb_dim + 1");

    BranchCache c;
    for (int t = 0; t < seq.length(); ++t) {
        if (seq.mask[t]) c.active.push_back(t);
    }
    if (c.active.empty()) throw DataError("branch: all tokens are masked");
    const int m = static_cast<int>(c.active.size());
    const int A = cfg.att_dim;

    c.h = Matrix(m, A);
    c.act = Matrix(m, A);
    for (int i = 0; i < m; ++i) {
        dense_into(seq.rows.row(c.active[i]), bp.attention, c.h.row(i));
        std::span<const double> h = c.h.row(i);
        std::span<double> a = c.act.row(i);
        for (int j = 0; j < A; ++j) a[j] = lrelu_scalar(h[j], cfg.lrelu_slope);
    }

    c.weighted = Matrix(m, A);
    if (cfg.uniform_attention) {
        c.weights.assign(m, 1.0 / m);
        for (int i = 0; i < m; ++i) {
            std::span<const double> h = c.h.row(i);
            std::span<double> w = c.weighted.row(i);
            for (int j = 0; j < A; ++j) w[j] = c.weights[i] * h[j];
        }
    } else if (cfg.attention_mode == AttentionMode::kScalar) {
        c.scores.resize(m);
        for (int i = 0; i < m; ++i) c.scores[i] = dot(c.act.row(i), bp.attention_score);
        c.weights = softmax(c.scores);
        for (int i = 0; i < m; ++i) {
            std::span<const double> h = c.h.row(i);
            std::span<double> w = c.weighted.row(i);
            for (int j = 0; j < A; ++j) w[j] = c.weights[i] * h[j];
        }
    } else {
        // softmax across tokens, independently per feature dimension
        c.fw_weights = Matrix(m, A);
        for (int j = 0; j < A; ++j) {
            double mx = c.act.at(0, j);
            for (int i = 1; i < m; ++i) mx = std::max(mx, c.act.at(i, j));
            double sum = 0.0;
            for (int i = 0; i < m; ++i) {
                const double e = std::exp(c.act.at(i, j) - mx);
                c.fw_weights.at(i, j) = e;
                sum += e;
            }
            for (int i = 0; i < m; ++i) {
                c.fw_weights.at(i, j) /= sum;
                c.weighted.at(i, j) = c.fw_weights.at(i, j) * c.h.at(i, j);
            }
        }
    }

    const int H1 = cfg.hidden1_dim;
    const int H2 = cfg.hidden2_dim;
    c.pre3 = Matrix(m, H1);
    c.u = Matrix(m, H1);
    c.pre4 = Matrix(m, H2);
    c.z = Matrix(m, H2);
    for (int i = 0; i < m; ++i) {
        dense_into(c.weighted.row(i), bp.hidden1, c.pre3.row(i));
        for (int j = 0; j < H1; ++j) c.u.at(i, j) = std::tanh(c.pre3.at(i, j));
        dense_into(c.u.row(i), bp.hidden2, c.pre4.row(i));
        for (int j = 0; j < H2; ++j) c.z.at(i, j) = lrelu_scalar(c.pre4.at(i, j), cfg.lrelu_slope);
    }

    c.pooled.assign(H2, 0.0);
    if (cfg.pooling_mode == PoolingMode::kMax) {
        c.argmax.assign(H2, 0);
        for (int j = 0; j < H2; ++j) {
            double best = c.z.at(0, j);
            int best_i = 0;
            for (int i = 1; i < m; ++i) {
                if (c.z.at(i, j) > best) {
                    best = c.z.at(i, j);
                    best_i = i;
                }
            }
            c.pooled[j] = best;
            c.argmax[j] = best_i;
        }
    } else {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < H2; ++j) c.pooled[j] += c.z.at(i, j);
        }
    }
    return c;
}

AttentionTrace trace_from_cache(const SequenceMatrix& seq, const BranchCache& c, Side side) {
    AttentionTrace tr;
    tr.side = side;
    tr.tokens = seq.tokens;
    tr.weights.assign(seq.length(), 0.0);
    const int m = static_cast<int>(c.active.size());
    if (!c.weights.empty()) {
        for (int i = 0; i < m; ++i) tr.weights[c.active[i]] = c.weights[i];
    } else {
        // featurewise: report the per-token mean weight across dimensions
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            for (int j = 0; j < c.fw_weights.cols; ++j) s += c.fw_weights.at(i, j);
            tr.weights[c.active[i]] = s / c.fw_weights.cols;
        }
    }
    return tr;
}

struct HeadCache {
    Vector joint;   // 2*hidden2_dim
    Vector hid;     // head_hidden_dim
    Vector logits;  // 2, unclamped
    Vector probs;   // 2, softmax of the clamped logits
};

HeadCache head_forward(const Vector& qv, const Vector& av, const HeadParams& head,
                       const ModelConfig& cfg) {
    if (static_cast<int>(qv.size()) != cfg.hidden2_dim ||
        static_cast<int>(av.size()) != cfg.hidden2_dim)
        throw DimensionError("score_pair: branch vector width does not match config");

    HeadCache c;
    c.joint.reserve(qv.size() + av.size());
    c.joint.insert(c.joint.end(), qv.begin(), qv.end());
    c.joint.insert(c.joint.end(), av.begin(), av.end());

    Vector pre(cfg.head_hidden_dim);
    dense_into(c.joint, head.hidden, pre);
    c.hid.resize(cfg.head_hidden_dim);
    for (int j = 0; j < cfg.head_hidden_dim; ++j) c.hid[j] = std::tanh(pre[j]);

    c.logits.resize(2);
    dense_into(c.hid, head.output, c.logits);
    Vector clamped = {std::clamp(c.logits[0], -kLogitClamp, kLogitClamp),
                      std::clamp(c.logits[1], -kLogitClamp, kLogitClamp)};
    c.probs = softmax(clamped);
    return c;
}

struct InstanceForward {
    SequenceMatrix q_seq;
    SequenceMatrix a_seq;
    BranchCache q_cache;
    BranchCache a_cache;
    HeadCache head;
};

InstanceForward instance_forward(const TokenList& q_tokens, const TokenList& a_tokens,
                                 const ModelParams& params, const ModelConfig& cfg,
                                 const Vocab& vocab, const EmbeddingMatrix& emb) {
    InstanceForward f;
    f.q_seq = embed_sequence(q_tokens, vocab, emb, a_tokens, cfg.max_q_len);
    f.a_seq = embed_sequence(a_tokens, vocab, emb, q_tokens, cfg.max_a_len);
    f.q_cache = branch_forward(f.q_seq, params.question, cfg);
    f.a_cache = branch_forward(f.a_seq, params.answer, cfg);
    f.head = head_forward(f.q_cache.pooled, f.a_cache.pooled, params.head, cfg);
    return f;
}

void zero_like(const ModelConfig& cfg, BranchParams& g) {
    g.attention.W = Matrix(cfg.input_dim(), cfg.att_dim);
    g.attention.b.assign(cfg.att_dim, 0.0);
    g.attention_score.assign(cfg.att_dim, 0.0);
    g.hidden1.W = Matrix(cfg.att_dim, cfg.hidden1_dim);
    g.hidden1.b.assign(cfg.hidden1_dim, 0.0);
    g.hidden2.W = Matrix(cfg.hidden1_dim, cfg.hidden2_dim);
    g.hidden2.b.assign(cfg.hidden2_dim, 0.0);
}

ModelParams zero_params(const ModelConfig& cfg) {
    ModelParams g;
    zero_like(cfg, g.question);
    zero_like(cfg, g.answer);
    g.head.hidden.W = Matrix(2 * cfg.hidden2_dim, cfg.head_hidden_dim);
    g.head.hidden.b.assign(cfg.head_hidden_dim, 0.0);
    g.head.output.W = Matrix(cfg.head_hidden_dim, 2);
    g.head.output.b.assign(2, 0.0);
    return g;
}

// Backpropagates d(loss)/d(pooled) through one branch, accumulating into
// grad. When emb_grads is non-null, also accumulates d(loss)/d(embedding row)
// for each unmasked token.
void branch_backward(const SequenceMatrix& seq, const BranchParams& bp, const ModelConfig& cfg,
                     const BranchCache& c, const Vector& dpool, BranchParams& grad,
                     const Vocab& vocab, std::map<int, Vector>* emb_grads) {
    const int m = static_cast<int>(c.active.size());
    const int A = cfg.att_dim;
    const int H1 = cfg.hidden1_dim;
    const int H2 = cfg.hidden2_dim;

    // aggregation -> dz
    Matrix dz(m, H2);
    if (cfg.pooling_mode == PoolingMode::kMax) {
        for (int j = 0; j < H2; ++j) dz.at(c.argmax[j], j) = dpool[j];
    } else {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < H2; ++j) dz.at(i, j) = dpool[j];
        }
    }

    Matrix ds(m, A);
    Vector dpre4(H2), du(H1), dpre3(H1);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < H2; ++j)
            dpre4[j] = dz.at(i, j) * lrelu_grad_scalar(c.pre4.at(i, j), cfg.lrelu_slope);
        accumulate_dense_grad(grad.hidden2, c.u.row(i), dpre4);
        backprop_dense(bp.hidden2, dpre4, du);

        for (int j = 0; j < H1; ++j) {
            const double uj = c.u.at(i, j);
            dpre3[j] = du[j] * (1.0 - uj * uj);
        }
        accumulate_dense_grad(grad.hidden1, c.weighted.row(i), dpre3);
        backprop_dense(bp.hidden1, dpre3, ds.row(i));
    }

    // attention -> dh
    Matrix dh(m, A);
    if (cfg.uniform_attention) {
        // weights are constants 1/m; only the direct state path carries gradient
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < A; ++j) dh.at(i, j) = c.weights[i] * ds.at(i, j);
        }
    } else if (cfg.attention_mode == AttentionMode::kScalar) {
        Vector dw(m);
        double wdw = 0.0;
        for (int i = 0; i < m; ++i) {
            dw[i] = dot(ds.row(i), c.h.row(i));
            wdw += c.weights[i] * dw[i];
            std::span<double> dhr = dh.row(i);
            std::span<const double> dsr = ds.row(i);
            for (int j = 0; j < A; ++j) dhr[j] = c.weights[i] * dsr[j];
        }
        for (int i = 0; i < m; ++i) {
            const double de = c.weights[i] * (dw[i] - wdw);
            std::span<const double> act = c.act.row(i);
            std::span<const double> h = c.h.row(i);
            std::span<double> dhr = dh.row(i);
            for (int j = 0; j < A; ++j) {
                grad.attention_score[j] += de * act[j];
                dhr[j] += de * bp.attention_score[j] * lrelu_grad_scalar(h[j], cfg.lrelu_slope);
            }
        }
    } else {
        for (int j = 0; j < A; ++j) {
            double wdw = 0.0;
            for (int i = 0; i < m; ++i) wdw += c.fw_weights.at(i, j) * ds.at(i, j) * c.h.at(i, j);
            for (int i = 0; i < m; ++i) {
                const double w = c.fw_weights.at(i, j);
                const double dwij = ds.at(i, j) * c.h.at(i, j);
                const double da = w * (dwij - wdw);
                dh.at(i, j) = w * ds.at(i, j) +
                              da * lrelu_grad_scalar(c.h.at(i, j), cfg.lrelu_slope);
            }
        }
    }

    Vector dx(cfg.input_dim());
    for (int i = 0; i < m; ++i) {
        accumulate_dense_grad(grad.attention, seq.rows.row(c.active[i]), dh.row(i));
        if (emb_grads) {
            backprop_dense(bp.attention, dh.row(i), dx);
            const int idx = vocab.lookup(seq.tokens[c.active[i]]);
            if (idx == Vocab::kPad) continue;
            Vector& acc = (*emb_grads)[idx];
            if (acc.empty()) acc.assign(cfg.emb_dim, 0.0);
            for (int j = 0; j < cfg.emb_dim; ++j) acc[j] += dx[j];  // flag dim is data, not learned
        }
    }
}

void scale_params(ModelParams& p, double s) {
    auto scale_branch = [s](BranchParams& b) {
        for (double& v : b.attention.W.data) v *= s;
        for (double& v : b.attention.b) v *= s;
        for (double& v : b.attention_score) v *= s;
        for (double& v : b.hidden1.W.data) v *= s;
        for (double& v : b.hidden1.b) v *= s;
        for (double& v : b.hidden2.W.data) v *= s;
        for (double& v : b.hidden2.b) v *= s;
    };
    scale_branch(p.question);
    scale_branch(p.answer);
    for (double& v : p.head.hidden.W.data) v *= s;
    for (double& v : p.head.hidden.b) v *= s;
    for (double& v : p.head.output.W.data) v *= s;
    for (double& v : p.head.output.b) v *= s;
}

void append_tensor(Vector& out, const Matrix& m) {
    out.insert(out.end(), m.data.begin(), m.data.end());
}
void append_tensor(Vector& out, const Vector& v) { out.insert(out.end(), v.begin(), v.end()); }

size_t take_tensor(const Vector& flat, size_t pos, Matrix& m) {
    std::copy(flat.begin() + pos, flat.begin() + pos + m.data.size(), m.data.begin());
    return pos + m.data.size();
}
size_t take_tensor(const Vector& flat, size_t pos, Vector& v) {
    std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
    return pos + v.size();
}

template <typename Fn>
void for_each_tensor(ModelParams& p, Fn&& fn) {
    for (BranchParams* b : {&p.question, &p.answer}) {
        fn(b->attention.W);
        fn(b->attention.b);
        fn(b->attention_score);
        fn(b->hidden1.W);
        fn(b->hidden1.b);
        fn(b->hidden2.W);
        fn(b->hidden2.b);
    }
    fn(p.head.hidden.W);
    fn(p.head.hidden.b);
    fn(p.head.output.W);
    fn(p.head.output.b);
}

template <typename Fn>
void for_each_tensor(const ModelParams& p, Fn&& fn) {
    for_each_tensor(const_cast<ModelParams&>(p), [&fn](auto& t) { fn(std::as_const(t)); });
}

constexpr char kCkptMagic[8] = {'A', 'R', 'N', 'K', 'C', 'K', 'P', '\0'};
constexpr uint32_t kCkptVersion = 1;

}  // namespace

void ModelConfig::validate() const {
    if (emb_dim < 1 || att_dim < 1 || hidden1_dim < 1 || hidden2_dim < 1 || head_hidden_dim < 1)
        throw ConfigError("model config: all dims must be >= 1");
    if (!(lrelu_slope > 0.0 && lrelu_slope < 1.0))
        throw ConfigError("model config: lrelu_slope must be in (0,1)");
    if (max_q_len < 1 || max_a_len < 1) throw ConfigError("model config: max lengths must be >= 1");
}

ModelParams init_params(const ModelConfig& cfg, int a_max_len, SeededRng& rng) {
    cfg.validate();
    if (a_max_len < 1) throw ConfigError("init_params: a_max_len must be >= 1");
    const double bound = std::sqrt(6.0 / a_max_len);

    ModelParams p = zero_params(cfg);
    auto init_branch = [&](BranchParams& b) {
        b.attention.W = init_uniform(cfg.input_dim(), cfg.att_dim, bound, rng);
        for (double& v : b.attention_score) v = rng.uniform(-bound, bound);
        b.hidden1.W = init_uniform(cfg.att_dim, cfg.hidden1_dim, bound, rng);
        b.hidden2.W = init_uniform(cfg.hidden1_dim, cfg.hidden2_dim, bound, rng);
    };
    init_branch(p.question);
    init_branch(p.answer);
    p.head.hidden.W = init_uniform(2 * cfg.hidden2_dim, cfg.head_hidden_dim, bound, rng);
    p.head.output.W = init_uniform(cfg.head_hidden_dim, 2, bound, rng);
    return p;
}

AttendResult attend(const SequenceMatrix& x, const BranchParams& bp, const ModelConfig& cfg,
                    Side side) {
    BranchCache c = branch_forward(x, bp, cfg);
    AttendResult r;
    r.weighted_states = Matrix(x.length(), cfg.att_dim);
    for (size_t i = 0; i < c.active.size(); ++i) {
        std::span<const double> src = c.weighted.row(static_cast<int>(i));
        std::copy(src.begin(), src.end(), r.weighted_states.row(c.active[i]).begin());
    }
    r.trace = trace_from_cache(x, c, side);
    return r;
}

EncodeResult encode_branch(const SequenceMatrix& x, const BranchParams& bp, const ModelConfig& cfg,
                           Side side) {
    BranchCache c = branch_forward(x, bp, cfg);
    return {c.pooled, trace_from_cache(x, c, side)};
}

ScoreResult score_pair(const Vector& question_vec, const Vector& answer_vec, const HeadParams& head,
                       const ModelConfig& cfg) {
    HeadCache c = head_forward(question_vec, answer_vec, head, cfg);
    return {c.probs[1], std::move(c.joint)};
}

ForwardResult forward(const TokenList& q_tokens, const TokenList& a_tokens, const ModelParams& params,
                      const ModelConfig& cfg, const Vocab& vocab, const EmbeddingMatrix& emb) {
    InstanceForward f = instance_forward(q_tokens, a_tokens, params, cfg, vocab, emb);
    ForwardResult r;
    r.relevance_prob = f.head.probs[1];
    r.q_trace = trace_from_cache(f.q_seq, f.q_cache, Side::kQuestion);
    r.a_trace = trace_from_cache(f.a_seq, f.a_cache, Side::kAnswer);
    return r;
}

double batch_loss(const std::vector<Instance>& batch, const ModelParams& params,
                  const ModelConfig& cfg, const Vocab& vocab, const EmbeddingMatrix& emb) {
    if (batch.empty()) throw DataError("batch_loss: empty batch");
    double total = 0.0;
    for (const Instance& inst : batch) {
        InstanceForward f =
            instance_forward(inst.q_tokens, inst.a_tokens, params, cfg, vocab, emb);
        total += -std::log(f.head.probs[inst.label]);
    }
    return total / static_cast<double>(batch.size());
}

BackwardResult backward(const std::vector<Instance>& batch, const ModelParams& params,
                        const ModelConfig& cfg, const Vocab& vocab, const EmbeddingMatrix& emb,
                        bool with_embedding_grads, double positive_weight) {
    if (batch.empty()) throw DataError("backward: empty batch");
    if (!(positive_weight > 0.0)) throw ConfigError("backward: positive_weight must be positive");

    BackwardResult r;
    r.grads.params = zero_params(cfg);
    double total_loss = 0.0;

    Vector dlogits(2), dhid(cfg.head_hidden_dim), dpre_head(cfg.head_hidden_dim);
    Vector djoint(2 * cfg.hidden2_dim);

    for (const Instance& inst : batch) {
        if (inst.label != 0 && inst.label != 1) throw DataError("backward: label must be 0 or 1");
        InstanceForward f =
            instance_forward(inst.q_tokens, inst.a_tokens, params, cfg, vocab, emb);
        const double w = inst.label == 1 ? positive_weight : 1.0;
        total_loss += -w * std::log(f.head.probs[inst.label]);

        // softmax + cross-entropy; clamped logits pass no gradient
        for (int k = 0; k < 2; ++k) {
            dlogits[k] = w * (f.head.probs[k] - (inst.label == k ? 1.0 : 0.0));
            if (std::fabs(f.head.logits[k]) > kLogitClamp) dlogits[k] = 0.0;
        }
        accumulate_dense_grad(r.grads.params.head.output, f.head.hid, dlogits);
        backprop_dense(params.head.output, dlogits, dhid);
        for (int j = 0; j < cfg.head_hidden_dim; ++j)
            dpre_head[j] = dhid[j] * (1.0 - f.head.hid[j] * f.head.hid[j]);
        accumulate_dense_grad(r.grads.params.head.hidden, f.head.joint, dpre_head);
        backprop_dense(params.head.hidden, dpre_head, djoint);

        Vector dq(djoint.begin(), djoint.begin() + cfg.hidden2_dim);
        Vector da(djoint.begin() + cfg.hidden2_dim, djoint.end());
        std::map<int, Vector>* eg = with_embedding_grads ? &r.grads.embedding : nullptr;
        branch_backward(f.q_seq, params.question, cfg, f.q_cache, dq, r.grads.params.question,
                        vocab, eg);
        branch_backward(f.a_seq, params.answer, cfg, f.a_cache, da, r.grads.params.answer, vocab,
                        eg);
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    scale_params(r.grads.params, inv_n);
    for (auto& [idx, g] : r.grads.embedding) {
        for (double& v : g) v *= inv_n;
    }
    r.mean_loss = total_loss * inv_n;
    return r;
}

Vector flatten(const ModelParams& params) {
    Vector out;
    for_each_tensor(params, [&out](const auto& t) { append_tensor(out, t); });
    return out;
}

ModelParams unflatten(const ModelConfig& cfg, const Vector& flat) {
    if (flat.size() != param_count(cfg))
        throw DimensionError("unflatten: flat vector size does not match config");
    ModelParams p = zero_params(cfg);
    size_t pos = 0;
    for_each_tensor(p, [&flat, &pos](auto& t) { pos = take_tensor(flat, pos, t); });
    return p;
}

size_t param_count(const ModelConfig& cfg) {
    const size_t branch = static_cast<size_t>(cfg.input_dim()) * cfg.att_dim + cfg.att_dim +
                          cfg.att_dim + static_cast<size_t>(cfg.att_dim) * cfg.hidden1_dim +
                          cfg.hidden1_dim + static_cast<size_t>(cfg.hidden1_dim) * cfg.hidden2_dim +
                          cfg.hidden2_dim;
    const size_t head = static_cast<size_t>(2 * cfg.hidden2_dim) * cfg.head_hidden_dim +
                        cfg.head_hidden_dim + static_cast<size_t>(cfg.head_hidden_dim) * 2 + 2;
    return 2 * branch + head;
}

void save_checkpoint(const std::string& path, const ModelConfig& cfg, const ModelParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_checkpoint: cannot open " + path);
    os.write(kCkptMagic, 8);
    write_u32(os, kCkptVersion);
    write_u32(os, static_cast<uint32_t>(cfg.emb_dim));
    write_u32(os, static_cast<uint32_t>(cfg.att_dim));
    write_u32(os, static_cast<uint32_t>(cfg.hidden1_dim));
    write_u32(os, static_cast<uint32_t>(cfg.hidden2_dim));
    write_u32(os, static_cast<uint32_t>(cfg.head_hidden_dim));
    write_u32(os, static_cast<uint32_t>(cfg.max_q_len));
    write_u32(os, static_cast<uint32_t>(cfg.max_a_len));
    write_f64(os, cfg.lrelu_slope);
    const unsigned char flags[4] = {
        static_cast<unsigned char>(cfg.attention_mode == AttentionMode::kFeaturewise ? 1 : 0),
        static_cast<unsigned char>(cfg.pooling_mode == PoolingMode::kSum ? 1 : 0),
        static_cast<unsigned char>(cfg.uniform_attention ? 1 : 0), 0};
    os.write(reinterpret_cast<const char*>(flags), 4);

    for_each_tensor(params, [&os](const auto& t) {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
            write_u32(os, static_cast<uint32_t>(t.rows));
            write_u32(os, static_cast<uint32_t>(t.cols));
            for (double v : t.data) write_f64(os, v);
        } else {
            write_u32(os, 1);
            write_u32(os, static_cast<uint32_t>(t.size()));
            for (double v : t) write_f64(os, v);
        }
    });
    if (!os) throw IoError("save_checkpoint: write failed for " + path);
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw IoError("load_checkpoint: bad magic in " + path);
    if (read_u32(is) != kCkptVersion) throw IoError("load_checkpoint: unsupported format version");

    ModelConfig cfg;
    cfg.emb_dim = static_cast<int>(read_u32(is));
    cfg.att_dim = static_cast<int>(read_u32(is));
    cfg.hidden1_dim = static_cast<int>(read_u32(is));
    cfg.hidden2_dim = static_cast<int>(read_u32(is));
    cfg.head_hidden_dim = static_cast<int>(read_u32(is));
    cfg.max_q_len = static_cast<int>(read_u32(is));
    cfg.max_a_len = static_cast<int>(read_u32(is));
    cfg.lrelu_slope = read_f64(is);
    unsigned char flags[4];
    is.read(reinterpret_cast<char*>(flags), 4);
    if (!is) throw IoError("load_checkpoint: truncated header");
    cfg.attention_mode = flags[0] ? AttentionMode::kFeaturewise : AttentionMode::kScalar;
    cfg.pooling_mode = flags[1] ? PoolingMode::kSum : PoolingMode::kMax;
    cfg.uniform_attention = flags[2] != 0;
    cfg.validate();

    ModelParams p = zero_params(cfg);
    for_each_tensor(p, [&is, &path](auto& t) {
        const int rows = static_cast<int>(read_u32(is));
        const int cols = static_cast<int>(read_u32(is));
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
            if (rows != t.rows || cols != t.cols)
                throw IoError("load_checkpoint: tensor shape mismatch in " + path);
            for (double& v : t.data) v = read_f64(is);
        } else {
            if (rows != 1 || cols != static_cast<int>(t.size()))
                throw IoError("load_checkpoint: tensor shape mismatch in " + path);
            for (double& v : t) v = read_f64(is);
        }
    });
    return {cfg, std::move(p)};
}

const char* to_string(AttentionMode m) {
    return m == AttentionMode::kScalar ? "scalar" : "featurewise";
}
const char* to_string(PoolingMode m) { return m == PoolingMode::kMax ? "max" : "sum"; }

AttentionMode attention_mode_from_string(const std::string& s) {
    if (s == "scalar") return AttentionMode::kScalar;
    if (s == "featurewise") return AttentionMode::kFeaturewise;
    throw ConfigError("unknown attention mode: " + s);
}

PoolingMode pooling_mode_from_string(const std::string& s) {
    if (s == "max") return PoolingMode::kMax;
    if (s == "sum") return PoolingMode::kSum;
    throw ConfigError("unknown pooling mode: " + s);
}

}  // namespace attnrank
