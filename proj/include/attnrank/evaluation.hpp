#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attnrank/data_io.hpp"
#include "attnrank/model.hpp"

namespace attnrank {

struct RankedCandidate {
    std::string answer_id;
    double score = 0.0;
    int grade = 0;
    int answer_len = 0;  // token count
};

/// Candidates of one question ordered by score descending; ties keep the
/// original candidate order.
struct RankedQuestion {
    std::string question_id;
    std::vector<RankedCandidate> ranked;
};

using RankedRun = std::vector<RankedQuestion>;

struct RankResult {
    RankedQuestion entry;
    AttentionTrace question_trace;
    std::vector<AttentionTrace> answer_traces;  // aligned with entry.ranked
};

/// How a question's "answer length" is chosen for the bucket report.
enum class BucketKey { kMaxCandidate, kMeanCandidate, kTopRanked };

struct BucketMetrics {
    std::string label;
    int low = 0;   // exclusive, -1 for the open left end
    int high = 0;  // inclusive, -1 for the open right end
    double mrr = 0.0;
    double ndcg = 0.0;
    int n_questions = 0;
};

struct EvalReport {
    double mrr = 0.0;
    double ndcg = 0.0;
    int n_questions = 0;
    std::vector<BucketMetrics> buckets;
};

/// Scores every candidate with the full forward pass and sorts descending
/// (stable). Traces are kept for the explain path.
RankResult rank_answers(const ModelParams& params, const ModelConfig& cfg, const Vocab& vocab,
                        const EmbeddingMatrix& emb, const QuestionGroup& group);

RankedRun rank_dataset(const ModelParams& params, const ModelConfig& cfg, const Vocab& vocab,
                       const EmbeddingMatrix& emb, const std::vector<QuestionGroup>& groups);

/// Mean reciprocal rank of the first relevant candidate (grade >=
/// relevance_threshold). Questions without any relevant candidate contribute
/// 0 unless drop_unanswerable is set.
double mrr(const RankedRun& run, int relevance_threshold = 1, bool drop_unanswerable = false);

/// NDCG with exponential gain (2^grade - 1), log2(rank + 1) discount, over
/// the full returned list. Questions with all-zero grades contribute 0.
double ndcg(const RankedRun& run);

/// Groups questions by answer length (see BucketKey) into intervals defined
/// by the strictly increasing edges: <= e1, (e1, e2], ..., > ek.
EvalReport length_bucket_report(const RankedRun& run, const std::vector<int>& bucket_edges,
                                int relevance_threshold = 1,
                                BucketKey key = BucketKey::kMaxCandidate);

/// Run file: one line per candidate, tab-separated
/// (question_id, answer_id, rank, score, grade, answer_len).
void save_run(const std::string& path, const RankedRun& run);
RankedRun load_run(const std::string& path);

/// Human-readable table and machine-readable CSV of global and per-bucket
/// metrics.
std::string format_report(const EvalReport& report);
void save_report_csv(const std::string& path, const EvalReport& report);

}  // namespace attnrank
