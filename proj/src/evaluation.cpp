#include "attnrank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace attnrank {

namespace {

double dcg(const std::vector<int>& grades) {
    double s = 0.0;
    for (size_t i = 0; i < grades.size(); ++i) {
        s += (std::pow(2.0, grades[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
}

std::string format_score(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

RankResult rank_answers(const ModelParams& params, const ModelConfig& cfg, const Vocab& vocab,
                        const EmbeddingMatrix& emb, const QuestionGroup& group) {
    if (group.candidates.empty())
        throw DataError("rank_answers: question '" + group.question_id + "' has no candidates");

    const TokenList q_tokens = tokenize(group.question);
    if (q_tokens.empty())
        throw DataError("rank_answers: question '" + group.question_id + "' has no tokens");

    struct Scored {
        RankedCandidate cand;
        AttentionTrace trace;
        size_t input_order;
    };
    std::vector<Scored> scored;
    scored.reserve(group.candidates.size());
    AttentionTrace q_trace;
    for (size_t i = 0; i < group.candidates.size(); ++i) {
        const Candidate& c = group.candidates[i];
        const TokenList a_tokens = tokenize(c.answer);
        if (a_tokens.empty())
            throw DataError("rank_answers: answer '" + c.answer_id + "' has no tokens");
        ForwardResult f = forward(q_tokens, a_tokens, params, cfg, vocab, emb);
        if (i == 0) q_trace = f.q_trace;
        scored.push_back({{c.answer_id, f.relevance_prob, c.grade, static_cast<int>(a_tokens.size())},
                          std::move(f.a_trace),
                          i});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.cand.score > b.cand.score; });

    RankResult r;
    r.entry.question_id = group.question_id;
    r.question_trace = std::move(q_trace);
    for (Scored& s : scored) {
        r.entry.ranked.push_back(std::move(s.cand));
        r.answer_traces.push_back(std::move(s.trace));
    }
    return r;
}

RankedRun rank_dataset(const ModelParams& params, const ModelConfig& cfg, const Vocab& vocab,
                       const EmbeddingMatrix& emb, const std::vector<QuestionGroup>& groups) {
    RankedRun run;
    run.reserve(groups.size());
    for (const QuestionGroup& g : groups) {
        run.push_back(rank_answers(params, cfg, vocab, emb, g).entry);
    }
    return run;
}

double mrr(const RankedRun& run, int relevance_threshold, bool drop_unanswerable) {
    if (run.empty()) throw DataError("mrr: empty run");
    double total = 0.0;
    int counted = 0;
    for (const RankedQuestion& q : run) {
        if (q.ranked.empty()) throw DataError("mrr: question '" + q.question_id + "' has no candidates");
        double rr = 0.0;
        for (size_t i = 0; i < q.ranked.size(); ++i) {
            if (q.ranked[i].grade >= relevance_threshold) {
                rr = 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
        if (rr == 0.0 && drop_unanswerable) continue;
        total += rr;
        ++counted;
    }
    return counted == 0 ? 0.0 : total / counted;
}

double ndcg(const RankedRun& run) {
    if (run.empty()) throw DataError("ndcg: empty run");
    double total = 0.0;
    for (const RankedQuestion& q : run) {
        std::vector<int> grades;
        grades.reserve(q.ranked.size());
        for (const RankedCandidate& c : q.ranked) {
            if (c.grade < 0) throw DataError("ndcg: negative grade in question '" + q.question_id + "'");
            grades.push_back(c.grade);
        }
        std::vector<int> ideal = grades;
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        const double idcg = dcg(ideal);
        if (idcg > 0.0) total += dcg(grades) / idcg;
    }
    return total / static_cast<double>(run.size());
}

EvalReport length_bucket_report(const RankedRun& run, const std::vector<int>& bucket_edges,
                                int relevance_threshold, BucketKey key) {
    for (size_t i = 1; i < bucket_edges.size(); ++i) {
        if (bucket_edges[i] <= bucket_edges[i - 1])
            throw ConfigError("length_bucket_report: edges must be strictly increasing");
    }

    EvalReport report;
    report.n_questions = static_cast<int>(run.size());
    report.mrr = mrr(run, relevance_threshold);
    report.ndcg = ndcg(run);

    const int n_buckets = static_cast<int>(bucket_edges.size()) + 1;
    std::vector<RankedRun> partition(n_buckets);
    for (const RankedQuestion& q : run) {
        int length = 0;
        if (q.ranked.empty()) throw DataError("length_bucket_report: empty candidate list");
        switch (key) {
            case BucketKey::kMaxCandidate:
                for (const RankedCandidate& c : q.ranked) length = std::max(length, c.answer_len);
                break;
            case BucketKey::kMeanCandidate: {
                long sum = 0;
                for (const RankedCandidate& c : q.ranked) sum += c.answer_len;
                length = static_cast<int>(sum / static_cast<long>(q.ranked.size()));
                break;
            }
            case BucketKey::kTopRanked:
                length = q.ranked.front().answer_len;
                break;
        }
        int bucket = n_buckets - 1;
        for (size_t e = 0; e < bucket_edges.size(); ++e) {
            if (length <= bucket_edges[e]) {
                bucket = static_cast<int>(e);
                break;
            }
        }
        partition[bucket].push_back(q);
    }

    for (int b = 0; b < n_buckets; ++b) {
        BucketMetrics m;
        if (b == 0) {
            m.low = -1;
            m.high = bucket_edges.empty() ? -1 : bucket_edges[0];
            m.label = bucket_edges.empty() ? "all" : "len<=" + std::to_string(bucket_edges[0]);
        } else if (b == n_buckets - 1) {
            m.low = bucket_edges.back();
            m.high = -1;
            m.label = "len>" + std::to_string(bucket_edges.back());
        } else {
            m.low = bucket_edges[b - 1];
            m.high = bucket_edges[b];
            m.label = std::to_string(bucket_edges[b - 1]) + "<len<=" + std::to_string(bucket_edges[b]);
        }
        m.n_questions = static_cast<int>(partition[b].size());
        if (!partition[b].empty()) {
            m.mrr = mrr(partition[b], relevance_threshold);
            m.ndcg = ndcg(partition[b]);
        }
        report.buckets.push_back(std::move(m));
    }
    return report;
}

void save_run(const std::string& path, const RankedRun& run) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_run: cannot open " + path);
    for (const RankedQuestion& q : run) {
        for (size_t i = 0; i < q.ranked.size(); ++i) {
            const RankedCandidate& c = q.ranked[i];
            os << q.question_id << '\t' << c.answer_id << '\t' << (i + 1) << '\t'
               << format_score(c.score) << '\t' << c.grade << '\t' << c.answer_len << '\n';
        }
    }
    if (!os) throw IoError("save_run: write failed for " + path);
}

RankedRun load_run(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_run: cannot open " + path);
    RankedRun run;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, aid;
        int rank, grade, alen;
        double score;
        if (!(std::getline(ss, qid, '\t') && std::getline(ss, aid, '\t') && (ss >> rank) &&
              ss.ignore(1) && (ss >> score) && ss.ignore(1) && (ss >> grade) && ss.ignore(1) &&
              (ss >> alen)))
            throw DataError("run file line " + std::to_string(line_no) + ": malformed");
        if (run.empty() || run.back().question_id != qid) run.push_back({qid, {}});
        run.back().ranked.push_back({aid, score, grade, alen});
    }
    return run;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %8s\n", "scope", "mrr", "ndcg", "n");
    os << buf;
    std::snprintf(buf, sizeof(buf), "%-16s %10.4f %10.4f %8d\n", "global", report.mrr, report.ndcg,
                  report.n_questions);
    os << buf;
    for (const BucketMetrics& b : report.buckets) {
        std::snprintf(buf, sizeof(buf), "%-16s %10.4f %10.4f %8d\n", b.label.c_str(), b.mrr, b.ndcg,
                      b.n_questions);
        os << buf;
    }
    return os.str();
}

void save_report_csv(const std::string& path, const EvalReport& report) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_report_csv: cannot open " + path);
    os << "scope,low,high,mrr,ndcg,n_questions\n";
    os << "global,,," << format_score(report.mrr) << ',' << format_score(report.ndcg) << ','
       << report.n_questions << '\n';
    for (const BucketMetrics& b : report.buckets) {
        os << b.label << ',';
        if (b.low >= 0) os << b.low;
        os << ',';
        if (b.high >= 0) os << b.high;
        os << ',' << format_score(b.mrr) << ',' << format_score(b.ndcg) << ',' << b.n_questions
           << '\n';
    }
    if (!os) throw IoError("save_report_csv: write failed for " + path);
}

}  // namespace attnrank
