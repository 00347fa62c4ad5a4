#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "attnrank/evaluation.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace attnrank;

namespace {

RankedQuestion question_with_grades(const std::string& id, const std::vector<int>& grades) {
    RankedQuestion q;
    q.question_id = id;
    for (size_t i = 0; i < grades.size(); ++i) {
        q.ranked.push_back({"a" + std::to_string(i),
                            1.0 - 0.1 * static_cast<double>(i), grades[i],
                            5 + static_cast<int>(i)});
    }
    return q;
}

// stable sort by score descending, as rank_answers does
void sort_ranked(RankedQuestion& q) {
    std::stable_sort(q.ranked.begin(), q.ranked.end(),
                     [](const RankedCandidate& a, const RankedCandidate& b) {
                         return a.score > b.score;
                     });
}

}  // namespace

TEST_CASE("mrr hand-computed values") {
    CHECK(mrr({question_with_grades("q1", {1, 0})}) == 1.0);

    RankedRun two = {question_with_grades("q1", {0, 1, 0}),
                     question_with_grades("q2", {0, 0, 0, 1})};
    CHECK(mrr(two) == doctest::Approx(0.375).epsilon(1e-15));  // (1/2 + 1/4) / 2

    RankedRun with_empty = {question_with_grades("q1", {1}),
                            question_with_grades("q2", {0, 0})};
    CHECK(mrr(with_empty) == 0.5);                       // unanswerable contributes 0
    CHECK(mrr(with_empty, 1, true) == 1.0);              // or is dropped on request
    CHECK(mrr({question_with_grades("q", {3, 0})}, 3) == 1.0);  // graded threshold
    CHECK(mrr({question_with_grades("q", {2, 3})}, 3) == 0.5);

    CHECK_THROWS_AS(mrr({}), DataError);
}

TEST_CASE("ndcg hand-computed values") {
    CHECK(ndcg({question_with_grades("q", {3, 2, 1, 0})}) == 1.0);  // already ideal

    // grades [0, 3] ranked worst-first: DCG = 7/log2(3), IDCG = 7
    const double expected = (7.0 / std::log2(3.0)) / 7.0;
    CHECK(ndcg({question_with_grades("q", {0, 3})}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.6309297535714574).epsilon(1e-12));

    CHECK(ndcg({question_with_grades("q", {0, 0, 0})}) == 0.0);  // all-zero contributes 0

    RankedRun negative = {question_with_grades("q", {1, -1})};
    CHECK_THROWS_AS(ndcg(negative), DataError);
    CHECK_THROWS_AS(ndcg({}), DataError);
}

TEST_CASE("ndcg matches the brute-force permutation scorer") {
    SeededRng rng(19);
    for (int it = 0; it < 60; ++it) {
        const int n = 1 + rng.uniform_int(8);
        std::vector<int> grades(n);
        for (int& g : grades) g = rng.uniform_int(4);
        const double got = ndcg({question_with_grades("q", grades)});
        const double want = test_oracles::brute_force_ndcg(grades);
        CHECK(std::fabs(got - want) <= 1e-12);
    }
}

TEST_CASE("metrics are invariant under strictly monotone score transforms") {
    SeededRng rng(29);
    for (int it = 0; it < 20; ++it) {
        RankedQuestion q;
        q.question_id = "q";
        const int n = 2 + rng.uniform_int(6);
        for (int i = 0; i < n; ++i) {
            q.ranked.push_back({"a" + std::to_string(i), rng.uniform(-3.0, 3.0),
                                rng.uniform_int(3), 4 + rng.uniform_int(20)});
        }
        sort_ranked(q);
        const double base_mrr = mrr({q});
        const double base_ndcg = ndcg({q});

        RankedQuestion scaled = q;
        for (RankedCandidate& c : scaled.ranked) c.score = 2.0 * c.score + 1.0;
        sort_ranked(scaled);
        RankedQuestion exped = q;
        for (RankedCandidate& c : exped.ranked) c.score = std::exp(c.score);
        sort_ranked(exped);

        CHECK(mrr({scaled}) == base_mrr);
        CHECK(ndcg({scaled}) == base_ndcg);
        CHECK(mrr({exped}) == base_mrr);
        CHECK(ndcg({exped}) == base_ndcg);
    }
}

TEST_CASE("swapping an adjacent relevant/irrelevant pair strictly lowers the metrics") {
    // ideal order scores 1.0 on both metrics
    RankedQuestion ideal = question_with_grades("q", {1, 1, 0, 0});
    CHECK(mrr({ideal}) == 1.0);
    CHECK(ndcg({ideal}) == 1.0);

    // swap around the first relevant: MRR and NDCG both drop
    RankedQuestion swapped_first = question_with_grades("q", {0, 1, 1, 0});
    CHECK(mrr({swapped_first}) < 1.0);
    CHECK(ndcg({swapped_first}) < 1.0);

    // swap deeper in the list: NDCG strictly drops
    RankedQuestion swapped_deep = question_with_grades("q", {1, 0, 1, 0});
    CHECK(ndcg({swapped_deep}) < 1.0);
    CHECK(mrr({swapped_deep}) == 1.0);  // first relevant unchanged
}

TEST_CASE("rank_answers sorts stably and keeps traces") {
    // a tiny random model; identical answers tie and keep input order
    std::vector<TokenList> corpus = {{"alpha", "beta", "gamma", "delta"}};
    Vocab vocab = build_vocab(corpus, 1);
    SeededRng rng(31);
    EmbeddingMatrix emb;
    emb.vectors = Matrix(vocab.size(), 4);
    for (int i = 1; i < vocab.size(); ++i) {
        for (int j = 0; j < 4; ++j) emb.vectors.at(i, j) = rng.uniform(-1.0, 1.0);
    }
    ModelConfig cfg;
    cfg.emb_dim = 4;
    cfg.att_dim = 4;
    cfg.hidden1_dim = 4;
    cfg.hidden2_dim = 4;
    cfg.head_hidden_dim = 4;
    ModelParams params = init_params(cfg, 8, rng);

    QuestionGroup g;
    g.question_id = "q1";
    g.question = "alpha beta";
    g.candidates = {{"a", "gamma delta", 0}, {"b", "alpha beta", 1}, {"c", "alpha beta", 1}};

    RankResult r = rank_answers(params, cfg, vocab, emb, g);
    REQUIRE(r.entry.ranked.size() == 3);
    REQUIRE(r.answer_traces.size() == 3);

    // scores non-increasing
    CHECK(r.entry.ranked[0].score >= r.entry.ranked[1].score);
    CHECK(r.entry.ranked[1].score >= r.entry.ranked[2].score);

    // b and c have identical text, so identical scores; b must precede c
    size_t pos_b = 0, pos_c = 0;
    for (size_t i = 0; i < 3; ++i) {
        if (r.entry.ranked[i].answer_id == "b") pos_b = i;
        if (r.entry.ranked[i].answer_id == "c") pos_c = i;
    }
    CHECK(r.entry.ranked[pos_b].score == r.entry.ranked[pos_c].score);
    CHECK(pos_b < pos_c);

    // single candidate ranks first
    QuestionGroup single;
    single.question_id = "q2";
    single.question = "alpha";
    single.candidates = {{"only", "beta", 1}};
    CHECK(rank_answers(params, cfg, vocab, emb, single).entry.ranked.size() == 1);

    QuestionGroup empty;
    empty.question_id = "q3";
    empty.question = "alpha";
    CHECK_THROWS_AS(rank_answers(params, cfg, vocab, emb, empty), DataError);
}

TEST_CASE("bucket report partitions and aggregates") {
    RankedRun run;
    // lengths chosen to land in three different buckets (max candidate length)
    RankedQuestion q1 = question_with_grades("q1", {1, 0});  // lens 5, 6
    RankedQuestion q2 = question_with_grades("q2", {0, 1});  // -> mrr 0.5
    for (RankedCandidate& c : q2.ranked) c.answer_len = 30;
    RankedQuestion q3 = question_with_grades("q3", {1});
    q3.ranked[0].answer_len = 120;
    run = {q1, q2, q3};

    EvalReport report = length_bucket_report(run, {10, 50});
    REQUIRE(report.buckets.size() == 3);
    CHECK(report.buckets[0].label == "len<=10");
    CHECK(report.buckets[1].label == "10<len<=50");
    CHECK(report.buckets[2].label == "len>50");
    CHECK(report.buckets[0].n_questions == 1);
    CHECK(report.buckets[1].n_questions == 1);
    CHECK(report.buckets[2].n_questions == 1);
    CHECK(report.buckets[0].mrr == 1.0);
    CHECK(report.buckets[1].mrr == 0.5);

    int total = 0;
    double weighted = 0.0;
    for (const BucketMetrics& b : report.buckets) {
        total += b.n_questions;
        weighted += b.mrr * b.n_questions;
    }
    CHECK(total == report.n_questions);
    CHECK(weighted / total == doctest::Approx(report.mrr).epsilon(1e-12));

    // one bucket spanning everything reproduces the global numbers
    EvalReport whole = length_bucket_report(run, {});
    REQUIRE(whole.buckets.size() == 1);
    CHECK(whole.buckets[0].mrr == whole.mrr);
    CHECK(whole.buckets[0].ndcg == whole.ndcg);
    CHECK(whole.buckets[0].n_questions == 3);

    // empty bucket reported with n = 0
    EvalReport sparse = length_bucket_report(run, {1000, 2000});
    CHECK(sparse.buckets[1].n_questions == 0);
    CHECK(sparse.buckets[1].mrr == 0.0);

    CHECK_THROWS_AS(length_bucket_report(run, {50, 10}), ConfigError);
}

TEST_CASE("run file round-trips") {
    RankedRun run = {question_with_grades("q1", {1, 0, 0}), question_with_grades("q2", {0, 2})};
    const std::string path =
        (std::filesystem::temp_directory_path() / "attnrank_run_test.tsv").string();
    save_run(path, run);

    RankedRun loaded = load_run(path);
    REQUIRE(loaded.size() == 2);
    REQUIRE(loaded[0].ranked.size() == 3);
    for (size_t q = 0; q < run.size(); ++q) {
        CHECK(loaded[q].question_id == run[q].question_id);
        for (size_t i = 0; i < run[q].ranked.size(); ++i) {
            CHECK(loaded[q].ranked[i].answer_id == run[q].ranked[i].answer_id);
            CHECK(loaded[q].ranked[i].score ==
                  doctest::Approx(run[q].ranked[i].score).epsilon(1e-9));
            CHECK(loaded[q].ranked[i].grade == run[q].ranked[i].grade);
            CHECK(loaded[q].ranked[i].answer_len == run[q].ranked[i].answer_len);
        }
    }

    // line count equals total candidates
    std::ifstream is(path);
    int lines = 0;
    std::string line;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 5);
    std::remove(path.c_str());
}

TEST_CASE("report rendering includes global and bucket rows") {
    RankedRun run = {question_with_grades("q1", {1, 0})};
    EvalReport report = length_bucket_report(run, {25});
    const std::string text = format_report(report);
    CHECK(text.find("global") != std::string::npos);
    CHECK(text.find("len<=25") != std::string::npos);
    CHECK(text.find("len>25") != std::string::npos);

    const std::string path =
        (std::filesystem::temp_directory_path() / "attnrank_report_test.csv").string();
    save_report_csv(path, report);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "scope,low,high,mrr,ndcg,n_questions");
    int rows = 0;
    std::string line;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);  // global + two buckets
    std::remove(path.c_str());
}
