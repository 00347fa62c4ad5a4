#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "attnrank/data_io.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace attnrank;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    os << content;
}

const char* kHeader = "question_id\tquestion\tanswer_id\tanswer\tgrade\n";

}  // namespace

TEST_CASE("record format loads a small fixture") {
    const std::string path = temp_path("attnrank_records.tsv");
    write_file(path, std::string(kHeader) +
                         "q1\twho founded it\ta1\tthe founder was alice\t1\n"
                         "q1\twho founded it\ta2\tunrelated text\t0\n"
                         "q2\twhere is it\tb1\tit is in paris\t1\n");
    std::vector<QuestionGroup> groups = load_dataset(path, DatasetFormat::kRecords);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].question_id == "q1");
    CHECK(groups[0].candidates.size() == 2);
    CHECK(groups[0].candidates[1].grade == 0);
    CHECK(groups[1].candidates.size() == 1);
    std::remove(path.c_str());
}

TEST_CASE("record format groups non-adjacent records by question id") {
    const std::string path = temp_path("attnrank_records_scattered.tsv");
    write_file(path, std::string(kHeader) +
                         "q1\tfirst question\ta1\tanswer one\t1\n"
                         "q2\tsecond question\tb1\tanswer two\t0\n"
                         "q1\tfirst question\ta2\tanswer three\t0\n");
    std::vector<QuestionGroup> groups = load_dataset(path, DatasetFormat::kRecords);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].candidates.size() == 2);
    std::remove(path.c_str());
}

TEST_CASE("record format rejects malformed input with line numbers") {
    const std::string path = temp_path("attnrank_records_bad.tsv");

    write_file(path, std::string(kHeader) + "q1\t\ta1\tanswer\t1\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::kRecords),
                         doctest::Contains("line 2"), DataError);

    write_file(path, std::string(kHeader) + "q1\tquestion\ta1\tanswer\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::kRecords),
                         doctest::Contains("expected 5 fields"), DataError);

    write_file(path, std::string(kHeader) + "q1\tquestion\ta1\tanswer\tnope\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::kRecords),
                         doctest::Contains("bad grade"), DataError);

    write_file(path, std::string(kHeader) +
                         "q1\tquestion\ta1\tanswer\t1\n"
                         "q1\tquestion\ta1\tother answer\t0\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::kRecords),
                         doctest::Contains("duplicate answer_id"), DataError);

    write_file(path, "wrong\theader\n");
    CHECK_THROWS_AS(load_dataset(path, DatasetFormat::kRecords), DataError);

    CHECK_THROWS_AS(load_dataset(temp_path("attnrank_missing.tsv"), DatasetFormat::kRecords),
                    IoError);
    std::remove(path.c_str());
}

TEST_CASE("record format round-trips text with tabs, newlines and backslashes") {
    std::vector<QuestionGroup> groups;
    QuestionGroup g;
    g.question_id = "q1";
    g.question = "what is\ta tab\nand a newline \\ and a backslash";
    g.candidates.push_back({"a1", "an answer\twith\nescapes \\too", 3});
    g.candidates.push_back({"a2", "plain answer", 0});
    groups.push_back(g);

    const std::string path = temp_path("attnrank_records_rt.tsv");
    save_records(path, groups);
    std::vector<QuestionGroup> loaded = load_dataset(path, DatasetFormat::kRecords);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].question_id == g.question_id);
    CHECK(loaded[0].question == g.question);
    REQUIRE(loaded[0].candidates.size() == 2);
    CHECK(loaded[0].candidates[0].answer == g.candidates[0].answer);
    CHECK(loaded[0].candidates[0].grade == 3);
    CHECK(loaded[0].candidates[1].answer == g.candidates[1].answer);
    std::remove(path.c_str());
}

TEST_CASE("trec-qa fixture loads with binary grades") {
    const std::string path = std::string(ATTNRANK_FIXTURES) + "/trecqa_fixture.txt";
    std::vector<QuestionGroup> groups = load_dataset(path, DatasetFormat::kTrecQa);
    REQUIRE(groups.size() == 5);
    CHECK(groups[0].question_id == "1.1");
    CHECK(groups[0].question == "who founded the red cross");
    REQUIRE(groups[0].candidates.size() == 3);
    CHECK(groups[0].candidates[0].grade == 1);
    CHECK(groups[0].candidates[0].answer == "henry dunant founded the red cross in 1863");
    CHECK(groups[0].candidates[1].grade == 0);
    CHECK(groups[2].candidates.size() == 4);

    std::set<int> grades;
    for (const QuestionGroup& g : groups) {
        for (const Candidate& c : g.candidates) grades.insert(c.grade);
    }
    CHECK(grades == std::set<int>{0, 1});
}

TEST_CASE("synthetic corpus has the advertised counts and is deterministic") {
    SyntheticSpec spec;
    spec.train_questions = 30;
    spec.candidates_per_question = 4;
    spec.relevant_per_question = 1;

    DatasetSplit split = generate_synthetic(spec);
    CHECK(split.train.size() == 30);
    CHECK(split.dev.empty());
    CHECK(split.test.empty());

    int pairs = 0, positives = 0;
    for (const QuestionGroup& g : split.train) {
        CHECK(g.candidates.size() == 4);
        for (const Candidate& c : g.candidates) {
            ++pairs;
            positives += c.grade;
        }
    }
    CHECK(pairs == 120);
    CHECK(positives == 30);

    DatasetSplit again = generate_synthetic(spec);
    for (size_t i = 0; i < split.train.size(); ++i) {
        CHECK(split.train[i].question == again.train[i].question);
        for (size_t j = 0; j < split.train[i].candidates.size(); ++j)
            CHECK(split.train[i].candidates[j].answer == again.train[i].candidates[j].answer);
    }
}

TEST_CASE("long-noise mode buries the keyword in filler") {
    SyntheticSpec spec;
    spec.train_questions = 5;
    spec.answer_len = 10;
    spec.noise_len = 110;
    spec.length_jitter = 10;

    DatasetSplit split = generate_synthetic(spec);
    for (const QuestionGroup& g : split.train) {
        const std::string keyword = "kw" + g.question_id.substr(1);
        for (const Candidate& c : g.candidates) {
            const TokenList toks = tokenize(c.answer);
            CHECK(toks.size() >= 100);
            const bool has_kw =
                std::find(toks.begin(), toks.end(), keyword) != toks.end();
            CHECK(has_kw == (c.grade == 1));
        }
    }
}

TEST_CASE("synthetic generator rejects infeasible specs") {
    SyntheticSpec spec;
    spec.filler_vocab = 2;
    spec.question_fillers = 3;  // cannot draw 3 distinct fillers from 2
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);

    SyntheticSpec spec2;
    spec2.relevant_per_question = 5;
    spec2.candidates_per_question = 4;
    CHECK_THROWS_AS(generate_synthetic(spec2), ConfigError);

    SyntheticSpec spec3;
    spec3.answer_len = 2;  // keyword + 3 echoes cannot fit
    CHECK_THROWS_AS(generate_synthetic(spec3), ConfigError);
}

TEST_CASE("synthetic corpora are solvable by the overlap baseline") {
    SyntheticSpec spec;
    spec.train_questions = 40;
    CHECK(test_oracles::overlap_baseline_mrr(generate_synthetic(spec).train) > 0.9);

    SyntheticSpec noisy;
    noisy.train_questions = 40;
    noisy.answer_len = 10;
    noisy.noise_len = 100;
    noisy.length_jitter = 20;
    CHECK(test_oracles::overlap_baseline_mrr(generate_synthetic(noisy).train) > 0.9);
}

TEST_CASE("split_dataset partitions deterministically") {
    std::vector<QuestionGroup> groups;
    for (int i = 0; i < 10; ++i) {
        groups.push_back({"q" + std::to_string(i), "question " + std::to_string(i),
                          {{"a", "some answer", 1}}});
    }
    DatasetSplit s = split_dataset(groups, 0.8, 0.1, 0.1, 7);
    CHECK(s.train.size() == 8);
    CHECK(s.dev.size() == 1);
    CHECK(s.test.size() == 1);

    DatasetSplit s2 = split_dataset(groups, 0.8, 0.1, 0.1, 7);
    CHECK(s.train[0].question_id == s2.train[0].question_id);
    CHECK(s.dev[0].question_id == s2.dev[0].question_id);

    std::set<std::string> seen;
    for (const auto& part : {s.train, s.dev, s.test}) {
        for (const QuestionGroup& g : part) CHECK(seen.insert(g.question_id).second);
    }
    CHECK(seen.size() == 10);

    CHECK_THROWS_AS(split_dataset(groups, 0.5, 0.5, 0.5, 7), ConfigError);
    std::vector<QuestionGroup> two(groups.begin(), groups.begin() + 2);
    CHECK_THROWS_AS(split_dataset(two, 0.8, 0.1, 0.1, 7), DataError);
}
