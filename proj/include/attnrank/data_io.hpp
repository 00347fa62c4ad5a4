#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attnrank/numerics.hpp"
#include "attnrank/text.hpp"

namespace attnrank {

struct Candidate {
    std::string answer_id;
    std::string answer;
    int grade = 0;  // non-negative; binary datasets use {0,1}
};

/// A question with its candidate answers. answer_ids are unique per group.
struct QuestionGroup {
    std::string question_id;
    std::string question;
    std::vector<Candidate> candidates;
};

struct DatasetSplit {
    std::vector<QuestionGroup> train;
    std::vector<QuestionGroup> dev;
    std::vector<QuestionGroup> test;
};

enum class DatasetFormat { kRecords, kTrecQa };

/// Loads question groups from either the tab-separated record format or a
/// TREC-QA-style file. Records for the same question_id are grouped
/// regardless of adjacency; malformed records raise DataError with the line.
std::vector<QuestionGroup> load_dataset(const std::string& path, DatasetFormat format);

/// Record format writer: one-line header, then one record per line with
/// fields question_id, question, answer_id, answer, grade. Tabs, newlines
/// and backslashes inside text fields are escaped (\t, \n, \\).
void save_records(const std::string& path, const std::vector<QuestionGroup>& groups);

struct SyntheticSpec {
    int train_questions = 30;
    int dev_questions = 0;
    int test_questions = 0;
    int candidates_per_question = 4;
    int relevant_per_question = 1;
    int filler_vocab = 50;     // filler tokens w0..w{n-1}
    int question_fillers = 3;  // filler tokens per question besides the keyword
    int echo_fillers = 3;      // question fillers repeated inside relevant answers
    int answer_len = 8;          // target answer token count
    int noise_len = 0;           // extra filler appended to every answer (long-noise regime)
    int length_jitter = 0;       // +- uniform jitter on the final answer length
    int distractor_keywords = 0; // other questions' keywords planted in irrelevant answers
    int irrelevant_echo_fillers = -1;  // echoes in irrelevant answers (-1: same as echo_fillers)
    uint64_t seed = 1;
};

/// Deterministic synthetic corpus: each question plants a keyword that its
/// relevant answers contain (plus echoed question fillers); irrelevant
/// answers are filler only, so keyword overlap separates the labels.
DatasetSplit generate_synthetic(const SyntheticSpec& spec);

/// Seeded question-level shuffle, then partition by ratios (must sum to 1).
DatasetSplit split_dataset(const std::vector<QuestionGroup>& groups, double train_ratio,
                           double dev_ratio, double test_ratio, uint64_t seed);

DatasetFormat dataset_format_from_string(const std::string& s);

}  // namespace attnrank
