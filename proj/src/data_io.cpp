#include "attnrank/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

namespace attnrank {

namespace {

std::string escape_field(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_field(const std::string& s, int line_no) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out += s[i];
            continue;
        }
        if (i + 1 >= s.size())
            throw DataError("line " + std::to_string(line_no) + ": dangling escape");
        ++i;
        switch (s[i]) {
            case '\\': out += '\\'; break;
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            default:
                throw DataError("line " + std::to_string(line_no) + ": unknown escape \\" + s[i]);
        }
    }
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    size_t begin = 0;
    while (true) {
        const size_t tab = line.find('\t', begin);
        if (tab == std::string::npos) {
            out.push_back(line.substr(begin));
            return out;
        }
        out.push_back(line.substr(begin, tab - begin));
        begin = tab + 1;
    }
}

constexpr const char* kRecordHeader = "question_id\tquestion\tanswer_id\tanswer\tgrade";

std::vector<QuestionGroup> load_records(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_dataset: cannot open " + path);

    std::string line;
    int line_no = 0;
    if (!std::getline(is, line)) throw DataError("load_dataset: empty file " + path);
    ++line_no;
    if (line != kRecordHeader)
        throw DataError("line 1: expected header '" + std::string(kRecordHeader) + "'");

    std::vector<QuestionGroup> groups;
    std::unordered_map<std::string, size_t> index_by_qid;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 5)
            throw DataError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                            std::to_string(fields.size()));
        const std::string qid = unescape_field(fields[0], line_no);
        const std::string question = unescape_field(fields[1], line_no);
        const std::string aid = unescape_field(fields[2], line_no);
        const std::string answer = unescape_field(fields[3], line_no);
        if (qid.empty()) throw DataError("line " + std::to_string(line_no) + ": empty question_id");
        if (question.empty())
            throw DataError("line " + std::to_string(line_no) + ": missing question text");
        int grade = 0;
        try {
            size_t used = 0;
            grade = std::stoi(fields[4], &used);
            if (used != fields[4].size()) throw std::invalid_argument("trailing chars");
        } catch (const std::exception&) {
            throw DataError("line " + std::to_string(line_no) + ": bad grade '" + fields[4] + "'");
        }
        if (grade < 0) throw DataError("line " + std::to_string(line_no) + ": negative grade");

        auto [it, inserted] = index_by_qid.emplace(qid, groups.size());
        if (inserted) groups.push_back({qid, question, {}});
        QuestionGroup& g = groups[it->second];
        for (const Candidate& c : g.candidates) {
            if (c.answer_id == aid)
                throw DataError("line " + std::to_string(line_no) + ": duplicate answer_id '" +
                                aid + "' in question '" + qid + "'");
        }
        g.candidates.push_back({aid, answer, grade});
    }
    return groups;
}

// TREC-QA answer-sentence-selection layout: <QApairs id='...'> blocks with
// <question>, <positive> and <negative> sections. The first line after each
// tag holds the tab-separated tokens; any extra annotation lines before the
// next tag are ignored. Judgments map to grades {0,1}.
std::vector<QuestionGroup> load_trec_qa(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_dataset: cannot open " + path);

    std::vector<QuestionGroup> groups;
    std::string line;
    int line_no = 0;
    QuestionGroup current;
    bool in_block = false;
    std::string pending_tag;
    int answer_seq = 0;

    auto join_tokens = [](const std::string& raw) {
        std::string out;
        for (char c : raw) out += (c == '\t') ? ' ' : c;
        while (!out.empty() && (out.back() == ' ' || out.back() == '\r')) out.pop_back();
        return out;
    };

    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("<QApairs", 0) == 0) {
            if (in_block) throw DataError("line " + std::to_string(line_no) + ": nested QApairs");
            const size_t q1 = line.find('\'');
            const size_t q2 = q1 == std::string::npos ? std::string::npos : line.find('\'', q1 + 1);
            if (q2 == std::string::npos)
                throw DataError("line " + std::to_string(line_no) + ": QApairs without id");
            current = QuestionGroup{};
            current.question_id = line.substr(q1 + 1, q2 - q1 - 1);
            in_block = true;
            answer_seq = 0;
            pending_tag.clear();
        } else if (line == "</QApairs>") {
            if (!in_block) throw DataError("line " + std::to_string(line_no) + ": stray </QApairs>");
            if (current.question.empty())
                throw DataError("question '" + current.question_id + "': missing question text");
            groups.push_back(std::move(current));
            in_block = false;
        } else if (line == "<question>" || line == "<positive>" || line == "<negative>") {
            if (!in_block)
                throw DataError("line " + std::to_string(line_no) + ": tag outside QApairs");
            pending_tag = line;
        } else if (line == "</question>" || line == "</positive>" || line == "</negative>") {
            pending_tag.clear();
        } else if (!pending_tag.empty() && !line.empty()) {
            const std::string text = join_tokens(line);
            if (pending_tag == "<question>") {
                if (current.question.empty()) current.question = text;
            } else {
                const int grade = pending_tag == "<positive>" ? 1 : 0;
                current.candidates.push_back(
                    {current.question_id + "." + std::to_string(answer_seq++), text, grade});
                pending_tag.clear();  // only the token line counts; annotations are skipped
            }
        }
    }
    if (in_block) throw DataError("unterminated QApairs block at end of " + path);
    return groups;
}

void validate_groups(const std::vector<QuestionGroup>& groups) {
    for (const QuestionGroup& g : groups) {
        if (g.candidates.empty())
            throw DataError("question '" + g.question_id + "' has no candidates");
    }
}

}  // namespace

std::vector<QuestionGroup> load_dataset(const std::string& path, DatasetFormat format) {
    std::vector<QuestionGroup> groups =
        format == DatasetFormat::kRecords ? load_records(path) : load_trec_qa(path);
    validate_groups(groups);
    return groups;
}

void save_records(const std::string& path, const std::vector<QuestionGroup>& groups) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_records: cannot open " + path);
    os << kRecordHeader << '\n';
    for (const QuestionGroup& g : groups) {
        for (const Candidate& c : g.candidates) {
            os << escape_field(g.question_id) << '\t' << escape_field(g.question) << '\t'
               << escape_field(c.answer_id) << '\t' << escape_field(c.answer) << '\t' << c.grade
               << '\n';
        }
    }
    if (!os) throw IoError("save_records: write failed for " + path);
}

DatasetSplit generate_synthetic(const SyntheticSpec& spec) {
    if (spec.train_questions < 1 || spec.candidates_per_question < 1)
        throw ConfigError("generate_synthetic: sizes must be >= 1");
    if (spec.dev_questions < 0 || spec.test_questions < 0)
        throw ConfigError("generate_synthetic: split sizes must be >= 0");
    if (spec.relevant_per_question < 1 ||
        spec.relevant_per_question > spec.candidates_per_question)
        throw ConfigError("generate_synthetic: relevant count must be in [1, candidates]");
    if (spec.filler_vocab < spec.question_fillers)
        throw ConfigError("generate_synthetic: filler vocab too small for question length");
    const int irr_echo =
        spec.irrelevant_echo_fillers < 0 ? spec.echo_fillers : spec.irrelevant_echo_fillers;
    if (spec.echo_fillers > spec.question_fillers || irr_echo > spec.question_fillers)
        throw ConfigError("generate_synthetic: cannot echo more fillers than the question has");
    if (spec.answer_len < 1 + std::max(spec.echo_fillers, irr_echo))
        throw ConfigError("generate_synthetic: answer_len too small for keyword plus echoes");
    if (spec.length_jitter < 0 || spec.noise_len < 0)
        throw ConfigError("generate_synthetic: lengths must be >= 0");

    SeededRng rng(spec.seed);
    auto filler = [&](int i) { return "w" + std::to_string(i); };

    const int total = spec.train_questions + spec.dev_questions + spec.test_questions;
    std::vector<QuestionGroup> all;
    all.reserve(total);

    for (int q = 0; q < total; ++q) {
        QuestionGroup g;
        g.question_id = "q" + std::to_string(q);
        const std::string keyword = "kw" + std::to_string(q);

        // distinct question fillers
        std::vector<int> pool(spec.filler_vocab);
        for (int i = 0; i < spec.filler_vocab; ++i) pool[i] = i;
        rng.shuffle(pool);
        std::vector<std::string> q_fillers;
        for (int i = 0; i < spec.question_fillers; ++i) q_fillers.push_back(filler(pool[i]));

        std::vector<std::string> q_tokens = q_fillers;
        q_tokens.insert(q_tokens.begin() + rng.uniform_int(static_cast<int>(q_tokens.size()) + 1),
                        keyword);
        std::string question;
        for (size_t i = 0; i < q_tokens.size(); ++i) {
            if (i) question += ' ';
            question += q_tokens[i];
        }
        g.question = question;

        std::vector<int> labels(spec.candidates_per_question, 0);
        for (int i = 0; i < spec.relevant_per_question; ++i) labels[i] = 1;
        rng.shuffle(labels);

        for (int cand = 0; cand < spec.candidates_per_question; ++cand) {
            const bool relevant = labels[cand] == 1;
            int len = spec.answer_len + spec.noise_len;
            if (spec.length_jitter > 0)
                len += rng.uniform_int(2 * spec.length_jitter + 1) - spec.length_jitter;
            len = std::max(len, 1 + spec.echo_fillers);

            std::vector<std::string> tokens(len);
            for (int t = 0; t < len; ++t) tokens[t] = filler(rng.uniform_int(spec.filler_vocab));
            std::vector<int> slots(len);
            for (int t = 0; t < len; ++t) slots[t] = t;
            rng.shuffle(slots);
            if (relevant) {
                // scatter the keyword and echoed question fillers at distinct slots
                tokens[slots[0]] = keyword;
                for (int e = 0; e < spec.echo_fillers; ++e) tokens[slots[e + 1]] = q_fillers[e];
            } else {
                int used = 0;
                for (int e = 0; e < irr_echo && used < len; ++e) tokens[slots[used++]] = q_fillers[e];
                if (total > 1) {
                    // other questions' keywords, so rare-token presence alone
                    // does not separate the labels
                    for (int d = 0; d < spec.distractor_keywords && used < len; ++d) {
                        int other = rng.uniform_int(total);
                        if (other == q) other = (other + 1) % total;
                        tokens[slots[used++]] = "kw" + std::to_string(other);
                    }
                }
            }
            std::string answer;
            for (size_t i = 0; i < tokens.size(); ++i) {
                if (i) answer += ' ';
                answer += tokens[i];
            }
            g.candidates.push_back(
                {g.question_id + ".a" + std::to_string(cand), answer, relevant ? 1 : 0});
        }
        all.push_back(std::move(g));
    }

    DatasetSplit split;
    split.train.assign(all.begin(), all.begin() + spec.train_questions);
    split.dev.assign(all.begin() + spec.train_questions,
                     all.begin() + spec.train_questions + spec.dev_questions);
    split.test.assign(all.begin() + spec.train_questions + spec.dev_questions, all.end());
    return split;
}

DatasetSplit split_dataset(const std::vector<QuestionGroup>& groups, double train_ratio,
                           double dev_ratio, double test_ratio, uint64_t seed) {
    if (!(train_ratio > 0.0 && dev_ratio > 0.0 && test_ratio > 0.0))
        throw ConfigError("split_dataset: ratios must be positive");
    if (std::fabs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9)
        throw ConfigError("split_dataset: ratios must sum to 1");

    const int n = static_cast<int>(groups.size());
    const int n_train = static_cast<int>(std::floor(train_ratio * n));
    const int n_dev = static_cast<int>(std::floor(dev_ratio * n));
    const int n_test = n - n_train - n_dev;
    if (n_train < 1 || n_dev < 1 || n_test < 1)
        throw DataError("split_dataset: too few questions for three non-empty splits");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    SeededRng rng(seed);
    rng.shuffle(order);

    DatasetSplit out;
    for (int i = 0; i < n; ++i) {
        const QuestionGroup& g = groups[order[i]];
        if (i < n_train) {
            out.train.push_back(g);
        } else if (i < n_train + n_dev) {
            out.dev.push_back(g);
        } else {
            out.test.push_back(g);
        }
    }
    return out;
}

DatasetFormat dataset_format_from_string(const std::string& s) {
    if (s == "records") return DatasetFormat::kRecords;
    if (s == "trec-qa") return DatasetFormat::kTrecQa;
    throw ConfigError("unknown dataset format: " + s);
}

}  // namespace attnrank
