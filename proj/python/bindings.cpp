#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "attnrank/data_io.hpp"
#include "attnrank/evaluation.hpp"
#include "attnrank/explain.hpp"
#include "attnrank/model.hpp"
#include "attnrank/training.hpp"
#include "attnrank/version.hpp"

namespace py = pybind11;
using namespace attnrank;

namespace {

EmbeddingMatrix py_train_word2vec(const std::vector<TokenList>& corpus, const Vocab& vocab,
                                  int dim, const SkipGramConfig& cfg, uint64_t seed) {
    SeededRng rng(seed);
    return train_word2vec(corpus, vocab, dim, cfg, rng);
}

ModelParams py_init_params(const ModelConfig& cfg, int a_max_len, uint64_t seed) {
    SeededRng rng(seed);
    return init_params(cfg, a_max_len, rng);
}

std::string py_explain_html(const std::string& question, const std::vector<std::string>& answers,
                            const ModelParams& params, const ModelConfig& cfg, const Vocab& vocab,
                            const EmbeddingMatrix& emb) {
    const TokenList q_tokens = tokenize(question);
    if (q_tokens.empty()) throw DataError("question has no tokens");
    std::vector<ExplainItem> items;
    for (const std::string& answer : answers) {
        const TokenList a_tokens = tokenize(answer);
        if (a_tokens.empty()) throw DataError("answer has no tokens");
        ForwardResult f = forward(q_tokens, a_tokens, params, cfg, vocab, emb);
        items.push_back({std::move(f.a_trace), f.relevance_prob});
    }
    return render_explain_html(q_tokens, items);
}

}  // namespace

PYBIND11_MODULE(attnrank, m) {
    m.doc() = "attention-based answer ranking: embeddings, training, ranking, evaluation";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Error");

    // text
    py::class_<Vocab>(m, "Vocab")
        .def(py::init<>())
        .def("size", &Vocab::size)
        .def("lookup", &Vocab::lookup)
        .def("contains", &Vocab::contains)
        .def_readonly("index_to_token", &Vocab::index_to_token);

    py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
        .def(py::init<>())
        .def("dim", &EmbeddingMatrix::dim)
        .def("vocab_size", &EmbeddingMatrix::vocab_size)
        .def("row", [](const EmbeddingMatrix& e, int i) {
            if (i < 0 || i >= e.vocab_size()) throw py::index_error();
            std::span<const double> r = e.vectors.row(i);
            return Vector(r.begin(), r.end());
        });

    py::class_<SkipGramConfig>(m, "SkipGramConfig")
        .def(py::init<>())
        .def_readwrite("window", &SkipGramConfig::window)
        .def_readwrite("negatives", &SkipGramConfig::negatives)
        .def_readwrite("epochs", &SkipGramConfig::epochs)
        .def_readwrite("learning_rate", &SkipGramConfig::learning_rate)
        .def_readwrite("sampling_power", &SkipGramConfig::sampling_power);

    m.def("tokenize", &tokenize, py::arg("text"));
    m.def("build_vocab", &build_vocab, py::arg("corpus"), py::arg("min_count") = 1);
    m.def("train_word2vec", &py_train_word2vec, py::arg("corpus"), py::arg("vocab"),
          py::arg("dim"), py::arg("config") = SkipGramConfig(), py::arg("seed") = 1);
    m.def("overlap_flags", [](const TokenList& q, const TokenList& a) {
        std::vector<uint8_t> flags = overlap_flags(q, a);
        return std::vector<int>(flags.begin(), flags.end());
    });
    m.def("save_embeddings", &save_embeddings, py::arg("path"), py::arg("vocab"), py::arg("table"));
    m.def("load_embeddings", &load_embeddings, py::arg("path"));

    // numerics, exposed thinly
    m.def("lrelu", &lrelu, py::arg("values"), py::arg("slope") = 0.01002);
    m.def("softmax", &softmax, py::arg("scores"));

    // model
    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("emb_dim", &ModelConfig::emb_dim)
        .def_readwrite("att_dim", &ModelConfig::att_dim)
        .def_readwrite("hidden1_dim", &ModelConfig::hidden1_dim)
        .def_readwrite("hidden2_dim", &ModelConfig::hidden2_dim)
        .def_readwrite("head_hidden_dim", &ModelConfig::head_hidden_dim)
        .def_readwrite("lrelu_slope", &ModelConfig::lrelu_slope)
        .def_readwrite("uniform_attention", &ModelConfig::uniform_attention)
        .def_readwrite("max_q_len", &ModelConfig::max_q_len)
        .def_readwrite("max_a_len", &ModelConfig::max_a_len)
        .def_property(
            "attention_mode",
            [](const ModelConfig& c) { return std::string(to_string(c.attention_mode)); },
            [](ModelConfig& c, const std::string& s) {
                c.attention_mode = attention_mode_from_string(s);
            })
        .def_property(
            "pooling_mode",
            [](const ModelConfig& c) { return std::string(to_string(c.pooling_mode)); },
            [](ModelConfig& c, const std::string& s) {
                c.pooling_mode = pooling_mode_from_string(s);
            });

    py::class_<ModelParams>(m, "ModelParams").def(py::init<>());

    py::class_<AttentionTrace>(m, "AttentionTrace")
        .def_readonly("tokens", &AttentionTrace::tokens)
        .def_readonly("weights", &AttentionTrace::weights);

    py::class_<ForwardResult>(m, "ForwardResult")
        .def_readonly("relevance_prob", &ForwardResult::relevance_prob)
        .def_readonly("q_trace", &ForwardResult::q_trace)
        .def_readonly("a_trace", &ForwardResult::a_trace);

    m.def("init_params", &py_init_params, py::arg("config"), py::arg("a_max_len"),
          py::arg("seed") = 1);
    m.def("forward", &forward, py::arg("q_tokens"), py::arg("a_tokens"), py::arg("params"),
          py::arg("config"), py::arg("vocab"), py::arg("embeddings"));
    m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("config"),
          py::arg("params"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

    // data
    py::class_<Candidate>(m, "Candidate")
        .def(py::init<>())
        .def(py::init([](const std::string& answer_id, const std::string& answer, int grade) {
                 return Candidate{answer_id, answer, grade};
             }),
             py::arg("answer_id"), py::arg("answer"), py::arg("grade") = 0)
        .def_readwrite("answer_id", &Candidate::answer_id)
        .def_readwrite("answer", &Candidate::answer)
        .def_readwrite("grade", &Candidate::grade);

    py::class_<QuestionGroup>(m, "QuestionGroup")
        .def(py::init<>())
        .def(py::init([](const std::string& question_id, const std::string& question,
                         const std::vector<Candidate>& candidates) {
                 return QuestionGroup{question_id, question, candidates};
             }),
             py::arg("question_id"), py::arg("question"), py::arg("candidates"))
        .def_readwrite("question_id", &QuestionGroup::question_id)
        .def_readwrite("question", &QuestionGroup::question)
        .def_readwrite("candidates", &QuestionGroup::candidates);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def_readonly("train", &DatasetSplit::train)
        .def_readonly("dev", &DatasetSplit::dev)
        .def_readonly("test", &DatasetSplit::test);

    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("train_questions", &SyntheticSpec::train_questions)
        .def_readwrite("dev_questions", &SyntheticSpec::dev_questions)
        .def_readwrite("test_questions", &SyntheticSpec::test_questions)
        .def_readwrite("candidates_per_question", &SyntheticSpec::candidates_per_question)
        .def_readwrite("relevant_per_question", &SyntheticSpec::relevant_per_question)
        .def_readwrite("filler_vocab", &SyntheticSpec::filler_vocab)
        .def_readwrite("question_fillers", &SyntheticSpec::question_fillers)
        .def_readwrite("echo_fillers", &SyntheticSpec::echo_fillers)
        .def_readwrite("answer_len", &SyntheticSpec::answer_len)
        .def_readwrite("noise_len", &SyntheticSpec::noise_len)
        .def_readwrite("length_jitter", &SyntheticSpec::length_jitter)
        .def_readwrite("seed", &SyntheticSpec::seed);

    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));
    m.def(
        "load_dataset",
        [](const std::string& path, const std::string& format) {
            return load_dataset(path, dataset_format_from_string(format));
        },
        py::arg("path"), py::arg("format") = "records");
    m.def("save_records", &save_records, py::arg("path"), py::arg("groups"));
    m.def("split_dataset", &split_dataset, py::arg("groups"), py::arg("train_ratio"),
          py::arg("dev_ratio"), py::arg("test_ratio"), py::arg("seed") = 1);

    // training
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("shuffle", &TrainConfig::shuffle)
        .def_readwrite("grade_threshold", &TrainConfig::grade_threshold)
        .def_readwrite("early_stopping", &TrainConfig::early_stopping)
        .def_readwrite("patience", &TrainConfig::patience)
        .def_readwrite("fine_tune_embeddings", &TrainConfig::fine_tune_embeddings)
        .def_readwrite("positive_weight", &TrainConfig::positive_weight);

    py::class_<EpochRecord>(m, "EpochRecord")
        .def_readonly("epoch", &EpochRecord::epoch)
        .def_readonly("mean_loss", &EpochRecord::mean_loss)
        .def_readonly("dev_mrr", &EpochRecord::dev_mrr)
        .def_readonly("seconds", &EpochRecord::seconds);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("last", &TrainResult::last)
        .def_readonly("best", &TrainResult::best)
        .def_readonly("best_epoch", &TrainResult::best_epoch)
        .def_readonly("history", &TrainResult::history)
        .def_readonly("embeddings", &TrainResult::embeddings);

    m.def(
        "train",
        [](const std::vector<QuestionGroup>& dataset,
           const std::optional<std::vector<QuestionGroup>>& dev, const TrainConfig& tcfg,
           const ModelConfig& mcfg, const Vocab& vocab, const EmbeddingMatrix& emb) {
            return train(dataset, dev ? &*dev : nullptr, tcfg, mcfg, vocab, emb);
        },
        py::arg("dataset"), py::arg("dev"), py::arg("train_config"), py::arg("model_config"),
        py::arg("vocab"), py::arg("embeddings"));

    // evaluation
    py::class_<RankedCandidate>(m, "RankedCandidate")
        .def(py::init([](const std::string& answer_id, double score, int grade, int answer_len) {
                 return RankedCandidate{answer_id, score, grade, answer_len};
             }),
             py::arg("answer_id"), py::arg("score"), py::arg("grade"), py::arg("answer_len") = 0)
        .def_readwrite("answer_id", &RankedCandidate::answer_id)
        .def_readwrite("score", &RankedCandidate::score)
        .def_readwrite("grade", &RankedCandidate::grade)
        .def_readwrite("answer_len", &RankedCandidate::answer_len);

    py::class_<RankedQuestion>(m, "RankedQuestion")
        .def(py::init([](const std::string& question_id,
                         const std::vector<RankedCandidate>& ranked) {
                 return RankedQuestion{question_id, ranked};
             }),
             py::arg("question_id"), py::arg("ranked"))
        .def_readwrite("question_id", &RankedQuestion::question_id)
        .def_readwrite("ranked", &RankedQuestion::ranked);

    py::class_<RankResult>(m, "RankResult")
        .def_readonly("entry", &RankResult::entry)
        .def_readonly("question_trace", &RankResult::question_trace)
        .def_readonly("answer_traces", &RankResult::answer_traces);

    py::class_<BucketMetrics>(m, "BucketMetrics")
        .def_readonly("label", &BucketMetrics::label)
        .def_readonly("mrr", &BucketMetrics::mrr)
        .def_readonly("ndcg", &BucketMetrics::ndcg)
        .def_readonly("n_questions", &BucketMetrics::n_questions);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("mrr", &EvalReport::mrr)
        .def_readonly("ndcg", &EvalReport::ndcg)
        .def_readonly("n_questions", &EvalReport::n_questions)
        .def_readonly("buckets", &EvalReport::buckets);

    m.def("rank_answers", &rank_answers, py::arg("params"), py::arg("config"), py::arg("vocab"),
          py::arg("embeddings"), py::arg("group"));
    m.def("rank_dataset", &rank_dataset, py::arg("params"), py::arg("config"), py::arg("vocab"),
          py::arg("embeddings"), py::arg("groups"));
    m.def("mrr", &mrr, py::arg("run"), py::arg("relevance_threshold") = 1,
          py::arg("drop_unanswerable") = false);
    m.def("ndcg", &ndcg, py::arg("run"));
    m.def(
        "length_bucket_report",
        [](const RankedRun& run, const std::vector<int>& edges, int threshold) {
            return length_bucket_report(run, edges, threshold);
        },
        py::arg("run"), py::arg("bucket_edges"), py::arg("relevance_threshold") = 1);

    // explain
    m.def("explain_html", &py_explain_html, py::arg("question"), py::arg("answers"),
          py::arg("params"), py::arg("config"), py::arg("vocab"), py::arg("embeddings"));
}
