#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attnrank/data_io.hpp"
#include "attnrank/evaluation.hpp"
#include "attnrank/explain.hpp"
#include "attnrank/manifest.hpp"
#include "attnrank/model.hpp"
#include "attnrank/training.hpp"
#include "attnrank/version.hpp"

namespace fs = std::filesystem;
using namespace attnrank;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset profiles bundling per-corpus defaults: embedding width,
// length-bucket edges and the grade threshold for binarization.
struct Profile {
    int dim;
    std::vector<int> bucket_edges;
    int grade_threshold;
};

Profile profile_by_name(const std::string& name) {
    if (name == "trec") return {300, {10, 25, 50}, 1};
    if (name == "liveqa") return {100, {30, 70, 110}, 3};
    if (name == "toy") return {16, {5, 10, 25}, 1};
    throw UsageError("unknown profile: " + name);
}

void require_readable(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw UsageError(what + " not found: " + path);
}

std::string default_out_dir() {
    const char* env = std::getenv("ATTNRANK_OUT_DIR");
    return env && *env ? env : ".";
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<int> parse_edges(const std::string& csv) {
    std::vector<int> out;
    size_t pos = 0;
    while (pos <= csv.size()) {
        const size_t comma = csv.find(',', pos);
        const std::string piece =
            comma == std::string::npos ? csv.substr(pos) : csv.substr(pos, comma - pos);
        if (!piece.empty()) {
            try {
                out.push_back(std::stoi(piece));
            } catch (const std::exception&) {
                throw UsageError("bad bucket edge: " + piece);
            }
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path);
    os << content;
    if (!os) throw IoError("write failed for " + path);
}

// -------------------------------------------------------- train-embeddings

struct EmbedArgs {
    std::string data_path;
    std::string format = "records";
    std::string out_path;
    std::string vocab_out;
    std::string profile = "toy";
    int dim = 0;  // 0: take the profile default
    int min_count = 1;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
    uint64_t seed = 1;
};

int run_train_embeddings(const EmbedArgs& args) {
    Stopwatch watch;
    require_readable(args.data_path, "corpus");
    const Profile prof = profile_by_name(args.profile);
    const int dim = args.dim > 0 ? args.dim : prof.dim;
    const std::string vocab_out =
        args.vocab_out.empty() ? args.out_path + ".vocab.txt" : args.vocab_out;

    const std::vector<QuestionGroup> groups =
        load_dataset(args.data_path, dataset_format_from_string(args.format));
    std::vector<TokenList> corpus;
    for (const QuestionGroup& g : groups) {
        corpus.push_back(tokenize(g.question));
        for (const Candidate& c : g.candidates) corpus.push_back(tokenize(c.answer));
    }

    const Vocab vocab = build_vocab(corpus, args.min_count);
    SkipGramConfig cfg;
    cfg.window = args.window;
    cfg.negatives = args.negatives;
    cfg.epochs = args.epochs;
    cfg.learning_rate = args.lr;
    SeededRng rng(args.seed);
    const EmbeddingMatrix emb = train_word2vec(corpus, vocab, dim, cfg, rng);

    save_embeddings(args.out_path, vocab, emb);
    save_vocab(vocab_out, vocab);

    RunManifest manifest;
    manifest.command = "train-embeddings";
    manifest.config = {{"format", args.format},
                       {"profile", args.profile},
                       {"dim", std::to_string(dim)},
                       {"min_count", std::to_string(args.min_count)},
                       {"window", std::to_string(cfg.window)},
                       {"negatives", std::to_string(cfg.negatives)},
                       {"epochs", std::to_string(cfg.epochs)},
                       {"learning_rate", std::to_string(cfg.learning_rate)}};
    manifest.seed = args.seed;
    manifest.input_paths = {args.data_path};
    manifest.output_paths = {args.out_path, vocab_out};
    manifest.tool_version = kVersion;
    manifest.wall_clock_seconds = watch.seconds();
    save_manifest(args.out_path + ".manifest.json", manifest);

    std::cout << "trained " << dim << "-dim embeddings for " << vocab.size() << " tokens -> "
              << args.out_path << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string data_path;
    std::string dev_path;
    std::string format = "records";
    std::string emb_path;
    std::string out_dir;
    std::string profile = "toy";
    std::string attention = "scalar";
    std::string pooling = "max";
    bool uniform_attention = false;
    int batch_size = 50;
    double lr = 0.1;
    double lrelu_slope = 0.01002;
    int epochs = 25;
    uint64_t seed = 1;
    int att_dim = 0, hidden1_dim = 0, hidden2_dim = 0, head_dim = 0;  // 0: embedding width
    int max_q_len = 40;
    int max_a_len = 1000;
    int grade_threshold = 0;  // 0: profile default
    bool early_stopping = false;
    int patience = 5;
    bool fine_tune = false;
    double positive_weight = 1.0;
};

ModelConfig model_config_from(const TrainArgs& args, int emb_dim) {
    ModelConfig mcfg;
    mcfg.emb_dim = emb_dim;
    mcfg.att_dim = args.att_dim > 0 ? args.att_dim : emb_dim;
    mcfg.hidden1_dim = args.hidden1_dim > 0 ? args.hidden1_dim : emb_dim;
    mcfg.hidden2_dim = args.hidden2_dim > 0 ? args.hidden2_dim : emb_dim;
    mcfg.head_hidden_dim = args.head_dim > 0 ? args.head_dim : emb_dim;
    mcfg.lrelu_slope = args.lrelu_slope;
    mcfg.attention_mode = attention_mode_from_string(args.attention);
    mcfg.pooling_mode = pooling_mode_from_string(args.pooling);
    mcfg.uniform_attention = args.uniform_attention;
    mcfg.max_q_len = args.max_q_len;
    mcfg.max_a_len = args.max_a_len;
    return mcfg;
}

std::string config_snapshot(const TrainArgs& args, const ModelConfig& mcfg,
                            const TrainConfig& tcfg) {
    std::string s;
    auto kv = [&s](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
    kv("data", args.data_path);
    kv("dev", args.dev_path);
    kv("format", args.format);
    kv("embeddings", args.emb_path);
    kv("profile", args.profile);
    kv("emb_dim", std::to_string(mcfg.emb_dim));
    kv("att_dim", std::to_string(mcfg.att_dim));
    kv("hidden1_dim", std::to_string(mcfg.hidden1_dim));
    kv("hidden2_dim", std::to_string(mcfg.hidden2_dim));
    kv("head_hidden_dim", std::to_string(mcfg.head_hidden_dim));
    kv("lrelu_slope", std::to_string(mcfg.lrelu_slope));
    kv("attention_mode", to_string(mcfg.attention_mode));
    kv("pooling_mode", to_string(mcfg.pooling_mode));
    kv("uniform_attention", mcfg.uniform_attention ? "true" : "false");
    kv("max_q_len", std::to_string(mcfg.max_q_len));
    kv("max_a_len", std::to_string(mcfg.max_a_len));
    kv("batch_size", std::to_string(tcfg.batch_size));
    kv("learning_rate", std::to_string(tcfg.learning_rate));
    kv("epochs", std::to_string(tcfg.epochs));
    kv("seed", std::to_string(tcfg.seed));
    kv("grade_threshold", std::to_string(tcfg.grade_threshold));
    kv("early_stopping", tcfg.early_stopping ? "true" : "false");
    kv("patience", std::to_string(tcfg.patience));
    kv("fine_tune_embeddings", tcfg.fine_tune_embeddings ? "true" : "false");
    kv("positive_weight", std::to_string(tcfg.positive_weight));
    return s;
}

int run_train(const TrainArgs& args) {
    Stopwatch watch;
    require_readable(args.data_path, "dataset");
    require_readable(args.emb_path, "embedding file");
    if (!args.dev_path.empty()) require_readable(args.dev_path, "dev dataset");
    const Profile prof = profile_by_name(args.profile);

    const DatasetFormat format = dataset_format_from_string(args.format);
    const std::vector<QuestionGroup> dataset = load_dataset(args.data_path, format);
    std::vector<QuestionGroup> dev;
    if (!args.dev_path.empty()) dev = load_dataset(args.dev_path, format);

    auto [vocab, emb] = load_embeddings(args.emb_path);

    const ModelConfig mcfg = model_config_from(args, emb.dim());
    TrainConfig tcfg;
    tcfg.batch_size = args.batch_size;
    tcfg.learning_rate = args.lr;
    tcfg.epochs = args.epochs;
    tcfg.seed = args.seed;
    tcfg.grade_threshold = args.grade_threshold > 0 ? args.grade_threshold : prof.grade_threshold;
    tcfg.early_stopping = args.early_stopping;
    tcfg.patience = args.patience;
    tcfg.fine_tune_embeddings = args.fine_tune;
    tcfg.positive_weight = args.positive_weight;

    fs::create_directories(args.out_dir);
    write_text_file(args.out_dir + "/config.txt", config_snapshot(args, mcfg, tcfg));

    TrainResult result =
        train(dataset, dev.empty() ? nullptr : &dev, tcfg, mcfg, vocab, emb);

    save_checkpoint(args.out_dir + "/best.ckpt", mcfg, result.best);
    save_checkpoint(args.out_dir + "/last.ckpt", mcfg, result.last);
    save_history_csv(args.out_dir + "/history.csv", result.history);
    std::vector<std::string> outputs = {args.out_dir + "/best.ckpt", args.out_dir + "/last.ckpt",
                                        args.out_dir + "/history.csv",
                                        args.out_dir + "/config.txt"};
    if (tcfg.fine_tune_embeddings) {
        save_embeddings(args.out_dir + "/embeddings.bin", vocab, result.embeddings);
        outputs.push_back(args.out_dir + "/embeddings.bin");
    }

    RunManifest manifest;
    manifest.command = "train";
    manifest.config = {{"config_snapshot", args.out_dir + "/config.txt"},
                       {"best_epoch", std::to_string(result.best_epoch)},
                       {"epochs_run", std::to_string(result.history.size())}};
    manifest.seed = args.seed;
    manifest.input_paths = {args.data_path, args.emb_path};
    if (!args.dev_path.empty()) manifest.input_paths.push_back(args.dev_path);
    manifest.output_paths = outputs;
    manifest.tool_version = kVersion;
    manifest.wall_clock_seconds = watch.seconds();
    save_manifest(args.out_dir + "/manifest.json", manifest);

    const EpochRecord& final_rec = result.history.back();
    std::cout << "trained " << result.history.size() << " epochs, final loss "
              << final_rec.mean_loss;
    if (final_rec.dev_mrr) std::cout << ", dev MRR " << *final_rec.dev_mrr;
    std::cout << " -> " << args.out_dir << "\n";
    return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::string checkpoint;
    std::string emb_path;
    std::string data_path;
    std::string format = "records";
    std::string out_dir;
    std::string profile = "toy";
    std::string buckets;  // csv, empty: profile default
    std::string bucket_key = "max";
    int grade_threshold = 0;
    bool drop_unanswerable = false;
};

int run_eval(const EvalArgs& args) {
    Stopwatch watch;
    require_readable(args.checkpoint, "checkpoint");
    require_readable(args.emb_path, "embedding file");
    require_readable(args.data_path, "dataset");
    const Profile prof = profile_by_name(args.profile);

    auto [vocab, emb] = load_embeddings(args.emb_path);
    auto [mcfg, params] = load_checkpoint(args.checkpoint);
    if (mcfg.emb_dim != emb.dim())
        throw ConfigError("checkpoint expects embedding dim " + std::to_string(mcfg.emb_dim) +
                          " but " + args.emb_path + " has dim " + std::to_string(emb.dim()));

    const std::vector<QuestionGroup> groups =
        load_dataset(args.data_path, dataset_format_from_string(args.format));
    const std::vector<int> edges =
        args.buckets.empty() ? prof.bucket_edges : parse_edges(args.buckets);
    const int threshold = args.grade_threshold > 0 ? args.grade_threshold : prof.grade_threshold;

    BucketKey key = BucketKey::kMaxCandidate;
    if (args.bucket_key == "mean") {
        key = BucketKey::kMeanCandidate;
    } else if (args.bucket_key == "top") {
        key = BucketKey::kTopRanked;
    } else if (args.bucket_key != "max") {
        throw UsageError("unknown bucket key: " + args.bucket_key);
    }

    const RankedRun run = rank_dataset(params, mcfg, vocab, emb, groups);
    EvalReport report = length_bucket_report(run, edges, threshold, key);
    if (args.drop_unanswerable) report.mrr = mrr(run, threshold, true);

    fs::create_directories(args.out_dir);
    save_run(args.out_dir + "/run.tsv", run);
    const std::string table = format_report(report);
    write_text_file(args.out_dir + "/report.txt", table);
    save_report_csv(args.out_dir + "/report.csv", report);
    std::cout << table;

    RunManifest manifest;
    manifest.command = "eval";
    manifest.config = {{"buckets", join_ints(edges)},
                       {"bucket_key", args.bucket_key},
                       {"grade_threshold", std::to_string(threshold)},
                       {"profile", args.profile},
                       {"drop_unanswerable", args.drop_unanswerable ? "true" : "false"}};
    manifest.seed = 0;
    manifest.input_paths = {args.checkpoint, args.emb_path, args.data_path};
    manifest.output_paths = {args.out_dir + "/run.tsv", args.out_dir + "/report.txt",
                             args.out_dir + "/report.csv"};
    manifest.tool_version = kVersion;
    manifest.wall_clock_seconds = watch.seconds();
    save_manifest(args.out_dir + "/manifest.json", manifest);
    return kExitOk;
}

// ------------------------------------------------------------------ explain

struct ExplainArgs {
    std::string checkpoint;
    std::string emb_path;
    std::string question;
    std::vector<std::string> answers;
    std::string html_path;
};

int run_explain(const ExplainArgs& args) {
    Stopwatch watch;
    require_readable(args.checkpoint, "checkpoint");
    require_readable(args.emb_path, "embedding file");

    auto [vocab, emb] = load_embeddings(args.emb_path);
    auto [mcfg, params] = load_checkpoint(args.checkpoint);
    if (mcfg.emb_dim != emb.dim())
        throw ConfigError("checkpoint expects embedding dim " + std::to_string(mcfg.emb_dim) +
                          " but " + args.emb_path + " has dim " + std::to_string(emb.dim()));

    const TokenList q_tokens = tokenize(args.question);
    if (q_tokens.empty()) throw DataError("question has no tokens");

    std::vector<ExplainItem> items;
    for (const std::string& answer : args.answers) {
        const TokenList a_tokens = tokenize(answer);
        if (a_tokens.empty()) throw DataError("answer has no tokens: '" + answer + "'");
        ForwardResult f = forward(q_tokens, a_tokens, params, mcfg, vocab, emb);
        items.push_back({std::move(f.a_trace), f.relevance_prob});
    }

    std::cout << render_explain_ansi(q_tokens, items);
    write_text_file(args.html_path, render_explain_html(q_tokens, items));

    RunManifest manifest;
    manifest.command = "explain";
    manifest.config = {{"question", args.question},
                       {"answers", std::to_string(args.answers.size())}};
    manifest.seed = 0;
    manifest.input_paths = {args.checkpoint, args.emb_path};
    manifest.output_paths = {args.html_path};
    manifest.tool_version = kVersion;
    manifest.wall_clock_seconds = watch.seconds();
    save_manifest(args.html_path + ".manifest.json", manifest);

    std::cout << "heatmap -> " << args.html_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention-based answer ranking"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    EmbedArgs embed;
    CLI::App* embed_cmd =
        app.add_subcommand("train-embeddings", "train skip-gram word embeddings on a corpus");
    embed_cmd->add_option("--data", embed.data_path, "training corpus file")->required();
    embed_cmd->add_option("--format", embed.format, "records | trec-qa");
    embed_cmd->add_option("--out", embed.out_path, "output embedding file")->required();
    embed_cmd->add_option("--vocab-out", embed.vocab_out, "output vocab file");
    embed_cmd->add_option("--profile", embed.profile, "trec | liveqa | toy");
    embed_cmd->add_option("--dim", embed.dim, "embedding width (default from profile)");
    embed_cmd->add_option("--min-count", embed.min_count, "minimum token frequency");
    embed_cmd->add_option("--window", embed.window, "context window");
    embed_cmd->add_option("--negatives", embed.negatives, "negative samples per pair");
    embed_cmd->add_option("--epochs", embed.epochs, "passes over the corpus");
    embed_cmd->add_option("--lr", embed.lr, "initial learning rate");
    embed_cmd->add_option("--seed", embed.seed, "random seed");

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "train the ranking model");
    train_cmd->add_option("--data", train_args.data_path, "training dataset")->required();
    train_cmd->add_option("--dev", train_args.dev_path, "development dataset");
    train_cmd->add_option("--format", train_args.format, "records | trec-qa");
    train_cmd->add_option("--emb", train_args.emb_path, "embedding file")->required();
    train_cmd->add_option("--out", train_args.out_dir, "run directory");
    train_cmd->add_option("--profile", train_args.profile, "trec | liveqa | toy");
    train_cmd->add_option("--batch-size", train_args.batch_size, "mini-batch size");
    train_cmd->add_option("--lr", train_args.lr, "learning rate");
    train_cmd->add_option("--lrelu", train_args.lrelu_slope, "lrelu slope");
    train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
    train_cmd->add_option("--seed", train_args.seed, "random seed");
    train_cmd->add_option("--attention", train_args.attention, "scalar | featurewise");
    train_cmd->add_option("--pooling", train_args.pooling, "max | sum");
    train_cmd->add_flag("--uniform-attention", train_args.uniform_attention,
                        "ablation: constant uniform attention weights");
    train_cmd->add_option("--att-dim", train_args.att_dim, "attention layer width");
    train_cmd->add_option("--hidden1-dim", train_args.hidden1_dim, "tanh layer width");
    train_cmd->add_option("--hidden2-dim", train_args.hidden2_dim, "lrelu layer width");
    train_cmd->add_option("--head-dim", train_args.head_dim, "scoring head width");
    train_cmd->add_option("--max-q-len", train_args.max_q_len, "question truncation length");
    train_cmd->add_option("--max-a-len", train_args.max_a_len, "answer truncation length");
    train_cmd->add_option("--threshold", train_args.grade_threshold,
                          "grade threshold for relevance");
    train_cmd->add_flag("--early-stopping", train_args.early_stopping,
                        "stop when dev MRR stalls");
    train_cmd->add_option("--patience", train_args.patience, "early stopping patience");
    train_cmd->add_flag("--fine-tune-embeddings", train_args.fine_tune,
                        "update embedding rows during training");
    train_cmd->add_option("--positive-weight", train_args.positive_weight,
                          "loss weight of relevant instances");

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "rank a dataset and report MRR/NDCG");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint")->required();
    eval_cmd->add_option("--emb", eval_args.emb_path, "embedding file")->required();
    eval_cmd->add_option("--data", eval_args.data_path, "dataset to rank")->required();
    eval_cmd->add_option("--format", eval_args.format, "records | trec-qa");
    eval_cmd->add_option("--out", eval_args.out_dir, "output directory");
    eval_cmd->add_option("--profile", eval_args.profile, "trec | liveqa | toy");
    eval_cmd->add_option("--buckets", eval_args.buckets,
                         "length bucket edges, e.g. 10,25,50 (default from profile)");
    eval_cmd->add_option("--bucket-key", eval_args.bucket_key,
                         "per-question length key: max | mean | top");
    eval_cmd->add_option("--threshold", eval_args.grade_threshold,
                         "grade threshold for relevance");
    eval_cmd->add_flag("--drop-unanswerable", eval_args.drop_unanswerable,
                       "drop questions without any relevant candidate from MRR");

    ExplainArgs explain_args;
    CLI::App* explain_cmd =
        app.add_subcommand("explain", "render attention weights for question-answer pairs");
    explain_cmd->add_option("--checkpoint", explain_args.checkpoint, "model checkpoint")
        ->required();
    explain_cmd->add_option("--emb", explain_args.emb_path, "embedding file")->required();
    explain_cmd->add_option("--question", explain_args.question, "question text")->required();
    explain_cmd->add_option("--answer", explain_args.answers, "answer text (repeatable)")
        ->required();
    explain_cmd->add_option("--html", explain_args.html_path, "output HTML file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*embed_cmd) return run_train_embeddings(embed);
        if (*train_cmd) {
            if (train_args.out_dir.empty()) train_args.out_dir = default_out_dir() + "/run";
            return run_train(train_args);
        }
        if (*eval_cmd) {
            if (eval_args.out_dir.empty()) eval_args.out_dir = default_out_dir() + "/eval";
            return run_eval(eval_args);
        }
        if (*explain_cmd) {
            if (explain_args.html_path.empty())
                explain_args.html_path = default_out_dir() + "/explain.html";
            return run_explain(explain_args);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
