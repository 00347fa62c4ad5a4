#include "attnrank/text.hpp"

#include <algorithm>
#include <cctype>
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

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

void append_piece_tokens(const std::string& piece, TokenList& out) {
    size_t begin = 0;
    size_t end = piece.size();
    std::vector<char> leading;
    std::vector<char> trailing;
    while (begin < end && is_ascii_punct(static_cast<unsigned char>(piece[begin]))) {
        leading.push_back(piece[begin]);
        ++begin;
    }
    while (end > begin && is_ascii_punct(static_cast<unsigned char>(piece[end - 1]))) {
        trailing.push_back(piece[end - 1]);
        --end;
    }
    for (char c : leading) out.emplace_back(1, c);
    if (end > begin) out.push_back(piece.substr(begin, end - begin));
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) out.emplace_back(1, *it);
}

constexpr char kEmbMagic[8] = {'A', 'R', 'N', 'K', 'E', 'M', 'B', '\0'};
constexpr uint32_t kEmbVersion = 1;

}  // namespace

TokenList tokenize(const std::string& text) {
    TokenList out;
    std::string piece;
    for (size_t i = 0; i <= text.size(); ++i) {
        const bool at_end = i == text.size();
        const char c = at_end ? ' ' : text[i];
        if (std::isspace(static_cast<unsigned char>(c)) || at_end) {
            if (!piece.empty()) {
                append_piece_tokens(piece, out);
                piece.clear();
            }
        } else {
            unsigned char uc = static_cast<unsigned char>(c);
            piece.push_back(uc < 128 ? static_cast<char>(std::tolower(uc)) : c);
        }
    }
    return out;
}

Vocab build_vocab(const std::vector<TokenList>& corpus, int min_count) {
    if (min_count < 1) throw ConfigError("build_vocab: min_count must be >= 1");
    std::unordered_map<std::string, int64_t> counts;
    int64_t total = 0;
    for (const TokenList& sent : corpus) {
        for (const std::string& tok : sent) {
            if (tok == Vocab::kPadToken || tok == Vocab::kUnkToken)
                throw DataError("build_vocab: corpus contains a reserved token: " + tok);
            ++counts[tok];
            ++total;
        }
    }
    if (total == 0) throw DataError("build_vocab: empty corpus");

    std::vector<std::pair<std::string, int64_t>> kept;
    kept.reserve(counts.size());
    for (auto& [tok, n] : counts) {
        if (n >= min_count) kept.emplace_back(tok, n);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    v.min_count = min_count;
    v.index_to_token = {Vocab::kPadToken, Vocab::kUnkToken};
    for (auto& [tok, n] : kept) {
        v.token_to_index.emplace(tok, v.size());
        v.index_to_token.push_back(tok);
    }
    return v;
}

std::vector<uint8_t> overlap_flags(const TokenList& q_tokens, const TokenList& a_tokens) {
    std::unordered_map<std::string, bool> in_q;
    for (const std::string& t : q_tokens) in_q[t] = true;
    std::vector<uint8_t> flags(a_tokens.size(), 0);
    for (size_t i = 0; i < a_tokens.size(); ++i) {
        if (in_q.count(a_tokens[i])) flags[i] = 1;
    }
    return flags;
}

SequenceMatrix embed_sequence(const TokenList& tokens, const Vocab& vocab, const EmbeddingMatrix& emb,
                              const TokenList& other_side_tokens, int max_len) {
    if (max_len < 1) throw ConfigError("embed_sequence: max_len must be >= 1");
    if (tokens.empty()) throw DataError("embed_sequence: empty token list");
    if (emb.vocab_size() != vocab.size())
        throw DimensionError("embed_sequence: embedding table does not match vocab size");

    const int n = std::min<int>(static_cast<int>(tokens.size()), max_len);
    const int dim = emb.dim();
    std::vector<uint8_t> flags = overlap_flags(other_side_tokens, tokens);

    SequenceMatrix seq;
    seq.rows = Matrix(n, dim + 1);
    seq.mask.assign(n, 1);
    seq.tokens.assign(tokens.begin(), tokens.begin() + n);
    for (int t = 0; t < n; ++t) {
        const int idx = vocab.lookup(tokens[t]);
        std::span<const double> row = emb.vectors.row(idx);
        std::span<double> out = seq.rows.row(t);
        std::copy(row.begin(), row.end(), out.begin());
        out[dim] = flags[t] ? 1.0 : 0.0;
    }
    return seq;
}

SequenceMatrix pad_sequence(const SequenceMatrix& seq, int target_len) {
    if (target_len < seq.length()) throw DimensionError("pad_sequence: target shorter than sequence");
    if (target_len == seq.length()) return seq;
    SequenceMatrix out;
    out.rows = Matrix(target_len, seq.width());
    out.mask.assign(target_len, 0);
    out.tokens.assign(target_len, "");
    for (int t = 0; t < seq.length(); ++t) {
        std::span<const double> src = seq.rows.row(t);
        std::copy(src.begin(), src.end(), out.rows.row(t).begin());
        out.mask[t] = seq.mask[t];
        out.tokens[t] = seq.tokens[t];
    }
    return out;
}

EmbeddingMatrix train_word2vec(const std::vector<TokenList>& corpus, const Vocab& vocab, int dim,
                               const SkipGramConfig& cfg, SeededRng& rng) {
    if (dim < 2) throw ConfigError("train_word2vec: dim must be >= 2");
    if (corpus.empty()) throw DataError("train_word2vec: empty corpus");
    if (cfg.window < 1 || cfg.negatives < 0 || cfg.epochs < 1 || cfg.learning_rate <= 0.0)
        throw ConfigError("train_word2vec: invalid skip-gram config");

    // Map the corpus to index streams; rare tokens become UNK and train its row.
    std::vector<std::vector<int>> stream;
    stream.reserve(corpus.size());
    std::vector<int64_t> freq(vocab.size(), 0);
    int64_t total_tokens = 0;
    for (const TokenList& sent : corpus) {
        std::vector<int> ids;
        ids.reserve(sent.size());
        for (const std::string& tok : sent) {
            const int idx = vocab.lookup(tok);
            ids.push_back(idx);
            ++freq[idx];
            ++total_tokens;
        }
        if (!ids.empty()) stream.push_back(std::move(ids));
    }
    if (total_tokens == 0) throw DataError("train_word2vec: empty corpus");

    // unigram^power table for negative sampling
    const int table_size = 100000;
    std::vector<int> neg_table;
    neg_table.reserve(table_size);
    double pow_sum = 0.0;
    for (int i = 1; i < vocab.size(); ++i) pow_sum += std::pow(static_cast<double>(freq[i]), cfg.sampling_power);
    if (pow_sum > 0.0) {
        int word = 1;
        double cum = std::pow(static_cast<double>(freq[word]), cfg.sampling_power) / pow_sum;
        for (int a = 0; a < table_size; ++a) {
            neg_table.push_back(word);
            if (static_cast<double>(a) / table_size > cum && word + 1 < vocab.size()) {
                ++word;
                cum += std::pow(static_cast<double>(freq[word]), cfg.sampling_power) / pow_sum;
            }
        }
    }

    EmbeddingMatrix emb;
    emb.vectors = Matrix(vocab.size(), dim);
    for (int i = 1; i < vocab.size(); ++i) {
        for (int j = 0; j < dim; ++j) emb.vectors.at(i, j) = rng.uniform(-0.5 / dim, 0.5 / dim);
    }
    Matrix out_vectors(vocab.size(), dim);  // context vectors, zero-initialized

    const int64_t schedule_total = total_tokens * cfg.epochs;
    const double min_lr = cfg.learning_rate * 1e-4;
    int64_t processed = 0;
    Vector grad_center(dim);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const std::vector<int>& ids : stream) {
            const int n = static_cast<int>(ids.size());
            for (int pos = 0; pos < n; ++pos) {
                const double lr =
                    std::max(min_lr, cfg.learning_rate *
                                         (1.0 - static_cast<double>(processed) / schedule_total));
                ++processed;
                const int center = ids[pos];
                const int reach = 1 + rng.uniform_int(cfg.window);
                for (int off = -reach; off <= reach; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= n) continue;
                    const int context = ids[cpos];

                    std::span<double> v_center = emb.vectors.row(center);
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    for (int s = 0; s < cfg.negatives + 1; ++s) {
                        int target;
                        double label;
                        if (s == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            if (neg_table.empty()) break;
                            target = neg_table[rng.uniform_int(table_size)];
                            if (target == context) continue;
                            label = 0.0;
                        }
                        std::span<double> v_out = out_vectors.row(target);
                        const double score = dot(v_center, v_out);
                        const double sigma = 1.0 / (1.0 + std::exp(-score));
                        const double g = (label - sigma) * lr;
                        for (int j = 0; j < dim; ++j) {
                            grad_center[j] += g * v_out[j];
                            v_out[j] += g * v_center[j];
                        }
                    }
                    for (int j = 0; j < dim; ++j) v_center[j] += grad_center[j];
                }
            }
        }
    }
    // PAD stays zero by construction; assert the contract cheaply.
    for (int j = 0; j < dim; ++j) emb.vectors.at(Vocab::kPad, j) = 0.0;
    return emb;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

void save_embeddings(const std::string& path, const Vocab& vocab, const EmbeddingMatrix& emb) {
    if (emb.vocab_size() != vocab.size())
        throw DimensionError("save_embeddings: table does not match vocab size");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_embeddings: cannot open " + path);
    os.write(kEmbMagic, 8);
    write_u32(os, kEmbVersion);
    write_u32(os, static_cast<uint32_t>(emb.dim()));
    write_u32(os, static_cast<uint32_t>(vocab.size()));
    for (int i = 0; i < vocab.size(); ++i) {
        const std::string& tok = vocab.index_to_token[i];
        write_u32(os, static_cast<uint32_t>(tok.size()));
        os.write(tok.data(), static_cast<std::streamsize>(tok.size()));
        for (int j = 0; j < emb.dim(); ++j) write_f64(os, emb.vectors.at(i, j));
    }
    if (!os) throw IoError("save_embeddings: write failed for " + path);
}

std::pair<Vocab, EmbeddingMatrix> load_embeddings(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_embeddings: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kEmbMagic, 8) != 0)
        throw IoError("load_embeddings: bad magic in " + path);
    const uint32_t version = read_u32(is);
    if (version != kEmbVersion) throw IoError("load_embeddings: unsupported format version");
    const int dim = static_cast<int>(read_u32(is));
    const int vocab_size = static_cast<int>(read_u32(is));
    if (dim < 1 || vocab_size < 2) throw IoError("load_embeddings: corrupt header");

    Vocab vocab;
    EmbeddingMatrix emb;
    emb.vectors = Matrix(vocab_size, dim);
    vocab.index_to_token.reserve(vocab_size);
    for (int i = 0; i < vocab_size; ++i) {
        const uint32_t len = read_u32(is);
        std::string tok(len, '\0');
        is.read(tok.data(), len);
        if (!is) throw IoError("load_embeddings: truncated file");
        vocab.index_to_token.push_back(tok);
        if (i >= 2) vocab.token_to_index.emplace(std::move(tok), i);
        for (int j = 0; j < dim; ++j) emb.vectors.at(i, j) = read_f64(is);
    }
    if (vocab.index_to_token[0] != Vocab::kPadToken || vocab.index_to_token[1] != Vocab::kUnkToken)
        throw IoError("load_embeddings: reserved rows missing");
    return {std::move(vocab), std::move(emb)};
}

void save_vocab(const std::string& path, const Vocab& vocab) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_vocab: cannot open " + path);
    for (int i = 2; i < vocab.size(); ++i) os << vocab.index_to_token[i] << '\n';
    if (!os) throw IoError("save_vocab: write failed for " + path);
}

Vocab load_vocab(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_vocab: cannot open " + path);
    Vocab v;
    v.index_to_token = {Vocab::kPadToken, Vocab::kUnkToken};
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        v.token_to_index.emplace(line, v.size());
        v.index_to_token.push_back(line);
    }
    return v;
}

}  // namespace attnrank
