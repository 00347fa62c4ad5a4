#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "attnrank/numerics.hpp"

namespace attnrank {

using TokenList = std::vector<std::string>;

/// Token-to-index map with dense, stable indices.
/// Index 0 is PAD, index 1 is UNK; real tokens start at 2.
struct Vocab {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr const char* kPadToken = "<pad>";
    static constexpr const char* kUnkToken = "<unk>";

    std::unordered_map<std::string, int> token_to_index;
    std::vector<std::string> index_to_token;  // includes the reserved entries
    int min_count = 1;

    int size() const { return static_cast<int>(index_to_token.size()); }

    /// Index of a token, UNK when out of vocabulary.
    int lookup(const std::string& token) const {
        auto it = token_to_index.find(token);
        return it == token_to_index.end() ? kUnk : it->second;
    }

    bool contains(const std::string& token) const { return token_to_index.count(token) > 0; }
};

/// Learned word vectors, one row per vocab index. The PAD row is all zeros
/// and is never updated.
struct EmbeddingMatrix {
    Matrix vectors;  // |vocab| x dim

    int dim() const { return vectors.cols; }
    int vocab_size() const { return vectors.rows; }
};

/// A tokenized sentence as per-token feature rows of width dim+1: the token
/// embedding concatenated with one overlap flag. Masked (padding) rows are
/// all zeros.
struct SequenceMatrix {
    Matrix rows;                // length x (dim + 1)
    std::vector<uint8_t> mask;  // 1 for real tokens, 0 for padding
    TokenList tokens;           // real tokens; empty string at padded slots

    int length() const { return rows.rows; }
    int width() const { return rows.cols; }
};

struct SkipGramConfig {
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025;  // decays linearly over the run
    double sampling_power = 0.75;  // unigram^power negative-sampling distribution
};

/// Lowercases, splits on whitespace, and splits leading/trailing ASCII
/// punctuation of each piece into separate tokens.
TokenList tokenize(const std::string& text);

/// Vocabulary over all tokens with frequency >= min_count. Index assignment
/// is deterministic: frequency descending, then token lexicographic.
Vocab build_vocab(const std::vector<TokenList>& corpus, int min_count);

/// Skip-gram with negative sampling over the given corpus. Tokens below
/// min_count train the UNK row; the PAD row is never touched.
EmbeddingMatrix train_word2vec(const std::vector<TokenList>& corpus, const Vocab& vocab, int dim,
                               const SkipGramConfig& cfg, SeededRng& rng);

/// flag[i] = 1 iff a_tokens[i] occurs anywhere in q_tokens (exact match).
std::vector<uint8_t> overlap_flags(const TokenList& q_tokens, const TokenList& a_tokens);

/// Per-token feature rows: embedding (UNK row for OOV) plus one overlap flag
/// against other_side_tokens. Truncates to max_len, keeping the prefix.
SequenceMatrix embed_sequence(const TokenList& tokens, const Vocab& vocab, const EmbeddingMatrix& emb,
                              const TokenList& other_side_tokens, int max_len);

/// Appends all-zero masked rows until the sequence has target_len rows.
SequenceMatrix pad_sequence(const SequenceMatrix& seq, int target_len);

/// Binary embedding table: versioned header, then per token the UTF-8 string
/// and dim little-endian 64-bit floats. Round-trips bit-exactly.
void save_embeddings(const std::string& path, const Vocab& vocab, const EmbeddingMatrix& emb);
std::pair<Vocab, EmbeddingMatrix> load_embeddings(const std::string& path);

/// Plain-text vocab file: one token per line, 0-based line k holds index k+2.
void save_vocab(const std::string& path, const Vocab& vocab);
Vocab load_vocab(const std::string& path);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace attnrank
