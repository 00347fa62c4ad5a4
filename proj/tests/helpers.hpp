#pragma once

// Independent oracles used by the tests. These deliberately avoid the
// library's own computation paths.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "attnrank/data_io.hpp"
#include "attnrank/numerics.hpp"

namespace test_oracles {

// plain triple-loop y = x W + b
inline attnrank::Vector naive_dense(const attnrank::Vector& x, const attnrank::Matrix& W,
                                    const attnrank::Vector& b) {
    attnrank::Vector y(W.cols, 0.0);
    for (int j = 0; j < W.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < W.rows; ++i) s += x[i] * W.at(i, j);
        y[j] = s + b[j];
    }
    return y;
}

inline double dcg_of(const std::vector<int>& grades) {
    double s = 0.0;
    for (size_t i = 0; i < grades.size(); ++i)
        s += (std::pow(2.0, grades[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    return s;
}

// NDCG via explicit search over all permutations for the ideal ordering
inline double brute_force_ndcg(std::vector<int> grades) {
    const double actual = dcg_of(grades);
    std::vector<int> perm = grades;
    std::sort(perm.begin(), perm.end());
    double best = 0.0;
    do {
        best = std::max(best, dcg_of(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (best == 0.0) return 0.0;
    return actual / best;
}

// Bag-of-words overlap ranking: |set(q) & set(a)|, stable ties.
// Validates that synthetic corpora are solvable without any learning.
inline double overlap_baseline_mrr(const std::vector<attnrank::QuestionGroup>& groups) {
    double total = 0.0;
    for (const attnrank::QuestionGroup& g : groups) {
        const attnrank::TokenList q = attnrank::tokenize(g.question);
        std::set<std::string> q_set(q.begin(), q.end());
        std::vector<std::pair<int, size_t>> scored;  // (-overlap, input order)
        for (size_t i = 0; i < g.candidates.size(); ++i) {
            const attnrank::TokenList a = attnrank::tokenize(g.candidates[i].answer);
            std::set<std::string> a_set(a.begin(), a.end());
            int overlap = 0;
            for (const std::string& t : q_set) overlap += a_set.count(t) ? 1 : 0;
            scored.emplace_back(-overlap, i);
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t rank = 0; rank < scored.size(); ++rank) {
            if (g.candidates[scored[rank].second].grade >= 1) {
                total += 1.0 / static_cast<double>(rank + 1);
                break;
            }
        }
    }
    return total / static_cast<double>(groups.size());
}

}  // namespace test_oracles
