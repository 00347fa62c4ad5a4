#pragma once

#include <string>

#include "attnrank/text.hpp"

namespace attnrank {

/// One pointwise training example: a (question, candidate answer) pair with
/// a binary relevance label.
struct Instance {
    std::string question_id;
    std::string answer_id;
    TokenList q_tokens;
    TokenList a_tokens;
    int label = 0;  // 1 relevant, 0 not
    int grade = 0;  // original graded judgment, kept for NDCG
};

}  // namespace attnrank
