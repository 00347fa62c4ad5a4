#pragma once

#include <string>
#include <vector>

#include "attnrank/model.hpp"

namespace attnrank {

/// One answer prepared for rendering: tokens, their attention weights and
/// the pair's relevance score.
struct ExplainItem {
    AttentionTrace trace;
    double score = 0.0;
};

/// Terminal rendering: each token on a green-intensity background scaled by
/// its weight, with the score line and a weight-sum footer per answer.
std::string render_explain_ansi(const TokenList& question_tokens,
                                const std::vector<ExplainItem>& items);

/// Self-contained static HTML heatmap (inline styles, no external
/// references): green span intensity proportional to the attention weight.
std::string render_explain_html(const TokenList& question_tokens,
                                const std::vector<ExplainItem>& items);

}  // namespace attnrank
