#include "attnrank/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace attnrank {

namespace {

double max_weight(const AttentionTrace& tr) {
    double mx = 0.0;
    for (double w : tr.weights) mx = std::max(mx, w);
    return mx > 0.0 ? mx : 1.0;
}

double weight_sum(const AttentionTrace& tr) {
    double s = 0.0;
    for (double w : tr.weights) s += w;
    return s;
}

std::string escape_html(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_explain_ansi(const TokenList& question_tokens,
                                const std::vector<ExplainItem>& items) {
    // 256-color green ramp, light to saturated
    static const int kGreens[] = {22, 28, 34, 40, 46};
    std::ostringstream os;
    os << "question:";
    for (const std::string& t : question_tokens) os << ' ' << t;
    os << '\n';

    char buf[64];
    for (size_t n = 0; n < items.size(); ++n) {
        const ExplainItem& item = items[n];
        const double mx = max_weight(item.trace);
        std::snprintf(buf, sizeof(buf), "%.4f", item.score);
        os << "answer " << (n + 1) << " (score " << buf << "):\n  ";
        for (size_t t = 0; t < item.trace.tokens.size(); ++t) {
            if (item.trace.tokens[t].empty()) continue;  // padding
            const double rel = item.trace.weights[t] / mx;
            const int level = std::min(4, static_cast<int>(rel * 5.0));
            os << "\x1b[48;5;" << kGreens[level] << "m" << item.trace.tokens[t] << "\x1b[0m ";
        }
        std::snprintf(buf, sizeof(buf), "%.6f", weight_sum(item.trace));
        os << "\n  weight sum = " << buf << '\n';
    }
    return os.str();
}

std::string render_explain_html(const TokenList& question_tokens,
                                const std::vector<ExplainItem>& items) {
    std::ostringstream os;
    os << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>attention heatmap</title>\n"
       << "<style>\n"
       << "body { font-family: sans-serif; margin: 2em; max-width: 60em; }\n"
       << ".answer { margin: 1.5em 0; line-height: 1.9; }\n"
       << ".tok { padding: 0.1em 0.15em; border-radius: 3px; }\n"
       << ".meta { color: #555; font-size: 0.9em; }\n"
       << "</style>\n</head>\n<body>\n";

    os << "<h2>question</h2>\n<p>";
    for (size_t i = 0; i < question_tokens.size(); ++i) {
        if (i) os << ' ';
        os << escape_html(question_tokens[i]);
    }
    os << "</p>\n";

    char buf[64];
    for (size_t n = 0; n < items.size(); ++n) {
        const ExplainItem& item = items[n];
        const double mx = max_weight(item.trace);
        std::snprintf(buf, sizeof(buf), "%.4f", item.score);
        os << "<div class=\"answer\">\n<h3>answer " << (n + 1) << " <span class=\"meta\">score "
           << buf << "</span></h3>\n<p>";
        for (size_t t = 0; t < item.trace.tokens.size(); ++t) {
            if (item.trace.tokens[t].empty()) continue;
            const double alpha = item.trace.weights[t] / mx;
            std::snprintf(buf, sizeof(buf), "%.3f", alpha);
            os << "<span class=\"tok\" style=\"background-color: rgba(46,160,67," << buf << ")\"";
            std::snprintf(buf, sizeof(buf), "%.6f", item.trace.weights[t]);
            os << " title=\"" << buf << "\">" << escape_html(item.trace.tokens[t]) << "</span> ";
        }
        std::snprintf(buf, sizeof(buf), "%.6f", weight_sum(item.trace));
        os << "</p>\n<p class=\"meta\">weight sum = " << buf << "</p>\n</div>\n";
    }
    os << "</body>\n</html>\n";
    return os.str();
}

}  // namespace attnrank
