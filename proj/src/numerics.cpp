#include "attnrank/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace attnrank {

bool all_finite(const Vector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const Matrix& m) {
    for (double x : m.data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector lrelu(const Vector& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("lrelu slope must be in (0,1)");
    if (!all_finite(x)) throw NumericError("lrelu: non-finite input");
    Vector out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i], slope * x[i]);
    return out;
}

Vector lrelu_grad(const Vector& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) throw ConfigError("lrelu slope must be in (0,1)");
    if (!all_finite(x)) throw NumericError("lrelu_grad: non-finite input");
    Vector out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? 1.0 : slope;
    return out;
}

Vector softmax(const Vector& scores) {
    if (scores.empty()) throw DimensionError("softmax: empty input");
    if (!all_finite(scores)) throw NumericError("softmax: non-finite input");
    double mx = *std::max_element(scores.begin(), scores.end());
    Vector out(scores.size());
    double sum = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

Vector dense_forward(const Vector& x, const DenseLayerParams& p) {
    if (static_cast<int>(x.size()) != p.in_dim())
        throw DimensionError("dense_forward: input size does not match layer in_dim");
    if (static_cast<int>(p.b.size()) != p.out_dim())
        throw DimensionError("dense_forward: bias size does not match layer out_dim");
    Vector out(p.b);
    for (int i = 0; i < p.in_dim(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        std::span<const double> wrow = p.W.row(i);
        for (int j = 0; j < p.out_dim(); ++j) out[j] += xi * wrow[j];
    }
    return out;
}

double grad_check(const std::function<double(const Vector&)>& loss_fn, const Vector& params,
                  const Vector& analytic_grad, double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw ConfigError("grad_check: eps must be in [1e-7, 1e-3]");
    if (params.size() != analytic_grad.size())
        throw DimensionError("grad_check: gradient size does not match parameter size");

    const double f0 = loss_fn(params);
    const double f1 = loss_fn(params);
    if (f0 != f1) throw CheckInvalidError("grad_check: loss_fn is not deterministic");

    Vector theta = params;
    double max_rel = 0.0;
    for (size_t i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        theta[i] = orig + eps;
        const double fp = loss_fn(theta);
        theta[i] = orig - eps;
        const double fm = loss_fn(theta);
        theta[i] = orig;

        const double numeric = (fp - fm) / (2.0 * eps);
        const double analytic = analytic_grad[i];
        // Guarded denominator: entries whose magnitude is below the finite
        // difference noise floor are compared on an absolute scale.
        const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-3});
        max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
    }
    return max_rel;
}

Matrix init_uniform(int rows, int cols, double bound, SeededRng& rng) {
    if (!(bound > 0.0)) throw ConfigError("init_uniform: bound must be positive");
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return m;
}

}  // namespace attnrank
