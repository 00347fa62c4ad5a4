#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "attnrank/errors.hpp"

namespace attnrank {

using Vector = std::vector<double>;

/// Dense row-major matrix. All entries are expected to stay finite;
/// operations that can introduce non-finite values validate their inputs.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r <= 0 || c <= 0) throw DimensionError("matrix dims must be positive");
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// Weights and bias of one dense layer: y = x W + b.
struct DenseLayerParams {
    Matrix W;  // in_dim x out_dim
    Vector b;  // out_dim

    int in_dim() const { return W.rows; }
    int out_dim() const { return W.cols; }
};

/// Deterministic generator used for initialization, sampling and shuffles.
/// All draws go through explicit arithmetic on the raw 64-bit stream so the
/// sequence does not depend on the standard library's distribution details.
class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            std::swap(v[i], v[uniform_int(i + 1)]);
        }
    }

private:
    std::mt19937_64 gen_;
};

/// Elementwise max(x, slope * x).
Vector lrelu(const Vector& x, double slope);

/// Derivative of lrelu: 1 for x > 0, slope for x <= 0.
/// The subgradient at exactly 0 is the slope value.
Vector lrelu_grad(const Vector& x, double slope);

/// Numerically stable softmax (max-subtraction). Output sums to 1.
Vector softmax(const Vector& scores);

/// x W + b.
Vector dense_forward(const Vector& x, const DenseLayerParams& p);

/// Compares an analytic gradient against central finite differences
/// (f(t+eps) - f(t-eps)) / (2 eps) per parameter and returns the maximum
/// relative error. Throws CheckInvalidError if loss_fn is not deterministic.
double grad_check(const std::function<double(const Vector&)>& loss_fn, const Vector& params,
                  const Vector& analytic_grad, double eps);

/// Matrix with i.i.d. entries uniform on [-bound, +bound].
Matrix init_uniform(int rows, int cols, double bound, SeededRng& rng);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace attnrank
