#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "seamkit/autodiff.hpp"
#include "seamkit/rng.hpp"

using namespace seamkit;
using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

Matrix random_matrix(Rng& rng, long r, long c) {
    Matrix m(r, c);
    for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

double evaluate(const Builder& f, const std::vector<Matrix>& inputs) {
    Tape t;
    std::vector<Var> leaves;
    for (const auto& m : inputs) leaves.push_back(t.leaf(m, false));
    return f(t, leaves).scalar();
}

// Reduces any output to a scalar through fixed random weights so every
// output entry contributes to the checked gradient.
Var weighted_sum(Var y, std::uint64_t seed) {
    Rng rng(seed);
    Tape& t = *y.tape();
    const Matrix w = random_matrix(rng, y.cols(), 1);
    const Matrix ones = Matrix::Ones(1, y.rows());
    return ad::matmul(ad::matmul(t.constant(ones), y), t.constant(w));
}

void check_gradient(const Builder& f, std::vector<Matrix> inputs, double tol = 1e-7) {
    Tape t;
    std::vector<Var> leaves;
    for (const auto& m : inputs) leaves.push_back(t.leaf(m, true));
    const Var out = f(t, leaves);
    t.backward(out);
    const double h = 1e-5;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Matrix g = t.has_grad(leaves[k].id()) ? t.grad(leaves[k].id())
                                                     : Matrix::Zero(inputs[k].rows(), inputs[k].cols());
        for (long i = 0; i < inputs[k].size(); ++i) {
            const double x = inputs[k].data()[i];
            inputs[k].data()[i] = x + h;
            const double fp = evaluate(f, inputs);
            inputs[k].data()[i] = x - h;
            const double fm = evaluate(f, inputs);
            inputs[k].data()[i] = x;
            const double fd = (fp - fm) / (2 * h);
            EXPECT_NEAR(g.data()[i], fd, tol * std::max(1.0, std::abs(fd))) << "input " << k << " entry " << i;
        }
    }
}

}  // namespace

TEST(Autodiff, Matmul) {
    Rng rng(1);
    check_gradient([](Tape&, const std::vector<Var>& x) { return weighted_sum(ad::matmul(x[0], x[1]), 7); },
                   {random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)});
    check_gradient([](Tape&, const std::vector<Var>& x) { return weighted_sum(ad::matmul_nt(x[0], x[1]), 7); },
                   {random_matrix(rng, 3, 4), random_matrix(rng, 5, 4)});
}

TEST(Autodiff, Elementwise) {
    Rng rng(2);
    check_gradient(
        [](Tape&, const std::vector<Var>& x) {
            return weighted_sum(ad::sub(ad::add(x[0], ad::scale(x[1], 2.5)), ad::add_row(x[0], x[2])), 3);
        },
        {random_matrix(rng, 4, 3), random_matrix(rng, 4, 3), random_matrix(rng, 1, 3)});
    check_gradient([](Tape&, const std::vector<Var>& x) { return weighted_sum(ad::gelu(x[0]), 4); },
                   {3.0 * random_matrix(rng, 5, 4)});
}

TEST(Autodiff, LayerNorm) {
    Rng rng(3);
    check_gradient(
        [](Tape&, const std::vector<Var>& x) { return weighted_sum(ad::layer_norm(x[0], x[1], x[2]), 5); },
        {random_matrix(rng, 4, 6), random_matrix(rng, 1, 6), random_matrix(rng, 1, 6)}, 1e-6);
}

TEST(Autodiff, Softmax) {
    Rng rng(4);
    for (bool causal : {false, true}) {
        check_gradient(
            [causal](Tape&, const std::vector<Var>& x) { return weighted_sum(ad::softmax_rows(x[0], causal), 6); },
            {2.0 * random_matrix(rng, 5, 5)});
    }
}

TEST(Autodiff, CausalSoftmaxWritesExactZeros) {
    Rng rng(5);
    Tape t;
    const Var y = ad::softmax_rows(t.constant(random_matrix(rng, 6, 6)), true);
    for (long i = 0; i < 6; ++i) {
        for (long j = i + 1; j < 6; ++j) EXPECT_EQ(y.value()(i, j), 0.0);
        EXPECT_NEAR(y.value().row(i).sum(), 1.0, 1e-15);
    }
}

TEST(Autodiff, SlicesAndConcats) {
    Rng rng(6);
    check_gradient(
        [](Tape&, const std::vector<Var>& x) {
            const auto a = ad::slice_cols(x[0], 1, 2);
            const auto b = ad::concat_cols({a, x[1]});
            return weighted_sum(ad::concat_rows({b, x[2]}), 8);
        },
        {random_matrix(rng, 3, 4), random_matrix(rng, 3, 1), random_matrix(rng, 2, 3)});
}

TEST(Autodiff, GatherRowsWithRepeats) {
    Rng rng(7);
    check_gradient(
        [](Tape&, const std::vector<Var>& x) { return weighted_sum(ad::gather_rows(x[0], {2, 0, 2, 1, 2}), 9); },
        {random_matrix(rng, 4, 3)});
}

TEST(Autodiff, PoolAndRepeat) {
    Rng rng(8);
    for (long n : {1, 2, 5, 6, 7, 12}) {
        check_gradient(
            [n](Tape&, const std::vector<Var>& x) {
                const auto p = ad::shift_pool(x[0], 3);
                return weighted_sum(ad::repeat_rows(p, 3, n), 10);
            },
            {random_matrix(rng, n, 2)});
    }
}

TEST(Autodiff, ShiftPoolValues) {
    Matrix a(5, 1);
    a << 1, 2, 3, 4, 5;
    Tape t;
    const auto p = ad::shift_pool(t.constant(a), 3);
    ASSERT_EQ(p.rows(), 2);
    // Row 0 only sees row 0; row 1 sees rows 1..3.
    EXPECT_DOUBLE_EQ(p.value()(0, 0), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(p.value()(1, 0), 3.0);
    const auto r = ad::repeat_rows(p, 3, 5);
    EXPECT_EQ(r.value()(2, 0), p.value()(0, 0));
    EXPECT_EQ(r.value()(4, 0), p.value()(1, 0));
}

TEST(Autodiff, PooledLength) {
    EXPECT_EQ(ad::pooled_length(1, 3), 1);
    EXPECT_EQ(ad::pooled_length(3, 3), 1);
    EXPECT_EQ(ad::pooled_length(4, 3), 2);
    EXPECT_EQ(ad::pooled_length(6, 2), 3);
}

TEST(Autodiff, SumLogProb) {
    Rng rng(9);
    check_gradient([](Tape&, const std::vector<Var>& x) { return ad::sum_log_prob(x[0], {3, 0, 1}); },
                   {3.0 * random_matrix(rng, 4, 5)});
    Tape t;
    const auto v = ad::sum_log_prob(t.constant(Matrix::Zero(3, 8)), {0, 1, 2});
    EXPECT_NEAR(v.scalar(), -3.0 * std::log(8.0), 1e-14);
}

TEST(Autodiff, NegLogSigmoid) {
    EXPECT_NEAR(ad::neg_log_sigmoid(0.0), std::numbers::ln2, 1e-16);
    EXPECT_NEAR(ad::neg_log_sigmoid(2.0), 0.12692801104297263, 1e-15);
    EXPECT_NEAR(ad::neg_log_sigmoid(-800.0), 800.0, 1e-12);
    EXPECT_NEAR(ad::neg_log_sigmoid(800.0), 0.0, 1e-300);
    EXPECT_NEAR(ad::sigmoid(-800.0), 0.0, 1e-300);
    check_gradient(
        [](Tape&, const std::vector<Var>& x) {
            return ad::sum_scalars({ad::neg_log_sigmoid(x[0]), ad::scale(ad::neg_log_sigmoid(x[1]), 0.5)});
        },
        {Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, -1.9)});
}

TEST(Autodiff, BackwardRejectsNonScalar) {
    Tape t;
    const auto v = t.leaf(Matrix::Zero(2, 2), true);
    EXPECT_THROW(t.backward(v), ContractError);
}

TEST(Autodiff, ConstantsReceiveNoGradient) {
    Tape t;
    const auto c = t.constant(Matrix::Ones(2, 2));
    const auto x = t.leaf(Matrix::Ones(2, 2), true);
    t.backward(weighted_sum(ad::matmul(c, x), 1));
    EXPECT_FALSE(t.has_grad(c.id()));
    EXPECT_TRUE(t.has_grad(x.id()));
}
