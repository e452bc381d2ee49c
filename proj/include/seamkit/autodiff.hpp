#pragma once

// Minimal reverse-mode differentiation over dense row-major matrices. A Tape
// records every operation of one forward pass; backward() replays it in
// reverse and accumulates gradients into each node that needs one.

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "error.hpp"

namespace seamkit::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Tape;

class Var {
public:
    Var() = default;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    const Matrix& value() const;
    long rows() const { return value().rows(); }
    long cols() const { return value().cols(); }
    double scalar() const { return value()(0, 0); }

private:
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    struct Node {
        Matrix value;
        Matrix grad;
        bool needs_grad = false;
        bool has_grad = false;
        std::function<void(Tape&, std::size_t)> backward;
    };

    Var constant(Matrix value) { return push(std::move(value), false, nullptr); }
    Var leaf(Matrix value, bool requires_grad) { return push(std::move(value), requires_grad, nullptr); }

    Var push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backward) {
        nodes_.push_back(Node{std::move(value), Matrix(), needs_grad, false,
                              needs_grad ? std::move(backward) : nullptr});
        return Var(this, nodes_.size() - 1);
    }

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

    // Gradient buffer of a node, zero-initialised on first use.
    Matrix& grad(std::size_t id) {
        auto& n = nodes_[id];
        if (!n.has_grad) {
            n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
            n.has_grad = true;
        }
        return n.grad;
    }

    bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }

    // Seeds d(output)/d(output) = 1 for a 1x1 output and propagates.
    void backward(Var output) {
        if (output.tape() != this || output.rows() != 1 || output.cols() != 1) {
            throw ContractError("backward needs a scalar output on this tape");
        }
        grad(output.id())(0, 0) += 1.0;
        for (std::size_t i = output.id() + 1; i-- > 0;) {
            auto& n = nodes_[i];
            if (n.backward && n.has_grad) n.backward(*this, i);
        }
    }

    std::size_t size() const { return nodes_.size(); }

private:
    std::deque<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

namespace detail {

inline bool any_grad(std::initializer_list<Var> vs) {
    for (const auto& v : vs) {
        if (v.tape()->needs_grad(v.id())) return true;
    }
    return false;
}

inline void accumulate(Tape& t, Var v, const Matrix& g) {
    if (t.needs_grad(v.id())) t.grad(v.id()) += g;
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
    Tape& t = *a.tape();
    return t.push(a.value() * b.value(), detail::any_grad({a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix& g = t.grad(self);
        if (t.needs_grad(a.id())) t.grad(a.id()).noalias() += g * b.value().transpose();
        if (t.needs_grad(b.id())) t.grad(b.id()).noalias() += a.value().transpose() * g;
    });
}

// a * b^T
inline Var matmul_nt(Var a, Var b) {
    Tape& t = *a.tape();
    return t.push(a.value() * b.value().transpose(), detail::any_grad({a, b}),
                  [a, b](Tape& t, std::size_t self) {
                      const Matrix& g = t.grad(self);
                      if (t.needs_grad(a.id())) t.grad(a.id()).noalias() += g * b.value();
                      if (t.needs_grad(b.id())) t.grad(b.id()).noalias() += g.transpose() * a.value();
                  });
}

inline Var add(Var a, Var b) {
    Tape& t = *a.tape();
    return t.push(a.value() + b.value(), detail::any_grad({a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        detail::accumulate(t, a, g);
        detail::accumulate(t, b, g);
    });
}

inline Var sub(Var a, Var b) {
    Tape& t = *a.tape();
    return t.push(a.value() - b.value(), detail::any_grad({a, b}), [a, b](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        detail::accumulate(t, a, g);
        detail::accumulate(t, b, -g);
    });
}

// a + row broadcast over every row of a.
inline Var add_row(Var a, Var row) {
    Tape& t = *a.tape();
    Matrix out = a.value();
    out.rowwise() += row.value().row(0);
    return t.push(std::move(out), detail::any_grad({a, row}), [a, row](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        detail::accumulate(t, a, g);
        if (t.needs_grad(row.id())) t.grad(row.id()) += g.colwise().sum();
    });
}

inline Var scale(Var a, double s) {
    Tape& t = *a.tape();
    return t.push(a.value() * s, detail::any_grad({a}), [a, s](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self) * s;
        detail::accumulate(t, a, g);
    });
}

// tanh approximation of GELU.
inline Var gelu(Var a) {
    static constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
    static constexpr double k = 0.044715;
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    Matrix th = (c * (x.array() + k * x.array().cube())).tanh().matrix();
    Matrix out = (0.5 * x.array() * (1.0 + th.array())).matrix();
    return t.push(std::move(out), detail::any_grad({a}), [a, th = std::move(th)](Tape& t, std::size_t self) {
        const auto x = a.value().array();
        const auto d = 0.5 * (1.0 + th.array()) +
                       0.5 * x * (1.0 - th.array().square()) * c * (1.0 + 3.0 * k * x.square());
        const Matrix g = (t.grad(self).array() * d).matrix();
        detail::accumulate(t, a, g);
    });
}

// Row-wise layer normalisation with learned gain and bias (1 x d each).
inline Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5) {
    Tape& t = *x.tape();
    const Matrix& v = x.value();
    const long n = v.rows(), d = v.cols();
    Matrix xhat(n, d);
    Eigen::VectorXd inv(n);
    for (long i = 0; i < n; ++i) {
        const double mu = v.row(i).mean();
        const double var = (v.row(i).array() - mu).square().mean();
        inv[i] = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (v.row(i).array() - mu) * inv[i];
    }
    Matrix out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
    out.rowwise() += bias.value().row(0);
    return t.push(std::move(out), detail::any_grad({x, gain, bias}),
                  [x, gain, bias, xhat = std::move(xhat), inv](Tape& t, std::size_t self) {
                      const Matrix g = t.grad(self);
                      const long n = g.rows(), d = g.cols();
                      if (t.needs_grad(gain.id())) {
                          t.grad(gain.id()) += (g.array() * xhat.array()).colwise().sum().matrix();
                      }
                      if (t.needs_grad(bias.id())) t.grad(bias.id()) += g.colwise().sum();
                      if (t.needs_grad(x.id())) {
                          Matrix dx(n, d);
                          for (long i = 0; i < n; ++i) {
                              const Eigen::RowVectorXd dxh =
                                  (g.row(i).array() * gain.value().row(0).array()).matrix();
                              const double s1 = dxh.sum();
                              const double s2 = dxh.dot(xhat.row(i));
                              dx.row(i) = (inv[i] / static_cast<double>(d)) *
                                          (static_cast<double>(d) * dxh.array() - s1 -
                                           xhat.row(i).array() * s2)
                                              .matrix();
                          }
                          t.grad(x.id()) += dx;
                      }
                  });
}

// Row softmax. With causal set, entry (i, j) for j > i is exactly zero and
// does not take part in the normalisation.
inline Var softmax_rows(Var a, bool causal) {
    Tape& t = *a.tape();
    const Matrix& v = a.value();
    const long n = v.rows(), m = v.cols();
    Matrix out = Matrix::Zero(n, m);
    for (long i = 0; i < n; ++i) {
        const long width = causal ? std::min(m, i + 1) : m;
        const auto row = v.row(i).head(width);
        const double mx = row.maxCoeff();
        double sum = 0.0;
        for (long j = 0; j < width; ++j) {
            out(i, j) = std::exp(v(i, j) - mx);
            sum += out(i, j);
        }
        out.row(i).head(width) /= sum;
    }
    return t.push(std::move(out), detail::any_grad({a}), [a](Tape& t, std::size_t self) {
        const Matrix& y = t.value(self);
        const Matrix& g = t.grad(self);
        const Eigen::VectorXd dots = (g.array() * y.array()).rowwise().sum();
        Matrix dx = (y.array() * (g.array().colwise() - dots.array())).matrix();
        detail::accumulate(t, a, dx);
    });
}

inline Var slice_cols(Var a, long start, long count) {
    Tape& t = *a.tape();
    return t.push(a.value().middleCols(start, count), detail::any_grad({a}),
                  [a, start, count](Tape& t, std::size_t self) {
                      if (t.needs_grad(a.id())) t.grad(a.id()).middleCols(start, count) += t.grad(self);
                  });
}

inline Var concat_cols(const std::vector<Var>& parts) {
    Tape& t = *parts.front().tape();
    long cols = 0;
    bool need = false;
    for (const auto& p : parts) {
        cols += p.cols();
        need = need || t.needs_grad(p.id());
    }
    Matrix out(parts.front().rows(), cols);
    long c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p.value();
        c += p.cols();
    }
    return t.push(std::move(out), need, [parts](Tape& t, std::size_t self) {
        long c = 0;
        for (const auto& p : parts) {
            if (t.needs_grad(p.id())) t.grad(p.id()) += t.grad(self).middleCols(c, p.cols());
            c += p.cols();
        }
    });
}

inline Var concat_rows(const std::vector<Var>& parts) {
    Tape& t = *parts.front().tape();
    long rows = 0;
    bool need = false;
    for (const auto& p : parts) {
        rows += p.rows();
        need = need || t.needs_grad(p.id());
    }
    Matrix out(rows, parts.front().cols());
    long r = 0;
    for (const auto& p : parts) {
        out.middleRows(r, p.rows()) = p.value();
        r += p.rows();
    }
    return t.push(std::move(out), need, [parts](Tape& t, std::size_t self) {
        long r = 0;
        for (const auto& p : parts) {
            if (t.needs_grad(p.id())) t.grad(p.id()) += t.grad(self).middleRows(r, p.rows());
            r += p.rows();
        }
    });
}

// Embedding lookup: out.row(i) = table.row(index[i]).
inline Var gather_rows(Var table, std::vector<int> index) {
    Tape& t = *table.tape();
    Matrix out(static_cast<long>(index.size()), table.cols());
    for (std::size_t i = 0; i < index.size(); ++i) out.row(static_cast<long>(i)) = table.value().row(index[i]);
    return t.push(std::move(out), detail::any_grad({table}),
                  [table, index = std::move(index)](Tape& t, std::size_t self) {
                      Matrix& gt = t.grad(table.id());
                      const Matrix& g = t.grad(self);
                      for (std::size_t i = 0; i < index.size(); ++i) gt.row(index[i]) += g.row(static_cast<long>(i));
                  });
}

inline long pooled_length(long n, long factor) { return (n + factor - 1) / factor; }

// Causal downsampling: out[j] = mean(a[j*k - k + 1 .. j*k]) with rows before
// the start read as zero. out[j] therefore only sees inputs at index <= j*k.
inline Var shift_pool(Var a, long factor) {
    Tape& t = *a.tape();
    const long n = a.rows();
    const long m = pooled_length(n, factor);
    const double w = 1.0 / static_cast<double>(factor);
    Matrix out = Matrix::Zero(m, a.cols());
    for (long j = 0; j < m; ++j) {
        for (long s = 0; s < factor; ++s) {
            const long src = j * factor - s;
            if (src >= 0 && src < n) out.row(j) += w * a.value().row(src);
        }
    }
    return t.push(std::move(out), detail::any_grad({a}), [a, factor, w](Tape& t, std::size_t self) {
        if (!t.needs_grad(a.id())) return;
        const Matrix& g = t.grad(self);
        Matrix& ga = t.grad(a.id());
        const long n = ga.rows();
        for (long j = 0; j < g.rows(); ++j) {
            for (long s = 0; s < factor; ++s) {
                const long src = j * factor - s;
                if (src >= 0 && src < n) ga.row(src) += w * g.row(j);
            }
        }
    });
}

// Nearest-repeat upsampling to n rows: out[i] = a[i / factor].
inline Var repeat_rows(Var a, long factor, long n) {
    Tape& t = *a.tape();
    Matrix out(n, a.cols());
    for (long i = 0; i < n; ++i) out.row(i) = a.value().row(i / factor);
    return t.push(std::move(out), detail::any_grad({a}), [a, factor](Tape& t, std::size_t self) {
        if (!t.needs_grad(a.id())) return;
        const Matrix& g = t.grad(self);
        Matrix& ga = t.grad(a.id());
        for (long i = 0; i < g.rows(); ++i) ga.row(i / factor) += g.row(i);
    });
}

// sum_i log_softmax(logits.row(i))[targets[i]] over the first targets.size() rows.
inline Var sum_log_prob(Var logits, std::vector<int> targets) {
    Tape& t = *logits.tape();
    const Matrix& z = logits.value();
    const long n = static_cast<long>(targets.size());
    Eigen::VectorXd lse(n);
    double total = 0.0;
    for (long i = 0; i < n; ++i) {
        const double mx = z.row(i).maxCoeff();
        lse[i] = mx + std::log((z.row(i).array() - mx).exp().sum());
        total += z(i, targets[i]) - lse[i];
    }
    Matrix out(1, 1);
    out(0, 0) = total;
    return t.push(std::move(out), detail::any_grad({logits}),
                  [logits, targets = std::move(targets), lse](Tape& t, std::size_t self) {
                      const double g = t.grad(self)(0, 0);
                      const Matrix& z = logits.value();
                      Matrix& gz = t.grad(logits.id());
                      for (long i = 0; i < static_cast<long>(targets.size()); ++i) {
                          gz.row(i).array() -= g * (z.row(i).array() - lse[i]).exp();
                          gz(i, targets[i]) += g;
                      }
                  });
}

// -log(sigmoid(x)) for a 1x1 input, computed as softplus(-x).
inline double neg_log_sigmoid(double x) {
    return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline Var neg_log_sigmoid(Var a) {
    Tape& t = *a.tape();
    Matrix out(1, 1);
    out(0, 0) = neg_log_sigmoid(a.scalar());
    return t.push(std::move(out), detail::any_grad({a}), [a](Tape& t, std::size_t self) {
        Matrix g(1, 1);
        g(0, 0) = -t.grad(self)(0, 0) * sigmoid(-a.scalar());
        detail::accumulate(t, a, g);
    });
}

// Sum of 1x1 values.
inline Var sum_scalars(const std::vector<Var>& parts) {
    Tape& t = *parts.front().tape();
    Matrix out = Matrix::Zero(1, 1);
    bool need = false;
    for (const auto& p : parts) {
        out(0, 0) += p.scalar();
        need = need || t.needs_grad(p.id());
    }
    return t.push(std::move(out), need, [parts](Tape& t, std::size_t self) {
        const Matrix g = t.grad(self);
        for (const auto& p : parts) detail::accumulate(t, p, g);
    });
}

}  // namespace seamkit::ad
