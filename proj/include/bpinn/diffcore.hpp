#pragma once

// Scalar automatic differentiation used throughout the project:
//
//  - Var: reverse-mode scalar recorded on a Tape. Gradients of any scalar
//    loss with respect to all trainable parameters come from one backward
//    sweep.
//  - Jet2<T>: forward-mode 2-jet carrying (value, d/dx, d2/dx2, d/dt) with
//    respect to the two network inputs. T may be double (plain derivative
//    evaluation) or Var (derivatives of jet components with respect to
//    parameters, i.e. forward-over-reverse).
//
// Only the x second derivative is carried; the heat-diffusion residual needs
// nothing higher and no mixed terms.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bpinn/error.hpp"

namespace bpinn {

// ---------------------------------------------------------------------------
// Reverse-mode tape
// ---------------------------------------------------------------------------

enum class Op : std::uint8_t {
    leaf,
    add,
    sub,
    mul,
    div,
    neg,
    tanh_fn,
    exp_fn,
    log_fn,
    softplus_fn,
    abs_fn,
    sqrt_fn,
};

struct TapeNode {
    Op op = Op::leaf;
    std::uint8_t n_parents = 0;
    std::array<std::int32_t, 2> parent { -1, -1 };
    std::array<double, 2> partial { 0.0, 0.0 };
};

/// Single-writer record of elementary operations in topological order.
/// Independent tapes may be evaluated concurrently; nothing is shared.
class Tape {
  public:
    std::int32_t leaf()
    {
        nodes_.push_back(TapeNode {});
        return static_cast<std::int32_t>(nodes_.size()) - 1;
    }

    std::int32_t unary(Op op, std::int32_t p, double d)
    {
        TapeNode n;
        n.op = op;
        n.n_parents = 1;
        n.parent[0] = p;
        n.partial[0] = d;
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size()) - 1;
    }

    std::int32_t binary(Op op, std::int32_t p0, double d0, std::int32_t p1, double d1)
    {
        TapeNode n;
        n.op = op;
        n.n_parents = 2;
        n.parent[0] = p0;
        n.parent[1] = p1;
        n.partial[0] = d0;
        n.partial[1] = d1;
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size()) - 1;
    }

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }
    const TapeNode& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }

    /// Accumulates d(root)/d(node) for every node into `adjoint` (resized and
    /// zeroed here). Parents always precede children, so one reverse sweep
    /// suffices.
    void backward(std::int32_t root, std::vector<double>& adjoint) const
    {
        adjoint.assign(nodes_.size(), 0.0);
        if (root < 0 || static_cast<std::size_t>(root) >= nodes_.size())
            throw ValidationError("Tape::backward: root index out of range");
        adjoint[static_cast<std::size_t>(root)] = 1.0;
        for (std::int32_t i = root; i >= 0; --i) {
            const double a = adjoint[static_cast<std::size_t>(i)];
            if (a == 0.0) continue;
            const TapeNode& n = nodes_[static_cast<std::size_t>(i)];
            for (int p = 0; p < n.n_parents; ++p)
                adjoint[static_cast<std::size_t>(n.parent[p])] += n.partial[p] * a;
        }
    }

  private:
    std::vector<TapeNode> nodes_;
};

// ---------------------------------------------------------------------------
// Var: reverse-mode scalar
// ---------------------------------------------------------------------------

/// A value recorded on a tape. idx < 0 marks a constant (no node); the
/// implicit double constructor lets generic code mix literals freely.
struct Var {
    double v = 0.0;
    std::int32_t idx = -1;
    Tape* tape = nullptr;

    Var() = default;
    Var(double value) : v(value) {} // NOLINT: implicit by design
    Var(double value, std::int32_t i, Tape* t) : v(value), idx(i), tape(t) {}

    bool is_const() const { return idx < 0; }
};

inline Var make_leaf(Tape& tape, double value) { return Var(value, tape.leaf(), &tape); }

inline double value(double x) { return x; }
inline double value(const Var& x) { return x.v; }

namespace detail {

inline Tape* tape_of(const Var& a, const Var& b)
{
    assert(a.tape == nullptr || b.tape == nullptr || a.tape == b.tape);
    return a.tape != nullptr ? a.tape : b.tape;
}

} // namespace detail

inline Var operator+(const Var& a, const Var& b)
{
    Tape* t = detail::tape_of(a, b);
    const double v = a.v + b.v;
    if (a.is_const() && b.is_const()) return Var(v);
    if (a.is_const()) return Var(v, t->unary(Op::add, b.idx, 1.0), t);
    if (b.is_const()) return Var(v, t->unary(Op::add, a.idx, 1.0), t);
    return Var(v, t->binary(Op::add, a.idx, 1.0, b.idx, 1.0), t);
}

inline Var operator-(const Var& a, const Var& b)
{
    Tape* t = detail::tape_of(a, b);
    const double v = a.v - b.v;
    if (a.is_const() && b.is_const()) return Var(v);
    if (a.is_const()) return Var(v, t->unary(Op::sub, b.idx, -1.0), t);
    if (b.is_const()) return Var(v, t->unary(Op::sub, a.idx, 1.0), t);
    return Var(v, t->binary(Op::sub, a.idx, 1.0, b.idx, -1.0), t);
}

inline Var operator*(const Var& a, const Var& b)
{
    Tape* t = detail::tape_of(a, b);
    const double v = a.v * b.v;
    if (a.is_const() && b.is_const()) return Var(v);
    if (a.is_const()) return Var(v, t->unary(Op::mul, b.idx, a.v), t);
    if (b.is_const()) return Var(v, t->unary(Op::mul, a.idx, b.v), t);
    return Var(v, t->binary(Op::mul, a.idx, b.v, b.idx, a.v), t);
}

inline Var operator/(const Var& a, const Var& b)
{
    Tape* t = detail::tape_of(a, b);
    const double inv = 1.0 / b.v;
    const double v = a.v * inv;
    if (a.is_const() && b.is_const()) return Var(v);
    if (a.is_const()) return Var(v, t->unary(Op::div, b.idx, -v * inv), t);
    if (b.is_const()) return Var(v, t->unary(Op::div, a.idx, inv), t);
    return Var(v, t->binary(Op::div, a.idx, inv, b.idx, -v * inv), t);
}

inline Var operator-(const Var& a)
{
    if (a.is_const()) return Var(-a.v);
    return Var(-a.v, a.tape->unary(Op::neg, a.idx, -1.0), a.tape);
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var tanh(const Var& a)
{
    const double th = std::tanh(a.v);
    if (a.is_const()) return Var(th);
    return Var(th, a.tape->unary(Op::tanh_fn, a.idx, 1.0 - th * th), a.tape);
}

inline Var exp(const Var& a)
{
    const double e = std::exp(a.v);
    if (a.is_const()) return Var(e);
    return Var(e, a.tape->unary(Op::exp_fn, a.idx, e), a.tape);
}

inline Var log(const Var& a)
{
    const double l = std::log(a.v);
    if (a.is_const()) return Var(l);
    return Var(l, a.tape->unary(Op::log_fn, a.idx, 1.0 / a.v), a.tape);
}

inline Var sqrt(const Var& a)
{
    const double s = std::sqrt(a.v);
    if (a.is_const()) return Var(s);
    return Var(s, a.tape->unary(Op::sqrt_fn, a.idx, 0.5 / s), a.tape);
}

inline Var abs(const Var& a)
{
    const double s = a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0);
    if (a.is_const()) return Var(std::fabs(a.v));
    return Var(std::fabs(a.v), a.tape->unary(Op::abs_fn, a.idx, s), a.tape);
}

inline double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

/// softplus(x) = log(1 + e^x), evaluated overflow-free.
inline double softplus(double x) { return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x))); }

inline Var softplus(const Var& a)
{
    const double sp = softplus(a.v);
    if (a.is_const()) return Var(sp);
    return Var(sp, a.tape->unary(Op::softplus_fn, a.idx, sigmoid(a.v)), a.tape);
}

// ---------------------------------------------------------------------------
// Jet2: forward-mode 2-jet in (x, t)
// ---------------------------------------------------------------------------

template <typename T = double>
struct Jet2 {
    T v {};   // value
    T dx {};  // d/dx
    T dxx {}; // d2/dx2
    T dt {};  // d/dt

    Jet2() = default;
    explicit Jet2(const T& value) : v(value) {}
    Jet2(const T& v_, const T& dx_, const T& dxx_, const T& dt_) : v(v_), dx(dx_), dxx(dxx_), dt(dt_) {}

    /// Seeds for the two network inputs.
    static Jet2 input_x(const T& x) { return Jet2(x, T(1.0), T(0.0), T(0.0)); }
    static Jet2 input_t(const T& t) { return Jet2(t, T(0.0), T(0.0), T(1.0)); }
};

using Jet2d = Jet2<double>;

template <typename T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b)
{
    return Jet2<T>(a.v + b.v, a.dx + b.dx, a.dxx + b.dxx, a.dt + b.dt);
}

template <typename T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b)
{
    return Jet2<T>(a.v - b.v, a.dx - b.dx, a.dxx - b.dxx, a.dt - b.dt);
}

template <typename T>
Jet2<T> operator-(const Jet2<T>& a)
{
    return Jet2<T>(-a.v, -a.dx, -a.dxx, -a.dt);
}

/// Full second-order product rule; mixed dx*dt terms are not tracked.
template <typename T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b)
{
    return Jet2<T>(a.v * b.v,
                   a.dx * b.v + a.v * b.dx,
                   a.dxx * b.v + T(2.0) * (a.dx * b.dx) + a.v * b.dxx,
                   a.dt * b.v + a.v * b.dt);
}

template <typename T>
Jet2<T> operator+(const Jet2<T>& a, const T& s)
{
    return Jet2<T>(a.v + s, a.dx, a.dxx, a.dt);
}

template <typename T>
Jet2<T> operator+(const T& s, const Jet2<T>& a)
{
    return Jet2<T>(s + a.v, a.dx, a.dxx, a.dt);
}

template <typename T>
Jet2<T> operator-(const Jet2<T>& a, const T& s)
{
    return Jet2<T>(a.v - s, a.dx, a.dxx, a.dt);
}

template <typename T>
Jet2<T> operator-(const T& s, const Jet2<T>& a)
{
    return Jet2<T>(s - a.v, -a.dx, -a.dxx, -a.dt);
}

template <typename T>
Jet2<T> operator*(const Jet2<T>& a, const T& s)
{
    return Jet2<T>(a.v * s, a.dx * s, a.dxx * s, a.dt * s);
}

template <typename T>
Jet2<T> operator*(const T& s, const Jet2<T>& a)
{
    return a * s;
}

template <typename T>
Jet2<T> operator/(const Jet2<T>& a, const T& s)
{
    const T inv = T(1.0) / s;
    return a * inv;
}

namespace detail {

/// Chain rule for a scalar map g with first/second derivatives d1, d2.
template <typename T>
Jet2<T> jet_chain(const Jet2<T>& a, const T& g, const T& d1, const T& d2)
{
    return Jet2<T>(g, d1 * a.dx, d2 * (a.dx * a.dx) + d1 * a.dxx, d1 * a.dt);
}

} // namespace detail

template <typename T>
Jet2<T> tanh(const Jet2<T>& a)
{
    using std::tanh;
    const T th = tanh(a.v);
    const T d1 = T(1.0) - th * th;
    const T d2 = T(-2.0) * th * d1;
    return detail::jet_chain(a, th, d1, d2);
}

template <typename T>
Jet2<T> softplus(const Jet2<T>& a)
{
    const T sp = softplus(a.v);
    const T d1 = sigmoid(value(a.v)); // only reached with T = double
    const T d2 = d1 * (T(1.0) - d1);
    return detail::jet_chain(a, sp, d1, d2);
}

// ---------------------------------------------------------------------------
// Gradient driver and checker
// ---------------------------------------------------------------------------

struct GradResult {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Evaluates `loss` on a fresh set of leaves for `params` and returns the
/// value together with d(loss)/d(params). `loss` is any callable mapping
/// std::span<const Var> to Var. The tape is cleared first and may be reused
/// across calls to avoid reallocation.
template <typename F>
GradResult grad(F&& loss, const Eigen::VectorXd& params, Tape& tape)
{
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        if (!std::isfinite(params[i]))
            throw DivergenceError(detail::msg("grad: non-finite parameter at index ", i));
    }
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(static_cast<std::size_t>(params.size()));
    for (Eigen::Index i = 0; i < params.size(); ++i) leaves.push_back(make_leaf(tape, params[i]));

    const Var out = loss(std::span<const Var>(leaves));
    if (!std::isfinite(out.v)) throw DivergenceError("grad: loss evaluated to a non-finite value");

    GradResult res;
    res.value = out.v;
    res.gradient.resize(params.size());
    if (out.is_const()) {
        res.gradient.setZero();
        return res;
    }
    std::vector<double> adjoint;
    tape.backward(out.idx, adjoint);
    for (Eigen::Index i = 0; i < params.size(); ++i)
        res.gradient[i] = adjoint[static_cast<std::size_t>(leaves[static_cast<std::size_t>(i)].idx)];
    return res;
}

template <typename F>
GradResult grad(F&& loss, const Eigen::VectorXd& params)
{
    Tape tape;
    return grad(std::forward<F>(loss), params, tape);
}

/// Relative-error convention shared by the tests: the denominator floors at
/// 1e-6 so near-zero gradients compare absolutely.
inline double gradient_rel_err(double analytic, double numeric)
{
    const double denom = std::max({ std::fabs(analytic), std::fabs(numeric), 1e-6 });
    return std::fabs(analytic - numeric) / denom;
}

struct GradCheckCoord {
    int index = 0;
    double analytic = 0.0;
    double numeric = 0.0; // central difference
    double rel_err = 0.0;
    bool exceeds_tol = false;
    bool non_smooth = false; // forward and backward differences disagree
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    int worst_index = -1;
    int n_flagged = 0;
    int n_non_smooth = 0;
    bool all_passed = true;
    std::vector<GradCheckCoord> coords;
};

/// Compares the tape gradient against central finite differences, coordinate
/// by coordinate. `loss` must accept both std::span<const Var> and
/// std::span<const double> (write it as a generic lambda). Report-only: never
/// throws on mismatch.
template <typename F>
GradCheckReport check_gradient(F&& loss, const Eigen::VectorXd& params, double step, double tolerance)
{
    if (step <= 0.0) throw ValidationError("check_gradient: step must be positive");
    const GradResult g = grad(loss, params);

    auto eval = [&](const Eigen::VectorXd& p) -> double {
        return loss(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    };

    GradCheckReport report;
    report.coords.resize(static_cast<std::size_t>(params.size()));
    Eigen::VectorXd p = params;
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + step;
        const double fp = eval(p);
        p[i] = saved - step;
        const double fm = eval(p);
        p[i] = saved;
        const double f0 = g.value;

        GradCheckCoord& c = report.coords[static_cast<std::size_t>(i)];
        c.index = static_cast<int>(i);
        c.analytic = g.gradient[i];
        c.numeric = (fp - fm) / (2.0 * step);
        c.rel_err = gradient_rel_err(c.analytic, c.numeric);
        c.exceeds_tol = c.rel_err > tolerance;

        const double fwd = (fp - f0) / step;
        const double bwd = (f0 - fm) / step;
        c.non_smooth = std::fabs(fwd - bwd) > std::max(10.0 * step, 0.05 * (std::fabs(fwd) + std::fabs(bwd)));

        if (c.rel_err > report.max_rel_err) {
            report.max_rel_err = c.rel_err;
            report.worst_index = c.index;
        }
        report.n_flagged += c.exceeds_tol ? 1 : 0;
        report.n_non_smooth += c.non_smooth ? 1 : 0;
    }
    report.all_passed = report.n_flagged == 0;
    return report;
}

// ---------------------------------------------------------------------------
// Layer propagation over jets
// ---------------------------------------------------------------------------

enum class Activation { tanh, identity };

/// Pushes a list of input jets through one affine layer followed by the
/// activation. The value channel equals a plain forward pass bit for bit.
std::vector<Jet2d> propagate_jet(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                 std::span<const Jet2d> input, Activation activation, int layer_index = 0);

} // namespace bpinn
