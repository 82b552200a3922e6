#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rfgan/kernels.hpp"
#include "rfgan/tensor.hpp"

namespace rfgan {

// Trainable (or frozen) parameter shared across graphs. Gradients
// accumulate into grad; callers zero it between optimizer steps.
template <class T>
struct Param {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool trainable = true;

    Param(std::string n, Tensor<T> v, bool train = true)
        : name(std::move(n)), value(std::move(v)), grad(value.shape()), trainable(train) {}

    void zero_grad() { grad.fill(T(0)); }
};

template <class T>
using ParamPtr = std::shared_ptr<Param<T>>;

template <class T>
ParamPtr<T> make_param(std::string name, Tensor<T> value, bool trainable = true) {
    return std::make_shared<Param<T>>(std::move(name), std::move(value), trainable);
}

enum class OpKind : std::uint8_t {
    Input,
    ParamRef,
    Constant,
    Dense,       // act([m,k]x[k,n] + bias[n]) in one fused pass
    MatMul,      // [m,k]x[k,n]
    MatMulTB,    // [m,k] x [n,k]^T
    Add,
    AddRow,      // [m,n] + [n]
    Sub,
    Mul,
    Neg,
    AddScalar,
    MulScalar,
    RSubScalar,  // s - x
    Sigmoid,
    Tanh,
    Relu,
    LeakyRelu,
    LeakyReluGrad, // step-like derivative of leaky-relu; own derivative is zero a.e.
    Log,
    Square,
    Sqrt,
    Clamp,
    Mean,        // full reduction -> rank-0 scalar
    SumRows,     // [m,n] -> [m,1]
    ConcatCols,  // [m,a],[m,b] -> [m,a+b]
};

// Static expression DAG with preallocated value/grad storage. Built once,
// then forward()/backward() replay it; repeated execution allocates nothing.
// Node ids are topologically ordered by construction.
template <class T>
class Graph {
public:
    using Id = std::int32_t;

    // ---- construction -------------------------------------------------

    Id input(const std::string& name, std::vector<std::size_t> shape) {
        require(!input_ids_.contains(name), "Graph: duplicate input '" + name + "'");
        Id id = push(OpKind::Input, -1, -1, Tensor<T>(std::move(shape)));
        nodes_[id].label = name;
        input_ids_.emplace(name, id);
        return id;
    }

    Id param(const ParamPtr<T>& p) {
        require(p != nullptr, "Graph: null parameter");
        Id id = push(OpKind::ParamRef, -1, -1, Tensor<T>(p->value.shape()));
        nodes_[id].param = p;
        nodes_[id].label = p->name;
        params_.push_back(p);
        return id;
    }

    Id constant(Tensor<T> v) { return push(OpKind::Constant, -1, -1, std::move(v)); }

    Id matmul(Id a, Id b) {
        check_matrix(a), check_matrix(b);
        require(val_shape(a)[1] == val_shape(b)[0],
                "Graph: matmul inner dimensions differ: " + shape_str(a) + " x " + shape_str(b));
        return push(OpKind::MatMul, a, b, Tensor<T>({val_shape(a)[0], val_shape(b)[1]}));
    }

    // fused act(x*W + bias)
    Id dense(Id x, Id w, Id bias, kernels::Act act, T slope = T(0)) {
        check_matrix(x), check_matrix(w);
        require(val_shape(x)[1] == val_shape(w)[0],
                "Graph: dense inner dimensions differ: " + shape_str(x) + " x " + shape_str(w));
        require(val_shape(bias).size() == 1 && val_shape(bias)[0] == val_shape(w)[1],
                "Graph: dense bias shape mismatch");
        Id id = push(OpKind::Dense, x, w, Tensor<T>({val_shape(x)[0], val_shape(w)[1]}));
        nodes_[id].c = bias;
        nodes_[id].act = act;
        nodes_[id].s0 = slope;
        return id;
    }

    // a[m,k] x b[n,k]^T -> [m,n]
    Id matmul_tb(Id a, Id b) {
        check_matrix(a), check_matrix(b);
        require(val_shape(a)[1] == val_shape(b)[1],
                "Graph: matmul_tb inner dimensions differ: " + shape_str(a) + " x " + shape_str(b) + "^T");
        return push(OpKind::MatMulTB, a, b, Tensor<T>({val_shape(a)[0], val_shape(b)[0]}));
    }

    Id add(Id a, Id b) { return binary_same(OpKind::Add, a, b); }
    Id sub(Id a, Id b) { return binary_same(OpKind::Sub, a, b); }
    Id mul(Id a, Id b) { return binary_same(OpKind::Mul, a, b); }

    Id add_row(Id a, Id bias) {
        check_matrix(a);
        require(val_shape(bias).size() == 1 && val_shape(bias)[0] == val_shape(a)[1],
                "Graph: add_row bias shape mismatch");
        return push(OpKind::AddRow, a, bias, Tensor<T>(val_shape(a)));
    }

    Id neg(Id a) { return unary(OpKind::Neg, a); }
    Id add_scalar(Id a, T s) { return unary(OpKind::AddScalar, a, s); }
    Id mul_scalar(Id a, T s) { return unary(OpKind::MulScalar, a, s); }
    Id rsub_scalar(T s, Id a) { return unary(OpKind::RSubScalar, a, s); }

    Id sigmoid(Id a) { return unary(OpKind::Sigmoid, a); }
    Id tanh_(Id a) { return unary(OpKind::Tanh, a); }
    Id relu(Id a) { return unary(OpKind::Relu, a); }
    Id leaky_relu(Id a, T slope) { return unary(OpKind::LeakyRelu, a, slope); }
    Id leaky_relu_grad(Id a, T slope) { return unary(OpKind::LeakyReluGrad, a, slope); }
    Id log_(Id a) { return unary(OpKind::Log, a); }
    Id square(Id a) { return unary(OpKind::Square, a); }
    Id sqrt_(Id a) { return unary(OpKind::Sqrt, a); }

    Id clamp(Id a, T lo, T hi) {
        require(lo < hi, "Graph: clamp requires lo < hi");
        Id id = unary(OpKind::Clamp, a, lo);
        nodes_[id].s1 = hi;
        return id;
    }

    Id mean(Id a) { return push(OpKind::Mean, a, -1, Tensor<T>(std::vector<std::size_t>{})); }

    Id sum_rows(Id a) {
        check_matrix(a);
        return push(OpKind::SumRows, a, -1, Tensor<T>({val_shape(a)[0], 1}));
    }

    Id concat_cols(Id a, Id b) {
        check_matrix(a), check_matrix(b);
        require(val_shape(a)[0] == val_shape(b)[0], "Graph: concat_cols row counts differ");
        return push(OpKind::ConcatCols, a, b,
                    Tensor<T>({val_shape(a)[0], val_shape(a)[1] + val_shape(b)[1]}));
    }

    void mark_output(const std::string& name, Id id) {
        check_id(id);
        output_ids_[name] = id;
    }

    // ---- execution ----------------------------------------------------

    void set_input(const std::string& name, const Tensor<T>& v) {
        auto it = input_ids_.find(name);
        require(it != input_ids_.end(), "Graph: unknown input '" + name + "'");
        Node& n = nodes_[it->second];
        require(v.shape() == n.value.shape(),
                "Graph: input '" + name + "' expects shape " + n.value.shape_str() + ", got " + v.shape_str());
        n.value = v;
        n.input_set = true;
    }

    void forward() {
        for (Id id = 0; id < Id(nodes_.size()); ++id) {
            eval(nodes_[id]);
            if (debug_checks_ && !nodes_[id].value.all_finite())
                fail("Graph: non-finite value in node #" + std::to_string(id) + " (" +
                     describe(nodes_[id]) + ")");
        }
        ran_forward_ = true;
    }

    const Tensor<T>& value(Id id) const {
        check_id(id);
        return val(nodes_[id]);
    }

    const Tensor<T>& output(const std::string& name) const {
        auto it = output_ids_.find(name);
        require(it != output_ids_.end(), "Graph: unknown output '" + name + "'");
        return value(it->second);
    }

    // Plans the reverse pass: gradients will flow only toward the given
    // trainable parameters, everything else is pruned.
    void prepare_backward(Id loss, const std::vector<ParamPtr<T>>& wrt) {
        check_id(loss);
        require(nodes_[loss].value.size() == 1, "Graph: loss node is not scalar");
        loss_ = loss;
        std::unordered_set<const Param<T>*> wanted;
        for (const auto& p : wrt) {
            require(p && p->trainable, "Graph: prepare_backward expects trainable parameters");
            wanted.insert(p.get());
        }
        // requires_grad: reaches one of the wanted parameters
        for (Id id = 0; id < Id(nodes_.size()); ++id) {
            Node& n = nodes_[id];
            switch (n.op) {
                case OpKind::ParamRef: n.requires_grad = wanted.contains(n.param.get()); break;
                case OpKind::Input:
                case OpKind::Constant: n.requires_grad = false; break;
                default:
                    n.requires_grad = (n.a >= 0 && nodes_[n.a].requires_grad) ||
                                      (n.b >= 0 && nodes_[n.b].requires_grad) ||
                                      (n.c >= 0 && nodes_[n.c].requires_grad);
            }
        }
        // active: requires_grad and is an ancestor of the loss
        std::vector<char> reach(nodes_.size(), 0);
        reach[loss] = 1;
        for (Id id = loss; id >= 0; --id) {
            if (!reach[id]) continue;
            const Node& n = nodes_[id];
            if (n.a >= 0) reach[n.a] = 1;
            if (n.b >= 0) reach[n.b] = 1;
            if (n.c >= 0) reach[n.c] = 1;
        }
        for (Id id = 0; id < Id(nodes_.size()); ++id) {
            Node& n = nodes_[id];
            n.active = reach[id] && n.requires_grad;
            if (n.active && n.grad.shape() != val(n).shape()) n.grad = Tensor<T>(val(n).shape());
        }
        // a loss disconnected from every requested parameter simply yields
        // zero gradients
        backward_ready_ = true;
    }

    // Accumulates into Param::grad for the parameters given to
    // prepare_backward; frozen parameters receive nothing.
    void backward() {
        require(backward_ready_, "Graph: backward before prepare_backward");
        require(ran_forward_, "Graph: backward before forward");
        for (Node& n : nodes_)
            if (n.active) n.grad.fill(T(0));
        nodes_[loss_].grad[0] = T(1);
        for (Id id = loss_; id >= 0; --id) {
            Node& n = nodes_[id];
            if (!n.active) continue;
            pull(n);
        }
        for (Node& n : nodes_)
            if (n.op == OpKind::ParamRef && n.active)
                kernels::acc_add(n.param->grad.data(), n.grad.data(), n.grad.size());
    }

    void set_debug_checks(bool on) { debug_checks_ = on; }

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        OpKind op;
        Id a = -1, b = -1, c = -1;
        T s0 = T(0), s1 = T(0);
        kernels::Act act = kernels::Act::Linear;
        ParamPtr<T> param;
        std::string label;
        Tensor<T> value;
        Tensor<T> grad;
        Tensor<T> scratch;  // transpose cache / dense pre-activation gradient
        Tensor<T> scratch2; // second transpose cache for dense backward
        bool requires_grad = false;
        bool active = false;
        bool input_set = false;
    };

    Id push(OpKind op, Id a, Id b, Tensor<T> value) {
        if (a >= 0) check_id(a);
        if (b >= 0) check_id(b);
        Node n;
        n.op = op;
        n.a = a;
        n.b = b;
        n.value = std::move(value);
        nodes_.push_back(std::move(n));
        return Id(nodes_.size() - 1);
    }

    Id unary(OpKind op, Id a, T s = T(0)) {
        check_id(a);
        Id id = push(op, a, -1, Tensor<T>(val_shape(a)));
        nodes_[id].s0 = s;
        return id;
    }

    Id binary_same(OpKind op, Id a, Id b) {
        check_id(a), check_id(b);
        require(val_shape(a) == val_shape(b), "Graph: elementwise shapes differ: " + shape_str(a) +
                                                  " vs " + shape_str(b));
        return push(op, a, b, Tensor<T>(val_shape(a)));
    }

    void check_id(Id id) const {
        require(id >= 0 && id < Id(nodes_.size()), "Graph: invalid node id");
    }
    void check_matrix(Id id) const {
        require(val_shape(id).size() == 2, "Graph: expected a matrix node, got " + shape_str(id));
    }
    const std::vector<std::size_t>& val_shape(Id id) const { return val(nodes_[id]).shape(); }
    std::string shape_str(Id id) const { return val(nodes_[id]).shape_str(); }

    static const Tensor<T>& val(const Node& n) {
        return n.op == OpKind::ParamRef ? n.param->value : n.value;
    }
    static Tensor<T>& mut(Node& n) { return n.value; }

    std::string describe(const Node& n) const {
        return n.label.empty() ? std::string("op ") + std::to_string(int(n.op)) : n.label;
    }

    void eval(Node& n) {
        const Tensor<T>* A = n.a >= 0 ? &val(nodes_[n.a]) : nullptr;
        const Tensor<T>* B = n.b >= 0 ? &val(nodes_[n.b]) : nullptr;
        Tensor<T>& out = mut(n);
        switch (n.op) {
            case OpKind::Input:
                require(n.input_set, "Graph: input '" + n.label + "' not set");
                break;
            case OpKind::ParamRef:
            case OpKind::Constant: break;
            case OpKind::Dense: {
                const Tensor<T>& bias = val(nodes_[n.c]);
                kernels::dense_fwd(A->data(), B->data(), bias.data(), out.data(), A->rows(),
                                   A->cols(), B->cols(), n.act, n.s0);
                break;
            }
            case OpKind::MatMul:
                kernels::matmul(A->data(), B->data(), out.data(), A->rows(), A->cols(), B->cols());
                break;
            case OpKind::MatMulTB: {
                // out = A * B^T via a transposed copy of B
                if (n.scratch.shape() != std::vector<std::size_t>{B->cols(), B->rows()})
                    n.scratch = Tensor<T>({B->cols(), B->rows()});
                kernels::transpose(B->data(), n.scratch.data(), B->rows(), B->cols());
                kernels::matmul(A->data(), n.scratch.data(), out.data(), A->rows(), A->cols(),
                                n.scratch.cols());
                break;
            }
            case OpKind::Add:
                kernels::zip(A->data(), B->data(), out.data(), out.size(),
                             [](T x, T y) { return x + y; });
                break;
            case OpKind::AddRow:
                kernels::add_bias_rows(A->data(), B->data(), out.data(), A->rows(), A->cols());
                break;
            case OpKind::Sub:
                kernels::zip(A->data(), B->data(), out.data(), out.size(),
                             [](T x, T y) { return x - y; });
                break;
            case OpKind::Mul:
                kernels::zip(A->data(), B->data(), out.data(), out.size(),
                             [](T x, T y) { return x * y; });
                break;
            case OpKind::Neg:
                kernels::map(A->data(), out.data(), out.size(), [](T x) { return -x; });
                break;
            case OpKind::AddScalar: {
                const T s = n.s0;
                kernels::map(A->data(), out.data(), out.size(), [s](T x) { return x + s; });
                break;
            }
            case OpKind::MulScalar: {
                const T s = n.s0;
                kernels::map(A->data(), out.data(), out.size(), [s](T x) { return x * s; });
                break;
            }
            case OpKind::RSubScalar: {
                const T s = n.s0;
                kernels::map(A->data(), out.data(), out.size(), [s](T x) { return s - x; });
                break;
            }
            case OpKind::Sigmoid:
                kernels::sigmoid_fwd(A->data(), out.data(), out.size());
                break;
            case OpKind::Tanh:
                kernels::tanh_fwd(A->data(), out.data(), out.size());
                break;
            case OpKind::Relu:
                kernels::relu_fwd(A->data(), out.data(), out.size());
                break;
            case OpKind::LeakyRelu:
                kernels::leaky_relu_fwd(A->data(), out.data(), out.size(), n.s0);
                break;
            case OpKind::LeakyReluGrad: {
                const T s = n.s0;
                kernels::map(A->data(), out.data(), out.size(),
                             [s](T x) { return x > T(0) ? T(1) : s; });
                break;
            }
            case OpKind::Log:
                kernels::map(A->data(), out.data(), out.size(), [](T x) { return std::log(x); });
                break;
            case OpKind::Square:
                kernels::map(A->data(), out.data(), out.size(), [](T x) { return x * x; });
                break;
            case OpKind::Sqrt:
                kernels::map(A->data(), out.data(), out.size(), [](T x) { return std::sqrt(x); });
                break;
            case OpKind::Clamp: {
                const T lo = n.s0, hi = n.s1;
                kernels::map(A->data(), out.data(), out.size(),
                             [lo, hi](T x) { return kernels::clamp_scalar(x, lo, hi); });
                break;
            }
            case OpKind::Mean:
                out[0] = kernels::sum(A->data(), A->size()) / T(A->size());
                break;
            case OpKind::SumRows: {
                const std::size_t m = A->rows(), c = A->cols();
                for (std::size_t i = 0; i < m; ++i)
                    out[i] = kernels::sum(A->data() + i * c, c);
                break;
            }
            case OpKind::ConcatCols: {
                const std::size_t m = A->rows(), ca = A->cols(), cb = B->cols();
                for (std::size_t i = 0; i < m; ++i) {
                    T* dst = out.data() + i * (ca + cb);
                    const T* sa = A->data() + i * ca;
                    const T* sb = B->data() + i * cb;
                    for (std::size_t j = 0; j < ca; ++j) dst[j] = sa[j];
                    for (std::size_t j = 0; j < cb; ++j) dst[ca + j] = sb[j];
                }
                break;
            }
        }
    }

    bool act(Id id) const { return id >= 0 && nodes_[id].active; }
    Tensor<T>& grad_of(Id id) { return nodes_[id].grad; }

    // Propagates n.grad into n's inputs (accumulating).
    void pull(Node& n) {
        const Tensor<T>* A = n.a >= 0 ? &val(nodes_[n.a]) : nullptr;
        const Tensor<T>* B = n.b >= 0 ? &val(nodes_[n.b]) : nullptr;
        const Tensor<T>& g = n.grad;
        switch (n.op) {
            case OpKind::Input:
            case OpKind::ParamRef:
            case OpKind::Constant: break;
            case OpKind::Dense: {
                // dpre = dout * act'(post)
                if (n.scratch.shape() != n.value.shape()) n.scratch = Tensor<T>(n.value.shape());
                kernels::dense_act_bwd(g.data(), n.value.data(), n.scratch.data(), g.size(),
                                       n.act, n.s0);
                const Tensor<T>& dpre = n.scratch;
                if (act(n.a)) {
                    // dx += dpre * W^T
                    if (n.scratch2.shape() != std::vector<std::size_t>{B->cols(), B->rows()})
                        n.scratch2 = Tensor<T>({B->cols(), B->rows()});
                    kernels::transpose(B->data(), n.scratch2.data(), B->rows(), B->cols());
                    kernels::matmul(dpre.data(), n.scratch2.data(), grad_of(n.a).data(),
                                    dpre.rows(), dpre.cols(), n.scratch2.cols(), /*acc=*/true);
                }
                if (act(n.b))
                    // dW += x^T * dpre
                    kernels::matmul_ta(A->data(), dpre.data(), grad_of(n.b).data(), A->rows(),
                                       A->cols(), dpre.cols(), /*acc=*/true);
                if (act(n.c))
                    kernels::col_sum(dpre.data(), grad_of(n.c).data(), dpre.rows(), dpre.cols(),
                                     /*acc=*/true);
                break;
            }
            case OpKind::MatMul: {
                if (act(n.a)) {
                    // dA += g * B^T
                    if (n.scratch.shape() != std::vector<std::size_t>{B->cols(), B->rows()})
                        n.scratch = Tensor<T>({B->cols(), B->rows()});
                    kernels::transpose(B->data(), n.scratch.data(), B->rows(), B->cols());
                    kernels::matmul(g.data(), n.scratch.data(), grad_of(n.a).data(), g.rows(),
                                    g.cols(), n.scratch.cols(), /*acc=*/true);
                }
                if (act(n.b))
                    // dB += A^T * g
                    kernels::matmul_ta(A->data(), g.data(), grad_of(n.b).data(), A->rows(),
                                       A->cols(), g.cols(), /*acc=*/true);
                break;
            }
            case OpKind::MatMulTB: {
                if (act(n.a))
                    // dA += g * B
                    kernels::matmul(g.data(), B->data(), grad_of(n.a).data(), g.rows(), g.cols(),
                                    B->cols(), /*acc=*/true);
                if (act(n.b))
                    // dB += g^T * A
                    kernels::matmul_ta(g.data(), A->data(), grad_of(n.b).data(), g.rows(),
                                       g.cols(), A->cols(), /*acc=*/true);
                break;
            }
            case OpKind::Add:
                if (act(n.a)) kernels::acc_add(grad_of(n.a).data(), g.data(), g.size());
                if (act(n.b)) kernels::acc_add(grad_of(n.b).data(), g.data(), g.size());
                break;
            case OpKind::AddRow:
                if (act(n.a)) kernels::acc_add(grad_of(n.a).data(), g.data(), g.size());
                if (act(n.b)) kernels::col_sum(g.data(), grad_of(n.b).data(), g.rows(), g.cols(),
                                               /*acc=*/true);
                break;
            case OpKind::Sub:
                if (act(n.a)) kernels::acc_add(grad_of(n.a).data(), g.data(), g.size());
                if (act(n.b)) kernels::acc_sub(grad_of(n.b).data(), g.data(), g.size());
                break;
            case OpKind::Mul:
                if (act(n.a)) kernels::acc_mul(grad_of(n.a).data(), g.data(), B->data(), g.size());
                if (act(n.b)) kernels::acc_mul(grad_of(n.b).data(), g.data(), A->data(), g.size());
                break;
            case OpKind::Neg:
                if (act(n.a)) kernels::acc_sub(grad_of(n.a).data(), g.data(), g.size());
                break;
            case OpKind::AddScalar:
                if (act(n.a)) kernels::acc_add(grad_of(n.a).data(), g.data(), g.size());
                break;
            case OpKind::MulScalar:
                if (act(n.a)) kernels::acc_scaled(grad_of(n.a).data(), g.data(), n.s0, g.size());
                break;
            case OpKind::RSubScalar:
                if (act(n.a)) kernels::acc_sub(grad_of(n.a).data(), g.data(), g.size());
                break;
            case OpKind::Sigmoid:
                if (act(n.a))
                    kernels::acc_sigmoid_bwd(grad_of(n.a).data(), g.data(), n.value.data(),
                                             g.size());
                break;
            case OpKind::Tanh:
                if (act(n.a))
                    kernels::acc_tanh_bwd(grad_of(n.a).data(), g.data(), n.value.data(), g.size());
                break;
            case OpKind::Relu:
                if (act(n.a))
                    kernels::acc_relu_bwd(grad_of(n.a).data(), g.data(), A->data(), g.size());
                break;
            case OpKind::LeakyRelu:
                if (act(n.a))
                    kernels::acc_leaky_relu_bwd(grad_of(n.a).data(), g.data(), A->data(), g.size(),
                                                n.s0);
                break;
            case OpKind::LeakyReluGrad:
                break; // derivative zero almost everywhere
            case OpKind::Log:
                if (act(n.a))
                    kernels::acc_log_bwd(grad_of(n.a).data(), g.data(), A->data(), g.size());
                break;
            case OpKind::Square:
                if (act(n.a))
                    kernels::acc_square_bwd(grad_of(n.a).data(), g.data(), A->data(), g.size());
                break;
            case OpKind::Sqrt:
                if (act(n.a))
                    kernels::acc_sqrt_bwd(grad_of(n.a).data(), g.data(), n.value.data(), g.size());
                break;
            case OpKind::Clamp:
                if (act(n.a))
                    kernels::acc_clamp_bwd(grad_of(n.a).data(), g.data(), A->data(), g.size(),
                                           n.s0, n.s1);
                break;
            case OpKind::Mean:
                if (act(n.a)) {
                    Tensor<T>& ga = grad_of(n.a);
                    kernels::acc_fill(ga.data(), g[0] / T(ga.size()), ga.size());
                }
                break;
            case OpKind::SumRows:
                if (act(n.a)) {
                    Tensor<T>& ga = grad_of(n.a);
                    const std::size_t m = ga.rows(), c = ga.cols();
                    for (std::size_t i = 0; i < m; ++i) {
                        const T gv = g[i];
                        T* gr = ga.data() + i * c;
                        for (std::size_t j = 0; j < c; ++j) gr[j] += gv;
                    }
                }
                break;
            case OpKind::ConcatCols: {
                const std::size_t m = g.rows();
                const std::size_t ca = A->cols(), cb = B->cols();
                if (act(n.a)) {
                    Tensor<T>& ga = grad_of(n.a);
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < ca; ++j)
                            ga.data()[i * ca + j] += g.data()[i * (ca + cb) + j];
                }
                if (act(n.b)) {
                    Tensor<T>& gb = grad_of(n.b);
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < cb; ++j)
                            gb.data()[i * cb + j] += g.data()[i * (ca + cb) + ca + j];
                }
                break;
            }
        }
    }

    std::vector<Node> nodes_;
    std::unordered_map<std::string, Id> input_ids_;
    std::unordered_map<std::string, Id> output_ids_;
    std::vector<ParamPtr<T>> params_;
    Id loss_ = -1;
    bool backward_ready_ = false;
    bool ran_forward_ = false;
#ifdef NDEBUG
    bool debug_checks_ = false;
#else
    bool debug_checks_ = true;
#endif
};

} // namespace rfgan
