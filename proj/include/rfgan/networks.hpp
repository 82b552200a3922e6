#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rfgan/checkpoint.hpp"
#include "rfgan/graph.hpp"
#include "rfgan/rng.hpp"
#include "rfgan/tensor.hpp"

namespace rfgan {

constexpr double kLeakySlope = 0.2;

using Activation = kernels::Act;

struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act = Activation::Linear;
};

// Declarative fully-connected stack. Widths must chain.
struct NetworkSpec {
    std::vector<LayerSpec> layers;

    std::size_t in_dim() const { return layers.front().in; }
    std::size_t out_dim() const { return layers.back().out; }

    void validate() const {
        require(!layers.empty(), "NetworkSpec: no layers");
        for (const auto& l : layers)
            require(l.in >= 1 && l.out >= 1, "NetworkSpec: layer widths must be >= 1");
        for (std::size_t i = 1; i < layers.size(); ++i)
            require(layers[i].in == layers[i - 1].out,
                    "NetworkSpec: layer widths do not chain at layer " + std::to_string(i));
    }
};

// Generator: relu hidden layers, linear output for 2-D points, tanh for images.
inline NetworkSpec make_generator_spec(std::size_t z_dim, const std::vector<std::size_t>& hidden,
                                       std::size_t out_dim, bool tanh_out) {
    require(!hidden.empty(), "generator spec: hidden layer list is empty");
    require(z_dim >= 1 && out_dim >= 1, "generator spec: widths must be >= 1");
    NetworkSpec s;
    std::size_t prev = z_dim;
    for (std::size_t h : hidden) {
        s.layers.push_back({prev, h, Activation::Relu});
        prev = h;
    }
    s.layers.push_back({prev, out_dim, tanh_out ? Activation::Tanh : Activation::Linear});
    s.validate();
    return s;
}

// Discriminator body: leaky-relu throughout, feature output of width d2.
inline NetworkSpec make_discriminator_body_spec(std::size_t in_dim,
                                                const std::vector<std::size_t>& hidden,
                                                std::size_t d2) {
    require(!hidden.empty(), "discriminator spec: hidden layer list is empty");
    NetworkSpec s;
    std::size_t prev = in_dim;
    for (std::size_t h : hidden) {
        s.layers.push_back({prev, h, Activation::LeakyRelu});
        prev = h;
    }
    s.layers.push_back({prev, d2, Activation::LeakyRelu});
    s.validate();
    return s;
}

// Encoder shares the discriminator body architecture; the code vector h1 is
// the post-activation output of width d1.
inline NetworkSpec make_encoder_spec(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                                     std::size_t d1) {
    return make_discriminator_body_spec(in_dim, hidden, d1);
}

// Decoder mirrors the generator body with code dimension d1 as input.
inline NetworkSpec make_decoder_spec(std::size_t d1, const std::vector<std::size_t>& hidden,
                                     std::size_t out_dim, bool tanh_out) {
    return make_generator_spec(d1, hidden, out_dim, tanh_out);
}

// Validated encoder/decoder pair; decoder input must equal the code dim.
inline std::pair<NetworkSpec, NetworkSpec> build_autoencoder(NetworkSpec enc_spec,
                                                             NetworkSpec dec_spec) {
    enc_spec.validate();
    dec_spec.validate();
    require(dec_spec.in_dim() == enc_spec.out_dim(),
            "build_autoencoder: decoder input dim " + std::to_string(dec_spec.in_dim()) +
                " != encoder code dim " + std::to_string(enc_spec.out_dim()));
    return {std::move(enc_spec), std::move(dec_spec)};
}

template <class T>
struct DenseLayer {
    ParamPtr<T> W; // [in, out]
    ParamPtr<T> b; // [out]
    Activation act = Activation::Linear;
};

// Trace of one application of an Mlp inside a graph; keeps the node ids
// needed to build the symbolic gradient of the output w.r.t. the input.
template <class T>
struct MlpTrace {
    struct Layer {
        typename Graph<T>::Id W = -1;
        typename Graph<T>::Id post = -1; // fused dense output
        Activation act = Activation::Linear;
    };
    typename Graph<T>::Id in = -1;
    typename Graph<T>::Id out = -1;
    std::vector<Layer> layers;
};

template <class T>
struct Mlp {
    std::vector<DenseLayer<T>> layers;

    std::size_t in_dim() const { return layers.front().W->value.rows(); }
    std::size_t out_dim() const { return layers.back().W->value.cols(); }
    std::size_t layer_count() const { return layers.size(); }

    static Mlp init(const NetworkSpec& spec, const std::string& prefix, Rng& rng) {
        spec.validate();
        Mlp net;
        for (std::size_t i = 0; i < spec.layers.size(); ++i) {
            const LayerSpec& ls = spec.layers[i];
            Tensor<T> w({ls.in, ls.out});
            const bool rectified = ls.act == Activation::Relu || ls.act == Activation::LeakyRelu;
            const double stddev =
                rectified ? std::sqrt(2.0 / double(ls.in)) : std::sqrt(1.0 / double(ls.in));
            rng.fill_gaussian(w.span(), 0.0, stddev);
            Tensor<T> b({ls.out});
            const std::string base = prefix + "." + std::to_string(i);
            DenseLayer<T> layer;
            layer.W = make_param<T>(base + ".W", std::move(w));
            layer.b = make_param<T>(base + ".b", std::move(b));
            layer.act = ls.act;
            net.layers.push_back(std::move(layer));
        }
        return net;
    }

    MlpTrace<T> apply(Graph<T>& g, typename Graph<T>::Id x) const {
        MlpTrace<T> tr;
        tr.in = x;
        typename Graph<T>::Id cur = x;
        for (const auto& l : layers) {
            typename MlpTrace<T>::Layer rec;
            rec.W = g.param(l.W);
            rec.act = l.act;
            rec.post = g.dense(cur, rec.W, g.param(l.b), l.act, T(kLeakySlope));
            cur = rec.post;
            tr.layers.push_back(rec);
        }
        tr.out = cur;
        return tr;
    }

    // Straight-line forward pass on plain tensors; used for evaluation,
    // checkpoint-driven generation, and diagnostics.
    Tensor<T> infer(const Tensor<T>& x) const {
        require(x.rank() == 2 && x.cols() == in_dim(),
                "Mlp::infer: input shape " + x.shape_str() + " does not match input dim " +
                    std::to_string(in_dim()));
        Tensor<T> cur = x;
        for (const auto& l : layers) {
            const std::size_t m = cur.rows(), k = cur.cols(), n = l.W->value.cols();
            Tensor<T> out({m, n});
            kernels::dense_fwd(cur.data(), l.W->value.data(), l.b->value.data(), out.data(), m,
                               k, n, l.act, T(kLeakySlope));
            cur = std::move(out);
        }
        return cur;
    }

    std::vector<ParamPtr<T>> params() const {
        std::vector<ParamPtr<T>> out;
        for (const auto& l : layers) {
            out.push_back(l.W);
            out.push_back(l.b);
        }
        return out;
    }

    void set_trainable(bool t) {
        for (auto& l : layers) {
            l.W->trainable = t;
            l.b->trainable = t;
        }
    }

};

// Appends nodes computing d(out)/d(input) for a traced Mlp application,
// seeded with d(head)/d(out) of shape [batch, out_dim]. Returns the node
// holding the per-sample input gradient [batch, in_dim]. Because the
// gradient is expressed in ordinary graph primitives, penalties built on it
// remain differentiable w.r.t. the network parameters. Rectifier gates are
// derived from the post-activation sign, which matches the pre-activation
// sign for (leaky) relu.
template <class T>
typename Graph<T>::Id append_input_gradient(Graph<T>& g, const MlpTrace<T>& tr,
                                            typename Graph<T>::Id seed) {
    typename Graph<T>::Id s = seed;
    for (auto it = tr.layers.rbegin(); it != tr.layers.rend(); ++it) {
        switch (it->act) {
            case Activation::Linear: break;
            case Activation::Relu: s = g.mul(s, g.leaky_relu_grad(it->post, T(0))); break;
            case Activation::LeakyRelu:
                s = g.mul(s, g.leaky_relu_grad(it->post, T(kLeakySlope)));
                break;
            case Activation::Sigmoid:
                s = g.mul(s, g.mul(it->post, g.rsub_scalar(T(1), it->post)));
                break;
            case Activation::Tanh:
                s = g.mul(s, g.rsub_scalar(T(1), g.square(it->post)));
                break;
        }
        s = g.matmul_tb(s, it->W);
    }
    return s;
}

// Fig.-1 style discriminator: a trainable body producing discriminative
// features h2, an optional frozen encoder producing representative features
// h1, and a linear head Y = sigma(h1*w1 + h2*w2 + b). Without an encoder it
// reduces to the plain discriminator.
template <class T>
struct RFDiscriminator {
    Mlp<T> body;
    std::optional<Mlp<T>> encoder; // frozen when present
    ParamPtr<T> w1;                // [d1, 1], null without encoder
    ParamPtr<T> w2;                // [d2, 1]
    ParamPtr<T> bias;              // [1]
    bool sigmoid_head = true;

    std::size_t d1() const { return encoder ? encoder->out_dim() : 0; }
    std::size_t d2() const { return body.out_dim(); }

    static RFDiscriminator init(const NetworkSpec& body_spec, std::optional<Mlp<T>> enc,
                                bool sigmoid_head, Rng& rng) {
        RFDiscriminator d;
        d.body = Mlp<T>::init(body_spec, "D", rng);
        d.sigmoid_head = sigmoid_head;
        std::size_t head_in = d.body.out_dim();
        if (enc) {
            require(enc->in_dim() == body_spec.in_dim(),
                    "RFDiscriminator: encoder input dim does not match body input dim");
            enc->set_trainable(false);
            d.encoder = std::move(enc);
            head_in += d.encoder->out_dim();
        }
        const double stddev = std::sqrt(1.0 / double(head_in));
        if (d.encoder) {
            Tensor<T> w1v({d.encoder->out_dim(), 1});
            rng.fill_gaussian(w1v.span(), 0.0, stddev);
            d.w1 = make_param<T>("head.w1", std::move(w1v));
        }
        Tensor<T> w2v({d.body.out_dim(), 1});
        rng.fill_gaussian(w2v.span(), 0.0, stddev);
        d.w2 = make_param<T>("head.w2", std::move(w2v));
        d.bias = make_param<T>("head.b", Tensor<T>({1}));
        return d;
    }

    struct Fwd {
        MlpTrace<T> body_tr;
        MlpTrace<T> enc_tr;     // empty when no encoder
        typename Graph<T>::Id w1 = -1;
        typename Graph<T>::Id w2 = -1;
        typename Graph<T>::Id h1 = -1;
        typename Graph<T>::Id h2 = -1;
        typename Graph<T>::Id logit = -1;
        typename Graph<T>::Id y = -1; // equals logit for a linear head
    };

    Fwd apply(Graph<T>& g, typename Graph<T>::Id x) const {
        Fwd f;
        f.body_tr = body.apply(g, x);
        f.h2 = f.body_tr.out;
        f.w2 = g.param(w2);
        typename Graph<T>::Id pre = g.matmul(f.h2, f.w2);
        if (encoder) {
            f.enc_tr = encoder->apply(g, x);
            f.h1 = f.enc_tr.out;
            f.w1 = g.param(w1);
            pre = g.add(pre, g.matmul(f.h1, f.w1));
        }
        f.logit = g.add_row(pre, g.param(bias));
        f.y = sigmoid_head ? g.sigmoid(f.logit) : f.logit;
        return f;
    }

    struct Out {
        Tensor<T> h1; // empty [0-size scalar] when no encoder
        Tensor<T> h2;
        Tensor<T> y;
    };

    Out infer(const Tensor<T>& x) const {
        require(x.rank() == 2 && x.cols() == body.in_dim(),
                "RFDiscriminator: input shape " + x.shape_str() + " does not match input dim");
        Out o;
        o.h2 = body.infer(x);
        const std::size_t m = x.rows();
        Tensor<T> pre({m, 1});
        kernels::matmul(o.h2.data(), w2->value.data(), pre.data(), m, o.h2.cols(), 1);
        if (encoder) {
            o.h1 = encoder->infer(x);
            Tensor<T> pre1({m, 1});
            kernels::matmul(o.h1.data(), w1->value.data(), pre1.data(), m, o.h1.cols(), 1);
            for (std::size_t i = 0; i < m; ++i) pre[i] = pre[i] + pre1[i];
        }
        o.y = Tensor<T>({m, 1});
        for (std::size_t i = 0; i < m; ++i) {
            const T logit = pre[i] + bias->value[0];
            o.y[i] = sigmoid_head ? kernels::sigmoid_scalar(logit) : logit;
        }
        return o;
    }

    // Per-sample gradient of the head output w.r.t. the discriminator input,
    // expressed as graph nodes; flows through both the body and the frozen
    // encoder path.
    typename Graph<T>::Id append_input_gradient_nodes(Graph<T>& g, const Fwd& f) const {
        const std::size_t m = g.value(f.logit).rows();
        typename Graph<T>::Id seed;
        if (sigmoid_head) {
            seed = g.mul(f.y, g.rsub_scalar(T(1), f.y)); // sigma'(logit)
        } else {
            seed = g.constant(Tensor<T>::filled({m, 1}, T(1)));
        }
        typename Graph<T>::Id gx = append_input_gradient(g, f.body_tr, g.matmul_tb(seed, f.w2));
        if (encoder)
            gx = g.add(gx, append_input_gradient(g, f.enc_tr, g.matmul_tb(seed, f.w1)));
        return gx;
    }

    // Trainable parameters: body + head. The frozen encoder is excluded.
    std::vector<ParamPtr<T>> trainable_params() const {
        std::vector<ParamPtr<T>> out = body.params();
        if (w1) out.push_back(w1);
        out.push_back(w2);
        out.push_back(bias);
        return out;
    }

    std::vector<ParamPtr<T>> all_params() const {
        std::vector<ParamPtr<T>> out = trainable_params();
        if (encoder)
            for (auto& p : encoder->params()) out.push_back(p);
        return out;
    }
};

// ---- checkpoint plumbing ------------------------------------------------

template <class T>
void append_params(NamedTensors& out, const std::vector<ParamPtr<T>>& params) {
    for (const auto& p : params)
        out.emplace_back(p->name, p->value.template cast<float>());
}

template <class T>
void load_params(const NamedTensors& in, const std::vector<ParamPtr<T>>& params) {
    for (const auto& p : params) {
        const TensorF& t = find_tensor(in, p->name);
        require(t.shape() == p->value.shape(),
                "checkpoint: shape mismatch for '" + p->name + "'");
        p->value = t.template cast<T>();
    }
}

// Rebuilds an Mlp (architecture from spec) with weights from a checkpoint.
template <class T>
Mlp<T> mlp_from_checkpoint(const NetworkSpec& spec, const std::string& prefix,
                           const NamedTensors& ckpt) {
    Rng dummy(0);
    Mlp<T> net = Mlp<T>::init(spec, prefix, dummy);
    load_params(ckpt, net.params());
    return net;
}

} // namespace rfgan
