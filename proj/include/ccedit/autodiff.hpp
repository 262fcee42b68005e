#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ccedit/tensor.hpp"

namespace ccedit::ad {

// Reverse-mode tape. A Var wraps a node of the dynamically built graph;
// parameters are long-lived Vars whose grads accumulate across backward().
struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily, same shape as value
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
    bool requires_grad = false;
    bool visited = false;  // scratch for topo sort

    Tensor& ensure_grad() {
        if (grad.shape != value.shape) grad = Tensor::zeros(value.shape);
        return grad;
    }
};

class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    const Tensor& value() const { return node_->value; }
    Tensor& value() { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool defined() const { return static_cast<bool>(node_); }
    std::shared_ptr<Node> node() const { return node_; }

    void zero_grad() { if (node_) node_->grad = Tensor(); }

    // Runs backward from this (scalar) node, accumulating into leaf grads.
    void backward() const;

    static Var from_node(std::shared_ptr<Node> n) {
        Var v;
        v.node_ = std::move(n);
        return v;
    }

private:
    std::shared_ptr<Node> node_;
};

Var constant(Tensor t);

// ---- elementwise / algebra ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scaled(const Var& a, const Var& b, double s);  // a + s*b
Var silu(const Var& a);
Var clamp(const Var& a, double lo, double hi);

// ---- reductions / losses ----
Var sum(const Var& a);
Var mse_loss(const Var& pred, const Tensor& target);  // mean over all elements

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);                       // [n,m]x[m,k]
Var linear(const Var& x, const Var& w, const Var& b);         // x[n,din] w[din,dout] b[dout]
Var softmax_rows(const Var& a);                               // softmax over last axis of [n,m]

// Scaled-dot-product attention over `groups` independent blocks.
// q: [groups*nq, d]; k,v: [groups*nk, d] (or [nk, d] when shared_kv,
// the same keys/values serving every group).
Var attention(const Var& q, const Var& k, const Var& v, int groups, bool shared_kv = false);

// ---- embeddings ----
Var embedding_rows(const Var& table, const std::vector<int>& ids);  // table[v,d] -> [n,d]

// ---- convolution / feature-map ops on (l, c, h, w) ----
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var conv1d_temporal(const Var& x, const Var& w, const Var& b);  // kernel 3, zero pad, over l
Var upsample_nearest2x(const Var& x);
Var layernorm_channel(const Var& x, const Var& gamma, const Var& beta);  // normalize over c
Var add_channel_bias(const Var& x, const Var& bias);                     // bias[c] broadcast
Var mul_channel(const Var& x, const Var& s);                             // x * s[c] broadcast
Var add_at_frame(const Var& x, const Var& y, int frame, double s);       // x[f] += s*y, y is [1,c,h,w]

Var reshape(const Var& a, std::vector<int> shape);  // same element count/order

// ---- layout permutations ----
Var frames_to_tokens(const Var& x);                      // [l,c,h,w] -> [l*h*w, c], frame-major
Var tokens_to_frames(const Var& t, int l, int h, int w); // inverse
Var positions_to_tokens(const Var& x);                   // [l,c,h,w] -> [h*w*l, c], position-major
Var tokens_to_positions(const Var& t, int l, int h, int w);

}  // namespace ccedit::ad
