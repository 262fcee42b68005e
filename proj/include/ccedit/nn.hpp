#pragma once

#include <map>
#include <string>
#include <vector>

#include "ccedit/autodiff.hpp"
#include "ccedit/tensor.hpp"

namespace ccedit::nn {

// Named parameter registry with per-tensor freeze flags. Frozen parameters
// drop out of gradient computation and are skipped by optimizers.
class ParamStore {
public:
    ad::Var create(const std::string& name, Tensor init);
    ad::Var get(const std::string& name) const;
    bool has(const std::string& name) const;
    void set(const std::string& name, Tensor value);  // overwrite in place

    void set_frozen(const std::string& name, bool frozen);
    void freeze_prefix(const std::string& prefix, bool frozen = true);
    bool frozen(const std::string& name) const;

    std::vector<std::string> names() const;
    std::vector<std::string> names_with_prefix(const std::string& prefix) const;

    void zero_grad();
    int64_t total_parameters() const;

    // Bitwise copy of every `prefix`-named tensor from another store.
    void copy_prefix_from(const ParamStore& src, const std::string& prefix);

private:
    std::map<std::string, ad::Var> params_;
    std::map<std::string, bool> frozen_;
};

// Plain fixed-lr stochastic gradient descent, the baseline optimizer.
struct Sgd {
    double lr = 1e-2;
    void step(ParamStore& store);
};

// Adam, selectable per training stage via TrainConfig.
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t t = 0;
    std::map<std::string, Tensor> m, v;
    void step(ParamStore& store);
};

// ---- layers ----

struct Linear {
    ad::Var w, b;
    static Linear create(ParamStore& ps, const std::string& name, int din, int dout, Rng& rng,
                         bool zero_init = false);
    static Linear bind(ParamStore& ps, const std::string& name);
    ad::Var operator()(const ad::Var& x) const { return ad::linear(x, w, b); }
};

struct Conv2d {
    ad::Var w, b;
    int stride = 1, pad = 1;
    static Conv2d create(ParamStore& ps, const std::string& name, int cin, int cout, int k,
                         int stride, int pad, Rng& rng, bool zero_init = false);
    static Conv2d bind(ParamStore& ps, const std::string& name, int stride, int pad);
    ad::Var operator()(const ad::Var& x) const { return ad::conv2d(x, w, b, stride, pad); }
};

struct Conv1dT {
    ad::Var w, b;  // kernel 3 over the frame axis
    static Conv1dT create(ParamStore& ps, const std::string& name, int cin, int cout, Rng& rng);
    static Conv1dT bind(ParamStore& ps, const std::string& name);
    ad::Var operator()(const ad::Var& x) const { return ad::conv1d_temporal(x, w, b); }
};

struct ChanNorm {
    ad::Var g, b;
    static ChanNorm create(ParamStore& ps, const std::string& name, int c);
    static ChanNorm bind(ParamStore& ps, const std::string& name);
    ad::Var operator()(const ad::Var& x) const { return ad::layernorm_channel(x, g, b); }
};

}  // namespace ccedit::nn
