#include "ccedit/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace ccedit::nn {

ad::Var ParamStore::create(const std::string& name, Tensor init) {
    if (params_.count(name)) throw std::logic_error("param already exists: " + name);
    ad::Var v(std::move(init), true);
    params_.emplace(name, v);
    frozen_[name] = false;
    return v;
}

ad::Var ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("no such param: " + name);
    return it->second;
}

bool ParamStore::has(const std::string& name) const { return params_.count(name) > 0; }

void ParamStore::set(const std::string& name, Tensor value) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("no such param: " + name);
    if (it->second.value().shape != value.shape)
        throw std::invalid_argument("param shape mismatch for " + name);
    it->second.value() = std::move(value);
}

void ParamStore::set_frozen(const std::string& name, bool frozen) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("no such param: " + name);
    frozen_[name] = frozen;
    it->second.node()->requires_grad = !frozen;
}

void ParamStore::freeze_prefix(const std::string& prefix, bool frozen) {
    for (auto& [name, var] : params_) {
        if (name.rfind(prefix, 0) == 0) {
            frozen_[name] = frozen;
            var.node()->requires_grad = !frozen;
        }
    }
}

bool ParamStore::frozen(const std::string& name) const {
    auto it = frozen_.find(name);
    if (it == frozen_.end()) throw std::out_of_range("no such param: " + name);
    return it->second;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [n, v] : params_) out.push_back(n);
    return out;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [n, v] : params_)
        if (n.rfind(prefix, 0) == 0) out.push_back(n);
    return out;
}

void ParamStore::zero_grad() {
    for (auto& [n, v] : params_) v.zero_grad();
}

int64_t ParamStore::total_parameters() const {
    int64_t total = 0;
    for (const auto& [n, v] : params_) total += v.value().size();
    return total;
}

void ParamStore::copy_prefix_from(const ParamStore& src, const std::string& prefix) {
    for (const auto& name : names_with_prefix(prefix)) {
        set(name, src.get(name).value());
    }
}

void Sgd::step(ParamStore& store) {
    for (const auto& name : store.names()) {
        if (store.frozen(name)) continue;
        ad::Var p = store.get(name);
        const Tensor& g = p.grad();
        if (g.shape != p.value().shape) continue;  // never touched by backward
        for (size_t i = 0; i < p.value().data.size(); ++i)
            p.value().data[i] -= lr * g.data[i];
    }
}

void Adam::step(ParamStore& store) {
    ++t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (const auto& name : store.names()) {
        if (store.frozen(name)) continue;
        ad::Var p = store.get(name);
        const Tensor& g = p.grad();
        if (g.shape != p.value().shape) continue;
        Tensor& mm = m.try_emplace(name, Tensor::zeros(p.value().shape)).first->second;
        Tensor& vv = v.try_emplace(name, Tensor::zeros(p.value().shape)).first->second;
        for (size_t i = 0; i < p.value().data.size(); ++i) {
            mm.data[i] = beta1 * mm.data[i] + (1.0 - beta1) * g.data[i];
            vv.data[i] = beta2 * vv.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
            double mhat = mm.data[i] / c1;
            double vhat = vv.data[i] / c2;
            p.value().data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

namespace {

Tensor he_init(std::vector<int> shape, int fan_in, Rng& rng) {
    double s = std::sqrt(2.0 / static_cast<double>(fan_in));
    Tensor t = rng.normal_tensor(std::move(shape));
    for (double& v : t.data) v *= s;
    return t;
}

}  // namespace

Linear Linear::create(ParamStore& ps, const std::string& name, int din, int dout, Rng& rng,
                      bool zero_init) {
    Linear l;
    l.w = ps.create(name + ".w",
                    zero_init ? Tensor::zeros({din, dout}) : he_init({din, dout}, din, rng));
    l.b = ps.create(name + ".b", Tensor::zeros({dout}));
    return l;
}

Linear Linear::bind(ParamStore& ps, const std::string& name) {
    return Linear{ps.get(name + ".w"), ps.get(name + ".b")};
}

Conv2d Conv2d::create(ParamStore& ps, const std::string& name, int cin, int cout, int k,
                      int stride, int pad, Rng& rng, bool zero_init) {
    Conv2d c;
    c.stride = stride;
    c.pad = pad;
    c.w = ps.create(name + ".w", zero_init ? Tensor::zeros({cout, cin, k, k})
                                           : he_init({cout, cin, k, k}, cin * k * k, rng));
    c.b = ps.create(name + ".b", Tensor::zeros({cout}));
    return c;
}

Conv2d Conv2d::bind(ParamStore& ps, const std::string& name, int stride, int pad) {
    return Conv2d{ps.get(name + ".w"), ps.get(name + ".b"), stride, pad};
}

Conv1dT Conv1dT::create(ParamStore& ps, const std::string& name, int cin, int cout, Rng& rng) {
    Conv1dT c;
    c.w = ps.create(name + ".w", he_init({cout, cin, 3}, cin * 3, rng));
    c.b = ps.create(name + ".b", Tensor::zeros({cout}));
    return c;
}

Conv1dT Conv1dT::bind(ParamStore& ps, const std::string& name) {
    return Conv1dT{ps.get(name + ".w"), ps.get(name + ".b")};
}

ChanNorm ChanNorm::create(ParamStore& ps, const std::string& name, int c) {
    ChanNorm n;
    n.g = ps.create(name + ".g", Tensor::full({c}, 1.0));
    n.b = ps.create(name + ".b", Tensor::zeros({c}));
    return n;
}

ChanNorm ChanNorm::bind(ParamStore& ps, const std::string& name) {
    return ChanNorm{ps.get(name + ".g"), ps.get(name + ".b")};
}

}  // namespace ccedit::nn
