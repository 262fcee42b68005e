#include "ccedit/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace ccedit::ad {

namespace {

std::shared_ptr<Node> make_node(Tensor value, std::vector<Var> parents,
                                std::function<void(Node&)> bw) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const auto& p : parents)
        if (p.requires_grad()) n->requires_grad = true;
    if (n->requires_grad) {
        for (const auto& p : parents) n->parents.push_back(p.node());
        n->backward_fn = std::move(bw);
    }
    return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    a.value().shape_str() + " vs " + b.value().shape_str());
}

void accum(std::shared_ptr<Node>& n, const Tensor& g) {
    if (!n->requires_grad) return;
    Tensor& dst = n->ensure_grad();
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
}

}  // namespace

Var::Var(Tensor value, bool requires_grad) {
    node_ = std::make_shared<Node>();
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

void Var::backward() const {
    if (!node_) throw std::logic_error("backward on empty Var");
    // Iterative topological sort.
    std::vector<Node*> order;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    node_->visited = true;
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx++].get();
            if (!p->visited) {
                p->visited = true;
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    Tensor& seed = node_->ensure_grad();
    std::fill(seed.data.begin(), seed.data.end(), 1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        n->visited = false;
        if (n->backward_fn && n->requires_grad && n->grad.shape == n->value.shape)
            n->backward_fn(*n);
    }
}

Var constant(Tensor t) { return Var(std::move(t), false); }

// ---------------------------------------------------------------- elementwise

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor out = a.value() + b.value();
    return Var::from_node(make_node(std::move(out), {a, b}, [](Node& n) {
        accum(n.parents[0], n.grad);
        accum(n.parents[1], n.grad);
    }));
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a.value() - b.value();
    return Var::from_node(make_node(std::move(out), {a, b}, [](Node& n) {
        accum(n.parents[0], n.grad);
        if (n.parents[1]->requires_grad) {
            Tensor& dst = n.parents[1]->ensure_grad();
            for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] -= n.grad.data[i];
        }
    }));
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a.value();
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.value().data[i];
    return Var::from_node(make_node(std::move(out), {a, b}, [](Node& n) {
        const Tensor& av = n.parents[0]->value;
        const Tensor& bv = n.parents[1]->value;
        if (n.parents[0]->requires_grad) {
            Tensor& da = n.parents[0]->ensure_grad();
            for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += n.grad.data[i] * bv.data[i];
        }
        if (n.parents[1]->requires_grad) {
            Tensor& db = n.parents[1]->ensure_grad();
            for (size_t i = 0; i < db.data.size(); ++i) db.data[i] += n.grad.data[i] * av.data[i];
        }
    }));
}

Var scale(const Var& a, double s) {
    Tensor out = s * a.value();
    return Var::from_node(make_node(std::move(out), {a}, [s](Node& n) {
        if (n.parents[0]->requires_grad) {
            Tensor& da = n.parents[0]->ensure_grad();
            for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += s * n.grad.data[i];
        }
    }));
}

Var add_scaled(const Var& a, const Var& b, double s) {
    check_same_shape(a, b, "add_scaled");
    Tensor out = a.value();
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += s * b.value().data[i];
    return Var::from_node(make_node(std::move(out), {a, b}, [s](Node& n) {
        accum(n.parents[0], n.grad);
        if (n.parents[1]->requires_grad) {
            Tensor& db = n.parents[1]->ensure_grad();
            for (size_t i = 0; i < db.data.size(); ++i) db.data[i] += s * n.grad.data[i];
        }
    }));
}

Var silu(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data) v = v / (1.0 + std::exp(-v));
    return Var::from_node(make_node(std::move(out), {a}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        const Tensor& x = n.parents[0]->value;
        Tensor& dx = n.parents[0]->ensure_grad();
        for (size_t i = 0; i < x.data.size(); ++i) {
            double sig = 1.0 / (1.0 + std::exp(-x.data[i]));
            dx.data[i] += n.grad.data[i] * (sig + x.data[i] * sig * (1.0 - sig));
        }
    }));
}

Var clamp(const Var& a, double lo, double hi) {
    Tensor out = a.value();
    for (double& v : out.data) v = std::min(hi, std::max(lo, v));
    return Var::from_node(make_node(std::move(out), {a}, [lo, hi](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        const Tensor& x = n.parents[0]->value;
        Tensor& dx = n.parents[0]->ensure_grad();
        for (size_t i = 0; i < x.data.size(); ++i)
            if (x.data[i] > lo && x.data[i] < hi) dx.data[i] += n.grad.data[i];
    }));
}

// ---------------------------------------------------------------- reductions

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data) s += v;
    Tensor out({1});
    out.data[0] = s;
    return Var::from_node(make_node(std::move(out), {a}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& da = n.parents[0]->ensure_grad();
        for (double& v : da.data) v += n.grad.data[0];
    }));
}

Var mse_loss(const Var& pred, const Tensor& target) {
    if (pred.value().shape != target.shape)
        throw std::invalid_argument("mse_loss: shape mismatch " + pred.value().shape_str() +
                                    " vs " + Tensor(target).shape_str());
    const auto& p = pred.value().data;
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double d = p[i] - target.data[i];
        acc += d * d;
    }
    Tensor out({1});
    out.data[0] = acc / static_cast<double>(p.size());
    Tensor tgt = target;
    return Var::from_node(make_node(std::move(out), {pred}, [tgt](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        const Tensor& pv = n.parents[0]->value;
        Tensor& dp = n.parents[0]->ensure_grad();
        double c = 2.0 * n.grad.data[0] / static_cast<double>(pv.data.size());
        for (size_t i = 0; i < pv.data.size(); ++i)
            dp.data[i] += c * (pv.data[i] - tgt.data[i]);
    }));
}

// ------------------------------------------------------------- linear algebra

Var matmul(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.ndim() != 2 || bv.ndim() != 2 || av.dim(1) != bv.dim(0))
        throw std::invalid_argument("matmul: bad shapes " + av.shape_str() + " x " + bv.shape_str());
    int n = av.dim(0), m = av.dim(1), k = bv.dim(1);
    Tensor out({n, k});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double x = av.at2(i, j);
            if (x == 0.0) continue;
            for (int c = 0; c < k; ++c) out.at2(i, c) += x * bv.at2(j, c);
        }
    return Var::from_node(make_node(std::move(out), {a, b}, [n, m, k](Node& nd) {
        const Tensor& A = nd.parents[0]->value;
        const Tensor& B = nd.parents[1]->value;
        if (nd.parents[0]->requires_grad) {
            Tensor& dA = nd.parents[0]->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (int c = 0; c < k; ++c) s += nd.grad.at2(i, c) * B.at2(j, c);
                    dA.at2(i, j) += s;
                }
        }
        if (nd.parents[1]->requires_grad) {
            Tensor& dB = nd.parents[1]->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double x = A.at2(i, j);
                    if (x == 0.0) continue;
                    for (int c = 0; c < k; ++c) dB.at2(j, c) += x * nd.grad.at2(i, c);
                }
        }
    }));
}

Var linear(const Var& x, const Var& w, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    if (xv.ndim() != 2 || wv.ndim() != 2 || xv.dim(1) != wv.dim(0) || bv.dim(0) != wv.dim(1))
        throw std::invalid_argument("linear: bad shapes");
    int n = xv.dim(0), din = xv.dim(1), dout = wv.dim(1);
    Tensor out({n, dout});
    for (int i = 0; i < n; ++i) {
        for (int o = 0; o < dout; ++o) out.at2(i, o) = bv.data[o];
        for (int j = 0; j < din; ++j) {
            double v = xv.at2(i, j);
            if (v == 0.0) continue;
            for (int o = 0; o < dout; ++o) out.at2(i, o) += v * wv.at2(j, o);
        }
    }
    return Var::from_node(make_node(std::move(out), {x, w, b}, [n, din, dout](Node& nd) {
        const Tensor& X = nd.parents[0]->value;
        const Tensor& W = nd.parents[1]->value;
        if (nd.parents[0]->requires_grad) {
            Tensor& dX = nd.parents[0]->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < din; ++j) {
                    double s = 0.0;
                    for (int o = 0; o < dout; ++o) s += nd.grad.at2(i, o) * W.at2(j, o);
                    dX.at2(i, j) += s;
                }
        }
        if (nd.parents[1]->requires_grad) {
            Tensor& dW = nd.parents[1]->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < din; ++j) {
                    double v = X.at2(i, j);
                    if (v == 0.0) continue;
                    for (int o = 0; o < dout; ++o) dW.at2(j, o) += v * nd.grad.at2(i, o);
                }
        }
        if (nd.parents[2]->requires_grad) {
            Tensor& dB = nd.parents[2]->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int o = 0; o < dout; ++o) dB.data[o] += nd.grad.at2(i, o);
        }
    }));
}

Var softmax_rows(const Var& a) {
    const Tensor& av = a.value();
    if (av.ndim() != 2) throw std::invalid_argument("softmax_rows: expects 2D");
    int n = av.dim(0), m = av.dim(1);
    Tensor out({n, m});
    for (int i = 0; i < n; ++i) {
        double mx = av.at2(i, 0);
        for (int j = 1; j < m; ++j) mx = std::max(mx, av.at2(i, j));
        double z = 0.0;
        for (int j = 0; j < m; ++j) {
            out.at2(i, j) = std::exp(av.at2(i, j) - mx);
            z += out.at2(i, j);
        }
        for (int j = 0; j < m; ++j) out.at2(i, j) /= z;
    }
    Tensor saved = out;
    return Var::from_node(make_node(std::move(out), {a}, [n, m, saved](Node& nd) {
        if (!nd.parents[0]->requires_grad) return;
        Tensor& dA = nd.parents[0]->ensure_grad();
        for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = 0; j < m; ++j) dot += nd.grad.at2(i, j) * saved.at2(i, j);
            for (int j = 0; j < m; ++j)
                dA.at2(i, j) += saved.at2(i, j) * (nd.grad.at2(i, j) - dot);
        }
    }));
}

Var attention(const Var& q, const Var& k, const Var& v, int groups, bool shared_kv) {
    const Tensor& qv = q.value();
    const Tensor& kv = k.value();
    const Tensor& vv = v.value();
    if (qv.ndim() != 2 || kv.ndim() != 2 || vv.ndim() != 2)
        throw std::invalid_argument("attention: expects 2D operands");
    if (qv.dim(0) % groups != 0) throw std::invalid_argument("attention: q rows not divisible by groups");
    int kv_groups = shared_kv ? 1 : groups;
    if (kv.dim(0) % kv_groups != 0) throw std::invalid_argument("attention: k rows not divisible by groups");
    if (kv.dim(0) != vv.dim(0)) throw std::invalid_argument("attention: k/v row mismatch");
    if (qv.dim(1) != kv.dim(1)) throw std::invalid_argument("attention: q/k width mismatch");
    int nq = qv.dim(0) / groups;
    int nk = kv.dim(0) / kv_groups;
    int d = qv.dim(1);
    int dv = vv.dim(1);
    double sc = 1.0 / std::sqrt(static_cast<double>(d));

    Tensor out({groups * nq, dv});
    Tensor S({groups * nq, nk});  // saved softmax weights
    for (int g = 0; g < groups; ++g) {
        int qo = g * nq;
        int ko = shared_kv ? 0 : g * nk;
        for (int i = 0; i < nq; ++i) {
            double mx = -1e300;
            for (int j = 0; j < nk; ++j) {
                double a = 0.0;
                for (int c = 0; c < d; ++c) a += qv.at2(qo + i, c) * kv.at2(ko + j, c);
                a *= sc;
                S.at2(qo + i, j) = a;
                mx = std::max(mx, a);
            }
            double z = 0.0;
            for (int j = 0; j < nk; ++j) {
                double e = std::exp(S.at2(qo + i, j) - mx);
                S.at2(qo + i, j) = e;
                z += e;
            }
            for (int j = 0; j < nk; ++j) {
                double w = S.at2(qo + i, j) / z;
                S.at2(qo + i, j) = w;
                for (int c = 0; c < dv; ++c) out.at2(qo + i, c) += w * vv.at2(ko + j, c);
            }
        }
    }
    return Var::from_node(
        make_node(std::move(out), {q, k, v},
                  [groups, shared_kv, nq, nk, d, dv, sc, S](Node& nd) {
                      const Tensor& Q = nd.parents[0]->value;
                      const Tensor& K = nd.parents[1]->value;
                      const Tensor& V = nd.parents[2]->value;
                      bool needQ = nd.parents[0]->requires_grad;
                      bool needK = nd.parents[1]->requires_grad;
                      bool needV = nd.parents[2]->requires_grad;
                      Tensor* dQ = needQ ? &nd.parents[0]->ensure_grad() : nullptr;
                      Tensor* dK = needK ? &nd.parents[1]->ensure_grad() : nullptr;
                      Tensor* dV = needV ? &nd.parents[2]->ensure_grad() : nullptr;
                      std::vector<double> dS(static_cast<size_t>(nk));
                      for (int g = 0; g < groups; ++g) {
                          int qo = g * nq;
                          int ko = shared_kv ? 0 : g * nk;
                          for (int i = 0; i < nq; ++i) {
                              // dS_ij = dO_i . V_j ; dA = S * (dS - (dS.S))
                              double dot = 0.0;
                              for (int j = 0; j < nk; ++j) {
                                  double s = 0.0;
                                  for (int c = 0; c < dv; ++c)
                                      s += nd.grad.at2(qo + i, c) * V.at2(ko + j, c);
                                  dS[static_cast<size_t>(j)] = s;
                                  dot += s * S.at2(qo + i, j);
                              }
                              for (int j = 0; j < nk; ++j) {
                                  double w = S.at2(qo + i, j);
                                  if (needV) {
                                      for (int c = 0; c < dv; ++c)
                                          dV->at2(ko + j, c) += w * nd.grad.at2(qo + i, c);
                                  }
                                  double dA = w * (dS[static_cast<size_t>(j)] - dot) * sc;
                                  if (dA == 0.0) continue;
                                  if (needQ)
                                      for (int c = 0; c < d; ++c)
                                          dQ->at2(qo + i, c) += dA * K.at2(ko + j, c);
                                  if (needK)
                                      for (int c = 0; c < d; ++c)
                                          dK->at2(ko + j, c) += dA * Q.at2(qo + i, c);
                              }
                          }
                      }
                  }));
}

// ---------------------------------------------------------------- embeddings

Var embedding_rows(const Var& table, const std::vector<int>& ids) {
    const Tensor& tv = table.value();
    if (tv.ndim() != 2) throw std::invalid_argument("embedding_rows: table must be 2D");
    int d = tv.dim(1);
    for (int id : ids)
        if (id < 0 || id >= tv.dim(0))
            throw std::out_of_range("embedding_rows: token id " + std::to_string(id) +
                                    " outside vocabulary of " + std::to_string(tv.dim(0)));
    Tensor out({static_cast<int>(ids.size()), d});
    for (size_t i = 0; i < ids.size(); ++i)
        for (int c = 0; c < d; ++c) out.at2(static_cast<int>(i), c) = tv.at2(ids[i], c);
    auto ids_copy = ids;
    return Var::from_node(make_node(std::move(out), {table}, [ids_copy, d](Node& nd) {
        if (!nd.parents[0]->requires_grad) return;
        Tensor& dT = nd.parents[0]->ensure_grad();
        for (size_t i = 0; i < ids_copy.size(); ++i)
            for (int c = 0; c < d; ++c)
                dT.at2(ids_copy[i], c) += nd.grad.at2(static_cast<int>(i), c);
    }));
}

// -------------------------------------------------------------- convolutions

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    if (xv.ndim() != 4 || wv.ndim() != 4)
        throw std::invalid_argument("conv2d: expects 4D input/kernel");
    int l = xv.dim(0), cin = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
    int cout = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
    if (wv.dim(1) != cin) throw std::invalid_argument("conv2d: channel mismatch");
    if (bv.dim(0) != cout) throw std::invalid_argument("conv2d: bias mismatch");
    int ho = (h + 2 * pad - kh) / stride + 1;
    int wo = (wd + 2 * pad - kw) / stride + 1;
    Tensor out({l, cout, ho, wo});
    for (int t = 0; t < l; ++t)
        for (int co = 0; co < cout; ++co)
            for (int i = 0; i < ho; ++i)
                for (int j = 0; j < wo; ++j) {
                    double acc = bv.data[co];
                    for (int ci = 0; ci < cin; ++ci)
                        for (int u = 0; u < kh; ++u) {
                            int y = i * stride + u - pad;
                            if (y < 0 || y >= h) continue;
                            for (int q = 0; q < kw; ++q) {
                                int z = j * stride + q - pad;
                                if (z < 0 || z >= wd) continue;
                                acc += wv.at4(co, ci, u, q) * xv.at4(t, ci, y, z);
                            }
                        }
                    out.at4(t, co, i, j) = acc;
                }
    return Var::from_node(make_node(
        std::move(out), {x, w, b},
        [l, cin, h, wd, cout, kh, kw, ho, wo, stride, pad](Node& nd) {
            const Tensor& X = nd.parents[0]->value;
            const Tensor& W = nd.parents[1]->value;
            bool needX = nd.parents[0]->requires_grad;
            bool needW = nd.parents[1]->requires_grad;
            bool needB = nd.parents[2]->requires_grad;
            Tensor* dX = needX ? &nd.parents[0]->ensure_grad() : nullptr;
            Tensor* dW = needW ? &nd.parents[1]->ensure_grad() : nullptr;
            Tensor* dB = needB ? &nd.parents[2]->ensure_grad() : nullptr;
            for (int t = 0; t < l; ++t)
                for (int co = 0; co < cout; ++co)
                    for (int i = 0; i < ho; ++i)
                        for (int j = 0; j < wo; ++j) {
                            double g = nd.grad.at4(t, co, i, j);
                            if (g == 0.0) continue;
                            if (needB) dB->data[co] += g;
                            for (int ci = 0; ci < cin; ++ci)
                                for (int u = 0; u < kh; ++u) {
                                    int y = i * stride + u - pad;
                                    if (y < 0 || y >= h) continue;
                                    for (int q = 0; q < kw; ++q) {
                                        int z = j * stride + q - pad;
                                        if (z < 0 || z >= wd) continue;
                                        if (needX) dX->at4(t, ci, y, z) += g * W.at4(co, ci, u, q);
                                        if (needW) dW->at4(co, ci, u, q) += g * X.at4(t, ci, y, z);
                                    }
                                }
                        }
        }));
}

Var conv1d_temporal(const Var& x, const Var& w, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    if (xv.ndim() != 4 || wv.ndim() != 3 || wv.dim(2) != 3)
        throw std::invalid_argument("conv1d_temporal: expects 4D input, kernel 3");
    int l = xv.dim(0), cin = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
    int cout = wv.dim(0);
    if (wv.dim(1) != cin || bv.dim(0) != cout)
        throw std::invalid_argument("conv1d_temporal: channel mismatch");
    Tensor out({l, cout, h, wd});
    for (int t = 0; t < l; ++t)
        for (int co = 0; co < cout; ++co)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < wd; ++j) {
                    double acc = bv.data[co];
                    for (int k = 0; k < 3; ++k) {
                        int ts = t + k - 1;
                        if (ts < 0 || ts >= l) continue;
                        for (int ci = 0; ci < cin; ++ci)
                            acc += wv.at3(co, ci, k) * xv.at4(ts, ci, i, j);
                    }
                    out.at4(t, co, i, j) = acc;
                }
    return Var::from_node(
        make_node(std::move(out), {x, w, b}, [l, cin, h, wd, cout](Node& nd) {
            const Tensor& X = nd.parents[0]->value;
            const Tensor& W = nd.parents[1]->value;
            bool needX = nd.parents[0]->requires_grad;
            bool needW = nd.parents[1]->requires_grad;
            bool needB = nd.parents[2]->requires_grad;
            Tensor* dX = needX ? &nd.parents[0]->ensure_grad() : nullptr;
            Tensor* dW = needW ? &nd.parents[1]->ensure_grad() : nullptr;
            Tensor* dB = needB ? &nd.parents[2]->ensure_grad() : nullptr;
            for (int t = 0; t < l; ++t)
                for (int co = 0; co < cout; ++co)
                    for (int i = 0; i < h; ++i)
                        for (int j = 0; j < wd; ++j) {
                            double g = nd.grad.at4(t, co, i, j);
                            if (g == 0.0) continue;
                            if (needB) dB->data[co] += g;
                            for (int k = 0; k < 3; ++k) {
                                int ts = t + k - 1;
                                if (ts < 0 || ts >= l) continue;
                                for (int ci = 0; ci < cin; ++ci) {
                                    if (needX) dX->at4(ts, ci, i, j) += g * W.at3(co, ci, k);
                                    if (needW) dW->at3(co, ci, k) += g * X.at4(ts, ci, i, j);
                                }
                            }
                        }
        }));
}

Var upsample_nearest2x(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) throw std::invalid_argument("upsample_nearest2x: expects 4D");
    int l = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    Tensor out({l, c, 2 * h, 2 * w});
    for (int t = 0; t < l; ++t)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    double v = xv.at4(t, ch, i, j);
                    out.at4(t, ch, 2 * i, 2 * j) = v;
                    out.at4(t, ch, 2 * i, 2 * j + 1) = v;
                    out.at4(t, ch, 2 * i + 1, 2 * j) = v;
                    out.at4(t, ch, 2 * i + 1, 2 * j + 1) = v;
                }
    return Var::from_node(make_node(std::move(out), {x}, [l, c, h, w](Node& nd) {
        if (!nd.parents[0]->requires_grad) return;
        Tensor& dX = nd.parents[0]->ensure_grad();
        for (int t = 0; t < l; ++t)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j)
                        dX.at4(t, ch, i, j) += nd.grad.at4(t, ch, 2 * i, 2 * j) +
                                               nd.grad.at4(t, ch, 2 * i, 2 * j + 1) +
                                               nd.grad.at4(t, ch, 2 * i + 1, 2 * j) +
                                               nd.grad.at4(t, ch, 2 * i + 1, 2 * j + 1);
    }));
}

Var layernorm_channel(const Var& x, const Var& gamma, const Var& beta) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) throw std::invalid_argument("layernorm_channel: expects 4D");
    int l = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    if (gamma.value().dim(0) != c || beta.value().dim(0) != c)
        throw std::invalid_argument("layernorm_channel: gain/bias width mismatch");
    const double eps = 1e-5;
    Tensor out({l, c, h, w});
    Tensor xhat({l, c, h, w});
    Tensor inv_std({l, 1, h, w});
    for (int t = 0; t < l; ++t)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                double mu = 0.0;
                for (int ch = 0; ch < c; ++ch) mu += xv.at4(t, ch, i, j);
                mu /= c;
                double var = 0.0;
                for (int ch = 0; ch < c; ++ch) {
                    double d = xv.at4(t, ch, i, j) - mu;
                    var += d * d;
                }
                var /= c;
                double is = 1.0 / std::sqrt(var + eps);
                inv_std.at4(t, 0, i, j) = is;
                for (int ch = 0; ch < c; ++ch) {
                    double xh = (xv.at4(t, ch, i, j) - mu) * is;
                    xhat.at4(t, ch, i, j) = xh;
                    out.at4(t, ch, i, j) = gamma.value().data[ch] * xh + beta.value().data[ch];
                }
            }
    return Var::from_node(make_node(
        std::move(out), {x, gamma, beta}, [l, c, h, w, xhat, inv_std](Node& nd) {
            const Tensor& G = nd.parents[1]->value;
            bool needX = nd.parents[0]->requires_grad;
            bool needG = nd.parents[1]->requires_grad;
            bool needB = nd.parents[2]->requires_grad;
            Tensor* dX = needX ? &nd.parents[0]->ensure_grad() : nullptr;
            Tensor* dG = needG ? &nd.parents[1]->ensure_grad() : nullptr;
            Tensor* dB = needB ? &nd.parents[2]->ensure_grad() : nullptr;
            for (int t = 0; t < l; ++t)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) {
                        double m1 = 0.0, m2 = 0.0;
                        for (int ch = 0; ch < c; ++ch) {
                            double g = nd.grad.at4(t, ch, i, j);
                            double dxh = g * G.data[ch];
                            double xh = xhat.at4(t, ch, i, j);
                            if (needG) dG->data[ch] += g * xh;
                            if (needB) dB->data[ch] += g;
                            m1 += dxh;
                            m2 += dxh * xh;
                        }
                        if (!needX) continue;
                        m1 /= c;
                        m2 /= c;
                        double is = inv_std.at4(t, 0, i, j);
                        for (int ch = 0; ch < c; ++ch) {
                            double dxh = nd.grad.at4(t, ch, i, j) * G.data[ch];
                            dX->at4(t, ch, i, j) +=
                                is * (dxh - m1 - xhat.at4(t, ch, i, j) * m2);
                        }
                    }
        }));
}

Var add_channel_bias(const Var& x, const Var& bias) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4 || bias.value().dim(0) != xv.dim(1))
        throw std::invalid_argument("add_channel_bias: shape mismatch");
    int l = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    Tensor out = xv;
    for (int t = 0; t < l; ++t)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) out.at4(t, ch, i, j) += bias.value().data[ch];
    return Var::from_node(make_node(std::move(out), {x, bias}, [l, c, h, w](Node& nd) {
        accum(nd.parents[0], nd.grad);
        if (!nd.parents[1]->requires_grad) return;
        Tensor& dBias = nd.parents[1]->ensure_grad();
        for (int t = 0; t < l; ++t)
            for (int ch = 0; ch < c; ++ch)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) dBias.data[ch] += nd.grad.at4(t, ch, i, j);
    }));
}

Var mul_channel(const Var& x, const Var& s) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4 || s.value().dim(0) != xv.dim(1))
        throw std::invalid_argument("mul_channel: shape mismatch");
    int l = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    Tensor out = xv;
    for (int t = 0; t < l; ++t)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) out.at4(t, ch, i, j) *= s.value().data[ch];
    return Var::from_node(make_node(std::move(out), {x, s}, [l, c, h, w](Node& nd) {
        const Tensor& X = nd.parents[0]->value;
        const Tensor& S = nd.parents[1]->value;
        if (nd.parents[0]->requires_grad) {
            Tensor& dX = nd.parents[0]->ensure_grad();
            for (int t = 0; t < l; ++t)
                for (int ch = 0; ch < c; ++ch)
                    for (int i = 0; i < h; ++i)
                        for (int j = 0; j < w; ++j)
                            dX.at4(t, ch, i, j) += nd.grad.at4(t, ch, i, j) * S.data[ch];
        }
        if (nd.parents[1]->requires_grad) {
            Tensor& dS = nd.parents[1]->ensure_grad();
            for (int t = 0; t < l; ++t)
                for (int ch = 0; ch < c; ++ch)
                    for (int i = 0; i < h; ++i)
                        for (int j = 0; j < w; ++j)
                            dS.data[ch] += nd.grad.at4(t, ch, i, j) * X.at4(t, ch, i, j);
        }
    }));
}

Var add_at_frame(const Var& x, const Var& y, int frame, double s) {
    const Tensor& xv = x.value();
    const Tensor& yv = y.value();
    if (xv.ndim() != 4 || yv.ndim() != 4 || yv.dim(0) != 1 || yv.dim(1) != xv.dim(1) ||
        yv.dim(2) != xv.dim(2) || yv.dim(3) != xv.dim(3))
        throw std::invalid_argument("add_at_frame: shape mismatch " + xv.shape_str() + " vs " +
                                    yv.shape_str());
    if (frame < 0 || frame >= xv.dim(0))
        throw std::out_of_range("add_at_frame: frame index " + std::to_string(frame) +
                                " outside [0," + std::to_string(xv.dim(0)) + ")");
    Tensor out = xv;
    int64_t per_frame = yv.size();
    int64_t off = frame * per_frame;
    for (int64_t i = 0; i < per_frame; ++i) out.data[off + i] += s * yv.data[i];
    return Var::from_node(make_node(std::move(out), {x, y}, [off, per_frame, s](Node& nd) {
        accum(nd.parents[0], nd.grad);
        if (!nd.parents[1]->requires_grad) return;
        Tensor& dY = nd.parents[1]->ensure_grad();
        for (int64_t i = 0; i < per_frame; ++i) dY.data[i] += s * nd.grad.data[off + i];
    }));
}

Var reshape(const Var& a, std::vector<int> shape) {
    if (Tensor::numel(shape) != a.value().size())
        throw std::invalid_argument("reshape: element count mismatch");
    Tensor out(shape, a.value().data);
    return Var::from_node(make_node(std::move(out), {a}, [](Node& n) {
        if (!n.parents[0]->requires_grad) return;
        Tensor& da = n.parents[0]->ensure_grad();
        for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += n.grad.data[i];
    }));
}

// ------------------------------------------------------------- layout shuffles

namespace {

Var permute_with(const Var& x, Tensor out, std::vector<int64_t> src_index) {
    // out.data[i] = x.data[src_index[i]]
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = x.value().data[src_index[i]];
    return Var::from_node(make_node(std::move(out), {x}, [src_index](Node& nd) {
        if (!nd.parents[0]->requires_grad) return;
        Tensor& dX = nd.parents[0]->ensure_grad();
        for (size_t i = 0; i < src_index.size(); ++i) dX.data[src_index[i]] += nd.grad.data[i];
    }));
}

}  // namespace

Var frames_to_tokens(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) throw std::invalid_argument("frames_to_tokens: expects 4D");
    int l = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    Tensor out({l * h * w, c});
    std::vector<int64_t> idx(out.data.size());
    int64_t r = 0;
    for (int t = 0; t < l; ++t)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                for (int ch = 0; ch < c; ++ch)
                    idx[r++] = ((static_cast<int64_t>(t) * c + ch) * h + i) * w + j;
    return permute_with(x, std::move(out), std::move(idx));
}

Var tokens_to_frames(const Var& t, int l, int h, int w) {
    const Tensor& tv = t.value();
    if (tv.ndim() != 2 || tv.dim(0) != l * h * w)
        throw std::invalid_argument("tokens_to_frames: shape mismatch");
    int c = tv.dim(1);
    Tensor out({l, c, h, w});
    std::vector<int64_t> idx(out.data.size());
    int64_t r = 0;
    for (int f = 0; f < l; ++f)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    idx[r++] = (static_cast<int64_t>((f * h + i) * w + j)) * c + ch;
    return permute_with(t, std::move(out), std::move(idx));
}

Var positions_to_tokens(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.ndim() != 4) throw std::invalid_argument("positions_to_tokens: expects 4D");
    int l = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
    Tensor out({h * w * l, c});
    std::vector<int64_t> idx(out.data.size());
    int64_t r = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int t = 0; t < l; ++t)
                for (int ch = 0; ch < c; ++ch)
                    idx[r++] = ((static_cast<int64_t>(t) * c + ch) * h + i) * w + j;
    return permute_with(x, std::move(out), std::move(idx));
}

Var tokens_to_positions(const Var& t, int l, int h, int w) {
    const Tensor& tv = t.value();
    if (tv.ndim() != 2 || tv.dim(0) != h * w * l)
        throw std::invalid_argument("tokens_to_positions: shape mismatch");
    int c = tv.dim(1);
    Tensor out({l, c, h, w});
    std::vector<int64_t> idx(out.data.size());
    int64_t r = 0;
    for (int f = 0; f < l; ++f)
        for (int ch = 0; ch < c; ++ch)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    idx[r++] = (static_cast<int64_t>((i * w + j) * l + f)) * c + ch;
    return permute_with(t, std::move(out), std::move(idx));
}

}  // namespace ccedit::ad
