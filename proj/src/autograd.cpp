#include "cdeq/autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace cdeq {

void ParamStore::add(const std::string& name, Tensor v) {
    if (has(name)) throw std::invalid_argument("ParamStore: duplicate " + name);
    order.push_back(name);
    grads.emplace(name, Tensor(v.shape));
    adam_m.emplace(name, Tensor(v.shape));
    adam_v.emplace(name, Tensor(v.shape));
    values.emplace(name, std::move(v));
}

void ParamStore::zero_grad() {
    for (auto& [k, g] : grads)
        for (auto& v : g.data) v = 0.0;
}

void sgd_step(ParamStore& ps, double lr) {
    for (const auto& name : ps.order) {
        auto& w = ps.values.at(name);
        const auto& g = ps.grads.at(name);
        for (std::size_t i = 0; i < w.numel(); ++i) w.data[i] -= lr * g.data[i];
    }
    ps.step_count++;
}

void adam_step(ParamStore& ps, double lr, double beta1, double beta2, double eps_opt) {
    ps.step_count++;
    const double t = static_cast<double>(ps.step_count);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (const auto& name : ps.order) {
        auto& w = ps.values.at(name);
        const auto& g = ps.grads.at(name);
        auto& m = ps.adam_m.at(name);
        auto& v = ps.adam_v.at(name);
        for (std::size_t i = 0; i < w.numel(); ++i) {
            m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g.data[i];
            v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
            const double mh = m.data[i] / c1;
            const double vh = v.data[i] / c2;
            w.data[i] -= lr * mh / (std::sqrt(vh) + eps_opt);
        }
    }
}

NodeId Tape::push(Tensor value, std::vector<NodeId> parents,
                  std::function<void(Tape&, Node&)> back) {
    Node n;
    n.value = std::move(value);
    n.grad = Tensor(n.value.shape);
    n.parents = std::move(parents);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size()) - 1;
}

NodeId Tape::constant(Tensor v) { return push(std::move(v), {}, nullptr); }

NodeId Tape::param(ParamStore& ps, const std::string& name) {
    NodeId id = push(ps.values.at(name), {}, nullptr);
    nodes_[id].param_name = name;
    return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    Tensor v = cdeq::matmul(value(a), value(b));
    return push(std::move(v), {a, b}, [a, b](Tape& t, Node& n) {
        const Tensor bt = transpose(t.value(b));
        const Tensor at = transpose(t.value(a));
        Tensor da = cdeq::matmul(n.grad, bt);
        Tensor db = cdeq::matmul(at, n.grad);
        for (std::size_t i = 0; i < da.numel(); ++i) t.grad_ref(a).data[i] += da.data[i];
        for (std::size_t i = 0; i < db.numel(); ++i) t.grad_ref(b).data[i] += db.data[i];
    });
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
    Tensor v = cdeq::matmul_nt(value(a), value(b));
    return push(std::move(v), {a, b}, [a, b](Tape& t, Node& n) {
        // c = a b^T: da += dc b, db += dc^T a
        Tensor da = cdeq::matmul(n.grad, t.value(b));
        Tensor db = cdeq::matmul(transpose(n.grad), t.value(a));
        for (std::size_t i = 0; i < da.numel(); ++i) t.grad_ref(a).data[i] += da.data[i];
        for (std::size_t i = 0; i < db.numel(); ++i) t.grad_ref(b).data[i] += db.data[i];
    });
}

NodeId Tape::bias_add(NodeId m, NodeId bias) {
    const Tensor& mv = value(m);
    const Tensor& bv = value(bias);
    if (mv.rank() != 2 || bv.numel() != mv.cols())
        throw std::invalid_argument("bias_add: bias width must match columns");
    Tensor v = mv;
    for (std::size_t i = 0; i < mv.rows(); ++i)
        for (std::size_t j = 0; j < mv.cols(); ++j) v.at(i, j) += bv.data[j];
    return push(std::move(v), {m, bias}, [m, bias](Tape& t, Node& n) {
        auto& dm = t.grad_ref(m);
        auto& db = t.grad_ref(bias);
        const std::size_t rows = n.value.rows(), cols = n.value.cols();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                dm.at(i, j) += n.grad.at(i, j);
                db.data[j] += n.grad.at(i, j);
            }
    });
}

NodeId Tape::tanh_op(NodeId a) {
    Tensor v = value(a);
    for (auto& e : v.data) e = std::tanh(e);
    return push(std::move(v), {a}, [a](Tape& t, Node& n) {
        auto& da = t.grad_ref(a);
        for (std::size_t i = 0; i < n.value.numel(); ++i)
            da.data[i] += (1.0 - n.value.data[i] * n.value.data[i]) * n.grad.data[i];
    });
}

NodeId Tape::relu(NodeId a) {
    Tensor v = value(a);
    for (auto& e : v.data) e = e > 0.0 ? e : 0.0;
    return push(std::move(v), {a}, [a](Tape& t, Node& n) {
        auto& da = t.grad_ref(a);
        const Tensor& x = t.value(a);
        for (std::size_t i = 0; i < x.numel(); ++i)
            if (x.data[i] > 0.0) da.data[i] += n.grad.data[i];
    });
}

NodeId Tape::concat(NodeId a, NodeId b) {
    Tensor v = concat_cols(value(a), value(b));
    return push(std::move(v), {a, b}, [a, b](Tape& t, Node& n) {
        auto& da = t.grad_ref(a);
        auto& db = t.grad_ref(b);
        const std::size_t ca = da.cols(), cb = db.cols();
        for (std::size_t i = 0; i < da.rows(); ++i) {
            for (std::size_t j = 0; j < ca; ++j) da.at(i, j) += n.grad.at(i, j);
            for (std::size_t j = 0; j < cb; ++j) db.at(i, j) += n.grad.at(i, ca + j);
        }
    });
}

NodeId Tape::add(NodeId a, NodeId b) {
    Tensor v = cdeq::add(value(a), value(b));
    return push(std::move(v), {a, b}, [a, b](Tape& t, Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            t.grad_ref(a).data[i] += n.grad.data[i];
            t.grad_ref(b).data[i] += n.grad.data[i];
        }
    });
}

NodeId Tape::sub(NodeId a, NodeId b) {
    Tensor v = cdeq::sub(value(a), value(b));
    return push(std::move(v), {a, b}, [a, b](Tape& t, Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            t.grad_ref(a).data[i] += n.grad.data[i];
            t.grad_ref(b).data[i] -= n.grad.data[i];
        }
    });
}

NodeId Tape::mul(NodeId a, NodeId b) {
    Tensor v = cdeq::mul(value(a), value(b));
    return push(std::move(v), {a, b}, [a, b](Tape& t, Node& n) {
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            t.grad_ref(a).data[i] += bv.data[i] * n.grad.data[i];
            t.grad_ref(b).data[i] += av.data[i] * n.grad.data[i];
        }
    });
}

NodeId Tape::scale(NodeId a, double s) {
    Tensor v = cdeq::scale(value(a), s);
    return push(std::move(v), {a}, [a, s](Tape& t, Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
            t.grad_ref(a).data[i] += s * n.grad.data[i];
    });
}

NodeId Tape::sum(NodeId a) {
    double s = 0.0;
    for (double e : value(a).data) s += e;
    return push(Tensor({1}, {s}), {a}, [a](Tape& t, Node& n) {
        const double g = n.grad.data[0];
        for (auto& e : t.grad_ref(a).data) e += g;
    });
}

NodeId Tape::mean(NodeId a) {
    const std::size_t n_el = value(a).numel();
    double s = 0.0;
    for (double e : value(a).data) s += e;
    s /= static_cast<double>(n_el);
    return push(Tensor({1}, {s}), {a}, [a, n_el](Tape& t, Node& n) {
        const double g = n.grad.data[0] / static_cast<double>(n_el);
        for (auto& e : t.grad_ref(a).data) e += g;
    });
}

NodeId Tape::mse(NodeId pred, NodeId target) {
    check_same_shape(value(pred), value(target), "mse");
    const std::size_t n_el = value(pred).numel();
    double s = 0.0;
    for (std::size_t i = 0; i < n_el; ++i) {
        const double d = value(pred).data[i] - value(target).data[i];
        s += d * d;
    }
    s /= static_cast<double>(n_el);
    return push(Tensor({1}, {s}), {pred, target}, [pred, target, n_el](Tape& t, Node& n) {
        const double g = n.grad.data[0] * 2.0 / static_cast<double>(n_el);
        const Tensor& pv = t.value(pred);
        const Tensor& tv = t.value(target);
        for (std::size_t i = 0; i < n_el; ++i) {
            const double d = pv.data[i] - tv.data[i];
            t.grad_ref(pred).data[i] += g * d;
            t.grad_ref(target).data[i] -= g * d;
        }
    });
}

NodeId Tape::l1(NodeId pred, NodeId target) {
    check_same_shape(value(pred), value(target), "l1");
    const std::size_t n_el = value(pred).numel();
    double s = 0.0;
    for (std::size_t i = 0; i < n_el; ++i)
        s += std::fabs(value(pred).data[i] - value(target).data[i]);
    s /= static_cast<double>(n_el);
    return push(Tensor({1}, {s}), {pred, target}, [pred, target, n_el](Tape& t, Node& n) {
        const double g = n.grad.data[0] / static_cast<double>(n_el);
        const Tensor& pv = t.value(pred);
        const Tensor& tv = t.value(target);
        for (std::size_t i = 0; i < n_el; ++i) {
            const double d = pv.data[i] - tv.data[i];
            const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            t.grad_ref(pred).data[i] += g * sg;
            t.grad_ref(target).data[i] -= g * sg;
        }
    });
}

NodeId Tape::softmax_ce(NodeId logits, const std::vector<int>& labels) {
    const Tensor& lv = value(logits);
    if (lv.rank() != 2 || labels.size() != lv.rows())
        throw std::invalid_argument("softmax_ce: labels must match batch rows");
    const std::size_t B = lv.rows(), C = lv.cols();
    Tensor probs({B, C});
    double loss = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= C)
            throw std::invalid_argument("softmax_ce: label out of range");
        double mx = lv.at(i, 0);
        for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, lv.at(i, j));
        double se = 0.0;
        for (std::size_t j = 0; j < C; ++j) se += std::exp(lv.at(i, j) - mx);
        for (std::size_t j = 0; j < C; ++j) probs.at(i, j) = std::exp(lv.at(i, j) - mx) / se;
        loss -= std::log(probs.at(i, static_cast<std::size_t>(labels[i])));
    }
    loss /= static_cast<double>(B);
    return push(Tensor({1}, {loss}), {logits},
                [logits, labels, probs](Tape& t, Node& n) {
                    const double g = n.grad.data[0] / static_cast<double>(probs.rows());
                    auto& dl = t.grad_ref(logits);
                    for (std::size_t i = 0; i < probs.rows(); ++i)
                        for (std::size_t j = 0; j < probs.cols(); ++j) {
                            double d = probs.at(i, j);
                            if (static_cast<std::size_t>(labels[i]) == j) d -= 1.0;
                            dl.at(i, j) += g * d;
                        }
                });
}

NodeId Tape::stopgrad(NodeId a) { return push(value(a), {}, nullptr); }

void Tape::backward(NodeId loss) {
    if (value(loss).numel() != 1)
        throw std::invalid_argument("backward: loss must be scalar");
    for (auto& n : nodes_)
        for (auto& g : n.grad.data) g = 0.0;
    nodes_[loss].grad.data[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.back) n.back(*this, n);
    }
}

void Tape::harvest(ParamStore& ps) const {
    for (const auto& n : nodes_) {
        if (n.param_name.empty()) continue;
        auto& g = ps.grads.at(n.param_name);
        for (std::size_t i = 0; i < g.numel(); ++i) g.data[i] += n.grad.data[i];
    }
}

double finite_difference_check(const std::function<double(ParamStore&)>& fn, ParamStore& ps,
                               const std::map<std::string, Tensor>& analytic, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_difference_check: step must be > 0");
    double worst = 0.0;
    for (const auto& name : ps.order) {
        auto it = analytic.find(name);
        if (it == analytic.end()) continue;
        auto& w = ps.values.at(name);
        for (std::size_t i = 0; i < w.numel(); ++i) {
            const double keep = w.data[i];
            w.data[i] = keep + step;
            const double up = fn(ps);
            w.data[i] = keep - step;
            const double dn = fn(ps);
            w.data[i] = keep;
            if (!std::isfinite(up) || !std::isfinite(dn))
                throw std::runtime_error("finite_difference_check: non-finite evaluation");
            const double num = (up - dn) / (2.0 * step);
            const double ana = it->second.data[i];
            const double rel = std::fabs(ana - num) /
                               std::max({std::fabs(ana), std::fabs(num), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace cdeq
