#pragma once
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cdeq/tensor.hpp"

namespace cdeq {

// Named parameter tensors plus optimizer state. Gradients accumulate here
// after Tape::backward harvests them.
struct ParamStore {
    std::vector<std::string> order;
    std::map<std::string, Tensor> values;
    std::map<std::string, Tensor> grads;
    std::map<std::string, Tensor> adam_m, adam_v;
    long step_count = 0;

    void add(const std::string& name, Tensor v);
    bool has(const std::string& name) const { return values.count(name) > 0; }
    void zero_grad();
};

void sgd_step(ParamStore& ps, double lr);
void adam_step(ParamStore& ps, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps_opt = 1e-8);

using NodeId = int;

// Append-only tape; creation order is a topological order, so backward is a
// single reverse sweep. Graphs are rebuilt per training step.
class Tape {
public:
    NodeId constant(Tensor v);
    NodeId param(ParamStore& ps, const std::string& name);

    NodeId matmul(NodeId a, NodeId b);
    NodeId matmul_nt(NodeId a, NodeId b);
    NodeId bias_add(NodeId m, NodeId bias);
    NodeId tanh_op(NodeId a);
    NodeId relu(NodeId a);
    NodeId concat(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double s);
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);
    NodeId mse(NodeId pred, NodeId target);
    NodeId l1(NodeId pred, NodeId target);
    NodeId softmax_ce(NodeId logits, const std::vector<int>& labels);
    NodeId stopgrad(NodeId a);

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

    // Seeds d(loss)/d(loss)=1 and sweeps the tape in reverse; loss must be scalar.
    void backward(NodeId loss);
    // Adds leaf gradients into ps.grads.
    void harvest(ParamStore& ps) const;

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<NodeId> parents;
        std::function<void(Tape&, Node&)> back;
        std::string param_name;  // nonempty for parameter leaves
    };
    std::vector<Node> nodes_;

    NodeId push(Tensor value, std::vector<NodeId> parents,
                std::function<void(Tape&, Node&)> back);
    Tensor& grad_ref(NodeId id) { return nodes_[id].grad; }
    friend struct TapeAccess;
};

// max over parameter elements of |analytic - numeric| / max(|a|,|n|,1e-8),
// central differences. `fn` must be a pure function of ps.values.
double finite_difference_check(const std::function<double(ParamStore&)>& fn, ParamStore& ps,
                               const std::map<std::string, Tensor>& analytic, double step = 1e-5);

}  // namespace cdeq
