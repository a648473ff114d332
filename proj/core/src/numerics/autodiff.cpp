#include "xview/numerics/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace xview::num {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

Var make_node(Array value, const char* op, std::vector<Var> parents,
              std::function<void(Node&)> backward_fn) {
    value.check_finite(op);
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->grad = Array::zeros_like(n->value);
    n->op = op;
    n->id = g_next_id.fetch_add(1);
    n->parents = std::move(parents);
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    if (n->requires_grad) n->backward_fn = std::move(backward_fn);
    return n;
}

}  // namespace

void Node::accumulate(std::uint64_t child_id, Array delta) {
    pending.emplace_back(child_id, std::move(delta));
}

void Node::flush_pending() {
    std::stable_sort(pending.begin(), pending.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [cid, delta] : pending) {
        (void)cid;
        if (!delta.same_shape(grad)) {
            throw std::logic_error("gradient shape mismatch at node op=" + std::string(op));
        }
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += delta[i];
    }
    pending.clear();
}

Var make_leaf(Array value, bool requires_grad) {
    value.check_finite("leaf");
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->grad = Array::zeros_like(n->value);
    n->requires_grad = requires_grad;
    n->id = g_next_id.fetch_add(1);
    return n;
}

Var make_constant(Array value) { return make_leaf(std::move(value), false); }

Var make_scalar(double v) { return make_leaf(Array::scalar(v), false); }

void backward(const Var& root, TopoOrder order) {
    if (!root) throw std::invalid_argument("backward: null root");
    if (root->value.size() != 1) {
        throw std::invalid_argument("backward: root must be scalar, got " +
                                    root->value.shape_str());
    }

    // Reachable subgraph.
    std::vector<Node*> nodes;
    std::unordered_set<Node*> seen;
    std::vector<Node*> stack{root.get()};
    seen.insert(root.get());
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        nodes.push_back(n);
        for (const auto& p : n->parents) {
            if (seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    for (Node* n : nodes) {
        n->grad.fill(0.0);
        n->pending.clear();
    }

    std::vector<Node*> topo;
    topo.reserve(nodes.size());
    if (order == TopoOrder::creation) {
        topo = nodes;
        std::sort(topo.begin(), topo.end(), [](Node* a, Node* b) { return a->id > b->id; });
    } else {
        // Kahn on reversed edges: a node is ready once all its children in the
        // reachable subgraph have been processed.
        std::unordered_map<Node*, std::size_t> child_count;
        for (Node* n : nodes) child_count.emplace(n, 0);
        for (Node* n : nodes) {
            for (const auto& p : n->parents) ++child_count[p.get()];
        }
        std::deque<Node*> ready;
        for (Node* n : nodes) {
            if (child_count[n] == 0) ready.push_back(n);
        }
        while (!ready.empty()) {
            Node* n = ready.front();
            ready.pop_front();
            topo.push_back(n);
            for (const auto& p : n->parents) {
                if (--child_count[p.get()] == 0) ready.push_back(p.get());
            }
        }
        if (topo.size() != nodes.size()) throw std::logic_error("backward: graph is not a DAG");
    }

    root->grad.fill(1.0);
    for (Node* n : topo) {
        n->flush_pending();
        if (n->backward_fn) n->backward_fn(*n);
    }
}

// ---- op implementations ----

Var matmul(const Var& a, const Var& b) {
    Array out = matmul_raw(a->value, b->value);
    return make_node(std::move(out), "matmul", {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, matmul_raw(n.grad, transpose_raw(b->value)));
        if (b->requires_grad) b->accumulate(n.id, matmul_raw(transpose_raw(a->value), n.grad));
    });
}

Var transpose(const Var& a) {
    return make_node(transpose_raw(a->value), "transpose", {a}, [a](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, transpose_raw(n.grad));
    });
}

Var reshape(const Var& a, std::vector<std::size_t> shape) {
    if (shape_product(shape) != a->value.size()) {
        throw std::invalid_argument("reshape: element count mismatch");
    }
    Array out(shape, a->value.vec());
    auto parent_shape = a->value.shape();
    return make_node(std::move(out), "reshape", {a}, [a, parent_shape](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, Array(parent_shape, n.grad.vec()));
    });
}

Var add(const Var& a, const Var& b) {
    return make_node(add_raw(a->value, b->value), "add", {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, n.grad);
        if (b->requires_grad) b->accumulate(n.id, n.grad);
    });
}

Var sub(const Var& a, const Var& b) {
    return make_node(sub_raw(a->value, b->value), "sub", {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, n.grad);
        if (b->requires_grad) b->accumulate(n.id, scale_raw(n.grad, -1.0));
    });
}

Var mul(const Var& a, const Var& b) {
    return make_node(mul_raw(a->value, b->value), "mul", {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, mul_raw(n.grad, b->value));
        if (b->requires_grad) b->accumulate(n.id, mul_raw(n.grad, a->value));
    });
}

Var scale(const Var& a, double c) {
    return make_node(scale_raw(a->value, c), "scale", {a}, [a, c](Node& n) {
        if (a->requires_grad) a->accumulate(n.id, scale_raw(n.grad, c));
    });
}

Var add_rowwise(const Var& m, const Var& v) {
    return make_node(add_rowwise_raw(m->value, v->value), "add_rowwise", {m, v}, [m, v](Node& n) {
        if (m->requires_grad) m->accumulate(n.id, n.grad);
        if (v->requires_grad) {
            const std::size_t rows = n.grad.rows(), cols = n.grad.cols();
            Array dv({cols});
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) dv[j] += n.grad[i * cols + j];
            v->accumulate(n.id, std::move(dv));
        }
    });
}

Var relu(const Var& a) {
    return make_node(relu_raw(a->value), "relu", {a}, [a](Node& n) {
        if (!a->requires_grad) return;
        Array da = n.grad;
        for (std::size_t i = 0; i < da.size(); ++i) {
            if (a->value[i] <= 0.0) da[i] = 0.0;
        }
        a->accumulate(n.id, std::move(da));
    });
}

Var softmax(const Var& x, std::size_t axis) {
    Array out = softmax_raw(x->value, axis);
    return make_node(std::move(out), "softmax", {x}, [x, axis](Node& n) {
        if (!x->requires_grad) return;
        const Array& s = n.value;
        const Array& g = n.grad;
        Array dx = Array::zeros_like(s);
        auto slice_jac = [&](std::size_t count, std::size_t stride, std::size_t base) {
            double dot = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t idx = base + i * stride;
                dot += g[idx] * s[idx];
            }
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t idx = base + i * stride;
                dx[idx] = s[idx] * (g[idx] - dot);
            }
        };
        if (s.ndim() == 1) {
            slice_jac(s.size(), 1, 0);
        } else if (axis == 1) {
            for (std::size_t r = 0; r < s.rows(); ++r) slice_jac(s.cols(), 1, r * s.cols());
        } else {
            for (std::size_t c = 0; c < s.cols(); ++c) slice_jac(s.rows(), s.cols(), c);
        }
        x->accumulate(n.id, std::move(dx));
    });
}

namespace {

void require_2d_axis(const Var& x, std::size_t axis, const char* op) {
    if (x->value.ndim() != 2 || axis > 1) {
        throw std::invalid_argument(std::string(op) + ": want 2-D input and axis 0/1");
    }
}

}  // namespace

Var mean_axis(const Var& x, std::size_t axis) {
    require_2d_axis(x, axis, "mean_axis");
    const std::size_t n = x->value.rows(), k = x->value.cols();
    Array out({axis == 0 ? k : n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) out[axis == 0 ? j : i] += x->value[i * k + j];
    const double inv = 1.0 / static_cast<double>(axis == 0 ? n : k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
    return make_node(std::move(out), "mean_axis", {x}, [x, axis, n, k, inv](Node& node) {
        if (!x->requires_grad) return;
        Array dx({n, k});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j)
                dx[i * k + j] = node.grad[axis == 0 ? j : i] * inv;
        x->accumulate(node.id, std::move(dx));
    });
}

Var std_axis(const Var& x, std::size_t axis) {
    require_2d_axis(x, axis, "std_axis");
    const std::size_t n = x->value.rows(), k = x->value.cols();
    const std::size_t out_len = axis == 0 ? k : n;
    const std::size_t count = axis == 0 ? n : k;
    Array mean({out_len}), dev({out_len});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) mean[axis == 0 ? j : i] += x->value[i * k + j];
    for (std::size_t i = 0; i < out_len; ++i) mean[i] /= static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t o = axis == 0 ? j : i;
            const double d = x->value[i * k + j] - mean[o];
            dev[o] += d * d;
        }
    for (std::size_t i = 0; i < out_len; ++i)
        dev[i] = std::sqrt(dev[i] / static_cast<double>(count));
    Array sigma = dev;
    return make_node(std::move(dev), "std_axis", {x},
                     [x, axis, n, k, count, mean, sigma](Node& node) {
                         if (!x->requires_grad) return;
                         Array dx({n, k});
                         for (std::size_t i = 0; i < n; ++i)
                             for (std::size_t j = 0; j < k; ++j) {
                                 const std::size_t o = axis == 0 ? j : i;
                                 if (sigma[o] == 0.0) continue;  // subgradient 0 at zero variance
                                 dx[i * k + j] = node.grad[o] * (x->value[i * k + j] - mean[o]) /
                                                 (static_cast<double>(count) * sigma[o]);
                             }
                         x->accumulate(node.id, std::move(dx));
                     });
}

Var max_axis(const Var& x, std::size_t axis) {
    require_2d_axis(x, axis, "max_axis");
    const std::size_t n = x->value.rows(), k = x->value.cols();
    const std::size_t out_len = axis == 0 ? k : n;
    Array out({out_len});
    std::vector<std::size_t> argmax(out_len, 0);
    for (std::size_t o = 0; o < out_len; ++o) {
        const std::size_t count = axis == 0 ? n : k;
        double best = 0.0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < count; ++i) {
            const double v = axis == 0 ? x->value[i * k + o] : x->value[o * k + i];
            if (i == 0 || v > best) {  // ties keep the lowest index
                best = v;
                best_i = i;
            }
        }
        out[o] = best;
        argmax[o] = best_i;
    }
    return make_node(std::move(out), "max_axis", {x}, [x, axis, n, k, argmax](Node& node) {
        if (!x->requires_grad) return;
        Array dx({n, k});
        for (std::size_t o = 0; o < argmax.size(); ++o) {
            const std::size_t i = argmax[o];
            const std::size_t idx = axis == 0 ? i * k + o : o * k + i;
            dx[idx] = node.grad[o];
        }
        x->accumulate(node.id, std::move(dx));
    });
}

Var sum_all(const Var& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x->value.size(); ++i) s += x->value[i];
    return make_node(Array::scalar(s), "sum_all", {x}, [x](Node& n) {
        if (!x->requires_grad) return;
        Array dx = Array::zeros_like(x->value);
        dx.fill(n.grad.item());
        x->accumulate(n.id, std::move(dx));
    });
}

Var mean_all(const Var& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x->value.size(); ++i) s += x->value[i];
    const double inv = 1.0 / static_cast<double>(x->value.size());
    return make_node(Array::scalar(s * inv), "mean_all", {x}, [x, inv](Node& n) {
        if (!x->requires_grad) return;
        Array dx = Array::zeros_like(x->value);
        dx.fill(n.grad.item() * inv);
        x->accumulate(n.id, std::move(dx));
    });
}

Var l2_norm(const Var& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x->value.size(); ++i) s += x->value[i] * x->value[i];
    const double norm = std::sqrt(s);
    return make_node(Array::scalar(norm), "l2_norm", {x}, [x, norm](Node& n) {
        if (!x->requires_grad) return;
        Array dx = Array::zeros_like(x->value);
        if (norm > 0.0) {
            const double g = n.grad.item() / norm;
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g * x->value[i];
        }
        x->accumulate(n.id, std::move(dx));
    });
}

Var concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no parts");
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p->value.ndim() != 1) throw std::invalid_argument("concat: parts must be 1-D");
        total += p->value.size();
    }
    Array out({total});
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p->value.size(); ++i) out[off + i] = p->value[i];
        off += p->value.size();
    }
    std::vector<Var> parents = parts;
    return make_node(std::move(out), "concat", std::move(parents), [parts](Node& n) {
        std::size_t off = 0;
        for (const auto& p : parts) {
            const std::size_t len = p->value.size();
            if (p->requires_grad) {
                Array dp({len});
                for (std::size_t i = 0; i < len; ++i) dp[i] = n.grad[off + i];
                p->accumulate(n.id, std::move(dp));
            }
            off += len;
        }
    });
}

Var slice(const Var& x, std::size_t lo, std::size_t hi) {
    if (x->value.ndim() != 1 || lo >= hi || hi > x->value.size()) {
        throw std::invalid_argument("slice: bad range");
    }
    Array out({hi - lo});
    for (std::size_t i = lo; i < hi; ++i) out[i - lo] = x->value[i];
    return make_node(std::move(out), "slice", {x}, [x, lo, hi](Node& n) {
        if (!x->requires_grad) return;
        Array dx = Array::zeros_like(x->value);
        for (std::size_t i = lo; i < hi; ++i) dx[i] = n.grad[i - lo];
        x->accumulate(n.id, std::move(dx));
    });
}

Var scalar_mul(const Var& s, const Var& x) {
    if (s->value.size() != 1) throw std::invalid_argument("scalar_mul: s must be a single element");
    const double sv = s->value.item();
    return make_node(scale_raw(x->value, sv), "scalar_mul", {s, x}, [s, x, sv](Node& n) {
        if (s->requires_grad) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n.grad.size(); ++i) dot += n.grad[i] * x->value[i];
            s->accumulate(n.id, Array::scalar(dot));
        }
        if (x->requires_grad) x->accumulate(n.id, scale_raw(n.grad, sv));
    });
}

Var cross_entropy_mean(const Var& logits, const std::vector<int>& targets) {
    if (logits->value.ndim() != 2) throw std::invalid_argument("cross_entropy: logits must be 2-D");
    const std::size_t n = logits->value.rows(), k = logits->value.cols();
    if (targets.size() != n) throw std::invalid_argument("cross_entropy: target count mismatch");
    for (int t : targets) {
        if (t < 0 || static_cast<std::size_t>(t) >= k) {
            throw std::invalid_argument("cross_entropy: target out of range");
        }
    }
    Array probs = softmax_raw(logits->value, 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logits->value.data() + i * k;
        double mx = row[0];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
        loss += mx + std::log(sum) - row[targets[i]];
    }
    loss /= static_cast<double>(n);
    return make_node(Array::scalar(loss), "cross_entropy", {logits},
                     [logits, targets, probs, n, k](Node& node) {
                         if (!logits->requires_grad) return;
                         const double g = node.grad.item() / static_cast<double>(n);
                         Array dl = probs;
                         for (std::size_t i = 0; i < n; ++i) {
                             dl[i * k + static_cast<std::size_t>(targets[i])] -= 1.0;
                             for (std::size_t j = 0; j < k; ++j) dl[i * k + j] *= g;
                         }
                         logits->accumulate(node.id, std::move(dl));
                     });
}

Var l1_rows_mean(const Var& pred, const Array& target, const std::vector<std::size_t>& rows,
                 double denom) {
    if (!pred->value.same_shape(target)) throw std::invalid_argument("l1_rows_mean: shape mismatch");
    if (pred->value.ndim() != 2) throw std::invalid_argument("l1_rows_mean: want 2-D");
    if (denom <= 0.0) throw std::invalid_argument("l1_rows_mean: denom must be positive");
    const std::size_t k = pred->value.cols();
    double loss = 0.0;
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < k; ++j) {
            loss += std::abs(pred->value[r * k + j] - target[r * k + j]);
        }
    }
    loss /= denom;
    return make_node(Array::scalar(loss), "l1_rows_mean", {pred},
                     [pred, target, rows, denom, k](Node& node) {
                         if (!pred->requires_grad) return;
                         const double g = node.grad.item() / denom;
                         Array dp = Array::zeros_like(pred->value);
                         for (std::size_t r : rows) {
                             for (std::size_t j = 0; j < k; ++j) {
                                 const double d = pred->value[r * k + j] - target[r * k + j];
                                 dp[r * k + j] = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
                             }
                         }
                         pred->accumulate(node.id, std::move(dp));
                     });
}

Var entropy(const Var& w) {
    double h = 0.0;
    for (std::size_t i = 0; i < w->value.size(); ++i) {
        const double v = w->value[i];
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("entropy: component outside [0,1]");
        if (v > 0.0) h -= v * std::log(v);
    }
    return make_node(Array::scalar(h), "entropy", {w}, [w](Node& n) {
        if (!w->requires_grad) return;
        const double g = n.grad.item();
        Array dw = Array::zeros_like(w->value);
        for (std::size_t i = 0; i < dw.size(); ++i) {
            const double v = w->value[i];
            if (v > 0.0) dw[i] = -(std::log(v) + 1.0) * g;
        }
        w->accumulate(n.id, std::move(dw));
    });
}

Var vecmat(const Var& v, const Var& m) {
    if (v->value.ndim() != 1) throw std::invalid_argument("vecmat: v must be 1-D");
    const std::size_t k = v->value.size();
    Var row = reshape(v, {1, k});
    Var prod = matmul(row, m);
    return reshape(prod, {prod->value.cols()});
}

Var dense_layer(const Var& x, const Var& w, const Var& b) { return add(vecmat(x, w), b); }

}  // namespace xview::num
