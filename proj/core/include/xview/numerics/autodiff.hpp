#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xview/numerics/array.hpp"

namespace xview::num {

class Node;
using Var = std::shared_ptr<Node>;

// One vertex of the per-step computation graph. Graphs are rebuilt on every
// forward pass and freed when the last Var goes out of scope.
class Node {
public:
    Array value;
    Array grad;  // zero until backward() reaches this node
    bool requires_grad = false;
    const char* op = "leaf";
    std::uint64_t id = 0;  // creation order; parents always precede children
    std::vector<Var> parents;
    // Reads this->grad and submits one delta per parent via accumulate().
    std::function<void(Node&)> backward_fn;

    // Gradient contributions buffered as (child id, delta) and reduced in
    // child-id order, which makes the accumulated grad independent of the
    // traversal order used by backward().
    std::vector<std::pair<std::uint64_t, Array>> pending;

    void accumulate(std::uint64_t child_id, Array delta);
    void flush_pending();
};

Var make_leaf(Array value, bool requires_grad = false);
Var make_constant(Array value);
Var make_scalar(double v);

enum class TopoOrder { creation, kahn };

// Reverse-mode sweep from a scalar root. Both traversal orders are valid
// topological orders and produce bit-identical gradients.
void backward(const Var& root, TopoOrder order = TopoOrder::creation);

// ---- differentiable operations ----
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, std::vector<std::size_t> shape);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var add_rowwise(const Var& m, const Var& v);
Var relu(const Var& a);
Var softmax(const Var& x, std::size_t axis);

// Reductions over a 2-D array's axis; result is 1-D. std uses the population
// convention (divide by n) and is 0 for a length-1 axis. The max gradient is
// routed to the lowest-index arg-max on ties.
Var mean_axis(const Var& x, std::size_t axis);
Var std_axis(const Var& x, std::size_t axis);
Var max_axis(const Var& x, std::size_t axis);

Var sum_all(const Var& x);
Var mean_all(const Var& x);
Var l2_norm(const Var& x);

Var concat(const std::vector<Var>& parts);         // 1-D concatenation
Var slice(const Var& x, std::size_t lo, std::size_t hi);  // 1-D [lo,hi)
Var scalar_mul(const Var& s, const Var& x);        // s is a single element

// Mean cross-entropy of row-wise logits against integer targets.
Var cross_entropy_mean(const Var& logits, const std::vector<int>& targets);

// Sum of |pred-target| over the rows selected by `rows`, divided by `denom`.
Var l1_rows_mean(const Var& pred, const Array& target, const std::vector<std::size_t>& rows,
                 double denom);

// Shannon entropy -sum(w log w), natural log, 0*log(0) := 0.
Var entropy(const Var& w);

// Composite helpers.
Var vecmat(const Var& v, const Var& m);                      // (K,) x (K,N) -> (N,)
Var dense_layer(const Var& x, const Var& w, const Var& b);   // (I,) x (I,O) + (O,)

}  // namespace xview::num
