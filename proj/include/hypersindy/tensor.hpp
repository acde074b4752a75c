// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hypersindy {

namespace detail {
struct TensorImpl {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad; // empty until touched
    bool requires_grad = false;
};
} // namespace detail

// Dense row-major tensor of 64-bit floats. Copies share storage (handle
// semantics); use clone() for a deep copy. Gradient buffers are allocated
// lazily and zero-filled on first access.
class Tensor {
public:
    Tensor() : impl_(std::make_shared<detail::TensorImpl>()) {}

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    const std::vector<int>& shape() const { return impl_->shape; }
    std::size_t size() const { return impl_->data.size(); }
    int dim() const { return static_cast<int>(impl_->shape.size()); }

    std::span<double> data() { return impl_->data; }
    std::span<const double> data() const { return impl_->data; }
    double* ptr() { return impl_->data.data(); }
    const double* ptr() const { return impl_->data.data(); }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool value) { impl_->requires_grad = value; }

    bool grad_allocated() const { return !impl_->grad.empty(); }
    std::span<double> grad();             // allocates zeros on first use
    std::span<const double> grad() const; // const access also allocates
    void zero_grad();
    void drop_grad() { impl_->grad.clear(); }

    // True when every element is finite (no NaN/Inf).
    bool all_finite() const;

    // Value of a single-element tensor.
    double item() const;

    Tensor clone() const;

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    std::string shape_str() const;

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

enum class OpKind {
    matmul, // 2-D, or batched when both inputs are 3-D
    add,
    subtract,
    multiply,
    affine, // scale * x + shift; scalar multiply is affine with shift 0
    exp,
    log,
    sigmoid,
    elu,
    square,
    clamp01,
    sum,
    mean,
    reshape,
};

const char* op_name(OpKind kind);

// Define-by-run tape. Records an op node whenever an input requires grad;
// backward() walks the records once in reverse insertion order. A Graph and
// the tensors flowing through it belong to a single thread.
class Graph {
public:
    Tensor matmul(const Tensor& a, const Tensor& b);
    // add/subtract/multiply allow the second operand's shape to be a trailing
    // suffix of the first's (broadcast over leading axes: bias add, mask
    // application); any other mismatch is a ShapeError.
    Tensor add(const Tensor& a, const Tensor& b);
    Tensor subtract(const Tensor& a, const Tensor& b);
    Tensor multiply(const Tensor& a, const Tensor& b);
    Tensor affine(const Tensor& x, double scale, double shift = 0.0);
    Tensor scale(const Tensor& x, double factor) { return affine(x, factor, 0.0); }
    Tensor exp(const Tensor& x);
    Tensor log(const Tensor& x);
    Tensor sigmoid(const Tensor& x);
    Tensor elu(const Tensor& x);
    Tensor square(const Tensor& x);
    Tensor clamp01(const Tensor& x);
    Tensor sum(const Tensor& x);
    Tensor mean(const Tensor& x);
    Tensor reshape(const Tensor& x, std::vector<int> shape);

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
    // requires-grad tensor reachable from the tape. Loss must be scalar.
    void backward(const Tensor& loss);

    std::size_t node_count() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        OpKind kind;
        std::vector<Tensor> inputs;
        Tensor output;
        double a = 0.0;
        double b = 0.0;
    };

    void record(OpKind kind, std::vector<Tensor> inputs, const Tensor& output,
                double a = 0.0, double b = 0.0);
    void backward_node(const Node& node);

    std::vector<Node> nodes_;
};

} // namespace hypersindy
