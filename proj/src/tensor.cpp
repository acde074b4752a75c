// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/tensor.hpp"

#include "hypersindy/errors.hpp"
#include "hypersindy/kernels.hpp"

#include <cmath>
#include <sstream>

namespace hypersindy {
namespace {

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int s : shape) {
        if (s < 0) throw ShapeError("negative extent in shape");
        n *= static_cast<std::size_t>(s);
    }
    return n;
}

std::string format_shape(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

[[noreturn]] void shape_fail(OpKind kind, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op_name(kind)) + ": incompatible shapes " + a.shape_str() +
                     " and " + b.shape_str());
}

// True when small's shape equals the trailing suffix of big's shape.
bool is_suffix_shape(const std::vector<int>& big, const std::vector<int>& small) {
    if (small.size() > big.size()) return false;
    const std::size_t off = big.size() - small.size();
    for (std::size_t i = 0; i < small.size(); ++i) {
        if (big[off + i] != small[i]) return false;
    }
    return true;
}

} // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    Tensor t;
    const std::size_t n = shape_numel(shape);
    t.impl_->shape = std::move(shape);
    t.impl_->data.assign(n, 0.0);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.impl_->data) v = value;
    return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("from_data: " + std::to_string(data.size()) +
                         " values do not fill shape " + format_shape(shape));
    }
    Tensor t;
    t.impl_->shape = std::move(shape);
    t.impl_->data = std::move(data);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

std::span<double> Tensor::grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

std::span<const double> Tensor::grad() const {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

void Tensor::zero_grad() {
    impl_->grad.assign(impl_->data.size(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : impl_->data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::item() const {
    if (size() != 1) {
        throw ContractError("item() on tensor of shape " + shape_str());
    }
    return impl_->data[0];
}

Tensor Tensor::clone() const {
    Tensor t;
    *t.impl_ = *impl_;
    return t;
}

std::string Tensor::shape_str() const { return format_shape(impl_->shape); }

const char* op_name(OpKind kind) {
    switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::subtract: return "subtract";
    case OpKind::multiply: return "multiply";
    case OpKind::affine: return "affine";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::elu: return "elu";
    case OpKind::square: return "square";
    case OpKind::clamp01: return "clamp01";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::reshape: return "reshape";
    }
    return "?";
}

void Graph::record(OpKind kind, std::vector<Tensor> inputs, const Tensor& output, double a,
                   double b) {
    bool needed = false;
    for (const Tensor& t : inputs) needed = needed || t.requires_grad();
    if (!needed) return;
    Tensor out = output; // handles share storage
    out.set_requires_grad(true);
    nodes_.push_back(Node{kind, std::move(inputs), std::move(out), a, b});
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
    const auto& ops = kernels::active();
    Tensor out;
    if (a.dim() == 2 && b.dim() == 2) {
        const int m = a.shape()[0], k = a.shape()[1];
        if (b.shape()[0] != k) shape_fail(OpKind::matmul, a, b);
        const int n = b.shape()[1];
        out = Tensor::zeros({m, n});
        ops.matmul_nn(a.ptr(), b.ptr(), out.ptr(), m, k, n, false);
    } else if (a.dim() == 3 && b.dim() == 3) {
        const int batch = a.shape()[0], m = a.shape()[1], k = a.shape()[2];
        if (b.shape()[0] != batch || b.shape()[1] != k) shape_fail(OpKind::matmul, a, b);
        const int n = b.shape()[2];
        out = Tensor::zeros({batch, m, n});
        for (int i = 0; i < batch; ++i) {
            ops.matmul_nn(a.ptr() + static_cast<std::size_t>(i) * m * k,
                          b.ptr() + static_cast<std::size_t>(i) * k * n,
                          out.ptr() + static_cast<std::size_t>(i) * m * n, m, k, n, false);
        }
    } else {
        shape_fail(OpKind::matmul, a, b);
    }
    record(OpKind::matmul, {a, b}, out);
    return out;
}

namespace {

enum class Binary { add, sub, mul };

Tensor binary_forward(Binary op, OpKind kind, const Tensor& a, const Tensor& b) {
    const auto& ops = kernels::active();
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.size();
    if (a.shape() == b.shape()) {
        switch (op) {
        case Binary::add: ops.add(a.ptr(), b.ptr(), out.ptr(), n); break;
        case Binary::sub: ops.sub(a.ptr(), b.ptr(), out.ptr(), n); break;
        case Binary::mul: ops.mul(a.ptr(), b.ptr(), out.ptr(), n); break;
        }
        return out;
    }
    if (!is_suffix_shape(a.shape(), b.shape()) || b.size() == 0) shape_fail(kind, a, b);
    const std::size_t block = b.size();
    for (std::size_t off = 0; off < n; off += block) {
        switch (op) {
        case Binary::add: ops.add(a.ptr() + off, b.ptr(), out.ptr() + off, block); break;
        case Binary::sub: ops.sub(a.ptr() + off, b.ptr(), out.ptr() + off, block); break;
        case Binary::mul: ops.mul(a.ptr() + off, b.ptr(), out.ptr() + off, block); break;
        }
    }
    return out;
}

} // namespace

Tensor Graph::add(const Tensor& a, const Tensor& b) {
    Tensor out = binary_forward(Binary::add, OpKind::add, a, b);
    record(OpKind::add, {a, b}, out);
    return out;
}

Tensor Graph::subtract(const Tensor& a, const Tensor& b) {
    Tensor out = binary_forward(Binary::sub, OpKind::subtract, a, b);
    record(OpKind::subtract, {a, b}, out);
    return out;
}

Tensor Graph::multiply(const Tensor& a, const Tensor& b) {
    Tensor out = binary_forward(Binary::mul, OpKind::multiply, a, b);
    record(OpKind::multiply, {a, b}, out);
    return out;
}

Tensor Graph::affine(const Tensor& x, double scale, double shift) {
    Tensor out = Tensor::zeros(x.shape());
    kernels::active().affine(x.ptr(), scale, shift, out.ptr(), x.size());
    record(OpKind::affine, {x}, out, scale, shift);
    return out;
}

Tensor Graph::exp(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* src = x.ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) dst[i] = std::exp(src[i]);
    record(OpKind::exp, {x}, out);
    return out;
}

Tensor Graph::log(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* src = x.ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (src[i] <= 0.0) {
            throw DomainError("log: nonpositive input " + std::to_string(src[i]));
        }
        dst[i] = std::log(src[i]);
    }
    record(OpKind::log, {x}, out);
    return out;
}

Tensor Graph::sigmoid(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* src = x.ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) dst[i] = 1.0 / (1.0 + std::exp(-src[i]));
    record(OpKind::sigmoid, {x}, out);
    return out;
}

Tensor Graph::elu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* src = x.ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) {
        dst[i] = src[i] > 0.0 ? src[i] : std::expm1(src[i]);
    }
    record(OpKind::elu, {x}, out);
    return out;
}

Tensor Graph::square(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    kernels::active().mul(x.ptr(), x.ptr(), out.ptr(), x.size());
    record(OpKind::square, {x}, out);
    return out;
}

Tensor Graph::clamp01(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* src = x.ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) {
        dst[i] = src[i] < 0.0 ? 0.0 : (src[i] > 1.0 ? 1.0 : src[i]);
    }
    record(OpKind::clamp01, {x}, out);
    return out;
}

Tensor Graph::sum(const Tensor& x) {
    double s = 0.0;
    const double* src = x.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) s += src[i];
    Tensor out = Tensor::scalar(s);
    record(OpKind::sum, {x}, out);
    return out;
}

Tensor Graph::mean(const Tensor& x) {
    if (x.size() == 0) throw ContractError("mean of empty tensor");
    double s = 0.0;
    const double* src = x.ptr();
    for (std::size_t i = 0; i < x.size(); ++i) s += src[i];
    Tensor out = Tensor::scalar(s / static_cast<double>(x.size()));
    record(OpKind::mean, {x}, out);
    return out;
}

Tensor Graph::reshape(const Tensor& x, std::vector<int> shape) {
    const std::size_t n = shape_numel(shape);
    if (n != x.size()) {
        throw ShapeError("reshape: " + x.shape_str() + " to " + format_shape(shape));
    }
    Tensor out = Tensor::from_data(std::move(shape),
                                   std::vector<double>(x.data().begin(), x.data().end()));
    record(OpKind::reshape, {x}, out);
    return out;
}

void Graph::backward(const Tensor& loss) {
    if (loss.size() != 1) {
        throw ContractError("backward: loss must be scalar, got " + loss.shape_str());
    }
    if (nodes_.empty()) {
        throw ContractError("backward: empty graph");
    }
    Tensor seed = loss;
    seed.grad()[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        backward_node(*it);
    }
}

namespace {

// Accumulate `grad_big` (laid out like big) into the gradient of a trailing
// suffix operand by summing over the leading axes.
void reduce_to_suffix(const double* grad_big, std::size_t big_size, std::span<double> grad_small) {
    const std::size_t block = grad_small.size();
    const auto& ops = kernels::active();
    for (std::size_t off = 0; off < big_size; off += block) {
        ops.acc(grad_big + off, grad_small.data(), block);
    }
}

} // namespace

void Graph::backward_node(const Node& node) {
    const auto& ops = kernels::active();
    Tensor out = node.output;
    const double* gout = out.grad().data();
    const std::size_t out_size = out.size();

    auto input = [&](std::size_t i) -> Tensor { return node.inputs[i]; };
    auto wants = [&](std::size_t i) { return node.inputs[i].requires_grad(); };

    switch (node.kind) {
    case OpKind::matmul: {
        Tensor a = input(0), b = input(1);
        if (a.dim() == 2) {
            const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
            if (wants(0)) ops.matmul_nt(gout, b.ptr(), a.grad().data(), m, n, k, true);
            if (wants(1)) ops.matmul_tn(a.ptr(), gout, b.grad().data(), k, m, n, true);
        } else {
            const int batch = a.shape()[0], m = a.shape()[1], k = a.shape()[2], n = b.shape()[2];
            for (int i = 0; i < batch; ++i) {
                const double* g = gout + static_cast<std::size_t>(i) * m * n;
                if (wants(0)) {
                    ops.matmul_nt(g, b.ptr() + static_cast<std::size_t>(i) * k * n,
                                  a.grad().data() + static_cast<std::size_t>(i) * m * k, m, n, k,
                                  true);
                }
                if (wants(1)) {
                    ops.matmul_tn(a.ptr() + static_cast<std::size_t>(i) * m * k, g,
                                  b.grad().data() + static_cast<std::size_t>(i) * k * n, k, m, n,
                                  true);
                }
            }
        }
        break;
    }
    case OpKind::add: {
        Tensor a = input(0), b = input(1);
        if (wants(0)) ops.acc(gout, a.grad().data(), out_size);
        if (wants(1)) {
            if (b.size() == out_size) {
                ops.acc(gout, b.grad().data(), out_size);
            } else {
                reduce_to_suffix(gout, out_size, b.grad());
            }
        }
        break;
    }
    case OpKind::subtract: {
        Tensor a = input(0), b = input(1);
        if (wants(0)) ops.acc(gout, a.grad().data(), out_size);
        if (wants(1)) {
            if (b.size() == out_size) {
                ops.axpy(-1.0, gout, b.grad().data(), out_size);
            } else {
                Tensor neg = Tensor::zeros(out.shape());
                ops.affine(gout, -1.0, 0.0, neg.ptr(), out_size);
                reduce_to_suffix(neg.ptr(), out_size, b.grad());
            }
        }
        break;
    }
    case OpKind::multiply: {
        Tensor a = input(0), b = input(1);
        if (wants(0)) {
            // d/da = gout * b, with b tiled when broadcast
            if (b.size() == out_size) {
                Tensor tmp = Tensor::zeros(out.shape());
                ops.mul(gout, b.ptr(), tmp.ptr(), out_size);
                ops.acc(tmp.ptr(), a.grad().data(), out_size);
            } else {
                Tensor tmp = Tensor::zeros(out.shape());
                const std::size_t block = b.size();
                for (std::size_t off = 0; off < out_size; off += block) {
                    ops.mul(gout + off, b.ptr(), tmp.ptr() + off, block);
                }
                ops.acc(tmp.ptr(), a.grad().data(), out_size);
            }
        }
        if (wants(1)) {
            Tensor tmp = Tensor::zeros(out.shape());
            ops.mul(gout, a.ptr(), tmp.ptr(), out_size);
            if (b.size() == out_size) {
                ops.acc(tmp.ptr(), b.grad().data(), out_size);
            } else {
                reduce_to_suffix(tmp.ptr(), out_size, b.grad());
            }
        }
        break;
    }
    case OpKind::affine: {
        Tensor x = input(0);
        if (wants(0)) ops.axpy(node.a, gout, x.grad().data(), out_size);
        break;
    }
    case OpKind::exp: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double* y = out.ptr();
            for (std::size_t i = 0; i < out_size; ++i) g[i] += gout[i] * y[i];
        }
        break;
    }
    case OpKind::log: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double* xv = x.ptr();
            for (std::size_t i = 0; i < out_size; ++i) g[i] += gout[i] / xv[i];
        }
        break;
    }
    case OpKind::sigmoid: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double* y = out.ptr();
            for (std::size_t i = 0; i < out_size; ++i) g[i] += gout[i] * y[i] * (1.0 - y[i]);
        }
        break;
    }
    case OpKind::elu: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double* xv = x.ptr();
            for (std::size_t i = 0; i < out_size; ++i) {
                g[i] += gout[i] * (xv[i] > 0.0 ? 1.0 : std::exp(xv[i]));
            }
        }
        break;
    }
    case OpKind::square: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double* xv = x.ptr();
            for (std::size_t i = 0; i < out_size; ++i) g[i] += 2.0 * gout[i] * xv[i];
        }
        break;
    }
    case OpKind::clamp01: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double* xv = x.ptr();
            for (std::size_t i = 0; i < out_size; ++i) {
                if (xv[i] > 0.0 && xv[i] < 1.0) g[i] += gout[i];
            }
        }
        break;
    }
    case OpKind::sum: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double gs = gout[0];
            for (std::size_t i = 0; i < x.size(); ++i) g[i] += gs;
        }
        break;
    }
    case OpKind::mean: {
        Tensor x = input(0);
        if (wants(0)) {
            auto g = x.grad();
            const double gs = gout[0] / static_cast<double>(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) g[i] += gs;
        }
        break;
    }
    case OpKind::reshape: {
        Tensor x = input(0);
        if (wants(0)) ops.acc(gout, x.grad().data(), out_size);
        break;
    }
    }
}

} // namespace hypersindy
