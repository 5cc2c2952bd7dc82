#include "gmc/tensor.hpp"

#include <cmath>
#include <sstream>

namespace gmc {

std::size_t shape_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ConfigError("tensor dims must be positive, got " + shape_str(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream ss;
    ss << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) ss << (i ? "," : "") << shape[i];
    ss << "]";
    return ss.str();
}

Tensor::Tensor(std::vector<int> dims, bool with_grad) : shape(std::move(dims)) {
    values.assign(shape_size(shape), 0.0);
    if (with_grad) grad.assign(values.size(), 0.0);
}

void Tensor::alloc_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

void Tensor::fill(double v) {
    std::fill(values.begin(), values.end(), v);
}

void Tensor::check_finite(const std::string& what) const {
    for (double v : values)
        if (!std::isfinite(v)) throw InternalError("non-finite value in " + what);
    for (double g : grad)
        if (!std::isfinite(g)) throw InternalError("non-finite gradient in " + what);
}

}  // namespace gmc
