// tensor.hpp — dense float64 tensor with paired gradient buffer.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gmc/common.hpp"

namespace gmc {

struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty for constants

    Tensor() = default;
    explicit Tensor(std::vector<int> dims, bool with_grad = true);

    std::size_t size() const { return values.size(); }
    bool has_grad() const { return !grad.empty(); }

    void alloc_grad();
    void zero_grad();
    void fill(double v);

    double& at(int c, int y, int x, int h, int w) {
        return values[(static_cast<std::size_t>(c) * h + y) * w + x];
    }
    double at(int c, int y, int x, int h, int w) const {
        return values[(static_cast<std::size_t>(c) * h + y) * w + x];
    }

    /// Throws InternalError if any value (or gradient) is non-finite.
    void check_finite(const std::string& what) const;
};

std::size_t shape_size(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

}  // namespace gmc
