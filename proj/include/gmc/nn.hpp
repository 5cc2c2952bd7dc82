// nn.hpp — minimal deterministic differentiable-network engine.
//
// Layers operate on [C,H,W] float64 tensors. Each layer caches its forward
// inputs so backward can be called once per forward. Everything is single
// threaded and bit-reproducible for a fixed seed.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gmc/common.hpp"
#include "gmc/tensor.hpp"

namespace gmc::nn {

enum class LayerKind { Conv, Relu, Sigmoid, Softmax, MaxPool, Upsample, Tap };

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    int kernel = 0;        // conv
    int out_channels = 0;  // conv
    int stride = 1;        // conv, pool
    int dilation = 1;      // conv
    int padding = -1;      // conv, pool; -1 = same-shape default for conv, 0 for pool
    int window = 0;        // pool
    int factor = 0;        // upsample

    std::string str() const;
};

/// Parses a schedule string, e.g. "conv3c8d2,relu,pool2s1p1,up2,tap".
/// Tokens: convKcC[dD][sS][pP] | relu | sigmoid | softmax | poolWsS[pP] | upF | tap
std::vector<LayerSpec> parse_schedule(const std::string& text);

// ---- stateless forward/backward kernels ----

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int dilation, int padding);
void conv2d_backward(const Tensor& input, const Tensor& kernel, const Tensor& grad_out, int stride,
                     int dilation, int padding, Tensor* grad_input, Tensor* grad_kernel,
                     Tensor* grad_bias);

Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);
/// Per-pixel softmax over the channel axis of a [K,H,W] tensor, K >= 2.
Tensor softmax_channels(const Tensor& input);

struct PoolResult {
    Tensor output;
    std::vector<std::size_t> argmax;  // flat input index per output element
};
/// Max pooling with -inf padding; ties go to the first index in row-major order.
PoolResult maxpool(const Tensor& input, int window, int stride, int padding);

/// Integer-factor bilinear upsampling, align-corners false.
Tensor upsample_bilinear(const Tensor& input, int factor);
Tensor upsample_bilinear_backward(const Tensor& grad_out, int in_h, int in_w, int factor);

// ---- losses (value + gradient w.r.t. logits) ----

struct LossResult {
    double loss = 0.0;
    Tensor grad;  // dLoss / dLogits
};

/// Mean over pixels of -log softmax(logits)[label]. labels are row-major H*W class ids in [0,K).
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

/// Class-balanced sigmoid cross entropy over a [1,H,W] logit map:
///   L = -beta * sum_pos log s(x) - (1-beta) * sum_neg log(1-s(x)),
/// beta = #negative / #total.
LossResult balanced_sigmoid_cross_entropy(const Tensor& logits, const std::vector<std::uint8_t>& edges);

// ---- layer objects ----

class NetworkParams;

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& input) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual void collect_params(NetworkParams&, const std::string&) {}
    virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
};

/// Ordered, uniquely named view over parameter tensors. Non-owning.
class NetworkParams {
public:
    void add(const std::string& name, Tensor* t);
    Tensor* find(const std::string& name) const;
    const std::vector<std::pair<std::string, Tensor*>>& entries() const { return entries_; }
    std::size_t total_values() const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, Tensor*>> entries_;
};

class ConvLayer : public Layer {
public:
    ConvLayer(int in_channels, const LayerSpec& spec, Rng& rng);
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(NetworkParams& out, const std::string& prefix) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

    Tensor kernel;  // [F,C,k,k]
    Tensor bias;    // [F]
    int stride, dilation, padding;

private:
    Tensor input_;
};

class ReluLayer : public Layer {
public:
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

private:
    Tensor input_;
};

class SigmoidLayer : public Layer {
public:
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

private:
    Tensor output_;
};

class SoftmaxLayer : public Layer {
public:
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

private:
    Tensor output_;
};

class MaxPoolLayer : public Layer {
public:
    explicit MaxPoolLayer(const LayerSpec& spec);
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

    int window, stride, padding;

private:
    std::vector<int> in_shape_;
    std::vector<std::size_t> argmax_;
};

class UpsampleLayer : public Layer {
public:
    explicit UpsampleLayer(int factor) : factor_(factor) {}
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<int> output_shape(const std::vector<int>& in) const override;

private:
    int factor_;
    std::vector<int> in_shape_;
};

/// A straight chain of layers.
class Sequential {
public:
    Sequential() = default;
    /// Builds from specs (Tap not allowed here). in_channels fixes the first conv.
    Sequential(const std::vector<LayerSpec>& specs, int in_channels, Rng& rng);

    Tensor forward(const Tensor& input);
    Tensor backward(const Tensor& grad_out);
    void collect_params(NetworkParams& out, const std::string& prefix);
    std::vector<int> output_shape(std::vector<int> in) const;
    int out_channels(int in_channels) const;

    std::vector<std::unique_ptr<Layer>> layers;
};

// ---- optimization and verification ----

/// SGD with classical momentum: v <- momentum*v - lr*g; p <- p + v.
class SgdOptimizer {
public:
    SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
    void step(NetworkParams& params);

private:
    double lr_, momentum_;
    std::vector<std::vector<double>> velocity_;  // parallel to params.entries()
};

/// Central-difference gradient verification.
///
/// loss_fn must (re)run forward + backward, accumulating parameter gradients
/// into zeroed grad buffers, and return the scalar loss. Returns the max
/// relative error |a-n| / max(|a|,|n|,1e-8) over every parameter element.
double grad_check(NetworkParams& params, const std::function<double()>& loss_fn, double eps);

/// Xavier-uniform initialization over [-limit, limit], limit = sqrt(6/(fan_in+fan_out)).
void xavier_init(Tensor& kernel, int fan_in, int fan_out, Rng& rng);

}  // namespace gmc::nn
