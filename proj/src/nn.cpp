#include "gmc/nn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace gmc::nn {

namespace {

int conv_out_extent(int in, int kernel, int stride, int dilation, int padding) {
    int eff = dilation * (kernel - 1) + 1;
    int num = in + 2 * padding - eff;
    if (num < 0 || num % stride != 0) return -1;
    return num / stride + 1;
}

int same_padding(int kernel, int dilation) { return dilation * (kernel - 1) / 2; }

double stable_log_sigmoid(double x) {
    // log s(x) = min(0,x) - log1p(exp(-|x|))
    return std::min(0.0, x) - std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

std::string LayerSpec::str() const {
    std::ostringstream ss;
    switch (kind) {
        case LayerKind::Conv:
            ss << "conv" << kernel << "c" << out_channels;
            if (dilation != 1) ss << "d" << dilation;
            if (stride != 1) ss << "s" << stride;
            if (padding >= 0) ss << "p" << padding;
            break;
        case LayerKind::Relu: ss << "relu"; break;
        case LayerKind::Sigmoid: ss << "sigmoid"; break;
        case LayerKind::Softmax: ss << "softmax"; break;
        case LayerKind::MaxPool:
            ss << "pool" << window << "s" << stride;
            if (padding > 0) ss << "p" << padding;
            break;
        case LayerKind::Upsample: ss << "up" << factor; break;
        case LayerKind::Tap: ss << "tap"; break;
    }
    return ss.str();
}

std::vector<LayerSpec> parse_schedule(const std::string& text) {
    std::vector<LayerSpec> specs;
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        LayerSpec s;
        const std::string t = token;
        token.clear();
        auto read_int = [&](std::size_t& pos) {
            std::size_t start = pos;
            while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) ++pos;
            if (pos == start) throw ConfigError("bad layer token '" + t + "'");
            return std::stoi(t.substr(start, pos - start));
        };
        if (t == "relu") {
            s.kind = LayerKind::Relu;
        } else if (t == "sigmoid") {
            s.kind = LayerKind::Sigmoid;
        } else if (t == "softmax") {
            s.kind = LayerKind::Softmax;
        } else if (t == "tap") {
            s.kind = LayerKind::Tap;
        } else if (t.rfind("conv", 0) == 0) {
            s.kind = LayerKind::Conv;
            std::size_t pos = 4;
            s.kernel = read_int(pos);
            if (pos >= t.size() || t[pos] != 'c') throw ConfigError("conv token needs cN: '" + t + "'");
            ++pos;
            s.out_channels = read_int(pos);
            while (pos < t.size()) {
                char flag = t[pos++];
                int v = read_int(pos);
                if (flag == 'd') s.dilation = v;
                else if (flag == 's') s.stride = v;
                else if (flag == 'p') s.padding = v;
                else throw ConfigError(std::string("unknown conv flag '") + flag + "' in '" + t + "'");
            }
            if (s.stride < 1 || s.dilation < 1) throw ConfigError("stride/dilation must be >= 1: '" + t + "'");
        } else if (t.rfind("pool", 0) == 0) {
            s.kind = LayerKind::MaxPool;
            std::size_t pos = 4;
            s.window = read_int(pos);
            s.padding = 0;
            while (pos < t.size()) {
                char flag = t[pos++];
                int v = read_int(pos);
                if (flag == 's') s.stride = v;
                else if (flag == 'p') s.padding = v;
                else throw ConfigError(std::string("unknown pool flag '") + flag + "' in '" + t + "'");
            }
            if (s.window < 1 || s.stride < 1) throw ConfigError("pool window/stride must be >= 1: '" + t + "'");
        } else if (t.rfind("up", 0) == 0) {
            s.kind = LayerKind::Upsample;
            std::size_t pos = 2;
            s.factor = read_int(pos);
            if (s.factor < 1) throw ConfigError("upsample factor must be >= 1: '" + t + "'");
        } else {
            throw ConfigError("unknown layer token '" + t + "'");
        }
        specs.push_back(s);
    };
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '|' || c == '\t') flush();
        else token.push_back(c);
    }
    flush();
    if (specs.empty()) throw ConfigError("empty layer schedule");
    return specs;
}

// ---- conv ----

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int dilation, int padding) {
    if (input.shape.size() != 3 || kernel.shape.size() != 4)
        throw ConfigError("conv2d expects input [C,H,W] and kernel [F,C,kh,kw], got " +
                          shape_str(input.shape) + " and " + shape_str(kernel.shape));
    const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
    const int f = kernel.shape[0], kc = kernel.shape[1], kh = kernel.shape[2], kw = kernel.shape[3];
    if (kc != c)
        throw ConfigError("conv2d channel mismatch: input has " + std::to_string(c) +
                          " channels, kernel expects " + std::to_string(kc));
    if (bias.shape.size() != 1 || bias.shape[0] != f)
        throw ConfigError("conv2d bias must be [F]=" + std::to_string(f) + ", got " + shape_str(bias.shape));
    if (stride < 1 || dilation < 1 || padding < 0)
        throw ConfigError("conv2d needs stride>=1, dilation>=1, padding>=0");
    const int oh = conv_out_extent(h, kh, stride, dilation, padding);
    const int ow = conv_out_extent(w, kw, stride, dilation, padding);
    if (oh <= 0 || ow <= 0)
        throw ConfigError("conv2d output extent not a positive integer for input " +
                          shape_str(input.shape) + ", kernel " + shape_str(kernel.shape) +
                          ", stride " + std::to_string(stride) + ", dilation " +
                          std::to_string(dilation) + ", padding " + std::to_string(padding));

    Tensor out({f, oh, ow}, false);
    const double* in = input.values.data();
    const double* kk = kernel.values.data();
    double* ov = out.values.data();
    for (int fo = 0; fo < f; ++fo) {
        const double b = bias.values[static_cast<std::size_t>(fo)];
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox)
                ov[(static_cast<std::size_t>(fo) * oh + oy) * ow + ox] = b;
        }
        for (int ci = 0; ci < c; ++ci) {
            const double* plane = in + static_cast<std::size_t>(ci) * h * w;
            const double* ktab = kk + ((static_cast<std::size_t>(fo) * c + ci) * kh) * kw;
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    const double kv = ktab[static_cast<std::size_t>(ky) * kw + kx];
                    if (kv == 0.0) continue;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - padding + ky * dilation;
                        if (iy < 0 || iy >= h) continue;
                        double* orow = ov + (static_cast<std::size_t>(fo) * oh + oy) * ow;
                        const double* irow = plane + static_cast<std::size_t>(iy) * w;
                        const int x0 = kx * dilation - padding;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride + x0;
                            if (ix < 0 || ix >= w) continue;
                            orow[ox] += kv * irow[ix];
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernel, const Tensor& grad_out, int stride,
                     int dilation, int padding, Tensor* grad_input, Tensor* grad_kernel,
                     Tensor* grad_bias) {
    const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
    const int f = kernel.shape[0], kh = kernel.shape[2], kw = kernel.shape[3];
    const int oh = grad_out.shape[1], ow = grad_out.shape[2];

    if (grad_input) {
        grad_input->shape = input.shape;
        grad_input->values.assign(input.size(), 0.0);
    }
    for (int fo = 0; fo < f; ++fo) {
        const double* gplane = grad_out.values.data() + static_cast<std::size_t>(fo) * oh * ow;
        if (grad_bias) {
            double acc = 0.0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) acc += gplane[i];
            grad_bias->grad[static_cast<std::size_t>(fo)] += acc;
        }
        for (int ci = 0; ci < c; ++ci) {
            const double* iplane = input.values.data() + static_cast<std::size_t>(ci) * h * w;
            double* giplane = grad_input ? grad_input->values.data() + static_cast<std::size_t>(ci) * h * w : nullptr;
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    const std::size_t kidx = ((static_cast<std::size_t>(fo) * c + ci) * kh + ky) * kw + kx;
                    const double kv = kernel.values[kidx];
                    double kacc = 0.0;
                    const int x0 = kx * dilation - padding;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - padding + ky * dilation;
                        if (iy < 0 || iy >= h) continue;
                        const double* grow = gplane + static_cast<std::size_t>(oy) * ow;
                        const double* irow = iplane + static_cast<std::size_t>(iy) * w;
                        double* girow = giplane ? giplane + static_cast<std::size_t>(iy) * w : nullptr;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride + x0;
                            if (ix < 0 || ix >= w) continue;
                            const double g = grow[ox];
                            kacc += g * irow[ix];
                            if (girow) girow[ix] += g * kv;
                        }
                    }
                    if (grad_kernel) grad_kernel->grad[kidx] += kacc;
                }
            }
        }
    }
}

// ---- activations ----

Tensor relu(const Tensor& input) {
    Tensor out = input;
    out.grad.clear();
    for (double& v : out.values) v = std::max(0.0, v);
    return out;
}

Tensor sigmoid(const Tensor& input) {
    Tensor out = input;
    out.grad.clear();
    for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
    return out;
}

Tensor softmax_channels(const Tensor& input) {
    if (input.shape.size() != 3 || input.shape[0] < 2)
        throw ConfigError("softmax needs [K,H,W] with K >= 2, got " + shape_str(input.shape));
    const int k = input.shape[0], h = input.shape[1], w = input.shape[2];
    Tensor out(input.shape, false);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t p = 0; p < plane; ++p) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int ci = 0; ci < k; ++ci) mx = std::max(mx, input.values[ci * plane + p]);
        double sum = 0.0;
        for (int ci = 0; ci < k; ++ci) {
            double e = std::exp(input.values[ci * plane + p] - mx);
            out.values[ci * plane + p] = e;
            sum += e;
        }
        for (int ci = 0; ci < k; ++ci) out.values[ci * plane + p] /= sum;
    }
    return out;
}

// ---- pooling ----

PoolResult maxpool(const Tensor& input, int window, int stride, int padding) {
    if (input.shape.size() != 3) throw ConfigError("maxpool expects [C,H,W]");
    if (window < 1 || stride < 1 || padding < 0) throw ConfigError("maxpool needs window>=1, stride>=1, padding>=0");
    const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
    if (window > h + 2 * padding || window > w + 2 * padding)
        throw ConfigError("maxpool window " + std::to_string(window) + " exceeds padded input " +
                          shape_str(input.shape) + " with padding " + std::to_string(padding));
    const int oh = (h + 2 * padding - window) / stride + 1;
    const int ow = (w + 2 * padding - window) / stride + 1;

    PoolResult res;
    res.output = Tensor({c, oh, ow}, false);
    res.argmax.assign(res.output.size(), 0);
    for (int ci = 0; ci < c; ++ci) {
        const double* plane = input.values.data() + static_cast<std::size_t>(ci) * h * w;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                bool found = false;
                for (int ky = 0; ky < window; ++ky) {
                    const int iy = oy * stride - padding + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < window; ++kx) {
                        const int ix = ox * stride - padding + kx;
                        if (ix < 0 || ix >= w) continue;
                        const std::size_t idx = static_cast<std::size_t>(iy) * w + ix;
                        if (!found || plane[idx] > best) {
                            best = plane[idx];
                            best_idx = idx;
                            found = true;
                        }
                    }
                }
                if (!found) throw ConfigError("maxpool window covers only padding");
                const std::size_t oi = (static_cast<std::size_t>(ci) * oh + oy) * ow + ox;
                res.output.values[oi] = best;
                res.argmax[oi] = static_cast<std::size_t>(ci) * h * w + best_idx;
            }
        }
    }
    return res;
}

// ---- bilinear upsampling ----

namespace {
struct Lerp {
    int lo, hi;
    double w_hi;
};
Lerp sample_coord(int out_idx, int factor, int in_extent) {
    double src = (out_idx + 0.5) / factor - 0.5;
    if (src < 0) src = 0;
    if (src > in_extent - 1) src = in_extent - 1;
    Lerp l;
    l.lo = static_cast<int>(std::floor(src));
    l.hi = std::min(l.lo + 1, in_extent - 1);
    l.w_hi = src - l.lo;
    return l;
}
}  // namespace

Tensor upsample_bilinear(const Tensor& input, int factor) {
    if (input.shape.size() != 3) throw ConfigError("upsample expects [C,H,W]");
    if (factor < 1) throw ConfigError("upsample factor must be >= 1");
    if (factor == 1) {
        Tensor out = input;
        out.grad.clear();
        return out;
    }
    const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
    const int oh = h * factor, ow = w * factor;
    Tensor out({c, oh, ow}, false);
    std::vector<Lerp> xs(static_cast<std::size_t>(ow)), ys(static_cast<std::size_t>(oh));
    for (int x = 0; x < ow; ++x) xs[static_cast<std::size_t>(x)] = sample_coord(x, factor, w);
    for (int y = 0; y < oh; ++y) ys[static_cast<std::size_t>(y)] = sample_coord(y, factor, h);
    for (int ci = 0; ci < c; ++ci) {
        const double* plane = input.values.data() + static_cast<std::size_t>(ci) * h * w;
        double* oplane = out.values.data() + static_cast<std::size_t>(ci) * oh * ow;
        for (int y = 0; y < oh; ++y) {
            const Lerp& ly = ys[static_cast<std::size_t>(y)];
            for (int x = 0; x < ow; ++x) {
                const Lerp& lx = xs[static_cast<std::size_t>(x)];
                const double top = plane[ly.lo * w + lx.lo] * (1 - lx.w_hi) + plane[ly.lo * w + lx.hi] * lx.w_hi;
                const double bot = plane[ly.hi * w + lx.lo] * (1 - lx.w_hi) + plane[ly.hi * w + lx.hi] * lx.w_hi;
                oplane[static_cast<std::size_t>(y) * ow + x] = top * (1 - ly.w_hi) + bot * ly.w_hi;
            }
        }
    }
    return out;
}

Tensor upsample_bilinear_backward(const Tensor& grad_out, int in_h, int in_w, int factor) {
    const int c = grad_out.shape[0], oh = grad_out.shape[1], ow = grad_out.shape[2];
    Tensor grad_in({c, in_h, in_w}, false);
    if (factor == 1) {
        grad_in.values = grad_out.values;
        return grad_in;
    }
    std::vector<Lerp> xs(static_cast<std::size_t>(ow)), ys(static_cast<std::size_t>(oh));
    for (int x = 0; x < ow; ++x) xs[static_cast<std::size_t>(x)] = sample_coord(x, factor, in_w);
    for (int y = 0; y < oh; ++y) ys[static_cast<std::size_t>(y)] = sample_coord(y, factor, in_h);
    for (int ci = 0; ci < c; ++ci) {
        const double* gplane = grad_out.values.data() + static_cast<std::size_t>(ci) * oh * ow;
        double* iplane = grad_in.values.data() + static_cast<std::size_t>(ci) * in_h * in_w;
        for (int y = 0; y < oh; ++y) {
            const Lerp& ly = ys[static_cast<std::size_t>(y)];
            for (int x = 0; x < ow; ++x) {
                const Lerp& lx = xs[static_cast<std::size_t>(x)];
                const double g = gplane[static_cast<std::size_t>(y) * ow + x];
                iplane[ly.lo * in_w + lx.lo] += g * (1 - ly.w_hi) * (1 - lx.w_hi);
                iplane[ly.lo * in_w + lx.hi] += g * (1 - ly.w_hi) * lx.w_hi;
                iplane[ly.hi * in_w + lx.lo] += g * ly.w_hi * (1 - lx.w_hi);
                iplane[ly.hi * in_w + lx.hi] += g * ly.w_hi * lx.w_hi;
            }
        }
    }
    return grad_in;
}

// ---- losses ----

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const int k = logits.shape[0], h = logits.shape[1], w = logits.shape[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    if (labels.size() != plane)
        throw DataError("label map size " + std::to_string(labels.size()) + " != " + std::to_string(plane));
    Tensor probs = softmax_channels(logits);
    LossResult res;
    res.grad = Tensor(logits.shape, false);
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(plane);
    for (std::size_t p = 0; p < plane; ++p) {
        const int label = labels[p];
        if (label < 0 || label >= k)
            throw DataError("label " + std::to_string(label) + " out of range [0," + std::to_string(k) +
                            ") at pixel (" + std::to_string(p % static_cast<std::size_t>(w)) + "," +
                            std::to_string(p / static_cast<std::size_t>(w)) + ")");
        total -= std::log(std::max(probs.values[static_cast<std::size_t>(label) * plane + p], 1e-300));
        for (int ci = 0; ci < k; ++ci) {
            double g = probs.values[ci * plane + p];
            if (ci == label) g -= 1.0;
            res.grad.values[ci * plane + p] = g * inv_n;
        }
    }
    res.loss = total * inv_n;
    return res;
}

LossResult balanced_sigmoid_cross_entropy(const Tensor& logits, const std::vector<std::uint8_t>& edges) {
    if (logits.shape.size() != 3 || logits.shape[0] != 1)
        throw ConfigError("balanced loss expects [1,H,W] logits, got " + shape_str(logits.shape));
    const std::size_t n = logits.size();
    if (edges.size() != n)
        throw DataError("edge mask size " + std::to_string(edges.size()) + " != " + std::to_string(n));
    std::size_t pos = 0;
    for (std::uint8_t e : edges) pos += e ? 1 : 0;
    const double beta = static_cast<double>(n - pos) / static_cast<double>(n);

    LossResult res;
    res.grad = Tensor(logits.shape, false);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = logits.values[i];
        const double s = 1.0 / (1.0 + std::exp(-x));
        if (edges[i]) {
            total -= beta * stable_log_sigmoid(x);
            res.grad.values[i] = beta * (s - 1.0);
        } else {
            total -= (1.0 - beta) * (stable_log_sigmoid(x) - x);  // log(1-s) = log s - x
            res.grad.values[i] = (1.0 - beta) * s;
        }
    }
    res.loss = total;
    return res;
}

// ---- parameter registry ----

void NetworkParams::add(const std::string& name, Tensor* t) {
    if (!t) throw InternalError("null parameter tensor for " + name);
    if (find(name)) throw InternalError("duplicate parameter name " + name);
    if (!t->has_grad()) throw InternalError("parameter " + name + " lacks a grad buffer");
    entries_.emplace_back(name, t);
}

Tensor* NetworkParams::find(const std::string& name) const {
    for (const auto& [n, t] : entries_)
        if (n == name) return t;
    return nullptr;
}

std::size_t NetworkParams::total_values() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t->size();
    return n;
}

void NetworkParams::zero_grad() {
    for (auto& [name, t] : entries_) t->zero_grad();
}

// ---- layers ----

void xavier_init(Tensor& kernel, int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : kernel.values) v = rng.uniform(-limit, limit);
}

ConvLayer::ConvLayer(int in_channels, const LayerSpec& spec, Rng& rng)
    : kernel({spec.out_channels, in_channels, spec.kernel, spec.kernel}),
      bias({spec.out_channels}),
      stride(spec.stride),
      dilation(spec.dilation),
      padding(spec.padding >= 0 ? spec.padding : same_padding(spec.kernel, spec.dilation)) {
    xavier_init(kernel, in_channels * spec.kernel * spec.kernel,
                spec.out_channels * spec.kernel * spec.kernel, rng);
}

Tensor ConvLayer::forward(const Tensor& input) {
    input_ = input;
    input_.grad.clear();
    return conv2d(input, kernel, bias, stride, dilation, padding);
}

Tensor ConvLayer::backward(const Tensor& grad_out) {
    Tensor grad_in;
    conv2d_backward(input_, kernel, grad_out, stride, dilation, padding, &grad_in, &kernel, &bias);
    return grad_in;
}

void ConvLayer::collect_params(NetworkParams& out, const std::string& prefix) {
    out.add(prefix + ".kernel", &kernel);
    out.add(prefix + ".bias", &bias);
}

std::vector<int> ConvLayer::output_shape(const std::vector<int>& in) const {
    const int oh = conv_out_extent(in[1], kernel.shape[2], stride, dilation, padding);
    const int ow = conv_out_extent(in[2], kernel.shape[3], stride, dilation, padding);
    if (oh <= 0 || ow <= 0)
        throw ConfigError("conv output shape invalid for input " + shape_str(in));
    return {kernel.shape[0], oh, ow};
}

Tensor ReluLayer::forward(const Tensor& input) {
    input_ = input;
    input_.grad.clear();
    return relu(input);
}

Tensor ReluLayer::backward(const Tensor& grad_out) {
    Tensor grad_in = grad_out;
    grad_in.grad.clear();
    for (std::size_t i = 0; i < grad_in.size(); ++i)
        if (input_.values[i] <= 0.0) grad_in.values[i] = 0.0;
    return grad_in;
}

Tensor SigmoidLayer::forward(const Tensor& input) {
    output_ = sigmoid(input);
    return output_;
}

Tensor SigmoidLayer::backward(const Tensor& grad_out) {
    Tensor grad_in = grad_out;
    grad_in.grad.clear();
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
        const double s = output_.values[i];
        grad_in.values[i] *= s * (1.0 - s);
    }
    return grad_in;
}

Tensor SoftmaxLayer::forward(const Tensor& input) {
    output_ = softmax_channels(input);
    return output_;
}

Tensor SoftmaxLayer::backward(const Tensor& grad_out) {
    const int k = output_.shape[0];
    const std::size_t plane = static_cast<std::size_t>(output_.shape[1]) * output_.shape[2];
    Tensor grad_in(output_.shape, false);
    for (std::size_t p = 0; p < plane; ++p) {
        double dot = 0.0;
        for (int ci = 0; ci < k; ++ci)
            dot += grad_out.values[ci * plane + p] * output_.values[ci * plane + p];
        for (int ci = 0; ci < k; ++ci) {
            const double s = output_.values[ci * plane + p];
            grad_in.values[ci * plane + p] = s * (grad_out.values[ci * plane + p] - dot);
        }
    }
    return grad_in;
}

MaxPoolLayer::MaxPoolLayer(const LayerSpec& spec)
    : window(spec.window), stride(spec.stride), padding(spec.padding >= 0 ? spec.padding : 0) {}

Tensor MaxPoolLayer::forward(const Tensor& input) {
    in_shape_ = input.shape;
    PoolResult res = maxpool(input, window, stride, padding);
    argmax_ = std::move(res.argmax);
    return std::move(res.output);
}

Tensor MaxPoolLayer::backward(const Tensor& grad_out) {
    Tensor grad_in(in_shape_, false);
    for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.values[argmax_[i]] += grad_out.values[i];
    return grad_in;
}

std::vector<int> MaxPoolLayer::output_shape(const std::vector<int>& in) const {
    const int oh = (in[1] + 2 * padding - window) / stride + 1;
    const int ow = (in[2] + 2 * padding - window) / stride + 1;
    if (oh <= 0 || ow <= 0) throw ConfigError("pool output shape invalid for input " + shape_str(in));
    return {in[0], oh, ow};
}

Tensor UpsampleLayer::forward(const Tensor& input) {
    in_shape_ = input.shape;
    return upsample_bilinear(input, factor_);
}

Tensor UpsampleLayer::backward(const Tensor& grad_out) {
    return upsample_bilinear_backward(grad_out, in_shape_[1], in_shape_[2], factor_);
}

std::vector<int> UpsampleLayer::output_shape(const std::vector<int>& in) const {
    return {in[0], in[1] * factor_, in[2] * factor_};
}

// ---- sequential ----

Sequential::Sequential(const std::vector<LayerSpec>& specs, int in_channels, Rng& rng) {
    int channels = in_channels;
    for (const LayerSpec& spec : specs) {
        switch (spec.kind) {
            case LayerKind::Conv:
                layers.push_back(std::make_unique<ConvLayer>(channels, spec, rng));
                channels = spec.out_channels;
                break;
            case LayerKind::Relu: layers.push_back(std::make_unique<ReluLayer>()); break;
            case LayerKind::Sigmoid: layers.push_back(std::make_unique<SigmoidLayer>()); break;
            case LayerKind::Softmax: layers.push_back(std::make_unique<SoftmaxLayer>()); break;
            case LayerKind::MaxPool: layers.push_back(std::make_unique<MaxPoolLayer>(spec)); break;
            case LayerKind::Upsample: layers.push_back(std::make_unique<UpsampleLayer>(spec.factor)); break;
            case LayerKind::Tap: throw ConfigError("tap marker not allowed in a plain sequential schedule");
        }
    }
}

Tensor Sequential::forward(const Tensor& input) {
    Tensor x = input;
    x.grad.clear();
    for (auto& layer : layers) x = layer->forward(x);
    return x;
}

Tensor Sequential::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = (*it)->backward(g);
    return g;
}

void Sequential::collect_params(NetworkParams& out, const std::string& prefix) {
    int idx = 0;
    for (auto& layer : layers) {
        layer->collect_params(out, prefix + ".l" + std::to_string(idx));
        ++idx;
    }
}

std::vector<int> Sequential::output_shape(std::vector<int> in) const {
    for (const auto& layer : layers) in = layer->output_shape(in);
    return in;
}

int Sequential::out_channels(int in_channels) const {
    for (const auto& layer : layers)
        if (auto* conv = dynamic_cast<const ConvLayer*>(layer.get())) in_channels = conv->kernel.shape[0];
    return in_channels;
}

// ---- SGD ----

void SgdOptimizer::step(NetworkParams& params) {
    if (velocity_.empty()) {
        for (const auto& [name, t] : params.entries()) velocity_.emplace_back(t->size(), 0.0);
    }
    if (velocity_.size() != params.entries().size())
        throw InternalError("optimizer state does not match parameter list");
    for (std::size_t pi = 0; pi < velocity_.size(); ++pi) {
        Tensor* t = params.entries()[pi].second;
        if (!t->has_grad()) throw InternalError("parameter " + params.entries()[pi].first + " lacks a grad buffer");
        std::vector<double>& v = velocity_[pi];
        for (std::size_t i = 0; i < t->size(); ++i) {
            v[i] = momentum_ * v[i] - lr_ * t->grad[i];
            t->values[i] += v[i];
        }
    }
}

// ---- gradient check ----

double grad_check(NetworkParams& params, const std::function<double()>& loss_fn, double eps) {
    if (eps <= 0) throw ConfigError("grad_check eps must be > 0");
    params.zero_grad();
    loss_fn();
    std::vector<std::vector<double>> analytic;
    for (const auto& [name, t] : params.entries()) analytic.push_back(t->grad);

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.entries().size(); ++pi) {
        Tensor* t = params.entries()[pi].second;
        for (std::size_t i = 0; i < t->size(); ++i) {
            const double saved = t->values[i];
            t->values[i] = saved + eps;
            params.zero_grad();
            const double up = loss_fn();
            t->values[i] = saved - eps;
            params.zero_grad();
            const double down = loss_fn();
            t->values[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[pi][i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    params.zero_grad();
    loss_fn();  // restore gradients for the unperturbed point
    return max_rel;
}

}  // namespace gmc::nn
