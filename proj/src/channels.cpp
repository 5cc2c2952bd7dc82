#include "gmc/channels.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace gmc::channels {

using nn::LayerKind;
using nn::LayerSpec;

Tensor to_input_tensor(const Image& image) {
    Image scaled = image;
    for (double& v : scaled.values) v /= 255.0;
    const Image centered = augment::per_channel_zero_mean(scaled);
    Tensor t({image.channels, image.height, image.width}, false);
    for (int c = 0; c < image.channels; ++c)
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                t.values[(static_cast<std::size_t>(c) * image.height + y) * image.width + x] =
                    centered.at(x, y, c);
    return t;
}

namespace {

ProbMap tensor_to_probmap(const Tensor& t) {
    ProbMap p(t.shape[2], t.shape[1], t.shape[0]);
    p.values = t.values;
    return p;
}

double mean_or_nan(const LossCurve& epoch_losses) {
    if (epoch_losses.empty()) return 0.0;
    double s = 0.0;
    for (double v : epoch_losses) s += v;
    return s / static_cast<double>(epoch_losses.size());
}

void check_divergence(double loss, int epoch, const char* which) {
    if (!std::isfinite(loss))
        throw InternalError(std::string(which) + " training diverged (non-finite loss) at epoch " +
                            std::to_string(epoch));
}

}  // namespace

// ---- segmentation channel ----

SegNet::SegNet(const std::string& schedule, std::uint64_t seed) {
    Rng rng(seed);
    net_ = nn::Sequential(nn::parse_schedule(schedule), 3, rng);
    if (net_.out_channels(3) != 2)
        throw ConfigError("segmentation schedule must end with 2 output channels");
    net_.collect_params(params_, "seg");
}

Tensor SegNet::logits(const Tensor& input) {
    Tensor out = net_.forward(input);
    if (out.shape[1] != input.shape[1] || out.shape[2] != input.shape[2])
        throw ConfigError("segmentation schedule output " + shape_str(out.shape) +
                          " does not match input resolution " + shape_str(input.shape));
    return out;
}

ProbMap SegNet::forward(const Image& image) {
    return tensor_to_probmap(nn::softmax_channels(logits(to_input_tensor(image))));
}

LossCurve SegNet::train(const std::vector<augment::Sample>& items, const TrainHyper& hyper) {
    if (items.empty()) throw DataError("segmentation training set is empty");
    nn::SgdOptimizer opt(hyper.lr, hyper.momentum);
    LossCurve curve;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        LossCurve batch;
        for (const augment::Sample& item : items) {
            const Tensor input = to_input_tensor(item.image);
            params_.zero_grad();
            const Tensor out = logits(input);
            const nn::LossResult loss = nn::softmax_cross_entropy(out, foreground_classmap(item.labels));
            check_divergence(loss.loss, epoch, "segmentation");
            net_.backward(loss.grad);
            opt.step(params_);
            batch.push_back(loss.loss);
        }
        curve.push_back(mean_or_nan(batch));
        last_loss_ = curve.back();
    }
    return curve;
}

// ---- edge channel ----

EdgeNet::EdgeNet(const std::string& schedule, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<LayerSpec> specs = nn::parse_schedule(schedule);
    int channels = 3;
    int downsample = 1;
    std::vector<int> tap_channels;
    for (const LayerSpec& spec : specs) {
        switch (spec.kind) {
            case LayerKind::Conv:
                backbone_.push_back(std::make_unique<nn::ConvLayer>(channels, spec, rng));
                channels = spec.out_channels;
                downsample *= spec.stride;
                break;
            case LayerKind::Relu: backbone_.push_back(std::make_unique<nn::ReluLayer>()); break;
            case LayerKind::Sigmoid: backbone_.push_back(std::make_unique<nn::SigmoidLayer>()); break;
            case LayerKind::Softmax: backbone_.push_back(std::make_unique<nn::SoftmaxLayer>()); break;
            case LayerKind::MaxPool:
                backbone_.push_back(std::make_unique<nn::MaxPoolLayer>(spec));
                downsample *= spec.stride;
                break;
            case LayerKind::Upsample:
                backbone_.push_back(std::make_unique<nn::UpsampleLayer>(spec.factor));
                if (downsample % spec.factor != 0)
                    throw ConfigError("edge schedule upsample factor does not divide prior downsampling");
                downsample /= spec.factor;
                break;
            case LayerKind::Tap:
                if (backbone_.empty()) throw ConfigError("edge schedule cannot start with a tap");
                tap_after_.push_back(static_cast<int>(backbone_.size()) - 1);
                tap_channels.push_back(channels);
                side_factors_.push_back(downsample);
                break;
        }
    }
    if (tap_after_.empty())
        throw ConfigError("edge schedule declares no side outputs (add at least one 'tap')");

    for (std::size_t m = 0; m < tap_after_.size(); ++m) {
        LayerSpec side;
        side.kind = LayerKind::Conv;
        side.kernel = 1;
        side.out_channels = 1;
        side.padding = 0;
        side_convs_.push_back(std::make_unique<nn::ConvLayer>(tap_channels[m], side, rng));
        side_ups_.push_back(std::make_unique<nn::UpsampleLayer>(side_factors_[m]));
    }
    LayerSpec fuse;
    fuse.kind = LayerKind::Conv;
    fuse.kernel = 1;
    fuse.out_channels = 1;
    fuse.padding = 0;
    fusion_conv_ = std::make_unique<nn::ConvLayer>(static_cast<int>(tap_after_.size()), fuse, rng);

    int idx = 0;
    for (auto& layer : backbone_) layer->collect_params(params_, "edge.l" + std::to_string(idx++));
    for (std::size_t m = 0; m < side_convs_.size(); ++m)
        side_convs_[m]->collect_params(params_, "edge.side" + std::to_string(m));
    fusion_conv_->collect_params(params_, "edge.fuse");
}

EdgeNet::SideLogits EdgeNet::forward_logits(const Tensor& input) {
    tap_outputs_.clear();
    Tensor x = input;
    x.grad.clear();
    std::size_t next_tap = 0;
    for (std::size_t i = 0; i < backbone_.size(); ++i) {
        x = backbone_[i]->forward(x);
        while (next_tap < tap_after_.size() && tap_after_[next_tap] == static_cast<int>(i)) {
            tap_outputs_.push_back(x);
            ++next_tap;
        }
    }
    last_shape_ = x.shape;

    SideLogits out;
    const int h = input.shape[1], w = input.shape[2];
    for (std::size_t m = 0; m < side_convs_.size(); ++m) {
        Tensor side = side_convs_[m]->forward(tap_outputs_[m]);
        side = side_ups_[m]->forward(side);
        if (side.shape[1] != h || side.shape[2] != w)
            throw ConfigError("edge side output " + std::to_string(m) + " resolves to " +
                              shape_str(side.shape) + ", expected input resolution " +
                              std::to_string(h) + "x" + std::to_string(w));
        out.side.push_back(std::move(side));
    }

    Tensor concat({static_cast<int>(out.side.size()), h, w}, false);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::size_t m = 0; m < out.side.size(); ++m)
        std::copy(out.side[m].values.begin(), out.side[m].values.end(),
                  concat.values.begin() + static_cast<std::ptrdiff_t>(m * plane));
    concat_ = concat;
    out.fused = fusion_conv_->forward(concat);
    return out;
}

void EdgeNet::backward_logits(const std::vector<Tensor>& side_grads, const Tensor& fused_grad) {
    const Tensor concat_grad = fusion_conv_->backward(fused_grad);
    const std::size_t plane = static_cast<std::size_t>(concat_grad.shape[1]) * concat_grad.shape[2];

    std::vector<Tensor> tap_grads(side_convs_.size());
    for (std::size_t m = 0; m < side_convs_.size(); ++m) {
        Tensor g = side_grads[m];
        g.grad.clear();
        for (std::size_t i = 0; i < plane; ++i) g.values[i] += concat_grad.values[m * plane + i];
        g = side_ups_[m]->backward(g);
        tap_grads[m] = side_convs_[m]->backward(g);
    }

    Tensor g(last_shape_, false);
    int next_tap = static_cast<int>(tap_after_.size()) - 1;
    for (int i = static_cast<int>(backbone_.size()) - 1; i >= 0; --i) {
        while (next_tap >= 0 && tap_after_[static_cast<std::size_t>(next_tap)] == i) {
            const Tensor& tg = tap_grads[static_cast<std::size_t>(next_tap)];
            for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] += tg.values[k];
            --next_tap;
        }
        g = backbone_[static_cast<std::size_t>(i)]->backward(g);
    }
}

EdgeNet::Forward EdgeNet::forward(const Image& image) {
    SideLogits logits = forward_logits(to_input_tensor(image));
    Forward out;
    for (Tensor& side : logits.side) out.sides.push_back(tensor_to_probmap(nn::sigmoid(side)));
    out.fused = tensor_to_probmap(nn::sigmoid(logits.fused));
    return out;
}

double EdgeNet::train_step(const Tensor& input, const std::vector<std::uint8_t>& edge_bits,
                           bool include_side_losses) {
    SideLogits logits = forward_logits(input);
    double total = 0.0;
    std::vector<Tensor> side_grads;
    for (Tensor& side : logits.side) {
        if (include_side_losses) {
            nn::LossResult r = nn::balanced_sigmoid_cross_entropy(side, edge_bits);
            total += r.loss;
            side_grads.push_back(std::move(r.grad));
        } else {
            side_grads.emplace_back(side.shape, false);
        }
    }
    nn::LossResult fused = nn::balanced_sigmoid_cross_entropy(logits.fused, edge_bits);
    total += fused.loss;
    backward_logits(side_grads, fused.grad);
    return total;
}

LossCurve EdgeNet::train(const std::vector<augment::Sample>& items, double edge_radius,
                         const TrainHyper& hyper) {
    if (items.empty()) throw DataError("edge training set is empty");
    nn::SgdOptimizer opt(hyper.lr, hyper.momentum);
    LossCurve curve;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        LossCurve batch;
        for (const augment::Sample& item : items) {
            params_.zero_grad();
            const double loss = train_step(to_input_tensor(item.image), edge_target(item.labels, edge_radius));
            check_divergence(loss, epoch, "edge");
            opt.step(params_);
            batch.push_back(loss);
        }
        curve.push_back(mean_or_nan(batch));
    }
    return curve;
}

// ---- fusion ----

FusionNet::FusionNet(const std::string& schedule, std::uint64_t seed) {
    Rng rng(seed);
    net_ = nn::Sequential(nn::parse_schedule(schedule), 3, rng);
    if (net_.out_channels(3) != 2) throw ConfigError("fusion schedule must end with 2 output channels");
    net_.collect_params(params_, "fusion");
}

Tensor FusionNet::bundle_to_tensor(const ChannelBundle& bundle) {
    const int h = bundle.seg.height, w = bundle.seg.width;
    if (bundle.det_norm.width != w || bundle.det_norm.height != h || bundle.edge.width != w ||
        bundle.edge.height != h)
        throw DataError("channel bundle dimensions disagree");
    if (bundle.seg.channels != 2 || bundle.edge.channels != 1)
        throw DataError("channel bundle needs seg K=2 and edge K=1");
    Tensor t({3, h, w}, false);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    // fixed input order: segmentation foreground, normalized coverage, edge
    for (std::size_t i = 0; i < plane; ++i) {
        t.values[i] = bundle.seg.values[plane + i];  // class 1 = foreground
        t.values[plane + i] = bundle.det_norm.values[i];
        t.values[2 * plane + i] = bundle.edge.values[i];
    }
    return t;
}

Tensor FusionNet::logits(const Tensor& input) {
    Tensor out = net_.forward(input);
    if (out.shape[1] != input.shape[1] || out.shape[2] != input.shape[2])
        throw ConfigError("fusion schedule output " + shape_str(out.shape) +
                          " does not match input resolution " + shape_str(input.shape));
    return out;
}

ProbMap FusionNet::forward(const ChannelBundle& bundle) {
    return tensor_to_probmap(nn::softmax_channels(logits(bundle_to_tensor(bundle))));
}

LossCurve FusionNet::train(const std::vector<std::pair<ChannelBundle, InstanceMap>>& items,
                           const TrainHyper& hyper) {
    if (items.empty()) throw DataError("fusion training set is empty");
    nn::SgdOptimizer opt(hyper.lr, hyper.momentum);
    LossCurve curve;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        LossCurve batch;
        for (const auto& [bundle, labels] : items) {
            params_.zero_grad();
            const Tensor out = logits(bundle_to_tensor(bundle));
            const nn::LossResult loss = nn::softmax_cross_entropy(out, separation_classmap(labels));
            check_divergence(loss.loss, epoch, "fusion");
            net_.backward(loss.grad);
            opt.step(params_);
            batch.push_back(loss.loss);
        }
        curve.push_back(mean_or_nan(batch));
    }
    return curve;
}

// ---- detection ingestion and instantiation ----

std::vector<Box> read_boxes(const std::filesystem::path& path, int width, int height) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed box JSON: " + e.what());
    }
    if (!j.is_array()) throw DataError(path.string() + ": box file must be a JSON array");
    std::vector<Box> boxes;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            Box b;
            b.x0 = j[i].at("x0").get<int>();
            b.y0 = j[i].at("y0").get<int>();
            b.x1 = j[i].at("x1").get<int>();
            b.y1 = j[i].at("y1").get<int>();
            if (j[i].contains("score")) b.score = j[i]["score"].get<double>();
            boxes.push_back(b);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ": box " + std::to_string(i) + " malformed: " + e.what());
        }
        const Box& b = boxes.back();
        if (b.x0 < 0 || b.y0 < 0 || b.x0 >= b.x1 || b.y0 >= b.y1 || b.x1 > width || b.y1 > height)
            throw DataError(path.string() + ": box " + std::to_string(i) + " " + b.str() +
                            " out of range for " + std::to_string(width) + "x" + std::to_string(height));
    }
    return boxes;
}

CoverageMap detection_ingest(const std::filesystem::path& path, int width, int height) {
    return fill_boxes(read_boxes(path, width, height), width, height);
}

ProbMap normalize_coverage(const CoverageMap& counts) {
    ProbMap out(counts.width, counts.height, 1);
    const double denom = std::max<std::uint32_t>(1, counts.max_count());
    for (std::size_t i = 0; i < counts.counts.size(); ++i)
        out.values[i] = static_cast<double>(counts.counts[i]) / denom;
    return out;
}

InstanceMap instantiate(const ProbMap& prob, int min_area) {
    if (prob.channels != 2) throw ConfigError("instantiate expects a K=2 probability map");
    BinaryMask mask(prob.width, prob.height);
    const std::size_t plane = static_cast<std::size_t>(prob.width) * prob.height;
    for (std::size_t i = 0; i < plane; ++i) mask.bits[i] = prob.values[plane + i] > prob.values[i] ? 1 : 0;
    InstanceMap labeled = connected_components(mask, 4);

    // drop small components, then relabel densely preserving scan order
    const std::uint32_t n = labeled.max_id();
    std::vector<long long> area(n + 1, 0);
    for (std::uint32_t id : labeled.ids) ++area[id];
    std::vector<std::uint32_t> remap(n + 1, 0);
    std::uint32_t next = 0;
    for (std::uint32_t id = 1; id <= n; ++id)
        if (area[id] >= min_area) remap[id] = ++next;
    for (std::uint32_t& id : labeled.ids) id = remap[id];
    return labeled;
}

// ---- training targets ----

std::vector<int> foreground_classmap(const InstanceMap& labels) {
    std::vector<int> out(labels.ids.size());
    for (std::size_t i = 0; i < labels.ids.size(); ++i) out[i] = labels.ids[i] ? 1 : 0;
    return out;
}

std::vector<int> separation_classmap(const InstanceMap& labels) {
    const int w = labels.width, h = labels.height;
    std::vector<int> out(labels.ids.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint32_t id = labels.at(x, y);
            if (!id) continue;
            auto contact = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) return false;
                const std::uint32_t n = labels.at(nx, ny);
                return n != 0 && n != id;
            };
            const bool cut = contact(x - 1, y) || contact(x + 1, y) || contact(x, y - 1) || contact(x, y + 1);
            out[static_cast<std::size_t>(y) * w + x] = cut ? 0 : 1;
        }
    }
    return out;
}

std::vector<std::uint8_t> edge_target(const InstanceMap& labels, double radius) {
    BinaryMask edges = extract_edges(labels);
    if (radius > 0) edges = dilate(edges, radius);
    return edges.bits;
}

}  // namespace gmc::channels
