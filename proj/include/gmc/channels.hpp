// channels.hpp — the three information channels and their fusion.
//
// Segmentation: softmax foreground/background at input resolution. Detection:
// box files turned into coverage counts. Edge: a backbone with M side taps,
// each side supervised, fused by a learned 1x1 convolution over the side
// logits. Fusion: a seven-layer dilated network over the stacked channel
// outputs.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gmc/augment.hpp"
#include "gmc/labelops.hpp"
#include "gmc/nn.hpp"
#include "gmc/weights_io.hpp"

namespace gmc::channels {

struct ChannelBundle {
    ProbMap seg;       // K=2 class posteriors
    CoverageMap det;   // raw covering-box counts
    ProbMap det_norm;  // counts / max(1, max count), K=1
    ProbMap edge;      // fused edge probability, K=1
};

struct TrainHyper {
    int epochs = 40;
    double lr = 0.05;
    double momentum = 0.9;
};

/// Per-epoch mean losses, serialized by the CLI as JSON lines.
using LossCurve = std::vector<double>;

/// Image (raw 0..255) -> network input: channels scaled to [0,1], per-channel
/// zero mean, planar [3,H,W].
Tensor to_input_tensor(const Image& image);

class SegNet {
public:
    SegNet(const std::string& schedule, std::uint64_t seed);

    ProbMap forward(const Image& image);
    LossCurve train(const std::vector<augment::Sample>& items, const TrainHyper& hyper);

    nn::NetworkParams& params() { return params_; }
    double last_loss() const { return last_loss_; }

private:
    Tensor logits(const Tensor& input);
    nn::Sequential net_;
    nn::NetworkParams params_;
    double last_loss_ = 0.0;
};

class EdgeNet {
public:
    /// Schedule must contain at least one `tap`; every tap feeds a 1x1 side
    /// convolution whose logit is upsampled to input resolution.
    EdgeNet(const std::string& schedule, std::uint64_t seed);

    struct Forward {
        std::vector<ProbMap> sides;
        ProbMap fused;
    };
    Forward forward(const Image& image);

    /// Loss: balanced sigmoid cross entropy summed over every side output plus
    /// the fused output. include_side_losses=false drops the deep-supervision
    /// terms (diagnostics only).
    LossCurve train(const std::vector<augment::Sample>& items, double edge_radius,
                    const TrainHyper& hyper);
    double train_step(const Tensor& input, const std::vector<std::uint8_t>& edge_bits,
                      bool include_side_losses = true);

    nn::NetworkParams& params() { return params_; }
    int side_count() const { return static_cast<int>(side_convs_.size()); }

private:
    struct SideLogits {
        std::vector<Tensor> side;  // [1,H,W] at input resolution
        Tensor fused;              // [1,H,W]
    };
    SideLogits forward_logits(const Tensor& input);
    void backward_logits(const std::vector<Tensor>& side_grads, const Tensor& fused_grad);

    std::vector<std::unique_ptr<nn::Layer>> backbone_;
    std::vector<int> tap_after_;  // backbone layer index each tap follows
    std::vector<std::unique_ptr<nn::ConvLayer>> side_convs_;
    std::vector<std::unique_ptr<nn::UpsampleLayer>> side_ups_;
    std::vector<int> side_factors_;
    std::unique_ptr<nn::ConvLayer> fusion_conv_;  // the learned side weights
    nn::NetworkParams params_;
    // forward caches for backward
    std::vector<Tensor> tap_outputs_;
    std::vector<int> last_shape_;
    Tensor concat_;
};

class FusionNet {
public:
    FusionNet(const std::string& schedule, std::uint64_t seed);

    ProbMap forward(const ChannelBundle& bundle);
    /// items: (bundle, labels). Foreground pixels in contact with a different
    /// instance are trained as background so touching objects stay separable.
    LossCurve train(const std::vector<std::pair<ChannelBundle, InstanceMap>>& items,
                    const TrainHyper& hyper);

    nn::NetworkParams& params() { return params_; }

    static Tensor bundle_to_tensor(const ChannelBundle& bundle);

private:
    Tensor logits(const Tensor& input);
    nn::Sequential net_;
    nn::NetworkParams params_;
};

/// Reads a JSON box array and fills the coverage map; also returns the
/// normalized copy used as fusion input.
CoverageMap detection_ingest(const std::filesystem::path& path, int width, int height);
ProbMap normalize_coverage(const CoverageMap& counts);
std::vector<Box> read_boxes(const std::filesystem::path& path, int width, int height);

/// argmax -> components (4-connectivity) -> drop small -> dense relabel.
InstanceMap instantiate(const ProbMap& prob, int min_area);

/// Training target for the fusion net: 1 on foreground pixels except where a
/// 4-neighbor belongs to a different nonzero instance.
std::vector<int> separation_classmap(const InstanceMap& labels);
std::vector<int> foreground_classmap(const InstanceMap& labels);
std::vector<std::uint8_t> edge_target(const InstanceMap& labels, double radius);

}  // namespace gmc::channels
