// augment.hpp — seeded, replayable preprocessing and geometric augmentation.
#pragma once

#include <string>
#include <vector>

#include "gmc/labelops.hpp"
#include "gmc/netpbm.hpp"

namespace gmc::augment {

enum class TransformKind { HFlip, Rot90, Sinusoidal, Pincushion, Shear, Crop };

struct TransformSpec {
    TransformKind kind = TransformKind::HFlip;
    int k = 1;                      // rot90: quarter turns (clockwise)
    double amplitude = 0.0;        // sinusoidal: displacement in px
    double period = 100.0;          // sinusoidal: px
    double strength = 0.0;          // pincushion: kappa
    double shear = 0.0;             // shear factor
    int x = 0, y = 0, w = 0, h = 0;  // crop window

    std::string json() const;
    static TransformSpec from_json(const std::string& text);
};

struct Sample {
    Image image;            // raw 0..255 pixel space
    InstanceMap labels;
    std::string source_id;
    std::vector<TransformSpec> log;  // transforms applied since the source
};

/// Shifts each channel to zero mean (mean over this image alone).
Image per_channel_zero_mean(const Image& image);

/// Applies one transform. Images resample bilinearly (out-of-frame fills with
/// the channel mean), labels nearest-neighbor (out-of-frame becomes
/// background); hflip/rot90/crop are exact pixel permutations.
Sample apply_geometric(const Sample& sample, const TransformSpec& spec);

/// Re-applies a recorded transform sequence to a source sample.
Sample replay(const Sample& source, const std::vector<TransformSpec>& log);

struct StrategyOptions {
    int warp_variants = 6;  // strategy II only
    int crop_size = 400;
    double sin_amplitude_lo = 2.0, sin_amplitude_hi = 8.0;
    double sin_period_lo = 50.0, sin_period_hi = 150.0;
    double pincushion_lo = 0.05, pincushion_hi = 0.2;
    double shear_lo = -0.2, shear_hi = 0.2;
};

/// Strategy I: the 8 flip x rotation variants. Strategy II: those plus seeded
/// sinusoidal / pincushion / shear warps. Every variant ends with a seeded
/// crop_size crop when the source is larger.
std::vector<Sample> augment_strategy(const Sample& sample, char strategy, std::uint64_t seed,
                                     const StrategyOptions& options = {});

/// One JSON-lines record describing an emitted sample.
std::string log_record(const Sample& sample, const std::string& output_name);

}  // namespace gmc::augment
