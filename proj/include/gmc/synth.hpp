// synth.hpp — seeded synthetic gland-image generator for desk-scale runs.
#pragma once

#include <cstdint>
#include <vector>

#include "gmc/labelops.hpp"
#include "gmc/netpbm.hpp"

namespace gmc::synth {

struct SynthOptions {
    int width = 96, height = 96;
    int min_instances = 2, max_instances = 4;
    double touching_fraction = 0.5;  // fraction of images containing a touching pair
};

struct SynthSample {
    Image image;          // ring-stained ellipses, lighter lumen, textured background
    InstanceMap labels;
    std::vector<Box> boxes;  // tight bounding boxes of the instances
    bool has_touching_pair = false;
};

/// Deterministic for (seed, index, options).
SynthSample make_sample(std::uint64_t seed, int index, const SynthOptions& options = {});

/// True iff two distinct nonzero ids are 4-adjacent somewhere.
bool has_touching_instances(const InstanceMap& labels);

}  // namespace gmc::synth
