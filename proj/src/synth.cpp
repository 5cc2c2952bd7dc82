#include "gmc/synth.hpp"

#include <algorithm>
#include <cmath>

namespace gmc::synth {

namespace {

struct Ellipse {
    double cx, cy, a, b, theta;

    // Normalized quadratic form; <= 1 inside.
    double value(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double u = (dx * std::cos(theta) + dy * std::sin(theta)) / a;
        const double v = (-dx * std::sin(theta) + dy * std::cos(theta)) / b;
        return u * u + v * v;
    }

    // Boundary radius along direction phi from the center.
    double radius(double phi) const {
        const double c = std::cos(phi - theta), s = std::sin(phi - theta);
        return a * b / std::sqrt(b * b * c * c + a * a * s * s);
    }
};

constexpr double kRingStart = 0.56;  // v >= this is the stained boundary ring

long long min_instance_area(int w, int h) {
    const long long scaled = static_cast<long long>(std::min(w, h)) * std::min(w, h) / 16;
    return std::min<long long>(60, scaled);
}

struct Rasterized {
    InstanceMap labels;
    std::vector<std::vector<double>> values;  // per-instance ellipse value, kFar outside
};

Rasterized rasterize(const std::vector<Ellipse>& ellipses, int w, int h) {
    Rasterized out;
    out.labels = InstanceMap(w, h);
    out.values.assign(ellipses.size(),
                      std::vector<double>(static_cast<std::size_t>(w) * h, 1e9));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double best = 1.0;
            std::uint32_t owner = 0;
            for (std::size_t e = 0; e < ellipses.size(); ++e) {
                const double v = ellipses[e].value(x, y);
                out.values[e][static_cast<std::size_t>(y) * w + x] = v;
                if (v <= best) {  // contested pixels go to the tighter ellipse
                    best = v;
                    owner = static_cast<std::uint32_t>(e + 1);
                }
            }
            out.labels.at(x, y) = owner;
        }
    }
    return out;
}

bool instance_connected(const InstanceMap& labels, std::uint32_t id) {
    const InstanceMap cc = connected_components(instance_mask(labels, id), 4);
    return cc.max_id() == 1;
}

std::vector<long long> instance_areas(const InstanceMap& labels, std::size_t n) {
    std::vector<long long> areas(n, 0);
    for (std::uint32_t id : labels.ids)
        if (id >= 1 && id <= n) ++areas[id - 1];
    return areas;
}

}  // namespace

bool has_touching_instances(const InstanceMap& labels) {
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const std::uint32_t id = labels.at(x, y);
            if (!id) continue;
            if (x + 1 < labels.width) {
                const std::uint32_t r = labels.at(x + 1, y);
                if (r && r != id) return true;
            }
            if (y + 1 < labels.height) {
                const std::uint32_t d = labels.at(x, y + 1);
                if (d && d != id) return true;
            }
        }
    }
    return false;
}

SynthSample make_sample(std::uint64_t seed, int index, const SynthOptions& options) {
    Rng rng(derive_seed(seed, "synth/" + std::to_string(index)));
    const int w = options.width, h = options.height;
    const bool want_touching = rng.uniform() < options.touching_fraction;

    const double canvas = std::min(w, h);
    auto draw_shape = [&](double max_axis) {
        const double hi = std::min(max_axis, canvas / 4.5);
        const double lo = std::max(3.5, std::min(9.0, hi - 1.0));
        Ellipse e;
        e.a = rng.uniform(lo, std::max(hi, lo + 0.5));
        e.b = rng.uniform(lo, std::max(hi, lo + 0.5));
        e.theta = rng.uniform(0.0, 3.141592653589793);
        return e;
    };
    auto place_center = [&](Ellipse& e) {
        const double reach = std::max(e.a, e.b) + 2.0;
        e.cx = rng.uniform(reach, w - 1 - reach);
        e.cy = rng.uniform(reach, h - 1 - reach);
    };

    for (int attempt = 0; attempt < 64; ++attempt) {
        const int n = rng.range(options.min_instances, options.max_instances);
        std::vector<Ellipse> ellipses;

        if (want_touching && n >= 2) {
            Ellipse first = draw_shape(15.0);
            place_center(first);
            Ellipse second = draw_shape(14.0);
            const double phi = rng.uniform(0.0, 6.283185307179586);
            const double dist = first.radius(phi) + second.radius(phi + 3.141592653589793) - 1.0;
            second.cx = first.cx + dist * std::cos(phi);
            second.cy = first.cy + dist * std::sin(phi);
            const double reach2 = std::max(second.a, second.b);
            if (second.cx < reach2 || second.cy < reach2 || second.cx > w - 1 - reach2 ||
                second.cy > h - 1 - reach2)
                continue;  // pair fell off the canvas; redraw
            ellipses.push_back(first);
            ellipses.push_back(second);
        }

        // remaining instances keep a clear margin from everything placed so far
        int guard = 0;
        while (static_cast<int>(ellipses.size()) < n && guard++ < 200) {
            Ellipse e = draw_shape(16.0);
            place_center(e);
            bool clear = true;
            for (const Ellipse& other : ellipses) {
                const double dx = e.cx - other.cx, dy = e.cy - other.cy;
                const double d = std::sqrt(dx * dx + dy * dy);
                const double needed = std::max(e.a, e.b) + std::max(other.a, other.b) + 4.0;
                if (d < needed) {
                    clear = false;
                    break;
                }
            }
            if (clear) ellipses.push_back(e);
        }
        if (static_cast<int>(ellipses.size()) < options.min_instances) continue;

        Rasterized ras = rasterize(ellipses, w, h);
        const std::vector<long long> areas = instance_areas(ras.labels, ellipses.size());
        bool ok = true;
        for (std::size_t e = 0; e < ellipses.size(); ++e)
            ok = ok && areas[e] >= min_instance_area(w, h) &&
                 instance_connected(ras.labels, static_cast<std::uint32_t>(e + 1));
        if (!ok) continue;
        const bool touching = has_touching_instances(ras.labels);
        if (want_touching != touching) continue;

        // render: textured background, dark stained ring, lighter lumen
        SynthSample sample;
        sample.labels = std::move(ras.labels);
        sample.has_touching_pair = touching;
        sample.image = Image(w, h, 3);
        const double tex_fx = rng.uniform(0.04, 0.09), tex_fy = rng.uniform(0.04, 0.09);
        const double tex_px = rng.uniform(0.0, 6.283185307179586);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::uint32_t id = sample.labels.at(x, y);
                double r, g, b;
                if (id == 0) {
                    const double tex = 8.0 * std::sin(tex_fx * x + tex_px) * std::sin(tex_fy * y);
                    r = 226 + tex;
                    g = 206 + tex;
                    b = 224 + tex;
                } else {
                    const double v = ras.values[id - 1][static_cast<std::size_t>(y) * w + x];
                    if (v >= kRingStart) {  // boundary ring
                        r = 122;
                        g = 72;
                        b = 148;
                    } else {  // lumen
                        r = 236;
                        g = 226;
                        b = 240;
                    }
                }
                sample.image.at(x, y, 0) = std::clamp(r + 5.0 * rng.gaussian(), 0.0, 255.0);
                sample.image.at(x, y, 1) = std::clamp(g + 5.0 * rng.gaussian(), 0.0, 255.0);
                sample.image.at(x, y, 2) = std::clamp(b + 5.0 * rng.gaussian(), 0.0, 255.0);
            }
        }
        sample.boxes = tight_boxes(sample.labels);
        return sample;
    }
    throw InternalError("synthetic generator failed to place instances after 64 attempts (index " +
                        std::to_string(index) + ")");
}

}  // namespace gmc::synth
