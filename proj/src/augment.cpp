#include "gmc/augment.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace gmc::augment {

using nlohmann::json;

namespace {

const char* kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::HFlip: return "hflip";
        case TransformKind::Rot90: return "rot90";
        case TransformKind::Sinusoidal: return "sinusoidal";
        case TransformKind::Pincushion: return "pincushion";
        case TransformKind::Shear: return "shear";
        case TransformKind::Crop: return "crop";
    }
    return "?";
}

TransformKind kind_from_name(const std::string& s) {
    if (s == "hflip") return TransformKind::HFlip;
    if (s == "rot90") return TransformKind::Rot90;
    if (s == "sinusoidal") return TransformKind::Sinusoidal;
    if (s == "pincushion") return TransformKind::Pincushion;
    if (s == "shear") return TransformKind::Shear;
    if (s == "crop") return TransformKind::Crop;
    throw DataError("unknown transform kind '" + s + "'");
}

json spec_to_json(const TransformSpec& t) {
    json j{{"kind", kind_name(t.kind)}};
    switch (t.kind) {
        case TransformKind::HFlip: break;
        case TransformKind::Rot90: j["k"] = t.k; break;
        case TransformKind::Sinusoidal:
            j["amplitude"] = t.amplitude;
            j["period"] = t.period;
            break;
        case TransformKind::Pincushion: j["strength"] = t.strength; break;
        case TransformKind::Shear: j["shear"] = t.shear; break;
        case TransformKind::Crop:
            j["x"] = t.x;
            j["y"] = t.y;
            j["w"] = t.w;
            j["h"] = t.h;
            break;
    }
    return j;
}

TransformSpec spec_from_json(const json& j) {
    TransformSpec t;
    t.kind = kind_from_name(j.at("kind").get<std::string>());
    switch (t.kind) {
        case TransformKind::HFlip: break;
        case TransformKind::Rot90: t.k = j.at("k").get<int>(); break;
        case TransformKind::Sinusoidal:
            t.amplitude = j.at("amplitude").get<double>();
            t.period = j.at("period").get<double>();
            break;
        case TransformKind::Pincushion: t.strength = j.at("strength").get<double>(); break;
        case TransformKind::Shear: t.shear = j.at("shear").get<double>(); break;
        case TransformKind::Crop:
            t.x = j.at("x").get<int>();
            t.y = j.at("y").get<int>();
            t.w = j.at("w").get<int>();
            t.h = j.at("h").get<int>();
            break;
    }
    return t;
}

Sample hflip(const Sample& s) {
    Sample out = s;
    const int w = s.image.width, h = s.image.height, c = s.image.channels;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            for (int ci = 0; ci < c; ++ci) out.image.at(x, y, ci) = s.image.at(w - 1 - x, y, ci);
            out.labels.at(x, y) = s.labels.at(w - 1 - x, y);
        }
    return out;
}

// One quarter turn clockwise: out(x', y') = in(y', H_in - 1 - x').
Sample rot90_once(const Sample& s) {
    Sample out = s;
    const int w = s.image.width, h = s.image.height, c = s.image.channels;
    out.image = Image(h, w, c);
    out.labels = InstanceMap(h, w);
    for (int y = 0; y < w; ++y)
        for (int x = 0; x < h; ++x) {
            for (int ci = 0; ci < c; ++ci) out.image.at(x, y, ci) = s.image.at(y, h - 1 - x, ci);
            out.labels.at(x, y) = s.labels.at(y, h - 1 - x);
        }
    return out;
}

Sample crop(const Sample& s, const TransformSpec& t) {
    if (t.x < 0 || t.y < 0 || t.w <= 0 || t.h <= 0 || t.x + t.w > s.image.width ||
        t.y + t.h > s.image.height)
        throw DataError("crop window (" + std::to_string(t.x) + "," + std::to_string(t.y) + "," +
                        std::to_string(t.w) + "," + std::to_string(t.h) + ") out of bounds for " +
                        std::to_string(s.image.width) + "x" + std::to_string(s.image.height));
    Sample out = s;
    out.image = Image(t.w, t.h, s.image.channels);
    out.labels = InstanceMap(t.w, t.h);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) {
            for (int ci = 0; ci < s.image.channels; ++ci)
                out.image.at(x, y, ci) = s.image.at(t.x + x, t.y + y, ci);
            out.labels.at(x, y) = s.labels.at(t.x + x, t.y + y);
        }
    return out;
}

/// Continuous inverse-mapped warp. src(x,y) gives the source coordinate
/// sampled for output pixel (x,y).
template <typename SrcFn>
Sample warp(const Sample& s, SrcFn src) {
    const int w = s.image.width, h = s.image.height, c = s.image.channels;
    std::vector<double> channel_mean(static_cast<std::size_t>(c), 0.0);
    for (int ci = 0; ci < c; ++ci) {
        double sum = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) sum += s.image.at(x, y, ci);
        channel_mean[static_cast<std::size_t>(ci)] = sum / (static_cast<double>(w) * h);
    }

    Sample out = s;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto [sx, sy] = src(x, y);
            // image: bilinear with mean fill
            if (sx < 0 || sy < 0 || sx > w - 1 || sy > h - 1) {
                for (int ci = 0; ci < c; ++ci) out.image.at(x, y, ci) = channel_mean[static_cast<std::size_t>(ci)];
            } else {
                const int x0 = static_cast<int>(std::floor(sx));
                const int y0 = static_cast<int>(std::floor(sy));
                const int x1 = std::min(x0 + 1, w - 1);
                const int y1 = std::min(y0 + 1, h - 1);
                const double fx = sx - x0, fy = sy - y0;
                for (int ci = 0; ci < c; ++ci) {
                    const double top = s.image.at(x0, y0, ci) * (1 - fx) + s.image.at(x1, y0, ci) * fx;
                    const double bot = s.image.at(x0, y1, ci) * (1 - fx) + s.image.at(x1, y1, ci) * fx;
                    out.image.at(x, y, ci) = top * (1 - fy) + bot * fy;
                }
            }
            // labels: nearest neighbor, background fill
            const long nx = std::lround(sx), ny = std::lround(sy);
            out.labels.at(x, y) =
                (nx < 0 || ny < 0 || nx >= w || ny >= h) ? 0 : s.labels.at(static_cast<int>(nx), static_cast<int>(ny));
        }
    }
    return out;
}

}  // namespace

std::string TransformSpec::json() const { return spec_to_json(*this).dump(); }

TransformSpec TransformSpec::from_json(const std::string& text) {
    try {
        return spec_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad transform record: ") + e.what());
    }
}

Image per_channel_zero_mean(const Image& image) {
    Image out = image;
    const std::size_t plane = static_cast<std::size_t>(image.width) * image.height;
    for (int ci = 0; ci < image.channels; ++ci) {
        double sum = 0.0;
        for (std::size_t p = 0; p < plane; ++p) sum += image.values[p * image.channels + ci];
        const double mean = sum / static_cast<double>(plane);
        for (std::size_t p = 0; p < plane; ++p) out.values[p * image.channels + ci] -= mean;
    }
    return out;
}

Sample apply_geometric(const Sample& sample, const TransformSpec& spec) {
    if (sample.image.width != sample.labels.width || sample.image.height != sample.labels.height)
        throw DataError("sample image and labels disagree on dimensions");
    Sample out;
    switch (spec.kind) {
        case TransformKind::HFlip: out = hflip(sample); break;
        case TransformKind::Rot90: {
            out = sample;
            const int turns = ((spec.k % 4) + 4) % 4;
            for (int i = 0; i < turns; ++i) out = rot90_once(out);
            break;
        }
        case TransformKind::Sinusoidal: {
            constexpr double tau = 6.283185307179586;
            const double a = spec.amplitude, t = spec.period;
            out = warp(sample, [a, t](int x, int y) {
                return std::pair<double, double>(x + a * std::sin(tau * y / t), y);
            });
            break;
        }
        case TransformKind::Pincushion: {
            const double cx = (sample.image.width - 1) / 2.0, cy = (sample.image.height - 1) / 2.0;
            const double r_max = std::sqrt(cx * cx + cy * cy);
            const double kappa = spec.strength;
            out = warp(sample, [cx, cy, r_max, kappa](int x, int y) {
                const double dx = x - cx, dy = y - cy;
                const double r = std::sqrt(dx * dx + dy * dy);
                const double scale = 1.0 + kappa * (r / r_max) * (r / r_max);
                return std::pair<double, double>(cx + dx * scale, cy + dy * scale);
            });
            break;
        }
        case TransformKind::Shear: {
            const double sf = spec.shear;
            out = warp(sample, [sf](int x, int y) { return std::pair<double, double>(x + sf * y, y); });
            break;
        }
        case TransformKind::Crop: out = crop(sample, spec); break;
    }
    out.source_id = sample.source_id;
    out.log = sample.log;
    out.log.push_back(spec);
    return out;
}

Sample replay(const Sample& source, const std::vector<TransformSpec>& log) {
    Sample s = source;
    for (const TransformSpec& t : log) s = apply_geometric(s, t);
    return s;
}

std::vector<Sample> augment_strategy(const Sample& sample, char strategy, std::uint64_t seed,
                                     const StrategyOptions& options) {
    const bool two = strategy == '2';
    if (strategy != '1' && !two) throw ConfigError("strategy must be '1' (I) or '2' (II)");

    Rng rng(derive_seed(seed, sample.source_id));
    std::vector<Sample> out;

    auto finish = [&](Sample s) {
        const int cw = std::min(options.crop_size, s.image.width);
        const int ch = std::min(options.crop_size, s.image.height);
        if (cw < s.image.width || ch < s.image.height) {
            TransformSpec c;
            c.kind = TransformKind::Crop;
            c.w = cw;
            c.h = ch;
            c.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.image.width - cw + 1)));
            c.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.image.height - ch + 1)));
            s = apply_geometric(s, c);
        }
        out.push_back(std::move(s));
    };

    for (int flip = 0; flip < 2; ++flip) {
        for (int k = 0; k < 4; ++k) {
            Sample s = sample;
            if (flip) {
                TransformSpec f;
                f.kind = TransformKind::HFlip;
                s = apply_geometric(s, f);
            }
            if (k) {
                TransformSpec r;
                r.kind = TransformKind::Rot90;
                r.k = k;
                s = apply_geometric(s, r);
            }
            finish(std::move(s));
        }
    }

    if (two) {
        for (int i = 0; i < options.warp_variants; ++i) {
            TransformSpec t;
            switch (i % 3) {
                case 0:
                    t.kind = TransformKind::Sinusoidal;
                    t.amplitude = rng.uniform(options.sin_amplitude_lo, options.sin_amplitude_hi);
                    t.period = rng.uniform(options.sin_period_lo, options.sin_period_hi);
                    break;
                case 1:
                    t.kind = TransformKind::Pincushion;
                    t.strength = rng.uniform(options.pincushion_lo, options.pincushion_hi);
                    break;
                default:
                    t.kind = TransformKind::Shear;
                    t.shear = rng.uniform(options.shear_lo, options.shear_hi);
                    break;
            }
            finish(apply_geometric(sample, t));
        }
    }
    return out;
}

std::string log_record(const Sample& sample, const std::string& output_name) {
    json j;
    j["output"] = output_name;
    j["source"] = sample.source_id;
    json transforms = json::array();
    for (const TransformSpec& t : sample.log) transforms.push_back(spec_to_json(t));
    j["transforms"] = transforms;
    return j.dump();
}

}  // namespace gmc::augment
