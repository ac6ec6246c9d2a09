#ifndef SEMLINK_SCENE_HPP
#define SEMLINK_SCENE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semlink/bits.hpp"
#include "semlink/image.hpp"
#include "semlink/rng.hpp"

namespace semlink {

enum class RegionKind { rectangle, polygon, remainder };

struct Region {
    std::string label;
    RegionKind kind = RegionKind::remainder;
    // rectangle: [x0, x1) x [y0, y1)
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    // polygon: vertices in pixel coordinates, tested against pixel centers
    std::vector<std::pair<double, double>> vertices;
};

struct TextureParams {
    double mean = 128.0;
    double variance = 100.0;
};

/// Synthetic scene description. Labels are indices into `layout`.
struct SceneSpec {
    int width = 256;
    int height = 256;
    std::vector<Region> layout;
    uint64_t texture_seed = 0;
    std::vector<TextureParams> texture;  // one entry per region

    /// 256x256 scene with three segments: a bottom band, a centered
    /// 12-gon, and the background remainder. Per-label means
    /// (80, 160, 120) and variances (900, 1600, 100) give the segments
    /// distinct statistics.
    static SceneSpec default_scene(uint64_t seed = 7) {
        SceneSpec spec;
        spec.width = 256;
        spec.height = 256;
        spec.texture_seed = seed;

        Region base;
        base.label = "base";
        base.kind = RegionKind::rectangle;
        base.x0 = 0;
        base.y0 = 192;
        base.x1 = 256;
        base.y1 = 256;

        Region stag;
        stag.label = "stag";
        stag.kind = RegionKind::polygon;
        const double cx = 128.0, cy = 96.0;
        const double r = std::sqrt(16384.0 / 3.0);  // regular 12-gon area = 3 r^2
        for (int i = 0; i < 12; ++i) {
            double a = 2.0 * 3.14159265358979323846 * i / 12.0;
            stag.vertices.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
        }

        Region background;
        background.label = "background";
        background.kind = RegionKind::remainder;

        spec.layout = {base, stag, background};
        spec.texture = {{80.0, 900.0}, {160.0, 1600.0}, {120.0, 100.0}};
        return spec;
    }
};

/// Per-pixel segment labels plus the exact size of their run-length code.
struct SemanticMap {
    int width = 0;
    int height = 0;
    int segment_count = 0;
    std::vector<uint8_t> labels;     // row-major, values 0..L-1
    uint64_t encoded_size_bits = 0;  // from encode_map()

    uint8_t label_at(int x, int y) const {
        return labels[static_cast<size_t>(y) * width + x];
    }
};

struct SemanticSegment {
    int id = 0;
    std::vector<uint32_t> pixel_index;  // row-major flat indices, strictly increasing
    std::vector<uint8_t> samples;

    size_t length() const { return samples.size(); }
};

/// Segment-level weights, per-receiver distortion targets and the bit-plane
/// weight base (plane b gets weight base^b before normalization).
struct ImportanceProfile {
    std::vector<double> sli;                       // per segment, sums to 1
    std::vector<std::vector<double>> rsi_targets;  // [segment][receiver]
    double bli_exponent_base = 4.0;

    void validate(size_t segment_count) const {
        if (sli.size() != segment_count)
            throw std::invalid_argument("ImportanceProfile: sli size != segment count");
        double sum = 0.0;
        for (double w : sli) {
            if (w < 0.0 || w > 1.0)
                throw std::invalid_argument("ImportanceProfile: sli weight outside [0,1]");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("ImportanceProfile: sli weights must sum to 1");
        for (const auto& row : rsi_targets)
            for (double d : row)
                if (d <= 0.0)
                    throw std::invalid_argument("ImportanceProfile: rsi targets must be > 0");
    }
};

namespace detail {

// even-odd rule against pixel center (px+0.5, py+0.5)
inline bool point_in_polygon(const std::vector<std::pair<double, double>>& poly,
                             double x, double y) {
    bool inside = false;
    size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        double xi = poly[i].first, yi = poly[i].second;
        double xj = poly[j].first, yj = poly[j].second;
        if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi)
            inside = !inside;
    }
    return inside;
}

inline bool region_contains(const Region& r, int px, int py) {
    switch (r.kind) {
        case RegionKind::rectangle:
            return px >= r.x0 && px < r.x1 && py >= r.y0 && py < r.y1;
        case RegionKind::polygon:
            return point_in_polygon(r.vertices, px + 0.5, py + 0.5);
        case RegionKind::remainder:
            return false;
    }
    return false;
}

}  // namespace detail

/// Row-major run-length code: each run is (label in ceil(log2 L) bits,
/// run length as Elias-gamma). L == 1 degenerates to gamma codes only.
inline BitWriter encode_map(const SemanticMap& map) {
    BitWriter w;
    const int label_bits = map.segment_count > 1 ? ceil_log2(map.segment_count) : 0;
    size_t i = 0;
    const size_t n = map.labels.size();
    while (i < n) {
        size_t j = i;
        while (j < n && map.labels[j] == map.labels[i]) ++j;
        if (label_bits > 0) w.put_uint(map.labels[i], label_bits);
        w.put_gamma(j - i);
        i = j;
    }
    return w;
}

inline std::vector<uint8_t> decode_map(std::span<const uint8_t> bytes, size_t nbits,
                                       int width, int height, int segment_count) {
    BitReader r(bytes, nbits);
    const int label_bits = segment_count > 1 ? ceil_log2(segment_count) : 0;
    std::vector<uint8_t> labels;
    labels.reserve(static_cast<size_t>(width) * height);
    const size_t total = static_cast<size_t>(width) * height;
    while (labels.size() < total) {
        uint8_t label = label_bits > 0 ? static_cast<uint8_t>(r.get_uint(label_bits)) : 0;
        uint64_t run = r.get_gamma();
        if (labels.size() + run > total) throw std::runtime_error("decode_map: run overflows map");
        labels.insert(labels.end(), run, label);
    }
    return labels;
}

struct Scene {
    Image image;
    SemanticMap map;
    std::vector<SemanticSegment> segments;
};

inline std::vector<SemanticSegment> partition(const Image& image, const SemanticMap& map);

/// Rasterizes the spec's regions, draws per-label Gaussian textures and
/// returns the image together with its map and segments. Pure in the spec:
/// the same spec (including seed) yields a bit-identical scene.
inline Scene generate_scene(const SceneSpec& spec) {
    if (spec.width < 16 || spec.height < 16)
        throw std::invalid_argument("SceneSpec: width and height must be >= 16");
    if (spec.layout.empty()) throw std::invalid_argument("SceneSpec: empty layout");
    if (spec.texture.size() != spec.layout.size())
        throw std::invalid_argument("SceneSpec: texture params must match layout size");

    int remainder_index = -1;
    for (size_t l = 0; l < spec.layout.size(); ++l) {
        if (spec.layout[l].kind == RegionKind::remainder) {
            if (remainder_index >= 0)
                throw std::invalid_argument("SceneSpec: more than one remainder region");
            remainder_index = static_cast<int>(l);
        }
    }
    if (remainder_index < 0)
        throw std::invalid_argument("SceneSpec: exactly one remainder region required");

    SemanticMap map;
    map.width = spec.width;
    map.height = spec.height;
    map.segment_count = static_cast<int>(spec.layout.size());
    map.labels.assign(static_cast<size_t>(spec.width) * spec.height,
                      static_cast<uint8_t>(remainder_index));
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            int hit = -1;
            for (size_t l = 0; l < spec.layout.size(); ++l) {
                if (detail::region_contains(spec.layout[l], x, y)) {
                    if (hit >= 0)
                        throw std::invalid_argument(
                            "SceneSpec: regions '" + spec.layout[hit].label + "' and '" +
                            spec.layout[l].label + "' overlap at pixel (" +
                            std::to_string(x) + "," + std::to_string(y) + ")");
                    hit = static_cast<int>(l);
                }
            }
            if (hit >= 0)
                map.labels[static_cast<size_t>(y) * spec.width + x] = static_cast<uint8_t>(hit);
        }
    }

    std::vector<size_t> counts(spec.layout.size(), 0);
    for (uint8_t l : map.labels) ++counts[l];
    for (size_t l = 0; l < counts.size(); ++l)
        if (counts[l] == 0)
            throw std::invalid_argument("SceneSpec: region '" + spec.layout[l].label +
                                        "' covers no pixel");

    map.encoded_size_bits = encode_map(map).bit_count();

    Image image(spec.width, spec.height);
    Philox rng(spec.texture_seed);
    for (size_t i = 0; i < map.labels.size(); ++i) {
        const TextureParams& t = spec.texture[map.labels[i]];
        double v = t.mean + std::sqrt(t.variance) * rng.gaussian();
        image.pixels[i] = static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l));
    }

    std::vector<SemanticSegment> segments = partition(image, map);
    return {std::move(image), std::move(map), std::move(segments)};
}

/// Splits an image into per-segment sample vectors in row-major order.
inline std::vector<SemanticSegment> partition(const Image& image, const SemanticMap& map) {
    if (image.width != map.width || image.height != map.height)
        throw std::invalid_argument("partition: image and map dimensions differ");
    std::vector<SemanticSegment> segments(map.segment_count);
    for (int l = 0; l < map.segment_count; ++l) segments[l].id = l;
    for (size_t i = 0; i < map.labels.size(); ++i) {
        SemanticSegment& s = segments[map.labels[i]];
        s.pixel_index.push_back(static_cast<uint32_t>(i));
        s.samples.push_back(image.pixels[i]);
    }
    for (const auto& s : segments)
        if (s.samples.empty())
            throw std::invalid_argument("partition: segment " + std::to_string(s.id) +
                                        " is empty");
    return segments;
}

/// Places every segment's samples back on the map's pixel grid. Inverse of
/// partition() when the samples are untouched.
inline Image reassemble(const std::vector<SemanticSegment>& segments, const SemanticMap& map) {
    std::vector<const SemanticSegment*> by_id(map.segment_count, nullptr);
    for (const auto& s : segments) {
        if (s.id < 0 || s.id >= map.segment_count)
            throw std::invalid_argument("reassemble: segment id out of range");
        by_id[s.id] = &s;
    }
    std::vector<size_t> counts(map.segment_count, 0);
    for (uint8_t l : map.labels) ++counts[l];
    for (int l = 0; l < map.segment_count; ++l) {
        if (by_id[l] == nullptr)
            throw std::invalid_argument("reassemble: missing segment " + std::to_string(l));
        if (by_id[l]->samples.size() != counts[l])
            throw std::invalid_argument("reassemble: segment " + std::to_string(l) +
                                        " length mismatch");
    }
    Image out(map.width, map.height);
    std::vector<size_t> cursor(map.segment_count, 0);
    for (size_t i = 0; i < map.labels.size(); ++i) {
        int l = map.labels[i];
        out.pixels[i] = by_id[l]->samples[cursor[l]++];
    }
    return out;
}

/// Size of the semantic map's run-length code relative to the payload it
/// accompanies.
inline double map_overhead(const SemanticMap& map, uint64_t compressed_payload_bits) {
    if (compressed_payload_bits == 0)
        throw std::invalid_argument("map_overhead: zero payload");
    return static_cast<double>(map.encoded_size_bits) /
           static_cast<double>(compressed_payload_bits);
}

}  // namespace semlink

#endif
