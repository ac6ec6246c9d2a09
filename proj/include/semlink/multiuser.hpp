#ifndef SEMLINK_MULTIUSER_HPP
#define SEMLINK_MULTIUSER_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "semlink/rate_distortion.hpp"
#include "semlink/tokenizer.hpp"

namespace semlink {

/// One refinement layer of a segment: a contiguous group of bit planes,
/// MSB-first. Layer 1 carries the planes of highest common interest;
/// decoding layer k requires layers 1..k-1.
struct Layer {
    int segment_id = 0;
    int k = 1;                // 1-based layer index
    std::vector<int> planes;  // descending plane indices, possibly empty
    BitVec payload;           // plane bit vectors concatenated in that order
};

struct ReceiverSpec {
    int id = 0;
    double snr_db = 10.0;
    std::vector<double> targets;  // D_{l,n} per segment

    void validate() const {
        for (double t : targets)
            if (t < 0.0) throw std::invalid_argument("ReceiverSpec: negative target");
    }
};

/// Splits a token stream into K layers of ceil(8/K) planes each, MSB
/// downward; the last layer takes whatever remains.
inline std::vector<Layer> rate_split(std::span<const Token> tokens, int K) {
    if (K < 1 || K > 8) throw std::invalid_argument("rate_split: K must be in 1..8");
    if (tokens.empty()) throw std::invalid_argument("rate_split: empty token stream");
    auto planes = split_bitplanes(tokens);
    const int group = (8 + K - 1) / K;
    std::vector<Layer> layers(K);
    int next_plane = 7;
    for (int k = 1; k <= K; ++k) {
        Layer& layer = layers[k - 1];
        layer.segment_id = tokens[0].segment_id;
        layer.k = k;
        int take = k < K ? std::min(group, next_plane + 1) : next_plane + 1;
        for (int j = 0; j < take; ++j) {
            layer.planes.push_back(next_plane);
            const BitVec& bits = planes[next_plane].bits;
            layer.payload.insert(layer.payload.end(), bits.begin(), bits.end());
            --next_plane;
        }
    }
    return layers;
}

/// Rebuilds token values from layers 1..k. Missing planes are filled with
/// the midpoint pattern (0 then all 1s), which halves the worst-case
/// truncation error relative to zero fill. Rejects gaps in the layer
/// sequence.
inline std::vector<uint8_t> decode_to_layer(std::span<const Layer> received, int k,
                                            size_t token_count) {
    if (k < 0 || token_count == 0)
        throw std::invalid_argument("decode_to_layer: bad depth or token count");
    std::vector<const Layer*> by_k(static_cast<size_t>(k), nullptr);
    for (const auto& layer : received) {
        if (layer.k < 1 || layer.k > k) continue;
        if (by_k[layer.k - 1] != nullptr)
            throw std::invalid_argument("decode_to_layer: duplicate layer " +
                                        std::to_string(layer.k));
        by_k[layer.k - 1] = &layer;
    }
    for (int j = 1; j <= k; ++j)
        if (by_k[j - 1] == nullptr)
            throw std::invalid_argument("decode_to_layer: missing prerequisite layer " +
                                        std::to_string(j));

    std::array<const uint8_t*, 8> plane_bits{};  // null -> truncated plane
    for (const Layer* layer : by_k) {
        size_t offset = 0;
        if (layer->payload.size() != layer->planes.size() * token_count)
            throw std::invalid_argument("decode_to_layer: payload size mismatch");
        for (int plane : layer->planes) {
            if (plane < 0 || plane > 7)
                throw std::invalid_argument("decode_to_layer: bad plane index");
            plane_bits[plane] = layer->payload.data() + offset;
            offset += token_count;
        }
    }

    // midpoint fill: highest truncated plane 0, the rest 1
    std::array<uint8_t, 8> fill{};
    bool top_missing_seen = false;
    for (int plane = 7; plane >= 0; --plane) {
        if (plane_bits[plane] != nullptr) continue;
        fill[plane] = top_missing_seen ? 1 : 0;
        top_missing_seen = true;
    }

    std::vector<uint8_t> values(token_count, 0);
    for (int plane = 7; plane >= 0; --plane) {
        if (plane_bits[plane] != nullptr) {
            const uint8_t* bits = plane_bits[plane];
            for (size_t i = 0; i < token_count; ++i)
                values[i] |= static_cast<uint8_t>((bits[i] & 1) << plane);
        } else if (fill[plane]) {
            for (size_t i = 0; i < token_count; ++i)
                values[i] |= static_cast<uint8_t>(1u << plane);
        }
    }
    return values;
}

/// Per-receiver squared-error distortion (same formula as empirical_sed).
inline double receiver_distortion(std::span<const uint8_t> x, std::span<const uint8_t> x_hat) {
    return empirical_sed(x, x_hat);
}

inline bool target_satisfied(double distortion, double target) { return distortion <= target; }

/// Noiseless reconstruction error when decoding only layers 1..k.
inline double truncation_distortion(std::span<const Token> tokens, int K, int k) {
    if (k < 0 || k > K) throw std::invalid_argument("truncation_distortion: depth out of range");
    auto layers = rate_split(tokens, K);
    auto rec = decode_to_layer(std::span<const Layer>(layers.data(), static_cast<size_t>(k)), k,
                               tokens.size());
    std::vector<uint8_t> original = detokenize(tokens);
    return empirical_sed(original, rec);
}

struct DepthResult {
    int depth = 0;
    bool reachable = true;
};

/// Smallest decode depth whose noiseless truncation distortion meets the
/// target; K with reachable=false when even full depth misses it.
inline DepthResult min_depth_for_target(std::span<const Token> tokens, int K, double target) {
    if (target < 0.0) throw std::invalid_argument("min_depth_for_target: negative target");
    for (int k = 0; k <= K; ++k)
        if (truncation_distortion(tokens, K, k) <= target) return {k, true};
    return {K, false};
}

enum class FrameKind { map, layer };

struct PlanEntry {
    int frame_id = 0;
    FrameKind kind = FrameKind::layer;
    int segment_id = -1;  // -1 for the map frame
    int k = 0;
    size_t bit_count = 0;
};

/// Transmission order: the semantic map first, then layer-1 frames by SLI
/// descending, then layer 2, and so on. Each entry is channel coded as its
/// own zero-tail block downstream, keeping layers independently decodable.
inline std::vector<PlanEntry> schedule_progressive(
    const std::vector<std::vector<Layer>>& per_segment_layers, std::span<const double> sli,
    size_t map_bits) {
    if (per_segment_layers.size() != sli.size())
        throw std::invalid_argument("schedule_progressive: sli size mismatch");
    std::vector<size_t> order(per_segment_layers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return sli[a] > sli[b]; });

    std::vector<PlanEntry> plan;
    plan.push_back({0, FrameKind::map, -1, 0, map_bits});
    size_t max_layers = 0;
    for (const auto& layers : per_segment_layers)
        max_layers = std::max(max_layers, layers.size());
    int frame_id = 1;
    for (size_t k = 1; k <= max_layers; ++k) {
        for (size_t idx : order) {
            const auto& layers = per_segment_layers[idx];
            if (k > layers.size()) continue;
            const Layer& layer = layers[k - 1];
            plan.push_back({frame_id++, FrameKind::layer, layer.segment_id, layer.k,
                            layer.payload.size()});
        }
    }
    return plan;
}

}  // namespace semlink

#endif
