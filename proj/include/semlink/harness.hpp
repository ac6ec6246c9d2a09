#ifndef SEMLINK_HARNESS_HPP
#define SEMLINK_HARNESS_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semlink/fec.hpp"
#include "semlink/metrics.hpp"
#include "semlink/multiuser.hpp"
#include "semlink/phy.hpp"
#include "semlink/power_allocation.hpp"
#include "semlink/rate_distortion.hpp"
#include "semlink/scene.hpp"
#include "semlink/tokenizer.hpp"

namespace semlink {

inline constexpr std::string_view kVersion = "semlink 0.1.0";

// Philox substream ids: noise uses the stream index directly; everything
// else lives far away from plausible stream counts.
inline constexpr uint32_t kGainStreamId = 0xFFFF0001u;

struct ChannelConfig {
    std::string mode = "fixed";  // fixed | rayleigh
    double avg_snr_db = 10.0;
    int n_subchannels = 24;
};

struct CodingConfig {
    int block_bits = 2048;
    int harq_max = 4;
};

struct RsiConfig {
    int layers = 4;
    std::vector<ReceiverSpec> receivers;
};

struct ExperimentConfig {
    SceneSpec scene = SceneSpec::default_scene();
    ImportanceProfile importance;
    ChannelConfig channel;
    CodingConfig coding;
    std::string allocation = "all";  // equal | waterfilling | importance | all
    RsiConfig rsi;
    int trials = 1;
    uint64_t seed = 42;

    static ExperimentConfig defaults() {
        ExperimentConfig cfg;
        cfg.importance.sli = {0.4975, 0.4975, 0.005};
        cfg.importance.bli_exponent_base = 4.0;
        cfg.rsi.receivers = {{0, 6.0, {25.0, 25.0, 1000.0}}, {1, 14.0, {2.0, 2.0, 400.0}}};
        cfg.importance.rsi_targets = {{25.0, 2.0}, {25.0, 2.0}, {1000.0, 400.0}};
        return cfg;
    }

    void validate() const {
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (allocation != "equal" && allocation != "waterfilling" &&
            allocation != "importance" && allocation != "all")
            throw std::invalid_argument("config: unknown allocation policy '" + allocation + "'");
        if (channel.mode != "fixed" && channel.mode != "rayleigh")
            throw std::invalid_argument("config: unknown channel mode '" + channel.mode + "'");
        if (channel.n_subchannels < 1)
            throw std::invalid_argument("config: n_subchannels must be >= 1");
        if (coding.block_bits < 1) throw std::invalid_argument("config: block_bits must be >= 1");
        if (coding.harq_max < 1) throw std::invalid_argument("config: harq_max must be >= 1");
        if (rsi.layers < 1 || rsi.layers > 8)
            throw std::invalid_argument("config: rsi.layers must be in 1..8");
        importance.validate(scene.layout.size());
        if (channel.n_subchannels != static_cast<int>(scene.layout.size()) * 8)
            throw std::invalid_argument(
                "config: n_subchannels must equal segments * 8 (bit-plane splitting)");
    }
};

// ---------------------------------------------------------------------------
// JSON config (exact field names, unknown keys rejected)
// ---------------------------------------------------------------------------

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& ctx) {
    if (!j.is_object()) throw std::invalid_argument("config: " + ctx + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + ctx);
    }
}

inline nlohmann::json region_to_json(const Region& r) {
    nlohmann::json j;
    j["label"] = r.label;
    switch (r.kind) {
        case RegionKind::rectangle:
            j["kind"] = "rectangle";
            j["x0"] = r.x0;
            j["y0"] = r.y0;
            j["x1"] = r.x1;
            j["y1"] = r.y1;
            break;
        case RegionKind::polygon: {
            j["kind"] = "polygon";
            auto verts = nlohmann::json::array();
            for (const auto& [x, y] : r.vertices) verts.push_back({x, y});
            j["vertices"] = verts;
            break;
        }
        case RegionKind::remainder: j["kind"] = "remainder"; break;
    }
    return j;
}

inline Region region_from_json(const nlohmann::json& j) {
    Region r;
    std::string kind = j.at("kind").get<std::string>();
    r.label = j.at("label").get<std::string>();
    if (kind == "rectangle") {
        require_keys(j, {"label", "kind", "x0", "y0", "x1", "y1"}, "segment_layout entry");
        r.kind = RegionKind::rectangle;
        r.x0 = j.at("x0").get<int>();
        r.y0 = j.at("y0").get<int>();
        r.x1 = j.at("x1").get<int>();
        r.y1 = j.at("y1").get<int>();
    } else if (kind == "polygon") {
        require_keys(j, {"label", "kind", "vertices"}, "segment_layout entry");
        r.kind = RegionKind::polygon;
        for (const auto& v : j.at("vertices"))
            r.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    } else if (kind == "remainder") {
        require_keys(j, {"label", "kind"}, "segment_layout entry");
        r.kind = RegionKind::remainder;
    } else {
        throw std::invalid_argument("config: unknown region kind '" + kind + "'");
    }
    return r;
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["scene"]["width"] = cfg.scene.width;
    j["scene"]["height"] = cfg.scene.height;
    j["scene"]["texture_seed"] = cfg.scene.texture_seed;
    auto layout = nlohmann::json::array();
    for (const auto& r : cfg.scene.layout) layout.push_back(detail::region_to_json(r));
    j["scene"]["segment_layout"] = layout;
    auto textures = nlohmann::json::array();
    for (const auto& t : cfg.scene.texture)
        textures.push_back({{"mean", t.mean}, {"variance", t.variance}});
    j["scene"]["texture_params"] = textures;

    j["importance"]["sli"] = cfg.importance.sli;
    j["importance"]["rsi_targets"] = cfg.importance.rsi_targets;
    j["importance"]["bli_exponent_base"] = cfg.importance.bli_exponent_base;

    j["channel"]["mode"] = cfg.channel.mode;
    j["channel"]["avg_snr_db"] = cfg.channel.avg_snr_db;
    j["channel"]["n_subchannels"] = cfg.channel.n_subchannels;

    j["coding"]["block_bits"] = cfg.coding.block_bits;
    j["coding"]["harq_max"] = cfg.coding.harq_max;

    j["allocation"] = cfg.allocation;

    j["rsi"]["layers"] = cfg.rsi.layers;
    auto receivers = nlohmann::json::array();
    for (const auto& r : cfg.rsi.receivers)
        receivers.push_back(
            {{"id", r.id}, {"snr_db", r.snr_db}, {"targets", r.targets}});
    j["rsi"]["receivers"] = receivers;

    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"scene", "importance", "channel", "coding", "allocation", "rsi",
                             "trials", "seed"},
                         "config root");
    ExperimentConfig cfg = ExperimentConfig::defaults();

    if (j.contains("scene")) {
        const auto& js = j["scene"];
        detail::require_keys(
            js, {"width", "height", "segment_layout", "texture_seed", "texture_params"}, "scene");
        if (js.contains("width")) cfg.scene.width = js["width"].get<int>();
        if (js.contains("height")) cfg.scene.height = js["height"].get<int>();
        if (js.contains("texture_seed")) cfg.scene.texture_seed = js["texture_seed"].get<uint64_t>();
        if (js.contains("segment_layout")) {
            cfg.scene.layout.clear();
            for (const auto& r : js["segment_layout"])
                cfg.scene.layout.push_back(detail::region_from_json(r));
        }
        if (js.contains("texture_params")) {
            cfg.scene.texture.clear();
            for (const auto& t : js["texture_params"]) {
                detail::require_keys(t, {"mean", "variance"}, "texture_params entry");
                cfg.scene.texture.push_back({t.at("mean").get<double>(),
                                             t.at("variance").get<double>()});
            }
        }
    }

    if (j.contains("importance")) {
        const auto& ji = j["importance"];
        detail::require_keys(ji, {"sli", "rsi_targets", "bli_exponent_base"}, "importance");
        if (ji.contains("sli")) cfg.importance.sli = ji["sli"].get<std::vector<double>>();
        if (ji.contains("rsi_targets"))
            cfg.importance.rsi_targets =
                ji["rsi_targets"].get<std::vector<std::vector<double>>>();
        if (ji.contains("bli_exponent_base"))
            cfg.importance.bli_exponent_base = ji["bli_exponent_base"].get<double>();
    }

    if (j.contains("channel")) {
        const auto& jc = j["channel"];
        detail::require_keys(jc, {"mode", "avg_snr_db", "n_subchannels"}, "channel");
        if (jc.contains("mode")) cfg.channel.mode = jc["mode"].get<std::string>();
        if (jc.contains("avg_snr_db")) cfg.channel.avg_snr_db = jc["avg_snr_db"].get<double>();
        if (jc.contains("n_subchannels"))
            cfg.channel.n_subchannels = jc["n_subchannels"].get<int>();
    }

    if (j.contains("coding")) {
        const auto& jc = j["coding"];
        detail::require_keys(jc, {"block_bits", "harq_max"}, "coding");
        if (jc.contains("block_bits")) cfg.coding.block_bits = jc["block_bits"].get<int>();
        if (jc.contains("harq_max")) cfg.coding.harq_max = jc["harq_max"].get<int>();
    }

    if (j.contains("allocation")) cfg.allocation = j["allocation"].get<std::string>();

    if (j.contains("rsi")) {
        const auto& jr = j["rsi"];
        detail::require_keys(jr, {"layers", "receivers"}, "rsi");
        if (jr.contains("layers")) cfg.rsi.layers = jr["layers"].get<int>();
        if (jr.contains("receivers")) {
            cfg.rsi.receivers.clear();
            for (const auto& r : jr["receivers"]) {
                detail::require_keys(r, {"id", "snr_db", "targets"}, "receiver");
                ReceiverSpec spec;
                spec.id = r.at("id").get<int>();
                spec.snr_db = r.at("snr_db").get<double>();
                spec.targets = r.at("targets").get<std::vector<double>>();
                cfg.rsi.receivers.push_back(std::move(spec));
            }
        }
    }

    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    f >> j;
    return config_from_json(j);
}

/// FNV-1a over the canonical (key-sorted, fully populated) JSON form: the
/// hash moves exactly when a semantically meaningful field moves.
inline std::string config_hash_hex(const ExperimentConfig& cfg) {
    std::string dump = config_to_json(cfg).dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Fig. 6 experiment
// ---------------------------------------------------------------------------

struct PolicyOutcome {
    std::string policy;
    std::vector<double> powers;
    std::vector<double> stream_ber;   // mean over trials
    std::vector<double> segment_sed;  // mean over trials
    double weighted_sed = 0.0;
    double ms_ssim_score = 0.0;
    double weighted_ber_objective = 0.0;
    Image reconstruction;  // trial 0
};

struct RunReport {
    std::string version{kVersion};
    std::string config_hash;
    uint64_t seed = 0;
    int trials = 1;
    uint64_t map_bits = 0;
    double map_overhead_at_2bps = 0.0;
    double map_overhead_at_8bps = 0.0;
    std::vector<double> weights;
    ChannelRealization channel;
    int background_segment = -1;
    bool background_tradeoff_observed = false;
    std::vector<PolicyOutcome> policies;

    const PolicyOutcome& policy(const std::string& name) const {
        for (const auto& p : policies)
            if (p.policy == name) return p;
        throw std::invalid_argument("RunReport: no policy '" + name + "'");
    }
};

namespace detail {

// One stream through encode -> 16-QAM -> AWGN -> demod -> Viterbi, block by
// block. Noise draws depend only on the rng state, never on the power, so
// policies sharing a (seed, stream, trial) substream see identical noise.
inline BitVec run_stream(const BitVec& msg, double power, const SubChannel& chan, int block_bits,
                         Philox& rng) {
    BitVec out;
    out.reserve(msg.size());
    const double amplitude = std::sqrt(power * chan.gain);
    for (size_t off = 0; off < msg.size(); off += static_cast<size_t>(block_bits)) {
        size_t len = std::min<size_t>(block_bits, msg.size() - off);
        std::span<const uint8_t> block(msg.data() + off, len);
        BitVec coded = conv_encode(block);
        auto symbols = qam16_modulate(coded);
        auto received = transmit(symbols, power, chan, rng);
        auto demod = qam16_demodulate(received, chan.n0, amplitude);
        std::span<const double> llrs(demod.llrs.data(), coded.size());
        BitVec decoded = viterbi_decode(llrs);
        out.insert(out.end(), decoded.begin(), decoded.end());
    }
    return out;
}

inline ChannelRealization make_channel(const ExperimentConfig& cfg) {
    const int m = cfg.channel.n_subchannels;
    const double total_power = static_cast<double>(m);
    if (cfg.channel.mode == "rayleigh") {
        Philox rng(cfg.seed, kGainStreamId);
        return rayleigh_channel(m, total_power, 1.0, cfg.channel.avg_snr_db, rng);
    }
    return fixed_channel(m, total_power, 1.0, cfg.channel.avg_snr_db);
}

}  // namespace detail

/// Runs the whole chain (scene -> tokens -> 24 bit-plane streams -> rate-1/2
/// convolutional code -> 16-QAM -> orthogonal AWGN sub-channels -> decode ->
/// reassemble -> metrics) under each requested power allocation policy.
/// Policies see identical channel noise.
inline RunReport run_fig6(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.allocation != "all")
        throw std::invalid_argument("run_fig6: requires allocation = \"all\"");

    Scene scene = generate_scene(cfg.scene);
    const size_t n_segments = scene.segments.size();

    std::vector<std::vector<Token>> tokens(n_segments);
    std::vector<std::array<BitPlaneStream, 8>> planes(n_segments);
    for (size_t l = 0; l < n_segments; ++l) {
        tokens[l] = tokenize_segment(scene.segments[l]);
        planes[l] = split_bitplanes(tokens[l]);
    }

    RunReport report;
    report.config_hash = config_hash_hex(cfg);
    report.seed = cfg.seed;
    report.trials = cfg.trials;
    report.map_bits = scene.map.encoded_size_bits;
    const uint64_t pixels = static_cast<uint64_t>(cfg.scene.width) * cfg.scene.height;
    report.map_overhead_at_2bps = map_overhead(scene.map, 2 * pixels);
    report.map_overhead_at_8bps = map_overhead(scene.map, 8 * pixels);
    report.weights = stream_weights(cfg.importance, n_segments);
    report.channel = detail::make_channel(cfg);
    for (size_t l = 0; l < cfg.scene.layout.size(); ++l)
        if (cfg.scene.layout[l].kind == RegionKind::remainder)
            report.background_segment = static_cast<int>(l);

    AllocationProblem prob{report.channel.gains, report.channel.n0, report.channel.total_power,
                           report.weights};

    std::vector<std::pair<std::string, AllocationResult>> allocations;
    allocations.emplace_back("equal", allocate_equal(prob));
    allocations.emplace_back("waterfilling", allocate_waterfilling(prob));
    allocations.emplace_back("importance", allocate_importance(prob));

    const int M = cfg.channel.n_subchannels;
    for (const auto& [name, alloc] : allocations) {
        PolicyOutcome outcome;
        outcome.policy = name;
        outcome.powers = alloc.powers;
        outcome.weighted_ber_objective = weighted_ber_objective(prob, alloc.powers);
        outcome.stream_ber.assign(M, 0.0);
        outcome.segment_sed.assign(n_segments, 0.0);

        for (int trial = 0; trial < cfg.trials; ++trial) {
            std::vector<SemanticSegment> rec_segments = scene.segments;
            for (size_t l = 0; l < n_segments; ++l) {
                std::array<BitPlaneStream, 8> rec_planes = planes[l];
                for (int b = 0; b < 8; ++b) {
                    const int stream_id = static_cast<int>(l) * 8 + b;
                    Philox rng(cfg.seed, static_cast<uint32_t>(stream_id),
                               static_cast<uint32_t>(trial));
                    BitVec decoded = detail::run_stream(
                        planes[l][b].bits, alloc.powers[stream_id],
                        report.channel.subchannel(stream_id), cfg.coding.block_bits, rng);
                    outcome.stream_ber[stream_id] +=
                        bit_error_rate(planes[l][b].bits, decoded) / cfg.trials;
                    rec_planes[b].bits = std::move(decoded);
                }
                auto rec_tokens = merge_bitplanes(rec_planes);
                rec_segments[l].samples = detokenize(rec_tokens);
                outcome.segment_sed[l] +=
                    empirical_sed(scene.segments[l].samples, rec_segments[l].samples) /
                    cfg.trials;
            }
            Image recon = reassemble(rec_segments, scene.map);
            outcome.ms_ssim_score += ms_ssim(scene.image, recon) / cfg.trials;
            if (trial == 0) outcome.reconstruction = std::move(recon);
        }

        outcome.weighted_sed = weighted_sed(outcome.segment_sed, cfg.importance.sli);
        report.policies.push_back(std::move(outcome));
    }

    if (report.background_segment >= 0) {
        double imp = report.policy("importance").segment_sed[report.background_segment];
        double eq = report.policy("equal").segment_sed[report.background_segment];
        report.background_tradeoff_observed = imp >= eq;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Artifact writers (fixed schemas, floats at 9 significant digits)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

inline void write_report_csv(const RunReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "policy,metric,index,value\n";
    for (const auto& p : report.policies) {
        for (size_t l = 0; l < p.segment_sed.size(); ++l)
            f << p.policy << ",segment_sed," << l << "," << detail::fmt9(p.segment_sed[l]) << "\n";
        f << p.policy << ",weighted_sed,," << detail::fmt9(p.weighted_sed) << "\n";
        f << p.policy << ",ms_ssim,," << detail::fmt9(p.ms_ssim_score) << "\n";
        f << p.policy << ",weighted_ber_objective,,"
          << detail::fmt9(p.weighted_ber_objective) << "\n";
        for (size_t i = 0; i < p.stream_ber.size(); ++i)
            f << p.policy << ",stream_ber," << i << "," << detail::fmt9(p.stream_ber[i]) << "\n";
        for (size_t i = 0; i < p.powers.size(); ++i)
            f << p.policy << ",power," << i << "," << detail::fmt9(p.powers[i]) << "\n";
    }
}

inline void write_alloc_csv(const RunReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "policy,stream_id,segment,plane,weight,gain,power,post_allocation_snr_db\n";
    for (const auto& p : report.policies) {
        for (size_t i = 0; i < p.powers.size(); ++i) {
            double snr = p.powers[i] * report.channel.gains[i] / report.channel.n0;
            double snr_db = snr > 0.0 ? 10.0 * std::log10(snr)
                                      : -std::numeric_limits<double>::infinity();
            f << p.policy << "," << i << "," << i / 8 << "," << i % 8 << ","
              << detail::fmt9(report.weights[i]) << "," << detail::fmt9(report.channel.gains[i])
              << "," << detail::fmt9(p.powers[i]) << "," << detail::fmt9(snr_db) << "\n";
        }
    }
}

inline void write_meta_json(const RunReport& report, const ExperimentConfig& cfg,
                            const std::string& path) {
    nlohmann::json j;
    j["version"] = report.version;
    j["config_hash"] = report.config_hash;
    j["seed"] = report.seed;
    j["trials"] = report.trials;
    j["map_bits"] = report.map_bits;
    j["map_overhead_at_2bps"] = report.map_overhead_at_2bps;
    j["map_overhead_at_8bps"] = report.map_overhead_at_8bps;
    j["average_snr_db"] = report.channel.average_snr_db;
    j["gains"] = report.channel.gains;
    j["background_segment"] = report.background_segment;
    j["background_tradeoff_observed"] = report.background_tradeoff_observed;
    j["config"] = config_to_json(cfg);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

inline void write_run_artifacts(const RunReport& report, const ExperimentConfig& cfg,
                                const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_report_csv(report, out_dir + "/report.csv");
    write_alloc_csv(report, out_dir + "/alloc.csv");
    write_meta_json(report, cfg, out_dir + "/meta.json");
    for (const auto& p : report.policies)
        write_pgm(p.reconstruction, out_dir + "/recon_" + p.policy + ".pgm");
}

/// Symbol trace dump for debugging: index, I, Q.
inline void write_symbol_trace(std::span<const Complex> symbols, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "index,i,q\n";
    for (size_t i = 0; i < symbols.size(); ++i)
        f << i << "," << detail::fmt9(symbols[i].real()) << "," << detail::fmt9(symbols[i].imag())
          << "\n";
}

// ---------------------------------------------------------------------------
// SNR sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double snr_db = 0.0;
    std::string policy;
    std::string metric;
    double value = 0.0;
};

inline std::vector<SweepRow> sweep_snr(const ExperimentConfig& cfg,
                                       const std::vector<double>& snr_list) {
    if (snr_list.empty()) throw std::invalid_argument("sweep_snr: empty SNR list");
    std::vector<SweepRow> rows;
    for (double snr : snr_list) {
        ExperimentConfig point = cfg;
        point.channel.avg_snr_db = snr;
        point.allocation = "all";
        RunReport report = run_fig6(point);
        for (const auto& p : report.policies) {
            double mean_ber = 0.0;
            for (double b : p.stream_ber) mean_ber += b / p.stream_ber.size();
            rows.push_back({snr, p.policy, "weighted_sed", p.weighted_sed});
            rows.push_back({snr, p.policy, "ms_ssim", p.ms_ssim_score});
            rows.push_back({snr, p.policy, "mean_stream_ber", mean_ber});
        }
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "snr_db,policy,metric,value\n";
    for (const auto& r : rows)
        f << detail::fmt9(r.snr_db) << "," << r.policy << "," << r.metric << ","
          << detail::fmt9(r.value) << "\n";
}

// ---------------------------------------------------------------------------
// Token importance demo (the 2-million-digit program)
// ---------------------------------------------------------------------------

struct TokenDemoReport {
    std::string program_line;
    size_t clean_length = 0;
    bool clean_exact = false;
    long long lsb_length_deviation = 0;
    long long msb_length_deviation = 0;
    bool lsb_detected = false;
    bool msb_detected = false;
    bool pattern_flip_detected = false;
    bool keyword_typo_corrected = false;
    bool keyword_garble_detected = false;
    std::vector<std::pair<std::string, TliClass>> classifications;
    std::string text;  // printable summary
};

inline TokenDemoReport demo_tokens() {
    std::string source;
    source.reserve(2000000);
    for (int i = 0; i < 1000000; ++i) source += "10";

    TokenProgram program = kolmo_encode(source);
    TokenDemoReport report;
    report.program_line = program_to_text(program);

    const char* names[4] = {"keyword 'repeat'", "pattern '10'", "count 1000000",
                            "keyword 'times'"};
    for (size_t i = 0; i < program.tokens.size(); ++i)
        report.classifications.emplace_back(names[i], classify_tli(program, i));

    DecodeOutcome clean = kolmo_decode(program);
    report.clean_length = clean.output.size();
    report.clean_exact = clean.delivered() && clean.output == source;

    const long long n = static_cast<long long>(source.size());
    auto count_flip_deviation = [&](int bit, bool& detected) -> long long {
        TokenProgram corrupted = program;
        corrupted.tokens[2].count ^= (1u << bit);
        DecodeOutcome out = kolmo_decode(corrupted);
        detected = !out.delivered();
        if (detected) return 0;
        return std::abs(static_cast<long long>(out.output.size()) - n);
    };
    int msb = 31;
    while (((program.tokens[2].count >> msb) & 1u) == 0) --msb;
    report.lsb_length_deviation = count_flip_deviation(0, report.lsb_detected);
    report.msb_length_deviation = count_flip_deviation(msb, report.msb_detected);

    TokenProgram pattern_flip = program;
    pattern_flip.tokens[1].text = "11";
    DecodeOutcome pat = kolmo_decode(pattern_flip);
    report.pattern_flip_detected = !pat.delivered();

    TokenProgram typo = program;
    typo.tokens[3].text = "timex";
    report.keyword_typo_corrected =
        kolmo_decode(typo).status == DecodeOutcome::Status::corrected;

    TokenProgram garble = program;
    garble.tokens[3].text = "tamex";
    report.keyword_garble_detected = !kolmo_decode(garble).delivered();

    std::ostringstream os;
    os << "program: " << report.program_line << "\n";
    os << "decoded length " << report.clean_length << " ("
       << (report.clean_exact ? "exact" : "MISMATCH") << ")\n\n";
    os << "token classes:\n";
    for (const auto& [name, cls] : report.classifications)
        os << "  " << name << " -> " << to_string(cls) << "\n";
    os << "\ncorruption severity (count token):\n";
    os << "  LSB flip: length deviation " << report.lsb_length_deviation
       << (report.lsb_detected ? " [detected]" : " [silent]") << "\n";
    os << "  MSB flip: length deviation " << report.msb_length_deviation
       << (report.msb_detected ? " [detected]" : " [silent]") << "\n";
    os << "pattern '10'->'11' flip: " << (report.pattern_flip_detected ? "detected" : "silent")
       << " (wrong sequence)\n";
    os << "keyword 'times'->'timex': "
       << (report.keyword_typo_corrected ? "auto-corrected" : "NOT corrected") << "\n";
    os << "keyword 'times'->'tamex': "
       << (report.keyword_garble_detected ? "decode failure, retransmission" : "NOT detected")
       << "\n";
    report.text = os.str();
    return report;
}

// ---------------------------------------------------------------------------
// Multicast / progressive transmission demo
// ---------------------------------------------------------------------------

struct MulticastEntry {
    int receiver = 0;
    int segment = 0;
    int depth = 0;
    bool reachable = true;
    double distortion = 0.0;
    double target = 0.0;
    bool satisfied = false;
};

struct MulticastReport {
    std::vector<PlanEntry> plan;
    std::vector<MulticastEntry> entries;
};

inline MulticastReport multicast_demo(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.rsi.receivers.size() < 2)
        throw std::invalid_argument("multicast_demo: need at least 2 receivers");

    Scene scene = generate_scene(cfg.scene);
    const size_t n_segments = scene.segments.size();
    const int K = cfg.rsi.layers;

    std::vector<std::vector<Token>> tokens(n_segments);
    std::vector<std::vector<Layer>> layers(n_segments);
    for (size_t l = 0; l < n_segments; ++l) {
        tokens[l] = tokenize_segment(scene.segments[l]);
        layers[l] = rate_split(tokens[l], K);
    }

    MulticastReport report;
    report.plan = schedule_progressive(layers, cfg.importance.sli, scene.map.encoded_size_bits);

    for (const auto& rx : cfg.rsi.receivers) {
        rx.validate();
        if (rx.targets.size() != n_segments)
            throw std::invalid_argument("multicast_demo: receiver targets must cover segments");
        for (size_t l = 0; l < n_segments; ++l) {
            MulticastEntry e;
            e.receiver = rx.id;
            e.segment = static_cast<int>(l);
            e.target = rx.targets[l];
            DepthResult depth = min_depth_for_target(tokens[l], K, rx.targets[l]);
            e.depth = depth.depth;
            e.reachable = depth.reachable;
            auto rec = decode_to_layer(
                std::span<const Layer>(layers[l].data(), static_cast<size_t>(e.depth)), e.depth,
                tokens[l].size());
            e.distortion = receiver_distortion(scene.segments[l].samples, rec);
            e.satisfied = target_satisfied(e.distortion, e.target);
            report.entries.push_back(e);
        }
    }
    return report;
}

inline void write_plan_csv(const std::vector<PlanEntry>& plan, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "frame_id,kind,segment_id,k,bit_count\n";
    for (const auto& e : plan)
        f << e.frame_id << "," << (e.kind == FrameKind::map ? "map" : "layer") << ","
          << e.segment_id << "," << e.k << "," << e.bit_count << "\n";
}

inline void write_multicast_csv(const MulticastReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "receiver,segment,depth,reachable,distortion,target,satisfied\n";
    for (const auto& e : report.entries)
        f << e.receiver << "," << e.segment << "," << e.depth << "," << (e.reachable ? 1 : 0)
          << "," << detail::fmt9(e.distortion) << "," << detail::fmt9(e.target) << ","
          << (e.satisfied ? 1 : 0) << "\n";
}

}  // namespace semlink

#endif
