#include <catch2/catch_amalgamated.hpp>

#include "semlink/rng.hpp"
#include "semlink/scene.hpp"
#include "semlink/tokenizer.hpp"

using namespace semlink;

namespace {

std::vector<Token> random_tokens(size_t n, uint64_t seed, int segment_id = 0) {
    Philox rng(seed);
    std::vector<Token> tokens(n);
    for (size_t i = 0; i < n; ++i)
        tokens[i] = {static_cast<uint8_t>(rng.next_u32()), static_cast<uint32_t>(i), segment_id};
    return tokens;
}

}  // namespace

TEST_CASE("tokenize is the identity byte mapping", "[tokenizer]") {
    SemanticSegment seg;
    seg.id = 3;
    seg.samples = {0, 255, 128};
    seg.pixel_index = {0, 1, 2};
    auto tokens = tokenize_segment(seg);
    REQUIRE(tokens.size() == 3);
    REQUIRE(tokens[0].value == 0);
    REQUIRE(tokens[1].value == 255);
    REQUIRE(tokens[2].value == 128);
    REQUIRE(tokens[2].segment_id == 3);
    REQUIRE(detokenize(tokens) == seg.samples);

    SemanticSegment empty;
    REQUIRE_THROWS_AS(tokenize_segment(empty), std::invalid_argument);
}

TEST_CASE("default scene yields 65536 tokens over three streams", "[tokenizer]") {
    Scene scene = generate_scene(SceneSpec::default_scene(7));
    size_t total = 0;
    int plane_streams = 0;
    for (const auto& seg : scene.segments) {
        auto tokens = tokenize_segment(seg);
        total += tokens.size();
        plane_streams += static_cast<int>(split_bitplanes(tokens).size());
    }
    REQUIRE(total == 65536u);
    REQUIRE(plane_streams == 24);
}

TEST_CASE("bit-plane split follows the bit positions", "[tokenizer]") {
    std::vector<Token> one{{0b10110001, 0, 0}};
    auto planes = split_bitplanes(one);
    int expected[8] = {1, 0, 0, 0, 1, 1, 0, 1};  // plane 0 .. plane 7
    for (int b = 0; b < 8; ++b) {
        REQUIRE(planes[b].plane == b);
        REQUIRE(planes[b].bits[0] == expected[b]);
    }
}

TEST_CASE("split and merge are exact inverses", "[tokenizer]") {
    auto tokens = random_tokens(1000, 99, 2);
    auto planes = split_bitplanes(tokens);
    auto merged = merge_bitplanes(planes);
    REQUIRE(merged.size() == tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) {
        REQUIRE(merged[i].value == tokens[i].value);
        REQUIRE(merged[i].segment_id == tokens[i].segment_id);
    }
}

TEST_CASE("merge handles degenerate planes and rejects bad input", "[tokenizer]") {
    auto tokens = random_tokens(5, 1);
    auto planes = split_bitplanes(tokens);

    for (auto& p : planes) std::fill(p.bits.begin(), p.bits.end(), 0);
    for (auto& t : merge_bitplanes(planes)) REQUIRE(t.value == 0);

    std::fill(planes[7].bits.begin(), planes[7].bits.end(), 1);
    for (auto& t : merge_bitplanes(planes)) REQUIRE(t.value == 128);

    SECTION("length mismatch") {
        planes[3].bits.pop_back();
        REQUIRE_THROWS_AS(merge_bitplanes(planes), std::invalid_argument);
    }
    SECTION("duplicate plane index") {
        planes[3].plane = 4;
        REQUIRE_THROWS_AS(merge_bitplanes(planes), std::invalid_argument);
    }
    SECTION("segment mismatch") {
        planes[2].segment_id = 9;
        REQUIRE_THROWS_AS(merge_bitplanes(planes), std::invalid_argument);
    }
}

TEST_CASE("TLI classification of the repeat program", "[tokenizer]") {
    TokenProgram prog = kolmo_encode("1010");
    REQUIRE(classify_tli(prog, 0) == TliClass::highly_robust);    // 'repeat'
    REQUIRE(classify_tli(prog, 1) == TliClass::highly_critical);  // pattern
    REQUIRE(classify_tli(prog, 2) == TliClass::moderately_robust);
    REQUIRE(classify_tli(prog, 3) == TliClass::highly_robust);  // 'times'
    REQUIRE_THROWS_AS(classify_tli(prog, 4), std::invalid_argument);
}

TEST_CASE("token grouping concatenates per class, order preserved", "[tokenizer]") {
    SECTION("single class") {
        std::vector<BitVec> bits{{1, 0}, {0, 1}, {1, 1}};
        std::vector<TliClass> classes(3, TliClass::highly_critical);
        auto blocks = group_tokens(bits, classes);
        REQUIRE(blocks.size() == 1);
        REQUIRE(blocks[0].bits == BitVec{1, 0, 0, 1, 1, 1});
    }
    SECTION("alternating classes keep relative order") {
        std::vector<BitVec> bits{{1}, {0}, {1, 1}, {0, 0}};
        std::vector<TliClass> classes{TliClass::highly_critical, TliClass::highly_robust,
                                      TliClass::highly_critical, TliClass::highly_robust};
        auto blocks = group_tokens(bits, classes);
        REQUIRE(blocks.size() == 2);
        REQUIRE(blocks[0].cls == TliClass::highly_critical);
        REQUIRE(blocks[0].bits == BitVec{1, 1, 1});
        REQUIRE(blocks[1].bits == BitVec{0, 0, 0});
    }
    SECTION("program block sizes equal per-class bit totals") {
        TokenProgram prog = kolmo_encode("1010");  // repeat '10' 2 times
        std::vector<BitVec> bits;
        std::vector<TliClass> classes;
        size_t per_class[3] = {0, 0, 0};
        for (size_t i = 0; i < prog.tokens.size(); ++i) {
            bits.push_back(program_token_bits(prog.tokens[i]));
            classes.push_back(classify_tli(prog, i));
            per_class[static_cast<int>(classes.back())] += bits.back().size();
        }
        auto blocks = group_tokens(bits, classes);
        REQUIRE(blocks.size() == 3);
        for (const auto& b : blocks)
            REQUIRE(b.bits.size() == per_class[static_cast<int>(b.cls)]);
        // pattern: 2 bits; count: 32 bits; keywords: 6+5 chars = 88 bits
        REQUIRE(blocks[0].bits.size() == 2);
        REQUIRE(blocks[1].bits.size() == 32);
        REQUIRE(blocks[2].bits.size() == 88);
    }
}

TEST_CASE("kolmo_encode finds the shortest period", "[tokenizer]") {
    SECTION("the two-million-digit string") {
        std::string s;
        s.reserve(2000000);
        for (int i = 0; i < 1000000; ++i) s += "10";
        TokenProgram prog = kolmo_encode(s);
        REQUIRE(prog.tokens[1].text == "10");
        REQUIRE(prog.tokens[2].count == 1000000u);
        auto out = kolmo_decode(prog);
        REQUIRE(out.status == DecodeOutcome::Status::ok);
        REQUIRE(out.output == s);
    }
    SECTION("no repetition falls back to a literal") {
        TokenProgram prog = kolmo_encode("1");
        REQUIRE(prog.tokens[1].text == "1");
        REQUIRE(prog.tokens[2].count == 1u);
    }
    SECTION("'101101' picks pattern '101' by brute force") {
        const std::string s = "101101";
        TokenProgram prog = kolmo_encode(s);
        REQUIRE(prog.tokens[1].text == "101");
        REQUIRE(prog.tokens[2].count == 2u);
        // brute-force check that no shorter divisor works
        for (size_t p = 1; p < 3; ++p) {
            if (s.size() % p != 0) continue;
            bool periodic = true;
            for (size_t i = p; i < s.size(); ++i)
                if (s[i] != s[i - p]) periodic = false;
            REQUIRE_FALSE(periodic);
        }
    }
    SECTION("alphabet violations are rejected") {
        REQUIRE_THROWS_AS(kolmo_encode("10a"), std::invalid_argument);
        REQUIRE_THROWS_AS(kolmo_encode(""), std::invalid_argument);
    }
}

TEST_CASE("kolmo_decode distinguishes silent and detected corruption", "[tokenizer]") {
    TokenProgram prog = kolmo_encode("101010");
    REQUIRE(kolmo_decode(prog).output == "101010");

    SECTION("keyword within distance 1 is corrected") {
        prog.tokens[3].text = "timex";
        auto out = kolmo_decode(prog);
        REQUIRE(out.status == DecodeOutcome::Status::corrected);
        REQUIRE(out.output == "101010");
    }
    SECTION("keyword beyond distance 1 fails loudly") {
        prog.tokens[0].text = "rapaat";
        auto out = kolmo_decode(prog);
        REQUIRE(out.status == DecodeOutcome::Status::failed);
        REQUIRE_FALSE(out.delivered());
    }
    SECTION("pattern flip is silent and wrong") {
        prog.tokens[1].text = "11";
        auto out = kolmo_decode(prog);
        REQUIRE(out.status == DecodeOutcome::Status::ok);
        REQUIRE(out.output == "111111");
    }
    SECTION("zero count is a detected failure") {
        prog.tokens[2].count = 0;
        REQUIRE_FALSE(kolmo_decode(prog).delivered());
    }
}

TEST_CASE("count bit flips: MSB hurts more than LSB", "[tokenizer]") {
    std::string s;
    for (int i = 0; i < 1000; ++i) s += "10";
    TokenProgram prog = kolmo_encode(s);
    const long long n = static_cast<long long>(s.size());

    auto deviation = [&](int bit) {
        TokenProgram corrupted = prog;
        corrupted.tokens[2].count ^= (1u << bit);
        auto out = kolmo_decode(corrupted);
        REQUIRE(out.delivered());
        return std::abs(static_cast<long long>(out.output.size()) - n);
    };
    int msb = 31;
    while (((prog.tokens[2].count >> msb) & 1u) == 0) --msb;
    REQUIRE(deviation(msb) > deviation(0));
}

TEST_CASE("program text form round-trips", "[tokenizer]") {
    TokenProgram prog = kolmo_encode("10101010");
    std::string line = program_to_text(prog);
    REQUIRE(line == "repeat 10 4 times");
    TokenProgram parsed = program_from_text(line);
    REQUIRE(kolmo_decode(parsed).output == "10101010");
    REQUIRE_THROWS_AS(program_from_text("repeat 10 times"), std::invalid_argument);
    REQUIRE_THROWS_AS(program_from_text("repeat 10 x times"), std::invalid_argument);
}
