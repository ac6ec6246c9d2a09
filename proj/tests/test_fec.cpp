#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "semlink/fec.hpp"
#include "semlink/phy.hpp"
#include "semlink/rng.hpp"

using namespace semlink;

namespace {

BitVec random_bits(size_t n, uint64_t seed) {
    Philox rng(seed);
    BitVec bits(n);
    for (auto& b : bits) b = rng.next_u32() & 1;
    return bits;
}

BitVec ascii_bits(const std::string& text) {
    BitVec bits;
    for (unsigned char c : text)
        for (int i = 7; i >= 0; --i) bits.push_back((c >> i) & 1);
    return bits;
}

}  // namespace

TEST_CASE("convolutional encoder basics", "[fec]") {
    SECTION("all-zero input stays all zero") {
        BitVec zeros(100, 0);
        BitVec coded = conv_encode(zeros);
        REQUIRE(coded.size() == 212);
        for (uint8_t b : coded) REQUIRE(b == 0);
    }
    SECTION("impulse response equals the 133/171 taps") {
        // tap coefficients of g1 = 1+D^2+D^3+D^5+D^6 and g2 = 1+D+D^2+D^3+D^6,
        // interleaved g1-first per step
        BitVec expected{1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1};
        REQUIRE(conv_encode(BitVec{1}) == expected);
    }
    SECTION("linearity over GF(2)") {
        for (uint64_t seed = 0; seed < 10; ++seed) {
            BitVec a = random_bits(64, seed * 2 + 1), b = random_bits(64, seed * 2 + 2);
            BitVec ab(64);
            for (size_t i = 0; i < 64; ++i) ab[i] = a[i] ^ b[i];
            BitVec ca = conv_encode(a), cb = conv_encode(b), cab = conv_encode(ab);
            for (size_t i = 0; i < cab.size(); ++i) REQUIRE(cab[i] == (ca[i] ^ cb[i]));
        }
    }
    REQUIRE_THROWS_AS(conv_encode(BitVec{}), std::invalid_argument);
}

TEST_CASE("Viterbi round-trips and corrects well-separated errors", "[fec]") {
    SECTION("noiseless round trip") {
        for (uint64_t seed = 0; seed < 8; ++seed) {
            BitVec msg = random_bits(200, seed + 40);
            REQUIRE(viterbi_decode_hard(conv_encode(msg)) == msg);
        }
    }
    SECTION("4 flips spaced >= 15 apart are always corrected") {
        Philox rng(77);
        BitVec msg = random_bits(300, 7);
        BitVec coded = conv_encode(msg);
        for (int pattern = 0; pattern < 25; ++pattern) {
            BitVec corrupted = coded;
            size_t pos = rng.next_u32() % 40;
            for (int e = 0; e < 4 && pos < corrupted.size(); ++e) {
                corrupted[pos] ^= 1;
                pos += 15 + rng.next_u32() % 80;
            }
            REQUIRE(viterbi_decode_hard(corrupted) == msg);
        }
    }
    SECTION("malformed llr length is rejected") {
        std::vector<double> llrs(13, 1.0);
        REQUIRE_THROWS_AS(viterbi_decode(llrs), std::invalid_argument);
    }
}

TEST_CASE("Viterbi is maximum likelihood on short blocks", "[fec]") {
    Philox rng(1234);
    for (int draw = 0; draw < 50; ++draw) {
        size_t k = 1 + draw % 12;
        BitVec msg = random_bits(k, 9000 + draw);
        BitVec coded = conv_encode(msg);
        // noisy LLRs around +-1
        std::vector<double> llrs(coded.size());
        for (size_t i = 0; i < coded.size(); ++i)
            llrs[i] = (coded[i] ? -1.0 : 1.0) + 1.2 * rng.gaussian();

        auto metric_of = [&](const BitVec& candidate) {
            BitVec c = conv_encode(candidate);
            double m = 0.0;
            for (size_t i = 0; i < c.size(); ++i) m += c[i] ? -llrs[i] : llrs[i];
            return m;
        };

        double best = -1e300;
        for (uint64_t word = 0; word < (uint64_t{1} << k); ++word) {
            BitVec candidate(k);
            for (size_t i = 0; i < k; ++i) candidate[i] = (word >> i) & 1;
            best = std::max(best, metric_of(candidate));
        }
        BitVec decoded = viterbi_decode(llrs);
        REQUIRE(metric_of(decoded) == Catch::Approx(best).margin(1e-9));
    }
}

TEST_CASE("CRC-16/CCITT-FALSE detects what it must", "[fec]") {
    SECTION("check value of '123456789'") {
        REQUIRE(crc16(ascii_bits("123456789")) == 0x29B1);
        std::vector<uint8_t> bytes{'1', '2', '3', '4', '5', '6', '7', '8', '9'};
        REQUIRE(oracles::crc16_table_bytes(bytes) == 0x29B1);
    }
    SECTION("bitwise implementation equals the table oracle on bytes") {
        Philox rng(31);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<uint8_t> bytes(1 + rng.next_u32() % 64);
            for (auto& b : bytes) b = static_cast<uint8_t>(rng.next_u32());
            BitVec bits;
            for (uint8_t b : bytes)
                for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
            REQUIRE(crc16(bits) == oracles::crc16_table_bytes(bytes));
        }
    }
    SECTION("append then check passes") {
        for (uint64_t seed = 0; seed < 10; ++seed)
            REQUIRE(crc_check(crc_append(random_bits(1 + seed * 13, seed))));
    }
    SECTION("every single-bit flip fails") {
        BitVec framed = crc_append(random_bits(61, 5));
        for (size_t i = 0; i < framed.size(); ++i) {
            framed[i] ^= 1;
            REQUIRE_FALSE(crc_check(framed));
            framed[i] ^= 1;
        }
    }
    SECTION("bursts up to 16 bits fail") {
        Philox rng(6);
        BitVec framed = crc_append(random_bits(120, 8));
        for (int trial = 0; trial < 300; ++trial) {
            size_t len = 2 + rng.next_u32() % 15;  // burst length 2..16
            size_t start = rng.next_u32() % (framed.size() - len);
            BitVec corrupted = framed;
            corrupted[start] ^= 1;
            corrupted[start + len - 1] ^= 1;
            for (size_t i = start + 1; i + 1 < start + len; ++i)
                corrupted[i] ^= rng.next_u32() & 1;
            REQUIRE_FALSE(crc_check(corrupted));
        }
    }
}

TEST_CASE("HARQ respects the attempt budget", "[fec]") {
    BitVec block = random_bits(64, 3);
    SECTION("error-free channel delivers on the first attempt") {
        auto clean = [](const BitVec& b) { return b; };
        auto outcome = harq_run(block, clean, {4});
        REQUIRE(outcome.delivered);
        REQUIRE(outcome.attempts == 1);
        REQUIRE(outcome.bits == block);
    }
    SECTION("hopeless channel exhausts the budget") {
        auto corrupt = [](const BitVec& b) {
            BitVec out = b;
            out[0] ^= 1;
            return out;
        };
        auto outcome = harq_run(block, corrupt, {4});
        REQUIRE_FALSE(outcome.delivered);
        REQUIRE(outcome.attempts == 4);
    }
    SECTION("mean attempts match the enumerated expectation at p = 0.5") {
        Philox rng(2024);
        const double p = 0.5;
        const int max_tx = 4;
        double expectation = 0.0;
        for (int k = 1; k < max_tx; ++k)
            expectation += k * std::pow(p, k - 1) * (1.0 - p);
        expectation += max_tx * std::pow(p, max_tx - 1);

        double total = 0.0;
        const int runs = 10000;
        for (int run = 0; run < runs; ++run) {
            auto channel = [&](const BitVec& b) {
                BitVec out = b;
                if (rng.uniform() < p) out[rng.next_u32() % out.size()] ^= 1;
                return out;
            };
            total += harq_run(block, channel, {max_tx}).attempts;
        }
        REQUIRE(total / runs == Catch::Approx(expectation).epsilon(0.05));
    }
    REQUIRE_THROWS_AS(harq_run(block, [](const BitVec& b) { return b; }, {0}),
                      std::invalid_argument);
}

TEST_CASE("coded 16-QAM beats uncoded by an order of magnitude at 10 dB", "[fec]") {
    const double snr = 10.0;  // Es/N0, linear
    const double n0 = 1.0 / snr;
    const size_t n_bits = 100000;
    BitVec msg = random_bits(n_bits, 51);
    SubChannel chan{0, 1.0, n0};

    size_t uncoded_errors = 0, coded_errors = 0;
    {
        Philox rng(61);
        auto symbols = qam16_modulate(msg);
        auto rx = transmit(symbols, 1.0, chan, rng);
        auto demod = qam16_demodulate(rx, n0, 1.0);
        for (size_t i = 0; i < n_bits; ++i)
            if (demod.hard_bits[i] != msg[i]) ++uncoded_errors;
    }
    {
        Philox rng(61);
        const size_t block = 2048;
        for (size_t off = 0; off < n_bits; off += block) {
            size_t len = std::min(block, n_bits - off);
            BitVec part(msg.begin() + off, msg.begin() + off + len);
            BitVec coded = conv_encode(part);
            auto symbols = qam16_modulate(coded);
            auto rx = transmit(symbols, 1.0, chan, rng);
            auto demod = qam16_demodulate(rx, n0, 1.0);
            demod.hard_bits.resize(coded.size());
            BitVec decoded = viterbi_decode_hard(demod.hard_bits);
            for (size_t i = 0; i < len; ++i)
                if (decoded[i] != part[i]) ++coded_errors;
        }
    }
    double uncoded_ber = static_cast<double>(uncoded_errors) / n_bits;
    double coded_ber = static_cast<double>(coded_errors) / n_bits;
    INFO("uncoded " << uncoded_ber << " coded " << coded_ber);
    REQUIRE(uncoded_ber > 0.0);
    REQUIRE(coded_ber * 10.0 < uncoded_ber);
}

TEST_CASE("protection schemes by importance class", "[fec]") {
    ProtectionPolicy policy;
    SECTION("highly critical: noiseless round trip is clean") {
        CodingBlock block{TliClass::highly_critical, random_bits(128, 1)};
        ProtectedFrame frame = protect(block, policy);
        auto res = unprotect(frame, policy);
        REQUIRE(res.status == UnprotectStatus::ok);
        REQUIRE(res.bits == block.bits);
    }
    SECTION("highly critical: corrected after a flip") {
        CodingBlock block{TliClass::highly_critical, random_bits(128, 2)};
        ProtectedFrame frame = protect(block, policy);
        frame.coded_bits[10] ^= 1;
        auto res = unprotect(frame, policy);
        REQUIRE(res.status == UnprotectStatus::corrected);
        REQUIRE(res.bits == block.bits);
    }
    SECTION("moderately robust: CRC catches one flip") {
        CodingBlock block{TliClass::moderately_robust, random_bits(100, 3)};
        ProtectedFrame frame = protect(block, policy);
        frame.coded_bits[42] ^= 1;
        REQUIRE(unprotect(frame, policy).status == UnprotectStatus::detected_failed);
    }
    SECTION("highly robust: a flip is tolerated and counted") {
        CodingBlock block{TliClass::highly_robust, random_bits(64, 4)};
        ProtectedFrame frame = protect(block, policy);
        frame.coded_bits[3] ^= 1;
        auto res = unprotect(frame, policy);
        REQUIRE(res.status == UnprotectStatus::tolerated_errors);
        REQUIRE(res.error_count == 1);
        BitVec expected = block.bits;
        expected[3] ^= 1;
        REQUIRE(res.bits == expected);
    }
}

TEST_CASE("frame wire format round-trips", "[fec]") {
    CodingBlock block{TliClass::moderately_robust, random_bits(77, 9)};
    ProtectedFrame frame = protect(block, {});
    auto bytes = serialize_frame(frame);
    REQUIRE(bytes.size() == 5 + (frame.coded_bits.size() + 7) / 8);
    ProtectedFrame back = deserialize_frame(bytes);
    REQUIRE(back.cls == frame.cls);
    REQUIRE(back.coded_bits == frame.coded_bits);

    bytes[0] = 9;
    REQUIRE_THROWS_AS(deserialize_frame(bytes), std::invalid_argument);
    REQUIRE_THROWS_AS(deserialize_frame(std::vector<uint8_t>{1, 2}), std::invalid_argument);
}
