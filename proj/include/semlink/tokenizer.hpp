#ifndef SEMLINK_TOKENIZER_HPP
#define SEMLINK_TOKENIZER_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semlink/bits.hpp"
#include "semlink/scene.hpp"

namespace semlink {

/// One 8-bit byte of a segment stream.
struct Token {
    uint8_t value = 0;
    uint32_t index = 0;
    int segment_id = 0;
};

enum class TliClass { highly_critical, moderately_robust, highly_robust };

inline const char* to_string(TliClass c) {
    switch (c) {
        case TliClass::highly_critical: return "highly_critical";
        case TliClass::moderately_robust: return "moderately_robust";
        case TliClass::highly_robust: return "highly_robust";
    }
    return "?";
}

/// Bit b of every token of one segment, in token order. Plane 7 is the MSB.
struct BitPlaneStream {
    int segment_id = 0;
    int plane = 0;
    BitVec bits;
};

inline std::vector<Token> tokenize_segment(const SemanticSegment& segment) {
    if (segment.samples.empty()) throw std::invalid_argument("tokenize_segment: empty segment");
    std::vector<Token> tokens(segment.samples.size());
    for (size_t i = 0; i < segment.samples.size(); ++i)
        tokens[i] = {segment.samples[i], static_cast<uint32_t>(i), segment.id};
    return tokens;
}

inline std::vector<uint8_t> detokenize(std::span<const Token> tokens) {
    std::vector<uint8_t> samples(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) samples[i] = tokens[i].value;
    return samples;
}

inline std::array<BitPlaneStream, 8> split_bitplanes(std::span<const Token> tokens) {
    if (tokens.empty()) throw std::invalid_argument("split_bitplanes: empty token stream");
    std::array<BitPlaneStream, 8> planes;
    for (int b = 0; b < 8; ++b) {
        planes[b].segment_id = tokens[0].segment_id;
        planes[b].plane = b;
        planes[b].bits.resize(tokens.size());
    }
    for (size_t i = 0; i < tokens.size(); ++i)
        for (int b = 0; b < 8; ++b)
            planes[b].bits[i] = (tokens[i].value >> b) & 1;
    return planes;
}

inline std::vector<Token> merge_bitplanes(std::span<const BitPlaneStream> planes) {
    if (planes.size() != 8) throw std::invalid_argument("merge_bitplanes: need 8 planes");
    std::array<const BitPlaneStream*, 8> by_plane{};
    for (const auto& p : planes) {
        if (p.plane < 0 || p.plane > 7)
            throw std::invalid_argument("merge_bitplanes: plane index out of range");
        if (by_plane[p.plane] != nullptr)
            throw std::invalid_argument("merge_bitplanes: duplicate plane " +
                                        std::to_string(p.plane));
        by_plane[p.plane] = &p;
    }
    const size_t n = by_plane[0]->bits.size();
    const int seg = by_plane[0]->segment_id;
    for (const auto* p : by_plane) {
        if (p->bits.size() != n) throw std::invalid_argument("merge_bitplanes: length mismatch");
        if (p->segment_id != seg)
            throw std::invalid_argument("merge_bitplanes: segment id mismatch");
    }
    std::vector<Token> tokens(n);
    for (size_t i = 0; i < n; ++i) {
        uint8_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<uint8_t>((by_plane[b]->bits[i] & 1) << b);
        tokens[i] = {v, static_cast<uint32_t>(i), seg};
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Toy Kolmogorov codec: programs of the form  repeat <pattern> <count> times
// ---------------------------------------------------------------------------

struct ProgramToken {
    enum class Kind { keyword, pattern, count };
    Kind kind = Kind::keyword;
    std::string text;    // keyword or pattern payload
    uint32_t count = 0;  // count payload

    static ProgramToken keyword(std::string s) {
        return {Kind::keyword, std::move(s), 0};
    }
    static ProgramToken pattern(std::string s) {
        return {Kind::pattern, std::move(s), 0};
    }
    static ProgramToken counter(uint32_t n) { return {Kind::count, {}, n}; }
};

struct TokenProgram {
    std::vector<ProgramToken> tokens;
};

/// Wire size of a program token: keywords 8 bits/char, patterns 1 bit/digit,
/// counts a fixed 32-bit field.
inline BitVec program_token_bits(const ProgramToken& t) {
    BitVec bits;
    switch (t.kind) {
        case ProgramToken::Kind::keyword:
            for (char c : t.text)
                for (int i = 7; i >= 0; --i)
                    bits.push_back((static_cast<uint8_t>(c) >> i) & 1);
            break;
        case ProgramToken::Kind::pattern:
            for (char c : t.text) bits.push_back(c == '1' ? 1 : 0);
            break;
        case ProgramToken::Kind::count:
            for (int i = 31; i >= 0; --i) bits.push_back((t.count >> i) & 1);
            break;
    }
    return bits;
}

inline BitVec token_bits(const Token& t) {
    BitVec bits(8);
    for (int i = 0; i < 8; ++i) bits[i] = (t.value >> (7 - i)) & 1;
    return bits;
}

/// Pattern tokens are short, independent and referenced by the decoder;
/// count tokens fail program validation when corrupted; keywords are
/// recoverable by distance-1 matching.
inline TliClass classify_tli(const TokenProgram& program, size_t token_index) {
    if (token_index >= program.tokens.size())
        throw std::invalid_argument("classify_tli: token not in program");
    switch (program.tokens[token_index].kind) {
        case ProgramToken::Kind::pattern: return TliClass::highly_critical;
        case ProgramToken::Kind::count: return TliClass::moderately_robust;
        case ProgramToken::Kind::keyword: return TliClass::highly_robust;
    }
    return TliClass::moderately_robust;
}

struct CodingBlock {
    TliClass cls = TliClass::moderately_robust;
    BitVec bits;
};

/// Concatenates same-class tokens into one coding block per class present,
/// preserving the original token order inside each block.
inline std::vector<CodingBlock> group_tokens(const std::vector<BitVec>& token_bits,
                                             const std::vector<TliClass>& classes) {
    if (token_bits.size() != classes.size())
        throw std::invalid_argument("group_tokens: classes not aligned with tokens");
    std::vector<CodingBlock> blocks;
    for (TliClass c : {TliClass::highly_critical, TliClass::moderately_robust,
                       TliClass::highly_robust}) {
        CodingBlock b;
        b.cls = c;
        for (size_t i = 0; i < token_bits.size(); ++i)
            if (classes[i] == c) b.bits.insert(b.bits.end(), token_bits[i].begin(),
                                               token_bits[i].end());
        if (!b.bits.empty()) blocks.push_back(std::move(b));
    }
    return blocks;
}

namespace detail {

inline bool is_binary_string(const std::string& s) {
    for (char c : s)
        if (c != '0' && c != '1') return false;
    return !s.empty();
}

inline bool levenshtein_leq1(const std::string& a, const std::string& b) {
    const size_t n = a.size(), m = b.size();
    if (n == m) {
        size_t diff = 0;
        for (size_t i = 0; i < n; ++i)
            if (a[i] != b[i] && ++diff > 1) return false;
        return true;
    }
    const std::string& s = n < m ? a : b;   // shorter
    const std::string& t = n < m ? b : a;   // longer
    if (t.size() - s.size() != 1) return false;
    size_t i = 0;
    while (i < s.size() && s[i] == t[i]) ++i;
    for (size_t j = i; j < s.size(); ++j)
        if (s[j] != t[j + 1]) return false;
    return true;
}

}  // namespace detail

/// Shortest (pattern, count) description of a binary string with pattern
/// length <= 64 and count >= 2; falls back to a literal single-repeat
/// program when the string has no such period.
inline TokenProgram kolmo_encode(const std::string& s) {
    if (!detail::is_binary_string(s))
        throw std::invalid_argument("kolmo_encode: input must be a non-empty string over {0,1}");
    const size_t n = s.size();
    for (size_t p = 1; p <= 64 && p * 2 <= n; ++p) {
        if (n % p != 0) continue;
        bool periodic = true;
        for (size_t i = p; i < n; ++i) {
            if (s[i] != s[i - p]) {
                periodic = false;
                break;
            }
        }
        if (periodic) {
            if (n / p > UINT32_MAX) throw std::invalid_argument("kolmo_encode: count overflow");
            TokenProgram prog;
            prog.tokens = {ProgramToken::keyword("repeat"), ProgramToken::pattern(s.substr(0, p)),
                           ProgramToken::counter(static_cast<uint32_t>(n / p)),
                           ProgramToken::keyword("times")};
            return prog;
        }
    }
    TokenProgram prog;
    prog.tokens = {ProgramToken::keyword("repeat"), ProgramToken::pattern(s),
                   ProgramToken::counter(1), ProgramToken::keyword("times")};
    return prog;
}

/// Text form: `repeat <pattern> <count> times`.
inline std::string program_to_text(const TokenProgram& program) {
    std::string out;
    for (size_t i = 0; i < program.tokens.size(); ++i) {
        if (i) out += ' ';
        const auto& t = program.tokens[i];
        if (t.kind == ProgramToken::Kind::count)
            out += std::to_string(t.count);
        else
            out += t.text;
    }
    return out;
}

inline TokenProgram program_from_text(const std::string& line) {
    std::vector<std::string> fields;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) fields.push_back(line.substr(i, j - i));
        i = j;
    }
    if (fields.size() != 4)
        throw std::invalid_argument("program_from_text: expected 'repeat <pattern> <count> times'");
    unsigned long long count = 0;
    try {
        count = std::stoull(fields[2]);
    } catch (const std::exception&) {
        throw std::invalid_argument("program_from_text: bad count '" + fields[2] + "'");
    }
    if (count > UINT32_MAX) throw std::invalid_argument("program_from_text: count overflow");
    TokenProgram prog;
    prog.tokens = {ProgramToken::keyword(fields[0]), ProgramToken::pattern(fields[1]),
                   ProgramToken::counter(static_cast<uint32_t>(count)),
                   ProgramToken::keyword(fields[3])};
    return prog;
}

struct DecodeOutcome {
    enum class Status { ok, corrected, failed };
    Status status = Status::failed;
    std::string output;
    std::string message;

    bool delivered() const { return status != Status::failed; }
};

/// Executes a repeat-program. Keywords within edit distance 1 of the
/// canonical spelling are auto-corrected; anything further, a malformed
/// program shape, a non-binary pattern or a zero count is a detected
/// failure (retransmission signal). Pattern bit flips stay silent.
inline DecodeOutcome kolmo_decode(const TokenProgram& program) {
    DecodeOutcome out;
    const auto& t = program.tokens;
    if (t.size() != 4 || t[0].kind != ProgramToken::Kind::keyword ||
        t[1].kind != ProgramToken::Kind::pattern || t[2].kind != ProgramToken::Kind::count ||
        t[3].kind != ProgramToken::Kind::keyword) {
        out.message = "malformed program shape";
        return out;
    }
    bool corrected = false;
    if (t[0].text != "repeat") {
        if (!detail::levenshtein_leq1(t[0].text, "repeat")) {
            out.message = "unrecognized keyword '" + t[0].text + "'";
            return out;
        }
        corrected = true;
    }
    if (t[3].text != "times") {
        if (!detail::levenshtein_leq1(t[3].text, "times")) {
            out.message = "unrecognized keyword '" + t[3].text + "'";
            return out;
        }
        corrected = true;
    }
    if (!detail::is_binary_string(t[1].text)) {
        out.message = "pattern is not a binary string";
        return out;
    }
    if (t[2].count == 0) {
        out.message = "count must be >= 1";
        return out;
    }
    out.status = corrected ? DecodeOutcome::Status::corrected : DecodeOutcome::Status::ok;
    out.output.reserve(t[1].text.size() * t[2].count);
    for (uint32_t i = 0; i < t[2].count; ++i) out.output += t[1].text;
    return out;
}

}  // namespace semlink

#endif
