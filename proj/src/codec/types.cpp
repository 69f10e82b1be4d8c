#include "pcqa/codec/types.hpp"

#include <algorithm>
#include <cctype>

#include "pcqa/util/errors.hpp"

namespace pcqa {

namespace {
std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::optional<int> strip_prefixed_digit(std::string_view text, char prefix, int lo, int hi) {
    std::string t = lower(text);
    if (!t.empty() && t.front() == prefix) t.erase(0, 1);
    if (t.size() != 1 || !std::isdigit(static_cast<unsigned char>(t[0]))) return std::nullopt;
    const int v = t[0] - '0';
    if (v < lo || v > hi) return std::nullopt;
    return v;
}
}  // namespace

std::string to_string(CodecId id) {
    switch (id) {
        case CodecId::GPCC: return "gpcc";
        case CodecId::VPCC: return "vpcc";
        case CodecId::JPEGPleno: return "jpegpleno";
        case CodecId::Mock: return "mock";
    }
    return "?";
}

std::string to_string(RatePoint r) { return "R" + std::to_string(static_cast<int>(r)); }
std::string to_string(Strategy s) { return "P" + std::to_string(static_cast<int>(s)); }

CodecId parse_codec(std::string_view text) {
    const std::string t = lower(text);
    if (t == "gpcc" || t == "g-pcc") return CodecId::GPCC;
    if (t == "vpcc" || t == "v-pcc") return CodecId::VPCC;
    if (t == "jpeg" || t == "jpegpleno" || t == "jpeg_pleno" || t == "jpeg-pleno") return CodecId::JPEGPleno;
    if (t == "mock") return CodecId::Mock;
    throw DomainError("unknown codec '" + std::string(text) + "'");
}

RatePoint parse_rate(std::string_view text) {
    if (auto v = strip_prefixed_digit(text, 'r', 1, 4)) return static_cast<RatePoint>(*v);
    throw DomainError("unknown rate point '" + std::string(text) + "' (expected R1..R4)");
}

Strategy parse_strategy(std::string_view text) {
    if (auto v = strip_prefixed_digit(text, 'p', 1, 3)) return static_cast<Strategy>(*v);
    throw DomainError("unknown allocation strategy '" + std::string(text) + "' (expected P1..P3)");
}

std::string StimulusId::str() const {
    if (is_reference()) return content + "-reference";
    return content + "-" + to_string(*codec) + "_p" + std::to_string(static_cast<int>(strategy)) + "_r" +
           std::to_string(static_cast<int>(rate));
}

StimulusId StimulusId::reference(std::string content) { return StimulusId{std::move(content), std::nullopt}; }

std::optional<StimulusId> StimulusId::parse(std::string_view text) {
    const auto dash = text.rfind('-');
    if (dash == std::string_view::npos || dash == 0) return std::nullopt;
    const std::string content(text.substr(0, dash));
    const std::string_view rest = text.substr(dash + 1);
    if (rest == "reference") return reference(content);

    // <codec>_p<n>_r<m>
    const auto r_pos = rest.rfind("_r");
    if (r_pos == std::string_view::npos) return std::nullopt;
    const auto p_pos = rest.rfind("_p", r_pos);
    if (p_pos == std::string_view::npos || p_pos == 0) return std::nullopt;
    try {
        StimulusId id;
        id.content = content;
        id.codec = parse_codec(rest.substr(0, p_pos));
        id.strategy = parse_strategy(rest.substr(p_pos + 2, r_pos - p_pos - 2));
        id.rate = parse_rate(rest.substr(r_pos + 2));
        return id;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

}  // namespace pcqa
