#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pcqa {

enum class CodecId { GPCC, VPCC, JPEGPleno, Mock };

/// The four evaluated rate points (G-PCC r02..r05, V-PCC r1..r4).
enum class RatePoint { R1 = 1, R2, R3, R4 };

/// Rate allocation strategy. P1 is the CTC baseline for the MPEG codecs.
enum class Strategy { P1 = 1, P2, P3 };

std::string to_string(CodecId id);
std::string to_string(RatePoint r);
std::string to_string(Strategy s);

/// Case-insensitive; accepts "gpcc"/"g-pcc", "vpcc"/"v-pcc", "jpeg"/"jpegpleno"/"jpeg_pleno", "mock".
CodecId parse_codec(std::string_view text);
/// Accepts "R1".."R4" or "1".."4".
RatePoint parse_rate(std::string_view text);
/// Accepts "P1".."P3" or "1".."3".
Strategy parse_strategy(std::string_view text);

inline constexpr RatePoint kAllRates[] = {RatePoint::R1, RatePoint::R2, RatePoint::R3, RatePoint::R4};
inline constexpr Strategy kAllStrategies[] = {Strategy::P1, Strategy::P2, Strategy::P3};
inline constexpr CodecId kEvaluatedCodecs[] = {CodecId::GPCC, CodecId::VPCC, CodecId::JPEGPleno};

/// Identifies one compressed stimulus. Renders as
/// `<content>-<codec>_p<strategy>_r<rate>`, e.g. `Soldier-gpcc_p2_r1`.
/// The undistorted model of a content renders as `<content>-reference`.
struct StimulusId {
    std::string content;
    std::optional<CodecId> codec;  // nullopt for the reference
    Strategy strategy = Strategy::P1;
    RatePoint rate = RatePoint::R1;

    bool is_reference() const noexcept { return !codec.has_value(); }
    std::string str() const;

    static StimulusId reference(std::string content);
    /// nullopt when `text` does not follow the naming convention.
    static std::optional<StimulusId> parse(std::string_view text);

    friend bool operator==(const StimulusId&, const StimulusId&) = default;
};

}  // namespace pcqa
