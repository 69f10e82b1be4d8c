#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcqa/stats/dsis.hpp"
#include "pcqa/stats/pwc.hpp"

namespace pcqa {

enum class Protocol { DSIS, PWC };

std::string to_string(Protocol p);
/// "dsis" or "pwc", case-insensitive. Throws ValidationError otherwise.
Protocol parse_protocol(const std::string& text);

enum class Side { Left, Right };

/// One playlist entry. DSIS: `stimulus` is rated against `reference`, which
/// sits on `reference_side`; a hidden-reference trial has stimulus ==
/// reference. PWC: `left` and `right` as displayed, both from `group`.
struct Trial {
    std::size_t index = 0;
    Protocol protocol = Protocol::DSIS;
    std::string content;
    std::string stimulus;
    std::string reference;
    Side reference_side = Side::Left;
    bool hidden_reference = false;
    GroupKey group;
    std::string left;
    std::string right;
    int part = 1;

    /// Stimulus id shown on each side.
    std::string shown(Side side) const;
};

struct PlanOptions {
    /// 1 or 2. Two parts are balanced by (codec, rate) and played in order.
    int parts = 1;
    /// Keep trials with the same content apart.
    bool separate_contents = true;
};

struct ExperimentPlan {
    Protocol protocol = Protocol::DSIS;
    std::uint64_t seed = 0;
    int parts = 1;
    std::vector<Trial> trials;
};

/// Randomized playlist for one subject.
/// DSIS: every distorted stimulus once plus one hidden reference per content.
/// PWC: each unordered strategy pair once per (content, codec, rate) group.
/// Sides are drawn uniformly per trial. Deterministic in `seed`.
/// Throws SchemaError for stimuli without codec/strategy metadata (reference
/// entries are ignored; DSIS adds its own), DomainError when contents cannot
/// be kept apart or `parts` is not 1 or 2.
ExperimentPlan generate_plan(Protocol protocol, const std::vector<StimulusMeta>& stimuli, std::uint64_t seed,
                             const PlanOptions& options = {});

nlohmann::json to_json(const Trial& t);
Trial trial_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentPlan& p);
ExperimentPlan plan_from_json(const nlohmann::json& j);

/// Full evaluation design: contents x codecs x rates x strategies.
std::vector<StimulusMeta> design_stimuli(const std::vector<std::string>& contents,
                                         const std::vector<CodecId>& codecs = {std::begin(kEvaluatedCodecs),
                                                                               std::end(kEvaluatedCodecs)});

}  // namespace pcqa
