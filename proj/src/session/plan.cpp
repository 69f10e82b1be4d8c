#include "pcqa/session/plan.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "pcqa/util/errors.hpp"

namespace pcqa {

using nlohmann::json;

std::string to_string(Protocol p) { return p == Protocol::DSIS ? "dsis" : "pwc"; }

Protocol parse_protocol(const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "dsis") return Protocol::DSIS;
    if (t == "pwc") return Protocol::PWC;
    throw ValidationError("protocol must be \"dsis\" or \"pwc\", got \"" + text + "\"");
}

std::string Trial::shown(Side side) const {
    if (protocol == Protocol::PWC) return side == Side::Left ? left : right;
    return side == reference_side ? reference : stimulus;
}

namespace {

std::string bucket_of(const Trial& t) {
    if (t.protocol == Protocol::PWC) return t.group.codec + "/" + t.group.rate;
    if (t.hidden_reference) return "reference";
    const auto id = StimulusId::parse(t.stimulus);
    return to_string(*id->codec) + "/" + to_string(id->rate);
}

bool separable(const std::map<std::string, std::vector<Trial>>& by_content, const std::string& prev) {
    std::size_t total = 0;
    for (const auto& [c, v] : by_content) total += v.size();
    for (const auto& [c, v] : by_content)
        if (v.size() > total - v.size() + (c != prev ? 1 : 0)) return false;
    return true;
}

// Random order with no two neighbours sharing content. A content is forced
// only when skipping it now would make the rest impossible to separate.
std::vector<Trial> order_trials(std::vector<Trial> trials, std::mt19937_64& rng, std::string prev, bool separate) {
    std::shuffle(trials.begin(), trials.end(), rng);
    if (!separate) return trials;

    std::map<std::string, std::vector<Trial>> by_content;
    for (auto& t : trials) by_content[t.content].push_back(std::move(t));
    if (!separable(by_content, prev))
        throw DomainError("trials cannot be ordered without repeating a content back to back");

    std::vector<Trial> out;
    std::size_t total = trials.size();
    while (total > 0) {
        std::string pick;
        for (const auto& [c, v] : by_content)
            if (c != prev && v.size() == total - v.size() + 1) pick = c;
        if (pick.empty()) {
            std::size_t candidates = 0;
            for (const auto& [c, v] : by_content)
                if (c != prev) candidates += v.size();
            std::uniform_int_distribution<std::size_t> d(0, candidates - 1);
            std::size_t k = d(rng);
            for (const auto& [c, v] : by_content) {
                if (c == prev) continue;
                if (k < v.size()) {
                    pick = c;
                    break;
                }
                k -= v.size();
            }
        }
        auto& pool = by_content[pick];
        out.push_back(std::move(pool.back()));
        pool.pop_back();
        if (pool.empty()) by_content.erase(pick);
        prev = pick;
        --total;
    }
    return out;
}

}  // namespace

ExperimentPlan generate_plan(Protocol protocol, const std::vector<StimulusMeta>& stimuli, std::uint64_t seed,
                             const PlanOptions& options) {
    if (options.parts != 1 && options.parts != 2) throw DomainError("a plan has 1 or 2 parts");
    std::vector<Trial> trials;
    std::map<std::tuple<std::string, std::string, std::string>, std::map<Strategy, std::string>> groups;
    std::vector<std::string> contents;

    for (const auto& m : stimuli) {
        if (m.hidden_reference) continue;
        if (!m.codec || m.content.empty())
            throw SchemaError("stimulus '" + m.id + "' lacks content/codec/strategy/rate metadata");
        if (std::find(contents.begin(), contents.end(), m.content) == contents.end()) contents.push_back(m.content);
        auto& slot = groups[{m.content, to_string(*m.codec), to_string(m.rate)}];
        if (!slot.emplace(m.strategy, m.id).second) throw SchemaError("stimulus '" + m.id + "' listed twice");
    }

    if (protocol == Protocol::DSIS) {
        for (const auto& [key, by_strategy] : groups)
            for (const auto& [strategy, id] : by_strategy) {
                Trial t;
                t.protocol = Protocol::DSIS;
                t.content = std::get<0>(key);
                t.stimulus = id;
                t.reference = StimulusId::reference(t.content).str();
                trials.push_back(t);
            }
        for (const auto& c : contents) {
            Trial t;
            t.protocol = Protocol::DSIS;
            t.content = c;
            t.stimulus = t.reference = StimulusId::reference(c).str();
            t.hidden_reference = true;
            trials.push_back(t);
        }
    } else {
        for (const auto& [key, by_strategy] : groups)
            for (auto a = by_strategy.begin(); a != by_strategy.end(); ++a)
                for (auto b = std::next(a); b != by_strategy.end(); ++b) {
                    Trial t;
                    t.protocol = Protocol::PWC;
                    t.content = std::get<0>(key);
                    t.group = {std::get<1>(key), std::get<2>(key), std::get<0>(key)};
                    t.left = a->second;
                    t.right = b->second;
                    trials.push_back(t);
                }
    }

    std::mt19937_64 rng(seed);
    std::vector<std::vector<Trial>> parts(static_cast<std::size_t>(options.parts));
    if (options.parts == 1) {
        parts[0] = std::move(trials);
    } else {
        std::map<std::string, std::vector<Trial>> buckets;
        for (auto& t : trials) buckets[bucket_of(t)].push_back(std::move(t));
        std::size_t toggle = 0;
        for (auto& [name, bucket] : buckets) {
            std::shuffle(bucket.begin(), bucket.end(), rng);
            for (auto& t : bucket) {
                t.part = static_cast<int>(toggle % 2) + 1;
                parts[toggle % 2].push_back(std::move(t));
                ++toggle;
            }
        }
    }

    ExperimentPlan plan;
    plan.protocol = protocol;
    plan.seed = seed;
    plan.parts = options.parts;
    std::string prev;
    for (auto& part : parts) {
        for (auto& t : order_trials(std::move(part), rng, prev, options.separate_contents)) {
            prev = t.content;
            plan.trials.push_back(std::move(t));
        }
    }
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < plan.trials.size(); ++i) {
        auto& t = plan.trials[i];
        t.index = i;
        const bool flip = coin(rng);
        if (protocol == Protocol::DSIS)
            t.reference_side = flip ? Side::Right : Side::Left;
        else if (flip)
            std::swap(t.left, t.right);
    }
    return plan;
}

json to_json(const Trial& t) {
    json j = {{"index", t.index}, {"protocol", to_string(t.protocol)}, {"content", t.content}, {"part", t.part}};
    if (t.protocol == Protocol::DSIS) {
        j["stimulus"] = t.stimulus;
        j["reference"] = t.reference;
        j["reference_side"] = t.reference_side == Side::Left ? "left" : "right";
        j["hidden_reference"] = t.hidden_reference;
    } else {
        j["group"] = {{"codec", t.group.codec}, {"rate", t.group.rate}, {"content", t.group.content}};
    }
    j["left"] = t.shown(Side::Left);
    j["right"] = t.shown(Side::Right);
    return j;
}

Trial trial_from_json(const json& j) {
    try {
        Trial t;
        t.index = j.at("index").get<std::size_t>();
        t.protocol = parse_protocol(j.at("protocol").get<std::string>());
        t.content = j.at("content").get<std::string>();
        t.part = j.value("part", 1);
        if (t.protocol == Protocol::DSIS) {
            t.stimulus = j.at("stimulus").get<std::string>();
            t.reference = j.at("reference").get<std::string>();
            t.reference_side = j.at("reference_side").get<std::string>() == "right" ? Side::Right : Side::Left;
            t.hidden_reference = j.at("hidden_reference").get<bool>();
        } else {
            const auto& g = j.at("group");
            t.group = {g.at("codec").get<std::string>(), g.at("rate").get<std::string>(),
                       g.at("content").get<std::string>()};
            t.left = j.at("left").get<std::string>();
            t.right = j.at("right").get<std::string>();
        }
        return t;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed trial: ") + e.what());
    }
}

json to_json(const ExperimentPlan& p) {
    json trials = json::array();
    for (const auto& t : p.trials) trials.push_back(to_json(t));
    return {{"protocol", to_string(p.protocol)}, {"seed", p.seed}, {"parts", p.parts}, {"trials", trials}};
}

ExperimentPlan plan_from_json(const json& j) {
    try {
        ExperimentPlan p;
        p.protocol = parse_protocol(j.at("protocol").get<std::string>());
        p.seed = j.at("seed").get<std::uint64_t>();
        p.parts = j.at("parts").get<int>();
        for (const auto& t : j.at("trials")) p.trials.push_back(trial_from_json(t));
        return p;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed plan: ") + e.what());
    }
}

std::vector<StimulusMeta> design_stimuli(const std::vector<std::string>& contents, const std::vector<CodecId>& codecs) {
    std::vector<StimulusMeta> out;
    for (const auto& c : contents)
        for (auto codec : codecs)
            for (auto rate : kAllRates)
                for (auto strategy : kAllStrategies)
                    out.push_back(StimulusMeta::from_id(StimulusId{c, codec, strategy, rate}.str()));
    return out;
}

}  // namespace pcqa
