#include "pcqa/stats/pwc.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"

namespace pcqa {

using nlohmann::json;

std::string to_string(PwcChoice c) {
    switch (c) {
        case PwcChoice::Left: return "left";
        case PwcChoice::Right: return "right";
        case PwcChoice::NotSure: return "not_sure";
    }
    return "?";
}

PwcChoice parse_choice(const std::string& text) {
    if (text == "left") return PwcChoice::Left;
    if (text == "right") return PwcChoice::Right;
    if (text == "not_sure") return PwcChoice::NotSure;
    throw ValidationError("choice must be \"left\", \"right\" or \"not_sure\", got \"" + text + "\"");
}

std::optional<std::string> PwcVote::winner() const {
    switch (choice) {
        case PwcChoice::Left: return left;
        case PwcChoice::Right: return right;
        case PwcChoice::NotSure: return std::nullopt;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON lines

namespace {

std::string string_field(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing field \"" + key + "\"");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw SchemaError(where + ": field \"" + key + "\" must be a string");
}

}  // namespace

PwcVote parse_vote_json(const std::string& line, const std::string& where) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object()) throw SchemaError(where + ": expected a JSON object");
    PwcVote v;
    v.session = string_field(j, "session", where);
    const auto g = j.find("group");
    if (g == j.end() || !g->is_object()) throw SchemaError(where + ": missing object field \"group\"");
    v.group = {string_field(*g, "codec", where), string_field(*g, "rate", where), string_field(*g, "content", where)};
    v.left = string_field(j, "left", where);
    v.right = string_field(j, "right", where);
    try {
        v.choice = parse_choice(string_field(j, "choice", where));
    } catch (const ValidationError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    if (const auto e = j.find("elapsed_ms"); e != j.end()) {
        if (!e->is_number()) throw SchemaError(where + ": \"elapsed_ms\" must be a number");
        v.elapsed_ms = e->get<double>();
        if (v.elapsed_ms < 0) throw SchemaError(where + ": negative \"elapsed_ms\"");
    }
    if (v.left == v.right) throw SchemaError(where + ": a stimulus cannot be compared with itself");
    return v;
}

std::string to_json_line(const PwcVote& v) {
    json j = {{"session", v.session},
              {"group", {{"codec", v.group.codec}, {"rate", v.group.rate}, {"content", v.group.content}}},
              {"left", v.left},
              {"right", v.right},
              {"choice", to_string(v.choice)},
              {"elapsed_ms", v.elapsed_ms}};
    return j.dump();
}

std::vector<PwcVote> read_pwc_jsonl(std::istream& in, const std::string& origin) {
    std::vector<PwcVote> out;
    // (session, group, unordered pair) -> outcome of the first vote
    std::map<std::tuple<std::string, GroupKey, std::string, std::string>, std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        PwcVote v = parse_vote_json(line, where);
        const auto [a, b] = std::minmax(v.left, v.right);
        const std::string outcome = v.winner().value_or("<not sure>");
        const auto [it, fresh] = seen.emplace(std::make_tuple(v.session, v.group, a, b), outcome);
        if (!fresh) {
            if (it->second != outcome)
                throw IntegrityError(where + ": session '" + v.session + "' voted on " + a + " vs " + b +
                                     " twice with different answers");
            continue;
        }
        out.push_back(std::move(v));
    }
    return out;
}

void write_pwc_jsonl(std::ostream& out, const std::vector<PwcVote>& votes) {
    for (const auto& v : votes) out << to_json_line(v) << '\n';
}

// ---------------------------------------------------------------------------
// tally

PairwiseTally PairwiseTally::build(const GroupKey& group, const std::vector<PwcVote>& votes, double prior,
                                   const std::vector<std::pair<std::string, std::string>>& design) {
    if (!(prior >= 0.0)) throw DomainError("tally prior must be non-negative");
    std::set<std::string> names;
    for (const auto& v : votes) {
        if (v.group != group)
            throw SchemaError("vote of session '" + v.session + "' belongs to group " + v.group.str() + ", not " +
                              group.str());
        if (v.left == v.right) throw SchemaError("a stimulus cannot be compared with itself: " + v.left);
        names.insert(v.left);
        names.insert(v.right);
    }
    for (const auto& [a, b] : design) {
        if (a == b) throw SchemaError("design pairs a stimulus with itself: " + a);
        names.insert(a);
        names.insert(b);
    }

    PairwiseTally t;
    t.group_ = group;
    t.prior_ = prior;
    t.stimuli_.assign(names.begin(), names.end());
    const std::size_t n = t.stimuli_.size();
    t.counts_.assign(n, std::vector<double>(n, 0.0));
    t.not_sure_.assign(n, std::vector<double>(n, 0.0));
    t.compared_.assign(n, std::vector<bool>(n, false));
    if (design.empty()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) t.compared_[i][j] = i != j;
    } else {
        for (const auto& [a, b] : design) {
            const std::size_t i = *t.index_of(a), j = *t.index_of(b);
            t.compared_[i][j] = t.compared_[j][i] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (t.compared_[i][j]) t.counts_[i][j] = prior;
    for (const auto& v : votes) t.add_vote(v);
    t.votes_ = votes;
    return t;
}

void PairwiseTally::add_vote(const PwcVote& v) {
    const std::size_t l = *index_of(v.left), r = *index_of(v.right);
    if (!compared_[l][r]) throw SchemaError("pair " + v.left + " vs " + v.right + " is not part of the design");
    switch (v.choice) {
        case PwcChoice::Left: counts_[l][r] += 1.0; break;
        case PwcChoice::Right: counts_[r][l] += 1.0; break;
        case PwcChoice::NotSure:
            counts_[l][r] += 0.5;
            counts_[r][l] += 0.5;
            not_sure_[l][r] += 1.0;
            not_sure_[r][l] += 1.0;
            break;
    }
}

PairwiseTally PairwiseTally::from_counts(GroupKey group, std::vector<std::string> stimuli,
                                         std::vector<std::vector<double>> counts) {
    const std::size_t n = stimuli.size();
    if (counts.size() != n) throw SchemaError("count matrix does not match the stimulus list");
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[i].size() != n) throw SchemaError("count matrix must be square");
        for (std::size_t j = 0; j < n; ++j) {
            if (!(counts[i][j] >= 0.0)) throw DomainError("pairwise counts must be non-negative");
            if (i == j && counts[i][j] != 0.0) throw DomainError("pairwise count diagonal must be zero");
        }
    }
    if (std::set<std::string>(stimuli.begin(), stimuli.end()).size() != n)
        throw SchemaError("duplicate stimulus in count matrix");
    PairwiseTally t;
    t.group_ = std::move(group);
    t.stimuli_ = std::move(stimuli);
    t.not_sure_.assign(n, std::vector<double>(n, 0.0));
    t.compared_.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t.compared_[i][j] = i != j && counts[i][j] + counts[j][i] > 0.0;
    t.counts_ = std::move(counts);
    return t;
}

std::optional<std::size_t> PairwiseTally::index_of(const std::string& stimulus) const {
    const auto it = std::lower_bound(stimuli_.begin(), stimuli_.end(), stimulus);
    if (it != stimuli_.end() && *it == stimulus) return static_cast<std::size_t>(it - stimuli_.begin());
    // from_counts keeps caller order, which need not be sorted
    const auto lin = std::find(stimuli_.begin(), stimuli_.end(), stimulus);
    if (lin == stimuli_.end()) return std::nullopt;
    return static_cast<std::size_t>(lin - stimuli_.begin());
}

double PairwiseTally::total_weight() const {
    double sum = 0.0;
    for (const auto& row : counts_)
        for (double c : row) sum += c;
    return sum;
}

std::vector<std::string> PairwiseTally::subjects() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& v : votes_)
        if (seen.insert(v.session).second) out.push_back(v.session);
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> PairwiseTally::design() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < stimuli_.size(); ++i)
        for (std::size_t j = 0; j < stimuli_.size(); ++j)
            if (compared_[i][j]) out.emplace_back(i, j);
    return out;
}

PairwiseTally PairwiseTally::rebuilt(const std::vector<const PwcVote*>& votes) const {
    PairwiseTally t = *this;
    t.votes_.clear();
    for (std::size_t i = 0; i < stimuli_.size(); ++i)
        for (std::size_t j = 0; j < stimuli_.size(); ++j) {
            t.counts_[i][j] = compared_[i][j] ? prior_ : 0.0;
            t.not_sure_[i][j] = 0.0;
        }
    for (const PwcVote* v : votes) {
        t.add_vote(*v);
        t.votes_.push_back(*v);
    }
    return t;
}

std::map<GroupKey, PairwiseTally> build_tallies(const std::vector<PwcVote>& votes, double prior) {
    std::map<GroupKey, std::vector<PwcVote>> grouped;
    for (const auto& v : votes) grouped[v.group].push_back(v);
    std::map<GroupKey, PairwiseTally> out;
    for (const auto& [key, group_votes] : grouped) out.emplace(key, PairwiseTally::build(key, group_votes, prior));
    return out;
}

// ---------------------------------------------------------------------------

std::vector<NotSureShare> not_sure_profile(const std::vector<PwcVote>& votes) {
    std::map<std::string, NotSureShare> by_rate;
    for (const auto& v : votes) {
        auto& s = by_rate[v.group.rate];
        s.rate = v.group.rate;
        ++s.votes;
        if (v.choice == PwcChoice::NotSure) ++s.not_sure;
    }
    std::vector<NotSureShare> out;
    for (auto& [_, s] : by_rate) out.push_back(s);
    return out;
}

Strategy anchor_strategy(CodecId codec) { return codec == CodecId::JPEGPleno ? Strategy::P2 : Strategy::P1; }

std::optional<std::string> default_anchor(const PairwiseTally& tally) {
    CodecId codec;
    try {
        codec = parse_codec(tally.group().codec);
    } catch (const DomainError&) {
        return std::nullopt;
    }
    const Strategy want = anchor_strategy(codec);
    for (const auto& s : tally.stimuli()) {
        const auto id = StimulusId::parse(s);
        if (id && !id->is_reference() && id->strategy == want) return s;
    }
    return std::nullopt;
}

double JodScale::at(const std::string& stimulus) const {
    const auto it = std::find(stimuli.begin(), stimuli.end(), stimulus);
    if (it == stimuli.end()) throw SchemaError("stimulus '" + stimulus + "' is not in group " + group.str());
    return jod[static_cast<std::size_t>(it - stimuli.begin())];
}

void write_jod_csv(std::ostream& out, const std::vector<JodScale>& scales) {
    out << "codec,rate,content,stimulus_id,jod,ci_low,ci_high,anchor\n";
    for (const auto& s : scales)
        for (std::size_t i = 0; i < s.stimuli.size(); ++i) {
            const bool has_ci = s.ci.has_value();
            out << csv_join({s.group.codec, s.group.rate, s.group.content, s.stimuli[i], format_real(s.jod[i], 6),
                             has_ci ? format_real((*s.ci)[i].first, 6) : "na",
                             has_ci ? format_real((*s.ci)[i].second, 6) : "na", s.stimuli[i] == s.anchor ? "1" : "0"})
                << '\n';
        }
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace pcqa
