#include "pcqa/stats/superiority.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "pcqa/util/errors.hpp"

namespace pcqa {

std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::FirstSuperior: return "first";
        case Direction::SecondSuperior: return "second";
        case Direction::NoEvidence: return "none";
    }
    return "?";
}

std::string_view to_string(EvidenceSource s) noexcept {
    switch (s) {
        case EvidenceSource::DSIS: return "DSIS";
        case EvidenceSource::PWC: return "PWC";
        case EvidenceSource::ConfigRelation: return "config";
    }
    return "?";
}

namespace {

void mean_var(const std::vector<double>& x, double& mean, double& var) {
    mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    var = ss / static_cast<double>(x.size() - 1);
}

}  // namespace

WelchResult welch_superior(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
    if (a.size() < 2 || b.size() < 2) throw DomainError("Welch test needs at least 2 scores per sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    double ma, va, mb, vb;
    mean_var(a, ma, va);
    mean_var(b, mb, vb);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double qa = va / na, qb = vb / nb;
    const double se2 = qa + qb;

    WelchResult r;
    if (se2 == 0.0) {
        r.df = na + nb - 2.0;
        if (ma == mb) {
            r.t = 0.0;
        } else {
            r.t = ma > mb ? INFINITY : -INFINITY;
            r.p_greater = ma > mb ? 0.0 : 1.0;
            r.p_less = 1.0 - r.p_greater;
        }
    } else {
        r.t = (ma - mb) / std::sqrt(se2);
        r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
        const boost::math::students_t dist(r.df);
        r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t));
        r.p_less = boost::math::cdf(dist, r.t);
    }
    if (r.p_greater < alpha)
        r.verdict = Direction::FirstSuperior;
    else if (r.p_less < alpha)
        r.verdict = Direction::SecondSuperior;
    return r;
}

Direction jod_superior(double jod_a, double jod_b, double threshold) {
    if (!std::isfinite(jod_a) || !std::isfinite(jod_b)) throw DomainError("JOD values must be finite");
    if (jod_a - jod_b >= threshold) return Direction::FirstSuperior;
    if (jod_b - jod_a >= threshold) return Direction::SecondSuperior;
    return Direction::NoEvidence;
}

Direction jod_superior(const JodScale& scale, const std::string& a, const std::string& b, double threshold) {
    return jod_superior(scale.at(a), scale.at(b), threshold);
}

bool DiagramEdge::subjective() const {
    for (const auto& arrow : arrows)
        for (auto s : arrow.sources)
            if (s != EvidenceSource::ConfigRelation) return true;
    return false;
}

bool DiagramCell::insignificant() const {
    return std::none_of(edges.begin(), edges.end(), [](const DiagramEdge& e) { return e.subjective(); });
}

std::vector<DiagramCell> assemble_diagram(const std::vector<SuperiorityVerdict>& verdicts) {
    struct PairState {
        std::map<EvidenceSource, Strategy> winners;
        std::optional<ConfigRelation> relation;
    };
    std::map<CellKey, std::map<std::pair<Strategy, Strategy>, PairState>> cells;

    for (const auto& v : verdicts) {
        if (v.a == v.b) throw SchemaError("verdict compares " + std::string(to_string(v.a)) + " with itself");
        auto& cell = cells[v.cell];
        const bool swapped = v.b < v.a;
        const auto key = swapped ? std::make_pair(v.b, v.a) : std::make_pair(v.a, v.b);
        auto& st = cell[key];
        if (v.relation) {
            ConfigRelation rel = *v.relation;
            if (swapped && rel == ConfigRelation::StrictlyBetter)
                rel = ConfigRelation::StrictlyWorse;
            else if (swapped && rel == ConfigRelation::StrictlyWorse)
                rel = ConfigRelation::StrictlyBetter;
            st.relation = rel;
        }
        if (v.direction == Direction::NoEvidence) continue;
        const Strategy winner = v.direction == Direction::FirstSuperior ? v.a : v.b;
        const auto [it, fresh] = st.winners.emplace(v.source, winner);
        if (!fresh && it->second != winner)
            throw IntegrityError(std::string(to_string(v.source)) + " evidence for " + v.cell.content + "/" +
                                 v.cell.codec + "/" + v.cell.rate + " says both " + std::string(to_string(key.first)) +
                                 " and " + std::string(to_string(key.second)) + " are superior");
    }

    static constexpr std::pair<Strategy, Strategy> kPairs[] = {
        {Strategy::P1, Strategy::P2}, {Strategy::P1, Strategy::P3}, {Strategy::P2, Strategy::P3}};
    std::vector<DiagramCell> out;
    for (const auto& [key, pairs] : cells) {
        DiagramCell cell{key, {}};
        for (const auto& pr : kPairs) {
            DiagramEdge edge{pr.first, pr.second, {}, std::nullopt};
            if (const auto it = pairs.find(pr); it != pairs.end()) {
                edge.relation = it->second.relation;
                for (const auto& [source, winner] : it->second.winners) {
                    auto arrow = std::find_if(edge.arrows.begin(), edge.arrows.end(),
                                              [&](const Arrow& a) { return a.winner == winner; });
                    if (arrow == edge.arrows.end()) {
                        edge.arrows.push_back({winner, {}});
                        arrow = edge.arrows.end() - 1;
                    }
                    arrow->sources.push_back(source);
                }
            }
            cell.edges.push_back(std::move(edge));
        }
        out.push_back(std::move(cell));
    }
    return out;
}

std::size_t count_insignificant_cells(const std::vector<DiagramCell>& cells) {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const DiagramCell& c) { return c.insignificant(); }));
}

std::vector<SuperiorityVerdict> dsis_verdicts(const ScoreMatrix& matrix, double alpha) {
    std::map<CellKey, std::map<Strategy, std::size_t>> cells;
    for (std::size_t j = 0; j < matrix.stimuli().size(); ++j) {
        const auto& m = matrix.stimuli()[j];
        if (m.hidden_reference || !m.codec) continue;
        cells[{m.content, std::string(to_string(*m.codec)), std::string(to_string(m.rate))}][m.strategy] = j;
    }
    std::vector<SuperiorityVerdict> out;
    for (const auto& [key, by_strategy] : cells)
        for (auto ia = by_strategy.begin(); ia != by_strategy.end(); ++ia)
            for (auto ib = std::next(ia); ib != by_strategy.end(); ++ib) {
                const auto sa = matrix.scores_for(ia->second), sb = matrix.scores_for(ib->second);
                if (sa.size() < 2 || sb.size() < 2) continue;
                const auto w = welch_superior({sa.begin(), sa.end()}, {sb.begin(), sb.end()}, alpha);
                SuperiorityVerdict v{key, ia->first, ib->first, EvidenceSource::DSIS, w.verdict, {}, {}, {}};
                v.p_value = std::min(w.p_greater, w.p_less);
                out.push_back(v);
            }
    return out;
}

std::vector<SuperiorityVerdict> pwc_verdicts(const std::vector<JodScale>& scales, double threshold) {
    std::vector<SuperiorityVerdict> out;
    for (const auto& scale : scales) {
        std::map<CellKey, std::map<Strategy, std::size_t>> cells;
        for (std::size_t i = 0; i < scale.stimuli.size(); ++i) {
            const auto id = StimulusId::parse(scale.stimuli[i]);
            if (!id || id->is_reference()) continue;
            cells[{id->content, std::string(to_string(*id->codec)), std::string(to_string(id->rate))}][id->strategy] =
                i;
        }
        for (const auto& [key, by_strategy] : cells)
            for (auto ia = by_strategy.begin(); ia != by_strategy.end(); ++ia)
                for (auto ib = std::next(ia); ib != by_strategy.end(); ++ib) {
                    const double ja = scale.jod[ia->second], jb = scale.jod[ib->second];
                    SuperiorityVerdict v{key, ia->first, ib->first, EvidenceSource::PWC,
                                         jod_superior(ja, jb, threshold), {}, {}, {}};
                    v.jod_delta = ja - jb;
                    out.push_back(v);
                }
    }
    return out;
}

std::vector<SuperiorityVerdict> config_verdicts(const std::vector<CellKey>& cells) {
    static constexpr std::pair<Strategy, Strategy> kPairs[] = {
        {Strategy::P1, Strategy::P2}, {Strategy::P1, Strategy::P3}, {Strategy::P2, Strategy::P3}};
    std::vector<SuperiorityVerdict> out;
    for (const auto& cell : std::set<CellKey>(cells.begin(), cells.end())) {
        CodecId codec;
        RatePoint rate;
        try {
            codec = parse_codec(cell.codec);
            rate = parse_rate(cell.rate);
        } catch (const DomainError&) {
            continue;
        }
        if (codec != CodecId::JPEGPleno) continue;
        for (const auto& [a, b] : kPairs) {
            ConfigRelation rel;
            try {
                rel = config_relation(jpeg_config_lookup(cell.content, rate, a), jpeg_config_lookup(cell.content, rate, b));
            } catch (const DomainError&) {
                break;  // content has no table entry
            }
            Direction d = Direction::NoEvidence;
            if (rel == ConfigRelation::StrictlyBetter) d = Direction::FirstSuperior;
            if (rel == ConfigRelation::StrictlyWorse) d = Direction::SecondSuperior;
            out.push_back({cell, a, b, EvidenceSource::ConfigRelation, d, {}, {}, rel});
        }
    }
    return out;
}

std::string diagram_json(const std::vector<DiagramCell>& cells, int indent) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cells) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : c.edges) {
            nlohmann::json arrows = nlohmann::json::array();
            for (const auto& a : e.arrows) {
                nlohmann::json sources = nlohmann::json::array();
                for (auto s : a.sources) sources.push_back(std::string(to_string(s)));
                const Strategy loser = a.winner == e.a ? e.b : e.a;
                arrows.push_back({{"winner", std::string(to_string(a.winner))},
                                  {"loser", std::string(to_string(loser))},
                                  {"sources", sources}});
            }
            nlohmann::json edge = {{"pair", {std::string(to_string(e.a)), std::string(to_string(e.b))}},
                                   {"dotted", e.dotted()},
                                   {"arrows", arrows}};
            edge["relation"] = e.relation ? nlohmann::json(std::string(to_string(*e.relation))) : nlohmann::json();
            edges.push_back(edge);
        }
        arr.push_back({{"content", c.cell.content},
                       {"codec", c.cell.codec},
                       {"rate", c.cell.rate},
                       {"significant", !c.insignificant()},
                       {"edges", edges}});
    }
    return arr.dump(indent);
}

}  // namespace pcqa
