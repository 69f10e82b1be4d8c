#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pcqa/stats/pwc.hpp"
#include "pcqa/util/errors.hpp"
#include "support/stats_fixtures.hpp"

using namespace pcqa;

namespace {

const GroupKey kGroup = fixture::test_group();

PwcVote vote(const std::string& session, const std::string& l, const std::string& r, PwcChoice c) {
    return {session, kGroup, l, r, c, 4000.0};
}

}  // namespace

TEST_CASE("tally accumulation") {
    std::vector<PwcVote> votes;
    for (int i = 0; i < 10; ++i) votes.push_back(vote("s" + std::to_string(i), "A", "B", PwcChoice::Left));
    const auto t = PairwiseTally::build(kGroup, votes);
    CHECK(t.count(0, 1) == doctest::Approx(10.1));
    CHECK(t.count(1, 0) == doctest::Approx(0.1));
    CHECK(t.count(0, 0) == 0.0);

    const auto ns = PairwiseTally::build(kGroup, {vote("s", "A", "B", PwcChoice::NotSure)});
    CHECK(ns.count(0, 1) == doctest::Approx(0.6));
    CHECK(ns.count(1, 0) == doctest::Approx(0.6));
    CHECK(ns.not_sure(0, 1) == 1.0);

    const auto idle = PairwiseTally::build(kGroup, {vote("s", "A", "B", PwcChoice::Left)}, 0.1, {{"B", "C"}, {"A", "B"}});
    const auto b = *idle.index_of("B"), c = *idle.index_of("C");
    CHECK(idle.count(b, c) == doctest::Approx(0.1));
    CHECK(idle.count(c, b) == doctest::Approx(0.1));
    CHECK_FALSE(idle.compared(*idle.index_of("A"), c));
}

TEST_CASE("tally conserves weight") {
    const auto votes =
        fixture::simulated_votes({"A", "B", "C", "D"}, {0, 0.3, 1.2, -0.5}, 7, 2, 11);
    std::vector<PwcVote> mixed = votes;
    for (std::size_t i = 0; i < mixed.size(); i += 3) mixed[i].choice = PwcChoice::NotSure;
    const auto t = PairwiseTally::build(kGroup, mixed);
    const double init = 0.1 * 4 * 3;
    CHECK(t.total_weight() == doctest::Approx(init + static_cast<double>(mixed.size())).epsilon(1e-12));
}

TEST_CASE("tally rejects foreign and malformed votes") {
    PwcVote other = vote("s", "A", "B", PwcChoice::Left);
    other.group.rate = "R2";
    CHECK_THROWS_AS(PairwiseTally::build(kGroup, {other}), SchemaError);
    CHECK_THROWS_AS(PairwiseTally::build(kGroup, {vote("s", "A", "A", PwcChoice::Left)}), SchemaError);
    CHECK_THROWS_AS(PairwiseTally::build(kGroup, {vote("s", "A", "C", PwcChoice::Left)}, 0.1, {{"A", "B"}}),
                    SchemaError);
    CHECK_THROWS_AS(PairwiseTally::build(kGroup, {}, -1.0), DomainError);
}

TEST_CASE("Thurstone closed forms") {
    const auto t = PairwiseTally::from_counts(kGroup, {"A", "B"}, {{0, 15}, {5, 0}});
    const auto s = thurstone_jod(t, "B");
    CHECK(s.converged);
    CHECK(s.at("A") - s.at("B") == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.at("B") == 0.0);
    CHECK(jod_sigma() == doctest::Approx(0.6744897501960817).epsilon(1e-15));

    const auto sym = PairwiseTally::from_counts(kGroup, {"A", "B", "C"}, {{0, 4, 7}, {4, 0, 2}, {7, 2, 0}});
    for (double v : thurstone_jod(sym, "A").jod) CHECK(std::fabs(v) < 1e-9);
}

TEST_CASE("three transitive stimuli match the grid oracle") {
    // A>B and B>C at 75%, A>C at Phi(2 sigma)
    const double p2 = 0.5 * std::erfc(-2 * jod_sigma() / std::sqrt(2.0));
    const std::vector<std::vector<double>> c{{0, 75, 100 * p2}, {25, 0, 75}, {100 * (1 - p2), 25, 0}};
    const auto t = PairwiseTally::from_counts(kGroup, {"C", "B", "A"}, {{0, c[2][1], c[2][0]},
                                                                       {c[1][2], 0, c[1][0]},
                                                                       {c[0][2], c[0][1], 0}});
    const auto s = thurstone_jod(t, "C");
    CHECK(s.at("B") == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(s.at("A") == doctest::Approx(2.0).epsilon(2e-2));

    const auto g = oracle::grid_thurstone3(t.counts());
    CHECK(std::fabs(s.jod[1] - g[1]) < 2e-3);
    CHECK(std::fabs(s.jod[2] - g[2]) < 2e-3);
}

TEST_CASE("Thurstone invariances") {
    const auto votes = fixture::simulated_votes({"A", "B", "C", "D"}, {0, 0.8, -0.4, 1.5}, 9, 1, 4);
    const auto t = PairwiseTally::build(kGroup, votes);
    const auto base = thurstone_jod(t, "A");

    SUBCASE("re-anchoring is a translation") {
        const auto other = thurstone_jod(t, "C");
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(other.jod[i] == doctest::Approx(base.jod[i] - base.jod[2]).epsilon(1e-6));
    }
    SUBCASE("scaling the counts leaves the scale unchanged") {
        auto counts = t.counts();
        for (auto& row : counts)
            for (auto& v : row) v *= 3.5;
        const auto scaled = thurstone_jod(PairwiseTally::from_counts(kGroup, t.stimuli(), counts), "A");
        for (std::size_t i = 0; i < 4; ++i) CHECK(scaled.jod[i] == doctest::Approx(base.jod[i]).epsilon(1e-6));
    }
    SUBCASE("deterministic") {
        CHECK(thurstone_jod(t, "A").jod == base.jod);
    }
}

TEST_CASE("Thurstone guards") {
    const auto t = PairwiseTally::from_counts(kGroup, {"A", "B"}, {{0, 15}, {5, 0}});
    CHECK_THROWS_AS(thurstone_jod(t, "Z"), SchemaError);

    // Two unconnected pairs: each part is pinned separately.
    const auto split = PairwiseTally::from_counts(kGroup, {"A", "B", "C", "D"},
                                                  {{0, 15, 0, 0}, {5, 0, 0, 0}, {0, 0, 0, 5}, {0, 0, 15, 0}});
    const auto s = thurstone_jod(split, "B");
    CHECK(s.converged);
    CHECK(s.warnings.size() == 1);
    for (const auto& w : s.warnings) MESSAGE(w);
    CHECK(s.at("A") == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.at("C") == 0.0);
    CHECK(s.at("D") == doctest::Approx(1.0).epsilon(1e-3));

    // Unanimous wins without a prior have no finite maximizer.
    const auto unanimous = PairwiseTally::from_counts(kGroup, {"A", "B"}, {{0, 10}, {0, 0}});
    CHECK_THROWS_AS(thurstone_jod(unanimous, "B"), NumericalGuardError);
    CHECK_THROWS_AS(thurstone_jod(unanimous, "A"), NumericalGuardError);
    // A chain A > B > C with one upset C > A is strongly connected and finite.
    const auto cyclic = PairwiseTally::from_counts(kGroup, {"A", "B", "C"}, {{0, 5, 0}, {0, 0, 5}, {1, 0, 0}});
    CHECK(std::isfinite(thurstone_jod(cyclic, "A").at("C")));
    // Any prior restores existence.
    const auto primed = PairwiseTally::from_counts(kGroup, {"A", "B"}, {{0, 10.1}, {0.1, 0}});
    CHECK(thurstone_jod(primed, "B").at("A") > 1.0);
}

TEST_CASE("bootstrap intervals") {
    const std::vector<std::string> names{"A", "B", "C"};
    SUBCASE("anchor has zero width") {
        const auto t = PairwiseTally::build(kGroup, fixture::simulated_votes(names, {0, 1, 2}, 15, 1, 21));
        BootstrapOptions o;
        o.iterations = 300;
        const auto s = bootstrap_jod(t, "A", o);
        REQUIRE(s.ci.has_value());
        CHECK((*s.ci)[0].first == 0.0);
        CHECK((*s.ci)[0].second == 0.0);
        CHECK((*s.ci)[2].first < s.jod[2]);
        CHECK((*s.ci)[2].second > s.jod[2]);
    }
    SUBCASE("identical subjects give zero width everywhere") {
        std::vector<PwcVote> votes;
        for (int subj = 0; subj < 6; ++subj) {
            const std::string id = "s" + std::to_string(subj);
            votes.push_back(vote(id, "A", "B", PwcChoice::Left));
            votes.push_back(vote(id, "B", "C", PwcChoice::NotSure));
            votes.push_back(vote(id, "A", "C", PwcChoice::Right));
        }
        BootstrapOptions o;
        o.iterations = 100;
        const auto s = bootstrap_jod(PairwiseTally::build(kGroup, votes), "A", o);
        REQUIRE(s.ci.has_value());
        for (const auto& [lo, hi] : *s.ci) CHECK(hi - lo == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("independent of the worker count") {
        const auto t = PairwiseTally::build(kGroup, fixture::simulated_votes(names, {0, 0.5, -1}, 10, 1, 8));
        BootstrapOptions o;
        o.iterations = 64;
        o.seed = 99;
        const auto one = bootstrap_jod(t, "A", o);
        o.jobs = 4;
        const auto four = bootstrap_jod(t, "A", o);
        CHECK(*one.ci == *four.ci);
    }
    SUBCASE("intervals cover the point estimate under reseeding") {
        const auto t = PairwiseTally::build(kGroup, fixture::simulated_votes(names, {0, 0.7, 1.6}, 15, 2, 5));
        int covered = 0, total = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            BootstrapOptions o;
            o.seed = seed;
            const auto s = bootstrap_jod(t, "A", o);
            CHECK(s.bootstrap_failures == 0);
            for (std::size_t i = 1; i < 3; ++i) {
                ++total;
                covered += (*s.ci)[i].first <= s.jod[i] && s.jod[i] <= (*s.ci)[i].second;
            }
        }
        CHECK(covered >= 0.95 * total);
    }
    SUBCASE("fewer than two subjects") {
        const auto t = PairwiseTally::build(kGroup, {vote("only", "A", "B", PwcChoice::Left)});
        const auto s = bootstrap_jod(t, "A");
        CHECK_FALSE(s.ci.has_value());
        CHECK_FALSE(s.warnings.empty());
    }
}

TEST_CASE("JSON lines") {
    const auto v = vote("sess-1", "Soldier-gpcc_p1_r1", "Soldier-gpcc_p2_r1", PwcChoice::NotSure);
    std::stringstream io;
    write_pwc_jsonl(io, {v, vote("sess-2", "X", "Y", PwcChoice::Right)});
    const auto back = read_pwc_jsonl(io, "votes.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].group == kGroup);
    CHECK(back[0].choice == PwcChoice::NotSure);
    CHECK(back[1].winner() == "Y");
    CHECK_FALSE(back[0].winner().has_value());

    SUBCASE("exact duplicates collapse, conflicting ones fail") {
        const auto line = to_json_line(vote("s", "A", "B", PwcChoice::Left));
        std::istringstream dup(line + "\n\n" + line + "\n");
        CHECK(read_pwc_jsonl(dup, "d").size() == 1);
        std::istringstream swapped(line + "\n" + to_json_line(vote("s", "B", "A", PwcChoice::Right)) + "\n");
        CHECK(read_pwc_jsonl(swapped, "d").size() == 1);
        std::istringstream conflict(line + "\n" + to_json_line(vote("s", "A", "B", PwcChoice::Right)) + "\n");
        CHECK_THROWS_AS(read_pwc_jsonl(conflict, "d"), IntegrityError);
    }
    SUBCASE("malformed input") {
        std::istringstream garbage("{not json\n");
        CHECK_THROWS_AS(read_pwc_jsonl(garbage, "g"), ParseError);
        std::istringstream missing(R"({"session":"s","left":"A","right":"B","choice":"left"})" "\n");
        CHECK_THROWS_AS(read_pwc_jsonl(missing, "m"), SchemaError);
        std::istringstream choice(
            R"({"session":"s","group":{"codec":"gpcc","rate":"R1","content":"X"},"left":"A","right":"B","choice":"up"})"
            "\n");
        CHECK_THROWS_AS(read_pwc_jsonl(choice, "c"), SchemaError);
    }
}

TEST_CASE("Not Sure profile") {
    std::vector<PwcVote> votes;
    for (int r = 1; r <= 4; ++r)
        for (int i = 0; i < 10; ++i) {
            auto v = vote("s" + std::to_string(i), "A", "B", i < r * 2 ? PwcChoice::NotSure : PwcChoice::Left);
            v.group.rate = "R" + std::to_string(r);
            votes.push_back(v);
        }
    const auto p = not_sure_profile(votes);
    REQUIRE(p.size() == 4);
    CHECK(p[0].rate == "R1");
    CHECK(p[0].proportion() == doctest::Approx(0.2));
    CHECK(p[3].proportion() == doctest::Approx(0.8));

    for (auto& v : votes) v.choice = PwcChoice::Left;
    for (const auto& s : not_sure_profile(votes)) CHECK(s.proportion() == 0.0);
    for (auto& v : votes) v.choice = PwcChoice::NotSure;
    for (const auto& s : not_sure_profile(votes)) CHECK(s.proportion() == 1.0);
    CHECK(not_sure_profile({}).empty());
}

TEST_CASE("anchors and JOD table") {
    CHECK(anchor_strategy(CodecId::JPEGPleno) == Strategy::P2);
    CHECK(anchor_strategy(CodecId::VPCC) == Strategy::P1);
    const GroupKey g{"jpegpleno", "R2", "Boxer"};
    std::vector<PwcVote> votes;
    for (auto [l, r] : {std::pair{"p1", "p2"}, {"p1", "p3"}, {"p2", "p3"}})
        votes.push_back({"s", g, std::string("Boxer-jpegpleno_") + l + "_r2", std::string("Boxer-jpegpleno_") + r + "_r2",
                         PwcChoice::Left, 1.0});
    const auto t = PairwiseTally::build(g, votes);
    CHECK(default_anchor(t) == "Boxer-jpegpleno_p2_r2");

    const auto s = thurstone_jod(t, *default_anchor(t));
    std::ostringstream out;
    write_jod_csv(out, {s});
    const std::string csv = out.str();
    CHECK(csv.rfind("codec,rate,content,stimulus_id,jod,ci_low,ci_high,anchor\n", 0) == 0);
    CHECK(csv.find("jpegpleno,R2,Boxer,Boxer-jpegpleno_p2_r2,0.000000,na,na,1") != std::string::npos);
}

TEST_CASE("type-7 quantile") {
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.0) == 1);
    CHECK(quantile_sorted({1, 2, 3, 4}, 1.0) == 4);
    CHECK(quantile_sorted({7}, 0.975) == 7);
    CHECK_THROWS_AS(quantile_sorted({}, 0.5), DomainError);
}
