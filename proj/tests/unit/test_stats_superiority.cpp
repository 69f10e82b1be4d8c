#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "pcqa/stats/superiority.hpp"
#include "pcqa/util/errors.hpp"
#include "support/stats_fixtures.hpp"

using namespace pcqa;

TEST_CASE("Welch one-tailed test") {
    SUBCASE("identical lists") {
        const auto r = welch_superior({3, 4, 5}, {3, 4, 5});
        CHECK(r.verdict == Direction::NoEvidence);
        CHECK(r.p_greater == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("near-degenerate separation") {
        std::vector<double> a, b;
        for (int i = 0; i < 5; ++i) {
            a.push_back(5 + 1e-6 * i);
            b.push_back(1 + 1e-6 * i);
        }
        const auto r = welch_superior(a, b);
        CHECK(r.verdict == Direction::FirstSuperior);
        CHECK(r.p_greater < 1e-6);
    }
    SUBCASE("mirrored samples") {
        const auto r = welch_superior({4, 5, 4, 5}, {4, 4, 5, 5});
        CHECK(r.verdict == Direction::NoEvidence);
        CHECK(r.t == doctest::Approx(0.0));
        CHECK(std::fabs(r.p_greater - 0.5) < 1e-9);
    }
    SUBCASE("zero variance") {
        CHECK(welch_superior({3, 3}, {3, 3}).verdict == Direction::NoEvidence);
        const auto r = welch_superior({4, 4, 4}, {2, 2});
        CHECK(r.verdict == Direction::FirstSuperior);
        CHECK(r.p_greater == 0.0);
    }
    SUBCASE("swap flips direction and p-values sum to one") {
        const std::vector<double> a{3, 4, 5, 5, 4, 5}, b{2, 3, 3, 2, 4};
        const auto ab = welch_superior(a, b), ba = welch_superior(b, a);
        CHECK(ab.verdict == Direction::FirstSuperior);
        CHECK(ba.verdict == Direction::SecondSuperior);
        CHECK(std::fabs(ab.p_greater + ab.p_less - 1.0) < 1e-12);
        CHECK(ab.p_greater == doctest::Approx(ba.p_less).epsilon(1e-12));
        // Welch-Satterthwaite df by hand: va = 2/3, vb = 0.7, na = 6, nb = 5
        const double qa = (2.0 / 3.0) / 6, qb = 0.7 / 5;
        CHECK(ab.df == doctest::Approx((qa + qb) * (qa + qb) / (qa * qa / 5 + qb * qb / 4)));
    }
    CHECK_THROWS_AS(welch_superior({1}, {1, 2}), DomainError);
}

TEST_CASE("JOD threshold") {
    CHECK(jod_superior(1.2, 0.0) == Direction::FirstSuperior);
    CHECK(jod_superior(0.99, 0.0) == Direction::NoEvidence);
    CHECK(jod_superior(0.0, 1.0) == Direction::SecondSuperior);
    for (double a : {-2.0, -1.0, 0.0, 0.5, 1.0, 3.0})
        for (double b : {-1.0, 0.0, 1.0, 2.0}) {
            const auto ab = jod_superior(a, b), ba = jod_superior(b, a);
            CHECK_FALSE((ab == Direction::FirstSuperior && ba == Direction::FirstSuperior));
            CHECK_FALSE((ab == Direction::SecondSuperior && ba == Direction::SecondSuperior));
        }
    JodScale s;
    s.group = fixture::test_group();
    s.stimuli = {"A", "B"};
    s.jod = {0.0, 1.5};
    CHECK(jod_superior(s, "B", "A") == Direction::FirstSuperior);
    CHECK_THROWS_AS(jod_superior(s, "A", "Other"), SchemaError);
}

namespace {

const CellKey kCell{"Boxer", "gpcc", "R2"};

SuperiorityVerdict verdict(Strategy a, Strategy b, EvidenceSource src, Direction d) {
    return {kCell, a, b, src, d, {}, {}, {}};
}

}  // namespace

TEST_CASE("diagram assembly") {
    using enum Strategy;
    SUBCASE("no evidence gives three dotted edges") {
        const auto cells = assemble_diagram({verdict(P1, P2, EvidenceSource::DSIS, Direction::NoEvidence)});
        REQUIRE(cells.size() == 1);
        REQUIRE(cells[0].edges.size() == 3);
        for (const auto& e : cells[0].edges) CHECK(e.dotted());
        CHECK(count_insignificant_cells(cells) == 1);
    }
    SUBCASE("agreeing sources share one arrow") {
        const auto cells = assemble_diagram({verdict(P1, P2, EvidenceSource::DSIS, Direction::FirstSuperior),
                                             verdict(P2, P1, EvidenceSource::PWC, Direction::SecondSuperior)});
        const auto& e = cells[0].edges[0];
        REQUIRE(e.arrows.size() == 1);
        CHECK(e.arrows[0].winner == P1);
        CHECK(e.arrows[0].sources == std::vector{EvidenceSource::DSIS, EvidenceSource::PWC});
        CHECK(count_insignificant_cells(cells) == 0);
    }
    SUBCASE("one source cannot point both ways") {
        CHECK_THROWS_AS(assemble_diagram({verdict(P1, P3, EvidenceSource::DSIS, Direction::FirstSuperior),
                                          verdict(P1, P3, EvidenceSource::DSIS, Direction::SecondSuperior)}),
                        IntegrityError);
        CHECK_THROWS_AS(assemble_diagram({verdict(P2, P2, EvidenceSource::PWC, Direction::NoEvidence)}), SchemaError);
    }
    SUBCASE("configuration arrows alone keep a cell insignificant") {
        auto v = verdict(P2, P3, EvidenceSource::ConfigRelation, Direction::FirstSuperior);
        v.relation = ConfigRelation::StrictlyBetter;
        const auto cells = assemble_diagram({v});
        CHECK(cells[0].edges[2].arrows.size() == 1);
        CHECK(cells[0].edges[2].relation == ConfigRelation::StrictlyBetter);
        CHECK(cells[0].insignificant());
    }
}

TEST_CASE("verdicts from data") {
    std::vector<DsisRecord> recs;
    for (int s = 0; s < 8; ++s) {
        const std::string subj = "s" + std::to_string(s);
        recs.push_back({subj, "Boxer-gpcc_p1_r2", 4 + s % 2});
        recs.push_back({subj, "Boxer-gpcc_p2_r2", 2 + s % 2});
        recs.push_back({subj, "Boxer-gpcc_p3_r2", 4 + (s + 1) % 2});
        recs.push_back({subj, "Boxer-reference", 5});
    }
    const auto dsis = dsis_verdicts(ScoreMatrix::from_records(recs));
    REQUIRE(dsis.size() == 3);
    CHECK(dsis[0].direction == Direction::FirstSuperior);  // P1 over P2
    CHECK(dsis[1].direction == Direction::NoEvidence);     // P1 vs P3
    CHECK(dsis[2].direction == Direction::SecondSuperior);  // P3 over P2

    JodScale s;
    s.group = {"gpcc", "R2", "Boxer"};
    s.stimuli = {"Boxer-gpcc_p1_r2", "Boxer-gpcc_p2_r2", "Boxer-gpcc_p3_r2"};
    s.jod = {0.0, -1.4, 0.3};
    const auto pwc = pwc_verdicts({s});
    REQUIRE(pwc.size() == 3);
    CHECK(pwc[0].direction == Direction::FirstSuperior);
    CHECK(*pwc[0].jod_delta == doctest::Approx(1.4));

    auto all = dsis;
    all.insert(all.end(), pwc.begin(), pwc.end());
    const auto cells = assemble_diagram(all);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].edges[0].arrows[0].sources.size() == 2);
    CHECK(cells[0].edges[2].arrows[0].winner == Strategy::P3);

    const auto j = nlohmann::json::parse(diagram_json(cells));
    CHECK(j[0]["content"] == "Boxer");
    CHECK(j[0]["significant"] == true);
    CHECK(j[0]["edges"][1]["dotted"] == true);
    CHECK(j[0]["edges"][0]["arrows"][0]["winner"] == "P1");
}

TEST_CASE("configuration verdicts for JPEG Pleno cells") {
    const auto v = config_verdicts({{"Thaidancer", "jpegpleno", "R1"}, {"Thaidancer", "gpcc", "R1"}, {"Nowhere", "jpegpleno", "R1"}});
    REQUIRE(v.size() == 3);
    for (const auto& x : v) {
        CHECK(x.cell.content == "Thaidancer");
        CHECK(x.relation.has_value());
    }
}
