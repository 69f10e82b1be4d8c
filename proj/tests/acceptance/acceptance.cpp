// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pcqa/codec/ctc_tables.hpp"
#include "pcqa/codec/search.hpp"
#include "pcqa/metrics/metrics.hpp"
#include "pcqa/stats/superiority.hpp"
#include "support/oracles.hpp"
#include "support/stats_fixtures.hpp"

using namespace pcqa;

namespace {

struct Outcome {
    enum Status { Pass, Fail, Skip } status = Pass;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            status = Fail;
            notes.push_back(what);
        }
    }
};

std::string num(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

bool rel_close(double a, double b, double rel) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// Metric oracle --------------------------------------------------------------

PointCloud jittered(std::mt19937_64& rng, const PointCloud& ref, int amplitude) {
    std::uniform_int_distribution<int> d(-amplitude, amplitude);
    std::uniform_int_distribution<int> c(-20, 20);
    std::bernoulli_distribution keep(0.8);
    const double hi = ref.peak();
    std::vector<Vec3> pts;
    std::vector<Rgb> cols;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!keep(rng) && !(pts.empty() && i + 1 == ref.size())) continue;
        Vec3 p = ref.positions()[i];
        for (auto& x : p) x = std::clamp(x + d(rng), 0.0, hi);
        pts.push_back(p);
        Rgb col = ref.colors()[i];
        for (auto& ch : col) ch = static_cast<std::uint8_t>(std::clamp(ch + c(rng), 0, 255));
        cols.push_back(col);
    }
    return PointCloud(std::move(pts), std::move(cols), ref.bit_depth(), "jittered");
}

Outcome metric_oracle() {
    Outcome o;
    std::mt19937_64 rng(20240501);
    std::uniform_int_distribution<std::size_t> size(2, 2000);
    std::uniform_int_distribution<int> depth(6, 12);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int bd = depth(rng);
        const auto ref = oracle::random_cloud(rng, size(rng), bd, true, t % 4 != 3);
        PointCloud dec = t % 3 == 0 ? oracle::random_cloud(rng, size(rng), bd, true) : jittered(rng, ref, 1 + t % 4);
        if (t == 0) dec = ref;
        MetricOptions opts;
        const auto normals = reference_normals(ref, opts);
        const auto rep = evaluate_triple(ref, dec, 0, opts, &normals);
        const auto col = oracle::color_psnr(ref, dec);
        const std::pair<double, double> pairs[] = {{rep.d1_psnr.value(), oracle::d1_psnr(ref, dec)},
                                                   {rep.d2_psnr.value(), oracle::d2_psnr(ref, dec, normals.normals)},
                                                   {rep.y_psnr->value(), col.y},
                                                   {rep.yuv_psnr->value(), col.yuv}};
        const char* names[] = {"D1", "D2", "Y", "YUV"};
        for (int k = 0; k < 4; ++k) {
            const auto [got, want] = pairs[k];
            if (!std::isinf(got) && !std::isinf(want))
                worst = std::max(worst, std::abs(got - want) / std::max(std::abs(got), std::abs(want)));
            o.expect(rel_close(got, want, 1e-9), std::string(names[k]) + " pair " + std::to_string(t) + ": " +
                                                     num(got, 17) + " vs oracle " + num(want, 17));
        }
    }
    o.notes.insert(o.notes.begin(), "100 pairs, worst relative error " + num(worst, 3));
    return o;
}

// CTC tables -----------------------------------------------------------------

struct JpegRow {
    const char* content;
    const char* rate;
    JpegConfig p[3];
};

// Configuration table of the evaluated JPEG Pleno stimuli (lambda, SF, CRI).
const JpegRow kJpegGolden[] = {
    {"Bouquet", "R1", {{0.05, 2, 1}, {0.025, 2, 0}, {0.01, 2, 0}}},
    {"Bouquet", "R2", {{0.05, 1, 1}, {0.025, 1, 0}, {0.01, 1, 0}}},
    {"Bouquet", "R3", {{0.005, 1, 3}, {0.005, 1, 2}, {0.0025, 1, 2}}},
    {"Bouquet", "R4", {{0.005, 1, 4}, {0.0025, 1, 4}, {0.0025, 1, 3}}},
    {"StMichael", "R1", {{0.05, 2, 1}, {0.025, 2, 0}, {0.01, 2, 0}}},
    {"StMichael", "R2", {{0.05, 1, 2}, {0.025, 1, 1}, {0.01, 1, 0}}},
    {"StMichael", "R3", {{0.01, 1, 3}, {0.005, 1, 2}, {0.0025, 1, 2}}},
    {"StMichael", "R4", {{0.005, 1, 4}, {0.0025, 1, 4}, {0.0025, 1, 3}}},
    {"Soldier", "R1", {{0.01, 4, 3}, {0.005, 4, 2}, {0.025, 2, 0}}},
    {"Soldier", "R2", {{0.05, 1, 2}, {0.05, 1, 1}, {0.025, 1, 0}}},
    {"Soldier", "R3", {{0.025, 1, 3}, {0.01, 1, 3}, {0.005, 1, 2}}},
    {"Soldier", "R4", {{0.005, 1, 4}, {0.0025, 1, 4}, {0.0025, 1, 3}}},
    {"Thaidancer", "R1", {{0.05, 8, 1}, {0.025, 8, 1}, {0.025, 8, 0}}},
    {"Thaidancer", "R2", {{0.05, 4, 1}, {0.025, 4, 1}, {0.05, 4, 0}}},
    {"Thaidancer", "R3", {{0.025, 2, 2}, {0.025, 2, 1}, {0.01, 2, 0}}},
    {"Thaidancer", "R4", {{0.025, 1, 3}, {0.01, 1, 2}, {0.005, 1, 1}}},
    {"Boxer", "R1", {{0.05, 8, 2}, {0.05, 8, 1}, {0.025, 8, 0}}},
    {"Boxer", "R2", {{0.05, 4, 3}, {0.05, 4, 2}, {0.025, 4, 1}}},
    {"Boxer", "R3", {{0.05, 2, 3}, {0.05, 2, 2}, {0.025, 2, 1}}},
    {"Boxer", "R4", {{0.05, 1, 3}, {0.005, 2, 4}, {0.0025, 2, 3}}},
    {"House_without_roof", "R1", {{0.05, 8, 2}, {0.025, 8, 1}, {0.01, 8, 0}}},
    {"House_without_roof", "R2", {{0.025, 4, 2}, {0.025, 4, 1}, {0.01, 4, 1}}},
    {"House_without_roof", "R3", {{0.025, 2, 3}, {0.01, 2, 2}, {0.005, 2, 1}}},
    {"House_without_roof", "R4", {{0.01, 1, 3}, {0.005, 1, 3}, {0.005, 1, 2}}},
};

Outcome ctc_tables() {
    Outcome o;
    int checks = 0;
    // G-PCC CTC, columns r01..r06: pqs at 12 bit, pqs at 10 bit, qp.
    const double pqs12[] = {0.03125, 0.0625, 0.125, 0.25, 0.5, 0.75};
    const double pqs10[] = {0.125, 0.25, 0.5, 0.75, 0.875, 0.9375};
    const int qp[] = {51, 46, 40, 34, 28, 22};
    for (int r = 0; r < 6; ++r, ++checks) {
        const auto rate = static_cast<GpccCtcRate>(r + 1);
        o.expect(gpcc_ctc_params(rate, 12) == GpccParams{pqs12[r], qp[r]} &&
                     gpcc_ctc_params(rate, 10) == GpccParams{pqs10[r], qp[r]},
                 "G-PCC CTC column r0" + std::to_string(r + 1));
    }
    // V-PCC CTC, r1..r5.
    const int aqp[] = {42, 37, 32, 27, 22}, gqp[] = {32, 28, 24, 20, 16}, occ[] = {4, 4, 4, 4, 2};
    for (int r = 0; r < 5; ++r) {
        const auto p = vpcc_ctc_params(static_cast<VpccCtcRate>(r + 1));
        const std::string col = "V-PCC CTC r" + std::to_string(r + 1);
        o.expect(p.aqp == aqp[r], col + " aqp");
        o.expect(p.gqp == gqp[r], col + " gqp");
        o.expect(p.occupancy_precision == occ[r], col + " occupancyPrecision");
        checks += 3;
    }
    // G-PCC qp per strategy; R4/P2 is 34 at 12 bit and 31 at 10 bit.
    const int sqp[3][4] = {{46, 40, 34, 28}, {37, 34, 28, 0}, {28, 28, 22, 22}};
    for (int s = 0; s < 3; ++s)
        for (int r = 0; r < 4; ++r, ++checks) {
            const std::string cell = "G-PCC qp " + to_string(kAllStrategies[s]) + "/" + to_string(kAllRates[r]);
            if (s == 1 && r == 3)
                o.expect(gpcc_strategy_qp(RatePoint::R4, Strategy::P2, 12) == 34 &&
                             gpcc_strategy_qp(RatePoint::R4, Strategy::P2, 10) == 31,
                         cell);
            else
                o.expect(gpcc_strategy_qp(kAllRates[r], kAllStrategies[s], 10) == sqp[s][r] &&
                             gpcc_strategy_qp(kAllRates[r], kAllStrategies[s], 12) == sqp[s][r],
                         cell);
        }
    for (const auto& row : kJpegGolden)
        for (int s = 0; s < 3; ++s, ++checks)
            o.expect(jpeg_config_lookup(row.content, parse_rate(row.rate), kAllStrategies[s]) == row.p[s],
                     std::string("JPEG ") + row.content + " " + row.rate + " " + to_string(kAllStrategies[s]));
    o.notes.insert(o.notes.begin(), std::to_string(checks) + " cells (6 + 15 + 12 + 72)");
    return o;
}

Outcome ladder_rule() {
    Outcome o;
    const std::pair<double, std::vector<double>> runs[] = {{0.03125, {0.0625, 0.125, 0.25, 0.5, 0.75}},
                                                           {0.125, {0.25, 0.5, 0.75, 0.875, 0.9375}}};
    for (const auto& [start, want] : runs) {
        double p = start;
        std::vector<double> got;
        for (int k = 0; k < 5; ++k) got.push_back(p = next_pqs(p));
        std::string shown;
        for (double v : got) shown += " " + num(v, 10);
        o.expect(got == want, "from " + num(start) + ":" + shown);
    }
    return o;
}

// Strategy relations ------------------------------------------------------------

// Solid arrows of the JPEG Pleno strategy-relationship diagram, "XY" meaning
// X is strictly better than Y. Cells drawn as "Equal" have no arrow.
struct FigureCell {
    const char* content;
    const char* rate;
    std::vector<std::string> arrows;
};

const FigureCell kFigure[] = {
    {"Bouquet", "R1", {"P3P2"}},           {"Bouquet", "R2", {"P3P2"}},
    {"Bouquet", "R3", {"P1P2", "P3P2"}},   {"Bouquet", "R4", {"P2P1", "P2P3"}},
    {"StMichael", "R1", {"P3P2"}},         {"StMichael", "R2", {}},
    {"StMichael", "R3", {"P3P2"}},         {"StMichael", "R4", {"P2P1", "P2P3"}},
    {"Soldier", "R1", {}},                 {"Soldier", "R2", {"P1P2"}},
    {"Soldier", "R3", {"P2P1"}},           {"Soldier", "R4", {"P2P1", "P2P3"}},
    {"Thaidancer", "R1", {"P2P1", "P2P3"}}, {"Thaidancer", "R2", {"P2P1"}},
    {"Thaidancer", "R3", {"P1P2"}},        {"Thaidancer", "R4", {}},
    {"Boxer", "R1", {"P1P2"}},             {"Boxer", "R2", {"P2P1"}},
    {"Boxer", "R3", {"P1P2"}},             {"Boxer", "R4", {}},
    {"House_without_roof", "R1", {}},      {"House_without_roof", "R2", {"P1P2", "P3P2"}},
    {"House_without_roof", "R3", {}},      {"House_without_roof", "R4", {"P2P1", "P2P3"}},
};

Outcome figure_relations() {
    Outcome o;
    int solid = 0, dotted = 0, solid_ok = 0, dotted_ok = 0;
    for (const auto& cell : kFigure) {
        const RatePoint rate = parse_rate(cell.rate);
        for (auto a : kAllStrategies)
            for (auto b : kAllStrategies) {
                if (static_cast<int>(a) >= static_cast<int>(b)) continue;
                const auto ab = config_relation(jpeg_config_lookup(cell.content, rate, a),
                                                jpeg_config_lookup(cell.content, rate, b));
                const auto ba = config_relation(jpeg_config_lookup(cell.content, rate, b),
                                                jpeg_config_lookup(cell.content, rate, a));
                const std::string fwd = to_string(a) + to_string(b), rev = to_string(b) + to_string(a);
                const auto has = [&](const std::string& s) {
                    return std::find(cell.arrows.begin(), cell.arrows.end(), s) != cell.arrows.end();
                };
                const std::string where = std::string(cell.content) + " " + cell.rate + " ";
                if (has(fwd) || has(rev)) {
                    ++solid;
                    const bool ok = has(fwd) ? ab == ConfigRelation::StrictlyBetter : ba == ConfigRelation::StrictlyBetter;
                    solid_ok += ok;
                    o.expect(ok, where + "solid " + (has(fwd) ? fwd : rev) + " not reproduced (table gives " +
                                     fwd + " " + std::string(to_string(ab)) + ")");
                } else {
                    ++dotted;
                    const bool ok = ab != ConfigRelation::StrictlyBetter && ba != ConfigRelation::StrictlyBetter;
                    dotted_ok += ok;
                    o.expect(ok, where + "dotted " + fwd + " classified " + std::string(to_string(ab)));
                }
            }
    }
    o.notes.insert(o.notes.begin(), std::to_string(solid_ok) + "/" + std::to_string(solid) + " solid arrows, " +
                                        std::to_string(dotted_ok) + "/" + std::to_string(dotted) + " dotted connections");
    return o;
}

// Thurstone ---------------------------------------------------------------------

Outcome thurstone() {
    Outcome o;
    const GroupKey g = fixture::test_group();
    {
        const auto t = PairwiseTally::from_counts(g, {"A", "B"}, {{0, 15}, {5, 0}});
        const double d = thurstone_jod(t, "B").at("A");
        o.expect(std::abs(d - 1.0) <= 1e-3, "two-stimulus 15/5 tally gives " + num(d, 8) + " JOD");
        std::ostringstream shown;
        shown << std::fixed << std::setprecision(6) << d;
        o.notes.push_back("75% tally: " + shown.str() + " JOD");
    }
    {
        const std::vector<std::vector<double>> c = {{0, 6, 2}, {14, 0, 5}, {18, 15, 0}};
        const auto t = PairwiseTally::from_counts(g, {"A", "B", "C"}, c);
        const auto s = thurstone_jod(t, "A");
        const auto grid = oracle::grid_thurstone3(c);
        const double e = std::max(std::abs(s.at("B") - grid[1]), std::abs(s.at("C") - grid[2]));
        o.expect(e <= 2e-2, "three-stimulus case differs from the grid oracle by " + num(e, 4) + " JOD");
        o.notes.push_back("grid oracle gap " + num(e, 3) + " JOD");
    }
    {
        const std::vector<std::string> names{"A", "B", "C", "D"};
        const auto t = PairwiseTally::build(g, fixture::simulated_votes(names, {0, 0.7, 1.5, 2.4}, 20, 1, 5));
        BootstrapOptions b;
        b.iterations = 1000;
        const auto s = bootstrap_jod(t, "A", b);
        const bool has_ci = s.ci.has_value();
        o.expect(has_ci, "bootstrap produced no intervals");
        if (has_ci) {
            const auto [lo, hi] = (*s.ci)[0];
            o.expect(hi - lo == 0.0 && lo == 0.0, "anchor interval [" + num(lo) + ", " + num(hi) + "]");
            for (std::size_t i = 1; i < names.size(); ++i)
                o.expect((*s.ci)[i].second > (*s.ci)[i].first, "free stimulus " + names[i] + " has an empty interval");
        }
    }
    return o;
}

// Isorate ------------------------------------------------------------------------

Outcome isorate() {
    Outcome o;
    std::mt19937_64 rng(77);
    const auto content = oracle::random_cloud(rng, 1500, 10, true);
    const auto codec = CodecAdapter::mock();
    const auto ladder = gpcc_pqs_ladder(10);
    std::vector<double> sweep;
    for (int q = 4; q <= 51; q += 3) sweep.push_back(q);
    std::uniform_real_distribution<double> log_target(std::log(0.02), std::log(5.0));
    std::size_t rows = 0, feasible = 0;
    for (int t = 0; t < 20; ++t) {
        const double bpp = std::exp(log_target(rng));
        const auto got = isorate_search(codec, content, IsorateRequest{bpp, {"qp", sweep}, {"pqs", ladder}});
        const auto want = oracle::exhaustive_isorate(codec, content, "qp", sweep, "pqs", ladder, bpp);
        for (std::size_t k = 0; k < sweep.size(); ++k, ++rows) {
            const std::string where = "target " + num(bpp) + " qp " + num(sweep[k]);
            if (want[k] < 0) {
                o.expect(!got[k].feasible(), where + ": search found a value, exhaustive found none");
                continue;
            }
            ++feasible;
            o.expect(got[k].feasible() && *got[k].chosen == ladder[want[k]],
                     where + ": search chose " + (got[k].feasible() ? num(*got[k].chosen) : "nothing") +
                         ", exhaustive " + num(ladder[want[k]]));
            if (got[k].feasible()) o.expect(got[k].result->bitrate_bpp <= bpp, where + ": bitrate over target");
        }
    }
    o.notes.insert(o.notes.begin(), "20 targets, " + std::to_string(rows) + " rows (" + std::to_string(feasible) +
                                        " feasible)");
    return o;
}

// Statistics fixtures ---------------------------------------------------------------

Outcome stats_fixtures() {
    Outcome o;
    const auto m = ScoreMatrix::from_records(
        {{"s1", "Soldier-gpcc_p1_r1", 5}, {"s2", "Soldier-gpcc_p1_r1", 4}, {"s3", "Soldier-gpcc_p1_r1", 4},
         {"s4", "Soldier-gpcc_p1_r1", 5}});
    const auto mos = mos_ci(m);
    o.expect(mos.size() == 1 && std::abs(mos[0].mos - 4.5) <= 1e-12, "MOS of [5,4,4,5]");
    o.expect(mos.size() == 1 && mos[0].ci95 && std::abs(*mos[0].ci95 - 0.9187) <= 1e-4,
             "CI of [5,4,4,5] is " + (mos.empty() || !mos[0].ci95 ? std::string("missing") : num(*mos[0].ci95)));

    const auto w = welch_superior({3, 4, 5, 2}, {5, 4, 3, 2});
    o.expect(std::abs(w.p_greater - 0.5) <= 1e-9 && std::abs(w.p_less - 0.5) <= 1e-9,
             "mirrored samples give p = " + num(w.p_greater, 12));

    const auto screened = screen_outliers(fixture::inverted_scorer_matrix());
    o.expect(screened.rejected == std::vector<std::string>{"inverted"},
             "screening rejected " + std::to_string(screened.rejected.size()) + " subjects");
    o.notes.push_back("MOS " + num(mos.at(0).mos) + " +- " + num(*mos.at(0).ci95, 6) + ", Welch p " +
                      num(w.p_greater) + ", rejected " + (screened.rejected.empty() ? "none" : screened.rejected[0]));
    return o;
}

// Released-dataset replication ------------------------------------------------------

Outcome dataset_replication() {
    Outcome o;
    const char* dir = std::getenv("PCQA_MJPCCD_DIR");
    if (!dir || !*dir) {
        o.status = Outcome::Skip;
        o.notes.push_back("set PCQA_MJPCCD_DIR to a directory with dsis_scores.csv and pwc_votes.jsonl");
        return o;
    }
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::ifstream dsis_in(root / "dsis_scores.csv"), pwc_in(root / "pwc_votes.jsonl");
    if (!dsis_in || !pwc_in) {
        o.expect(false, "cannot read dsis_scores.csv / pwc_votes.jsonl under " + root.string());
        return o;
    }
    const auto matrix = ScoreMatrix::from_records(read_dsis_csv(dsis_in, (root / "dsis_scores.csv").string()));
    const auto votes = read_pwc_jsonl(pwc_in, (root / "pwc_votes.jsonl").string());

    const auto screened = screen_outliers(matrix);
    o.expect(screened.rejected.empty(), std::to_string(screened.rejected.size()) + " DSIS outliers");

    const double expected[] = {0.07, 0.18, 0.36, 0.50};
    const auto shares = not_sure_profile(votes);
    o.expect(shares.size() == 4, std::to_string(shares.size()) + " rate labels in the votes");
    for (std::size_t r = 0; r < std::min<std::size_t>(4, shares.size()); ++r)
        o.expect(std::abs(shares[r].proportion() - expected[r]) <= 0.005,
                 shares[r].rate + " Not Sure share " + num(100 * shares[r].proportion(), 4) + "%");

    std::vector<JodScale> scales;
    for (const auto& [group, tally] : build_tallies(votes)) {
        const auto anchor = default_anchor(tally);
        BootstrapOptions b;
        b.jobs = 0;
        scales.push_back(bootstrap_jod(tally, anchor.value_or(tally.stimuli().front()), b));
    }
    auto verdicts = dsis_verdicts(screened.cleaned);
    const auto pv = pwc_verdicts(scales);
    verdicts.insert(verdicts.end(), pv.begin(), pv.end());
    const auto cells = assemble_diagram(verdicts);
    const auto insignificant = count_insignificant_cells(cells);
    o.expect(cells.size() == 48 && insignificant == 26, std::to_string(insignificant) + " of " +
                                                            std::to_string(cells.size()) +
                                                            " cells without a significant comparison");
    return o;
}

struct Criterion {
    const char* name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {"metric-oracle-equivalence", 60.0, metric_oracle},
        {"ctc-golden-tables", 0.0, ctc_tables},
        {"pqs-ladder-rule", 0.0, ladder_rule},
        {"jpeg-strategy-relations", 0.0, figure_relations},
        {"thurstone-correctness", 30.0, thurstone},
        {"isorate-search-equivalence", 10.0, isorate},
        {"statistics-fixtures", 0.0, stats_fixtures},
        {"dataset-replication", 0.0, dataset_replication},
    };
    const std::string only = argc > 1 ? argv[1] : "";
    bool any_fail = false;
    bool matched = false;
    for (const auto& c : criteria) {
        if (!only.empty() && only != c.name) continue;
        matched = true;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.status = Outcome::Fail;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs >= c.budget_s && o.status != Outcome::Skip)
            o.expect(false, "took " + num(secs, 3) + " s, budget " + num(c.budget_s) + " s");
        const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIP";
        any_fail |= o.status == Outcome::Fail;
        std::cout << tag << "  " << c.name << "  (" << std::fixed << std::setprecision(2) << secs << " s)";
        std::cout.unsetf(std::ios::fixed);
        if (!o.notes.empty()) std::cout << "  " << o.notes.front();
        std::cout << "\n";
        for (std::size_t i = 1; i < o.notes.size() && i <= 12; ++i) std::cout << "      " << o.notes[i] << "\n";
        if (o.notes.size() > 13) std::cout << "      ... " << o.notes.size() - 13 << " more\n";
    }
    if (!matched) {
        std::cerr << "unknown criterion '" << only << "'\n";
        return 2;
    }
    return any_fail ? 1 : 0;
}
