#include <memory>
#include <set>

#include "cli.hpp"
#include "pcqa/stats/superiority.hpp"
#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"

namespace pcqa::cli {

namespace {

ScoreMatrix read_scores(const std::string& path) {
    auto in = open_input(path);
    return ScoreMatrix::from_records(read_dsis_csv(in, path));
}

std::vector<PwcVote> read_votes(const std::string& path) {
    auto in = open_input(path);
    return read_pwc_jsonl(in, path);
}

// Screening needs three subjects; smaller panels are used as they are.
ScreeningResult screen_or_keep(const ScoreMatrix& m, bool screen) {
    if (screen && m.subjects().size() >= 3) return screen_outliers(m);
    if (screen) std::cerr << "warning: fewer than 3 subjects, outlier screening skipped\n";
    return ScreeningResult{m, {}, {}};
}

// dsis ----------------------------------------------------------------------

struct DsisArgs {
    std::string scores;
    bool no_screen = false;
    bool include_hidden = false;
};

void run_dsis(const DsisArgs& a, const Globals& g) {
    const auto screened = screen_or_keep(read_scores(a.scores), !a.no_screen);
    Output mos(g, "mos.csv");
    write_mos_csv(mos.stream(), mos_ci(screened.cleaned, a.include_hidden));
    mos.finish();

    if (!g.out.empty()) {
        Output scr(g, "screening.csv");
        scr.stream() << "subject_id,ratings,above,below,rejected\n";
        for (const auto& d : screened.details)
            scr.stream() << csv_join({d.subject, std::to_string(d.ratings), std::to_string(d.above),
                                      std::to_string(d.below), d.rejected ? "1" : "0"})
                         << "\n";
        scr.finish();
    }
    std::cerr << "outliers rejected: " << screened.rejected.size();
    for (const auto& s : screened.rejected) std::cerr << " " << s;
    std::cerr << "\n";
}

// pwc -----------------------------------------------------------------------

struct PwcArgs {
    std::string votes;
    double prior = kDefaultTallyPrior;
    std::size_t iterations = 1000;
};

std::vector<JodScale> scale_all(const std::vector<PwcVote>& votes, const PwcArgs& a, const Globals& g) {
    std::vector<JodScale> out;
    for (const auto& [group, tally] : build_tallies(votes, a.prior)) {
        std::string anchor;
        if (auto d = default_anchor(tally)) {
            anchor = *d;
        } else {
            anchor = tally.stimuli().front();
            std::cerr << "warning: " << group.str() << ": no stimulus follows the naming convention, anchoring '"
                      << anchor << "'\n";
        }
        JodScale s;
        if (a.iterations == 0) {
            s = thurstone_jod(tally, anchor);
        } else {
            BootstrapOptions b;
            b.iterations = a.iterations;
            b.seed = g.seed;
            b.jobs = g.workers();
            s = bootstrap_jod(tally, anchor, b);
        }
        for (const auto& w : s.warnings) std::cerr << "warning: " << group.str() << ": " << w << "\n";
        if (s.bootstrap_failures)
            std::cerr << "warning: " << group.str() << ": " << s.bootstrap_failures << " bootstrap fits failed\n";
        out.push_back(std::move(s));
    }
    return out;
}

void run_pwc(const PwcArgs& a, const Globals& g) {
    const auto scales = scale_all(read_votes(a.votes), a, g);
    Output out(g, "jod.csv");
    write_jod_csv(out.stream(), scales);
    out.finish();
}

void run_notsure(const std::string& votes, const Globals& g) {
    Output out(g, "not_sure.csv");
    out.stream() << "rate,votes,not_sure,proportion\n";
    for (const auto& s : not_sure_profile(read_votes(votes)))
        out.stream() << csv_join({s.rate, std::to_string(s.votes), std::to_string(s.not_sure),
                                  format_real(s.proportion(), 6)})
                     << "\n";
    out.finish();
}

// diagram -------------------------------------------------------------------

struct DiagramArgs {
    std::string dsis;
    std::string pwc;
    bool config = false;
    bool no_screen = false;
    double alpha = 0.05;
    double threshold = kJodThreshold;
    PwcArgs scaling;
};

void run_diagram(const DiagramArgs& a, const Globals& g) {
    if (a.dsis.empty() && a.pwc.empty()) throw ValidationError("diagram needs --dsis and/or --pwc");
    std::vector<SuperiorityVerdict> verdicts;
    if (!a.dsis.empty()) {
        const auto screened = screen_or_keep(read_scores(a.dsis), !a.no_screen);
        const auto v = dsis_verdicts(screened.cleaned, a.alpha);
        verdicts.insert(verdicts.end(), v.begin(), v.end());
    }
    if (!a.pwc.empty()) {
        const auto v = pwc_verdicts(scale_all(read_votes(a.pwc), a.scaling, g), a.threshold);
        verdicts.insert(verdicts.end(), v.begin(), v.end());
    }
    if (a.config) {
        std::vector<CellKey> cells;
        for (const auto& v : verdicts) cells.push_back(v.cell);
        const auto v = config_verdicts(cells);
        verdicts.insert(verdicts.end(), v.begin(), v.end());
    }
    const auto cells = assemble_diagram(verdicts);
    Output out(g, "diagram.json");
    out.stream() << diagram_json(cells) << "\n";
    out.finish();
    std::cerr << count_insignificant_cells(cells) << " of " << cells.size()
              << " cells without a significant subjective comparison\n";
}

// welch ---------------------------------------------------------------------

void run_welch(const std::vector<double>& a, const std::vector<double>& b, double alpha, const Globals& g) {
    const auto r = welch_superior(a, b, alpha);
    Output out(g, "welch.csv");
    out.stream() << "t,df,p_greater,p_less,verdict\n"
                 << csv_join({format_real(r.t, 6), format_real(r.df, 6), format_real(r.p_greater, 9),
                              format_real(r.p_less, 9), std::string(to_string(r.verdict))})
                 << "\n";
    out.finish();
}

void add_scaling_options(CLI::App* cmd, PwcArgs& a) {
    cmd->add_option("--prior", a.prior, "Initial weight of every compared pair")->check(CLI::NonNegativeNumber);
    cmd->add_option("--iterations", a.iterations, "Bootstrap iterations (0: point estimate only)");
}

}  // namespace

void add_stats_commands(CLI::App& app, Globals& g) {
    auto* stats = app.add_subcommand("stats", "Subjective score analysis");
    stats->require_subcommand(1);
    {
        auto a = std::make_shared<DsisArgs>();
        auto* cmd = stats->add_subcommand("dsis", "MOS and 95% CI per stimulus from subject_id,stimulus_id,score");
        cmd->add_option("scores", a->scores, "DSIS score CSV")->required();
        cmd->add_flag("--no-screen", a->no_screen, "Keep every subject (skip BT.500 screening)");
        cmd->add_flag("--include-hidden", a->include_hidden, "Report hidden references too");
        cmd->final_callback([a, &g] { run_dsis(*a, g); });
    }
    {
        auto a = std::make_shared<PwcArgs>();
        auto* cmd = stats->add_subcommand("pwc", "JOD scales with bootstrap intervals from pairwise votes");
        cmd->add_option("votes", a->votes, "Vote JSON lines")->required();
        add_scaling_options(cmd, *a);
        cmd->final_callback([a, &g] { run_pwc(*a, g); });
    }
    {
        auto votes = std::make_shared<std::string>();
        auto* cmd = stats->add_subcommand("notsure", "Share of Not Sure answers per rate");
        cmd->add_option("votes", *votes, "Vote JSON lines")->required();
        cmd->final_callback([votes, &g] { run_notsure(*votes, g); });
    }
    {
        auto a = std::make_shared<DiagramArgs>();
        auto* cmd = stats->add_subcommand("diagram", "Strategy superiority diagram as JSON");
        cmd->add_option("--dsis", a->dsis, "DSIS score CSV");
        cmd->add_option("--pwc", a->pwc, "Vote JSON lines");
        cmd->add_flag("--config", a->config, "Add JPEG Pleno configuration relations");
        cmd->add_flag("--no-screen", a->no_screen, "Skip BT.500 screening of the DSIS scores");
        cmd->add_option("--alpha", a->alpha, "One-tailed Welch significance level")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--threshold", a->threshold, "JOD difference counted as superior")->check(CLI::PositiveNumber);
        add_scaling_options(cmd, a->scaling);
        cmd->final_callback([a, &g] { run_diagram(*a, g); });
    }
    {
        auto a = std::make_shared<std::vector<double>>();
        auto b = std::make_shared<std::vector<double>>();
        auto alpha = std::make_shared<double>(0.05);
        auto* cmd = stats->add_subcommand("welch", "One-tailed Welch test of two score samples");
        cmd->add_option("--a", *a, "First sample")->delimiter(',')->required();
        cmd->add_option("--b", *b, "Second sample")->delimiter(',')->required();
        cmd->add_option("--alpha", *alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
        cmd->final_callback([a, b, alpha, &g] { run_welch(*a, *b, *alpha, g); });
    }
}

}  // namespace pcqa::cli
