#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pcqa/codec/types.hpp"

namespace pcqa {

enum class PwcChoice { Left, Right, NotSure };

std::string to_string(PwcChoice c);
PwcChoice parse_choice(const std::string& text);

/// Comparisons only happen inside one (codec, rate, content) group.
struct GroupKey {
    std::string codec;
    std::string rate;
    std::string content;

    std::string str() const { return content + "/" + codec + "/" + rate; }
    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct PwcVote {
    std::string session;  // one session per subject
    GroupKey group;
    std::string left;
    std::string right;
    PwcChoice choice = PwcChoice::NotSure;
    double elapsed_ms = 0.0;

    /// Preferred stimulus, empty for Not Sure.
    std::optional<std::string> winner() const;
};

/// One JSON object per line:
/// {"session","group":{"codec","rate","content"},"left","right","choice","elapsed_ms"}.
/// Blank lines are skipped. Exact repeats of a (session, pair) vote are
/// kept once; a repeat with a different outcome raises IntegrityError.
std::vector<PwcVote> read_pwc_jsonl(std::istream& in, const std::string& origin);
void write_pwc_jsonl(std::ostream& out, const std::vector<PwcVote>& votes);
std::string to_json_line(const PwcVote& vote);
PwcVote parse_vote_json(const std::string& line, const std::string& where);

inline constexpr double kDefaultTallyPrior = 0.1;

/// Accumulated preference weights of one comparison group.
class PairwiseTally {
public:
    /// Builds the tally of `group` from `votes`. Every ordered pair in
    /// `design` (all pairs among the voted stimuli when empty) starts at
    /// `prior`; a win adds 1 to c[winner][loser] and Not Sure adds 0.5 both
    /// ways. Throws SchemaError for a vote from another group, a vote
    /// comparing a stimulus with itself, or a pair outside the design.
    static PairwiseTally build(const GroupKey& group, const std::vector<PwcVote>& votes,
                               double prior = kDefaultTallyPrior,
                               const std::vector<std::pair<std::string, std::string>>& design = {});

    /// Tally from a raw count matrix; no initialization. A pair counts as
    /// compared when either direction has positive weight.
    static PairwiseTally from_counts(GroupKey group, std::vector<std::string> stimuli,
                                     std::vector<std::vector<double>> counts);

    const GroupKey& group() const noexcept { return group_; }
    const std::vector<std::string>& stimuli() const noexcept { return stimuli_; }
    std::size_t size() const noexcept { return stimuli_.size(); }
    std::optional<std::size_t> index_of(const std::string& stimulus) const;

    double count(std::size_t i, std::size_t j) const { return counts_.at(i).at(j); }
    const std::vector<std::vector<double>>& counts() const noexcept { return counts_; }
    bool compared(std::size_t i, std::size_t j) const { return compared_.at(i).at(j); }
    /// Not Sure votes per unordered pair (symmetric).
    double not_sure(std::size_t i, std::size_t j) const { return not_sure_.at(i).at(j); }
    double prior() const noexcept { return prior_; }
    double total_weight() const;

    const std::vector<PwcVote>& votes() const noexcept { return votes_; }
    /// Distinct sessions in vote order.
    std::vector<std::string> subjects() const;
    /// The compared ordered pairs, as indices.
    std::vector<std::pair<std::size_t, std::size_t>> design() const;

    /// Same stimuli and design, counts rebuilt from another vote set.
    PairwiseTally rebuilt(const std::vector<const PwcVote*>& votes) const;

private:
    GroupKey group_;
    std::vector<std::string> stimuli_;
    std::vector<std::vector<double>> counts_;
    std::vector<std::vector<double>> not_sure_;
    std::vector<std::vector<bool>> compared_;
    std::vector<PwcVote> votes_;
    double prior_ = 0.0;

    void add_vote(const PwcVote& v);
};

/// Groups votes and builds one tally per group.
std::map<GroupKey, PairwiseTally> build_tallies(const std::vector<PwcVote>& votes,
                                                double prior = kDefaultTallyPrior);

struct JodScale {
    GroupKey group;
    std::vector<std::string> stimuli;
    std::vector<double> jod;
    std::string anchor;
    /// 95% percentile bootstrap bounds, when computed.
    std::optional<std::vector<std::pair<double, double>>> ci;
    std::size_t iterations = 0;
    bool converged = true;
    std::size_t bootstrap_failures = 0;
    std::vector<std::string> warnings;

    double at(const std::string& stimulus) const;
};

/// z-score of a 75% preference: 1 JOD corresponds to P(i over j) = 0.75.
double jod_sigma();

struct ThurstoneOptions {
    double gradient_tolerance = 1e-8;
    std::size_t max_iterations = 10000;
};

/// Thurstone Case V scale by maximum likelihood of
/// sum c[i][j] log Phi(sigma (s_i - s_j)), in JOD units, with `anchor` at 0.
/// Gradient ascent with backtracking line search. Each connected component
/// of the comparison graph is scaled separately (with a warning); components
/// without the anchor are pinned at their first stimulus. Throws
/// NumericalGuardError when the likelihood stops being finite or the
/// scale diverges (a stimulus that always wins with no prior).
JodScale thurstone_jod(const PairwiseTally& tally, const std::string& anchor, const ThurstoneOptions& options = {});

struct BootstrapOptions {
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    ThurstoneOptions mle;
};

/// Point estimate plus percentile intervals from resampling subjects with
/// replacement. Iteration k draws from its own generator seeded with
/// (seed, k), so the result does not depend on `jobs`. With fewer than two
/// subjects the intervals stay empty.
JodScale bootstrap_jod(const PairwiseTally& tally, const std::string& anchor, const BootstrapOptions& options = {});

/// Strategy whose stimulus is pinned at 0: P2 for JPEG Pleno, P1 otherwise.
Strategy anchor_strategy(CodecId codec);
/// Stimulus of the group matching anchor_strategy; nullopt when the names do
/// not follow the naming convention.
std::optional<std::string> default_anchor(const PairwiseTally& tally);

struct NotSureShare {
    std::string rate;
    std::size_t votes = 0;
    std::size_t not_sure = 0;
    double proportion() const { return votes ? static_cast<double>(not_sure) / static_cast<double>(votes) : 0.0; }
};

/// Share of Not Sure answers per rate, ordered by rate label.
std::vector<NotSureShare> not_sure_profile(const std::vector<PwcVote>& votes);

/// `codec,rate,content,stimulus_id,jod,ci_low,ci_high,anchor`
void write_jod_csv(std::ostream& out, const std::vector<JodScale>& scales);

/// Type-7 (linear interpolation) sample quantile; `sorted` must be sorted.
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace pcqa
