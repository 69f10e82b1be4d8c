#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pcqa/codec/types.hpp"

namespace pcqa {

struct StimulusMeta {
    std::string id;
    std::string content;
    std::optional<CodecId> codec;
    Strategy strategy = Strategy::P1;
    RatePoint rate = RatePoint::R1;
    bool hidden_reference = false;

    /// Metadata from the stimulus naming convention. Names that do not follow
    /// it keep only the id (content = id, no codec).
    static StimulusMeta from_id(const std::string& id);
};

/// One raw DSIS rating.
struct DsisRecord {
    std::string subject;
    std::string stimulus;
    int score = 0;
};

/// Subjects x stimuli grid of scores in {1..5}; entries may be missing.
class ScoreMatrix {
public:
    ScoreMatrix(std::vector<std::string> subjects, std::vector<StimulusMeta> stimuli);

    /// Subjects and stimuli are ordered by first appearance. Throws
    /// DomainError for scores outside 1..5 and SchemaError when a subject
    /// rates the same stimulus twice.
    static ScoreMatrix from_records(const std::vector<DsisRecord>& records);

    void set(std::size_t subject, std::size_t stimulus, int score);
    std::optional<int> get(std::size_t subject, std::size_t stimulus) const;

    const std::vector<std::string>& subjects() const noexcept { return subjects_; }
    const std::vector<StimulusMeta>& stimuli() const noexcept { return stimuli_; }
    std::optional<std::size_t> stimulus_index(const std::string& id) const;

    /// Present scores of one stimulus, in subject order.
    std::vector<int> scores_for(std::size_t stimulus) const;
    std::size_t rating_count(std::size_t subject) const;

    ScoreMatrix without_subjects(const std::vector<std::string>& drop) const;
    std::vector<DsisRecord> records() const;

private:
    std::vector<std::string> subjects_;
    std::vector<StimulusMeta> stimuli_;
    std::vector<std::optional<int>> cells_;  // row-major, subject-major
    std::map<std::string, std::size_t> stimulus_lookup_;
};

struct SubjectScreening {
    std::string subject;
    std::size_t ratings = 0;
    std::size_t above = 0;  // P
    std::size_t below = 0;  // Q
    bool rejected = false;
};

struct ScreeningResult {
    ScoreMatrix cleaned;
    std::vector<std::string> rejected;
    std::vector<SubjectScreening> details;
};

/// BT.500 observer screening. Per stimulus: mean, sample deviation and
/// kurtosis b2 = m4 / m2^2; the acceptance band is mean +- 2 sd when
/// 2 <= b2 <= 4 and mean +- sqrt(20) sd otherwise. A subject is rejected
/// when (P + Q) / N > 0.05 and |P - Q| / (P + Q) < 0.3, counting scores
/// strictly outside the band. Hidden references take part.
/// Throws DomainError for an empty matrix or fewer than 3 subjects.
ScreeningResult screen_outliers(const ScoreMatrix& matrix);

struct MosEntry {
    StimulusMeta stimulus;
    std::size_t n = 0;
    double mos = 0.0;
    /// Half-width t(0.975, n-1) s / sqrt(n). Empty with fewer than 2 scores.
    std::optional<double> ci95;
};

/// Per-stimulus MOS with Student-t intervals. Hidden references are left
/// out unless asked for.
std::vector<MosEntry> mos_ci(const ScoreMatrix& matrix, bool include_hidden_references = false);

/// Half-width of the 95% Student-t interval for `scores`; empty below 2.
std::optional<double> t_interval_halfwidth(const std::vector<double>& scores);

/// `subject_id,stimulus_id,score`
std::vector<DsisRecord> read_dsis_csv(std::istream& in, const std::string& origin);
void write_dsis_csv(std::ostream& out, const std::vector<DsisRecord>& records);

/// `stimulus_id,content,codec,rate,strategy,n,mos,ci95`
void write_mos_csv(std::ostream& out, const std::vector<MosEntry>& entries);

}  // namespace pcqa
