#include "pcqa/stats/dsis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "pcqa/util/csv.hpp"
#include "pcqa/util/errors.hpp"
#include "pcqa/util/kv_config.hpp"

namespace pcqa {

StimulusMeta StimulusMeta::from_id(const std::string& id) {
    StimulusMeta m;
    m.id = id;
    if (auto parsed = StimulusId::parse(id)) {
        m.content = parsed->content;
        m.codec = parsed->codec;
        m.strategy = parsed->strategy;
        m.rate = parsed->rate;
        m.hidden_reference = parsed->is_reference();
    } else {
        m.content = id;
    }
    return m;
}

ScoreMatrix::ScoreMatrix(std::vector<std::string> subjects, std::vector<StimulusMeta> stimuli)
    : subjects_(std::move(subjects)), stimuli_(std::move(stimuli)), cells_(subjects_.size() * stimuli_.size()) {
    for (std::size_t j = 0; j < stimuli_.size(); ++j)
        if (!stimulus_lookup_.emplace(stimuli_[j].id, j).second)
            throw SchemaError("stimulus '" + stimuli_[j].id + "' listed twice");
}

ScoreMatrix ScoreMatrix::from_records(const std::vector<DsisRecord>& records) {
    std::vector<std::string> subjects;
    std::vector<StimulusMeta> stimuli;
    std::map<std::string, std::size_t> subj_idx, stim_idx;
    for (const auto& r : records) {
        if (subj_idx.emplace(r.subject, subjects.size()).second) subjects.push_back(r.subject);
        if (stim_idx.emplace(r.stimulus, stimuli.size()).second) stimuli.push_back(StimulusMeta::from_id(r.stimulus));
    }
    ScoreMatrix m(std::move(subjects), std::move(stimuli));
    for (const auto& r : records) {
        const std::size_t i = subj_idx.at(r.subject), j = stim_idx.at(r.stimulus);
        if (m.get(i, j))
            throw SchemaError("subject '" + r.subject + "' rated '" + r.stimulus + "' more than once");
        m.set(i, j, r.score);
    }
    return m;
}

void ScoreMatrix::set(std::size_t subject, std::size_t stimulus, int score) {
    if (score < 1 || score > 5) throw DomainError("DSIS score " + std::to_string(score) + " outside 1..5");
    cells_.at(subject * stimuli_.size() + stimulus) = score;
}

std::optional<int> ScoreMatrix::get(std::size_t subject, std::size_t stimulus) const {
    return cells_.at(subject * stimuli_.size() + stimulus);
}

std::optional<std::size_t> ScoreMatrix::stimulus_index(const std::string& id) const {
    const auto it = stimulus_lookup_.find(id);
    if (it == stimulus_lookup_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> ScoreMatrix::scores_for(std::size_t stimulus) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < subjects_.size(); ++i)
        if (auto s = get(i, stimulus)) out.push_back(*s);
    return out;
}

std::size_t ScoreMatrix::rating_count(std::size_t subject) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < stimuli_.size(); ++j) n += get(subject, j).has_value();
    return n;
}

ScoreMatrix ScoreMatrix::without_subjects(const std::vector<std::string>& drop) const {
    const std::set<std::string> gone(drop.begin(), drop.end());
    std::vector<std::string> keep;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < subjects_.size(); ++i)
        if (!gone.count(subjects_[i])) {
            keep.push_back(subjects_[i]);
            rows.push_back(i);
        }
    ScoreMatrix out(std::move(keep), stimuli_);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < stimuli_.size(); ++j)
            if (auto s = get(rows[r], j)) out.set(r, j, *s);
    return out;
}

std::vector<DsisRecord> ScoreMatrix::records() const {
    std::vector<DsisRecord> out;
    for (std::size_t i = 0; i < subjects_.size(); ++i)
        for (std::size_t j = 0; j < stimuli_.size(); ++j)
            if (auto s = get(i, j)) out.push_back({subjects_[i], stimuli_[j].id, *s});
    return out;
}

ScreeningResult screen_outliers(const ScoreMatrix& matrix) {
    const std::size_t n_subj = matrix.subjects().size();
    const std::size_t n_stim = matrix.stimuli().size();
    if (n_subj == 0 || n_stim == 0) throw DomainError("outlier screening needs a non-empty score matrix");
    if (n_subj < 3) throw DomainError("outlier screening needs at least 3 subjects");

    std::vector<SubjectScreening> details(n_subj);
    for (std::size_t i = 0; i < n_subj; ++i) {
        details[i].subject = matrix.subjects()[i];
        details[i].ratings = matrix.rating_count(i);
    }

    for (std::size_t j = 0; j < n_stim; ++j) {
        const auto scores = matrix.scores_for(j);
        const double n = static_cast<double>(scores.size());
        if (scores.size() < 2) continue;
        double mean = 0.0;
        for (int s : scores) mean += s;
        mean /= n;
        double m2 = 0.0, m4 = 0.0;
        for (int s : scores) {
            const double d = s - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        const double sd = std::sqrt(m2 / (n - 1.0));
        m2 /= n;
        m4 /= n;
        // A constant column has no spread; its kurtosis is undefined and no
        // score can fall strictly outside a zero-width band anyway.
        const double b2 = m2 > 0.0 ? m4 / (m2 * m2) : 3.0;
        const double width = (b2 >= 2.0 && b2 <= 4.0 ? 2.0 : std::sqrt(20.0)) * sd;
        for (std::size_t i = 0; i < n_subj; ++i) {
            const auto s = matrix.get(i, j);
            if (!s) continue;
            if (*s > mean + width) ++details[i].above;
            if (*s < mean - width) ++details[i].below;
        }
    }

    std::vector<std::string> rejected;
    for (auto& d : details) {
        const double pq = static_cast<double>(d.above + d.below);
        if (d.ratings == 0 || pq == 0.0) continue;
        const double ratio = pq / static_cast<double>(d.ratings);
        const double balance = std::fabs(static_cast<double>(d.above) - static_cast<double>(d.below)) / pq;
        if (ratio > 0.05 && balance < 0.3) {
            d.rejected = true;
            rejected.push_back(d.subject);
        }
    }
    return {matrix.without_subjects(rejected), rejected, details};
}

std::optional<double> t_interval_halfwidth(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    if (n < 2) return std::nullopt;
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
}

std::vector<MosEntry> mos_ci(const ScoreMatrix& matrix, bool include_hidden_references) {
    std::vector<MosEntry> out;
    for (std::size_t j = 0; j < matrix.stimuli().size(); ++j) {
        const auto& meta = matrix.stimuli()[j];
        if (meta.hidden_reference && !include_hidden_references) continue;
        const auto ints = matrix.scores_for(j);
        const std::vector<double> scores(ints.begin(), ints.end());
        MosEntry e;
        e.stimulus = meta;
        e.n = scores.size();
        if (!scores.empty()) {
            double sum = 0.0;
            for (double s : scores) sum += s;
            e.mos = sum / static_cast<double>(scores.size());
        } else {
            e.mos = std::nan("");
        }
        e.ci95 = t_interval_halfwidth(scores);
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<DsisRecord> read_dsis_csv(std::istream& in, const std::string& origin) {
    const CsvTable table = read_csv(in, origin);
    const auto subj = table.column("subject_id");
    const auto stim = table.column("stimulus_id");
    const auto score = table.column("score");
    if (!subj || !stim || !score) throw SchemaError(origin + ": expected columns subject_id,stimulus_id,score");
    std::vector<DsisRecord> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = origin + ":" + std::to_string(table.line_numbers[r]);
        const std::string text = trim(row[*score]);
        int value = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw ParseError(where + ": score '" + row[*score] + "' is not an integer");
        if (value < 1 || value > 5) throw DomainError(where + ": score " + std::to_string(value) + " outside 1..5");
        if (row[*subj].empty() || row[*stim].empty()) throw SchemaError(where + ": empty subject or stimulus id");
        out.push_back({row[*subj], row[*stim], value});
    }
    return out;
}

void write_dsis_csv(std::ostream& out, const std::vector<DsisRecord>& records) {
    out << "subject_id,stimulus_id,score\n";
    for (const auto& r : records) out << csv_join({r.subject, r.stimulus, std::to_string(r.score)}) << '\n';
}

void write_mos_csv(std::ostream& out, const std::vector<MosEntry>& entries) {
    out << "stimulus_id,content,codec,rate,strategy,n,mos,ci95\n";
    for (const auto& e : entries) {
        const auto& m = e.stimulus;
        const bool coded = m.codec.has_value();
        out << csv_join({m.id, m.content, coded ? to_string(*m.codec) : (m.hidden_reference ? "reference" : "na"),
                         coded ? to_string(m.rate) : "na", coded ? to_string(m.strategy) : "na",
                         std::to_string(e.n), format_real(e.mos, 6), e.ci95 ? format_real(*e.ci95, 6) : "na"})
            << '\n';
    }
}

}  // namespace pcqa
