#pragma once

// Synthetic subjective data and slow reference computations for the
// statistics tests.

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pcqa/stats/dsis.hpp"
#include "pcqa/stats/pwc.hpp"

namespace fixture {

/// 15 consistent subjects scoring consensus 2/4 stimuli with a 1:3:1 spread
/// of -1/0/+1, plus subject "inverted" scoring 6 - consensus everywhere.
inline pcqa::ScoreMatrix inverted_scorer_matrix(std::size_t honest = 15, std::size_t stimuli = 24) {
    static constexpr int kOffset[] = {-1, 0, 0, 0, 1};
    std::vector<pcqa::DsisRecord> recs;
    for (std::size_t j = 0; j < stimuli; ++j) {
        const int consensus = j % 2 == 0 ? 2 : 4;
        const std::string stim = "S" + std::to_string(j);
        for (std::size_t i = 0; i < honest; ++i)
            recs.push_back({"h" + std::to_string(i), stim, consensus + kOffset[(i + j) % 5]});
        recs.push_back({"inverted", stim, 6 - consensus});
    }
    return pcqa::ScoreMatrix::from_records(recs);
}

inline pcqa::GroupKey test_group() { return {"gpcc", "R1", "Soldier"}; }

/// Votes on every pair of `names` from `subjects` sessions, where stimulus
/// i beats j with probability Phi(sigma (s_i - s_j)).
inline std::vector<pcqa::PwcVote> simulated_votes(const std::vector<std::string>& names, const std::vector<double>& jod,
                                                  std::size_t subjects, std::size_t repeats, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double sigma = 0.6744897501960817;
    std::vector<pcqa::PwcVote> out;
    for (std::size_t s = 0; s < subjects; ++s)
        for (std::size_t r = 0; r < repeats; ++r)
            for (std::size_t i = 0; i < names.size(); ++i)
                for (std::size_t j = i + 1; j < names.size(); ++j) {
                    const double p = 0.5 * std::erfc(-sigma * (jod[i] - jod[j]) / std::sqrt(2.0));
                    pcqa::PwcVote v{"subj" + std::to_string(s), test_group(), names[i], names[j],
                                    u(rng) < p ? pcqa::PwcChoice::Left : pcqa::PwcChoice::Right, 3000.0};
                    out.push_back(v);
                }
    return out;
}

}  // namespace fixture

namespace oracle {

inline double thurstone_loglik(const std::vector<std::vector<double>>& c, const std::vector<double>& s) {
    const double sigma = 0.6744897501960817;
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
            if (c[i][j] > 0) sum += c[i][j] * std::log(0.5 * std::erfc(-sigma * (s[i] - s[j]) / std::sqrt(2.0)));
    return sum;
}

/// Maximizer over (s1, s2) with s0 = 0 by nested grid refinement.
inline std::array<double, 3> grid_thurstone3(const std::vector<std::vector<double>>& c) {
    double c1 = 0.0, c2 = 0.0, half = 6.0;
    for (int level = 0; level < 5; ++level) {
        const double step = half / 20.0;
        double best = -INFINITY, b1 = c1, b2 = c2;
        for (int a = -20; a <= 20; ++a)
            for (int b = -20; b <= 20; ++b) {
                const double s1 = c1 + a * step, s2 = c2 + b * step;
                const double f = thurstone_loglik(c, {0.0, s1, s2});
                if (f > best) {
                    best = f;
                    b1 = s1;
                    b2 = s2;
                }
            }
        c1 = b1;
        c2 = b2;
        half = 2.0 * step;
    }
    return {0.0, c1, c2};
}

}  // namespace oracle
