#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "pcqa/stats/pwc.hpp"
#include "pcqa/util/errors.hpp"
#include "pcqa/util/parallel.hpp"

namespace pcqa {

double jod_sigma() {
    static const double s = boost::math::quantile(boost::math::normal(), 0.75);
    return s;
}

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kDivergence = 1e3;

// log Phi(z), accurate in the far left tail.
double log_phi_cdf(double z) {
    if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
    const double z2 = z * z;
    return -0.5 * z2 - std::log(-z) - kLogSqrt2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// phi(z) / Phi(z)
double mills_inverse(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi - log_phi_cdf(z)); }

struct Problem {
    std::size_t n;
    std::vector<std::vector<double>> c;
    std::vector<bool> free;
    double sigma;

    double loglik(const std::vector<double>& s) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (c[i][j] > 0.0) sum += c[i][j] * log_phi_cdf(sigma * (s[i] - s[j]));
        return sum;
    }

    std::vector<double> gradient(const std::vector<double>& s) const {
        std::vector<double> g(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (!(c[i][j] > 0.0)) continue;
                const double d = c[i][j] * sigma * mills_inverse(sigma * (s[i] - s[j]));
                g[i] += d;
                g[j] -= d;
            }
        for (std::size_t k = 0; k < n; ++k)
            if (!free[k]) g[k] = 0.0;
        return g;
    }
};

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// Connected components of the comparison graph; label = smallest member.
std::vector<std::size_t> components(const PairwiseTally& t) {
    const std::size_t n = t.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (t.compared(i, j) && t.count(i, j) + t.count(j, i) > 0.0) {
                const std::size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = find(i);
    return label;
}

// Members of `start`'s component not reachable along positive-weight edges
// (forward: i beat j). Empty in both directions iff the component's finite
// maximum-likelihood scale exists.
std::vector<std::size_t> unreached(const PairwiseTally& t, const std::vector<std::size_t>& label, std::size_t start,
                                   bool forward) {
    const std::size_t n = t.size();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < n; ++j) {
            const double w = forward ? t.count(i, j) : t.count(j, i);
            if (!seen[j] && w > 0.0) {
                seen[j] = true;
                stack.push_back(j);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] == label[start] && !seen[i]) out.push_back(i);
    return out;
}

}  // namespace

JodScale thurstone_jod(const PairwiseTally& tally, const std::string& anchor, const ThurstoneOptions& options) {
    const auto anchor_idx = tally.index_of(anchor);
    if (!anchor_idx) throw SchemaError("anchor '" + anchor + "' is not in group " + tally.group().str());
    const std::size_t n = tally.size();

    JodScale out;
    out.group = tally.group();
    out.stimuli = tally.stimuli();
    out.anchor = anchor;

    Problem p{n, tally.counts(), std::vector<bool>(n, true), jod_sigma()};
    const auto label = components(tally);
    std::map<std::size_t, std::size_t> pin;  // component -> pinned stimulus
    pin[label[*anchor_idx]] = *anchor_idx;
    for (std::size_t i = 0; i < n; ++i) pin.emplace(label[i], i);
    for (const auto& [comp, idx] : pin) p.free[idx] = false;
    if (pin.size() > 1) {
        std::string msg = "group " + tally.group().str() + " splits into " + std::to_string(pin.size()) +
                          " unconnected parts; scaled separately, pinned at";
        for (const auto& [comp, idx] : pin) msg += " " + tally.stimuli()[idx];
        out.warnings.push_back(msg);
    }

    for (const auto& [comp, idx] : pin)
        for (const bool forward : {true, false})
            if (const auto miss = unreached(tally, label, idx, forward); !miss.empty())
                throw NumericalGuardError("scale diverges in group " + tally.group().str() + ": '" +
                                          tally.stimuli()[miss.front()] + "' " + (forward ? "never lost" : "never won") +
                                          " against '" + tally.stimuli()[idx] +
                                          "' or its chain of comparisons; a positive prior keeps the scale finite");

    std::vector<double> s(n, 0.0);
    double f = p.loglik(s);
    if (!std::isfinite(f)) throw NumericalGuardError("log-likelihood is not finite at the origin");
    double step = 1.0;
    out.converged = false;
    std::vector<double> prev_s, prev_g;
    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const auto g = p.gradient(s);
        double gmax = 0.0, gnorm2 = 0.0;
        for (double v : g) {
            gmax = std::max(gmax, std::fabs(v));
            gnorm2 += v * v;
        }
        if (!std::isfinite(gmax)) throw NumericalGuardError("gradient is not finite in group " + tally.group().str());
        if (gmax < options.gradient_tolerance) {
            out.converged = true;
            break;
        }
        // Armijo backtracking. The trial step is the Barzilai-Borwein length
        // from the last two iterates, or twice the last step before that.
        step = std::min(step * 2.0, 1e6);
        if (!prev_s.empty()) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double ds = s[k] - prev_s[k], dy = g[k] - prev_g[k];
                ss += ds * ds;
                sy += ds * dy;
            }
            if (sy < 0.0 && ss > 0.0) step = std::min(ss / -sy, 1e6);
        }
        prev_s = s;
        prev_g = g;
        std::vector<double> trial(n);
        double ft = 0.0;
        bool accepted = false;
        while (step > 1e-300) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = s[k] + step * g[k];
            ft = p.loglik(trial);
            if (std::isfinite(ft) && ft >= f + 1e-4 * step * gnorm2) {
                accepted = true;
                break;
            }
            // Near the optimum the likelihood change drops below rounding;
            // accept a step that keeps f and shrinks the gradient instead.
            if (std::isfinite(ft) && ft >= f - 1e-13 * std::fabs(f) && max_abs(p.gradient(trial)) < gmax) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no ascent possible at machine precision
        s.swap(trial);
        f = ft;
        for (double v : s)
            if (!std::isfinite(v) || std::fabs(v) > kDivergence)
                throw NumericalGuardError("scale diverges in group " + tally.group().str() +
                                          " (a stimulus always wins; use a positive prior)");
    }
    out.iterations = iter;
    if (!out.converged)
        out.warnings.push_back("scaling of group " + tally.group().str() + " stopped after " + std::to_string(iter) +
                               " iterations without reaching the gradient tolerance");
    out.jod = s;
    return out;
}

JodScale bootstrap_jod(const PairwiseTally& tally, const std::string& anchor, const BootstrapOptions& options) {
    JodScale point = thurstone_jod(tally, anchor, options.mle);
    const auto subjects = tally.subjects();
    if (subjects.size() < 2 || options.iterations == 0) {
        if (options.iterations > 0)
            point.warnings.push_back("group " + tally.group().str() + " has fewer than 2 subjects; no intervals");
        return point;
    }

    std::map<std::string, std::vector<const PwcVote*>> by_subject;
    for (const auto& v : tally.votes()) by_subject[v.session].push_back(&v);
    std::vector<const std::vector<const PwcVote*>*> pools;
    for (const auto& s : subjects) pools.push_back(&by_subject.at(s));

    const std::size_t B = options.iterations;
    std::vector<std::optional<std::vector<double>>> samples(B);
    parallel_for(B, options.jobs, [&](std::size_t k) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(std::uint64_t(k) >> 32)};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::size_t> pick(0, pools.size() - 1);
        std::vector<const PwcVote*> draw;
        for (std::size_t i = 0; i < pools.size(); ++i) {
            const auto& pool = *pools[pick(rng)];
            draw.insert(draw.end(), pool.begin(), pool.end());
        }
        try {
            samples[k] = thurstone_jod(tally.rebuilt(draw), anchor, options.mle).jod;
        } catch (const NumericalGuardError&) {
            // counted below
        }
    });

    std::vector<std::vector<double>> per_stimulus(tally.size());
    for (const auto& sample : samples) {
        if (!sample) {
            ++point.bootstrap_failures;
            continue;
        }
        for (std::size_t i = 0; i < tally.size(); ++i) per_stimulus[i].push_back((*sample)[i]);
    }
    if (point.bootstrap_failures > 0)
        point.warnings.push_back(std::to_string(point.bootstrap_failures) + " of " + std::to_string(B) +
                                 " bootstrap resamples of group " + tally.group().str() +
                                 " failed to scale and were left out");
    if (point.bootstrap_failures == B) return point;

    std::vector<std::pair<double, double>> ci(tally.size());
    for (std::size_t i = 0; i < tally.size(); ++i) {
        auto& v = per_stimulus[i];
        std::sort(v.begin(), v.end());
        ci[i] = {quantile_sorted(v, 0.025), quantile_sorted(v, 0.975)};
    }
    point.ci = std::move(ci);
    return point;
}

}  // namespace pcqa
