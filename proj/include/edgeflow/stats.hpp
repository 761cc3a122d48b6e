#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "edgeflow/error.hpp"

namespace edgeflow {

/// Per-flowchart scores under two conditions; index i of a and b belongs to
/// the same flowchart.
struct PairedSample {
    std::vector<std::string> labels;
    std::vector<double> a;  // condition A (edge-map augmented)
    std::vector<double> b;  // condition B (baseline)

    std::size_t size() const { return a.size(); }
    void check_valid() const {
        if (a.empty() || a.size() != b.size() || a.size() != labels.size())
            throw ParamError("paired sample requires |a| = |b| = |labels| >= 1");
    }
};

enum class EffectMagnitude { Negligible, Small, Medium, Large };

inline std::string to_string(EffectMagnitude m) {
    switch (m) {
        case EffectMagnitude::Negligible: return "negligible";
        case EffectMagnitude::Small: return "small";
        case EffectMagnitude::Medium: return "medium";
        case EffectMagnitude::Large: return "large";
    }
    return "negligible";
}

inline char magnitude_superscript(EffectMagnitude m) {
    switch (m) {
        case EffectMagnitude::Negligible: return 'N';
        case EffectMagnitude::Small: return 'S';
        case EffectMagnitude::Medium: return 'M';
        case EffectMagnitude::Large: return 'L';
    }
    return 'N';
}

/// |delta| < 0.147 negligible, < 0.33 small, < 0.474 medium, >= 0.474 large.
inline EffectMagnitude classify_magnitude(double delta) {
    const double d = std::abs(delta);
    if (d < 0.147) return EffectMagnitude::Negligible;
    if (d < 0.33) return EffectMagnitude::Small;
    if (d < 0.474) return EffectMagnitude::Medium;
    return EffectMagnitude::Large;
}

namespace detail {

// Average ranks of |d|, ties sharing the mean of their positional ranks.
// Average ranks over integers are multiples of 0.5, so doubled ranks are
// exact integers.
inline std::vector<double> average_ranks(const std::vector<double>& abs_d) {
    const std::size_t n = abs_d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return abs_d[i] < abs_d[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Exact upper-tail P(W+ >= observed) by dynamic programming over achievable
// doubled-rank subset sums (equivalent to enumerating all 2^n sign vectors).
inline double exact_upper_tail(const std::vector<double>& ranks, double w_plus) {
    std::vector<long long> doubled(ranks.size());
    long long total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        doubled[i] = std::llround(2.0 * ranks[i]);
        total += doubled[i];
    }
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
    counts[0] = 1;
    long long reach = 0;
    for (long long r : doubled) {
        reach += r;
        for (long long s = reach; s >= r; --s) counts[s] += counts[s - r];
    }
    const long long observed = std::llround(2.0 * w_plus);
    std::uint64_t at_least = 0, all = 0;
    for (long long s = 0; s <= total; ++s) {
        all += counts[s];
        if (s >= observed) at_least += counts[s];
    }
    return static_cast<double>(at_least) / static_cast<double>(all);
}

inline double normal_upper_tail(const std::vector<double>& ranks, double w_plus) {
    const double n = static_cast<double>(ranks.size());
    const double mean = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // Tie correction: subtract sum(t^3 - t)/48 per tied group.
    std::vector<double> sorted(ranks);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if (var <= 0.0) return w_plus > mean ? 0.0 : 1.0;
    const double z = (w_plus - mean - 0.5) / std::sqrt(var);
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace detail

constexpr std::size_t kWilcoxonExactCutoff = 25;

struct WilcoxonResult {
    double p_value = 1.0;
    std::size_t effective_n = 0;
    double w_plus = 0.0;
    bool exact = true;
};

/// One-sided Wilcoxon signed-rank test of H1: a > b. Zero differences are
/// discarded; |differences| are ranked with average ranks for ties; p is the
/// upper-tail probability of W+ (exact by sign enumeration up to n = 25,
/// continuity-corrected normal approximation with tie-corrected variance
/// beyond).
inline WilcoxonResult wilcoxon_one_sided(const PairedSample& sample) {
    sample.check_valid();
    std::vector<double> diffs;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double d = sample.a[i] - sample.b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw ParamError("wilcoxon: no nonzero differences, test undefined");

    std::vector<double> abs_d(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::abs(diffs[i]);
    const std::vector<double> ranks = detail::average_ranks(abs_d);

    double w_plus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        if (diffs[i] > 0.0) w_plus += ranks[i];

    WilcoxonResult result;
    result.effective_n = diffs.size();
    result.w_plus = w_plus;
    result.exact = diffs.size() <= kWilcoxonExactCutoff;
    result.p_value = result.exact ? detail::exact_upper_tail(ranks, w_plus)
                                  : detail::normal_upper_tail(ranks, w_plus);
    return result;
}

/// Cliff's Delta over all N^2 cross pairs:
/// (#{a_i > b_j} - #{a_i < b_j}) / N^2. Computed by sorting b and counting
/// with binary search.
inline double cliffs_delta(const PairedSample& sample) {
    sample.check_valid();
    std::vector<double> sorted_b(sample.b);
    std::sort(sorted_b.begin(), sorted_b.end());
    long long greater = 0, less = 0;
    for (const double v : sample.a) {
        greater += std::lower_bound(sorted_b.begin(), sorted_b.end(), v) - sorted_b.begin();
        less += sorted_b.end() - std::upper_bound(sorted_b.begin(), sorted_b.end(), v);
    }
    const double n2 = static_cast<double>(sample.size()) * static_cast<double>(sample.size());
    return (static_cast<double>(greater) - static_cast<double>(less)) / n2;
}

/// Within-pair dominance variant: (#{a_i > b_i} - #{a_i < b_i}) / N. Offered
/// as an alternative convention; the all-pairs form above is the default.
inline double cliffs_delta_within_pair(const PairedSample& sample) {
    sample.check_valid();
    long long wins = 0, losses = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (sample.a[i] > sample.b[i]) ++wins;
        if (sample.a[i] < sample.b[i]) ++losses;
    }
    return (static_cast<double>(wins) - static_cast<double>(losses)) /
           static_cast<double>(sample.size());
}

struct WinTieLoss {
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t losses = 0;

    friend bool operator==(const WinTieLoss&, const WinTieLoss&) = default;
};

inline WinTieLoss win_tie_loss(const PairedSample& sample) {
    sample.check_valid();
    WinTieLoss wtl;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (sample.a[i] > sample.b[i])
            ++wtl.wins;
        else if (sample.a[i] == sample.b[i])
            ++wtl.ties;
        else
            ++wtl.losses;
    }
    return wtl;
}

/// Cliff's delta convention: the default counts dominance over all N^2 cross
/// pairs; the alternative counts within-pair signs only.
enum class DeltaConvention { AllPairs, WithinPair };

/// Paired-comparison significance results for one metric column.
struct StatsReport {
    double p_value = 1.0;
    std::size_t effective_n = 0;
    bool p_defined = false;  // false when every difference was zero
    double delta = 0.0;
    EffectMagnitude magnitude = EffectMagnitude::Negligible;
    WinTieLoss wtl;
    std::size_t n = 0;
};

inline StatsReport compare_paired(const PairedSample& sample,
                                  DeltaConvention convention = DeltaConvention::AllPairs) {
    sample.check_valid();
    StatsReport report;
    report.n = sample.size();
    report.delta = convention == DeltaConvention::AllPairs ? cliffs_delta(sample)
                                                           : cliffs_delta_within_pair(sample);
    report.magnitude = classify_magnitude(report.delta);
    report.wtl = win_tie_loss(sample);
    try {
        const WilcoxonResult w = wilcoxon_one_sided(sample);
        report.p_value = w.p_value;
        report.effective_n = w.effective_n;
        report.p_defined = true;
    } catch (const ParamError&) {
        report.p_defined = false;
        report.effective_n = 0;
    }
    return report;
}

inline nlohmann::json stats_report_json(const StatsReport& r) {
    nlohmann::json j{{"n", r.n},
                     {"effective_n", r.effective_n},
                     {"delta", r.delta},
                     {"magnitude", to_string(r.magnitude)},
                     {"wins", r.wtl.wins},
                     {"ties", r.wtl.ties},
                     {"losses", r.wtl.losses}};
    if (r.p_defined)
        j["p_value"] = r.p_value;
    else
        j["p_value"] = nullptr;
    return j;
}

namespace detail {

inline std::string format_p(const StatsReport& r) {
    if (!r.p_defined) return "n/a (no nonzero diffs)";
    if (r.p_value < 0.001) return "<0.001";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.p_value);
    return buf;
}

inline std::string format_delta(const StatsReport& r) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f^%c (%zu/%zu/%zu)", r.delta,
                  magnitude_superscript(r.magnitude), r.wtl.wins, r.wtl.ties, r.wtl.losses);
    return buf;
}

}  // namespace detail

/// Formatted comparison table: one block per level, columns P / R / F1, rows
/// for the p-value and Cliff's delta with magnitude superscript and W/T/L.
inline std::string render_stats_table(
    const std::vector<std::pair<std::string, std::array<StatsReport, 3>>>& blocks) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-10s %-8s %-26s %-26s %-26s\n", "Level", "Row",
                  "Precision", "Recall", "F1");
    out += line;
    out += std::string(98, '-') + "\n";
    for (const auto& [level, cols] : blocks) {
        std::snprintf(line, sizeof(line), "%-10s %-8s %-26s %-26s %-26s\n", level.c_str(),
                      "p-value", detail::format_p(cols[0]).c_str(),
                      detail::format_p(cols[1]).c_str(), detail::format_p(cols[2]).c_str());
        out += line;
        std::snprintf(line, sizeof(line), "%-10s %-8s %-26s %-26s %-26s\n", "", "delta",
                      detail::format_delta(cols[0]).c_str(), detail::format_delta(cols[1]).c_str(),
                      detail::format_delta(cols[2]).c_str());
        out += line;
    }
    out += "Effect sizes: L large (|d| >= 0.474), M medium (>= 0.33), S small (>= 0.147), "
           "N negligible.\n";
    return out;
}

}  // namespace edgeflow
