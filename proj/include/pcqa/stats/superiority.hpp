#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcqa/codec/ctc_tables.hpp"
#include "pcqa/codec/types.hpp"
#include "pcqa/stats/dsis.hpp"
#include "pcqa/stats/pwc.hpp"

namespace pcqa {

enum class Direction { FirstSuperior, SecondSuperior, NoEvidence };

std::string_view to_string(Direction d) noexcept;

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p_greater = 0.5;  // H1: mean(a) > mean(b)
    double p_less = 0.5;     // H1: mean(a) < mean(b)
    Direction verdict = Direction::NoEvidence;
};

/// One-tailed Welch t-test in both directions with Welch-Satterthwaite
/// degrees of freedom. A direction is reported when its p-value is below
/// `alpha`. Two zero-variance samples with equal means give t = 0, p = 0.5;
/// with different means the larger one wins with p = 0.
/// Throws DomainError when a sample has fewer than 2 scores.
WelchResult welch_superior(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05);

inline constexpr double kJodThreshold = 1.0;

/// Direction iff |jod_a - jod_b| >= threshold.
Direction jod_superior(double jod_a, double jod_b, double threshold = kJodThreshold);
/// Same, looking both stimuli up in one scale. Throws SchemaError when they
/// are not from the same group (a stimulus missing from `scale`).
Direction jod_superior(const JodScale& scale, const std::string& a, const std::string& b,
                       double threshold = kJodThreshold);

enum class EvidenceSource { DSIS, PWC, ConfigRelation };

std::string_view to_string(EvidenceSource s) noexcept;

/// Diagram cell: one (content, codec, rate) combination.
struct CellKey {
    std::string content;
    std::string codec;
    std::string rate;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct SuperiorityVerdict {
    CellKey cell;
    Strategy a = Strategy::P1;
    Strategy b = Strategy::P2;
    EvidenceSource source = EvidenceSource::DSIS;
    Direction direction = Direction::NoEvidence;  // relative to (a, b)
    std::optional<double> p_value;                 // DSIS
    std::optional<double> jod_delta;               // PWC, jod(a) - jod(b)
    std::optional<ConfigRelation> relation;        // ConfigRelation
};

struct Arrow {
    Strategy winner = Strategy::P1;
    std::vector<EvidenceSource> sources;
};

struct DiagramEdge {
    Strategy a = Strategy::P1;  // a < b
    Strategy b = Strategy::P2;
    std::vector<Arrow> arrows;
    std::optional<ConfigRelation> relation;  // of a relative to b
    bool dotted() const { return arrows.empty(); }
    /// True when a DSIS or PWC arrow exists.
    bool subjective() const;
};

struct DiagramCell {
    CellKey cell;
    std::vector<DiagramEdge> edges;  // P1-P2, P1-P3, P2-P3
    /// No DSIS or PWC arrow on any edge.
    bool insignificant() const;
};

/// Union of the verdicts per cell and strategy pair, with source labels.
/// Every cell gets all three edges; edges without a direction are dotted.
/// Throws IntegrityError when one source gives opposite directions for the
/// same pair, SchemaError for a verdict comparing a strategy with itself.
std::vector<DiagramCell> assemble_diagram(const std::vector<SuperiorityVerdict>& verdicts);

std::size_t count_insignificant_cells(const std::vector<DiagramCell>& cells);

/// Welch verdicts for every strategy pair sharing (content, codec, rate) in
/// `matrix`. Pairs where either side has fewer than 2 scores are skipped.
std::vector<SuperiorityVerdict> dsis_verdicts(const ScoreMatrix& matrix, double alpha = 0.05);

/// JOD threshold verdicts for every strategy pair inside each scale.
std::vector<SuperiorityVerdict> pwc_verdicts(const std::vector<JodScale>& scales, double threshold = kJodThreshold);

/// Configuration-table relations for the JPEG Pleno cells among `cells`.
/// Strictly better/worse becomes a direction; trade-off and equal are
/// dotted. Contents without a table entry are skipped.
std::vector<SuperiorityVerdict> config_verdicts(const std::vector<CellKey>& cells);

/// Diagram rows as a JSON array.
std::string diagram_json(const std::vector<DiagramCell>& cells, int indent = 2);

}  // namespace pcqa
