#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "leadsheet/metrics/stats.h"
#include "leadsheet/score/types.h"

namespace leadsheet::metrics {

// Everything measured on one piece. Per-bar metrics keep their bar values so
// that a corpus can pool them; the rest are one number per piece.
struct PieceMetrics {
  std::vector<double> melody_pitch_classes;
  std::vector<double> chord_pitch_classes;
  std::vector<double> melody_rest_ratio;
  std::vector<double> chord_rest_ratio;
  std::optional<double> tonal_distance;
  int skipped_bars = 0;
  // Pattern metrics are absent for a piece without a single note.
  std::optional<double> compression_ratio;
  std::optional<double> long_patterns;
  std::optional<double> short_patterns;
  // Tension metrics are absent when too few windows sound.
  std::optional<double> cloud_momentum;
  std::optional<double> cloud_diameter;
  std::optional<double> key_distance;
};

PieceMetrics piece_metrics(const score::LeadSheet& sheet);

// Metrics of every piece, in corpus order. The parallel version splits the
// corpus across OpenMP threads; the serial one is kept as its reference.
std::vector<PieceMetrics> corpus_metrics(const std::vector<score::LeadSheet>& corpus);
std::vector<PieceMetrics> corpus_metrics_serial(const std::vector<score::LeadSheet>& corpus);

struct MetricRow {
  std::string group;  // "Used Pitch Classes", "Pattern Metrics", ...
  std::string name;   // "Melody", "Compression Ratio", ...
  Stats stats;
  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct MetricReport {
  std::string label;
  std::size_t pieces = 0;
  int skipped_bars = 0;  // bars left out of the tonal distance
  std::vector<MetricRow> rows;
  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// Per-bar rows pool the bars of all pieces; the other rows take one value per
// piece. Throws InvalidArgument for an empty corpus.
MetricReport aggregate(std::string label, const std::vector<PieceMetrics>& pieces);

MetricReport evaluate_corpus(std::string label, const std::vector<score::LeadSheet>& corpus);

// Reports side by side. Each corpus is evaluated on its own.
std::vector<MetricReport> corpus_report(const std::vector<score::LeadSheet>& reference,
                                        const std::vector<score::LeadSheet>& generated,
                                        std::string_view reference_label = "Training Dataset",
                                        std::string_view generated_label = "Generated");

// Aligned plain-text table, one column per report. Byte-stable.
std::string render_text(const std::vector<MetricReport>& reports);

nlohmann::json report_to_json(const std::vector<MetricReport>& reports);
std::vector<MetricReport> report_from_json(const nlohmann::json& j);  // throws DataError

}  // namespace leadsheet::metrics
