#include "leadsheet/metrics/report.h"

#include <cstdio>
#include <exception>

#include "leadsheet/error.h"
#include "leadsheet/metrics/basic.h"
#include "leadsheet/metrics/patterns.h"
#include "leadsheet/metrics/tension.h"

namespace leadsheet::metrics {
namespace {

constexpr const char* kFormat = "leadsheet-metrics";
constexpr int kVersion = 1;

struct RowSpec {
  const char* group;
  const char* name;
  bool per_bar;
  std::vector<double> PieceMetrics::*bars = nullptr;
  std::optional<double> PieceMetrics::*value = nullptr;
};

const std::vector<RowSpec>& row_specs() {
  static const std::vector<RowSpec> specs = {
      {"Used Pitch Classes", "Melody", true, &PieceMetrics::melody_pitch_classes},
      {"Used Pitch Classes", "Chords", true, &PieceMetrics::chord_pitch_classes},
      {"Rest Events (%)", "Melody", true, &PieceMetrics::melody_rest_ratio},
      {"Rest Events (%)", "Chords", true, &PieceMetrics::chord_rest_ratio},
      {"Tonal Distance", "Melody - Chords", false, nullptr, &PieceMetrics::tonal_distance},
      {"Pattern Metrics", "Compression Ratio", false, nullptr, &PieceMetrics::compression_ratio},
      {"Pattern Metrics", "Long Patterns (avg)", false, nullptr, &PieceMetrics::long_patterns},
      {"Pattern Metrics", "Short Patterns (avg)", false, nullptr, &PieceMetrics::short_patterns},
      {"Tension Metrics", "Cloud Movement", false, nullptr, &PieceMetrics::cloud_momentum},
      {"Tension Metrics", "Cloud Diameter", false, nullptr, &PieceMetrics::cloud_diameter},
      {"Tension Metrics", "Distance to the Key", false, nullptr, &PieceMetrics::key_distance},
  };
  return specs;
}

// Display width of UTF-8 text; every code point counts as one column.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

std::string pad(const std::string& s, std::size_t w) {
  return s + std::string(w > width(s) ? w - width(s) : 0, ' ');
}

std::string format_stats(const Stats& s) {
  if (s.count == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f \xC2\xB1 %.4f", s.mean, s.std);
  return buf;
}

}  // namespace

PieceMetrics piece_metrics(const score::LeadSheet& sheet) {
  PieceMetrics m;
  m.melody_pitch_classes = used_pitch_classes_per_bar(sheet, Track::kMelody);
  m.chord_pitch_classes = used_pitch_classes_per_bar(sheet, Track::kChords);
  m.melody_rest_ratio = rest_ratio_per_bar(sheet, Track::kMelody);
  m.chord_rest_ratio = rest_ratio_per_bar(sheet, Track::kChords);
  const auto td = tonal_distance(sheet);
  m.tonal_distance = td.value;
  m.skipped_bars = td.skipped_bars;

  const auto points = point_set_of(sheet);
  if (!points.empty()) {
    const auto c = cosiatec(points);
    m.compression_ratio = c.compression_ratio;
    m.long_patterns = c.longest_pattern;
    m.short_patterns = c.shortest_pattern;
  }

  const auto tension = tension_profile(sheet);
  if (tension.momentum.count > 0) m.cloud_momentum = tension.momentum.mean;
  if (tension.diameter.count > 0) {
    m.cloud_diameter = tension.diameter.mean;
    m.key_distance = tension.strain.mean;
  }
  return m;
}

std::vector<PieceMetrics> corpus_metrics_serial(const std::vector<score::LeadSheet>& corpus) {
  std::vector<PieceMetrics> out;
  out.reserve(corpus.size());
  for (const auto& sheet : corpus) out.push_back(piece_metrics(sheet));
  return out;
}

std::vector<PieceMetrics> corpus_metrics(const std::vector<score::LeadSheet>& corpus) {
  std::vector<PieceMetrics> out(corpus.size());
  std::exception_ptr failure;
  const long n = static_cast<long>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = piece_metrics(corpus[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

MetricReport aggregate(std::string label, const std::vector<PieceMetrics>& pieces) {
  if (pieces.empty()) throw InvalidArgument("cannot report on an empty corpus");
  MetricReport report;
  report.label = std::move(label);
  report.pieces = pieces.size();
  for (const auto& p : pieces) report.skipped_bars += p.skipped_bars;
  for (const auto& spec : row_specs()) {
    std::vector<double> values;
    for (const auto& p : pieces) {
      if (spec.per_bar) {
        const auto& bars = p.*spec.bars;
        values.insert(values.end(), bars.begin(), bars.end());
      } else if (const auto& v = p.*spec.value) {
        values.push_back(*v);
      }
    }
    report.rows.push_back({spec.group, spec.name, summarize(values)});
  }
  return report;
}

MetricReport evaluate_corpus(std::string label, const std::vector<score::LeadSheet>& corpus) {
  if (corpus.empty()) throw InvalidArgument("cannot report on an empty corpus");
  return aggregate(std::move(label), corpus_metrics(corpus));
}

std::vector<MetricReport> corpus_report(const std::vector<score::LeadSheet>& reference,
                                        const std::vector<score::LeadSheet>& generated,
                                        std::string_view reference_label,
                                        std::string_view generated_label) {
  return {evaluate_corpus(std::string(reference_label), reference),
          evaluate_corpus(std::string(generated_label), generated)};
}

std::string render_text(const std::vector<MetricReport>& reports) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"Metric"};
  for (const auto& r : reports) header.push_back(r.label);
  table.push_back(header);
  std::vector<std::string> pieces = {"Pieces"};
  for (const auto& r : reports) pieces.push_back(std::to_string(r.pieces));
  table.push_back(pieces);
  const std::size_t rows = reports.empty() ? 0 : reports.front().rows.size();
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& first = reports.front().rows[i];
    std::vector<std::string> line = {first.group + ": " + first.name};
    for (const auto& r : reports) {
      if (r.rows.size() != rows || r.rows[i].name != first.name || r.rows[i].group != first.group) {
        throw InvalidArgument("reports do not share a layout");
      }
      line.push_back(format_stats(r.rows[i].stats));
    }
    table.push_back(line);
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], width(line[c]));
  }
  std::string out;
  for (const auto& line : table) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += c + 1 == line.size() ? line[c] : pad(line[c], widths[c] + 3);
    }
    out += text + "\n";
  }
  return out;
}

nlohmann::json report_to_json(const std::vector<MetricReport>& reports) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"group", row.group},
                      {"name", row.name},
                      {"mean", row.stats.mean},
                      {"std", row.stats.std},
                      {"count", row.stats.count}});
    }
    list.push_back(
        {{"label", r.label}, {"pieces", r.pieces}, {"skipped_bars", r.skipped_bars}, {"rows", rows}});
  }
  return {{"format", kFormat}, {"version", kVersion}, {"reports", list}};
}

std::vector<MetricReport> report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != kFormat) throw DataError("not a metrics report");
    if (j.at("version") != kVersion) throw DataError("unsupported metrics report version");
    std::vector<MetricReport> out;
    for (const auto& r : j.at("reports")) {
      MetricReport report;
      report.label = r.at("label").get<std::string>();
      report.pieces = r.at("pieces").get<std::size_t>();
      report.skipped_bars = r.at("skipped_bars").get<int>();
      for (const auto& row : r.at("rows")) {
        report.rows.push_back({row.at("group").get<std::string>(), row.at("name").get<std::string>(),
                               {row.at("mean").get<double>(), row.at("std").get<double>(),
                                row.at("count").get<std::size_t>()}});
      }
      out.push_back(std::move(report));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad metrics report: ") + e.what());
  }
}

}  // namespace leadsheet::metrics
