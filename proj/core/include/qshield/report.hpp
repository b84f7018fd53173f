#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qshield::report {

struct ReportRow {
  double epsilon = 0.0;
  double clean_acc = 0.0;
  double adv_acc = 0.0;
  double recon_acc = 0.0;

  bool operator==(const ReportRow&) const = default;
};

struct RunReport {
  std::vector<ReportRow> rows;
  // Deterministic provenance: dataset, attack, box mode, model tags, seeds...
  std::map<std::string, std::string> metadata;
  // Wall-clock stamps, kept apart so reproducibility checks can ignore them.
  std::map<std::string, std::string> timestamps;

  bool operator==(const RunReport&) const = default;
};

enum class Format { Csv, Json };

Format parse_format(std::string_view text);

// Header "epsilon,clean_acc,adv_acc,recon_acc", one line per row.
std::string to_csv(const RunReport& report);
std::string to_json(const RunReport& report);
RunReport from_json(std::string_view text);

// Csv also writes "<path>.meta.json" holding metadata and timestamps.
void emit_report(const RunReport& report, Format format, const std::filesystem::path& path);

// Accuracy-vs-epsilon chart: one polyline per series (clean, adversarial,
// reconstructed) with a marker per point.
std::string render_svg(const RunReport& report, std::string_view title);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace qshield::report
