#include "qshield/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qshield/checkpoint.hpp"
#include "qshield/errors.hpp"

namespace qshield::report {

using nlohmann::json;

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  fail(Errc::InvalidArgument, "unknown report format '" + std::string(text) + "'");
}

std::string to_csv(const RunReport& report) {
  std::string out = "epsilon,clean_acc,adv_acc,recon_acc\n";
  for (const auto& row : report.rows) {
    out += checkpoint::exact_double(row.epsilon) + "," + checkpoint::exact_double(row.clean_acc) +
           "," + checkpoint::exact_double(row.adv_acc) + "," +
           checkpoint::exact_double(row.recon_acc) + "\n";
  }
  return out;
}

namespace {

json metadata_json(const RunReport& report) {
  return json{{"metadata", report.metadata}, {"timestamps", report.timestamps}};
}

}  // namespace

std::string to_json(const RunReport& report) {
  json doc = metadata_json(report);
  doc["rows"] = json::array();
  for (const auto& row : report.rows) {
    doc["rows"].push_back({{"epsilon", row.epsilon},
                           {"clean_acc", row.clean_acc},
                           {"adv_acc", row.adv_acc},
                           {"recon_acc", row.recon_acc}});
  }
  return doc.dump(2) + "\n";
}

RunReport from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    RunReport report;
    report.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    report.timestamps = doc.at("timestamps").get<std::map<std::string, std::string>>();
    for (const auto& row : doc.at("rows")) {
      report.rows.push_back({row.at("epsilon").get<double>(), row.at("clean_acc").get<double>(),
                             row.at("adv_acc").get<double>(), row.at("recon_acc").get<double>()});
    }
    return report;
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, std::string("malformed report JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(Errc::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void emit_report(const RunReport& report, Format format, const std::filesystem::path& path) {
  if (format == Format::Json) {
    write_text(path, to_json(report));
    return;
  }
  write_text(path, to_csv(report));
  auto sidecar = path;
  sidecar += ".meta.json";
  write_text(sidecar, metadata_json(report).dump(2) + "\n");
}

namespace {

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const RunReport& report, std::string_view title) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 170, kTop = 50, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double eps_max = 0.0;
  for (const auto& row : report.rows) eps_max = std::max(eps_max, row.epsilon);
  if (eps_max <= 0.0) eps_max = 1.0;
  auto px = [&](double eps) { return kLeft + plot_w * eps / eps_max; };
  auto py = [&](double acc) { return kTop + plot_h * (1.0 - acc); };

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"25\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << xml_escape(title) << "</text>\n";

  // Axes, ticks and labels.
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\"/>\n</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double acc = i / 5.0;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(acc) + 4
        << "\" text-anchor=\"end\">" << acc << "</text>\n";
  }
  for (const auto& row : report.rows) {
    svg << "<text x=\"" << px(row.epsilon) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << row.epsilon << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">attack strength (epsilon)</text>\n";
  svg << "<text transform=\"translate(20," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">classification accuracy</text>\n";

  struct Series {
    const char* label;
    const char* color;
    double ReportRow::*field;
  };
  const Series series[] = {{"clean", "#1f77b4", &ReportRow::clean_acc},
                           {"adversarial", "#d62728", &ReportRow::adv_acc},
                           {"reconstructed", "#2ca02c", &ReportRow::recon_acc}};
  int slot = 0;
  for (const auto& s : series) {
    svg << "<g class=\"series\" data-series=\"" << s.label << "\">\n<polyline fill=\"none\" stroke=\""
        << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      svg << (i ? " " : "") << px(report.rows[i].epsilon) << "," << py(report.rows[i].*s.field);
    }
    svg << "\"/>\n";
    for (const auto& row : report.rows) {
      svg << "<circle class=\"point\" cx=\"" << px(row.epsilon) << "\" cy=\"" << py(row.*s.field)
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
    const double ly = kTop + 20 + 22 * slot++;
    svg << "<line x1=\"" << kLeft + plot_w + 20 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w + 45 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n<text x=\"" << kLeft + plot_w + 52 << "\" y=\"" << ly + 4
        << "\">" << s.label << "</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace qshield::report
