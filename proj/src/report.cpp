#include "silicon/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace silicon {

namespace {

constexpr const char* kPalette[9] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
};

std::string fmt(double value, const char* spec = "%.2f") {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct BarRow {
  std::string label;
  std::vector<double> probabilities;
  std::string annotation;
};

}  // namespace

std::string render_question_chart(const std::string& topic,
                                  const std::vector<std::string>& option_labels,
                                  const std::vector<EvalCell>& cells) {
  std::vector<BarRow> rows;
  for (const auto& cell : cells) {
    if (rows.empty()) {
      rows.push_back({"Human", cell.human_probabilities, ""});
    }
    BarRow row;
    row.label = std::string(condition_name(cell.condition));
    row.probabilities = cell.silicon_probabilities;
    row.annotation = "JSD " + fmt(cell.estimate.point, "%.4f");
    rows.push_back(std::move(row));
  }

  const double label_width = 140.0;
  const double bar_width = 620.0;
  const double bar_height = 26.0;
  const double row_gap = 10.0;
  const double top = 48.0;
  const double legend_row_height = 20.0;
  const std::size_t legend_rows = option_labels.size();
  const double height = top + rows.size() * (bar_height + row_gap) + 16.0 +
                        legend_rows * legend_row_height + 12.0;
  const double width = label_width + bar_width + 140.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, "%.0f")
      << "\" height=\"" << fmt(height, "%.0f") << "\" viewBox=\"0 0 "
      << fmt(width, "%.0f") << ' ' << fmt(height, "%.0f") << "\">\n";
  svg << "<style>text{font-family:sans-serif;}</style>\n";
  svg << "<text x=\"" << fmt(label_width) << "\" y=\"24\" font-size=\"16\" "
         "font-weight=\"bold\">"
      << escape_xml(topic) << "</text>\n";

  double y = top;
  for (const auto& row : rows) {
    svg << "<text x=\"" << fmt(label_width - 8.0) << "\" y=\"" << fmt(y + 17.0)
        << "\" font-size=\"12\" text-anchor=\"end\">" << escape_xml(row.label)
        << "</text>\n";
    double x = label_width;
    for (std::size_t k = 0; k < row.probabilities.size(); ++k) {
      const double segment = row.probabilities[k] * bar_width;
      if (segment <= 0.0) {
        continue;
      }
      svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(segment) << "\" height=\"" << fmt(bar_height) << "\" fill=\""
          << kPalette[k % 9] << "\"/>\n";
      if (segment >= 44.0) {
        svg << "<text x=\"" << fmt(x + segment / 2.0) << "\" y=\"" << fmt(y + 17.0)
            << "\" font-size=\"11\" fill=\"#ffffff\" text-anchor=\"middle\">"
            << fmt(row.probabilities[k] * 100.0, "%.0f") << "%</text>\n";
      }
      x += segment;
    }
    if (!row.annotation.empty()) {
      svg << "<text x=\"" << fmt(label_width + bar_width + 8.0) << "\" y=\""
          << fmt(y + 17.0) << "\" font-size=\"11\">" << escape_xml(row.annotation)
          << "</text>\n";
    }
    y += bar_height + row_gap;
  }

  y += 12.0;
  for (std::size_t k = 0; k < option_labels.size(); ++k) {
    svg << "<rect x=\"" << fmt(label_width) << "\" y=\"" << fmt(y) << "\" width=\"12\" "
           "height=\"12\" fill=\""
        << kPalette[k % 9] << "\"/>\n";
    svg << "<text x=\"" << fmt(label_width + 18.0) << "\" y=\"" << fmt(y + 10.0)
        << "\" font-size=\"11\">" << (k + 1) << ". " << escape_xml(option_labels[k])
        << "</text>\n";
    y += legend_row_height;
  }

  svg << "</svg>\n";
  return svg.str();
}

std::string render_delta_tables(const std::string& wave_label, double temperature,
                                const std::vector<EvalCell>& cells) {
  std::map<std::string, std::map<ConditionId, const EvalCell*>> by_question;
  std::map<std::string, std::string> topics;
  std::set<ConditionId> conditions;
  for (const auto& cell : cells) {
    by_question[cell.question_id][cell.condition] = &cell;
    topics[cell.question_id] = cell.topic;
    conditions.insert(cell.condition);
  }

  std::ostringstream md;
  md << "# Alignment report - wave " << wave_label << ", T=" << fmt(temperature, "%g")
     << "\n\n";

  md << "## JS divergence by condition\n\n";
  md << "| Question | Topic |";
  for (ConditionId condition : conditions) {
    md << ' ' << condition_name(condition) << " |";
  }
  md << "\n|---|---|";
  for (std::size_t k = 0; k < conditions.size(); ++k) {
    md << "---|";
  }
  md << '\n';
  for (const auto& [question_id, row] : by_question) {
    md << "| " << question_id << " | " << topics[question_id] << " |";
    for (ConditionId condition : conditions) {
      const auto it = row.find(condition);
      if (it == row.end()) {
        md << " n/a |";
      } else {
        const auto& e = it->second->estimate;
        md << ' ' << fmt(e.point, "%.4f") << " [" << fmt(e.ci_low, "%.4f") << ", "
           << fmt(e.ci_high, "%.4f") << "] |";
      }
    }
    md << '\n';
  }

  md << "\n## Delta vs replicate (negative = closer to human; * = significant)\n\n";
  md << "| Question | Topic |";
  for (ConditionId condition : conditions) {
    if (condition == ConditionId::kReplicate) {
      continue;
    }
    md << ' ' << condition_name(condition) << " |";
  }
  md << "\n|---|---|";
  for (std::size_t k = 1; k < conditions.size(); ++k) {
    md << "---|";
  }
  md << '\n';
  for (const auto& [question_id, row] : by_question) {
    md << "| " << question_id << " | " << topics[question_id] << " |";
    for (ConditionId condition : conditions) {
      if (condition == ConditionId::kReplicate) {
        continue;
      }
      const auto it = row.find(condition);
      if (it == row.end() || !it->second->delta_vs_replicate) {
        md << " n/a |";
      } else {
        const auto& d = *it->second->delta_vs_replicate;
        md << ' ' << fmt(d.delta, "%+.4f") << (d.significant ? "*" : "") << " |";
      }
    }
    md << '\n';
  }
  md << '\n';
  return md.str();
}

}  // namespace silicon
