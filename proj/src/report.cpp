#include "stacklab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace stacklab {

namespace {
std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}
}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,head,split,loss\n";
  for (const MetricRow& r : rows)
    out << r.epoch << "," << r.head << "," << r.split << "," << fixed(r.loss, 6) << "\n";
}

void write_size_table_csv(const std::string& path, const std::string& model_name,
                          const std::vector<SizeError>& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "model,tower_size,e1_mae_dm,e2_mae_dm,e3_err,pairs,records\n";
  for (const SizeError& r : table)
    out << model_name << "," << r.tower_size << "," << fixed(r.e1_mae, 3) << ","
        << fixed(r.e2_mae, 3) << "," << fixed(r.e3_err, 3) << "," << r.n_pairs << ","
        << r.n_records << "\n";
}

void write_plan_results_csv(const std::string& path, const std::vector<PlanResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "task,size,sample,predictor,plan_found,success,predicted,achieved,optimum,failure\n";
  for (const PlanResultRow& r : rows)
    out << r.task << "," << r.size << "," << r.sample << "," << r.predictor << ","
        << (r.plan_found ? 1 : 0) << "," << (r.success ? 1 : 0) << ","
        << fixed(r.predicted, 3) << "," << fixed(r.achieved, 3) << ","
        << fixed(r.optimum, 3) << "," << r.failure << "\n";
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::vector<PlanResultRow> read_plan_results_csv(const std::string& path) {
  const auto rows = read_csv(path);
  std::vector<PlanResultRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& c = rows[i];
    if (c.size() < 9) throw std::runtime_error("bad plan results row in " + path);
    PlanResultRow r;
    r.task = c[0];
    r.size = std::stoi(c[1]);
    r.sample = std::stoi(c[2]);
    r.predictor = c[3];
    r.plan_found = c[4] == "1";
    r.success = c[5] == "1";
    r.predicted = std::stod(c[6]);
    r.achieved = std::stod(c[7]);
    r.optimum = std::stod(c[8]);
    r.failure = c.size() > 9 ? c[9] : "";
    out.push_back(std::move(r));
  }
  return out;
}

void write_success_chart_svg(const std::string& path, const std::vector<PlanResultRow>& rows) {
  // success rate per (task, predictor, size)
  std::map<std::string, std::map<int, std::pair<int, int>>> groups;
  for (const PlanResultRow& r : rows) {
    auto& [succ, total] = groups[r.task + " (" + r.predictor + ")"][r.size];
    succ += r.success ? 1 : 0;
    total += 1;
  }
  const int bar_w = 34, gap = 10, group_gap = 36, chart_h = 220, base_y = 250;
  int total_bars = 0;
  for (const auto& [_, sizes] : groups) total_bars += static_cast<int>(sizes.size());
  const int width =
      60 + total_bars * (bar_w + gap) + static_cast<int>(groups.size()) * group_gap;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << std::max(width, 320)
      << "\" height=\"300\">\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">plan success rate (%)</text>\n";
  for (int tick = 0; tick <= 100; tick += 25) {
    const int y = base_y - tick * chart_h / 100;
    out << "<line x1=\"40\" y1=\"" << y << "\" x2=\"" << std::max(width, 320) - 10
        << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"8\" y=\"" << y + 4 << "\" font-size=\"10\">" << tick << "</text>\n";
  }
  int x = 60;
  for (const auto& [label, sizes] : groups) {
    const int group_x = x;
    for (const auto& [size, counts] : sizes) {
      const double rate = counts.second ? 100.0 * counts.first / counts.second : 0.0;
      const int h = static_cast<int>(rate * chart_h / 100.0);
      out << "<rect x=\"" << x << "\" y=\"" << base_y - h << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"#4878a8\"/>\n";
      out << "<text x=\"" << x + 6 << "\" y=\"" << base_y + 14 << "\" font-size=\"10\">n"
          << size << "</text>\n";
      out << "<text x=\"" << x + 2 << "\" y=\"" << base_y - h - 4 << "\" font-size=\"10\">"
          << fixed(rate, 0) << "</text>\n";
      x += bar_w + gap;
    }
    out << "<text x=\"" << group_x << "\" y=\"" << base_y + 30 << "\" font-size=\"11\">"
        << label << "</text>\n";
    x += group_gap;
  }
  out << "</svg>\n";
}

}  // namespace stacklab
