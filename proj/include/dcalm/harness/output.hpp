// Copyright (c) dcalm contributors

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dcalm/core.hpp"
#include "dcalm/harness/experiment.hpp"
#include "json.hpp"

namespace dcalm {

inline constexpr const char* kRunsHeader =
    "family,parameter,matrix,refinement,variant,solver,instance,seed,success,metric,iterations,"
    "status";
inline constexpr const char* kTimingsHeader = "cell,instance,wall_time,cpu_time";

namespace detail {

inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string short_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

inline nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline std::string runs_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kRunsHeader << '\n';
  for (const RunRecord& r : records) {
    out << r.family << ',' << r.parameter << ',' << r.matrix << ','
        << RunRecord::format_number(r.refinement) << ',' << r.variant << ',' << r.solver << ','
        << r.instance << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
        << detail::exact(r.metric) << ',' << r.iterations << ',' << r.status << '\n';
  }
  return out.str();
}

inline std::string timings_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kTimingsHeader << '\n';
  for (const RunRecord& r : records) {
    out << r.cell() << ',' << r.instance << ',' << detail::exact(r.wall_time) << ','
        << detail::exact(r.cpu_time) << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json summary_json(const std::map<std::string, CellSummary>& summary) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [cell, s] : summary) {
    doc[cell] = {{"family", s.family},
                 {"parameter", s.parameter},
                 {"solver", s.solver},
                 {"series", s.series},
                 {"runs", s.runs},
                 {"successes", s.successes},
                 {"mean_wall_time", detail::number_or_null(s.mean_wall_time)},
                 {"median_wall_time", detail::number_or_null(s.median_wall_time)},
                 {"mean_cpu_time", detail::number_or_null(s.mean_cpu_time)},
                 {"median_cpu_time", detail::number_or_null(s.median_cpu_time)},
                 {"median_iterations", detail::number_or_null(s.median_iterations)}};
  }
  return doc;
}

/// One table per plot series, rows ordered by the sweep parameter.
inline std::map<std::string, std::string> plot_tables(
    const std::map<std::string, CellSummary>& summary) {
  std::map<std::string, std::vector<const CellSummary*>> series;
  for (const auto& [cell, s] : summary) series[s.series].push_back(&s);
  std::map<std::string, std::string> tables;
  for (auto& [name, cells] : series) {
    std::sort(cells.begin(), cells.end(),
              [](const CellSummary* a, const CellSummary* b) { return a->parameter < b->parameter; });
    std::ostringstream out;
    out << (cells.front()->family == "weber" ? "facilities" : "sparsity")
        << "\tsuccess_count\tmean_time\tmedian_time\n";
    for (const CellSummary* c : cells) {
      out << c->parameter << '\t' << c->successes << '\t'
          << detail::short_number(c->mean_wall_time) << '\t'
          << detail::short_number(c->median_wall_time) << '\n';
    }
    tables.emplace(name, out.str());
  }
  return tables;
}

/// Writes runs.csv, timings.csv, summary.json and plotdata/<series>.tsv.
inline void emit_outputs(const std::vector<RunRecord>& records,
                         const std::map<std::string, CellSummary>& summary,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "plotdata", ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out = detail::open_output(path);
    out << text;
    detail::close_output(out, path);
  };
  write(dir / "runs.csv", runs_csv(records));
  write(dir / "timings.csv", timings_csv(records));
  write(dir / "summary.json", summary_json(summary).dump(2) + "\n");
  for (const auto& [name, table] : plot_tables(summary)) {
    write(dir / "plotdata" / (name + ".tsv"), table);
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

/// Reloads records from runs.csv, joining wall and CPU times from
/// timings.csv when present.
inline std::vector<RunRecord> read_records(const std::filesystem::path& dir) {
  std::ifstream runs(dir / "runs.csv");
  if (!runs) throw IoError("cannot open " + (dir / "runs.csv").string());
  std::string line;
  if (!std::getline(runs, line) || line != kRunsHeader) {
    throw DataError("runs.csv: unexpected header");
  }
  std::vector<RunRecord> records;
  while (std::getline(runs, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 12) throw DataError("runs.csv: expected 12 fields");
    try {
      RunRecord r;
      r.family = f[0];
      r.parameter = std::stoi(f[1]);
      r.matrix = f[2];
      r.refinement = std::stod(f[3]);
      r.variant = f[4];
      r.solver = f[5];
      r.instance = std::stoi(f[6]);
      r.seed = std::stoull(f[7]);
      r.success = f[8] == "1";
      r.metric = std::stod(f[9]);
      r.iterations = std::stoi(f[10]);
      r.status = f[11];
      records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DataError("runs.csv: malformed row '" + line + "'");
    }
  }

  std::ifstream timings(dir / "timings.csv");
  if (!timings) return records;
  std::map<std::pair<std::string, int>, std::pair<double, double>> times;
  std::getline(timings, line);
  while (std::getline(timings, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) throw DataError("timings.csv: expected 4 fields");
    times[{f[0], std::stoi(f[1])}] = {std::stod(f[2]), std::stod(f[3])};
  }
  for (RunRecord& r : records) {
    if (const auto it = times.find({r.cell(), r.instance}); it != times.end()) {
      r.wall_time = it->second.first;
      r.cpu_time = it->second.second;
    }
  }
  return records;
}

}  // namespace dcalm
