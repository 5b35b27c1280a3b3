/*
 * Copyright 2026 The actif Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIF_DATA_RECORDS_HPP_
#define ACTIF_DATA_RECORDS_HPP_

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actif/data/dataset.hpp"
#include "actif/error.hpp"

namespace actif::data {

// Row-level trace of one subject, in file order.
struct SubjectTrace {
  std::string id;
  std::vector<double> timestamps;
  Eigen::MatrixXd features;  // rows x F
  std::vector<double> targets;

  std::size_t rows() const { return targets.size(); }
};

struct RawRecords {
  std::vector<std::string> feature_names;
  std::vector<SubjectTrace> subjects;
  NormStatsMap norm_stats;  // filled by subject_normalize

  std::size_t F() const { return feature_names.size(); }
  std::size_t total_rows() const {
    std::size_t n = 0;
    for (const auto& s : subjects) n += s.rows();
    return n;
  }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_cell(std::string_view cell, std::size_t line, std::string_view column) {
  cell = trim(cell);
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("cannot parse '" + std::string(cell) + "' in column '" +
                         std::string(column) + "' as a finite number",
                     line);
  }
  return value;
}

}  // namespace detail

// Parses `subject_id,timestamp,target,<features...>` CSV text. The timestamp
// column is optional; every other non-reserved column is a feature. Rows are
// grouped by subject in order of first appearance, preserving row order.
inline RawRecords parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw SchemaError("empty CSV input: missing header row");
  const auto header = detail::split_csv_line(line);
  std::ptrdiff_t subject_col = -1, time_col = -1, target_col = -1;
  std::vector<std::size_t> feature_cols;
  RawRecords rec;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = detail::trim(header[c]);
    if (name == "subject_id") {
      subject_col = static_cast<std::ptrdiff_t>(c);
    } else if (name == "timestamp") {
      time_col = static_cast<std::ptrdiff_t>(c);
    } else if (name == "target") {
      target_col = static_cast<std::ptrdiff_t>(c);
    } else {
      feature_cols.push_back(c);
      rec.feature_names.emplace_back(name);
    }
  }
  if (subject_col < 0) throw SchemaError("missing required column 'subject_id'");
  if (target_col < 0) throw SchemaError("missing required column 'target'");
  if (feature_cols.empty()) throw SchemaError("no feature columns in header");

  const std::size_t F = feature_cols.size();
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> feature_rows;  // per subject, flattened rows
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    const std::string subject(detail::trim(cells[static_cast<std::size_t>(subject_col)]));
    if (subject.empty()) throw ParseError("empty subject_id", line_no);
    auto [it, inserted] = index.emplace(subject, rec.subjects.size());
    if (inserted) {
      rec.subjects.push_back(SubjectTrace{subject, {}, {}, {}});
      feature_rows.emplace_back();
    }
    SubjectTrace& trace = rec.subjects[it->second];
    trace.targets.push_back(
        detail::parse_cell(cells[static_cast<std::size_t>(target_col)], line_no, "target"));
    trace.timestamps.push_back(
        time_col >= 0
            ? detail::parse_cell(cells[static_cast<std::size_t>(time_col)], line_no, "timestamp")
            : static_cast<double>(trace.timestamps.size()));
    auto& flat = feature_rows[it->second];
    for (std::size_t f = 0; f < F; ++f) {
      flat.push_back(detail::parse_cell(cells[feature_cols[f]], line_no, rec.feature_names[f]));
    }
  }
  for (std::size_t s = 0; s < rec.subjects.size(); ++s) {
    const auto rows = static_cast<Eigen::Index>(rec.subjects[s].rows());
    rec.subjects[s].features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                              Eigen::Dynamic, Eigen::RowMajor>>(
        feature_rows[s].data(), rows, static_cast<Eigen::Index>(F));
  }
  return rec;
}

inline RawRecords load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path + "'");
  return parse_csv(in);
}

namespace detail {
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

// Writes records in the same schema load_csv reads. Numbers use 17
// significant digits so a reload is bit-exact.
inline void write_csv(std::ostream& out, const RawRecords& rec) {
  out << "subject_id,timestamp,target";
  for (const auto& name : rec.feature_names) out << ',' << name;
  out << '\n';
  for (const auto& s : rec.subjects) {
    for (std::size_t r = 0; r < s.rows(); ++r) {
      out << s.id << ',' << detail::format_double(s.timestamps[r]) << ','
          << detail::format_double(s.targets[r]);
      for (Eigen::Index f = 0; f < s.features.cols(); ++f) {
        out << ',' << detail::format_double(s.features(static_cast<Eigen::Index>(r), f));
      }
      out << '\n';
    }
  }
}

inline void save_csv(const std::string& path, const RawRecords& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file '" + path + "'");
  write_csv(out, rec);
}

}  // namespace actif::data

#endif  // ACTIF_DATA_RECORDS_HPP_
