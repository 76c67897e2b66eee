// SPDX-License-Identifier: Apache-2.0

#ifndef PODLOC_REPORT_HPP
#define PODLOC_REPORT_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "podloc/pipeline.hpp"

namespace podloc {

enum class ReportFormat { csv, tsv };

/// One benchmark table row: a grid descriptor plus named numeric columns.
struct ReportRow {
  std::string grid_desc;
  std::vector<std::pair<std::string, double>> fields;

  void add(std::string name, double value) {
    fields.emplace_back(std::move(name), value);
  }
};

/// Scientific notation, locale independent. CSV uses 4 significant digits
/// (the benchmark tables' style), TSV full precision.
inline std::string format_number(double v, ReportFormat fmt) {
  char buf[64];
  const int precision = fmt == ReportFormat::csv ? 3 : 16;
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::scientific, precision);
  if (res.ec != std::errc())
    throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

inline void write_report(const std::vector<ReportRow>& rows,
                         const std::string& path, ReportFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_report: cannot open " + path);
  const char sep = fmt == ReportFormat::csv ? ',' : '\t';
  out << "grid";
  if (!rows.empty())
    for (const auto& [name, value] : rows.front().fields) out << sep << name;
  out << '\n';
  for (const ReportRow& r : rows) {
    out << r.grid_desc;
    for (const auto& [name, value] : r.fields)
      out << sep << format_number(value, fmt);
    out << '\n';
  }
}

/// Space-time surfaces as (t, x, value) triplets (boundary rows included)
/// and the control as (t, u_1..u_m) rows; one file per field.
inline void emit_plotdata(const PipelineResult& result,
                          const std::string& prefix) {
  const auto write_field = [&](const Trajectory& traj,
                               const std::string& name) {
    std::ofstream out(prefix + "." + name + ".csv", std::ios::binary);
    if (!out)
      throw std::runtime_error("emit_plotdata: cannot open output file");
    out << "t,x,value\n";
    const int m = traj.interior();
    const double h = 1.0 / (m + 1);
    for (int j = 0; j < traj.grid.dof(); ++j) {
      const double t = traj.grid.node(j);
      out << format_number(t, ReportFormat::tsv) << ",0,0\n";
      for (int i = 0; i < m; ++i)
        out << format_number(t, ReportFormat::tsv) << ','
            << format_number((i + 1) * h, ReportFormat::tsv) << ','
            << format_number(traj.values[j][i], ReportFormat::tsv) << '\n';
      out << format_number(t, ReportFormat::tsv) << ",1,0\n";
    }
  };
  write_field(result.solve.state, "state");
  write_field(result.solve.adjoint, "adjoint");

  std::ofstream out(prefix + ".control.csv", std::ios::binary);
  if (!out) throw std::runtime_error("emit_plotdata: cannot open output file");
  const ControlTrajectory& u = result.solve.control;
  out << 't';
  for (int i = 0; i < u.intensities(); ++i) out << ",u_" << (i + 1);
  out << '\n';
  for (int j = 0; j < u.grid.dof(); ++j) {
    out << format_number(u.grid.node(j), ReportFormat::tsv);
    for (int i = 0; i < u.intensities(); ++i)
      out << ',' << format_number(u.values[j][i], ReportFormat::tsv);
    out << '\n';
  }
}

}  // namespace podloc

#endif  // PODLOC_REPORT_HPP
