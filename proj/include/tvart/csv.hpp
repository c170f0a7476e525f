#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tvart/windowing.hpp"

namespace tvart::csv {

/// A numeric table: optional column names plus a dense row-major view held
/// in an Eigen matrix (rows = CSV rows).
struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

/// Parse comma-separated text. Lines starting with '#' and blank lines are
/// skipped. The first remaining row is a header iff any of its cells is not
/// a number. Missing or non-finite cells and ragged rows throw.
Table parse(std::istream& in, const std::string& source = "<stream>");
Table read(const std::filesystem::path& path);

/// Time series CSV: one row per sample, one column per channel.
TimeSeries read_series(const std::filesystem::path& path);

/// Format a double with 17 significant digits (round-trips exactly).
std::string format_number(double v);

/// Write `values` as CSV. A non-empty `manifest` is emitted first as a
/// '# '-prefixed comment line; a non-empty `header` follows as column names.
void write(std::ostream& out, const Eigen::MatrixXd& values,
           const std::vector<std::string>& header = {}, const std::string& manifest = {});
void write(const std::filesystem::path& path, const Eigen::MatrixXd& values,
           const std::vector<std::string>& header = {}, const std::string& manifest = {});

void write_series(const std::filesystem::path& path, const TimeSeries& series,
                  const std::string& manifest = {});

} // namespace tvart::csv
