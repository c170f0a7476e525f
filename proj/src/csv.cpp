#include "tvart/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tvart/error.hpp"

namespace tvart::csv {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

bool parse_double(std::string_view cell, double& out) {
    if (cell.empty())
        return false;
    if (cell.front() == '+')
        cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

} // namespace

Table parse(std::istream& in, const std::string& source) {
    Table table;
    std::vector<double> flat;
    std::size_t columns = 0;
    std::size_t rows = 0;
    bool first_row = true;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto cells = split(body);

        if (first_row) {
            first_row = false;
            columns = cells.size();
            double probe = 0.0;
            bool numeric = true;
            for (auto c : cells)
                numeric = numeric && parse_double(c, probe);
            if (!numeric) {
                for (auto c : cells)
                    table.header.emplace_back(c);
                continue;
            }
        }

        if (cells.size() != columns)
            throw Error(ErrorKind::Parse, fmt::format("{}:{}: expected {} cells, found {}", source,
                                                      line_no, columns, cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v))
                throw Error(ErrorKind::Parse, fmt::format("{}:{}: cell {} is missing or not a number",
                                                          source, line_no, c + 1));
            if (!std::isfinite(v))
                throw Error(ErrorKind::NonFinite,
                            fmt::format("{}:{}: cell {} is not finite", source, line_no, c + 1));
            flat.push_back(v);
        }
        ++rows;
    }

    table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < columns; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                flat[r * columns + c];
    return table;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
    return parse(in, path.string());
}

TimeSeries read_series(const std::filesystem::path& path) {
    auto table = read(path);
    TimeSeries series;
    series.values = table.values.transpose();
    series.channel_names = std::move(table.header);
    series.validate();
    return series;
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

void write(std::ostream& out, const Eigen::MatrixXd& values, const std::vector<std::string>& header,
           const std::string& manifest) {
    if (!manifest.empty())
        out << "# " << manifest << '\n';
    if (!header.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
            out << (c ? "," : "") << header[c];
        out << '\n';
    }
    std::string row;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j)
                row += ',';
            row += format_number(values(i, j));
        }
        row += '\n';
        out << row;
    }
}

void write(const std::filesystem::path& path, const Eigen::MatrixXd& values,
           const std::vector<std::string>& header, const std::string& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
    write(out, values, header, manifest);
    if (!out)
        throw Error(ErrorKind::Io, fmt::format("write failed for {}", path.string()));
}

void write_series(const std::filesystem::path& path, const TimeSeries& series,
                  const std::string& manifest) {
    std::vector<std::string> header = series.channel_names;
    if (header.empty())
        for (Eigen::Index i = 0; i < series.channels(); ++i)
            header.push_back(fmt::format("x{}", i + 1));
    write(path, series.values.transpose(), header, manifest);
}

} // namespace tvart::csv
