#include "warmstart/csv.hpp"

#include <charconv>
#include <cmath>

#include "warmstart/errors.hpp"

namespace warmstart {

std::string format_number(double x) {
    if (!std::isfinite(x)) throw NumericError("refusing to write a non-finite number");
    if (x == 0.0) x = 0.0; // drop the sign of -0
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    WS_REQUIRE(!columns_.empty(), "CSV table needs at least one column");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    WS_REQUIRE(cells.size() == columns_.size(), "CSV row width does not match the header");
    rows_.push_back(std::move(cells));
}

void CsvTable::add_numbers(const std::vector<double> &values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    add_row(std::move(cells));
}

void CsvTable::write(std::ostream &os, const std::string &comment) const {
    if (!comment.empty()) os << "# " << comment << '\n';
    auto line = [&](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(columns_);
    for (const auto &r : rows_) line(r);
}

} // namespace warmstart
