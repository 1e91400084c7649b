#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace warmstart {

// Shortest round-trip text for a finite double; throws NumericError otherwise.
std::string format_number(double x);

class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    // Convenience for all-numeric rows.
    void add_numbers(const std::vector<double> &values);

    const std::vector<std::string> &columns() const { return columns_; }
    std::size_t size() const { return rows_.size(); }

    // Optional "# ..." comment line, then header and rows.
    void write(std::ostream &os, const std::string &comment = {}) const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace warmstart
