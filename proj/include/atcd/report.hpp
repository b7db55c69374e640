#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

// CSV and SVG output helpers shared by the CLI subcommands. Numbers are
// rendered with shortest-round-trip formatting so identical inputs produce
// byte-identical files.

namespace atcd::report {

// Shortest decimal string that parses back to exactly v. Dot decimal point.
std::string format_number(double v);

// Quotes per RFC 4180 when the field contains a comma, quote or newline.
std::string csv_field(const std::string& s);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    // A "# ..." line; readers treat leading-# lines as metadata.
    void comment(const std::string& text);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
};

struct Series {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
};

// Simple multi-series line chart with axes, ticks and a legend.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

// Vertical bar chart; `errors` (optional, pass empty) draws +/- whiskers.
void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& y_label, const std::vector<std::string>& labels,
                     const std::vector<double>& values, const std::vector<double>& errors);

}  // namespace atcd::report
