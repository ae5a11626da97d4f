#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace msp::app {

/// 17 significant digits, general format, '.' as separator.
[[nodiscard]] std::string format_number(double x);

/// Comma-separated table with '\n' line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    /// Row of preformatted cells (for text columns).
    void add_cells(std::vector<std::string> cells);

    [[nodiscard]] std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Draw markers only, no connecting line.
    bool points = false;
};

/// Minimal line chart: one polyline per series, linear axes with ticks at
/// the data range ends.
[[nodiscard]] std::string svg_chart(std::string_view title, std::string_view x_label, std::string_view y_label,
                                    const std::vector<SvgSeries>& series);

/// Writes bytes exactly; throws ConfigError on I/O failure.
void write_file(const std::filesystem::path& path, std::string_view content);

void ensure_directory(const std::filesystem::path& dir);

}  // namespace msp::app
