#pragma once

#include <string>
#include <vector>

namespace aftershock::svg {

enum class Style { line, dashed, points };

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;  // optional error bars
    Style style = Style::points;
    int color = -1;  // palette index; -1 uses the series position
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

/// Standalone SVG document for a 2-D scatter/line chart.
std::string render(const Plot& plot);

}  // namespace aftershock::svg
