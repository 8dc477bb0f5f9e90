#pragma once

#include <string>
#include <vector>

namespace phasorsec {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string provenance;  // written as an XML comment
    bool markers = false;
};

// Self-contained SVG line chart. Output depends only on the inputs.
std::string line_chart(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace phasorsec
