#pragma once

#include <filesystem>
#include <string>

#include "semgeo/dataset.hpp"
#include "semgeo/projection.hpp"

namespace semgeo {

struct PlotOptions {
    int width = 900;   // whole canvas, legend included
    int height = 640;
    bool show_labels = true;
    std::string title;  // defaults to "<dataset> / <method>"
};

/// SVG scatter of a 2D projection: colour by category, shape by item class.
/// Rows are matched to dataset items by label. Anything but 2D is rejected.
std::string render_svg(const Projection& projection, const Dataset& dataset, const PlotOptions& options = {});

void plot(const Projection& projection, const Dataset& dataset, const std::filesystem::path& out,
          const PlotOptions& options = {});

}  // namespace semgeo
