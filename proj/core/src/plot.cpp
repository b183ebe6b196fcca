#include "semgeo/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "semgeo/error.hpp"

namespace semgeo {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
                                    "#8c6d31", "#843c39", "#7b4173", "#3182bd", "#e6550d", "#31a354"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string glyph(ItemClass cls, double x, double y, double r, const std::string& fill, const char* css_class) {
    std::ostringstream g;
    const std::string attrs = std::string(" class=\"") + css_class + "\" fill=\"" + fill + "\"";
    switch (cls) {
        case ItemClass::meaningful:
            g << "<circle" << attrs << " cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r) << "\"/>";
            break;
        case ItemClass::structural:
            g << "<rect" << attrs << " x=\"" << fmt(x - r) << "\" y=\"" << fmt(y - r) << "\" width=\"" << fmt(2 * r)
              << "\" height=\"" << fmt(2 * r) << "\"/>";
            break;
        case ItemClass::borderline:
            g << "<polygon" << attrs << " points=\"" << fmt(x) << ',' << fmt(y - r) << ' ' << fmt(x + r) << ','
              << fmt(y) << ' ' << fmt(x) << ',' << fmt(y + r) << ' ' << fmt(x - r) << ',' << fmt(y) << "\"/>";
            break;
        case ItemClass::functional:
            g << "<polygon" << attrs << " points=\"" << fmt(x) << ',' << fmt(y - r) << ' ' << fmt(x + r) << ','
              << fmt(y + r) << ' ' << fmt(x - r) << ',' << fmt(y + r) << "\"/>";
            break;
        case ItemClass::compositional:
            g << "<path" << attrs << " stroke=\"" << fill << "\" stroke-width=\"2\" d=\"M" << fmt(x - r) << ','
              << fmt(y - r) << 'L' << fmt(x + r) << ',' << fmt(y + r) << 'M' << fmt(x - r) << ',' << fmt(y + r)
              << 'L' << fmt(x + r) << ',' << fmt(y - r) << "\"/>";
            break;
    }
    return g.str();
}

}  // namespace

std::string render_svg(const Projection& projection, const Dataset& dataset, const PlotOptions& opt) {
    if (projection.dims() != 2) {
        throw ValidationError("plot supports 2D projections only (got " + std::to_string(projection.dims()) +
                              "D); use the explorer UI for other dimensions");
    }
    if (projection.labels.size() != projection.size()) throw ValidationError("projection labels do not match rows");

    std::map<std::string, const LexicalItem*> by_label;
    for (const auto& it : dataset.items) by_label.emplace(it.label, &it);
    std::vector<const LexicalItem*> items;
    for (const auto& l : projection.labels) {
        auto f = by_label.find(l);
        if (f == by_label.end()) throw ValidationError("projection label '" + l + "' is not in dataset " + dataset.id);
        items.push_back(f->second);
    }

    std::set<std::string> categories;
    std::set<ItemClass> classes;
    for (const auto* it : items) {
        categories.insert(it->category);
        classes.insert(it->item_class);
    }
    std::map<std::string, std::string> colour;
    std::size_t ci = 0;
    for (const auto& c : categories) colour[c] = kPalette[ci++ % std::size(kPalette)];

    const double legend_w = 200.0, margin = 40.0, top = 50.0;
    const double plot_w = opt.width - legend_w - 2 * margin;
    const double plot_h = opt.height - top - margin;
    const auto& xy = projection.coords;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (xy.rows() > 0) {
        x0 = xy.col(0).minCoeff();
        x1 = xy.col(0).maxCoeff();
        y0 = xy.col(1).minCoeff();
        y1 = xy.col(1).maxCoeff();
    }
    // Shared scale keeps the projection's aspect ratio.
    const double span = std::max({x1 - x0, y1 - y0, 1e-12});
    const double scale = std::min(plot_w, plot_h) / span;
    const double ox = margin + 0.5 * (plot_w - (x1 - x0) * scale);
    const double oy = top + 0.5 * (plot_h + (y1 - y0) * scale);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
        << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"#ffffff\"/>\n";
    const std::string title =
        opt.title.empty() ? dataset.id + " / " + std::string(to_string(projection.method)) : opt.title;
    svg << "<text class=\"title\" x=\"" << fmt(margin) << "\" y=\"28\" font-size=\"18\">" << escape(title)
        << "</text>\n";

    svg << "<g class=\"points\">\n";
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
        const double px = ox + (xy(i, 0) - x0) * scale;
        const double py = oy - (xy(i, 1) - y0) * scale;
        svg << glyph(items[i]->item_class, px, py, 4.0, colour.at(items[i]->category), "glyph") << '\n';
    }
    svg << "</g>\n";
    if (opt.show_labels) {
        svg << "<g class=\"labels\" font-size=\"10\" fill=\"#333333\">\n";
        for (Eigen::Index i = 0; i < xy.rows(); ++i) {
            const double px = ox + (xy(i, 0) - x0) * scale;
            const double py = oy - (xy(i, 1) - y0) * scale;
            svg << "<text class=\"label\" x=\"" << fmt(px + 5) << "\" y=\"" << fmt(py - 5) << "\">"
                << escape(items[i]->label) << "</text>\n";
        }
        svg << "</g>\n";
    }

    const double lx = opt.width - legend_w + 10;
    double ly = top;
    svg << "<g class=\"legend\" font-size=\"12\">\n";
    for (const auto& c : categories) {
        svg << "<rect class=\"legend-swatch\" x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 10) << "\" width=\"12\" height=\"12\" fill=\""
            << colour.at(c) << "\"/>";
        svg << "<text class=\"legend-text\" x=\"" << fmt(lx + 18) << "\" y=\"" << fmt(ly) << "\">" << escape(c)
            << "</text>\n";
        ly += 18;
    }
    ly += 10;
    for (ItemClass cls : classes) {
        svg << glyph(cls, lx + 6, ly - 4, 5.0, "#555555", "legend-shape");
        svg << "<text class=\"legend-text-shape\" x=\"" << fmt(lx + 18) << "\" y=\"" << fmt(ly) << "\">"
            << to_string(cls) << "</text>\n";
        ly += 18;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

void plot(const Projection& projection, const Dataset& dataset, const std::filesystem::path& out,
          const PlotOptions& options) {
    const std::string svg = render_svg(projection, dataset, options);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + out.string());
    f << svg;
    if (!f) throw IoError("write failed for " + out.string());
}

}  // namespace semgeo
