#include "mipred/beeswarm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "mipred/artifact.hpp"
#include "mipred/error.hpp"
#include "mipred/rng.hpp"

namespace mipred::explain {

namespace {

std::string fixed(double v, int decimals = 2) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, v);
    return std::string(buffer);
}

// Blue (low) to red (high) through grey, the usual attribution palette.
std::string value_color(double t) {
    const double lo[3] = {31, 119, 224};
    const double hi[3] = {224, 49, 90};
    int rgb[3];
    for (int i = 0; i < 3; ++i)
        rgb[i] = static_cast<int>(std::lround(lo[i] + (hi[i] - lo[i]) * t));
    char buffer[10];
    std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return std::string(buffer);
}

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string beeswarm_svg(const ShapMatrix& shap, const FeatureMatrix& features,
                         const GlobalImportance& importance, const BeeswarmOptions& options) {
    if (shap.n_rows != features.n_rows || shap.n_cols != features.n_cols)
        throw DataError("beeswarm: attribution and feature shapes differ");

    std::unordered_map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < shap.feature_names.size(); ++c)
        column_of[shap.feature_names[c]] = c;

    const std::size_t n_plot = std::min(options.max_features, importance.ranking.size());
    const double margin_left = 190.0;
    const double margin_right = 40.0;
    const double margin_top = 34.0;
    const double margin_bottom = 42.0;
    const double plot_w = options.width - margin_left - margin_right;
    const double height = margin_top + options.row_height * static_cast<double>(n_plot) +
                          margin_bottom;

    // Symmetric x scale over the plotted attributions.
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n_plot; ++i) {
        const std::size_t c = column_of.at(importance.ranking[i]);
        for (std::size_t r = 0; r < shap.n_rows; ++r)
            max_abs = std::max(max_abs, std::abs(shap.at(r, c)));
    }
    if (max_abs == 0.0) max_abs = 1.0;
    auto x_of = [&](double value) {
        return margin_left + plot_w * 0.5 * (1.0 + value / max_abs);
    };

    // Per-feature value range for the color map.
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(options.width, 0)
        << "\" height=\"" << fixed(height, 0) << "\" viewBox=\"0 0 " << fixed(options.width, 0)
        << " " << fixed(height, 0) << "\">\n";
    svg << "  <style>text{font-family:sans-serif;font-size:12px;}</style>\n";
    svg << "  <text x=\"" << fixed(margin_left) << "\" y=\"18\">attribution to predicted "
           "log-odds (one dot per instance; blue low, red high feature value)</text>\n";
    svg << "  <line x1=\"" << fixed(x_of(0.0)) << "\" y1=\"" << fixed(margin_top - 8)
        << "\" x2=\"" << fixed(x_of(0.0)) << "\" y2=\"" << fixed(height - margin_bottom + 8)
        << "\" stroke=\"#777\" stroke-dasharray=\"3,3\"/>\n";

    auto jitter_gen = rng::substream(options.seed, "beeswarm");
    for (std::size_t i = 0; i < n_plot; ++i) {
        const std::string& name = importance.ranking[i];
        const std::size_t c = column_of.at(name);
        const double y_mid = margin_top + options.row_height * (static_cast<double>(i) + 0.5);

        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < features.n_rows; ++r) {
            const double v = features.at(r, c);
            if (!std::isnan(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }

        svg << "  <g class=\"feature-row\" data-feature=\"" << escape_xml(name) << "\">\n";
        svg << "    <text x=\"8\" y=\"" << fixed(y_mid + 4) << "\">" << escape_xml(name)
            << "</text>\n";
        svg << "    <line x1=\"" << fixed(margin_left) << "\" y1=\"" << fixed(y_mid)
            << "\" x2=\"" << fixed(options.width - margin_right) << "\" y2=\"" << fixed(y_mid)
            << "\" stroke=\"#eee\"/>\n";
        for (std::size_t r = 0; r < shap.n_rows; ++r) {
            const double value = features.at(r, c);
            std::string color = "#999999";
            if (!std::isnan(value) && hi > lo)
                color = value_color((value - lo) / (hi - lo));
            else if (!std::isnan(value))
                color = value_color(0.5);
            const double jitter = (jitter_gen.uniform() - 0.5) * options.row_height * 0.62;
            svg << "    <circle cx=\"" << fixed(x_of(shap.at(r, c))) << "\" cy=\""
                << fixed(y_mid + jitter) << "\" r=\"2.2\" fill=\"" << color
                << "\" fill-opacity=\"0.75\"/>\n";
        }
        svg << "  </g>\n";
    }

    // x axis with three ticks.
    const double y_axis = height - margin_bottom + 14;
    svg << "  <line x1=\"" << fixed(margin_left) << "\" y1=\"" << fixed(y_axis - 10)
        << "\" x2=\"" << fixed(options.width - margin_right) << "\" y2=\"" << fixed(y_axis - 10)
        << "\" stroke=\"#777\"/>\n";
    for (double tick : {-max_abs, 0.0, max_abs}) {
        svg << "  <text x=\"" << fixed(x_of(tick) - 12) << "\" y=\"" << fixed(y_axis + 6)
            << "\">" << fixed(tick) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void save_beeswarm_svg(const ShapMatrix& shap, const FeatureMatrix& features,
                       const GlobalImportance& importance, const std::string& path,
                       const BeeswarmOptions& options) {
    artifact::write_file(path, beeswarm_svg(shap, features, importance, options));
}

}  // namespace mipred::explain
