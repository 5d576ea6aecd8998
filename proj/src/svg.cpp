#include "chorusnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace chorusnet {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_opacity(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// Maps data range to pixel range with a small margin when degenerate.
struct Axis {
    double lo, hi, px_lo, px_hi;
    Axis(double lo_, double hi_, double px_lo_, double px_hi_)
        : lo(lo_), hi(hi_), px_lo(px_lo_), px_hi(px_hi_) {
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double operator()(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

} // namespace

SvgDocument::SvgDocument(double width, double height) : width_(width), height_(height) {}

void SvgDocument::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                       double width, double opacity) {
    body_ += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" +
             fmt(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) + "\"";
    if (opacity < 1.0) body_ += " stroke-opacity=\"" + fmt_opacity(opacity) + "\"";
    body_ += "/>\n";
}

void SvgDocument::polyline(const std::vector<std::pair<double, double>>& pts,
                           const std::string& stroke, double width, double opacity) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) + "\"";
    if (opacity < 1.0) body_ += " stroke-opacity=\"" + fmt_opacity(opacity) + "\"";
    body_ += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) body_ += ' ';
        body_ += fmt(pts[i].first) + "," + fmt(pts[i].second);
    }
    body_ += "\"/>\n";
}

void SvgDocument::rect(double x, double y, double w, double h, const std::string& fill,
                       double opacity) {
    body_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
             fmt(h) + "\" fill=\"" + fill + "\"";
    if (opacity < 1.0) body_ += " fill-opacity=\"" + fmt_opacity(opacity) + "\"";
    body_ += "/>\n";
}

void SvgDocument::circle(double cx, double cy, double r, const std::string& fill, double opacity) {
    body_ += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(r) + "\" fill=\"" +
             fill + "\"";
    if (opacity < 1.0) body_ += " fill-opacity=\"" + fmt_opacity(opacity) + "\"";
    body_ += "/>\n";
}

void SvgDocument::text(double x, double y, const std::string& content, double size,
                       const std::string& anchor, const std::string& fill) {
    body_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"" + fmt(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" +
             content + "</text>\n";
}

std::string SvgDocument::str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_) + "\" height=\"" +
           fmt(height_) + "\" viewBox=\"0 0 " + fmt(width_) + " " + fmt(height_) + "\">\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + fmt(width_) + "\" height=\"" + fmt(height_) +
           "\" fill=\"#ffffff\"/>\n" + body_ + "</svg>\n";
}

std::string topology_color(const std::string& kind) {
    if (kind == "lattice") return "#1f77b4";
    if (kind == "random_regular") return "#ff7f0e";
    if (kind == "modular") return "#2ca02c";
    if (kind == "disconnected") return "#7f7f7f";
    return "#9467bd";
}

std::string cluster_color(int cluster) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[cluster % 10];
}

namespace {

constexpr double kW = 640, kH = 420;
constexpr double kLeft = 60, kRight = 600, kTop = 50, kBottom = 370;

void draw_frame(SvgDocument& doc, const std::string& title, const std::string& x_label,
                const std::string& y_label) {
    doc.text(kW / 2, 25, title, 14, "middle");
    doc.line(kLeft, kBottom, kRight, kBottom, "#333333");
    doc.line(kLeft, kTop, kLeft, kBottom, "#333333");
    doc.text((kLeft + kRight) / 2, kBottom + 35, x_label, 12, "middle");
    doc.text(18, (kTop + kBottom) / 2, y_label, 12, "middle");
}

void y_ticks(SvgDocument& doc, const Axis& y, double lo, double hi, int n) {
    for (int i = 0; i <= n; ++i) {
        const double v = lo + (hi - lo) * i / n;
        doc.line(kLeft - 4, y(v), kLeft, y(v), "#333333");
        doc.text(kLeft - 8, y(v) + 4, fmt(v), 10, "end");
    }
}

} // namespace

std::string prevalence_chart(const std::map<int, std::vector<double>>& trajectory,
                             const std::string& title) {
    SvgDocument doc(kW, kH);
    draw_frame(doc, title, "iteration", "prevalence");
    if (trajectory.empty()) {
        doc.text(kW / 2, kH / 2, "no data", 12, "middle");
        return doc.str();
    }

    const int t_min = trajectory.begin()->first;
    const int t_max = trajectory.rbegin()->first;
    double p_max = 0.0;
    for (const auto& [t, p] : trajectory)
        for (double v : p) p_max = std::max(p_max, v);
    const Axis x(t_min, t_max, kLeft, kRight);
    const Axis y(0.0, std::max(p_max, 0.05), kBottom, kTop);

    for (int t = t_min; t <= t_max; ++t) {
        doc.line(x(t), kBottom, x(t), kBottom + 4, "#333333");
        doc.text(x(t), kBottom + 18, std::to_string(t), 10, "middle");
    }
    y_ticks(doc, y, 0.0, std::max(p_max, 0.05), 4);

    const auto k = trajectory.begin()->second.size();
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [t, p] : trajectory) pts.emplace_back(x(t), y(p[c]));
        doc.polyline(pts, cluster_color(static_cast<int>(c)));
        doc.circle(kRight - 90, kTop + 14.0 * static_cast<double>(c), 4,
                   cluster_color(static_cast<int>(c)));
        doc.text(kRight - 80, kTop + 14.0 * static_cast<double>(c) + 4,
                 "cluster " + std::to_string(c), 10);
    }
    return doc.str();
}

std::string similarity_entropy_chart(const std::vector<ScatterSample>& samples,
                                     const std::string& title) {
    SvgDocument doc(kW, kH);
    draw_frame(doc, title, "entropy (nats)", "neighbor similarity");
    if (samples.empty()) {
        doc.text(kW / 2, kH / 2, "no data (condition has no edges)", 12, "middle");
        return doc.str();
    }

    double e_lo = samples[0].entropy, e_hi = samples[0].entropy;
    int t_max = 1;
    for (const auto& s : samples) {
        e_lo = std::min(e_lo, s.entropy);
        e_hi = std::max(e_hi, s.entropy);
        t_max = std::max(t_max, s.iteration);
    }
    const Axis x(e_lo, e_hi, kLeft, kRight);
    const Axis y(0.0, 1.0, kBottom, kTop);
    y_ticks(doc, y, 0.0, 1.0, 4);
    for (int i = 0; i <= 4; ++i) {
        const double v = e_lo + (e_hi - e_lo) * i / 4;
        doc.line(x(v), kBottom, x(v), kBottom + 4, "#333333");
        doc.text(x(v), kBottom + 18, fmt(v), 10, "middle");
    }

    // Batches get distinct marker sizes; later iterations are more opaque.
    for (const auto& s : samples) {
        const double opacity = 0.25 + 0.75 * static_cast<double>(s.iteration) / t_max;
        const double r = 3.0 + static_cast<double>(s.batch % 3);
        doc.circle(x(s.entropy), y(s.similarity), r, topology_color(s.topology), opacity);
    }

    std::vector<std::string> seen;
    double ly = kTop + 6;
    for (const auto& s : samples) {
        if (std::find(seen.begin(), seen.end(), s.topology) != seen.end()) continue;
        seen.push_back(s.topology);
        doc.circle(kLeft + 12, ly, 4, topology_color(s.topology));
        doc.text(kLeft + 22, ly + 4, s.topology, 10);
        ly += 14;
    }
    return doc.str();
}

std::string deviation_chart(
    const std::map<std::string, std::map<std::string, DeviationSummary>>& by_metric,
    const std::string& title) {
    SvgDocument doc(kW, kH);
    draw_frame(doc, title, "", "deviation from per-iteration mean");
    if (by_metric.empty()) {
        doc.text(kW / 2, kH / 2, "no deviation data", 12, "middle");
        return doc.str();
    }

    double v_lo = 0.0, v_hi = 0.0;
    std::size_t bars = 0;
    for (const auto& [metric, per_topo] : by_metric)
        for (const auto& [topo, dev] : per_topo) {
            v_lo = std::min({v_lo, dev.ci_lo, dev.mean});
            v_hi = std::max({v_hi, dev.ci_hi, dev.mean});
            ++bars;
        }
    const double pad = 0.1 * std::max(v_hi - v_lo, 1e-3);
    const Axis y(v_lo - pad, v_hi + pad, kBottom, kTop);
    y_ticks(doc, y, v_lo - pad, v_hi + pad, 4);
    doc.line(kLeft, y(0.0), kRight, y(0.0), "#999999", 1.0, 0.8);

    const double slot = (kRight - kLeft) / static_cast<double>(bars + by_metric.size());
    double cursor = kLeft + slot / 2;
    for (const auto& [metric, per_topo] : by_metric) {
        const double group_start = cursor;
        for (const auto& [topo, dev] : per_topo) {
            const double cx = cursor + slot / 2;
            const double y0 = y(0.0), y1 = y(dev.mean);
            doc.rect(cx - slot * 0.3, std::min(y0, y1), slot * 0.6, std::abs(y1 - y0),
                     topology_color(topo), 0.85);
            doc.line(cx, y(dev.ci_lo), cx, y(dev.ci_hi), "#333333", 1.5);
            doc.line(cx - 4, y(dev.ci_lo), cx + 4, y(dev.ci_lo), "#333333", 1.5);
            doc.line(cx - 4, y(dev.ci_hi), cx + 4, y(dev.ci_hi), "#333333", 1.5);
            doc.text(cx, kBottom + 16, topo.substr(0, 10), 9, "middle");
            cursor += slot;
        }
        doc.text((group_start + cursor) / 2, kBottom + 32, metric, 11, "middle");
        cursor += slot;
    }
    return doc.str();
}

} // namespace chorusnet
