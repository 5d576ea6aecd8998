#pragma once

#include <map>
#include <string>
#include <vector>

#include "chorusnet/analysis.hpp"

namespace chorusnet {

// Minimal deterministic SVG writer; coordinates are formatted with fixed
// precision so identical inputs yield identical bytes.
class SvgDocument {
public:
    SvgDocument(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0, double opacity = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.5, double opacity = 1.0);
    void rect(double x, double y, double w, double h, const std::string& fill,
              double opacity = 1.0);
    void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0);
    void text(double x, double y, const std::string& content, double size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#333333");

    std::string str() const;

private:
    double width_, height_;
    std::string body_;
};

std::string topology_color(const std::string& kind);
std::string cluster_color(int cluster);

// Cluster prevalence vs iteration, one line per cluster.
std::string prevalence_chart(const std::map<int, std::vector<double>>& trajectory,
                             const std::string& title);

struct ScatterSample {
    int batch = 0;
    int iteration = 0;
    std::string topology;
    double entropy = 0.0;
    double similarity = 0.0;
};

// Neighbor similarity vs entropy, colored by topology, one marker shape per
// batch, opacity ramping with iteration.
std::string similarity_entropy_chart(const std::vector<ScatterSample>& samples,
                                     const std::string& title);

// Mean relative deviations per topology with CI whiskers, grouped by metric.
std::string deviation_chart(
    const std::map<std::string, std::map<std::string, DeviationSummary>>& by_metric,
    const std::string& title);

} // namespace chorusnet
