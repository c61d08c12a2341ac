#include "dstorm/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dstorm::harness {

namespace {

constexpr double kWidth = 720, kPanelHeight = 300, kLeft = 80, kRight = 170, kTop = 40, kBottom = 50;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

using Extract = std::function<std::optional<double>(const MetricRow&)>;

void panel(std::ostringstream& svg, const std::vector<PlotSeries>& series, const Extract& get, double y0,
           const std::string& ylabel) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double lmin = xmin, lmax = -xmin;
  for (const auto& s : series) {
    for (const auto& r : s.rows) {
      const auto v = get(r);
      if (!v || !(*v > 0.0) || !std::isfinite(*v)) continue;
      xmin = std::min(xmin, static_cast<double>(r.comm_total));
      xmax = std::max(xmax, static_cast<double>(r.comm_total));
      lmin = std::min(lmin, std::log10(*v));
      lmax = std::max(lmax, std::log10(*v));
    }
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kPanelHeight - kTop - kBottom;
  svg << "<g transform=\"translate(0," << y0 << ")\">\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"20\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 20," << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\" font-size=\"13\">" << escape(ylabel) << "</text>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kPanelHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">communication rounds</text>\n";
  if (!std::isfinite(xmin)) {
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"13\">no positive data</text>\n</g>\n";
    return;
  }
  if (xmax == xmin) xmax = xmin + 1;
  lmin = std::floor(lmin);
  lmax = std::ceil(lmax);
  if (lmax == lmin) lmax = lmin + 1;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double l) { return kTop + plot_h - (l - lmin) / (lmax - lmin) * plot_h; };

  const int step = std::max(1, static_cast<int>(std::ceil((lmax - lmin) / 8)));
  for (int e = static_cast<int>(lmin); e <= static_cast<int>(lmax); e += step) {
    svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << py(e) << "\" y2=\"" << py(e)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e"
        << e << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double x = xmin + (xmax - xmin) * t / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << static_cast<long>(std::llround(x)) << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << color << "\" points=\"";
    for (const auto& r : series[i].rows) {
      const auto v = get(r);
      if (!v || !(*v > 0.0) || !std::isfinite(*v)) continue;
      svg << px(static_cast<double>(r.comm_total)) << ',' << py(std::log10(*v)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kWidth - kRight + 10 << "\" x2=\"" << kWidth - kRight + 30 << "\" y1=\"" << ly - 4
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly << "\" font-size=\"11\">"
        << escape(series[i].label) << "</text>\n";
  }
  svg << "</g>\n";
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  if (series.empty()) throw std::invalid_argument("plot: no series");
  std::ostringstream svg;
  const double height = 2 * kPanelHeight + 30;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << kWidth << ' ' << height << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
  }
  panel(svg, series, [](const MetricRow& r) { return r.f_gap; }, 20, "f(x) - f*");
  panel(svg, series, [](const MetricRow& r) { return std::optional<double>(r.consensus_sq); }, 20 + kPanelHeight,
        "||X - mean X||^2");
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::vector<PlotSeries>& series, const std::string& path, const std::string& title) {
  const std::string text = render_svg(series, title);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace dstorm::harness
