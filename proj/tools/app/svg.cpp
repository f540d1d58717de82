#include "svg.hpp"

#include <cstdio>

namespace artss::app {
namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 320.0;
constexpr double kLeft = 56.0;
constexpr double kRight = 16.0;
constexpr double kTop = 32.0;
constexpr double kBottom = 44.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf", "#393b79", "#637939"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

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

void render_panel(std::string& out, const Panel& p, double ox) {
  const double pw = kPanelW - kLeft - kRight;
  const double ph = kPanelH - kTop - kBottom;
  const double xr = p.x_max > p.x_min ? p.x_max - p.x_min : 1.0;
  const double yr = p.y_max > p.y_min ? p.y_max - p.y_min : 1.0;
  auto sx = [&](double x) { return ox + kLeft + (x - p.x_min) / xr * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - p.y_min) / yr * ph; };

  out += "<text x=\"" + num(ox + kPanelW / 2) + "\" y=\"20\" text-anchor=\"middle\">" +
         escape(p.title) + "</text>\n";
  out += "<rect x=\"" + num(ox + kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = p.x_min + xr * i / 4.0;
    const double yv = p.y_min + yr * i / 4.0;
    out += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(kTop + ph + 14) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + tick(xv) + "</text>\n";
    out += "<text x=\"" + num(ox + kLeft - 4) + "\" y=\"" + num(sy(yv) + 3) +
           "\" text-anchor=\"end\" font-size=\"10\">" + tick(yv) + "</text>\n";
  }
  out += "<text x=\"" + num(ox + kLeft + pw / 2) + "\" y=\"" + num(kPanelH - 8) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + escape(p.x_label) + "</text>\n";
  out += "<text transform=\"translate(" + num(ox + 14) + "," + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" + escape(p.y_label) +
         "</text>\n";

  for (std::size_t i = 0; i < p.bars.heights.size(); ++i) {
    const double x0 = sx(p.bars.edges[i]);
    const double x1 = sx(p.bars.edges[i + 1]);
    const double y1 = sy(p.bars.heights[i]);
    out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) +
           "\" height=\"" + num(sy(p.y_min) - y1) +
           "\" fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\"/>\n";
  }
  for (std::size_t s = 0; s < p.lines.size(); ++s) {
    const auto& line = p.lines[s];
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < line.x.size(); ++i) {
      if (i) out += ' ';
      out += num(sx(line.x[i])) + "," + num(sy(line.y[i]));
    }
    out += "\"/>\n";
    if (!line.label.empty()) {
      const double ly = kTop + 12 + 12.0 * static_cast<double>(s);
      out += "<text x=\"" + num(ox + kLeft + pw - 4) + "\" y=\"" + num(ly) +
             "\" text-anchor=\"end\" font-size=\"9\" fill=\"" + color + "\">" +
             escape(line.label) + "</text>\n";
    }
  }
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels) {
  const double width = kPanelW * static_cast<double>(panels.empty() ? 1 : panels.size());
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                    "\" height=\"" + num(kPanelH) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(out, panels[i], kPanelW * static_cast<double>(i));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace artss::app
