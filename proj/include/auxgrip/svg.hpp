#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "auxgrip/common.hpp"

namespace auxgrip::svg {

struct Series {
  std::string name;
  std::vector<Vec2> points;
};

/// Minimal deterministic line-plot writer: axes, ticks, labeled polylines.
/// Kept internal so study artifacts do not depend on a plotting ecosystem.
class LinePlot {
 public:
  LinePlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(Series s) { series_.push_back(std::move(s)); }

  void write(std::ostream& out) const {
    const double w = 640, h = 420;
    const double ml = 64, mr = 140, mt = 36, mb = 48;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series_)
      for (const auto& p : s.points) {
        if (first) {
          xmin = xmax = p.x;
          ymin = ymax = p.y;
          first = false;
        }
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
    if (xmax - xmin < 1e-30) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-30) ymax = ymin + 1.0;
    const double px0 = ml, px1 = w - mr, py0 = h - mb, py1 = mt;
    auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
    auto sy = [&](double y) { return py0 + (y - ymin) / (ymax - ymin) * (py1 - py0); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
           "font-family=\"sans-serif\">"
        << escape(title_) << "</text>\n";

    // axes
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double tx = xmin + (xmax - xmin) * i / 5.0;
      const double ty = ymin + (ymax - ymin) * i / 5.0;
      out << "<line x1=\"" << sx(tx) << "\" y1=\"" << py0 << "\" x2=\"" << sx(tx) << "\" y2=\""
          << py0 + 4 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << sx(tx) << "\" y=\"" << py0 + 18
          << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
          << fmt(tx) << "</text>\n";
      out << "<line x1=\"" << px0 - 4 << "\" y1=\"" << sy(ty) << "\" x2=\"" << px0 << "\" y2=\""
          << sy(ty) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << px0 - 8 << "\" y=\"" << sy(ty) + 3
          << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">" << fmt(ty)
          << "</text>\n";
    }
    out << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << h - 12
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << escape(xlabel_) << "</text>\n";
    out << "<text x=\"16\" y=\"" << (py0 + py1) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 "
        << (py0 + py1) / 2 << ")\">" << escape(ylabel_) << "</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    for (size_t si = 0; si < series_.size(); ++si) {
      const char* color = palette[si % 8];
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : series_[si].points) out << fmt(sx(p.x)) << ',' << fmt(sy(p.y)) << ' ';
      out << "\"/>\n";
      const double ly = mt + 16.0 * static_cast<double>(si);
      out << "<line x1=\"" << px1 + 10 << "\" y1=\"" << ly << "\" x2=\"" << px1 + 30
          << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
      out << "<text x=\"" << px1 + 34 << "\" y=\"" << ly + 3
          << "\" font-size=\"10\" font-family=\"sans-serif\">" << escape(series_[si].name)
          << "</text>\n";
    }
    out << "</svg>\n";
  }

  void write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    write(out);
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
  }
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '&')
        out += "&amp;";
      else if (c == '<')
        out += "&lt;";
      else if (c == '>')
        out += "&gt;";
      else
        out += c;
    }
    return out;
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
};

}  // namespace auxgrip::svg
