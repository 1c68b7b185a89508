#pragma once

// Self-contained SVG emission for the spectral-region figures. Curves are
// first assembled in world coordinates (kept around so tests can assert the
// geometry without parsing XML), then projected to screen space with a fixed
// margin. No plotting library, just paths.

#include "lpspec/region.hpp"

#include <array>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace lpspec {

enum class FigureKind { L1Region, LpFamily, Envelope, L1Both, LpBoth };

inline FigureKind figure_kind_from_string(const std::string& s) {
  if (s == "l1-region") return FigureKind::L1Region;
  if (s == "lp-family") return FigureKind::LpFamily;
  if (s == "envelope") return FigureKind::Envelope;
  if (s == "l1-both") return FigureKind::L1Both;
  if (s == "lp-both") return FigureKind::LpBoth;
  throw std::invalid_argument("unknown figure kind: " + s);
}

inline std::string to_string(FigureKind k) {
  switch (k) {
    case FigureKind::L1Region: return "l1-region";
    case FigureKind::LpFamily: return "lp-family";
    case FigureKind::Envelope: return "envelope";
    case FigureKind::L1Both: return "l1-both";
    case FigureKind::LpBoth: return "lp-both";
  }
  throw std::logic_error("unreachable");
}

struct FigureSpec {
  FigureKind kind = FigureKind::LpBoth;
  double x_min = 0.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
  int resolution = 257;  // world-space samples per curve
  double width = 720.0, height = 540.0;

  // Frames the widest parabola of the figure: right edge half a width past
  // the vertex so the arms fill the vertical span, a small margin behind it.
  static FigureSpec framed(FigureKind kind, const SpectralParams& sp, double p,
                           int resolution = 257) {
    const Parabola outer =
        (kind == FigureKind::L1Region) ? l1_contained_parabola(sp) : lp_containing_parabola(sp, p);
    FigureSpec f;
    f.kind = kind;
    f.resolution = resolution;
    // a degenerate outer parabola is a horizontal ray; frame it by its vertex
    const double w = outer.degenerate ? std::max(outer.vertex, 1.0) : std::max(outer.width, 1e-6);
    f.x_max = outer.vertex + 0.5 * w;
    f.x_min = outer.vertex - 0.06 * (f.x_max - outer.vertex);
    f.y_max = std::sqrt(w * (f.x_max - outer.vertex));
    f.y_min = -f.y_max;
    return f;
  }
};

struct Curve {
  std::string label;
  std::vector<std::array<double, 2>> pts;  // world (x, y)
  bool closed = false;                     // filled region boundary vs stroked line
};

struct FigureData {
  FigureSpec spec;
  std::vector<Curve> curves;
};

namespace detail {

// Region bounded on the left by x = boundary(y): boundary arc clipped to the
// frame, closed along the right edge.
template <class Boundary>
Curve region_curve(const std::string& label, const FigureSpec& f, Boundary&& boundary) {
  Curve c;
  c.label = label;
  c.closed = true;
  const int m = f.resolution;
  for (int i = 0; i <= m; ++i) {
    const double y = f.y_min + (f.y_max - f.y_min) * double(i) / double(m);
    const double x = std::min(boundary(y), f.x_max);
    c.pts.push_back({x, y});
  }
  c.pts.push_back({f.x_max, f.y_max});
  c.pts.push_back({f.x_max, f.y_min});
  return c;
}

inline Curve parabola_arc(const std::string& label, const FigureSpec& f, const Parabola& p) {
  Curve c;
  c.label = label;
  const int m = f.resolution;
  for (int i = 0; i <= m; ++i) {
    const double y = f.y_min + (f.y_max - f.y_min) * double(i) / double(m);
    c.pts.push_back({p.boundary_x(y), y});
  }
  return c;
}

inline std::vector<double> slice_values(const SpectralParams& sp, int per_interval) {
  std::vector<double> as;
  for (const Interval& iv : sp.alpha_sq_range) {
    if (iv.hi <= iv.lo) {
      as.push_back(iv.lo);
      continue;
    }
    for (int i = 0; i < per_interval; ++i)
      as.push_back(iv.lo + (iv.hi - iv.lo) * double(i) / double(per_interval - 1));
  }
  return as;
}

}  // namespace detail

// World-space content of one figure. Shaded regions come first so strokes
// stay visible after rasterization.
inline FigureData make_figure(const SpectralParams& sp, double p, const FigureSpec& spec) {
  FigureData fig{spec, {}};
  switch (spec.kind) {
    case FigureKind::L1Region: {
      const Parabola in = l1_contained_parabola(sp);
      fig.curves.push_back(
          detail::region_curve("contained", spec, [&](double y) { return in.boundary_x(y); }));
      break;
    }
    case FigureKind::L1Both: {
      const Parabola in = l1_contained_parabola(sp);
      const Parabola out = l1_containing_parabola(sp);
      fig.curves.push_back(
          detail::region_curve("containing", spec, [&](double y) { return out.boundary_x(y); }));
      fig.curves.push_back(
          detail::region_curve("contained", spec, [&](double y) { return in.boundary_x(y); }));
      break;
    }
    case FigureKind::LpFamily:
    case FigureKind::Envelope: {
      const RegionUnion region = lp_contained_region(sp, p);
      for (double A : detail::slice_values(sp, 9)) {
        const Parabola sl = region.slice(A);
        if (sl.degenerate) {
          Curve ray;
          ray.label = "slice-ray";
          ray.pts.push_back({sl.vertex, 0.0});
          ray.pts.push_back({spec.x_max, 0.0});
          fig.curves.push_back(ray);
        } else {
          fig.curves.push_back(detail::parabola_arc("slice", spec, sl));
        }
      }
      if (spec.kind == FigureKind::Envelope) {
        const double m = envelope_slope(p);
        for (double sgn : {1.0, -1.0}) {
          Curve line;
          line.label = sgn > 0 ? "envelope+" : "envelope-";
          const double y_hit = std::min(std::abs(spec.y_max), spec.x_max / m);
          line.pts.push_back({0.0, 0.0});
          line.pts.push_back({m * y_hit, sgn * y_hit});
          fig.curves.push_back(line);
        }
      }
      break;
    }
    case FigureKind::LpBoth: {
      const RegionUnion region = lp_contained_region(sp, p);
      const Parabola out = lp_containing_parabola(sp, p);
      if (out.degenerate) {
        // p == 2: contained and containing collapse to the same real ray
        Curve ray;
        ray.label = "spectrum-ray";
        ray.pts.push_back({out.vertex, 0.0});
        ray.pts.push_back({spec.x_max, 0.0});
        fig.curves.push_back(ray);
        break;
      }
      fig.curves.push_back(
          detail::region_curve("containing", spec, [&](double y) { return out.boundary_x(y); }));
      fig.curves.push_back(detail::region_curve(
          "contained", spec, [&](double y) { return region.min_boundary(y); }));
      break;
    }
  }
  return fig;
}

inline std::string to_svg(const FigureData& fig) {
  const FigureSpec& f = fig.spec;
  const double pad = 42.0;
  const double sx = (f.width - 2.0 * pad) / (f.x_max - f.x_min);
  const double sy = (f.height - 2.0 * pad) / (f.y_max - f.y_min);
  const auto X = [&](double x) { return pad + (x - f.x_min) * sx; };
  const auto Y = [&](double y) { return f.height - pad - (y - f.y_min) * sy; };

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << f.width << ' '
      << f.height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" fill=\"white\"/>\n";

  // axes, when the origin lines cross the frame
  if (f.x_min < 0.0 && f.x_max > 0.0)
    out << "<line x1=\"" << X(0) << "\" y1=\"" << Y(f.y_min) << "\" x2=\"" << X(0)
        << "\" y2=\"" << Y(f.y_max) << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
  if (f.y_min < 0.0 && f.y_max > 0.0)
    out << "<line x1=\"" << X(f.x_min) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(f.x_max)
        << "\" y2=\"" << Y(0) << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";

  int shade = 0;
  for (const Curve& c : fig.curves) {
    if (c.pts.empty()) continue;
    std::ostringstream d;
    d << std::fixed << std::setprecision(2);
    for (size_t k = 0; k < c.pts.size(); ++k)
      d << (k == 0 ? "M" : " L") << X(c.pts[k][0]) << ' ' << Y(c.pts[k][1]);
    if (c.closed) {
      d << " Z";
      const char* fill = (shade++ % 2 == 0) ? "#9ecae1" : "#3182bd";
      out << "<path data-label=\"" << c.label << "\" d=\"" << d.str() << "\" fill=\"" << fill
          << "\" fill-opacity=\"0.55\" stroke=\"#08519c\" stroke-width=\"1.5\"/>\n";
    } else {
      out << "<path data-label=\"" << c.label << "\" d=\"" << d.str()
          << "\" fill=\"none\" stroke=\"#636363\" stroke-width=\"1.2\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

// Minimal structural validation: declared viewBox, balanced document tag,
// every filled path closed with Z.
inline bool svg_structurally_valid(const std::string& svg) {
  if (svg.find("<svg ") != 0) return false;
  if (svg.find("viewBox=\"") == std::string::npos) return false;
  if (svg.rfind("</svg>\n") != svg.size() - 7) return false;
  size_t pos = 0;
  while ((pos = svg.find("<path ", pos)) != std::string::npos) {
    const size_t end = svg.find("/>", pos);
    if (end == std::string::npos) return false;
    const std::string elem = svg.substr(pos, end - pos);
    const bool filled = elem.find("fill=\"none\"") == std::string::npos;
    const size_t dpos = elem.find(" d=\"");
    if (dpos == std::string::npos) return false;
    const size_t dend = elem.find('"', dpos + 4);
    const std::string dattr = elem.substr(dpos + 4, dend - dpos - 4);
    if (filled && (dattr.size() < 2 || dattr.substr(dattr.size() - 2) != " Z")) return false;
    pos = end;
  }
  return true;
}

}  // namespace lpspec
