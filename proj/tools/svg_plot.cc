#include "tools/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpi/format.h"

namespace cpi {

namespace {

constexpr double kWidth = 900;
constexpr double kHeight = 600;
constexpr double kLeft = 80;
constexpr double kRight = 230;
constexpr double kTop = 30;
constexpr double kBottom = 60;
constexpr int kLightest = 230;
constexpr int kDarkest = 30;

std::string Px(double v) {
  return FormatFixed(v, 2);
}

std::string XmlEscape(const std::string& text) {
  std::string escaped;
  for (char c : text) {
    switch (c) {
      case '&':
        escaped += "&amp;";
        break;
      case '<':
        escaped += "&lt;";
        break;
      case '>':
        escaped += "&gt;";
        break;
      case '"':
        escaped += "&quot;";
        break;
      default:
        escaped += c;
    }
  }
  return escaped;
}

std::string Gray(int level) {
  const std::string v = std::to_string(level);
  return "rgb(" + v + "," + v + "," + v + ")";
}

// Smallest 1/2/5 x 10^k step giving at most |max_ticks| ticks over |span|.
double NiceStep(double span, int max_ticks) {
  double magnitude = std::pow(10.0, std::floor(std::log10(span / max_ticks)));
  for (;;) {
    for (double m : {1.0, 2.0, 5.0}) {
      if (span / (m * magnitude) <= max_ticks)
        return m * magnitude;
    }
    magnitude *= 10.0;
  }
}

class Frame {
 public:
  Frame(double log_bw_lo, double log_bw_hi, double lat_lo, double lat_hi)
      : log_bw_lo_(log_bw_lo),
        log_bw_hi_(log_bw_hi),
        lat_lo_(lat_lo),
        lat_hi_(lat_hi) {}

  double X(double bw_kbps) const {
    return kLeft + (std::log2(bw_kbps) - log_bw_lo_) /
                       (log_bw_hi_ - log_bw_lo_) * PlotWidth();
  }
  // Higher latency is drawn higher up.
  double Y(double lat_ms) const {
    return kTop + (lat_hi_ - lat_ms) / (lat_hi_ - lat_lo_) * PlotHeight();
  }
  static double PlotWidth() { return kWidth - kLeft - kRight; }
  static double PlotHeight() { return kHeight - kTop - kBottom; }

  double log_bw_lo() const { return log_bw_lo_; }
  double log_bw_hi() const { return log_bw_hi_; }
  double lat_lo() const { return lat_lo_; }
  double lat_hi() const { return lat_hi_; }

 private:
  double log_bw_lo_, log_bw_hi_, lat_lo_, lat_hi_;
};

Frame FitFrame(const std::vector<CpiPath>& paths,
               const std::vector<const Envelope*>& envelopes) {
  double bw_lo = INFINITY, bw_hi = -INFINITY;
  double lat_lo = INFINITY, lat_hi = -INFINITY;
  auto extend = [&](double lat, double bw) {
    bw_lo = std::min(bw_lo, bw);
    bw_hi = std::max(bw_hi, bw);
    lat_lo = std::min(lat_lo, lat);
    lat_hi = std::max(lat_hi, lat);
  };
  for (const CpiPath& path : paths) {
    for (const PsiSample& s : path.points)
      extend(s.point.latency_ms, s.point.bandwidth_kbps);
  }
  for (const Envelope* env : envelopes) {
    extend(env->lat_lo_ms, env->bw_lo_kbps);
    extend(env->lat_hi_ms, env->bw_hi_kbps);
  }
  double log_lo = std::log2(bw_lo) - 0.25;
  double log_hi = std::log2(bw_hi) + 0.25;
  double lat_pad = 0.05 * (lat_hi - lat_lo);
  if (lat_pad == 0.0)
    lat_pad = 10.0;
  return Frame(log_lo, log_hi, std::max(0.0, lat_lo - lat_pad),
               lat_hi + lat_pad);
}

void DrawAxes(const Frame& f, std::ostream& svg) {
  const double x0 = kLeft, x1 = kLeft + Frame::PlotWidth();
  const double y0 = kTop, y1 = kTop + Frame::PlotHeight();
  svg << "<rect class=\"frame\" x=\"" << Px(x0) << "\" y=\"" << Px(y0)
      << "\" width=\"" << Px(x1 - x0) << "\" height=\"" << Px(y1 - y0)
      << "\" fill=\"none\" stroke=\"#000\"/>\n";

  const int first = static_cast<int>(std::ceil(f.log_bw_lo()));
  const int last = static_cast<int>(std::floor(f.log_bw_hi()));
  const int stride = std::max(1, (last - first + 1 + 9) / 10);
  for (int k = first; k <= last; k += stride) {
    const double bw = std::ldexp(1.0, k);
    const double x = f.X(bw);
    svg << "<line x1=\"" << Px(x) << "\" y1=\"" << Px(y1) << "\" x2=\""
        << Px(x) << "\" y2=\"" << Px(y1 + 5) << "\" stroke=\"#000\"/>\n";
    svg << "<text x=\"" << Px(x) << "\" y=\"" << Px(y1 + 18)
        << "\" text-anchor=\"middle\">" << FormatDouble(bw) << "</text>\n";
  }
  svg << "<text x=\"" << Px((x0 + x1) / 2) << "\" y=\"" << Px(y1 + 45)
      << "\" text-anchor=\"middle\">bandwidth (Kbps, log scale)</text>\n";

  const double step = NiceStep(f.lat_hi() - f.lat_lo(), 10);
  for (double lat = std::ceil(f.lat_lo() / step) * step; lat <= f.lat_hi();
       lat += step) {
    const double y = f.Y(lat);
    svg << "<line x1=\"" << Px(x0 - 5) << "\" y1=\"" << Px(y) << "\" x2=\""
        << Px(x0) << "\" y2=\"" << Px(y) << "\" stroke=\"#000\"/>\n";
    svg << "<text x=\"" << Px(x0 - 8) << "\" y=\"" << Px(y + 4)
        << "\" text-anchor=\"end\">" << FormatDouble(lat) << "</text>\n";
  }
  svg << "<text x=\"" << Px(20) << "\" y=\"" << Px((y0 + y1) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << Px((y0 + y1) / 2) << ")\">latency (ms)</text>\n";
}

void DrawLegend(std::ostream& svg) {
  const double x = kWidth - kRight + 20;
  double y = kTop + 10;
  auto line = [&](const std::string& text) {
    svg << "<text x=\"" << Px(x) << "\" y=\"" << Px(y) << "\">" << text
        << "</text>\n";
    y += 18;
  };
  line("CPI points shaded by PSI,");
  line("normalized per path:");
  line("(psi - min) / (max - min)");
  y += 4;
  for (const auto& [level, label] :
       {std::pair{kLightest, "lowest PSI"}, std::pair{kDarkest, "highest PSI"}}) {
    svg << "<circle cx=\"" << Px(x + 5) << "\" cy=\"" << Px(y - 4)
        << "\" r=\"4\" fill=\"" << Gray(level)
        << "\" stroke=\"#000\" stroke-width=\"0.5\"/>\n";
    svg << "<text x=\"" << Px(x + 16) << "\" y=\"" << Px(y) << "\">" << label
        << "</text>\n";
    y += 18;
  }
  svg << "<rect x=\"" << Px(x) << "\" y=\"" << Px(y - 10)
      << "\" width=\"10\" height=\"10\" fill=\"none\" stroke=\"#1f5fa8\"/>\n";
  svg << "<text x=\"" << Px(x + 16) << "\" y=\"" << Px(y)
      << "\">network envelope</text>\n";
}

}  // namespace

int PsiGrayLevel(double psi, double min_psi, double max_psi) {
  double t = max_psi > min_psi ? (psi - min_psi) / (max_psi - min_psi) : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<int>(std::lround(kLightest - (kLightest - kDarkest) * t));
}

std::string RenderPlotSvg(const std::vector<CpiPath>& paths,
                          const std::vector<Envelope>& envelopes) {
  std::vector<const Envelope*> valid;
  for (const Envelope& env : envelopes) {
    if (!env.Problem())
      valid.push_back(&env);
  }
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";

  bool any_point = false;
  for (const CpiPath& path : paths)
    any_point = any_point || !path.points.empty();
  if (!any_point && valid.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }
  const Frame frame = FitFrame(paths, valid);
  DrawAxes(frame, svg);

  for (const Envelope* env : valid) {
    const double x = frame.X(env->bw_lo_kbps);
    const double y = frame.Y(env->lat_hi_ms);
    svg << "<rect class=\"envelope\" x=\"" << Px(x) << "\" y=\"" << Px(y)
        << "\" width=\"" << Px(frame.X(env->bw_hi_kbps) - x) << "\" height=\""
        << Px(frame.Y(env->lat_lo_ms) - y)
        << "\" fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\"><title>"
        << XmlEscape(env->provider + " " + env->city + " " +
                     std::to_string(env->year))
        << "</title></rect>\n";
  }

  for (const CpiPath& path : paths) {
    if (path.points.empty())
      continue;
    double min_psi = INFINITY, max_psi = -INFINITY;
    for (const PsiSample& s : path.points) {
      min_psi = std::min(min_psi, s.mean);
      max_psi = std::max(max_psi, s.mean);
    }
    svg << "<g class=\"cpi-path\" data-site=\"" << XmlEscape(path.site_id)
        << "\">\n<polyline points=\"";
    for (size_t i = 0; i < path.points.size(); ++i) {
      const NetPoint& p = path.points[i].point;
      svg << (i ? " " : "") << Px(frame.X(p.bandwidth_kbps)) << ","
          << Px(frame.Y(p.latency_ms));
    }
    svg << "\" fill=\"none\" stroke=\"#777\" stroke-width=\"1\"/>\n";
    for (const PsiSample& s : path.points) {
      svg << "<circle cx=\"" << Px(frame.X(s.point.bandwidth_kbps))
          << "\" cy=\"" << Px(frame.Y(s.point.latency_ms)) << "\" r=\"3\" fill=\""
          << Gray(PsiGrayLevel(s.mean, min_psi, max_psi))
          << "\" stroke=\"#000\" stroke-width=\"0.5\"><title>"
          << XmlEscape(ToString(s.point)) << " PSI " << FormatDouble(s.mean)
          << "</title></circle>\n";
    }
    svg << "</g>\n";
  }
  DrawLegend(svg);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cpi
