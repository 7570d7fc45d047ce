#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "cli.hpp"
#include "evseq/errors.hpp"

namespace evseq::cli {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;
constexpr int kTicks = 5;

std::string num(double v, const char* f = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Axis {
  double lo;
  double hi;
  double from;
  double to;
  double map(double v) const { return from + (v - lo) / (hi - lo) * (to - from); }
};

}  // namespace

std::string render_svg(std::span<const TrajectoryRecord> records, double alpha) {
  if (records.empty()) throw DataError("cannot plot an empty trajectory");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const double ln10 = std::log(10.0);
  const double threshold = std::log10(1.0 / alpha);

  double ylo = std::min(0.0, threshold);
  double yhi = std::max(0.0, threshold);
  for (const auto& r : records) {
    const double v = r.log_e / ln10;
    if (std::isfinite(v)) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  double xlo = static_cast<double>(records.front().n);
  double xhi = static_cast<double>(records.back().n);
  if (xhi == xlo) {
    xlo -= 1.0;
    xhi += 1.0;
  }
  const Axis xa{xlo, xhi, kLeft, kWidth - kRight};
  const Axis ya{ylo, yhi, kHeight - kBottom, kTop};
  auto y_of = [&](double log_e) {
    const double v = std::clamp(log_e / ln10, ylo, yhi);
    return ya.map(std::isnan(v) ? ylo : v);
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
       num(kHeight - kBottom) + "\"/>\n";
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" +
       num(kWidth - kRight) + "\" y2=\"" + num(kHeight - kBottom) + "\"/>\n";
  s += "</g>\n";

  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = xlo + (xhi - xlo) * i / kTicks;
    const double px = xa.map(xv);
    s += "<line x1=\"" + num(px) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(px) +
         "\" y2=\"" + num(kHeight - kBottom + 4) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\">" + num(xv, "%.4g") + "</text>\n";
    const double yv = ylo + (yhi - ylo) * i / kTicks;
    const double py = ya.map(yv);
    s += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" +
         num(yv, "%.3g") + "</text>\n";
  }
  s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\">n</text>\n";
  s += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + num((kTop + kHeight - kBottom) / 2) +
       ")\">log10 e-value</text>\n";
  s += "</g>\n";

  const double ty = ya.map(threshold);
  s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(ty) + "\" x2=\"" + num(kWidth - kRight) +
       "\" y2=\"" + num(ty) + "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
  s += "<text x=\"" + num(kWidth - kRight - 4) + "\" y=\"" + num(ty - 4) +
       "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" fill=\"#d62728\">1/alpha = " +
       num(1.0 / alpha, "%.6g") + "</text>\n";

  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0) s += ' ';
    s += num(xa.map(static_cast<double>(records[i].n))) + "," + num(y_of(records[i].log_e));
  }
  s += "\"/>\n";

  const auto crossing = std::find_if(records.begin(), records.end(),
                                     [](const TrajectoryRecord& r) { return r.rejected; });
  if (crossing != records.end()) {
    const double px = xa.map(static_cast<double>(crossing->n));
    const double py = y_of(crossing->log_e);
    s += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"4\" fill=\"#d62728\"/>\n";
    s += "<text x=\"" + num(px + 6) + "\" y=\"" + num(py - 6) +
         "\" font-family=\"sans-serif\" font-size=\"11\">tau = " + std::to_string(crossing->n) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace evseq::cli
