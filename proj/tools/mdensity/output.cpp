#include "mdensity/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <locale>
#include <sstream>
#include <stdexcept>


namespace mdensity::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void header(std::ostream& out, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << escape(title) << "</text>\n";
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void axes(std::ostream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
      << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(text) << "</text>\n";
  };
  label(kMargin, kHeight - kMargin + 16, format_double(f.x0), "start");
  label(kWidth - kMargin, kHeight - kMargin + 16, format_double(f.x1), "end");
  label(kMargin - 4, kHeight - kMargin, format_double(f.y0), "end");
  label(kMargin - 4, kMargin + 10, format_double(f.y1), "end");
  label(kWidth / 2, kHeight - 14, xlabel, "middle");
  label(16, kHeight / 2, ylabel, "start");
}

std::string color_ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  // dark blue -> teal -> yellow
  const double r = 255.0 * std::clamp(1.6 * t - 0.6, 0.0, 1.0);
  const double g = 255.0 * std::clamp(0.15 + 0.85 * t, 0.0, 1.0);
  const double b = 255.0 * std::clamp(0.45 + 0.4 * std::sin(3.0 * t) - 0.6 * t, 0.0, 1.0);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g), static_cast<int>(b));
  return buf;
}

std::ofstream open_svg(const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out.precision(6);
  return out;
}

}  // namespace

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.imbue(std::locale::classic());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::string format_double(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(4);
  s << v;
  return s.str();
}

void svg_lines(const std::filesystem::path& path, const std::string& title, const std::vector<Series>& series,
               const std::string& xlabel, const std::string& ylabel) {
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Series& s : series) {
    for (double x : s.x) f.x0 = std::min(f.x0, x), f.x1 = std::max(f.x1, x);
    for (double y : s.y)
      if (std::isfinite(y)) f.y0 = std::min(f.y0, y), f.y1 = std::max(f.y1, y);
  }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
  if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1.0;
  std::ofstream out = open_svg(path);
  header(out, title);
  axes(out, f, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    out << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << kPalette[k % 5] << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.y[i])) out << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
    out << "\"/>\n";
    if (!s.label.empty())
      out << "<text x=\"" << kWidth - kMargin - 4 << "\" y=\"" << kMargin + 14 + 14 * k
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << kPalette[k % 5] << "\">"
          << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

void svg_heatmap(const std::filesystem::path& path, const std::string& title, const Eigen::MatrixXd& values,
                 double lo, double hi) {
  const Frame f{lo, hi, lo, hi};
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values.data()[i])) vmin = std::min(vmin, values.data()[i]), vmax = std::max(vmax, values.data()[i]);
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  const Eigen::Index n1 = values.rows(), n2 = values.cols();
  const double cw = (kWidth - 2 * kMargin) / n1, ch = (kHeight - 2 * kMargin) / n2;
  std::ofstream out = open_svg(path);
  header(out, title);
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n2; ++j)
      out << "<rect x=\"" << kMargin + i * cw << "\" y=\"" << kHeight - kMargin - (j + 1) * ch << "\" width=\""
          << cw + 0.05 << "\" height=\"" << ch + 0.05 << "\" fill=\"" << color_ramp((values(i, j) - vmin) / span)
          << "\"/>\n";
  axes(out, f, "y1", "y2");
  out << "</svg>\n";
}

void svg_quiver(const std::filesystem::path& path, const std::string& title, const std::vector<double>& px,
                const std::vector<double>& py, const std::vector<double>& vx, const std::vector<double>& vy,
                double lo, double hi) {
  const Frame f{lo, hi, lo, hi};
  double vmax = 0.0;
  for (std::size_t i = 0; i < vx.size(); ++i) vmax = std::max(vmax, std::hypot(vx[i], vy[i]));
  const double cell = (hi - lo) / std::sqrt(static_cast<double>(std::max<std::size_t>(px.size(), 1)));
  const double scale = vmax > 0 ? 0.9 * cell / vmax : 0.0;
  std::ofstream out = open_svg(path);
  header(out, title);
  axes(out, f, "y1", "y2");
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double x0 = f.px(px[i]), y0 = f.py(py[i]);
    const double x1 = f.px(px[i] + scale * vx[i]), y1 = f.py(py[i] + scale * vy[i]);
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1
        << "\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n"
        << "<circle cx=\"" << x1 << "\" cy=\"" << y1 << "\" r=\"1.5\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
}

void svg_histogram(const std::filesystem::path& path, const std::string& title, const std::vector<double>& values,
                   int bins) {
  std::vector<double> finite;
  std::copy_if(values.begin(), values.end(), std::back_inserter(finite), [](double v) { return std::isfinite(v); });
  if (finite.empty() || bins < 1) return;
  const auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
  const double lo = *mn, hi = *mx > *mn ? *mx : *mn + 1.0;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double v : finite) {
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  const double top = *std::max_element(counts.begin(), counts.end());
  const Frame f{lo, hi, 0.0, top};
  std::ofstream out = open_svg(path);
  header(out, title);
  const double bw = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double x0 = f.px(lo + b * bw), x1 = f.px(lo + (b + 1) * bw), y = f.py(counts[static_cast<std::size_t>(b)]);
    out << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << x1 - x0 << "\" height=\"" << f.py(0.0) - y
        << "\" fill=\"#1f77b4\" stroke=\"white\" stroke-width=\"0.3\"/>\n";
  }
  axes(out, f, "value", "count");
  out << "</svg>\n";
}

}  // namespace mdensity::cli
