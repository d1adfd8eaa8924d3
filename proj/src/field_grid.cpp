#include "atmplace/field_grid.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "atmplace/errors.hpp"

namespace atmplace {

namespace {

void append_double(std::string& out, double v) {
  std::array<char, 32> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

}  // namespace

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

FieldGrid::FieldGrid(int nx, int ny, double width, double height, double fill)
    : nx_(nx), ny_(ny), dx_(width / nx), dy_(height / ny),
      values_(static_cast<std::size_t>(nx) * ny, fill) {
  if (nx <= 0 || ny <= 0) throw DomainError("FieldGrid: nx and ny must be positive");
  if (!(width > 0) || !(height > 0)) throw DomainError("FieldGrid: extent must be positive");
}

double FieldGrid::max() const {
  if (values_.empty()) throw DomainError("empty field");
  return *std::max_element(values_.begin(), values_.end());
}

double FieldGrid::min() const {
  if (values_.empty()) throw DomainError("empty field");
  return *std::min_element(values_.begin(), values_.end());
}

double warpage_metric(const FieldGrid& field) {
  if (field.empty()) throw DomainError("warpage_metric: empty grid");
  auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  return *hi - *lo;
}

double field_mae(const FieldGrid& a, const FieldGrid& b) {
  if (!a.same_shape(b)) throw DomainError("field_mae: shape mismatch");
  if (a.empty()) throw DomainError("field_mae: empty grid");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a.values()[k] - b.values()[k]);
  return s / static_cast<double>(a.size());
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DomainError("pearson: size mismatch");
  const std::size_t n = a.size();
  if (n == 0) throw DegenerateField("pearson: empty input");
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a[k] - ma, db = b[k] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) throw DegenerateField("pearson: zero-variance input");
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double field_pearson(const FieldGrid& a, const FieldGrid& b) {
  if (!a.same_shape(b)) throw DomainError("field_pearson: shape mismatch");
  return pearson(a.values(), b.values());
}

FieldGrid detrend_plane(const FieldGrid& f) {
  // Normal equations in coordinates centered on the grid, which are orthogonal
  // for a full uniform grid.
  const double cx = f.width() / 2, cy = f.height() / 2;
  double s0 = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int iy = 0; iy < f.ny(); ++iy) {
    for (int ix = 0; ix < f.nx(); ++ix) {
      const double x = f.x_center(ix) - cx, y = f.y_center(iy) - cy;
      const double v = f.at(ix, iy);
      s0 += v;
      sx += v * x;
      sy += v * y;
      sxx += x * x;
      syy += y * y;
    }
  }
  const double n = static_cast<double>(f.size());
  const double p0 = s0 / n;
  const double p1 = sxx > 0 ? sx / sxx : 0.0;
  const double p2 = syy > 0 ? sy / syy : 0.0;
  FieldGrid out = f;
  for (int iy = 0; iy < f.ny(); ++iy) {
    for (int ix = 0; ix < f.nx(); ++ix) {
      const double x = f.x_center(ix) - cx, y = f.y_center(iy) - cy;
      out.at(ix, iy) = f.at(ix, iy) - (p0 + p1 * x + p2 * y);
    }
  }
  return out;
}

std::string field_to_csv(const FieldGrid& f) {
  std::string out;
  out.reserve(f.size() * 20);
  for (int iy = 0; iy < f.ny(); ++iy) {
    for (int ix = 0; ix < f.nx(); ++ix) {
      if (ix) out.push_back(',');
      append_double(out, f.at(ix, iy));
    }
    out.push_back('\n');
  }
  return out;
}

FieldGrid field_from_csv(const std::string& text, double width, double height) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      auto res = std::from_chars(line.data() + pos, line.data() + end, v);
      if (res.ec != std::errc() || res.ptr != line.data() + end)
        throw ParseError("csv line " + std::to_string(lineno) + ": bad number");
      row.push_back(v);
      pos = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("csv line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("csv: no data");
  FieldGrid f(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), width, height);
  for (int iy = 0; iy < f.ny(); ++iy)
    for (int ix = 0; ix < f.nx(); ++ix) f.at(ix, iy) = rows[iy][ix];
  return f;
}

std::string field_to_svg(const FieldGrid& f, const std::string& title) {
  const double lo = f.min(), hi = f.max();
  const double span = hi > lo ? hi - lo : 1.0;
  const int cell = 6;
  const int w = f.nx() * cell, h = f.ny() * cell;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h + 40
    << "\">\n";
  for (int iy = 0; iy < f.ny(); ++iy) {
    for (int ix = 0; ix < f.nx(); ++ix) {
      const int g = static_cast<int>(std::lround(255.0 * (f.at(ix, iy) - lo) / span));
      // y flipped so that row 0 is drawn at the bottom
      s << "<rect x=\"" << ix * cell << "\" y=\"" << (f.ny() - 1 - iy) * cell << "\" width=\""
        << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << g << ',' << g << ',' << g
        << ")\"/>\n";
    }
  }
  s << "<text x=\"2\" y=\"" << h + 16 << "\" font-size=\"12\">" << title << "</text>\n";
  s << "<text x=\"2\" y=\"" << h + 32 << "\" font-size=\"12\">min " << lo << "  max " << hi
    << "</text>\n</svg>\n";
  return s.str();
}

}  // namespace atmplace
