#include "atcd/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "atcd/errors.hpp"

namespace atcd::report {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kPaletteSize = 6;

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 64.0, kRight = 24.0, kTop = 40.0, kBottom = 48.0;

// Fixed two-decimal pixel coordinates keep the files small and stable.
std::string px(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0, hi = 1.0;
    double scale(double v, double a, double b) const {
        if (hi == lo) return (a + b) / 2.0;
        return a + (v - lo) / (hi - lo) * (b - a);
    }
};

Range pad(double lo, double hi) {
    if (lo > hi) std::swap(lo, hi);
    double span = hi - lo;
    if (span <= 0.0) span = std::abs(hi) > 0.0 ? std::abs(hi) : 1.0;
    return {lo - 0.05 * span, hi + 0.05 * span};
}

void axes(std::ostream& out, const std::string& title, const std::string& x_label,
          const std::string& y_label, const Range& xr, const Range& yr) {
    out << "<rect x=\"0\" y=\"0\" width=\"" << px(kWidth) << "\" height=\"" << px(kHeight)
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << px(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-size=\"15\" font-family=\"sans-serif\">" << xml_escape(title) << "</text>\n";
    out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kHeight - kBottom) << "\" x2=\""
        << px(kWidth - kRight) << "\" y2=\"" << px(kHeight - kBottom)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kTop) << "\" x2=\"" << px(kLeft)
        << "\" y2=\"" << px(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double f = static_cast<double>(i) / 4.0;
        const double xv = xr.lo + f * (xr.hi - xr.lo);
        const double yv = yr.lo + f * (yr.hi - yr.lo);
        const double xp = kLeft + f * (kWidth - kLeft - kRight);
        const double yp = (kHeight - kBottom) - f * (kHeight - kTop - kBottom);
        out << "<line x1=\"" << px(xp) << "\" y1=\"" << px(kHeight - kBottom) << "\" x2=\""
            << px(xp) << "\" y2=\"" << px(kHeight - kBottom + 4) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(xp) << "\" y=\"" << px(kHeight - kBottom + 16)
            << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
            << format_number(std::round(xv * 100.0) / 100.0) << "</text>\n";
        out << "<line x1=\"" << px(kLeft - 4) << "\" y1=\"" << px(yp) << "\" x2=\"" << px(kLeft)
            << "\" y2=\"" << px(yp) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(yp + 3)
            << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">"
            << format_number(std::round(yv * 100.0) / 100.0) << "</text>\n";
    }
    out << "<text x=\"" << px((kLeft + kWidth - kRight) / 2) << "\" y=\"" << px(kHeight - 10)
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << xml_escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << px((kTop + kHeight - kBottom) / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
        << "transform=\"rotate(-90 16 " << px((kTop + kHeight - kBottom) / 2) << ")\">"
        << xml_escape(y_label) << "</text>\n";
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_field(cells[i]);
    }
    out_ << "\n";
}

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw data_error("cannot open chart for writing: " + path.string());
    double xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (std::isnan(s.ys[i])) continue;
            if (first) {
                xlo = xhi = s.xs[i];
                ylo = yhi = s.ys[i];
                first = false;
            } else {
                xlo = std::min(xlo, s.xs[i]);
                xhi = std::max(xhi, s.xs[i]);
                ylo = std::min(ylo, s.ys[i]);
                yhi = std::max(yhi, s.ys[i]);
            }
        }
    const Range xr = pad(xlo, xhi);
    const Range yr = pad(ylo, yhi);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\""
        << px(kHeight) << "\" viewBox=\"0 0 " << px(kWidth) << " " << px(kHeight) << "\">\n";
    axes(out, title, x_label, y_label, xr, yr);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        std::ostringstream points;
        bool open = false;
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (std::isnan(s.ys[i])) {
                // Gap: close the current segment.
                if (open) {
                    out << "<polyline fill=\"none\" stroke=\"" << color
                        << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";
                    points.str("");
                    open = false;
                }
                continue;
            }
            const double xp = xr.scale(s.xs[i], kLeft, kWidth - kRight);
            const double yp = yr.scale(s.ys[i], kHeight - kBottom, kTop);
            if (open) points << ' ';
            points << px(xp) << ',' << px(yp);
            open = true;
        }
        if (open)
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";
        const double ly = kTop + 14.0 * static_cast<double>(si);
        out << "<line x1=\"" << px(kWidth - kRight - 110) << "\" y1=\"" << px(ly) << "\" x2=\""
            << px(kWidth - kRight - 92) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << px(kWidth - kRight - 88) << "\" y=\"" << px(ly + 3)
            << "\" font-size=\"10\" font-family=\"sans-serif\">" << xml_escape(s.name)
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw data_error("failed writing chart: " + path.string());
}

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& y_label, const std::vector<std::string>& labels,
                     const std::vector<double>& values, const std::vector<double>& errors) {
    if (labels.size() != values.size())
        throw std::invalid_argument("bar chart labels/values length mismatch");
    if (!errors.empty() && errors.size() != values.size())
        throw std::invalid_argument("bar chart errors length mismatch");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw data_error("cannot open chart for writing: " + path.string());
    double ylo = 0.0, yhi = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double e = errors.empty() ? 0.0 : errors[i];
        ylo = std::min(ylo, values[i] - e);
        yhi = std::max(yhi, values[i] + e);
    }
    const Range yr = pad(ylo, yhi);
    const Range xr{0.0, static_cast<double>(values.size())};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\""
        << px(kHeight) << "\" viewBox=\"0 0 " << px(kWidth) << " " << px(kHeight) << "\">\n";
    axes(out, title, "", y_label, xr, yr);
    const double slot = (kWidth - kLeft - kRight) / std::max<std::size_t>(values.size(), 1);
    const double y_zero = yr.scale(std::max(0.0, yr.lo), kHeight - kBottom, kTop);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x0 = kLeft + slot * (static_cast<double>(i) + 0.15);
        const double bar_w = slot * 0.7;
        const double yv = yr.scale(values[i], kHeight - kBottom, kTop);
        const double top = std::min(yv, y_zero);
        const double h = std::abs(yv - y_zero);
        out << "<rect x=\"" << px(x0) << "\" y=\"" << px(top) << "\" width=\"" << px(bar_w)
            << "\" height=\"" << px(h) << "\" fill=\"" << kPalette[0] << "\"/>\n";
        if (!errors.empty() && errors[i] > 0.0) {
            const double cx = x0 + bar_w / 2.0;
            const double ylo_p = yr.scale(values[i] - errors[i], kHeight - kBottom, kTop);
            const double yhi_p = yr.scale(values[i] + errors[i], kHeight - kBottom, kTop);
            out << "<line x1=\"" << px(cx) << "\" y1=\"" << px(ylo_p) << "\" x2=\"" << px(cx)
                << "\" y2=\"" << px(yhi_p) << "\" stroke=\"black\"/>\n";
        }
        out << "<text x=\"" << px(x0 + bar_w / 2.0) << "\" y=\"" << px(kHeight - kBottom + 28)
            << "\" text-anchor=\"middle\" font-size=\"9\" font-family=\"sans-serif\" "
            << "transform=\"rotate(-30 " << px(x0 + bar_w / 2.0) << " "
            << px(kHeight - kBottom + 28) << ")\">" << xml_escape(labels[i]) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw data_error("failed writing chart: " + path.string());
}

}  // namespace atcd::report
