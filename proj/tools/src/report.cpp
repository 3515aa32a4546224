#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace formulab::cli {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string split_cells(const metrics::SplitMetrics& m) {
    return pad(fixed(100.0 * m.accuracy, 2), 9) + pad(fixed(m.rmse, 4), 9) + pad(fixed(m.mae, 4), 9);
}

std::string escape_xml(const std::string& s) {
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

}  // namespace

void write_results_table(std::ostream& out, const std::vector<metrics::EvaluationReport>& reports) {
    std::size_t name_width = 6;
    for (const auto& r : reports) name_width = std::max(name_width, r.model.size() + 2);
    const std::string blank(name_width, ' ');
    out << pad("Model", name_width) << "| " << pad("Training set", 27) << "| " << pad("Validation set", 27) << "| "
        << "Test set\n";
    const std::string head = pad("Acc(%)", 9) + pad("RMSE", 9) + pad("MAE", 9);
    out << blank << "| " << head << "| " << head << "| " << head << '\n';
    out << std::string(name_width + 3 * 29, '-') << '\n';
    for (const auto& r : reports)
        out << pad(r.model, name_width) << "| " << split_cells(r.train) << "| " << split_cells(r.validation) << "| "
            << split_cells(r.test) << '\n';
    const std::string none = pad("-", 9) + pad("-", 9) + pad("-", 9);
    out << pad("svm", name_width) << "| " << none << "| " << none << "| " << none << "  (not implemented)\n";
}

void write_scatter_svg(std::ostream& out, const metrics::SplitMetrics& split, TaskKind task,
                       const std::string& title) {
    constexpr double kSize = 480.0, kMargin = 56.0, kPlot = kSize - 2 * kMargin;
    const bool ofdf = task == TaskKind::ofdf_like;
    double hi = 100.0;
    for (const auto& r : split.records) {
        for (double v : r.experimental) hi = std::max(hi, v);
        for (double v : r.predicted) hi = std::max(hi, v);
    }
    if (!ofdf) hi = std::max(hi, 100.0);
    double lo = 0.0;
    for (const auto& r : split.records)
        for (double v : r.predicted) lo = std::min(lo, v);
    const double span = hi - lo;
    auto px = [&](double v) { return fixed(kMargin + (v - lo) / span * kPlot, 2); };
    auto py = [&](double v) { return fixed(kSize - kMargin - (v - lo) / span * kPlot, 2); };
    auto line = [&](double x1, double y1, double x2, double y2, const std::string& attrs) {
        out << "  <line x1=\"" << px(x1) << "\" y1=\"" << py(y1) << "\" x2=\"" << px(x2) << "\" y2=\"" << py(y2)
            << "\" " << attrs << "/>\n";
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">" << escape_xml(title) << "</text>\n";
    line(lo, lo, hi, lo, "stroke=\"black\"");
    line(lo, lo, lo, hi, "stroke=\"black\"");
    for (int t = 0; t <= 5; ++t) {
        const double v = lo + span * t / 5.0;
        out << "  <text x=\"" << px(v) << "\" y=\"" << fixed(kSize - kMargin + 16, 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fixed(v, 0) << "</text>\n";
        out << "  <text x=\"" << fixed(kMargin - 6, 2) << "\" y=\"" << py(v)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fixed(v, 0) << "</text>\n";
    }
    const std::string unit = ofdf ? " (s)" : " (%)";
    out << "  <text x=\"" << kSize / 2 << "\" y=\"" << kSize - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Experimental" << unit << "</text>\n";
    out << "  <text x=\"16\" y=\"" << kSize / 2 << "\" transform=\"rotate(-90 16 " << kSize / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Predicted" << unit << "</text>\n";

    line(lo, lo, hi, hi, "class=\"identity\" stroke=\"gray\"");
    if (ofdf) {
        const double band = metrics::kDisintegrationToleranceSeconds;
        line(lo, lo + band, hi - band, hi, "class=\"band\" stroke=\"gray\" stroke-dasharray=\"4,4\"");
        line(lo + band, lo, hi, hi - band, "class=\"band\" stroke=\"gray\" stroke-dasharray=\"4,4\"");
    }
    for (const auto& r : split.records)
        for (std::size_t t = 0; t < r.experimental.size(); ++t)
            out << "  <circle cx=\"" << px(r.experimental[t]) << "\" cy=\"" << py(r.predicted[t])
                << "\" r=\"3\" fill=\"" << (r.pass ? "steelblue" : "firebrick") << "\"><title>"
                << escape_xml(r.record_id) << "</title></circle>\n";
    out << "</svg>\n";
}

}  // namespace formulab::cli
