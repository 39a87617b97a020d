#include "attnsum/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "attnsum/error.hpp"

namespace attnsum {
namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -INFINITY;
    if (p == 1.0) return INFINITY;
    throw Error(ErrorCode::InvalidArgument, "probability outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

std::vector<double> quantile_transform(const std::vector<double>& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no scores to transform");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j);
    const double z = normal_quantile((rank + 0.5) / static_cast<double>(n));
    for (std::size_t t = i; t <= j; ++t) out[order[t]] = z;
    i = j + 1;
  }
  return out;
}

HeatmapDoc make_heatmap(std::string note_id, std::vector<std::string> sentences,
                        std::vector<double> raw_scores) {
  if (sentences.size() != raw_scores.size())
    throw Error(ErrorCode::DimensionMismatch, "one score per sentence required");
  HeatmapDoc doc;
  doc.note_id = std::move(note_id);
  doc.sentences = std::move(sentences);
  doc.raw_scores = std::move(raw_scores);
  doc.transformed = quantile_transform(doc.raw_scores);

  const auto [lo, hi] = std::minmax_element(doc.transformed.begin(), doc.transformed.end());
  const double min = *lo;
  const double span = *hi - *lo;
  doc.display.reserve(doc.transformed.size());
  for (double t : doc.transformed) doc.display.push_back(span > 0.0 ? (t - min) / span : 1.0);
  return doc;
}

std::string emit_neatvision_json(const HeatmapDoc& doc) {
  std::string out = "{\"attention\": [";
  for (std::size_t i = 0; i < doc.display.size(); ++i) out += (i ? ", " : "") + fixed6(doc.display[i]);
  out += "], \"id\": " + nlohmann::json(doc.note_id).dump();
  out += ", \"label\": 0, \"prediction\": 0, \"text\": [";
  for (std::size_t i = 0; i < doc.sentences.size(); ++i)
    out += (i ? ", " : "") + nlohmann::json(doc.sentences[i]).dump();
  out += "]}\n";
  return out;
}

std::string emit_html(const HeatmapDoc& doc) {
  std::string out;
  out += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>" + html_escape(doc.note_id) + "</title>\n</head>\n";
  out += "<body style=\"font-family: sans-serif; line-height: 1.8; max-width: 60em; margin: 2em auto;\">\n";
  out += "<h1 style=\"font-size: 1.2em;\">" + html_escape(doc.note_id) + "</h1>\n<p>\n";
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    out += "<span style=\"background-color: rgba(255, 0, 0, " + fixed6(doc.display[i]) +
           ");\" title=\"score " + fixed6(doc.raw_scores[i]) + "\">" + html_escape(doc.sentences[i]) +
           "</span>\n";
  }
  out += "</p>\n</body>\n</html>\n";
  return out;
}

}  // namespace attnsum
