#pragma once

#include <string>
#include <vector>

namespace attnsum {

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step against erfc; absolute error well under 1e-9 on (0, 1).
double normal_quantile(double p);

/// Maps scores onto standard normal quantiles by rank: ties share their
/// average rank r (0-based) and land on normal_quantile((r + 0.5) / n).
std::vector<double> quantile_transform(const std::vector<double>& scores);

struct HeatmapDoc {
  std::string note_id;
  std::vector<std::string> sentences;
  std::vector<double> raw_scores;
  std::vector<double> transformed;
  std::vector<double> display;  // min-max of `transformed`, in [0, 1]
};

/// Builds the heat-map record. When every transformed value is equal (one
/// sentence, or all scores tied) the display value is 1.0 throughout.
HeatmapDoc make_heatmap(std::string note_id, std::vector<std::string> sentences,
                        std::vector<double> raw_scores);

/// {"attention", "id", "label", "prediction", "text"} in that key order,
/// attention printed with six decimals. Ends with a newline.
std::string emit_neatvision_json(const HeatmapDoc& doc);

/// Self-contained page; each sentence is shaded red with opacity equal to its
/// display value.
std::string emit_html(const HeatmapDoc& doc);

}  // namespace attnsum
