#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attnsum/corpus.hpp"

namespace attnsum {

enum class Method { Attention, Frequency, Graph, Centroid };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct Summary {
  std::string note_id;
  Method method = Method::Attention;
  std::vector<std::size_t> selected;  // strictly increasing
  std::vector<double> scores;         // one per document sentence
  double threshold = 0.0;             // mean score for attention; 0 for budgeted methods
  std::vector<std::string> warnings;
};

/// Summary JSON with sorted keys: method, note_id, scores, selected,
/// sentences (the selected raw sentences in document order), threshold.
std::string summary_to_json(const Summary& summary, const Document& doc);

}  // namespace attnsum
