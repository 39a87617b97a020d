#include "attnsum/summary.hpp"

#include <json.hpp>

#include "attnsum/error.hpp"

namespace attnsum {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Attention: return "attention";
    case Method::Frequency: return "frequency";
    case Method::Graph: return "graph";
    case Method::Centroid: return "centroid";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods())
    if (to_string(m) == name) return m;
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::Attention, Method::Frequency, Method::Graph,
                                              Method::Centroid};
  return methods;
}

std::string summary_to_json(const Summary& summary, const Document& doc) {
  nlohmann::json sentences = nlohmann::json::array();
  for (auto i : summary.selected) {
    if (i >= doc.sentences.size())
      throw Error(ErrorCode::InvalidArgument, "selected index out of range");
    sentences.push_back(doc.sentences[i].raw);
  }
  const nlohmann::json j = {{"note_id", summary.note_id},
                            {"method", std::string(to_string(summary.method))},
                            {"threshold", summary.threshold},
                            {"selected", summary.selected},
                            {"scores", summary.scores},
                            {"sentences", sentences}};
  return j.dump(2) + "\n";
}

}  // namespace attnsum
