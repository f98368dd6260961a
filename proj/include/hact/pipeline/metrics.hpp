#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"

namespace hact::pipeline {

/// confusion[t][p]: samples of true class t predicted as p.
using Confusion = std::vector<std::vector<std::uint64_t>>;

struct Metrics {
  Confusion confusion;
  std::vector<double> precision, recall, f1;
  std::vector<std::uint64_t> support;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::uint64_t total = 0;

  std::size_t class_count() const noexcept { return confusion.size(); }
};

inline Confusion confusion_matrix(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                                  std::size_t classes) {
  require(truth.size() == pred.size(), Errc::shape_mismatch, "prediction and label counts differ");
  Confusion c(classes, std::vector<std::uint64_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] < classes && pred[i] < classes, Errc::out_of_bounds, "class id out of range");
    ++c[truth[i]][pred[i]];
  }
  return c;
}

/// Per-class precision / recall / F1 (0/0 taken as 0) and the support-weighted F1.
inline Metrics weighted_f1(const Confusion& confusion) {
  const std::size_t c = confusion.size();
  require(c >= 1, Errc::invalid_argument, "empty confusion matrix");
  for (const auto& row : confusion) require(row.size() == c, Errc::shape_mismatch, "confusion matrix must be square");

  Metrics m;
  m.confusion = confusion;
  m.precision.assign(c, 0.0);
  m.recall.assign(c, 0.0);
  m.f1.assign(c, 0.0);
  m.support.assign(c, 0);
  std::vector<std::uint64_t> predicted(c, 0);
  std::uint64_t correct = 0;
  for (std::size_t t = 0; t < c; ++t)
    for (std::size_t p = 0; p < c; ++p) {
      m.support[t] += confusion[t][p];
      predicted[p] += confusion[t][p];
      m.total += confusion[t][p];
      if (t == p) correct += confusion[t][p];
    }
  require(m.total >= 1, Errc::invalid_argument, "confusion matrix has no samples");

  for (std::size_t k = 0; k < c; ++k) {
    const double tp = static_cast<double>(confusion[k][k]);
    if (predicted[k]) m.precision[k] = tp / static_cast<double>(predicted[k]);
    if (m.support[k]) m.recall[k] = tp / static_cast<double>(m.support[k]);
    const double s = m.precision[k] + m.recall[k];
    if (s > 0.0) m.f1[k] = 2.0 * m.precision[k] * m.recall[k] / s;
    m.weighted_f1 += static_cast<double>(m.support[k]) / static_cast<double>(m.total) * m.f1[k];
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  return m;
}

inline Metrics evaluate_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> pred,
                                    std::size_t classes) {
  return weighted_f1(confusion_matrix(truth, pred, classes));
}

inline nlohmann::json to_json(const Metrics& m, std::span<const std::string> class_names = {}) {
  nlohmann::json j = {{"confusion", m.confusion}, {"precision", m.precision}, {"recall", m.recall},
                      {"f1", m.f1},               {"support", m.support},     {"weighted_f1", m.weighted_f1},
                      {"accuracy", m.accuracy},   {"total", m.total}};
  if (!class_names.empty()) j["classes"] = std::vector<std::string>(class_names.begin(), class_names.end());
  return j;
}

/// Confusion counts with per-class recall (rows) and precision (last line).
inline std::string format_confusion(const Metrics& m, std::span<const std::string> class_names = {}) {
  const std::size_t c = m.class_count();
  auto name = [&](std::size_t k) { return k < class_names.size() ? class_names[k] : std::to_string(k); };
  std::size_t w = 9;
  for (std::size_t k = 0; k < c; ++k) w = std::max(w, name(k).size() + 1);
  std::ostringstream os;
  os << std::setw(static_cast<int>(w)) << "true\\pred";
  for (std::size_t p = 0; p < c; ++p) os << std::setw(static_cast<int>(w)) << name(p);
  os << std::setw(9) << "recall" << "\n";
  os << std::fixed << std::setprecision(3);
  for (std::size_t t = 0; t < c; ++t) {
    os << std::setw(static_cast<int>(w)) << name(t);
    for (std::size_t p = 0; p < c; ++p) os << std::setw(static_cast<int>(w)) << m.confusion[t][p];
    os << std::setw(9) << m.recall[t] << "\n";
  }
  os << std::setw(static_cast<int>(w)) << "precision";
  for (std::size_t p = 0; p < c; ++p) os << std::setw(static_cast<int>(w)) << m.precision[p];
  os << "\n";
  os << "weighted F1 " << std::setprecision(4) << m.weighted_f1 << "  accuracy " << m.accuracy << "\n";
  return os.str();
}

}  // namespace hact::pipeline
