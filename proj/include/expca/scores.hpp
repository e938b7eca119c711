#ifndef EXPCA_SCORES_HPP
#define EXPCA_SCORES_HPP

#include <string>
#include <utility>
#include <vector>

#include "expca/axes.hpp"
#include "expca/data_model.hpp"

namespace expca {

enum class ScoreKind { Observation, Variable };

struct ScoreSet {
  std::vector<std::string> row_labels;
  Matrix scores;  // r x k
  ScoreKind kind = ScoreKind::Observation;
  bool scaled = false;
  std::vector<int> effective_counts;  // observation kind only
  int n_T = 0;
  // Observations whose m_i was 0 when scaling (their rows are zero).
  std::vector<std::string> zero_count_warnings;

  int rows() const { return static_cast<int>(scores.rows()); }
  int k() const { return static_cast<int>(scores.cols()); }
};

struct ClassificationResult {
  std::string observation_id;
  std::string nearest_unit;
  // Unit label -> Euclidean distance in scaled-score space, training-row order.
  std::vector<std::pair<std::string, double>> distances;
};

struct BiplotTable {
  std::vector<std::string> labels;
  std::vector<ScoreKind> kinds;
  Matrix coords;  // observation rows first (times obs_multiplier), then variables
  double obs_multiplier = 1.0;
};

// Y = X * V_T. The centered matrix must already be aligned to the model's
// variable order.
ScoreSet observation_scores(const CenteredMatrix &centered, const AxesModel &model);

// Z = m_i^(-1/2) * Y per row; rows with m_i = 0 stay zero and are flagged.
ScoreSet scale_observation_scores(const ScoreSet &raw);

// Y_v = V_T * diag(D_T).
ScoreSet variable_scores(const AxesModel &model);

// Z_v = n_T^(-1/2) * Y_v.
ScoreSet scale_variable_scores(const ScoreSet &raw, int n_T);

enum class FluctuationMode {
  ScatterSd,   // SD of the 2-D scatter about the group centroid
  DistanceSd,  // SD of the distances to the group centroid
};

// Root mean square over groups (size >= 2) of the within-group SD of the
// (sPC1, sPC2) scatter.
double fluctuation(const ScoreSet &scaled, const StudyDesign &design,
                   FluctuationMode mode = FluctuationMode::ScatterSd);

// Nearest training unit in the first axes_used axes of scaled-score space.
// Unit scores are m^(-1/2) * U_T * diag(D_T); ties go to the earlier
// training row.
std::vector<ClassificationResult> classify(const ScoreSet &scaled, const AxesModel &model,
                                           int axes_used);

BiplotTable biplot_table(const ScoreSet &obs_scaled, const ScoreSet &var_scaled,
                         double obs_multiplier = 1.0);

}  // namespace expca

#endif
