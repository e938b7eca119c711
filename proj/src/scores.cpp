#include "expca/scores.hpp"

#include <cmath>
#include <map>

namespace expca {

ScoreSet observation_scores(const CenteredMatrix &centered, const AxesModel &model) {
  if (centered.variable_ids != model.variable_ids)
    fail("observation_scores: matrix is not aligned to the model's variables");

  ScoreSet scores;
  scores.row_labels = centered.observation_ids;
  scores.scores = centered.values * model.right;
  scores.kind = ScoreKind::Observation;
  scores.scaled = false;
  scores.effective_counts = centered.effective_counts;
  scores.n_T = model.n_T;
  return scores;
}

ScoreSet scale_observation_scores(const ScoreSet &raw) {
  if (raw.kind != ScoreKind::Observation)
    fail("scale_observation_scores: score set is not observation-kind");
  if (raw.scaled) fail("scale_observation_scores: scores are already scaled");
  if (raw.effective_counts.size() != static_cast<std::size_t>(raw.rows()))
    fail("scale_observation_scores: effective item counts are missing");

  ScoreSet scaled = raw;
  scaled.scaled = true;
  for (int i = 0; i < raw.rows(); ++i) {
    const int m_i = raw.effective_counts[static_cast<std::size_t>(i)];
    if (m_i == 0) {
      scaled.scores.row(i).setZero();
      scaled.zero_count_warnings.push_back(raw.row_labels[static_cast<std::size_t>(i)]);
    } else {
      scaled.scores.row(i) /= std::sqrt(static_cast<double>(m_i));
    }
  }
  return scaled;
}

ScoreSet variable_scores(const AxesModel &model) {
  ScoreSet scores;
  scores.row_labels = model.variable_ids;
  scores.scores = model.right * model.singulars.asDiagonal();
  scores.kind = ScoreKind::Variable;
  scores.scaled = false;
  scores.n_T = model.n_T;
  return scores;
}

ScoreSet scale_variable_scores(const ScoreSet &raw, int n_T) {
  if (raw.kind != ScoreKind::Variable)
    fail("scale_variable_scores: score set is not variable-kind");
  if (raw.scaled) fail("scale_variable_scores: scores are already scaled");
  if (n_T < 1) fail("scale_variable_scores: n_T must be at least 1");

  ScoreSet scaled = raw;
  scaled.scaled = true;
  scaled.n_T = n_T;
  scaled.scores /= std::sqrt(static_cast<double>(n_T));
  return scaled;
}

double fluctuation(const ScoreSet &scaled, const StudyDesign &design, FluctuationMode mode) {
  if (scaled.kind != ScoreKind::Observation) fail("fluctuation: needs observation scores");
  if (!scaled.scaled) fail("fluctuation: needs scaled scores");
  if (scaled.k() < 2) fail("fluctuation: needs at least two axes (sPC1, sPC2)");

  // Group rows in design group order.
  std::map<std::string, std::vector<int>> rows_by_group;
  for (int i = 0; i < scaled.rows(); ++i) {
    const auto &group = design.group(scaled.row_labels[static_cast<std::size_t>(i)]);
    rows_by_group[group].push_back(i);
  }

  double sum_sq = 0.0;
  int qualifying = 0;
  for (const auto &[group, rows] : rows_by_group) {
    const int n_g = static_cast<int>(rows.size());
    if (n_g < 2) continue;
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const int i : rows) centroid += scaled.scores.row(i).head<2>().transpose();
    centroid /= static_cast<double>(n_g);

    double sd_sq = 0.0;
    if (mode == FluctuationMode::ScatterSd) {
      for (const int i : rows)
        sd_sq += (scaled.scores.row(i).head<2>().transpose() - centroid).squaredNorm();
      sd_sq /= static_cast<double>(n_g - 1);
    } else {
      std::vector<double> distances;
      distances.reserve(static_cast<std::size_t>(n_g));
      double mean_distance = 0.0;
      for (const int i : rows) {
        const double d = (scaled.scores.row(i).head<2>().transpose() - centroid).norm();
        distances.push_back(d);
        mean_distance += d;
      }
      mean_distance /= static_cast<double>(n_g);
      for (const double d : distances) sd_sq += (d - mean_distance) * (d - mean_distance);
      sd_sq /= static_cast<double>(n_g - 1);
    }
    sum_sq += sd_sq;
    ++qualifying;
  }
  if (qualifying == 0) fail("fluctuation: no group has two or more observations");
  return std::sqrt(sum_sq / static_cast<double>(qualifying));
}

std::vector<ClassificationResult> classify(const ScoreSet &scaled, const AxesModel &model,
                                           int axes_used) {
  if (scaled.kind != ScoreKind::Observation) fail("classify: needs observation scores");
  if (!scaled.scaled) fail("classify: needs scaled scores");
  if (axes_used < 1) fail("classify: axes_used must be at least 1");
  if (axes_used > model.k() || axes_used > scaled.k())
    fail("classify: axes_used exceeds the model's component count");

  // Training units live at m^(-1/2) * U_T * D_T in scaled-score space.
  const Matrix unit_scores = (model.left * model.singulars.asDiagonal()) /
                             std::sqrt(static_cast<double>(model.m()));

  std::vector<ClassificationResult> results;
  results.reserve(static_cast<std::size_t>(scaled.rows()));
  for (int i = 0; i < scaled.rows(); ++i) {
    ClassificationResult result;
    result.observation_id = scaled.row_labels[static_cast<std::size_t>(i)];
    int best = 0;
    double best_distance = 0.0;
    for (int u = 0; u < unit_scores.rows(); ++u) {
      const double distance = (scaled.scores.row(i).head(axes_used) -
                               unit_scores.row(u).head(axes_used))
                                  .norm();
      result.distances.emplace_back(model.unit_labels[static_cast<std::size_t>(u)], distance);
      if (u == 0 || distance < best_distance) {
        best = u;
        best_distance = distance;
      }
    }
    result.nearest_unit = model.unit_labels[static_cast<std::size_t>(best)];
    results.push_back(std::move(result));
  }
  return results;
}

BiplotTable biplot_table(const ScoreSet &obs_scaled, const ScoreSet &var_scaled,
                         double obs_multiplier) {
  if (obs_scaled.kind != ScoreKind::Observation || !obs_scaled.scaled)
    fail("biplot_table: first argument must be scaled observation scores");
  if (var_scaled.kind != ScoreKind::Variable || !var_scaled.scaled)
    fail("biplot_table: second argument must be scaled variable scores");
  if (obs_scaled.k() != var_scaled.k())
    fail("biplot_table: score sets have mismatched component counts");
  if (obs_multiplier < 1.0) fail("biplot_table: obs_multiplier must be at least 1");

  BiplotTable table;
  table.obs_multiplier = obs_multiplier;
  const int k = obs_scaled.k();
  table.coords = Matrix(obs_scaled.rows() + var_scaled.rows(), k);
  for (int i = 0; i < obs_scaled.rows(); ++i) {
    table.labels.push_back(obs_scaled.row_labels[static_cast<std::size_t>(i)]);
    table.kinds.push_back(ScoreKind::Observation);
    table.coords.row(i) = obs_scaled.scores.row(i) * obs_multiplier;
  }
  for (int i = 0; i < var_scaled.rows(); ++i) {
    table.labels.push_back(var_scaled.row_labels[static_cast<std::size_t>(i)]);
    table.kinds.push_back(ScoreKind::Variable);
    table.coords.row(obs_scaled.rows() + i) = var_scaled.scores.row(i);
  }
  return table;
}

}  // namespace expca
