#include "expca/axes.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace expca {

TrainingMatrix build_training(const CenteredMatrix &centered, const StudyDesign &design,
                              const TrainingSpec &spec) {
  std::vector<std::string> included = spec.included_groups;
  if (included.empty()) included = design.group_order;
  if (included.empty()) fail("build_training: design has no groups");
  for (const auto &group : spec.raw_groups) {
    if (std::find(included.begin(), included.end(), group) == included.end())
      fail("build_training: raw group '" + group + "' is not among the included groups");
  }

  std::unordered_map<std::string, int> obs_row;
  for (int i = 0; i < centered.n(); ++i)
    obs_row.emplace(centered.observation_ids[static_cast<std::size_t>(i)], i);

  struct Row {
    std::string label;
    Vector values;
  };
  std::vector<Row> rows;
  for (const auto &group : included) {
    if (!design.has_group(group)) fail("build_training: group '" + group + "' is not in the design");
    std::vector<int> member_rows;
    for (int i = 0; i < centered.n(); ++i) {
      const auto &obs = centered.observation_ids[static_cast<std::size_t>(i)];
      if (design.group_of.at(obs) == group) member_rows.push_back(i);
    }
    if (member_rows.empty())
      fail("build_training: group '" + group + "' has no observation in the matrix");
    if (spec.raw_groups.count(group)) {
      for (const int i : member_rows)
        rows.push_back({centered.observation_ids[static_cast<std::size_t>(i)],
                        centered.values.row(i).transpose()});
    } else {
      Vector mean = Vector::Zero(centered.m());
      for (const int i : member_rows) mean += centered.values.row(i).transpose();
      mean /= static_cast<double>(member_rows.size());
      rows.push_back({group, std::move(mean)});
    }
  }
  if (rows.empty()) fail("build_training: training matrix is empty");

  std::vector<int> kept_columns;
  TrainingMatrix training;
  if (spec.variable_filter) {
    for (int j = 0; j < centered.m(); ++j) {
      const auto &id = centered.variable_ids[static_cast<std::size_t>(j)];
      if (spec.variable_filter->count(id)) {
        kept_columns.push_back(j);
        training.variable_ids.push_back(id);
      }
    }
    if (kept_columns.empty()) fail("build_training: variable filter removed every column");
  } else {
    training.variable_ids = centered.variable_ids;
    kept_columns.resize(static_cast<std::size_t>(centered.m()));
    for (int j = 0; j < centered.m(); ++j) kept_columns[static_cast<std::size_t>(j)] = j;
  }

  training.unit_labels.reserve(rows.size());
  training.values = Matrix(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(kept_columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    training.unit_labels.push_back(rows[r].label);
    for (std::size_t c = 0; c < kept_columns.size(); ++c)
      training.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r].values[kept_columns[c]];
  }
  return training;
}

AxesModel fit(const TrainingMatrix &training, const ReferenceVector &reference,
              std::optional<int> max_rank) {
  if (training.values.rows() < 1 || training.values.cols() < 1)
    fail("fit: training matrix is empty");
  if (!training.values.allFinite()) fail("fit: training matrix has non-finite entries");
  if ((training.values.array() == 0.0).all()) fail("fit: training matrix is all zeros");

  // The reference may cover more variables than the (possibly filtered)
  // training matrix; keep the entries for the canonical variables.
  std::unordered_map<std::string, double> ref_by_id;
  for (std::size_t i = 0; i < reference.variable_ids.size(); ++i)
    ref_by_id.emplace(reference.variable_ids[i], reference.values[static_cast<Eigen::Index>(i)]);

  AxesModel model;
  model.variable_ids = training.variable_ids;
  model.reference.variable_ids = training.variable_ids;
  model.reference.values = Vector::Zero(static_cast<Eigen::Index>(training.variable_ids.size()));
  for (std::size_t j = 0; j < training.variable_ids.size(); ++j) {
    const auto it = ref_by_id.find(training.variable_ids[j]);
    if (it == ref_by_id.end())
      fail("fit: reference has no entry for variable '" + training.variable_ids[j] + "'");
    model.reference.values[static_cast<Eigen::Index>(j)] = it->second;
  }

  const SvdFactors factors = canonical_signs(svd(training.values, max_rank));
  model.right = factors.right;
  model.singulars = factors.singulars;
  model.left = factors.left;
  model.unit_labels = training.unit_labels;
  model.n_T = static_cast<int>(training.values.rows());
  model.format_version = 1;
  return model;
}

CenteredMatrix center_for_model(const ExpressionMatrix &matrix, const AxesModel &model) {
  std::unordered_map<std::string, double> ref_by_id;
  for (std::size_t i = 0; i < model.reference.variable_ids.size(); ++i)
    ref_by_id.emplace(model.reference.variable_ids[i],
                      model.reference.values[static_cast<Eigen::Index>(i)]);

  // Variables unknown to the model are centered against 0 here; they are
  // dropped by the alignment below, so the value never matters.
  ReferenceVector matrix_reference;
  matrix_reference.variable_ids = matrix.variable_ids;
  matrix_reference.values = Vector::Zero(matrix.m());
  for (int j = 0; j < matrix.m(); ++j) {
    const auto it = ref_by_id.find(matrix.variable_ids[static_cast<std::size_t>(j)]);
    if (it != ref_by_id.end()) matrix_reference.values[j] = it->second;
  }
  return align_variables(center(matrix, matrix_reference), model.variable_ids);
}

}  // namespace expca
