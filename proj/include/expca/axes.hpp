#ifndef EXPCA_AXES_HPP
#define EXPCA_AXES_HPP

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "expca/data_model.hpp"
#include "expca/svd.hpp"

namespace expca {

struct TrainingSpec {
  // Groups contributing training rows, in row order; empty means all groups
  // in design order.
  std::vector<std::string> included_groups;
  // Groups whose individual observations replace the group mean.
  std::set<std::string> raw_groups;
  std::optional<VariableSet> variable_filter;
};

struct TrainingMatrix {
  std::vector<std::string> unit_labels;  // group name, or observation ID for raw rows
  Matrix values;                         // n_T x m
  std::vector<std::string> variable_ids;
};

// The persistable fit: rotation, singular values, left vectors, reference
// and metadata. Sharing this file is what lets observations from other
// experiments be placed on the same axes.
struct AxesModel {
  std::vector<std::string> variable_ids;  // canonical order
  ReferenceVector reference;
  Matrix right;                           // m x k (V_T)
  Vector singulars;                       // k (D_T)
  Matrix left;                            // n_T x k (U_T)
  std::vector<std::string> unit_labels;
  int n_T = 0;
  int format_version = 1;

  int k() const { return static_cast<int>(singulars.size()); }
  int m() const { return static_cast<int>(right.rows()); }
};

TrainingMatrix build_training(const CenteredMatrix &centered, const StudyDesign &design,
                              const TrainingSpec &spec);

AxesModel fit(const TrainingMatrix &training, const ReferenceVector &reference,
              std::optional<int> max_rank = std::nullopt);

void save_model(const AxesModel &model, std::ostream &out);
// Returns the number of bytes written.
std::size_t save_model_file(const AxesModel &model, const std::string &path);

AxesModel load_model(std::istream &in);
AxesModel load_model_file(const std::string &path);

// Center a raw matrix against the model's stored reference and align its
// columns to the model's canonical variable order. Variables the model does
// not know are dropped; model variables the matrix lacks become zero
// columns excluded from m_i.
CenteredMatrix center_for_model(const ExpressionMatrix &matrix, const AxesModel &model);

}  // namespace expca

#endif
