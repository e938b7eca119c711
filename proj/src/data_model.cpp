#include "expca/data_model.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "text_utils.hpp"

namespace expca {

using detail::content_lines;
using detail::is_missing_marker;
using detail::parse_number;
using detail::split_tabs;

ReferencePolicy ReferencePolicy::global_mean() { return ReferencePolicy{}; }

ReferencePolicy ReferencePolicy::control(std::string group) {
  ReferencePolicy policy;
  policy.kind = ReferenceKind::ControlGroup;
  policy.control_group = std::move(group);
  return policy;
}

ReferencePolicy ReferencePolicy::external(std::vector<std::string> ids, Vector values) {
  if (static_cast<Eigen::Index>(ids.size()) != values.size())
    fail("external reference: id and value counts differ");
  ReferencePolicy policy;
  policy.kind = ReferenceKind::ExternalVector;
  policy.external_ids = std::move(ids);
  policy.external_values = std::move(values);
  return policy;
}

const std::string &StudyDesign::group(const std::string &observation_id) const {
  const auto it = group_of.find(observation_id);
  if (it == group_of.end()) fail("observation '" + observation_id + "' is not in the design");
  return it->second;
}

bool StudyDesign::has_group(const std::string &group_label) const {
  for (const auto &g : group_order)
    if (g == group_label) return true;
  return false;
}

std::vector<std::string> StudyDesign::members(const std::string &group_label) const {
  std::vector<std::string> result;
  for (const auto &obs : observation_ids)
    if (group_of.at(obs) == group_label) result.push_back(obs);
  return result;
}

ExpressionMatrix parse_matrix(std::istream &in) {
  const auto lines = content_lines(in);
  if (lines.empty()) fail("matrix file is empty");

  const auto header = split_tabs(lines[0].second);
  if (header.size() < 2) fail("matrix header needs at least one observation column");

  ExpressionMatrix matrix;
  matrix.observation_ids.assign(header.begin() + 1, header.end());
  std::unordered_set<std::string> seen_obs;
  for (std::size_t c = 0; c < matrix.observation_ids.size(); ++c) {
    const auto &id = matrix.observation_ids[c];
    if (id.empty()) fail("empty observation ID in header column " + std::to_string(c + 2));
    if (!seen_obs.insert(id).second)
      fail("duplicate observation ID '" + id + "' (header column " + std::to_string(c + 2) + ")");
  }

  const std::size_t n = matrix.observation_ids.size();
  const std::size_t m = lines.size() - 1;
  if (m == 0) fail("matrix has no variable rows");

  matrix.values = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  matrix.missing =
      BoolArray::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m), false);

  std::unordered_set<std::string> seen_vars;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto &[line_number, line] = lines[r];
    const auto cells = split_tabs(line);
    if (cells.size() != n + 1) {
      std::ostringstream msg;
      msg << "line " << line_number << " has " << cells.size() << " cells, expected " << n + 1;
      fail(msg.str());
    }
    const std::string &variable_id = cells[0];
    if (variable_id.empty()) fail("line " + std::to_string(line_number) + ": empty variable ID");
    if (!seen_vars.insert(variable_id).second)
      fail("duplicate variable ID '" + variable_id + "' (line " + std::to_string(line_number) +
           ")");
    matrix.variable_ids.push_back(variable_id);
    const Eigen::Index col = static_cast<Eigen::Index>(r - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const Eigen::Index row = static_cast<Eigen::Index>(c - 1);
      if (is_missing_marker(cells[c])) {
        matrix.missing(row, col) = true;
      } else {
        matrix.values(row, col) = parse_number(cells[c], line_number, static_cast<int>(c + 1));
      }
    }
  }
  return matrix;
}

ExpressionMatrix parse_matrix_text(const std::string &text) {
  std::istringstream in(text);
  return parse_matrix(in);
}

StudyDesign parse_design(std::istream &in, bool has_header) {
  auto lines = content_lines(in);
  if (has_header && !lines.empty()) lines.erase(lines.begin());
  if (lines.empty()) fail("design file has no rows");

  StudyDesign design;
  std::unordered_set<std::string> seen_groups;
  for (const auto &[line_number, line] : lines) {
    const auto cells = split_tabs(line);
    if (cells.size() != 2) {
      std::ostringstream msg;
      msg << "design line " << line_number << " has " << cells.size()
          << " cells, expected 2 (observation_id, group)";
      fail(msg.str());
    }
    const std::string &obs = cells[0];
    const std::string &grp = cells[1];
    if (obs.empty()) fail("design line " + std::to_string(line_number) + ": empty observation ID");
    if (grp.empty()) fail("design line " + std::to_string(line_number) + ": empty group label");
    if (design.group_of.count(obs))
      fail("duplicate design row for observation '" + obs + "' (line " +
           std::to_string(line_number) + ")");
    design.observation_ids.push_back(obs);
    design.group_of.emplace(obs, grp);
    if (seen_groups.insert(grp).second) design.group_order.push_back(grp);
  }
  return design;
}

StudyDesign parse_design_text(const std::string &text, bool has_header) {
  std::istringstream in(text);
  return parse_design(in, has_header);
}

ReferencePolicy parse_external_reference(std::istream &in) {
  const auto lines = content_lines(in);
  if (lines.empty()) fail("external reference file is empty");
  std::vector<std::string> ids;
  Vector values(static_cast<Eigen::Index>(lines.size()));
  std::unordered_set<std::string> seen;
  Eigen::Index i = 0;
  for (const auto &[line_number, line] : lines) {
    const auto cells = split_tabs(line);
    if (cells.size() != 2) {
      fail("external reference line " + std::to_string(line_number) +
           ": expected variable_id<TAB>value");
    }
    if (cells[0].empty())
      fail("external reference line " + std::to_string(line_number) + ": empty variable ID");
    if (!seen.insert(cells[0]).second)
      fail("external reference: duplicate variable ID '" + cells[0] + "'");
    ids.push_back(cells[0]);
    values[i++] = parse_number(cells[1], line_number, 2);
  }
  return ReferencePolicy::external(std::move(ids), std::move(values));
}

ReferencePolicy parse_reference_policy(const std::string &spec) {
  if (spec == "global-mean") return ReferencePolicy::global_mean();
  if (spec.rfind("control:", 0) == 0) {
    const std::string group = spec.substr(8);
    if (group.empty()) fail("reference policy 'control:' needs a group label");
    return ReferencePolicy::control(group);
  }
  if (spec.rfind("external:", 0) == 0) {
    const std::string path = spec.substr(9);
    if (path.empty()) fail("reference policy 'external:' needs a file path");
    std::ifstream in(path);
    if (!in) fail("cannot open external reference file '" + path + "'");
    return parse_external_reference(in);
  }
  fail("unknown reference policy '" + spec +
       "' (expected global-mean | control:<group> | external:<path>)");
}

void validate_matrix_design(const ExpressionMatrix &matrix, const StudyDesign &design) {
  for (const auto &obs : matrix.observation_ids) {
    if (!design.group_of.count(obs))
      fail("observation '" + obs + "' has no group assignment in the design");
  }
  if (design.reference_policy.kind == ReferenceKind::ControlGroup) {
    const std::string &control = design.reference_policy.control_group;
    if (!design.has_group(control)) fail("control group '" + control + "' is not in the design");
    bool in_matrix = false;
    for (const auto &obs : matrix.observation_ids) {
      if (design.group_of.at(obs) == control) {
        in_matrix = true;
        break;
      }
    }
    if (!in_matrix) fail("control group '" + control + "' has no observation in the matrix");
  }
}

ReferenceVector compute_reference(const ExpressionMatrix &matrix, const StudyDesign &design) {
  const auto &policy = design.reference_policy;
  ReferenceVector reference;
  reference.variable_ids = matrix.variable_ids;
  reference.values = Vector::Zero(matrix.m());

  if (policy.kind == ReferenceKind::ExternalVector) {
    std::unordered_map<std::string, double> by_id;
    for (std::size_t i = 0; i < policy.external_ids.size(); ++i)
      by_id.emplace(policy.external_ids[i], policy.external_values[static_cast<Eigen::Index>(i)]);
    for (int j = 0; j < matrix.m(); ++j) {
      const auto it = by_id.find(matrix.variable_ids[static_cast<std::size_t>(j)]);
      if (it == by_id.end())
        fail("external reference is missing variable '" +
             matrix.variable_ids[static_cast<std::size_t>(j)] + "'");
      reference.values[j] = it->second;
    }
    return reference;
  }

  std::vector<int> designated;
  if (policy.kind == ReferenceKind::GlobalMean) {
    designated.resize(static_cast<std::size_t>(matrix.n()));
    for (int i = 0; i < matrix.n(); ++i) designated[static_cast<std::size_t>(i)] = i;
  } else {
    validate_matrix_design(matrix, design);
    for (int i = 0; i < matrix.n(); ++i) {
      if (design.group_of.at(matrix.observation_ids[static_cast<std::size_t>(i)]) ==
          policy.control_group)
        designated.push_back(i);
    }
  }

  for (int j = 0; j < matrix.m(); ++j) {
    double sum = 0.0;
    int count = 0;
    for (const int i : designated) {
      if (matrix.missing(i, j)) continue;
      sum += matrix.values(i, j);
      ++count;
    }
    if (count == 0)
      fail("variable '" + matrix.variable_ids[static_cast<std::size_t>(j)] +
           "' has no non-missing value among the reference observations");
    reference.values[j] = sum / count;
  }
  return reference;
}

CenteredMatrix center(const ExpressionMatrix &matrix, const ReferenceVector &reference) {
  if (reference.variable_ids != matrix.variable_ids)
    fail("reference and matrix variable IDs do not match");

  CenteredMatrix centered;
  centered.observation_ids = matrix.observation_ids;
  centered.variable_ids = matrix.variable_ids;
  centered.values = Matrix::Zero(matrix.n(), matrix.m());
  centered.present = !matrix.missing;
  centered.effective_counts.assign(static_cast<std::size_t>(matrix.n()), 0);
  for (int i = 0; i < matrix.n(); ++i) {
    int count = 0;
    for (int j = 0; j < matrix.m(); ++j) {
      if (matrix.missing(i, j)) continue;
      centered.values(i, j) = matrix.values(i, j) - reference.values[j];
      ++count;
    }
    centered.effective_counts[static_cast<std::size_t>(i)] = count;
  }
  return centered;
}

CenteredMatrix align_variables(const CenteredMatrix &matrix,
                               const std::vector<std::string> &target_ids) {
  std::unordered_map<std::string, int> source_index;
  for (int j = 0; j < matrix.m(); ++j)
    source_index.emplace(matrix.variable_ids[static_cast<std::size_t>(j)], j);

  std::unordered_set<std::string> seen;
  for (const auto &id : target_ids)
    if (!seen.insert(id).second) fail("align_variables: duplicate target variable '" + id + "'");

  int shared = 0;
  for (const auto &id : target_ids)
    if (source_index.count(id)) ++shared;
  if (shared == 0) fail("align_variables: no shared variables between matrix and target");

  CenteredMatrix aligned;
  aligned.observation_ids = matrix.observation_ids;
  aligned.variable_ids = target_ids;
  const Eigen::Index n = matrix.values.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(target_ids.size());
  aligned.values = Matrix::Zero(n, m);
  aligned.present = BoolArray::Constant(n, m, false);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto it = source_index.find(target_ids[static_cast<std::size_t>(j)]);
    if (it == source_index.end()) continue;
    aligned.values.col(j) = matrix.values.col(it->second);
    aligned.present.col(j) = matrix.present.col(it->second);
  }
  aligned.effective_counts.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i)
    aligned.effective_counts[static_cast<std::size_t>(i)] =
        static_cast<int>(aligned.present.row(i).count());
  return aligned;
}

}  // namespace expca
