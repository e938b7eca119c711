#ifndef EXPCA_DATA_MODEL_HPP
#define EXPCA_DATA_MODEL_HPP

#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "expca/error.hpp"
#include "expca/types.hpp"

namespace expca {

// Expression levels, observations in rows and variables in columns. The
// on-disk layout is transposed (variables in rows); parse_matrix converts.
struct ExpressionMatrix {
  std::vector<std::string> observation_ids;  // n, no duplicates
  std::vector<std::string> variable_ids;     // m, no duplicates
  Matrix values;                             // n x m, finite where present
  BoolArray missing;                         // n x m

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }
};

enum class ReferenceKind { GlobalMean, ControlGroup, ExternalVector };

struct ReferencePolicy {
  ReferenceKind kind = ReferenceKind::GlobalMean;
  std::string control_group;               // ControlGroup only
  std::vector<std::string> external_ids;   // ExternalVector only
  Vector external_values;

  static ReferencePolicy global_mean();
  static ReferencePolicy control(std::string group);
  static ReferencePolicy external(std::vector<std::string> ids, Vector values);
};

struct StudyDesign {
  std::vector<std::string> observation_ids;  // design row order
  std::unordered_map<std::string, std::string> group_of;
  std::vector<std::string> group_order;      // order of first appearance
  ReferencePolicy reference_policy;

  const std::string &group(const std::string &observation_id) const;
  bool has_group(const std::string &group_label) const;
  // Members of a group in design row order.
  std::vector<std::string> members(const std::string &group_label) const;
};

struct ReferenceVector {
  std::vector<std::string> variable_ids;
  Vector values;  // one reference level per variable, finite
};

struct CenteredMatrix {
  std::vector<std::string> observation_ids;
  std::vector<std::string> variable_ids;
  Matrix values;                      // missing positions hold exactly 0
  BoolArray present;                  // source position was non-missing and shared
  std::vector<int> effective_counts;  // m_i: row sums of present

  int n() const { return static_cast<int>(values.rows()); }
  int m() const { return static_cast<int>(values.cols()); }
};

// Tab-separated table, header row = observation IDs, first column =
// variable IDs. Empty cells and "NA" (case-insensitive) mark missing data.
ExpressionMatrix parse_matrix(std::istream &in);
ExpressionMatrix parse_matrix_text(const std::string &text);

// Two tab-separated columns: observation_id, group.
StudyDesign parse_design(std::istream &in, bool has_header = false);
StudyDesign parse_design_text(const std::string &text, bool has_header = false);

// Policy strings: "global-mean" | "control:<group>" | "external:<path>".
// The external file holds one "variable_id<TAB>value" pair per line.
ReferencePolicy parse_reference_policy(const std::string &spec);
ReferencePolicy parse_external_reference(std::istream &in);

// Every matrix observation must be assigned to a group; a control group
// must have at least one observation in the matrix.
void validate_matrix_design(const ExpressionMatrix &matrix, const StudyDesign &design);

ReferenceVector compute_reference(const ExpressionMatrix &matrix, const StudyDesign &design);

CenteredMatrix center(const ExpressionMatrix &matrix, const ReferenceVector &reference);

// Reorder/subset columns to target_ids. Variables absent from the matrix
// become zero columns and do not count toward m_i.
CenteredMatrix align_variables(const CenteredMatrix &matrix,
                               const std::vector<std::string> &target_ids);

}  // namespace expca

#endif
