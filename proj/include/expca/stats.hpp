#ifndef EXPCA_STATS_HPP
#define EXPCA_STATS_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "expca/data_model.hpp"
#include "expca/scores.hpp"
#include "expca/types.hpp"

namespace expca {

// Probe-level values for one variable: probes in rows, observations in columns.
struct ProbeBlock {
  std::string variable_id;
  Matrix probe_values;  // P x n, P >= 2
  std::vector<std::string> observation_ids;
};

struct AnovaRecord {
  std::string variable_id;
  double f_statistic = 0.0;
  int df_group = 0;
  int df_residual = 0;
  double p_value = 1.0;
  bool positive = false;
  // Zero residual with nonzero group effect: p is reported as 0.
  bool degenerate_residual = false;
};

// keyword -> annotated variable ids; ids must belong to the universe.
using AnnotationMap = std::map<std::string, VariableSet>;

struct EnrichmentRecord {
  std::string keyword;
  std::int64_t chip_count = 0;
  std::int64_t selected_count = 0;
  double p_value = 1.0;
};

struct Dendrogram {
  struct Merge {
    int cluster_a = 0;  // cluster_a < cluster_b; leaves 0..n-1, merge t forms n+t
    int cluster_b = 0;
    double height = 0.0;  // increase of the Ward objective
    int size = 0;         // size of the merged cluster
  };
  std::vector<std::string> leaf_labels;
  std::vector<Merge> merges;
};

// Additive two-factor fit (data difference) = (probe sensitivity) +
// (group effect), probe effects entered first; F on the sequential group
// sum of squares with df_group = g-1, df_res = P*n - P - g + 1.
AnovaRecord two_way_anova(const ProbeBlock &block,
                          const std::unordered_map<std::string, std::string> &group_of,
                          double threshold = 0.005);

// Upper tail P(F(df1, df2) >= f) via the regularized incomplete beta function.
double f_upper_tail(double f, int df1, int df2);

VariableSet filter_positive(const std::vector<AnovaRecord> &records, double threshold = 0.005);

// Exact upper tail P(X >= k) for X ~ Binomial(n, p), log-space terms.
double binomial_tail(std::int64_t trials, double success_prob, std::int64_t successes);

// Per keyword: chip = |annotated|, selected = |annotated & selected|,
// p = binomial_tail(|selected|, chip/universe, selected). Sorted by
// ascending p, then keyword.
std::vector<EnrichmentRecord> enrich(const AnnotationMap &annotations,
                                     std::int64_t universe_size, const VariableSet &selected);

enum class TopDirection { Largest, Smallest };

// The `count` variable ids most extreme on a 1-based axis; ties at the
// cutoff break by lexical id order.
VariableSet select_top(const ScoreSet &vars, int axis, TopDirection direction, int count);

// Agglomerative clustering of observations: Euclidean distances, Ward
// linkage via the Lance-Williams update, heights recorded as the Ward
// objective increase. Ties merge the smallest (cluster_a, cluster_b).
Dendrogram ward_cluster(const CenteredMatrix &centered,
                        const std::optional<VariableSet> &variable_filter = std::nullopt);

// Tab-separated probe table: header "variable_id<TAB>probe_id<TAB>obs...",
// one row per probe; consecutive rows of one variable need not be adjacent.
std::vector<ProbeBlock> parse_probe_blocks(std::istream &in);

// Tab-separated "variable_id<TAB>keyword" pairs, one per line, no header.
AnnotationMap parse_annotations(std::istream &in);

}  // namespace expca

#endif
