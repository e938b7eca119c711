#include "expca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "text_utils.hpp"

namespace expca {

using detail::content_lines;
using detail::parse_number;
using detail::split_tabs;

namespace {

// Relative floor below which a sum of squares counts as numerically zero.
constexpr double kSsEpsilon = 1e-12;

// Continued fraction for the regularized incomplete beta function,
// evaluated with the modified Lentz algorithm.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 3e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

// I_x(a, b), switching to the complement when x is past the central cut so
// the continued fraction converges fast on both sides.
double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

double f_upper_tail(double f, int df1, int df2) {
  if (df1 < 1 || df2 < 1) fail("f_upper_tail: degrees of freedom must be >= 1");
  if (!(f > 0.0)) return 1.0;
  // P(F >= f) = I_x(df2/2, df1/2) at x = df2 / (df2 + df1 * f).
  const double x = df2 / (df2 + df1 * f);
  return regularized_incomplete_beta(0.5 * df2, 0.5 * df1, x);
}

AnovaRecord two_way_anova(const ProbeBlock &block,
                          const std::unordered_map<std::string, std::string> &group_of,
                          double threshold) {
  const int probes = static_cast<int>(block.probe_values.rows());
  const int n = static_cast<int>(block.probe_values.cols());
  if (probes < 2) fail("anova: variable '" + block.variable_id + "' needs at least 2 probes");
  if (n < 2) fail("anova: variable '" + block.variable_id + "' needs at least 2 observations");
  if (static_cast<int>(block.observation_ids.size()) != n)
    fail("anova: observation ID count does not match the value columns");
  if (!block.probe_values.allFinite())
    fail("anova: variable '" + block.variable_id + "' has non-finite probe values");

  // Group labels in first-appearance order over the block's observations.
  std::vector<std::string> group_labels;
  std::vector<int> group_index(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto &obs = block.observation_ids[static_cast<std::size_t>(j)];
    const auto it = group_of.find(obs);
    if (it == group_of.end()) fail("anova: observation '" + obs + "' has no group assignment");
    const auto pos = std::find(group_labels.begin(), group_labels.end(), it->second);
    if (pos == group_labels.end()) {
      group_index[static_cast<std::size_t>(j)] = static_cast<int>(group_labels.size());
      group_labels.push_back(it->second);
    } else {
      group_index[static_cast<std::size_t>(j)] = static_cast<int>(pos - group_labels.begin());
    }
  }
  const int g = static_cast<int>(group_labels.size());
  if (g < 2) fail("anova: variable '" + block.variable_id + "' needs at least 2 groups");

  AnovaRecord record;
  record.variable_id = block.variable_id;
  record.df_group = g - 1;
  record.df_residual = probes * n - probes - g + 1;
  if (record.df_residual < 1)
    fail("anova: variable '" + block.variable_id + "' leaves no residual degrees of freedom");

  // Every probe is measured on every observation, so the probe and group
  // factors are orthogonal after mean removal and the sequential group sum
  // of squares has a closed form from the group means.
  const double grand = block.probe_values.mean();
  const Vector probe_means = block.probe_values.rowwise().mean();
  Vector group_means = Vector::Zero(g);
  Eigen::VectorXi group_sizes = Eigen::VectorXi::Zero(g);
  for (int j = 0; j < n; ++j) {
    const int gi = group_index[static_cast<std::size_t>(j)];
    group_means[gi] += block.probe_values.col(j).sum();
    group_sizes[gi] += 1;
  }
  for (int gi = 0; gi < g; ++gi) group_means[gi] /= static_cast<double>(probes * group_sizes[gi]);

  double ss_total = 0.0;
  double ss_group = 0.0;
  double ss_residual = 0.0;
  for (int gi = 0; gi < g; ++gi) {
    const double deviation = group_means[gi] - grand;
    ss_group += probes * group_sizes[gi] * deviation * deviation;
  }
  for (int p = 0; p < probes; ++p) {
    for (int j = 0; j < n; ++j) {
      const int gi = group_index[static_cast<std::size_t>(j)];
      const double value = block.probe_values(p, j);
      const double total_dev = value - grand;
      const double fitted = probe_means[p] + group_means[gi] - grand;
      const double residual = value - fitted;
      ss_total += total_dev * total_dev;
      ss_residual += residual * residual;
    }
  }

  const double floor = kSsEpsilon * std::max(ss_total, 0.0);
  if (ss_residual <= floor) {
    if (ss_group <= floor) {
      // Flat data: no group effect and no noise.
      record.f_statistic = 0.0;
      record.p_value = 1.0;
    } else {
      // Pure group shift with zero noise: the statistic diverges.
      record.f_statistic = std::numeric_limits<double>::infinity();
      record.p_value = 0.0;
      record.degenerate_residual = true;
    }
  } else {
    record.f_statistic = (ss_group / record.df_group) / (ss_residual / record.df_residual);
    record.p_value = f_upper_tail(record.f_statistic, record.df_group, record.df_residual);
  }
  record.positive = record.p_value < threshold;
  return record;
}

VariableSet filter_positive(const std::vector<AnovaRecord> &records, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) fail("filter_positive: threshold must be in (0,1)");
  VariableSet positives;
  for (const auto &record : records)
    if (record.p_value < threshold) positives.insert(record.variable_id);
  return positives;
}

double binomial_tail(std::int64_t trials, double success_prob, std::int64_t successes) {
  if (trials < 0) fail("binomial_tail: trials must be non-negative");
  if (successes < 0 || successes > trials)
    fail("binomial_tail: successes must lie in [0, trials]");
  if (success_prob < 0.0 || success_prob > 1.0)
    fail("binomial_tail: success probability must lie in [0, 1]");

  if (successes == 0) return 1.0;
  if (success_prob == 0.0) return 0.0;
  if (success_prob == 1.0) return 1.0;

  // First term P(X = k) via lgamma, then the ratio recurrence
  // P(X = i+1) = P(X = i) * ((n-i)/(i+1)) * (p/(1-p)). The whole sum stays
  // in log space: the starting term alone can underflow a double while the
  // tail is still near 1 (for example n = 1000, p = 0.77, k = 1), and every
  // term is positive, so log-sum-exp accumulation never cancels.
  const double n = static_cast<double>(trials);
  const double k = static_cast<double>(successes);
  double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                    k * std::log(success_prob) + (n - k) * std::log1p(-success_prob);
  double log_sum = log_term;
  const double log_odds = std::log(success_prob) - std::log1p(-success_prob);
  for (std::int64_t i = successes; i < trials; ++i) {
    log_term +=
        std::log(static_cast<double>(trials - i) / static_cast<double>(i + 1)) + log_odds;
    const double hi = std::max(log_sum, log_term);
    log_sum = hi + std::log1p(std::exp(std::min(log_sum, log_term) - hi));
  }
  return std::min(std::exp(log_sum), 1.0);
}

std::vector<EnrichmentRecord> enrich(const AnnotationMap &annotations,
                                     std::int64_t universe_size, const VariableSet &selected) {
  if (universe_size <= 0) fail("enrich: universe size must be positive");
  const std::int64_t selection_size = static_cast<std::int64_t>(selected.size());
  if (selection_size > universe_size) fail("enrich: selection is larger than the universe");

  std::vector<EnrichmentRecord> records;
  records.reserve(annotations.size());
  for (const auto &[keyword, annotated] : annotations) {
    EnrichmentRecord record;
    record.keyword = keyword;
    record.chip_count = static_cast<std::int64_t>(annotated.size());
    for (const auto &id : annotated)
      if (selected.count(id)) ++record.selected_count;
    const double frequency =
        static_cast<double>(record.chip_count) / static_cast<double>(universe_size);
    record.p_value = binomial_tail(selection_size, frequency, record.selected_count);
    records.push_back(std::move(record));
  }
  std::sort(records.begin(), records.end(), [](const auto &a, const auto &b) {
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.keyword < b.keyword;
  });
  return records;
}

VariableSet select_top(const ScoreSet &vars, int axis, TopDirection direction, int count) {
  if (axis < 1 || axis > vars.k()) fail("select_top: axis out of range");
  if (count < 1) fail("select_top: count must be at least 1");
  if (count > vars.rows()) fail("select_top: count exceeds the number of variables");

  std::vector<int> order(static_cast<std::size_t>(vars.rows()));
  for (int i = 0; i < vars.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  const int column = axis - 1;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = vars.scores(a, column);
    const double vb = vars.scores(b, column);
    if (va != vb) return direction == TopDirection::Largest ? va > vb : va < vb;
    return vars.row_labels[static_cast<std::size_t>(a)] <
           vars.row_labels[static_cast<std::size_t>(b)];
  });

  VariableSet picked;
  for (int i = 0; i < count; ++i)
    picked.insert(vars.row_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  return picked;
}

Dendrogram ward_cluster(const CenteredMatrix &centered,
                        const std::optional<VariableSet> &variable_filter) {
  const int n = centered.n();
  if (n < 2) fail("ward_cluster: needs at least 2 observations");

  Matrix points;
  if (variable_filter) {
    std::vector<int> keep;
    for (int j = 0; j < centered.m(); ++j)
      if (variable_filter->count(centered.variable_ids[static_cast<std::size_t>(j)]))
        keep.push_back(j);
    if (keep.empty()) fail("ward_cluster: the variable filter leaves no variables");
    points = Matrix(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
      points.col(static_cast<Eigen::Index>(j)) = centered.values.col(keep[j]);
  } else {
    points = centered.values;
  }

  // Lance-Williams recurrence for Ward linkage on M = 2 * (objective
  // increase); M starts as the squared Euclidean distance between leaves.
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::vector<int> sizes(static_cast<std::size_t>(n), 1);
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  Matrix m_matrix(n, n);
  for (int i = 0; i < n; ++i) {
    m_matrix(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      m_matrix(i, j) = d2;
      m_matrix(j, i) = d2;
    }
  }

  Dendrogram dendrogram;
  dendrogram.leaf_labels = centered.observation_ids;
  for (int step = 0; step < n - 1; ++step) {
    const int active = static_cast<int>(ids.size());
    int best_i = -1;
    int best_j = -1;
    double best_m = 0.0;
    for (int i = 0; i < active; ++i) {
      for (int j = i + 1; j < active; ++j) {
        const double m = m_matrix(i, j);
        const int a = std::min(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
        const int b = std::max(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
        bool better = false;
        if (best_i < 0 || m < best_m) {
          better = true;
        } else if (m == best_m) {
          const int cur_a = std::min(ids[static_cast<std::size_t>(best_i)],
                                     ids[static_cast<std::size_t>(best_j)]);
          const int cur_b = std::max(ids[static_cast<std::size_t>(best_i)],
                                     ids[static_cast<std::size_t>(best_j)]);
          better = a < cur_a || (a == cur_a && b < cur_b);
        }
        if (better) {
          best_i = i;
          best_j = j;
          best_m = m;
        }
      }
    }

    const int size_i = sizes[static_cast<std::size_t>(best_i)];
    const int size_j = sizes[static_cast<std::size_t>(best_j)];
    const int merged_size = size_i + size_j;
    Dendrogram::Merge merge;
    merge.cluster_a = std::min(ids[static_cast<std::size_t>(best_i)],
                               ids[static_cast<std::size_t>(best_j)]);
    merge.cluster_b = std::max(ids[static_cast<std::size_t>(best_i)],
                               ids[static_cast<std::size_t>(best_j)]);
    merge.height = 0.5 * best_m;
    merge.size = merged_size;
    dendrogram.merges.push_back(merge);

    // Replace the pair by the merged cluster: recompute its M row, drop the
    // two old rows/columns, append the new one.
    Vector updated(active);
    for (int k = 0; k < active; ++k) {
      if (k == best_i || k == best_j) continue;
      const double size_k = sizes[static_cast<std::size_t>(k)];
      const double total = merged_size + size_k;
      double m = ((size_i + size_k) * m_matrix(k, best_i) +
                  (size_j + size_k) * m_matrix(k, best_j) - size_k * best_m) /
                 total;
      if (m < 0.0) m = 0.0;
      updated[k] = m;
    }

    std::vector<int> old_to_new;
    old_to_new.reserve(static_cast<std::size_t>(active));
    std::vector<int> new_ids;
    std::vector<int> new_sizes;
    for (int k = 0; k < active; ++k) {
      if (k == best_i || k == best_j) {
        old_to_new.push_back(-1);
        continue;
      }
      old_to_new.push_back(static_cast<int>(new_ids.size()));
      new_ids.push_back(ids[static_cast<std::size_t>(k)]);
      new_sizes.push_back(sizes[static_cast<std::size_t>(k)]);
    }
    const int merged_pos = static_cast<int>(new_ids.size());
    new_ids.push_back(n + step);
    new_sizes.push_back(merged_size);

    Matrix next(merged_pos + 1, merged_pos + 1);
    for (int k = 0; k < active; ++k) {
      if (old_to_new[static_cast<std::size_t>(k)] < 0) continue;
      const int nk = old_to_new[static_cast<std::size_t>(k)];
      for (int l = 0; l < active; ++l) {
        if (old_to_new[static_cast<std::size_t>(l)] < 0) continue;
        next(nk, old_to_new[static_cast<std::size_t>(l)]) = m_matrix(k, l);
      }
      next(nk, merged_pos) = updated[k];
      next(merged_pos, nk) = updated[k];
    }
    next(merged_pos, merged_pos) = 0.0;

    ids = std::move(new_ids);
    sizes = std::move(new_sizes);
    m_matrix = std::move(next);
  }
  return dendrogram;
}

std::vector<ProbeBlock> parse_probe_blocks(std::istream &in) {
  const auto lines = content_lines(in);
  if (lines.empty()) fail("probe table is empty");

  const auto header = split_tabs(lines[0].second);
  if (header.size() < 3)
    fail("probe table header needs variable_id, probe_id and at least one observation");
  const std::vector<std::string> observation_ids(header.begin() + 2, header.end());
  std::unordered_set<std::string> seen_obs;
  for (const auto &id : observation_ids) {
    if (id.empty()) fail("probe table header: empty observation ID");
    if (!seen_obs.insert(id).second)
      fail("probe table header: duplicate observation ID '" + id + "'");
  }
  const std::size_t n = observation_ids.size();

  // Rows of one variable may be scattered; group by first appearance.
  std::vector<ProbeBlock> blocks;
  std::unordered_map<std::string, std::size_t> block_index;
  std::vector<std::vector<Vector>> rows_per_block;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto &[line_number, line] = lines[r];
    const auto cells = split_tabs(line);
    if (cells.size() != n + 2) {
      std::ostringstream msg;
      msg << "probe table line " << line_number << " has " << cells.size() << " cells, expected "
          << n + 2;
      fail(msg.str());
    }
    const std::string &variable_id = cells[0];
    if (variable_id.empty())
      fail("probe table line " + std::to_string(line_number) + ": empty variable ID");
    Vector row(static_cast<Eigen::Index>(n));
    for (std::size_t c = 2; c < cells.size(); ++c)
      row[static_cast<Eigen::Index>(c - 2)] =
          parse_number(cells[c], line_number, static_cast<int>(c + 1));
    auto it = block_index.find(variable_id);
    if (it == block_index.end()) {
      block_index.emplace(variable_id, blocks.size());
      ProbeBlock block;
      block.variable_id = variable_id;
      block.observation_ids = observation_ids;
      blocks.push_back(std::move(block));
      rows_per_block.emplace_back();
      it = block_index.find(variable_id);
    }
    rows_per_block[it->second].push_back(std::move(row));
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto &rows = rows_per_block[b];
    if (rows.size() < 2)
      fail("probe table: variable '" + blocks[b].variable_id + "' has fewer than 2 probes");
    blocks[b].probe_values =
        Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < rows.size(); ++p)
      blocks[b].probe_values.row(static_cast<Eigen::Index>(p)) = rows[p].transpose();
  }
  return blocks;
}

AnnotationMap parse_annotations(std::istream &in) {
  const auto lines = content_lines(in);
  AnnotationMap annotations;
  for (const auto &[line_number, line] : lines) {
    const auto cells = split_tabs(line);
    if (cells.size() != 2) {
      std::ostringstream msg;
      msg << "annotation line " << line_number << " has " << cells.size()
          << " cells, expected 2 (variable_id, keyword)";
      fail(msg.str());
    }
    if (cells[0].empty())
      fail("annotation line " + std::to_string(line_number) + ": empty variable ID");
    if (cells[1].empty())
      fail("annotation line " + std::to_string(line_number) + ": empty keyword");
    annotations[cells[1]].insert(cells[0]);
  }
  return annotations;
}

}  // namespace expca
