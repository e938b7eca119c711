#include "expca/table_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace expca {

namespace {

const char *kind_name(ScoreKind kind) {
  return kind == ScoreKind::Observation ? "observation" : "variable";
}

void emit_comments(std::ostringstream &out, const std::vector<std::string> &comments) {
  for (const auto &comment : comments) out << "# " << comment << '\n';
}

void emit_zero_count_warnings(std::ostringstream &out, const ScoreSet &scores) {
  for (const auto &id : scores.zero_count_warnings)
    out << "# warning: observation " << id << " has m_i = 0\n";
}

void check_axis(int axis, int k) {
  if (axis < 1 || axis > k)
    fail("axis " + std::to_string(axis) + " out of range (table has " + std::to_string(k) +
         " components)");
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void atomic_write_file(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) fail("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    fail("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail("read from '" + path + "' failed");
  return buffer.str();
}

std::string render_score_table(const ScoreSet &scores, const std::vector<std::string> &comments) {
  std::ostringstream out;
  emit_comments(out, comments);
  emit_zero_count_warnings(out, scores);
  out << "label\tkind";
  for (int c = 1; c <= scores.k(); ++c) out << "\tpc" << c;
  out << '\n';
  for (int i = 0; i < scores.rows(); ++i) {
    out << scores.row_labels[static_cast<std::size_t>(i)] << '\t' << kind_name(scores.kind);
    for (int c = 0; c < scores.k(); ++c) out << '\t' << format_double(scores.scores(i, c));
    out << '\n';
  }
  return out.str();
}

std::string render_biplot_table(const BiplotTable &table, const std::vector<std::string> &comments) {
  std::ostringstream out;
  emit_comments(out, comments);
  out << "# obs_multiplier: " << format_double(table.obs_multiplier) << '\n';
  const int k = static_cast<int>(table.coords.cols());
  out << "label\tkind";
  for (int c = 1; c <= k; ++c) out << "\tpc" << c;
  out << '\n';
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    out << table.labels[i] << '\t' << kind_name(table.kinds[i]);
    for (int c = 0; c < k; ++c) out << '\t' << format_double(table.coords(static_cast<int>(i), c));
    out << '\n';
  }
  return out.str();
}

std::string render_plot_data(const ScoreSet &scores, int axis_a, int axis_b,
                             const std::vector<std::string> &comments) {
  check_axis(axis_a, scores.k());
  check_axis(axis_b, scores.k());
  std::ostringstream out;
  emit_comments(out, comments);
  emit_zero_count_warnings(out, scores);
  out << "label\tkind\tpc" << axis_a << "\tpc" << axis_b << '\n';
  for (int i = 0; i < scores.rows(); ++i) {
    out << scores.row_labels[static_cast<std::size_t>(i)] << '\t' << kind_name(scores.kind) << '\t'
        << format_double(scores.scores(i, axis_a - 1)) << '\t'
        << format_double(scores.scores(i, axis_b - 1)) << '\n';
  }
  return out.str();
}

std::string render_plot_data(const BiplotTable &table, int axis_a, int axis_b,
                             const std::vector<std::string> &comments) {
  const int k = static_cast<int>(table.coords.cols());
  check_axis(axis_a, k);
  check_axis(axis_b, k);
  std::ostringstream out;
  emit_comments(out, comments);
  out << "# obs_multiplier: " << format_double(table.obs_multiplier) << '\n';
  out << "label\tkind\tpc" << axis_a << "\tpc" << axis_b << '\n';
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    const int row = static_cast<int>(i);
    out << table.labels[i] << '\t' << kind_name(table.kinds[i]) << '\t'
        << format_double(table.coords(row, axis_a - 1)) << '\t'
        << format_double(table.coords(row, axis_b - 1)) << '\n';
  }
  return out.str();
}

std::string render_classification_table(const std::vector<ClassificationResult> &results,
                                        const std::vector<std::string> &comments) {
  std::ostringstream out;
  emit_comments(out, comments);
  out << "observation\tnearest_unit";
  if (!results.empty())
    for (const auto &[unit, distance] : results.front().distances) out << "\tdist_" << unit;
  out << '\n';
  for (const auto &result : results) {
    out << result.observation_id << '\t' << result.nearest_unit;
    for (const auto &[unit, distance] : result.distances) out << '\t' << format_double(distance);
    out << '\n';
  }
  return out.str();
}

std::string render_anova_table(const std::vector<AnovaRecord> &records,
                               const std::vector<std::string> &comments) {
  std::ostringstream out;
  emit_comments(out, comments);
  out << "variable_id\tF\tdf1\tdf2\tp\tpositive\n";
  for (const auto &record : records) {
    out << record.variable_id << '\t' << format_double(record.f_statistic) << '\t'
        << record.df_group << '\t' << record.df_residual << '\t' << format_double(record.p_value)
        << '\t' << (record.positive ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string render_enrichment_table(const std::vector<EnrichmentRecord> &records,
                                    const std::vector<std::string> &comments) {
  std::ostringstream out;
  emit_comments(out, comments);
  out << "keyword\tchip\tselected\tp_value\n";
  for (const auto &record : records) {
    out << record.keyword << '\t' << record.chip_count << '\t' << record.selected_count << '\t'
        << format_double(record.p_value) << '\n';
  }
  return out.str();
}

std::string render_dendrogram(const Dendrogram &dendrogram,
                              const std::vector<std::string> &comments) {
  std::ostringstream out;
  emit_comments(out, comments);
  // Tagged rows: leaves carry their index and label, merges carry the id of
  // the cluster they form (leaf count + step), the two merged cluster ids,
  // the height, and the merged size.
  const int n = static_cast<int>(dendrogram.leaf_labels.size());
  for (int i = 0; i < n; ++i)
    out << "leaf\t" << i << '\t' << dendrogram.leaf_labels[static_cast<std::size_t>(i)] << '\n';
  for (std::size_t t = 0; t < dendrogram.merges.size(); ++t) {
    const auto &merge = dendrogram.merges[t];
    out << "merge\t" << n + static_cast<int>(t) << '\t' << merge.cluster_a << '\t'
        << merge.cluster_b << '\t' << format_double(merge.height) << '\t' << merge.size << '\n';
  }
  return out.str();
}

}  // namespace expca
