#ifndef EXPCA_TABLE_IO_HPP
#define EXPCA_TABLE_IO_HPP

#include <string>
#include <vector>

#include "expca/scores.hpp"
#include "expca/stats.hpp"

namespace expca {

// 17 significant digits: distinct doubles render distinctly and strtod
// returns the identical bit pattern.
std::string format_double(double value);

// Write via "<path>.tmp" then rename so readers never see partial output.
void atomic_write_file(const std::string &path, const std::string &content);

std::string read_file(const std::string &path);

// All tables are UTF-8 TSV. `comments` lines are emitted first, each
// prefixed with "# ".
std::string render_score_table(const ScoreSet &scores,
                               const std::vector<std::string> &comments = {});
std::string render_biplot_table(const BiplotTable &table,
                                const std::vector<std::string> &comments = {});
// Two coordinate columns picked from a score set (axes are 1-based).
std::string render_plot_data(const ScoreSet &scores, int axis_a, int axis_b,
                             const std::vector<std::string> &comments = {});
std::string render_plot_data(const BiplotTable &table, int axis_a, int axis_b,
                             const std::vector<std::string> &comments = {});
std::string render_classification_table(const std::vector<ClassificationResult> &results,
                                        const std::vector<std::string> &comments = {});
std::string render_anova_table(const std::vector<AnovaRecord> &records,
                               const std::vector<std::string> &comments = {});
std::string render_enrichment_table(const std::vector<EnrichmentRecord> &records,
                                    const std::vector<std::string> &comments = {});
std::string render_dendrogram(const Dendrogram &dendrogram,
                              const std::vector<std::string> &comments = {});

}  // namespace expca

#endif
