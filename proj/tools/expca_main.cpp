#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expca/axes.hpp"
#include "expca/data_model.hpp"
#include "expca/scores.hpp"
#include "expca/stats.hpp"
#include "expca/table_io.hpp"

namespace {

using expca::fail;

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) fail("cannot allocate a digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &length) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) fail("sha-256 digest failed");
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    char byte[3];
    std::snprintf(byte, sizeof(byte), "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string join_command_line(int argc, char **argv) {
  std::string joined = "command:";
  for (int i = 0; i < argc; ++i) {
    joined += ' ';
    joined += argv[i];
  }
  return joined;
}

expca::ExpressionMatrix load_matrix_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) fail("cannot open matrix file '" + path + "'");
  return expca::parse_matrix(in);
}

expca::StudyDesign load_design_file(const std::string &path, bool has_header) {
  std::ifstream in(path);
  if (!in) fail("cannot open design file '" + path + "'");
  return expca::parse_design(in, has_header);
}

// One ID per line; blank lines and "#" comment lines are skipped.
expca::VariableSet load_id_set(const std::string &path) {
  std::ifstream in(path);
  if (!in) fail("cannot open ID list '" + path + "'");
  expca::VariableSet ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ids.insert(line);
  }
  if (ids.empty()) fail("ID list '" + path + "' has no entries");
  return ids;
}

struct LoadedModel {
  expca::AxesModel model;
  std::string sha256;
};

LoadedModel load_model_with_hash(const std::string &path) {
  const std::string bytes = expca::read_file(path);
  std::istringstream in(bytes);
  return LoadedModel{expca::load_model(in), sha256_hex(bytes)};
}

expca::ScoreSet project_onto_model(const expca::AxesModel &model, const std::string &matrix_path) {
  const expca::ExpressionMatrix matrix = load_matrix_file(matrix_path);
  const expca::CenteredMatrix centered = expca::center_for_model(matrix, model);
  return expca::scale_observation_scores(expca::observation_scores(centered, model));
}

// Training units in scaled-score space: m^(-1/2) * U_T * diag(D_T).
expca::ScoreSet training_unit_scores(const expca::AxesModel &model) {
  expca::ScoreSet units;
  units.row_labels = model.unit_labels;
  units.scores = (model.left * model.singulars.asDiagonal()) /
                 std::sqrt(static_cast<double>(model.m()));
  units.kind = expca::ScoreKind::Observation;
  units.scaled = true;
  units.n_T = model.n_T;
  return units;
}

struct FitOptions {
  std::string matrix_path;
  std::string design_path;
  std::string reference = "global-mean";
  std::string out_path;
  bool design_header = false;
  std::vector<std::string> include_groups;
  std::vector<std::string> exclude_groups;
  std::vector<std::string> raw_groups;
  std::string variable_filter_path;
  int max_rank = 0;
};

void run_fit(const FitOptions &options, const std::string &command) {
  const expca::ExpressionMatrix matrix = load_matrix_file(options.matrix_path);
  expca::StudyDesign design = load_design_file(options.design_path, options.design_header);
  design.reference_policy = expca::parse_reference_policy(options.reference);
  expca::validate_matrix_design(matrix, design);

  const expca::ReferenceVector reference = expca::compute_reference(matrix, design);
  const expca::CenteredMatrix centered = expca::center(matrix, reference);

  expca::TrainingSpec spec;
  spec.included_groups = options.include_groups;
  if (!options.exclude_groups.empty()) {
    for (const auto &group : options.exclude_groups)
      if (!design.has_group(group)) fail("--exclude-group '" + group + "': no such group");
    for (const auto &group : design.group_order) {
      if (std::find(options.exclude_groups.begin(), options.exclude_groups.end(), group) ==
          options.exclude_groups.end())
        spec.included_groups.push_back(group);
    }
    if (spec.included_groups.empty()) fail("--exclude-group removes every group");
  }
  spec.raw_groups.insert(options.raw_groups.begin(), options.raw_groups.end());
  if (!options.variable_filter_path.empty())
    spec.variable_filter = load_id_set(options.variable_filter_path);

  const expca::TrainingMatrix training = expca::build_training(centered, design, spec);
  const std::optional<int> max_rank =
      options.max_rank > 0 ? std::optional<int>(options.max_rank) : std::nullopt;
  const expca::AxesModel model = expca::fit(training, reference, max_rank);

  std::ostringstream body;
  body << "# " << command << '\n';
  expca::save_model(model, body);
  expca::atomic_write_file(options.out_path, body.str());
}

struct ProjectOptions {
  std::string model_path;
  std::string matrix_path;
  std::string out_path;
};

void run_project(const ProjectOptions &options, const std::string &command) {
  const LoadedModel loaded = load_model_with_hash(options.model_path);
  const expca::ScoreSet scaled = project_onto_model(loaded.model, options.matrix_path);
  const std::vector<std::string> comments = {command, "model_sha256: " + loaded.sha256};
  expca::atomic_write_file(options.out_path, expca::render_score_table(scaled, comments));
}

struct ClassifyOptions {
  std::string model_path;
  std::string matrix_path;
  std::string out_path;
  int axes = 0;  // 0: min(2, k)
};

void run_classify(const ClassifyOptions &options, const std::string &command) {
  const LoadedModel loaded = load_model_with_hash(options.model_path);
  const expca::ScoreSet scaled = project_onto_model(loaded.model, options.matrix_path);
  const int axes = options.axes > 0 ? options.axes : std::min(2, loaded.model.k());
  const auto results = expca::classify(scaled, loaded.model, axes);
  const std::vector<std::string> comments = {command, "model_sha256: " + loaded.sha256,
                                             "axes_used: " + std::to_string(axes)};
  expca::atomic_write_file(options.out_path, expca::render_classification_table(results, comments));
}

struct AnovaOptions {
  std::string probes_path;
  std::string design_path;
  bool design_header = false;
  double threshold = 0.005;
  std::string out_path;
  std::string positives_path;
};

void run_anova(const AnovaOptions &options, const std::string &command) {
  std::ifstream in(options.probes_path);
  if (!in) fail("cannot open probe table '" + options.probes_path + "'");
  const auto blocks = expca::parse_probe_blocks(in);
  const expca::StudyDesign design = load_design_file(options.design_path, options.design_header);

  std::vector<expca::AnovaRecord> records;
  records.reserve(blocks.size());
  for (const auto &block : blocks)
    records.push_back(expca::two_way_anova(block, design.group_of, options.threshold));

  const std::vector<std::string> comments = {
      command, "threshold: " + expca::format_double(options.threshold)};
  expca::atomic_write_file(options.out_path, expca::render_anova_table(records, comments));

  if (!options.positives_path.empty()) {
    const expca::VariableSet positives = expca::filter_positive(records, options.threshold);
    std::ostringstream body;
    body << "# " << command << '\n';
    for (const auto &id : positives) body << id << '\n';
    expca::atomic_write_file(options.positives_path, body.str());
  }
}

struct EnrichOptions {
  std::string annotations_path;
  std::string selected_path;
  std::string model_path;
  std::string out_path;
  std::string direction = "largest";
  int axis = 1;
  int count = 0;  // 0: 500 for largest, 100 for smallest
  std::int64_t universe = 0;  // 0: model variable count
};

void run_enrich(const EnrichOptions &options, const std::string &command) {
  std::ifstream in(options.annotations_path);
  if (!in) fail("cannot open annotation table '" + options.annotations_path + "'");
  const expca::AnnotationMap annotations = expca::parse_annotations(in);

  expca::VariableSet selected;
  std::int64_t universe = options.universe;
  std::vector<std::string> comments = {command};
  if (!options.selected_path.empty()) {
    selected = load_id_set(options.selected_path);
    if (universe <= 0) fail("--universe is required with --selected");
  } else {
    const LoadedModel loaded = load_model_with_hash(options.model_path);
    const expca::ScoreSet vars =
        expca::scale_variable_scores(expca::variable_scores(loaded.model), loaded.model.n_T);
    const expca::TopDirection direction = options.direction == "largest"
                                              ? expca::TopDirection::Largest
                                              : expca::TopDirection::Smallest;
    const int count = options.count > 0
                          ? options.count
                          : (direction == expca::TopDirection::Largest ? 500 : 100);
    selected = expca::select_top(vars, options.axis, direction, count);
    if (universe <= 0) universe = loaded.model.m();
    comments.push_back("model_sha256: " + loaded.sha256);
    comments.push_back("selection: " + std::to_string(count) + " " + options.direction +
                       " on pc" + std::to_string(options.axis));
  }
  comments.push_back("universe: " + std::to_string(universe));
  comments.push_back("selected: " + std::to_string(selected.size()));

  const auto table = expca::enrich(annotations, universe, selected);
  expca::atomic_write_file(options.out_path, expca::render_enrichment_table(table, comments));
}

struct ClusterOptions {
  std::string matrix_path;
  std::string design_path;
  std::string reference = "global-mean";
  bool design_header = false;
  std::string variable_filter_path;
  std::string out_path;
};

void run_cluster(const ClusterOptions &options, const std::string &command) {
  const expca::ExpressionMatrix matrix = load_matrix_file(options.matrix_path);
  expca::StudyDesign design = load_design_file(options.design_path, options.design_header);
  design.reference_policy = expca::parse_reference_policy(options.reference);
  expca::validate_matrix_design(matrix, design);
  const expca::ReferenceVector reference = expca::compute_reference(matrix, design);
  const expca::CenteredMatrix centered = expca::center(matrix, reference);

  std::optional<expca::VariableSet> filter;
  if (!options.variable_filter_path.empty()) filter = load_id_set(options.variable_filter_path);

  const expca::Dendrogram dendrogram = expca::ward_cluster(centered, filter);
  const std::vector<std::string> comments = {command};
  expca::atomic_write_file(options.out_path, expca::render_dendrogram(dendrogram, comments));
}

struct BiplotOptions {
  std::string model_path;
  std::string matrix_path;
  std::string out_path;
  double multiplier = 1.0;
  std::string pair;
};

void run_biplot(const BiplotOptions &options, const std::string &command) {
  const LoadedModel loaded = load_model_with_hash(options.model_path);
  const expca::ScoreSet observations = options.matrix_path.empty()
                                           ? training_unit_scores(loaded.model)
                                           : project_onto_model(loaded.model, options.matrix_path);
  const expca::ScoreSet variables =
      expca::scale_variable_scores(expca::variable_scores(loaded.model), loaded.model.n_T);
  const expca::BiplotTable table =
      expca::biplot_table(observations, variables, options.multiplier);

  const std::vector<std::string> comments = {command, "model_sha256: " + loaded.sha256};
  if (options.pair.empty()) {
    expca::atomic_write_file(options.out_path, expca::render_biplot_table(table, comments));
    return;
  }
  const std::size_t comma = options.pair.find(',');
  const int axis_a = std::stoi(options.pair.substr(0, comma));
  const int axis_b = std::stoi(options.pair.substr(comma + 1));
  expca::atomic_write_file(options.out_path,
                           expca::render_plot_data(table, axis_a, axis_b, comments));
}

struct FluctuationOptions {
  std::string model_path;
  std::string matrix_path;
  std::string design_path;
  bool design_header = false;
  std::string mode = "scatter-sd";
  std::string out_path;
};

void run_fluctuation(const FluctuationOptions &options, const std::string &command) {
  const LoadedModel loaded = load_model_with_hash(options.model_path);
  const expca::ScoreSet scaled = project_onto_model(loaded.model, options.matrix_path);
  const expca::StudyDesign design =
      load_design_file(options.design_path, options.design_header);
  const expca::FluctuationMode mode = options.mode == "scatter-sd"
                                          ? expca::FluctuationMode::ScatterSd
                                          : expca::FluctuationMode::DistanceSd;
  const double value = expca::fluctuation(scaled, design, mode);
  if (options.out_path.empty()) {
    std::cout << expca::format_double(value) << '\n';
    return;
  }
  std::ostringstream body;
  body << "# " << command << '\n'
       << "# model_sha256: " << loaded.sha256 << '\n'
       << "# mode: " << options.mode << '\n'
       << "fluctuation\t" << expca::format_double(value) << '\n';
  expca::atomic_write_file(options.out_path, body.str());
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"experiment-aware principal component analysis"};
  app.require_subcommand(1);

  FitOptions fit_options;
  auto *fit_cmd = app.add_subcommand("fit", "Fit principal axes on designed training data");
  fit_cmd->add_option("--matrix", fit_options.matrix_path, "Expression matrix (TSV)")->required();
  fit_cmd->add_option("--design", fit_options.design_path, "Observation-to-group table")
      ->required();
  fit_cmd->add_option("--reference", fit_options.reference,
                      "global-mean | control:<group> | external:<path>");
  fit_cmd->add_flag("--design-header", fit_options.design_header,
                    "Skip the first design row as a header");
  auto *include_opt = fit_cmd->add_option("--include-group", fit_options.include_groups,
                                          "Group contributing a training row (repeatable)");
  fit_cmd->add_option("--exclude-group", fit_options.exclude_groups,
                      "Group left out of the training rows (repeatable)")
      ->excludes(include_opt);
  fit_cmd->add_option("--raw-group", fit_options.raw_groups,
                      "Group entering observation-by-observation instead of as a mean");
  fit_cmd->add_option("--variable-filter", fit_options.variable_filter_path,
                      "File with one variable ID per line; columns outside it are dropped");
  fit_cmd->add_option("--max-rank", fit_options.max_rank, "Cap on the number of components")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit_options.out_path, "Model file to write (.axes)")->required();

  ProjectOptions project_options;
  auto *project_cmd =
      app.add_subcommand("project", "Project observations onto a fitted model (scaled scores)");
  project_cmd->add_option("--model", project_options.model_path, "Model file")->required();
  project_cmd->add_option("--matrix", project_options.matrix_path, "Expression matrix (TSV)")
      ->required();
  project_cmd->add_option("--out", project_options.out_path, "Score table to write")->required();

  ClassifyOptions classify_options;
  auto *classify_cmd =
      app.add_subcommand("classify", "Assign observations to the nearest training unit");
  classify_cmd->add_option("--model", classify_options.model_path, "Model file")->required();
  classify_cmd->add_option("--matrix", classify_options.matrix_path, "Expression matrix (TSV)")
      ->required();
  classify_cmd->add_option("--axes", classify_options.axes, "Leading axes used (default 2)")
      ->check(CLI::PositiveNumber);
  classify_cmd->add_option("--out", classify_options.out_path, "Assignment table to write")
      ->required();

  AnovaOptions anova_options;
  auto *anova_cmd =
      app.add_subcommand("anova", "Probe-level two-way ANOVA group-effect filtering");
  anova_cmd->add_option("--probes", anova_options.probes_path, "Probe-level table (TSV)")
      ->required();
  anova_cmd->add_option("--design", anova_options.design_path, "Observation-to-group table")
      ->required();
  anova_cmd->add_flag("--design-header", anova_options.design_header,
                      "Skip the first design row as a header");
  anova_cmd->add_option("--threshold", anova_options.threshold,
                        "Positive-call p-value threshold (default 0.005)");
  anova_cmd->add_option("--out", anova_options.out_path, "Per-variable result table")->required();
  anova_cmd->add_option("--positives-out", anova_options.positives_path,
                        "Also write the positive variable IDs, one per line");

  EnrichOptions enrich_options;
  auto *enrich_cmd =
      app.add_subcommand("enrich", "Binomial keyword enrichment of a variable selection");
  enrich_cmd->add_option("--annotations", enrich_options.annotations_path,
                         "variable_id<TAB>keyword pairs")
      ->required();
  auto *selection_group = enrich_cmd->add_option_group("selection", "How the genes are selected");
  selection_group->add_option("--selected", enrich_options.selected_path,
                              "File with one selected variable ID per line");
  selection_group->add_option("--model", enrich_options.model_path,
                              "Select by extreme variable scores of this model");
  selection_group->require_option(1);
  enrich_cmd->add_option("--axis", enrich_options.axis, "Variable-score axis (default 1)")
      ->check(CLI::PositiveNumber);
  enrich_cmd
      ->add_option("--direction", enrich_options.direction, "largest | smallest (default largest)")
      ->check(CLI::IsMember({"largest", "smallest"}));
  enrich_cmd
      ->add_option("--count", enrich_options.count,
                   "Selection size (default 500 largest / 100 smallest)")
      ->check(CLI::PositiveNumber);
  enrich_cmd->add_option("--universe", enrich_options.universe,
                         "Universe size (default: the model's variable count)");
  enrich_cmd->add_option("--out", enrich_options.out_path, "Enrichment table to write")
      ->required();

  ClusterOptions cluster_options;
  auto *cluster_cmd =
      app.add_subcommand("cluster", "Ward hierarchical clustering of centered observations");
  cluster_cmd->add_option("--matrix", cluster_options.matrix_path, "Expression matrix (TSV)")
      ->required();
  cluster_cmd->add_option("--design", cluster_options.design_path, "Observation-to-group table")
      ->required();
  cluster_cmd->add_option("--reference", cluster_options.reference,
                          "global-mean | control:<group> | external:<path>");
  cluster_cmd->add_flag("--design-header", cluster_options.design_header,
                        "Skip the first design row as a header");
  cluster_cmd->add_option("--variable-filter", cluster_options.variable_filter_path,
                          "File with one variable ID per line (e.g. ANOVA positives)");
  cluster_cmd->add_option("--out", cluster_options.out_path, "Dendrogram table to write")
      ->required();

  BiplotOptions biplot_options;
  auto *biplot_cmd = app.add_subcommand(
      "biplot", "Overlay observation and variable scaled scores on shared axes");
  biplot_cmd->add_option("--model", biplot_options.model_path, "Model file")->required();
  biplot_cmd->add_option("--matrix", biplot_options.matrix_path,
                         "Observations to overlay (default: the training units)");
  biplot_cmd
      ->add_option("--multiplier", biplot_options.multiplier,
                   "Legibility multiplier applied to observation rows (>= 1)")
      ->check(CLI::Range(1.0, 1e12));
  const CLI::Validator axis_pair(
      [](std::string &value) -> std::string {
        static const std::regex pattern("[0-9]+,[0-9]+");
        return std::regex_match(value, pattern) ? std::string{}
                                                : std::string("expected <axis>,<axis>");
      },
      "AXIS,AXIS");
  biplot_cmd->add_option("--pair", biplot_options.pair, "Emit only these two axes, e.g. 1,2")
      ->check(axis_pair);
  biplot_cmd->add_option("--out", biplot_options.out_path, "Coordinate table to write")
      ->required();

  FluctuationOptions fluctuation_options;
  auto *fluctuation_cmd = app.add_subcommand(
      "fluctuation", "Root-mean-square within-group spread over (sPC1, sPC2)");
  fluctuation_cmd->add_option("--model", fluctuation_options.model_path, "Model file")->required();
  fluctuation_cmd
      ->add_option("--matrix", fluctuation_options.matrix_path, "Expression matrix (TSV)")
      ->required();
  fluctuation_cmd
      ->add_option("--design", fluctuation_options.design_path, "Observation-to-group table")
      ->required();
  fluctuation_cmd->add_flag("--design-header", fluctuation_options.design_header,
                            "Skip the first design row as a header");
  fluctuation_cmd
      ->add_option("--mode", fluctuation_options.mode,
                   "scatter-sd | distance-sd (default scatter-sd)")
      ->check(CLI::IsMember({"scatter-sd", "distance-sd"}));
  fluctuation_cmd->add_option("--out", fluctuation_options.out_path,
                              "Write the value to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &error) {
    return app.exit(error);
  } catch (const CLI::CallForAllHelp &error) {
    return app.exit(error);
  } catch (const CLI::ParseError &error) {
    app.exit(error);
    return 2;
  }

  const std::string command = join_command_line(argc, argv);
  std::string stage = "expca";
  try {
    if (fit_cmd->parsed()) {
      stage = "fit";
      run_fit(fit_options, command);
    } else if (project_cmd->parsed()) {
      stage = "project";
      run_project(project_options, command);
    } else if (classify_cmd->parsed()) {
      stage = "classify";
      run_classify(classify_options, command);
    } else if (anova_cmd->parsed()) {
      stage = "anova";
      run_anova(anova_options, command);
    } else if (enrich_cmd->parsed()) {
      stage = "enrich";
      run_enrich(enrich_options, command);
    } else if (cluster_cmd->parsed()) {
      stage = "cluster";
      run_cluster(cluster_options, command);
    } else if (biplot_cmd->parsed()) {
      stage = "biplot";
      run_biplot(biplot_options, command);
    } else if (fluctuation_cmd->parsed()) {
      stage = "fluctuation";
      run_fluctuation(fluctuation_options, command);
    }
  } catch (const std::exception &error) {
    std::cerr << "expca " << stage << ": " << error.what() << '\n';
    return 1;
  }
  return 0;
}
