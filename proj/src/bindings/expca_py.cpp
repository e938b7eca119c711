#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "expca/axes.hpp"
#include "expca/data_model.hpp"
#include "expca/scores.hpp"
#include "expca/stats.hpp"
#include "expca/table_io.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_expca, m) {
  m.doc() = "Experiment-aware principal component analysis";

  py::register_exception<expca::Error>(m, "Error");

  // ---- data model ----------------------------------------------------

  py::enum_<expca::ReferenceKind>(m, "ReferenceKind")
      .value("GlobalMean", expca::ReferenceKind::GlobalMean)
      .value("ControlGroup", expca::ReferenceKind::ControlGroup)
      .value("ExternalVector", expca::ReferenceKind::ExternalVector);

  py::class_<expca::ReferencePolicy>(m, "ReferencePolicy")
      .def_static("global_mean", &expca::ReferencePolicy::global_mean)
      .def_static("control", &expca::ReferencePolicy::control, py::arg("group"))
      .def_static("external", &expca::ReferencePolicy::external, py::arg("ids"),
                  py::arg("values"))
      .def_readonly("kind", &expca::ReferencePolicy::kind)
      .def_readonly("control_group", &expca::ReferencePolicy::control_group);

  py::class_<expca::ExpressionMatrix>(m, "ExpressionMatrix")
      .def_readonly("observation_ids", &expca::ExpressionMatrix::observation_ids)
      .def_readonly("variable_ids", &expca::ExpressionMatrix::variable_ids)
      .def_readonly("values", &expca::ExpressionMatrix::values)
      .def_readonly("missing", &expca::ExpressionMatrix::missing)
      .def_property_readonly("n", &expca::ExpressionMatrix::n)
      .def_property_readonly("m", &expca::ExpressionMatrix::m);

  py::class_<expca::StudyDesign>(m, "StudyDesign")
      .def_readonly("observation_ids", &expca::StudyDesign::observation_ids)
      .def_readonly("group_of", &expca::StudyDesign::group_of)
      .def_readonly("group_order", &expca::StudyDesign::group_order)
      .def_readwrite("reference_policy", &expca::StudyDesign::reference_policy)
      .def("group", &expca::StudyDesign::group, py::arg("observation_id"))
      .def("members", &expca::StudyDesign::members, py::arg("group"));

  py::class_<expca::ReferenceVector>(m, "ReferenceVector")
      .def_readonly("variable_ids", &expca::ReferenceVector::variable_ids)
      .def_readonly("values", &expca::ReferenceVector::values);

  py::class_<expca::CenteredMatrix>(m, "CenteredMatrix")
      .def_readonly("observation_ids", &expca::CenteredMatrix::observation_ids)
      .def_readonly("variable_ids", &expca::CenteredMatrix::variable_ids)
      .def_readonly("values", &expca::CenteredMatrix::values)
      .def_readonly("present", &expca::CenteredMatrix::present)
      .def_readonly("effective_counts", &expca::CenteredMatrix::effective_counts);

  m.def("parse_matrix", &expca::parse_matrix_text, py::arg("text"));
  m.def("parse_design", &expca::parse_design_text, py::arg("text"),
        py::arg("has_header") = false);
  m.def("parse_reference_policy", &expca::parse_reference_policy, py::arg("spec"));
  m.def("validate_matrix_design", &expca::validate_matrix_design, py::arg("matrix"),
        py::arg("design"));
  m.def("compute_reference", &expca::compute_reference, py::arg("matrix"), py::arg("design"));
  m.def("center", &expca::center, py::arg("matrix"), py::arg("reference"));
  m.def("align_variables", &expca::align_variables, py::arg("matrix"), py::arg("target_ids"));

  // ---- axes ----------------------------------------------------------

  py::class_<expca::TrainingSpec>(m, "TrainingSpec")
      .def(py::init<>())
      .def_readwrite("included_groups", &expca::TrainingSpec::included_groups)
      .def_readwrite("raw_groups", &expca::TrainingSpec::raw_groups)
      .def_readwrite("variable_filter", &expca::TrainingSpec::variable_filter);

  py::class_<expca::TrainingMatrix>(m, "TrainingMatrix")
      .def_readonly("unit_labels", &expca::TrainingMatrix::unit_labels)
      .def_readonly("values", &expca::TrainingMatrix::values)
      .def_readonly("variable_ids", &expca::TrainingMatrix::variable_ids);

  py::class_<expca::AxesModel>(m, "AxesModel")
      .def_readonly("variable_ids", &expca::AxesModel::variable_ids)
      .def_readonly("reference", &expca::AxesModel::reference)
      .def_readonly("right", &expca::AxesModel::right)
      .def_readonly("singulars", &expca::AxesModel::singulars)
      .def_readonly("left", &expca::AxesModel::left)
      .def_readonly("unit_labels", &expca::AxesModel::unit_labels)
      .def_readonly("n_T", &expca::AxesModel::n_T)
      .def_readonly("format_version", &expca::AxesModel::format_version)
      .def_property_readonly("k", &expca::AxesModel::k)
      .def_property_readonly("m", &expca::AxesModel::m);

  m.def("build_training", &expca::build_training, py::arg("centered"), py::arg("design"),
        py::arg("spec") = expca::TrainingSpec{});
  m.def("fit", &expca::fit, py::arg("training"), py::arg("reference"),
        py::arg("max_rank") = py::none());
  m.def(
      "save_model",
      [](const expca::AxesModel &model) {
        std::ostringstream out;
        expca::save_model(model, out);
        return out.str();
      },
      py::arg("model"));
  m.def(
      "load_model",
      [](const std::string &text) {
        std::istringstream in(text);
        return expca::load_model(in);
      },
      py::arg("text"));
  m.def("save_model_file", &expca::save_model_file, py::arg("model"), py::arg("path"));
  m.def("load_model_file", &expca::load_model_file, py::arg("path"));
  m.def("center_for_model", &expca::center_for_model, py::arg("matrix"), py::arg("model"));

  // ---- scores --------------------------------------------------------

  py::enum_<expca::ScoreKind>(m, "ScoreKind")
      .value("Observation", expca::ScoreKind::Observation)
      .value("Variable", expca::ScoreKind::Variable);

  py::class_<expca::ScoreSet>(m, "ScoreSet")
      .def_readonly("row_labels", &expca::ScoreSet::row_labels)
      .def_readonly("scores", &expca::ScoreSet::scores)
      .def_readonly("kind", &expca::ScoreSet::kind)
      .def_readonly("scaled", &expca::ScoreSet::scaled)
      .def_readonly("effective_counts", &expca::ScoreSet::effective_counts)
      .def_readonly("n_T", &expca::ScoreSet::n_T)
      .def_readonly("zero_count_warnings", &expca::ScoreSet::zero_count_warnings)
      .def_property_readonly("rows", &expca::ScoreSet::rows)
      .def_property_readonly("k", &expca::ScoreSet::k);

  py::class_<expca::ClassificationResult>(m, "ClassificationResult")
      .def_readonly("observation_id", &expca::ClassificationResult::observation_id)
      .def_readonly("nearest_unit", &expca::ClassificationResult::nearest_unit)
      .def_readonly("distances", &expca::ClassificationResult::distances);

  py::class_<expca::BiplotTable>(m, "BiplotTable")
      .def_readonly("labels", &expca::BiplotTable::labels)
      .def_readonly("kinds", &expca::BiplotTable::kinds)
      .def_readonly("coords", &expca::BiplotTable::coords)
      .def_readonly("obs_multiplier", &expca::BiplotTable::obs_multiplier);

  py::enum_<expca::FluctuationMode>(m, "FluctuationMode")
      .value("ScatterSd", expca::FluctuationMode::ScatterSd)
      .value("DistanceSd", expca::FluctuationMode::DistanceSd);

  m.def("observation_scores", &expca::observation_scores, py::arg("centered"), py::arg("model"));
  m.def("scale_observation_scores", &expca::scale_observation_scores, py::arg("raw"));
  m.def("variable_scores", &expca::variable_scores, py::arg("model"));
  m.def("scale_variable_scores", &expca::scale_variable_scores, py::arg("raw"), py::arg("n_T"));
  m.def("fluctuation", &expca::fluctuation, py::arg("scaled"), py::arg("design"),
        py::arg("mode") = expca::FluctuationMode::ScatterSd);
  m.def("classify", &expca::classify, py::arg("scaled"), py::arg("model"), py::arg("axes_used"));
  m.def("biplot_table", &expca::biplot_table, py::arg("obs_scaled"), py::arg("var_scaled"),
        py::arg("obs_multiplier") = 1.0);

  // ---- stats ---------------------------------------------------------

  py::class_<expca::ProbeBlock>(m, "ProbeBlock")
      .def(py::init([](std::string variable_id, expca::Matrix probe_values,
                       std::vector<std::string> observation_ids) {
             expca::ProbeBlock block;
             block.variable_id = std::move(variable_id);
             block.probe_values = std::move(probe_values);
             block.observation_ids = std::move(observation_ids);
             return block;
           }),
           py::arg("variable_id"), py::arg("probe_values"), py::arg("observation_ids"))
      .def_readonly("variable_id", &expca::ProbeBlock::variable_id)
      .def_readonly("probe_values", &expca::ProbeBlock::probe_values)
      .def_readonly("observation_ids", &expca::ProbeBlock::observation_ids);

  py::class_<expca::AnovaRecord>(m, "AnovaRecord")
      .def_readonly("variable_id", &expca::AnovaRecord::variable_id)
      .def_readonly("f_statistic", &expca::AnovaRecord::f_statistic)
      .def_readonly("df_group", &expca::AnovaRecord::df_group)
      .def_readonly("df_residual", &expca::AnovaRecord::df_residual)
      .def_readonly("p_value", &expca::AnovaRecord::p_value)
      .def_readonly("positive", &expca::AnovaRecord::positive)
      .def_readonly("degenerate_residual", &expca::AnovaRecord::degenerate_residual);

  py::class_<expca::EnrichmentRecord>(m, "EnrichmentRecord")
      .def_readonly("keyword", &expca::EnrichmentRecord::keyword)
      .def_readonly("chip_count", &expca::EnrichmentRecord::chip_count)
      .def_readonly("selected_count", &expca::EnrichmentRecord::selected_count)
      .def_readonly("p_value", &expca::EnrichmentRecord::p_value);

  py::class_<expca::Dendrogram::Merge>(m, "Merge")
      .def_readonly("cluster_a", &expca::Dendrogram::Merge::cluster_a)
      .def_readonly("cluster_b", &expca::Dendrogram::Merge::cluster_b)
      .def_readonly("height", &expca::Dendrogram::Merge::height)
      .def_readonly("size", &expca::Dendrogram::Merge::size);

  py::class_<expca::Dendrogram>(m, "Dendrogram")
      .def_readonly("leaf_labels", &expca::Dendrogram::leaf_labels)
      .def_readonly("merges", &expca::Dendrogram::merges);

  py::enum_<expca::TopDirection>(m, "TopDirection")
      .value("Largest", expca::TopDirection::Largest)
      .value("Smallest", expca::TopDirection::Smallest);

  m.def("two_way_anova", &expca::two_way_anova, py::arg("block"), py::arg("group_of"),
        py::arg("threshold") = 0.005);
  m.def("f_upper_tail", &expca::f_upper_tail, py::arg("f"), py::arg("df1"), py::arg("df2"));
  m.def("filter_positive", &expca::filter_positive, py::arg("records"),
        py::arg("threshold") = 0.005);
  m.def("binomial_tail", &expca::binomial_tail, py::arg("trials"), py::arg("success_prob"),
        py::arg("successes"));
  m.def("enrich", &expca::enrich, py::arg("annotations"), py::arg("universe_size"),
        py::arg("selected"));
  m.def("select_top", &expca::select_top, py::arg("vars"), py::arg("axis"), py::arg("direction"),
        py::arg("count"));
  m.def("ward_cluster", &expca::ward_cluster, py::arg("centered"),
        py::arg("variable_filter") = py::none());
  m.def(
      "parse_probe_blocks",
      [](const std::string &text) {
        std::istringstream in(text);
        return expca::parse_probe_blocks(in);
      },
      py::arg("text"));
  m.def(
      "parse_annotations",
      [](const std::string &text) {
        std::istringstream in(text);
        return expca::parse_annotations(in);
      },
      py::arg("text"));

  // ---- tables --------------------------------------------------------

  m.def("format_double", &expca::format_double, py::arg("value"));
  m.def("render_score_table", &expca::render_score_table, py::arg("scores"),
        py::arg("comments") = std::vector<std::string>{});
  m.def("render_biplot_table", &expca::render_biplot_table, py::arg("table"),
        py::arg("comments") = std::vector<std::string>{});
  m.def("render_classification_table", &expca::render_classification_table, py::arg("results"),
        py::arg("comments") = std::vector<std::string>{});
  m.def("render_anova_table", &expca::render_anova_table, py::arg("records"),
        py::arg("comments") = std::vector<std::string>{});
  m.def("render_enrichment_table", &expca::render_enrichment_table, py::arg("records"),
        py::arg("comments") = std::vector<std::string>{});
  m.def("render_dendrogram", &expca::render_dendrogram, py::arg("dendrogram"),
        py::arg("comments") = std::vector<std::string>{});
}
