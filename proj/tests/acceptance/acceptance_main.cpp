// Acceptance gate: one self-contained check per shipping criterion, each
// printing a single PASS/FAIL line. The process exit code is the number of
// failed criteria, so `ctest` treats any failure as a test failure.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "expca/axes.hpp"
#include "expca/data_model.hpp"
#include "expca/scores.hpp"
#include "expca/stats.hpp"
#include "expca/svd.hpp"
#include "expca/table_io.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string format_seconds(double seconds) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << seconds << " s";
  return out.str();
}

std::string format_percent(double fraction) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << 100.0 * fraction << "%";
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic studies: designed groups with per-variable effects plus noise.

struct Study {
  expca::ExpressionMatrix matrix;
  expca::StudyDesign design;
};

template <typename EffectFn>
Study make_study(int groups, int replicates, int variables, double noise_sd, EffectFn effect,
                 std::mt19937_64 &rng) {
  Study study;
  const int n = groups * replicates;
  study.matrix.values = expca::Matrix(n, variables);
  study.matrix.missing = expca::BoolArray::Constant(n, variables, false);
  std::normal_distribution<double> noise(0.0, noise_sd);
  int row = 0;
  for (int g = 0; g < groups; ++g) {
    const std::string group = "G" + std::to_string(g);
    study.design.group_order.push_back(group);
    for (int r = 0; r < replicates; ++r, ++row) {
      const std::string obs = group + "r" + std::to_string(r);
      study.matrix.observation_ids.push_back(obs);
      study.design.observation_ids.push_back(obs);
      study.design.group_of[obs] = group;
      for (int v = 0; v < variables; ++v)
        study.matrix.values(row, v) = effect(g, v) + noise(rng);
    }
  }
  for (int v = 0; v < variables; ++v)
    study.matrix.variable_ids.push_back("g" + std::to_string(v));
  return study;
}

expca::CenteredMatrix centered_of(const Study &study) {
  return expca::center(study.matrix, expca::compute_reference(study.matrix, study.design));
}

expca::ScoreSet scaled_scores(const expca::CenteredMatrix &centered,
                              const expca::AxesModel &model) {
  const expca::CenteredMatrix aligned = expca::align_variables(centered, model.variable_ids);
  return expca::scale_observation_scores(expca::observation_scores(aligned, model));
}

std::vector<expca::Vector> group_centroids(const expca::ScoreSet &scaled,
                                           const expca::StudyDesign &design, int axes) {
  std::vector<expca::Vector> centroids(design.group_order.size(),
                                       expca::Vector::Zero(axes));
  std::vector<int> counts(design.group_order.size(), 0);
  for (int i = 0; i < scaled.rows(); ++i) {
    const auto &group = design.group(scaled.row_labels[static_cast<std::size_t>(i)]);
    const auto g = static_cast<std::size_t>(
        std::find(design.group_order.begin(), design.group_order.end(), group) -
        design.group_order.begin());
    centroids[g] += scaled.scores.row(i).head(axes).transpose();
    counts[g] += 1;
  }
  for (std::size_t g = 0; g < centroids.size(); ++g)
    if (counts[g] > 0) centroids[g] /= static_cast<double>(counts[g]);
  return centroids;
}

// Orthonormal basis (columns) for the span of the given row vectors.
expca::Matrix row_span_basis(const expca::Matrix &rows) {
  std::vector<expca::Vector> basis;
  const double scale = std::max(rows.norm(), 1.0);
  for (int i = 0; i < rows.rows(); ++i) {
    expca::Vector v = rows.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto &q : basis) v -= q.dot(v) * q;
    const double norm = v.norm();
    if (norm > 1e-10 * scale) basis.push_back(v / norm);
  }
  expca::Matrix q_matrix(rows.cols(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    q_matrix.col(static_cast<Eigen::Index>(i)) = basis[i];
  return q_matrix;
}

// Share of the model's d^2 energy whose right axes fall inside span(basis).
double energy_fraction_in(const expca::AxesModel &model, const expca::Matrix &basis) {
  double numerator = 0.0;
  double denominator = 0.0;
  for (int i = 0; i < model.k(); ++i) {
    const double d2 = model.singulars[i] * model.singulars[i];
    denominator += d2;
    numerator += d2 * (basis.transpose() * model.right.col(i)).squaredNorm();
  }
  return numerator / denominator;
}

// ---------------------------------------------------------------------------
// Criterion 1: five reference enrichment rows, universe 12487, selection 500.

bool criterion_enrichment_rows(std::string &detail) {
  const Stopwatch timer;
  struct Row {
    std::int64_t chip;
    std::int64_t selected;
    double reference;
  };
  const Row rows[] = {
      {33, 10, 1.3e-6}, {42, 10, 1.1e-5}, {62, 12, 1.1e-5}, {16, 5, 5.3e-4}, {35, 7, 6.3e-4}};
  double worst = 0.0;
  for (const auto &row : rows) {
    const double p =
        expca::binomial_tail(500, static_cast<double>(row.chip) / 12487.0, row.selected);
    worst = std::max(worst, std::fabs(p - row.reference) / row.reference);
  }
  const double elapsed = timer.seconds();
  detail = "5 reference rows, worst relative gap " + format_percent(worst) +
           " (limit 25%), " + format_seconds(elapsed) + " (limit 1 s)";
  return worst <= 0.25 && elapsed < 1.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: factorization identities on 500 random matrices (n, m <= 20).

bool criterion_svd_suite(std::string &detail) {
  const Stopwatch timer;
  std::mt19937_64 rng(0x51ce90b5);
  std::uniform_int_distribution<int> dim(1, 20);
  double worst_reconstruction = 0.0;
  double worst_energy = 0.0;
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const expca::Matrix input = oracles::random_matrix(dim(rng), dim(rng), rng);
    const double norm = input.norm();
    const auto factors = expca::svd(input);
    worst_reconstruction =
        std::max(worst_reconstruction, (factors.reconstruct() - input).norm() / norm);
    worst_energy = std::max(
        worst_energy, std::fabs(factors.singulars.squaredNorm() - norm * norm) / (norm * norm));
    const auto reference = oracles::gram_singular_values(input);
    const double scale = std::max(factors.singulars[0], 1e-300);
    for (std::size_t i = 0; i < reference.size(); ++i)
      worst_oracle = std::max(
          worst_oracle,
          std::fabs(factors.singulars[static_cast<Eigen::Index>(i)] - reference[i]) / scale);
  }
  const double elapsed = timer.seconds();
  std::ostringstream out;
  out << std::scientific << std::setprecision(2) << "500 matrices: reconstruction "
      << worst_reconstruction << " (<1e-9), energy " << worst_energy << " (<1e-9), oracle gap "
      << worst_oracle << " (<1e-8), " << format_seconds(elapsed) << " (limit 10 s)";
  detail = out.str();
  return worst_reconstruction < 1e-9 && worst_energy < 1e-9 && worst_oracle < 1e-8 &&
         elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// Criterion 3: score-magnitude identities when the projected data equals the
// training matrix.

bool criterion_score_identities(std::string &detail) {
  std::mt19937_64 rng(314159);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_T = 2 + trial % 7;
    const int m = n_T + 2 + trial % 5;
    expca::TrainingMatrix training;
    training.values = oracles::random_matrix(n_T, m, rng);
    for (int r = 0; r < n_T; ++r) training.unit_labels.push_back("u" + std::to_string(r));
    for (int c = 0; c < m; ++c) training.variable_ids.push_back("g" + std::to_string(c));
    const expca::ReferenceVector reference{training.variable_ids, expca::Vector::Zero(m)};
    const auto model = expca::fit(training, reference);

    expca::CenteredMatrix centered;
    centered.observation_ids = training.unit_labels;
    centered.variable_ids = training.variable_ids;
    centered.values = training.values;
    centered.present = expca::BoolArray::Constant(n_T, m, true);
    centered.effective_counts.assign(static_cast<std::size_t>(n_T), m);

    const auto raw = expca::observation_scores(centered, model);
    const auto scaled = expca::scale_observation_scores(raw);
    const auto variables =
        expca::scale_variable_scores(expca::variable_scores(model), model.n_T);
    for (int i = 0; i < model.k(); ++i) {
      const double d = model.singulars[i];
      worst = std::max(worst, std::fabs(raw.scores.col(i).squaredNorm() - d * d) / (d * d));
      const double target = d / std::sqrt(static_cast<double>(n_T) * static_cast<double>(m));
      const double rms_obs =
          std::sqrt(scaled.scores.col(i).squaredNorm() / static_cast<double>(n_T));
      const double rms_var =
          std::sqrt(variables.scores.col(i).squaredNorm() / static_cast<double>(m));
      worst = std::max(worst, std::fabs(rms_obs - target) / target);
      worst = std::max(worst, std::fabs(rms_var - target) / target);
    }
  }
  std::ostringstream out;
  out << std::scientific << std::setprecision(2)
      << "100 training matrices: sum-square and RMS identities, worst relative error " << worst
      << " (<1e-9)";
  detail = out.str();
  return worst < 1e-9;
}

// ---------------------------------------------------------------------------
// Criterion 4: first-axis scaled scores are stable under halving the
// variable panel (m = 2000, 5 groups x 5 replicates, SNR 3).

bool criterion_subset_stability(std::string &detail) {
  std::mt19937_64 rng(20240401);
  const int groups = 5;
  const int replicates = 5;
  const int m = 2000;
  const double mu[] = {0.0, 2.0, 5.0, 9.0, 14.0};
  // Signal spread across group means is sd(mu) = 5.02; SNR 3 fixes the noise.
  double mean_mu = 0.0;
  for (const double value : mu) mean_mu += value / groups;
  double var_mu = 0.0;
  for (const double value : mu) var_mu += (value - mean_mu) * (value - mean_mu) / groups;
  const double noise_sd = std::sqrt(var_mu) / 3.0;

  const Study study = make_study(
      groups, replicates, m, noise_sd, [&](int g, int) { return mu[g]; }, rng);
  const auto reference = expca::compute_reference(study.matrix, study.design);
  const auto centered = expca::center(study.matrix, reference);

  const auto full_model =
      expca::fit(expca::build_training(centered, study.design, expca::TrainingSpec{}), reference);
  const auto full_scaled = scaled_scores(centered, full_model);
  const auto full_centroids = group_centroids(full_scaled, study.design, 1);

  std::vector<int> variable_indices(m);
  for (int v = 0; v < m; ++v) variable_indices[static_cast<std::size_t>(v)] = v;

  double worst = 0.0;
  const int subsets = 20;
  for (int subset = 0; subset < subsets; ++subset) {
    std::shuffle(variable_indices.begin(), variable_indices.end(), rng);
    expca::VariableSet half;
    for (int v = 0; v < m / 2; ++v)
      half.insert(study.matrix.variable_ids[static_cast<std::size_t>(variable_indices[v])]);
    expca::TrainingSpec spec;
    spec.variable_filter = half;
    const auto sub_model =
        expca::fit(expca::build_training(centered, study.design, spec), reference);
    const auto sub_scaled = scaled_scores(centered, sub_model);
    auto sub_centroids = group_centroids(sub_scaled, study.design, 1);

    // The axis orientation is a convention; compare up to a global sign.
    double dot = 0.0;
    for (int g = 0; g < groups; ++g) dot += full_centroids[g][0] * sub_centroids[g][0];
    const double sign = dot < 0.0 ? -1.0 : 1.0;
    for (int g = 0; g < groups; ++g) {
      const double full_value = full_centroids[g][0];
      const double sub_value = sign * sub_centroids[g][0];
      worst = std::max(worst, std::fabs(sub_value - full_value) / std::fabs(full_value));
    }
  }
  detail = std::to_string(subsets) + " half-panel refits: worst group-mean sPC1 deviation " +
           format_percent(worst) + " (limit 10%)";
  return worst <= 0.10;
}

// ---------------------------------------------------------------------------
// Criterion 5: a withheld high-dose group projects next to its own replicate
// centroid rather than any training analog (7 groups, 5 replicates, SNR 5).

bool criterion_withheld_classification(std::string &detail) {
  const Stopwatch timer;
  std::mt19937_64 rng(8675309);
  const int groups = 7;  // G0 control, G1..G5 analogs, G6 withheld high dose
  const int replicates = 5;
  const int m = 400;
  const double noise_sd = 0.2;  // strongest analog amplitude 1.0 -> SNR 5

  std::vector<expca::Vector> directions(groups, expca::Vector::Zero(m));
  std::bernoulli_distribution coin(0.5);
  for (int g = 1; g <= 5; ++g)
    for (int v = 0; v < m; ++v) directions[static_cast<std::size_t>(g)][v] = coin(rng) ? 1 : -1;
  const double amplitude[] = {0.0, 0.5, 0.5, 0.5, 0.5, 1.0, 1.8};
  directions[6] = directions[5];  // the withheld compound acts like analog 5

  const Study study = make_study(
      groups, replicates, m, noise_sd,
      [&](int g, int v) { return amplitude[g] * directions[static_cast<std::size_t>(g)][v]; },
      rng);
  const auto reference = expca::compute_reference(study.matrix, study.design);
  const auto centered = expca::center(study.matrix, reference);

  expca::TrainingSpec spec;
  for (int g = 0; g <= 5; ++g) spec.included_groups.push_back("G" + std::to_string(g));
  const auto model = expca::fit(expca::build_training(centered, study.design, spec), reference);
  const auto scaled = scaled_scores(centered, model);
  const auto centroids = group_centroids(scaled, study.design, 2);

  int correct = 0;
  int withheld = 0;
  for (int i = 0; i < scaled.rows(); ++i) {
    if (study.design.group(scaled.row_labels[static_cast<std::size_t>(i)]) != "G6") continue;
    ++withheld;
    const expca::Vector point = scaled.scores.row(i).head(2).transpose();
    int best = -1;
    double best_distance = 0.0;
    for (std::size_t g = 0; g < centroids.size(); ++g) {
      const double distance = (point - centroids[g]).norm();
      if (best < 0 || distance < best_distance) {
        best = static_cast<int>(g);
        best_distance = distance;
      }
    }
    if (best == 6) ++correct;
  }
  const double elapsed = timer.seconds();
  detail = std::to_string(correct) + "/" + std::to_string(withheld) +
           " withheld replicates land nearest their own (sPC1, sPC2) centroid, " +
           format_seconds(elapsed) + " (limit 5 s)";
  return withheld == replicates && correct == withheld && elapsed < 5.0;
}

// ---------------------------------------------------------------------------
// Criterion 6: entering one group's raw replicates into the training matrix
// pulls axis energy toward that group's within-group scatter.

bool criterion_bias_direction(std::string &detail) {
  std::mt19937_64 rng(1234321);
  const int groups = 5;
  const int replicates = 5;
  const int m = 200;
  std::vector<expca::Vector> directions(groups, expca::Vector::Zero(m));
  std::bernoulli_distribution coin(0.5);
  for (int g = 0; g < groups; ++g)
    for (int v = 0; v < m; ++v) directions[static_cast<std::size_t>(g)][v] = coin(rng) ? 1 : -1;

  const Study study = make_study(
      groups, replicates, m, 0.5,
      [&](int g, int v) { return directions[static_cast<std::size_t>(g)][v]; }, rng);
  const auto reference = expca::compute_reference(study.matrix, study.design);
  const auto centered = expca::center(study.matrix, reference);

  // Basis of the biased group's replicate deviations around its mean.
  const std::string biased_group = "G2";
  std::vector<int> rows;
  for (int i = 0; i < centered.n(); ++i)
    if (study.design.group(centered.observation_ids[static_cast<std::size_t>(i)]) == biased_group)
      rows.push_back(i);
  expca::Matrix deviations(static_cast<Eigen::Index>(rows.size()), m);
  expca::Vector group_mean = expca::Vector::Zero(m);
  for (const int row : rows) group_mean += centered.values.row(row).transpose();
  group_mean /= static_cast<double>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    deviations.row(static_cast<Eigen::Index>(r)) =
        centered.values.row(rows[r]) - group_mean.transpose();
  const expca::Matrix basis = row_span_basis(deviations);

  const auto unbiased =
      expca::fit(expca::build_training(centered, study.design, expca::TrainingSpec{}), reference);
  expca::TrainingSpec biased_spec;
  biased_spec.raw_groups = {biased_group};
  const auto biased =
      expca::fit(expca::build_training(centered, study.design, biased_spec), reference);

  const double fraction_unbiased = energy_fraction_in(unbiased, basis);
  const double fraction_biased = energy_fraction_in(biased, basis);
  std::ostringstream out;
  out << std::scientific << std::setprecision(3)
      << "replicate-scatter energy share: group-mean fit " << fraction_unbiased
      << ", raw-replicate fit " << fraction_biased << " (must strictly increase)";
  detail = out.str();
  return fraction_biased > fraction_unbiased;
}

// ---------------------------------------------------------------------------
// Criterion 7: additive two-factor fit against a least-squares oracle, plus
// null p-value uniformity.

bool criterion_anova_oracle(std::string &detail) {
  std::mt19937_64 rng(24601);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> group_count(2, 4);
  std::uniform_int_distribution<int> replicate_count(1, 4);
  std::uniform_int_distribution<int> probe_count(2, 5);
  std::uniform_real_distribution<double> effect(-1.5, 1.5);

  double worst = 0.0;
  int matches = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const int g = group_count(rng);
    const int probes = probe_count(rng);
    std::vector<int> group_index;
    for (int gi = 0; gi < g; ++gi) {
      const int replicates = replicate_count(rng);
      for (int r = 0; r < replicates; ++r) group_index.push_back(gi);
    }
    const int n = static_cast<int>(group_index.size());
    std::vector<double> probe_effects(static_cast<std::size_t>(probes));
    std::vector<double> group_effects(static_cast<std::size_t>(g));
    for (auto &value : probe_effects) value = effect(rng);
    for (auto &value : group_effects) value = effect(rng);

    expca::ProbeBlock block;
    block.variable_id = "v" + std::to_string(trial);
    block.probe_values = expca::Matrix(probes, n);
    std::unordered_map<std::string, std::string> group_of;
    for (int j = 0; j < n; ++j) {
      const std::string obs = "o" + std::to_string(j);
      block.observation_ids.push_back(obs);
      group_of[obs] = "G" + std::to_string(group_index[static_cast<std::size_t>(j)]);
      for (int p = 0; p < probes; ++p)
        block.probe_values(p, j) =
            probe_effects[static_cast<std::size_t>(p)] +
            group_effects[static_cast<std::size_t>(group_index[static_cast<std::size_t>(j)])] +
            noise(rng);
    }
    const auto record = expca::two_way_anova(block, group_of);
    const auto reference = oracles::anova_oracle(block.probe_values, group_index);
    const double f_gap = std::fabs(record.f_statistic - reference.f_statistic) /
                         (1.0 + std::fabs(reference.f_statistic));
    const double p_gap = std::fabs(record.p_value - reference.p_value);
    worst = std::max(worst, std::max(f_gap, p_gap));
    if (record.df_group == reference.df_group && record.df_residual == reference.df_residual &&
        f_gap <= 1e-8 && p_gap <= 1e-8)
      ++matches;
  }

  std::vector<double> null_p;
  for (int trial = 0; trial < 200; ++trial) {
    expca::ProbeBlock block;
    block.variable_id = "null";
    block.probe_values = expca::Matrix(3, 6);
    std::unordered_map<std::string, std::string> group_of;
    for (int j = 0; j < 6; ++j) {
      const std::string obs = "o" + std::to_string(j);
      block.observation_ids.push_back(obs);
      group_of[obs] = j < 3 ? "A" : "B";
      for (int p = 0; p < 3; ++p) block.probe_values(p, j) = 1.5 * p + noise(rng);
    }
    null_p.push_back(expca::two_way_anova(block, group_of).p_value);
  }
  std::sort(null_p.begin(), null_p.end());
  double ks = 0.0;
  const double count = static_cast<double>(null_p.size());
  for (std::size_t i = 0; i < null_p.size(); ++i) {
    ks = std::max(ks, std::fabs((static_cast<double>(i) + 1.0) / count - null_p[i]));
    ks = std::max(ks, std::fabs(null_p[i] - static_cast<double>(i) / count));
  }

  std::ostringstream out;
  out << matches << "/" << trials << " random blocks within 1e-8 (worst gap " << std::scientific
      << std::setprecision(2) << worst << "); null Kolmogorov distance " << std::fixed
      << std::setprecision(3) << ks << " (<0.15)";
  detail = out.str();
  return matches == trials && ks < 0.15;
}

// ---------------------------------------------------------------------------
// Criterion 8: Ward merge sequences versus the from-scratch objective oracle.

bool criterion_ward_oracle(std::string &detail) {
  std::mt19937_64 rng(0xacce55);
  int matches = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 2 + trial % 7;
    const int m = 1 + trial % 4;
    const expca::Matrix points = oracles::random_matrix(n, m, rng);
    expca::CenteredMatrix centered;
    for (int i = 0; i < n; ++i) centered.observation_ids.push_back("o" + std::to_string(i));
    for (int j = 0; j < m; ++j) centered.variable_ids.push_back("g" + std::to_string(j));
    centered.values = points;
    centered.present = expca::BoolArray::Constant(n, m, true);
    centered.effective_counts.assign(static_cast<std::size_t>(n), m);

    const auto dendrogram = expca::ward_cluster(centered);
    const auto reference = oracles::ward_oracle(points);
    bool same = dendrogram.merges.size() == reference.size();
    for (std::size_t s = 0; same && s < reference.size(); ++s) {
      same = dendrogram.merges[s].cluster_a == reference[s].cluster_a &&
             dendrogram.merges[s].cluster_b == reference[s].cluster_b &&
             dendrogram.merges[s].size == reference[s].size &&
             std::fabs(dendrogram.merges[s].height - reference[s].height) <=
                 1e-9 * (1.0 + std::fabs(reference[s].height));
    }
    if (same) ++matches;
  }
  detail = std::to_string(matches) + "/" + std::to_string(trials) +
           " merge sequences identical to the recomputed-objective oracle";
  return matches == trials;
}

// ---------------------------------------------------------------------------
// Criterion 9: persistence and repetition change nothing, in process and
// through the command-line surface.

const char kFixtureMatrix[] =
    "gene\ts1\ts2\ts3\ts4\n"
    "g1\t1\t2\t5\t6\n"
    "g2\t0\t1\t1\t2\n"
    "g3\t3\t3\t7\t7\n";
const char kFixtureDesign[] = "s1\tA\ns2\tA\ns3\tB\ns4\tB\n";

int run_command(const std::string &command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool criterion_determinism(std::string &detail) {
  // In process: fit -> (save -> load ->) project must not change a byte.
  const auto matrix = expca::parse_matrix_text(kFixtureMatrix);
  auto design = expca::parse_design_text(kFixtureDesign);
  const auto reference = expca::compute_reference(matrix, design);
  const auto centered = expca::center(matrix, reference);
  const auto model =
      expca::fit(expca::build_training(centered, design, expca::TrainingSpec{}), reference);

  const auto render_projection = [&](const expca::AxesModel &which) {
    const auto aligned = expca::center_for_model(matrix, which);
    return expca::render_score_table(
        expca::scale_observation_scores(expca::observation_scores(aligned, which)), {});
  };
  std::ostringstream stored;
  expca::save_model(model, stored);
  std::istringstream reload(stored.str());
  const auto loaded = expca::load_model(reload);
  const bool in_process_identical = render_projection(model) == render_projection(loaded);

  // Through the CLI: repeating an invocation reproduces the bytes.
  const fs::path dir =
      fs::temp_directory_path() / ("expca-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto write = [](const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  };
  write(dir / "matrix.tsv", kFixtureMatrix);
  write(dir / "design.tsv", kFixtureDesign);
  const std::string quiet = " > /dev/null 2>&1";
  const std::string fit_command = std::string(EXPCA_CLI_PATH) + " fit --matrix " +
                                  (dir / "matrix.tsv").string() + " --design " +
                                  (dir / "design.tsv").string() + " --out " +
                                  (dir / "model.axes").string() + quiet;
  const std::string project_command = std::string(EXPCA_CLI_PATH) + " project --model " +
                                      (dir / "model.axes").string() + " --matrix " +
                                      (dir / "matrix.tsv").string() + " --out " +
                                      (dir / "scores.tsv").string() + quiet;
  bool cli_identical = run_command(fit_command) == 0 && run_command(project_command) == 0;
  std::string model_bytes;
  std::string score_bytes;
  if (cli_identical) {
    model_bytes = expca::read_file((dir / "model.axes").string());
    score_bytes = expca::read_file((dir / "scores.tsv").string());
    cli_identical = run_command(fit_command) == 0 && run_command(project_command) == 0 &&
                    expca::read_file((dir / "model.axes").string()) == model_bytes &&
                    expca::read_file((dir / "scores.tsv").string()) == score_bytes;
  }
  fs::remove_all(dir);

  detail = std::string("save/load projection bytes ") +
           (in_process_identical ? "identical" : "DIFFER") + "; repeated CLI runs " +
           (cli_identical ? "identical" : "DIFFER");
  return in_process_identical && cli_identical;
}

// ---------------------------------------------------------------------------
// Criterion 10: fluctuation metric against hand-computed cases.

bool criterion_fluctuation(std::string &detail) {
  const auto scaled_points = [](const std::vector<std::string> &labels,
                                const expca::Matrix &points) {
    expca::ScoreSet set;
    set.row_labels = labels;
    set.scores = points;
    set.kind = expca::ScoreKind::Observation;
    set.scaled = true;
    set.effective_counts.assign(labels.size(), static_cast<int>(points.cols()));
    set.n_T = 2;
    return set;
  };

  double worst = 0.0;
  {
    expca::Matrix points(2, 2);
    points << 0.7, -0.4, 0.7, -0.4;
    const auto design = expca::parse_design_text("a\tG\nb\tG\n");
    worst = std::max(worst,
                     std::fabs(expca::fluctuation(scaled_points({"a", "b"}, points), design)));
  }
  {
    expca::Matrix points(2, 2);
    points << 0, 0, 2, 0;
    const auto design = expca::parse_design_text("a\tG\nb\tG\n");
    const auto set = scaled_points({"a", "b"}, points);
    worst = std::max(worst, std::fabs(expca::fluctuation(set, design) - std::sqrt(2.0)));
    worst = std::max(
        worst, std::fabs(expca::fluctuation(set, design, expca::FluctuationMode::DistanceSd)));
  }
  {
    expca::Matrix points(4, 2);
    points << 0, 0, 2, 0, 0, 0, 0, 4;  // group SDs sqrt(2) and sqrt(8)
    const auto design = expca::parse_design_text("a\tG\nb\tG\nc\tH\nd\tH\n");
    worst = std::max(
        worst, std::fabs(expca::fluctuation(scaled_points({"a", "b", "c", "d"}, points), design) -
                         std::sqrt((2.0 + 8.0) / 2.0)));
  }
  std::ostringstream out;
  out << std::scientific << std::setprecision(2) << "hand-computed cases, worst absolute error "
      << worst << " (<1e-12). NOTE: the published 0.052/0.029/0.028 values depend on the GSE8191 "
      << "microarray series, which is not bundled; they are documented, not asserted.";
  detail = out.str();
  return worst < 1e-12;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char *name;
    bool (*function)(std::string &);
  };
  const Entry entries[] = {
      {1, "enrichment reference rows", criterion_enrichment_rows},
      {2, "factorization identity suite", criterion_svd_suite},
      {3, "score-magnitude identities", criterion_score_identities},
      {4, "half-panel scaling stability", criterion_subset_stability},
      {5, "withheld-group classification", criterion_withheld_classification},
      {6, "raw-replicate bias direction", criterion_bias_direction},
      {7, "two-factor fit vs least-squares oracle", criterion_anova_oracle},
      {8, "Ward linkage vs objective oracle", criterion_ward_oracle},
      {9, "determinism and persistence", criterion_determinism},
      {10, "fluctuation hand values", criterion_fluctuation},
  };
  int failures = 0;
  for (const auto &entry : entries) {
    std::string detail;
    bool ok = false;
    try {
      ok = entry.function(detail);
    } catch (const std::exception &error) {
      detail = std::string("unexpected exception: ") + error.what();
    }
    if (!ok) ++failures;
    std::printf("criterion %2d (%s): %s - %s\n", entry.id, entry.name, ok ? "PASS" : "FAIL",
                detail.c_str());
  }
  if (failures == 0)
    std::printf("all %d criteria passed\n", static_cast<int>(std::size(entries)));
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures;
}
