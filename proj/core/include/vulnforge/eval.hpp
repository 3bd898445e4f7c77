#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vulnforge/dataset_store.hpp"
#include "vulnforge/sample.hpp"

namespace vulnforge {

inline constexpr std::string_view kPredictionFormat = "vulnforge-pred-v1";

struct PredictionRecord {
  std::string sample_id;
  double score = 0.0;  // in [0, 1]
  int predicted_label = 0;

  bool operator==(const PredictionRecord&) const = default;
};

struct PredictionFile {
  std::optional<double> threshold;
  std::vector<PredictionRecord> records;

  bool operator==(const PredictionFile&) const = default;
};

// Header line then one record per line, LF terminated.
std::string format_predictions(const PredictionFile& file);

// Throws InvalidPredictionFile naming the offending line: wrong format tag,
// score outside [0, 1], label not 0/1, or label inconsistent with the
// declared threshold.
PredictionFile parse_predictions(std::string_view text);
PredictionFile read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const PredictionFile& file);

struct MetricsReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double coverage = 0.0;  // predictions / truth entries

  bool operator==(const MetricsReport&) const = default;
};

void to_json(nlohmann::json& j, const MetricsReport& report);
void from_json(const nlohmann::json& j, MetricsReport& report);

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

// Throws UnknownSampleId, DuplicatePrediction.
MetricsReport compute_metrics(const std::vector<PredictionRecord>& predictions,
                              const std::map<std::string, int>& truth);

std::map<std::string, int> truth_labels(const std::vector<FunctionSample>& samples);

// "tok", "tok tok2", ... for n = 1..ngram_max over code_tokens(code).
std::vector<std::string> token_ngrams(std::string_view code, int ngram_max);

using Vocabulary = std::map<std::string, std::size_t>;
using SparseVector = std::vector<std::pair<std::size_t, double>>;  // sorted by index

// Raw n-gram counts; out-of-vocabulary n-grams are ignored.
SparseVector featurize(std::string_view code, const Vocabulary& vocabulary, int ngram_max);

struct TrainingConfig {
  int ngram_max = 2;
  std::size_t min_token_freq = 1;
  int epochs = 200;
  double learning_rate = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 42;

  bool operator==(const TrainingConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainingConfig& config);
void from_json(const nlohmann::json& j, TrainingConfig& config);

// Bag-of-words logistic regression. Feature vectors are scaled to unit L2
// norm before the linear response; weights.back() is the bias.
struct BowModel {
  Vocabulary vocabulary;
  std::vector<double> weights;
  TrainingConfig training_config;
  double initial_loss = 0.0;
  double final_loss = 0.0;

  double response(std::string_view code) const;
  double score(std::string_view code) const;

  bool operator==(const BowModel&) const = default;
};

void to_json(nlohmann::json& j, const BowModel& model);
void from_json(const nlohmann::json& j, BowModel& model);
BowModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const BowModel& model);

// Full-batch gradient descent, gradients accumulated in sample order.
// Throws EmptyClass, DegenerateVocabulary.
BowModel train_baseline(const std::vector<FunctionSample>& train, const TrainingConfig& config = {});

std::vector<PredictionRecord> predict_baseline(const BowModel& model,
                                               const std::vector<FunctionSample>& samples,
                                               double threshold = 0.5);

struct ProjectMetrics {
  std::string project;
  MetricsReport report;
};

struct CrossEvalResult {
  std::string dataset;
  MetricsReport report;
  std::vector<ProjectMetrics> projects;
  std::vector<std::string> warnings;
};

void to_json(nlohmann::json& j, const CrossEvalResult& result);

// Scores `predictions` against `samples`, with a per-project breakdown.
CrossEvalResult evaluate_dataset(const std::string& name, const std::vector<FunctionSample>& samples,
                                 const std::vector<PredictionRecord>& predictions);

// Evaluates a trained baseline on each dataset (restricted to `split` when set).
std::vector<CrossEvalResult> cross_eval(const BowModel& model,
                                        const std::vector<std::filesystem::path>& datasets,
                                        double threshold = 0.5,
                                        const std::optional<Split>& split = std::nullopt);

// Evaluates one prediction file per dataset.
std::vector<CrossEvalResult> cross_eval(const std::vector<std::filesystem::path>& prediction_files,
                                        const std::vector<std::filesystem::path>& datasets,
                                        const std::optional<Split>& split = std::nullopt);

// Aligned plain-text table, percentages with two decimals.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows,
                                 const std::string& first_column = "dataset");

}  // namespace vulnforge
