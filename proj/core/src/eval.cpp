#include "vulnforge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vulnforge/errors.hpp"
#include "vulnforge/lexer.hpp"
#include "vulnforge/prng.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

SparseVector unit_scaled(SparseVector v) {
  double norm = 0.0;
  for (const auto& [i, x] : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& [i, x] : v) x /= norm;
  }
  return v;
}

double dot(const SparseVector& x, const std::vector<double>& w) {
  double z = w.back();
  for (const auto& [i, v] : x) z += w[i] * v;
  return z;
}

double training_loss(const std::vector<SparseVector>& xs, const std::vector<int>& ys,
                     const std::vector<double>& w, double l2) {
  double loss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double z = dot(xs[k], w);
    loss += ys[k] == 1 ? softplus(-z) : softplus(z);
  }
  loss /= static_cast<double>(xs.size());
  double reg = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) reg += w[i] * w[i];
  return loss + 0.5 * l2 * reg;
}

std::string percent(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v * 100.0;
  return out.str();
}

}  // namespace

std::string format_predictions(const PredictionFile& file) {
  json header = {{"format", kPredictionFormat}};
  header["threshold"] = file.threshold ? json(*file.threshold) : json(nullptr);
  std::string out = header.dump() + "\n";
  for (const auto& r : file.records) {
    out += json{{"sample_id", r.sample_id}, {"score", r.score}, {"predicted_label", r.predicted_label}}
               .dump();
    out.push_back('\n');
  }
  return out;
}

PredictionFile parse_predictions(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw InvalidPredictionFile("empty prediction file: missing header line");

  PredictionFile file;
  try {
    const auto header = json::parse(lines[first]);
    if (!header.is_object() || header.value("format", "") != kPredictionFormat) {
      throw InvalidPredictionFile("line " + std::to_string(first + 1) + ": header must declare format " +
                                  std::string(kPredictionFormat));
    }
    if (header.contains("threshold") && !header.at("threshold").is_null()) {
      file.threshold = header.at("threshold").get<double>();
    }
  } catch (const json::exception& e) {
    throw InvalidPredictionFile("line " + std::to_string(first + 1) + ": " + e.what());
  }

  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto where = "line " + std::to_string(i + 1) + ": ";
    PredictionRecord r;
    try {
      const auto j = json::parse(lines[i]);
      r.sample_id = j.at("sample_id").get<std::string>();
      r.score = j.at("score").get<double>();
      r.predicted_label = j.at("predicted_label").get<int>();
    } catch (const json::exception& e) {
      throw InvalidPredictionFile(where + e.what());
    }
    if (!(r.score >= 0.0 && r.score <= 1.0)) throw InvalidPredictionFile(where + "score outside [0, 1]");
    if (r.predicted_label != 0 && r.predicted_label != 1) {
      throw InvalidPredictionFile(where + "predicted_label must be 0 or 1");
    }
    if (file.threshold && r.predicted_label != (r.score >= *file.threshold ? 1 : 0)) {
      throw InvalidPredictionFile(where + "predicted_label disagrees with score and threshold");
    }
    file.records.push_back(std::move(r));
  }
  return file;
}

PredictionFile read_predictions(const fs::path& path) {
  try {
    return parse_predictions(read_file(path));
  } catch (const InvalidPredictionFile& e) {
    throw InvalidPredictionFile(path.string() + ": " + e.what());
  }
}

void write_predictions(const fs::path& path, const PredictionFile& file) {
  write_file_atomic(path, format_predictions(file));
}

void to_json(json& j, const MetricsReport& r) {
  j = json{{"tp", r.tp},   {"fp", r.fp},           {"tn", r.tn},         {"fn", r.fn},
           {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
           {"accuracy", r.accuracy}, {"coverage", r.coverage}};
}

void from_json(const json& j, MetricsReport& r) {
  r.tp = j.at("tp").get<std::size_t>();
  r.fp = j.at("fp").get<std::size_t>();
  r.tn = j.at("tn").get<std::size_t>();
  r.fn = j.at("fn").get<std::size_t>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.coverage = j.value("coverage", 0.0);
}

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  MetricsReport r{tp, fp, tn, fn};
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.accuracy = ratio(tp + tn, tp + fp + tn + fn);
  return r;
}

MetricsReport compute_metrics(const std::vector<PredictionRecord>& predictions,
                              const std::map<std::string, int>& truth) {
  std::set<std::string> seen;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& p : predictions) {
    const auto it = truth.find(p.sample_id);
    if (it == truth.end()) throw UnknownSampleId("prediction for unknown sample_id " + p.sample_id);
    if (!seen.insert(p.sample_id).second) {
      throw DuplicatePrediction("more than one prediction for sample_id " + p.sample_id);
    }
    const bool actual = it->second == 1;
    const bool predicted = p.predicted_label == 1;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && !actual) ++tn;
    if (!predicted && actual) ++fn;
  }
  auto r = metrics_from_counts(tp, fp, tn, fn);
  r.coverage = ratio(predictions.size(), truth.size());
  return r;
}

std::map<std::string, int> truth_labels(const std::vector<FunctionSample>& samples) {
  std::map<std::string, int> out;
  for (const auto& s : samples) out[s.sample_id] = s.label;
  return out;
}

std::vector<std::string> token_ngrams(std::string_view code, int ngram_max) {
  const auto tokens = code_tokens(code);
  std::vector<std::string> out;
  for (int n = 1; n <= ngram_max; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) gram += " " + tokens[i + static_cast<std::size_t>(k)];
      out.push_back(std::move(gram));
    }
  }
  return out;
}

SparseVector featurize(std::string_view code, const Vocabulary& vocabulary, int ngram_max) {
  std::map<std::size_t, double> counts;
  for (const auto& gram : token_ngrams(code, ngram_max)) {
    const auto it = vocabulary.find(gram);
    if (it != vocabulary.end()) counts[it->second] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

void to_json(json& j, const TrainingConfig& c) {
  j = json{{"ngram_max", c.ngram_max}, {"min_token_freq", c.min_token_freq}, {"epochs", c.epochs},
           {"learning_rate", c.learning_rate}, {"l2", c.l2}, {"seed", c.seed}};
}

void from_json(const json& j, TrainingConfig& c) {
  c = TrainingConfig{};
  c.ngram_max = j.value("ngram_max", c.ngram_max);
  c.min_token_freq = j.value("min_token_freq", c.min_token_freq);
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.l2 = j.value("l2", c.l2);
  c.seed = j.value("seed", c.seed);
}

double BowModel::response(std::string_view code) const {
  return dot(unit_scaled(featurize(code, vocabulary, training_config.ngram_max)), weights);
}

double BowModel::score(std::string_view code) const { return sigmoid(response(code)); }

void to_json(json& j, const BowModel& m) {
  j = json{{"kind", "BoW+LR"},
           {"vocabulary", m.vocabulary},
           {"weights", m.weights},
           {"training_config", m.training_config},
           {"initial_loss", m.initial_loss},
           {"final_loss", m.final_loss}};
}

void from_json(const json& j, BowModel& m) {
  m.vocabulary = j.at("vocabulary").get<Vocabulary>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.training_config = j.at("training_config").get<TrainingConfig>();
  m.initial_loss = j.value("initial_loss", 0.0);
  m.final_loss = j.value("final_loss", 0.0);
  if (m.weights.size() != m.vocabulary.size() + 1) {
    throw InvalidArgument("model weights length must be vocabulary size + 1");
  }
  std::vector<bool> used(m.vocabulary.size(), false);
  for (const auto& [token, index] : m.vocabulary) {
    if (index >= used.size() || used[index]) throw InvalidArgument("model vocabulary indices are not dense");
    used[index] = true;
  }
}

BowModel load_model(const fs::path& path) {
  try {
    return json::parse(read_file(path)).get<BowModel>();
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void save_model(const fs::path& path, const BowModel& model) {
  write_file_atomic(path, json(model).dump() + "\n");
}

BowModel train_baseline(const std::vector<FunctionSample>& train, const TrainingConfig& config) {
  std::size_t positives = 0;
  for (const auto& s : train) positives += s.label == 1 ? 1 : 0;
  if (positives == 0 || positives == train.size()) {
    throw EmptyClass("training data needs both labels; got " + std::to_string(positives) +
                     " vulnerable of " + std::to_string(train.size()));
  }
  if (config.ngram_max < 1 || config.epochs < 0 || !(config.learning_rate > 0) || config.l2 < 0) {
    throw InvalidArgument("invalid training configuration");
  }

  BowModel model;
  model.training_config = config;
  std::map<std::string, std::size_t> frequency;
  for (const auto& s : train) {
    for (auto& gram : token_ngrams(s.labeled_code(), config.ngram_max)) ++frequency[gram];
  }
  for (const auto& [gram, count] : frequency) {
    if (count >= config.min_token_freq) model.vocabulary.emplace(gram, model.vocabulary.size());
  }
  if (model.vocabulary.empty()) {
    throw DegenerateVocabulary("no token reaches min_token_freq=" + std::to_string(config.min_token_freq));
  }

  std::vector<SparseVector> xs;
  std::vector<int> ys;
  for (const auto& s : train) {
    xs.push_back(unit_scaled(featurize(s.labeled_code(), model.vocabulary, config.ngram_max)));
    ys.push_back(s.label == 1 ? 1 : 0);
  }

  auto& w = model.weights;
  w.assign(model.vocabulary.size() + 1, 0.0);
  Prng rng(config.seed);
  for (auto& x : w) x = (rng.uniform() - 0.5) * 0.02;
  model.initial_loss = training_loss(xs, ys, w, config.l2);

  const double n = static_cast<double>(xs.size());
  std::vector<double> grad(w.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double err = sigmoid(dot(xs[k], w)) - ys[k];
      for (const auto& [i, v] : xs[k]) grad[i] += err * v;
      grad.back() += err;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      double g = grad[i] / n;
      if (i + 1 < w.size()) g += config.l2 * w[i];
      w[i] -= config.learning_rate * g;
    }
  }
  model.final_loss = training_loss(xs, ys, w, config.l2);
  return model;
}

std::vector<PredictionRecord> predict_baseline(const BowModel& model,
                                               const std::vector<FunctionSample>& samples,
                                               double threshold) {
  std::vector<PredictionRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const double score = model.score(s.labeled_code());
    out.push_back({s.sample_id, score, score >= threshold ? 1 : 0});
  }
  return out;
}

void to_json(json& j, const CrossEvalResult& r) {
  json projects = json::array();
  for (const auto& p : r.projects) projects.push_back({{"project", p.project}, {"metrics", p.report}});
  j = json{{"dataset", r.dataset}, {"metrics", r.report}, {"projects", projects}, {"warnings", r.warnings}};
}

CrossEvalResult evaluate_dataset(const std::string& name, const std::vector<FunctionSample>& samples,
                                 const std::vector<PredictionRecord>& predictions) {
  CrossEvalResult result;
  result.dataset = name;
  result.report = compute_metrics(predictions, truth_labels(samples));

  std::map<std::string, std::string> project_of;
  std::map<std::string, std::map<std::string, int>> truth_by_project;
  for (const auto& s : samples) {
    project_of[s.sample_id] = s.project;
    truth_by_project[s.project][s.sample_id] = s.label;
  }
  std::map<std::string, std::vector<PredictionRecord>> by_project;
  for (const auto& p : predictions) by_project[project_of.at(p.sample_id)].push_back(p);
  for (const auto& [project, truth] : truth_by_project) {
    result.projects.push_back({project, compute_metrics(by_project[project], truth)});
  }

  if (result.report.tp + result.report.fn == 0) {
    result.warnings.push_back(name + ": no vulnerable samples; recall is reported as 0");
  }
  if (result.report.tn + result.report.fp == 0) {
    result.warnings.push_back(name + ": no secure samples");
  }
  if (result.report.coverage < 1.0) {
    result.warnings.push_back(name + ": predictions cover " + percent(result.report.coverage) +
                              "% of samples");
  }
  return result;
}

namespace {

std::vector<FunctionSample> restrict(const Dataset& d, const std::optional<Split>& split) {
  if (!split) return d.samples;
  std::vector<FunctionSample> out;
  for (const auto& s : d.samples) {
    if (d.splits.at(s.sample_id) == *split) out.push_back(s);
  }
  return out;
}

std::string dataset_name(const fs::path& dir) {
  auto p = dir;
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

}  // namespace

std::vector<CrossEvalResult> cross_eval(const BowModel& model, const std::vector<fs::path>& datasets,
                                        double threshold, const std::optional<Split>& split) {
  std::vector<CrossEvalResult> out;
  for (const auto& dir : datasets) {
    const auto samples = restrict(read_dataset(dir), split);
    out.push_back(evaluate_dataset(dataset_name(dir), samples, predict_baseline(model, samples, threshold)));
  }
  return out;
}

std::vector<CrossEvalResult> cross_eval(const std::vector<fs::path>& prediction_files,
                                        const std::vector<fs::path>& datasets,
                                        const std::optional<Split>& split) {
  if (prediction_files.size() != datasets.size()) {
    throw InvalidArgument("cross_eval needs one prediction file per dataset");
  }
  std::vector<CrossEvalResult> out;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto samples = restrict(read_dataset(datasets[i]), split);
    out.push_back(evaluate_dataset(dataset_name(datasets[i]), samples,
                                   read_predictions(prediction_files[i]).records));
  }
  return out;
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows,
                                 const std::string& first_column) {
  const std::vector<std::string> header = {first_column, "F1%", "P%", "R%", "Acc%", "TP", "FP",
                                           "TN", "FN", "coverage%"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& [name, r] : rows) {
    cells.push_back({name, percent(r.f1), percent(r.precision), percent(r.recall),
                     percent(r.accuracy), std::to_string(r.tp), std::to_string(r.fp),
                     std::to_string(r.tn), std::to_string(r.fn), percent(r.coverage)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        line += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace vulnforge
