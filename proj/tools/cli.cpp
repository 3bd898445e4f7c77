#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vulnforge/config.hpp"
#include "vulnforge/cwe.hpp"
#include "vulnforge/dataset_store.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/eval.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/pipeline.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMitreCatalogUrl = "https://cwe.mitre.org/data/csv/1000.csv.zip";

struct PipelineFlags {
  std::string config;
  bool offline = false;
  std::string work_dir;
  std::string dataset_dir;
  std::string cache_dir;
  std::string replay_dir;
  std::string cwe_catalog;
  std::vector<std::string> keywords;
  std::optional<double> severity;
  std::optional<std::uint64_t> seed;
  bool include_unchanged = false;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config, "TOML config file")->check(CLI::ExistingFile);
    app.add_flag("--offline", offline, "never touch the network; serve from cache or replay_dir");
    app.add_option("--work-dir", work_dir, "stage output directory");
    app.add_option("-o,--dataset-dir", dataset_dir, "curated dataset directory");
    app.add_option("--cache-dir", cache_dir, "HTTP response cache");
    app.add_option("--replay-dir", replay_dir, "recorded responses to serve instead of the network")
        ->check(CLI::ExistingDirectory);
    app.add_option("--cwe-catalog", cwe_catalog, "CWE catalog CSV")->check(CLI::ExistingFile);
    app.add_option("-k,--keyword", keywords, "project keyword (repeatable)");
    app.add_option("--severity", severity, "keep CVEs scoring strictly above this")
        ->check(CLI::Range(0.0, 10.0));
    app.add_option("--seed", seed, "curation seed");
    app.add_flag("--include-unchanged", include_unchanged,
                 "also emit secure samples for functions the fix left alone");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
    apply_environment(c);
    const fs::path cwd = fs::current_path();
    if (!work_dir.empty()) c.work_dir = work_dir;
    if (!dataset_dir.empty()) c.dataset_dir = fs::path(dataset_dir);
    if (!cache_dir.empty()) c.cache.cache_dir = cache_dir;
    if (!replay_dir.empty()) c.replay_dir = fs::path(replay_dir);
    if (!cwe_catalog.empty()) c.cwe_catalog = fs::path(cwe_catalog);
    if (!keywords.empty()) c.keywords = keywords;
    if (severity) c.severity_threshold = *severity;
    if (seed) c.curation.seed = *seed;
    if (include_unchanged) c.build.include_unchanged = true;
    c.offline = c.offline || offline;
    c.validate();
    return c;
  }
};

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v * 100.0 << "%";
  return s.str();
}

void print_stage(std::ostream& out, const StageRecord& r) {
  out << r.stage << ": " << r.status;
  if (r.counts.is_object() && !r.counts.empty()) {
    out << " (";
    bool first = true;
    for (const auto& [k, v] : r.counts.items()) {
      if (!v.is_number()) continue;
      out << (first ? "" : ", ") << k << "=" << v.dump();
      first = false;
    }
    out << ")";
  }
  if (!r.output.empty()) out << " -> " << r.output;
  out << "\n";
}

std::optional<Split> parse_split(const std::string& text) {
  if (text.empty() || text == "all") return std::nullopt;
  return split_from_string(text);
}

std::vector<FunctionSample> select_split(const Dataset& d, const std::optional<Split>& split) {
  if (!split) return d.samples;
  std::vector<FunctionSample> out;
  for (const auto& s : d.samples) {
    if (d.splits.at(s.sample_id) == *split) out.push_back(s);
  }
  return out;
}

void print_metrics_line(std::ostream& out, const MetricsReport& m) {
  out << "F1 " << pct(m.f1) << "  P " << pct(m.precision) << "  R " << pct(m.recall) << "  Acc "
      << pct(m.accuracy) << "  (tp=" << m.tp << " fp=" << m.fp << " tn=" << m.tn << " fn=" << m.fn
      << ", coverage " << pct(m.coverage) << ")\n";
}

void print_cross_eval(std::ostream& out, const std::vector<CrossEvalResult>& results, bool as_json,
                      const std::string& label) {
  if (as_json) {
    out << json{{"model", label}, {"results", results}}.dump(2) << "\n";
    return;
  }
  std::vector<std::pair<std::string, MetricsReport>> rows;
  for (const auto& r : results) rows.emplace_back(r.dataset, r.report);
  out << label << "\n" << format_metrics_table(rows);
  for (const auto& r : results) {
    std::vector<std::pair<std::string, MetricsReport>> projects;
    for (const auto& p : r.projects) projects.emplace_back(p.project, p.report);
    out << "\n" << r.dataset << " by project\n" << format_metrics_table(projects, "project");
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<Transport> transport) {
  CLI::App app{"vulnforge: build, curate and score function-level C/C++ vulnerability corpora",
               "vulnforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vulnforge 0.1.0");

  PipelineFlags pf;
  std::function<int()> action;

  const auto pipeline_command = [&](const char* name, const char* help, auto stage) {
    auto* cmd = app.add_subcommand(name, help);
    pf.attach(*cmd);
    cmd->callback([&, stage, name] {
      action = [&, stage, name]() -> int {
        Pipeline p(pf.resolve(), transport);
        p.log().command = name;
        int code = kExitOk;
        try {
          for (const auto& r : stage(p)) print_stage(out, r);
        } catch (...) {
          p.log().exit_code = kExitOperational;
          try {
            p.write_log();
          } catch (const std::exception&) {
          }
          throw;
        }
        p.write_log();
        out << "run log: " << p.log_path().string() << "\n";
        return code;
      };
    });
  };
  using Records = std::vector<StageRecord>;
  pipeline_command("fetch-cves", "query CVE advisories by keyword and filter by severity",
                   [](Pipeline& p) { return Records{p.fetch_cves()}; });
  pipeline_command("mine-commits", "fetch fix commits referenced by the advisories",
                   [](Pipeline& p) { return Records{p.mine_commits()}; });
  pipeline_command("extract", "extract labeled function samples from fix commits",
                   [](Pipeline& p) { return Records{p.extract()}; });
  pipeline_command("curate", "deduplicate, pair, balance and split into a dataset",
                   [](Pipeline& p) { return Records{p.curate()}; });
  pipeline_command("build", "run every enabled stage", [](Pipeline& p) { return p.build(); });

  // import
  std::string import_adapter, import_input, import_out;
  auto* import_cmd = app.add_subcommand("import", "convert an external dataset into samples JSONL");
  import_cmd->add_option("--adapter", import_adapter, "bigvul_csv or generic_jsonl")->required();
  import_cmd->add_option("-i,--input", import_input, "input file")->required()->check(CLI::ExistingFile);
  import_cmd->add_option("-o,--out", import_out, "output JSONL")->required();
  import_cmd->callback([&] {
    action = [&]() -> int {
      std::vector<ImportDiagnostic> diag;
      const auto samples = import_external(import_input, import_adapter, &diag);
      std::string text;
      for (const auto& s : samples) text += json(s).dump() + "\n";
      write_file_atomic(import_out, text);
      for (const auto& d : diag) err << import_input << " row " << d.row << ": " << d.message << "\n";
      out << "imported " << samples.size() << " samples, rejected " << diag.size() << " rows -> "
          << import_out << "\n";
      return kExitOk;
    };
  });

  // stats
  std::string stats_dataset;
  std::size_t stats_top = 10;
  bool stats_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "manifest summary and CWE frequency table");
  stats_cmd->add_option("-d,--dataset", stats_dataset, "dataset directory")->required();
  stats_cmd->add_option("--top", stats_top, "rows of the CWE table (0 = all)");
  stats_cmd->add_flag("--json", stats_json, "emit JSON");
  stats_cmd->callback([&] {
    action = [&]() -> int {
      const auto d = read_dataset(stats_dataset);
      auto table = cwe_frequency(d.samples);
      if (stats_top > 0 && table.size() > stats_top) table.resize(stats_top);
      if (stats_json) {
        json rows = json::array();
        for (const auto& r : table) {
          rows.push_back({{"cwe_id", r.cwe_id}, {"count", r.count}, {"percentage", r.percentage}});
        }
        out << json{{"manifest", d.manifest}, {"report", d.report}, {"cwe_frequency", rows}}.dump(2) << "\n";
        return kExitOk;
      }
      const auto& m = d.manifest;
      out << "schema " << m.schema_version << ", " << m.total << " samples, content_hash "
          << m.content_hash << "\n";
      for (const auto& [split, c] : m.counts) {
        out << "  " << std::left << std::setw(11) << split << std::right << " vulnerable "
            << std::setw(8) << c[1] << "  secure " << std::setw(8) << c[0] << "\n";
      }
      out << "hard-negative pairs " << d.hard_negatives.size() << "\n\n";
      out << std::left << std::setw(12) << "CWE" << std::right << std::setw(8) << "count"
          << std::setw(10) << "percent" << "\n";
      for (const auto& r : table) {
        std::ostringstream p;
        p << std::fixed << std::setprecision(2) << r.percentage;
        out << std::left << std::setw(12) << r.cwe_id << std::right << std::setw(8) << r.count
            << std::setw(10) << p.str() << "\n";
      }
      return kExitOk;
    };
  });

  // score
  std::string score_pred, score_dataset, score_split;
  bool score_json = false;
  auto* score_cmd = app.add_subcommand("score", "score a prediction file against a dataset");
  score_cmd->add_option("-p,--pred", score_pred, "prediction file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("-d,--dataset", score_dataset, "dataset directory")->required();
  score_cmd->add_option("--split", score_split, "train, validation, test or all");
  score_cmd->add_flag("--json", score_json, "emit JSON");
  score_cmd->callback([&] {
    action = [&]() -> int {
      const auto d = read_dataset(score_dataset);
      const auto samples = select_split(d, parse_split(score_split));
      const auto preds = read_predictions(score_pred);
      const auto result = evaluate_dataset(fs::path(score_dataset).filename().string(), samples, preds.records);
      if (score_json) {
        out << json(result).dump(2) << "\n";
      } else {
        print_metrics_line(out, result.report);
        for (const auto& w : result.warnings) out << "warning: " << w << "\n";
      }
      return kExitOk;
    };
  });

  // cross-eval
  std::vector<std::string> ce_datasets, ce_preds;
  std::string ce_model, ce_split, ce_out;
  double ce_threshold = 0.5;
  bool ce_json = false;
  auto* ce_cmd = app.add_subcommand("cross-eval", "evaluate one model or prediction set per dataset");
  ce_cmd->add_option("-d,--dataset", ce_datasets, "dataset directory (repeatable)")->required();
  auto* ce_model_opt = ce_cmd->add_option("-m,--model", ce_model, "baseline model JSON")->check(CLI::ExistingFile);
  auto* ce_pred_opt = ce_cmd->add_option("-p,--pred", ce_preds, "prediction file per dataset");
  ce_model_opt->excludes(ce_pred_opt);
  ce_cmd->add_option("--split", ce_split, "train, validation, test or all");
  ce_cmd->add_option("--threshold", ce_threshold, "decision threshold for the model")->check(CLI::Range(0.0, 1.0));
  ce_cmd->add_option("--out", ce_out, "also write the JSON report here");
  ce_cmd->add_flag("--json", ce_json, "emit JSON");
  ce_cmd->callback([&] {
    if (ce_model.empty() && ce_preds.empty()) throw CLI::RequiredError("--model or --pred");
    action = [&]() -> int {
      std::vector<fs::path> dirs(ce_datasets.begin(), ce_datasets.end());
      const auto split = parse_split(ce_split);
      std::vector<CrossEvalResult> results;
      std::string label = "predictions";
      if (!ce_model.empty()) {
        results = cross_eval(load_model(ce_model), dirs, ce_threshold, split);
        label = "BoW+LR";
      } else {
        results = cross_eval(std::vector<fs::path>(ce_preds.begin(), ce_preds.end()), dirs, split);
      }
      print_cross_eval(out, results, ce_json, label);
      if (!ce_out.empty()) write_file_atomic(ce_out, json{{"model", label}, {"results", results}}.dump(2) + "\n");
      return kExitOk;
    };
  });

  // train-baseline
  std::string tb_dataset, tb_out, tb_split = "train", tb_eval_split, tb_predict_out, tb_config;
  double tb_threshold = 0.5;
  TrainingConfig tb;
  std::optional<int> tb_epochs, tb_ngram;
  std::optional<std::size_t> tb_min_freq;
  std::optional<double> tb_lr, tb_l2;
  std::optional<std::uint64_t> tb_seed;
  auto* tb_cmd = app.add_subcommand("train-baseline", "train the bag-of-words logistic regression baseline");
  tb_cmd->add_option("-d,--dataset", tb_dataset, "dataset directory")->required();
  tb_cmd->add_option("-o,--out", tb_out, "model JSON")->required();
  tb_cmd->add_option("-c,--config", tb_config, "TOML config ([baseline] table)")->check(CLI::ExistingFile);
  tb_cmd->add_option("--split", tb_split, "training split");
  tb_cmd->add_option("--eval-split", tb_eval_split, "report metrics on this split");
  tb_cmd->add_option("--predict-out", tb_predict_out, "write predictions for --eval-split");
  tb_cmd->add_option("--threshold", tb_threshold, "decision threshold")->check(CLI::Range(0.0, 1.0));
  tb_cmd->add_option("--epochs", tb_epochs, "gradient descent epochs");
  tb_cmd->add_option("--ngram-max", tb_ngram, "longest n-gram");
  tb_cmd->add_option("--min-token-freq", tb_min_freq, "vocabulary frequency cut");
  tb_cmd->add_option("--learning-rate", tb_lr, "step size");
  tb_cmd->add_option("--l2", tb_l2, "L2 penalty");
  tb_cmd->add_option("--seed", tb_seed, "initialization seed");
  tb_cmd->callback([&] {
    action = [&]() -> int {
      if (!tb_config.empty()) tb = load_config(tb_config).baseline;
      if (tb_epochs) tb.epochs = *tb_epochs;
      if (tb_ngram) tb.ngram_max = *tb_ngram;
      if (tb_min_freq) tb.min_token_freq = *tb_min_freq;
      if (tb_lr) tb.learning_rate = *tb_lr;
      if (tb_l2) tb.l2 = *tb_l2;
      if (tb_seed) tb.seed = *tb_seed;
      const auto d = read_dataset(tb_dataset);
      const auto model = train_baseline(select_split(d, parse_split(tb_split)), tb);
      save_model(tb_out, model);
      out << "BoW+LR: vocabulary " << model.vocabulary.size() << ", loss " << model.initial_loss
          << " -> " << model.final_loss << " -> " << tb_out << "\n";
      if (!tb_eval_split.empty()) {
        const auto eval = select_split(d, parse_split(tb_eval_split));
        const auto preds = predict_baseline(model, eval, tb_threshold);
        print_metrics_line(out, compute_metrics(preds, truth_labels(eval)));
        if (!tb_predict_out.empty()) write_predictions(tb_predict_out, {tb_threshold, preds});
      }
      return kExitOk;
    };
  });

  // cwe-refresh
  std::string cr_out, cr_url = kMitreCatalogUrl, cr_input, cr_cache;
  bool cr_offline = false;
  auto* cr_cmd = app.add_subcommand("cwe-refresh", "rebuild the local CWE catalog from the MITRE export");
  cr_cmd->add_option("-o,--out", cr_out, "catalog CSV to write")->required();
  cr_cmd->add_option("--url", cr_url, "export URL (zip or csv)");
  cr_cmd->add_option("-i,--input", cr_input, "read the export from a local file instead")->check(CLI::ExistingFile);
  cr_cmd->add_option("--cache-dir", cr_cache, "HTTP response cache");
  cr_cmd->add_flag("--offline", cr_offline, "serve the export from cache only");
  cr_cmd->callback([&] {
    action = [&]() -> int {
      std::string payload;
      if (!cr_input.empty()) {
        payload = read_file(cr_input);
      } else {
        PipelineConfig c;
        apply_environment(c);
        if (!cr_cache.empty()) c.cache.cache_dir = cr_cache;
        c.offline = cr_offline;
        Pipeline p(c, transport);
        const auto response =
            p.fetcher().get(cr_url, fs::path("cwe") / (sha256_hex(cr_url) + ".bin"));
        if (response.status != 200) {
          throw NetworkUnavailable(cr_url + " returned HTTP " + std::to_string(response.status));
        }
        payload = response.body;
      }
      const auto catalog = catalog_from_mitre_export(payload);
      write_file_atomic(cr_out, catalog.to_csv());
      out << "catalog: " << catalog.size() << " entries -> " << cr_out << "\n";
      return kExitOk;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << app.help();
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitOperational;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOperational;
  }
}

}  // namespace vulnforge
