// Prints one PASS/FAIL line per acceptance criterion and exits nonzero when
// any of them fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "support.hpp"
#include "vulnforge/curator.hpp"
#include "vulnforge/dataset_store.hpp"
#include "vulnforge/diff.hpp"
#include "vulnforge/eval.hpp"
#include "vulnforge/function_extractor.hpp"
#include "vulnforge/lexer.hpp"
#include "vulnforge/pipeline.hpp"
#include "vulnforge/text.hpp"

using namespace vulnforge;

namespace {

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() == 5) failures.push_back("...");
  }
};

// Predictions and truth realizing the given confusion counts.
MetricsReport metrics_for(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  std::vector<PredictionRecord> preds;
  std::map<std::string, int> truth;
  const auto add = [&](const char* tag, std::size_t count, int actual, int predicted) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto id = std::string(tag) + std::to_string(i);
      truth[id] = actual;
      preds.push_back({id, predicted ? 0.75 : 0.25, predicted});
    }
  };
  add("tp", tp, 1, 1);
  add("fp", fp, 0, 1);
  add("tn", tn, 0, 0);
  add("fn", fn, 1, 0);
  return compute_metrics(preds, truth);
}

void metric_oracle(Check& c) {
  // Counts chosen so that tp / (tp + fp) and tp / (tp + fn) hit the reference
  // precision and recall.
  struct Row {
    const char* name;
    std::size_t tp, fp, fn;
    double precision, recall, reference_f1;
  };
  const Row rows[] = {
      {"P 0.97 / R 0.86", 8342, 258, 1358, 0.97, 0.86, 0.91},
      {"P 0.9674 / R 0.928", 9280, 313, 720, 0.9674, 0.928, 0.9473},
      {"P 0.877 / R 0.90", 9000, 1262, 1000, 0.877, 0.90, 0.889},
  };
  for (const auto& r : rows) {
    const auto m = metrics_for(r.tp, r.fp, 1000, r.fn);
    const double f1_from_pr = 2 * r.precision * r.recall / (r.precision + r.recall);
    c.expect(std::abs(m.precision - r.precision) < 5e-5, std::string(r.name) + " precision");
    c.expect(std::abs(m.recall - r.recall) < 5e-5, std::string(r.name) + " recall");
    c.expect(std::abs(m.f1 - f1_from_pr) < 0.005, std::string(r.name) + " F1 vs harmonic mean of P and R");
    c.expect(std::abs(m.f1 - r.reference_f1) < 0.005, std::string(r.name) + " F1 vs reference F1");
  }
  // Reference F1 values to two decimals: 91.17, 94.73 and 88.84 percent.
  c.expect(std::abs(metrics_for(8342, 258, 1000, 1358).f1 - 0.9117) < 0.005, "91.17");
  c.expect(std::abs(metrics_for(9280, 313, 1000, 720).f1 - 0.9473) < 0.005, "94.73");
  c.expect(std::abs(metrics_for(9000, 1262, 1000, 1000).f1 - 0.8884) < 0.005, "88.84");
}

void split_oracle(Check& c) {
  std::vector<FunctionSample> samples(236663);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].sample_id = std::to_string(i);
    samples[i].label = static_cast<int>(i % 2);
  }
  CurationConfig config;
  const auto splits = make_splits(samples, config);
  std::map<Split, std::size_t> sizes;
  for (const auto& [id, split] : splits) ++sizes[split];
  c.expect(splits.size() == 236663, "every id assigned");
  c.expect(sizes[Split::train] == 189330, "train " + std::to_string(sizes[Split::train]));
  c.expect(sizes[Split::validation] == 23666, "validation " + std::to_string(sizes[Split::validation]));
  c.expect(sizes[Split::test] == 23667, "test " + std::to_string(sizes[Split::test]));
}

const FunctionSample* find(const std::vector<FunctionSample>& samples, const std::string& cwe, int label) {
  for (const auto& s : samples) {
    if (s.cwe_id == cwe && s.label == label) return &s;
  }
  return nullptr;
}

void copy_and_authenticate_fixes(Check& c) {
  vftest::TempDir dir;
  auto config = load_config(vftest::fixture_dir() / "pipeline.toml");
  config.work_dir = dir / "work";
  config.cache.cache_dir = dir / "cache";
  config.offline = true;
  Pipeline p(config);
  p.fetch_cves();
  p.mine_commits();
  p.extract();
  std::vector<FunctionSample> samples;
  for (const auto& line : split_lines(read_file(p.samples_path()))) {
    samples.push_back(nlohmann::json::parse(line).get<FunctionSample>());
  }

  struct Row {
    const char* cwe;
    std::vector<int> flaw_nos;
    std::vector<std::string> flaw;
    std::vector<int> patch_nos;
    std::vector<std::string> patch;
  };
  const Row rows[] = {
      {"CWE-120", {3}, {"strcpy(buf, src);"}, {3, 4}, {"strncpy(buf, src, sizeof(buf) - 1);", "buf[9] = '\\0';"}},
      {"CWE-253", {2}, {"if(strcmp(input, \"admin\"))"}, {2}, {"if(strcmp(input, \"admin\") == 0)"}},
  };
  for (const auto& r : rows) {
    const auto* vuln = find(samples, r.cwe, 1);
    const auto* safe = find(samples, r.cwe, 0);
    c.expect(vuln && safe, std::string(r.cwe) + " pair present");
    if (!vuln || !safe) continue;
    c.expect(vuln->flaw_line_nos == r.flaw_nos, std::string(r.cwe) + " flaw line numbers");
    c.expect(vuln->flaw_lines == r.flaw, std::string(r.cwe) + " flaw lines");
    c.expect(vuln->pair_id && vuln->pair_id == safe->pair_id, std::string(r.cwe) + " twin pair_id");
    c.expect(safe->patch_line_nos == r.patch_nos, std::string(r.cwe) + " patch line numbers");
    c.expect(safe->patch_lines == r.patch, std::string(r.cwe) + " patch lines");
    c.expect(check_invariants(*vuln).empty() && check_invariants(*safe).empty(), std::string(r.cwe) + " invariants");
  }
  const auto* copy = find(samples, "CWE-120", 1);
  c.expect(copy && copy->cwe_title == "Buffer Copy without Checking Size" && copy->cwe_type == "Buffer Overflow",
           "CWE-120 title and type");
  const auto* auth = find(samples, "CWE-253", 1);
  c.expect(auth && auth->cwe_title == "Incorrect Check of Return Value" && auth->cwe_type == "Logic Error in Auth",
           "CWE-253 title and type");
}

void extractor_corpus(Check& c) {
  std::size_t files = 0, spans_total = 0;
  for (const auto& entry : std::filesystem::directory_iterator(vftest::fixture_dir() / "corpus")) {
    const auto path = entry.path();
    if (path.extension() == ".json") continue;
    ++files;
    const auto expected = nlohmann::json::parse(vftest::slurp(path.string() + ".spans.json"));
    const auto spans = extract_functions(vftest::slurp(path));
    bool same = spans.size() == expected.size();
    for (std::size_t i = 0; same && i < spans.size(); ++i) {
      same = spans[i].name == expected[i].at("name") && spans[i].start_line == expected[i].at("start_line") &&
             spans[i].end_line == expected[i].at("end_line");
    }
    spans_total += expected.size();
    c.expect(same, path.filename().string());
  }
  c.expect(files == 50, "50 annotated files, found " + std::to_string(files));
  c.expect(spans_total > 0, "annotations present");
}

// Single-row dynamic-programming Levenshtein over tokens.
std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diagonal + (a[i - 1] != b[j - 1])});
      diagonal = up;
    }
  }
  return row[b.size()];
}

std::vector<std::string> ids(const std::vector<FunctionSample>& samples) {
  std::vector<std::string> out;
  for (const auto& s : samples) out.push_back(s.sample_id);
  return out;
}

void curation_properties(Check& c) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto corpus = vftest::random_corpus(seed, 200);
    const auto tag = " (seed " + std::to_string(seed) + ")";
    CurationConfig config;
    config.seed = seed;

    const auto once = deduplicate(corpus, config);
    c.expect(ids(deduplicate(once, config)) == ids(once), "dedup idempotent" + tag);

    // No normalized text may survive under both labels unless the two
    // survivors are twins with differing raw text.
    std::map<std::string, std::vector<const FunctionSample*>> by_text;
    for (const auto& s : once) by_text[normalize_code(s.labeled_code(), config.dedup_normalization)].push_back(&s);
    for (const auto& [text, group] : by_text) {
      std::set<int> labels;
      for (const auto* s : group) labels.insert(s->label);
      if (labels.size() < 2) continue;
      bool twins = group.size() == 2 && group[0]->pair_id && group[0]->pair_id == group[1]->pair_id;
      c.expect(twins, "cross-label conflict survived" + tag);
    }

    const auto trimmed = drop_trivial_fixes(once);
    std::map<std::string, std::vector<const FunctionSample*>> pairs;
    for (const auto& s : trimmed) {
      if (s.pair_id) pairs[*s.pair_id].push_back(&s);
    }
    for (const auto& [pair, members] : pairs) {
      if (members.size() != 2) continue;
      c.expect(normalize_code(members[0]->labeled_code(), Normalization::strip_ws_comments) !=
                   normalize_code(members[1]->labeled_code(), Normalization::strip_ws_comments),
               "whitespace-only fix survived" + tag);
    }

    std::size_t n1 = 0, n0 = 0;
    for (const auto& s : corpus) ++(s.label ? n1 : n0);
    config.hard_negative_max_distance = 1.0;
    c.expect(mine_hard_negatives(corpus, config).size() == n1 * n0, "threshold 1.0 gives n1*n0" + tag);

    config.hard_negative_max_distance = 0.15;
    std::set<std::pair<std::string, std::string>> expected, got;
    std::vector<std::vector<std::string>> tokens;
    for (const auto& s : corpus) tokens.push_back(code_tokens(s.labeled_code()));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& v = corpus[i];
      if (v.label != 1) continue;
      const auto& a = tokens[i];
      for (std::size_t j = 0; j < corpus.size(); ++j) {
        const auto& s = corpus[j];
        if (s.label != 0) continue;
        const auto& b = tokens[j];
        const double longest = static_cast<double>(std::max(a.size(), b.size()));
        const double d = longest == 0 ? 0.0 : static_cast<double>(levenshtein(a, b)) / longest;
        if ((v.pair_id && v.pair_id == s.pair_id) || d <= 0.15) expected.insert({v.sample_id, s.sample_id});
      }
    }
    for (const auto& p : mine_hard_negatives(corpus, config)) got.insert({p.vulnerable_id, p.secure_id});
    c.expect(got == expected, "hard negatives match brute force" + tag);
  }
}

int cli(const std::vector<std::string>& args, std::shared_ptr<Transport> transport = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, std::move(transport));
  if (code != 0) std::cerr << err.str();
  return code;
}

void determinism(Check& c) {
  vftest::TempDir dir;
  const auto config = (vftest::fixture_dir() / "pipeline.toml").string();
  const auto build = [&](const std::string& run, const std::vector<std::string>& extra,
                         std::shared_ptr<Transport> transport) {
    std::vector<std::string> args{"build", "-c", config, "--offline", "--work-dir", (dir / run).string(),
                                  "--cache-dir", (dir / "cache").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    c.expect(cli(args, std::move(transport)) == 0, run + " build succeeds");
    return read_dataset(dir / run / "dataset");
  };
  // The first run reads the recorded responses; the others must be served
  // entirely from cache by a transport that refuses every request.
  const auto first = build("one", {}, nullptr);
  auto refusing = std::make_shared<OfflineTransport>();
  const auto second = build("two", {}, refusing);
  c.expect(first.manifest.content_hash == second.manifest.content_hash, "identical content_hash");
  c.expect(read_file(dir / "one/dataset/samples.jsonl") == read_file(dir / "two/dataset/samples.jsonl"),
           "identical samples.jsonl");
  const auto reseeded = build("three", {"--seed", "1234567"}, refusing);
  c.expect(refusing->attempts() == 0, "no request reached the transport");
  c.expect(read_file(dir / "one/samples.jsonl") == read_file(dir / "three/samples.jsonl"),
           "extracted samples independent of seed");

  // Samples kept by both seeds are identical; anything else differs only by
  // balance selection.
  std::map<std::string, FunctionSample> kept;
  for (const auto& s : first.samples) kept[s.sample_id] = s;
  for (const auto& s : reseeded.samples) {
    if (kept.count(s.sample_id)) c.expect(kept[s.sample_id] == s, "sample content changed with seed");
  }
  auto pre_balance = [](const Dataset& d) { return d.report.output + d.report.balance_removed; };
  c.expect(pre_balance(first) == pre_balance(reseeded), "same pre-balance population");
  c.expect(first.report.hard_negative_pairs == reseeded.report.hard_negative_pairs, "same hard negatives");
  c.expect(first.manifest.total == reseeded.manifest.total, "same dataset size");
}

void baseline_sanity(Check& c) {
  const auto corpus = vftest::separable_corpus(200, 2024);
  CurationConfig config;
  const auto splits = make_splits(corpus, config);
  std::vector<FunctionSample> train, held_out;
  for (const auto& s : corpus) (splits.at(s.sample_id) == Split::train ? train : held_out).push_back(s);
  const auto model = train_baseline(train);
  const auto m = compute_metrics(predict_baseline(model, held_out), truth_labels(held_out));
  c.expect(m.f1 >= 0.95, "held-out F1 " + std::to_string(m.f1));

  // Shuffled labels: the permutation keeps the class counts.
  std::vector<int> labels;
  for (const auto& s : corpus) labels.push_back(s.label);
  std::mt19937_64 rng(7);
  std::shuffle(labels.begin(), labels.end(), rng);
  auto shuffled = corpus;
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    auto& s = shuffled[i];
    const auto code = s.labeled_code();
    s.label = labels[i];
    s.function_before.reset();
    s.function_after.reset();
    s.pair_id.reset();
    (s.label ? s.function_before : s.function_after) = code;
    s.sample_id = make_sample_id(s.label, code);
  }
  const auto shuffled_splits = make_splits(shuffled, config);
  train.clear();
  held_out.clear();
  for (const auto& s : shuffled) (shuffled_splits.at(s.sample_id) == Split::train ? train : held_out).push_back(s);
  const auto noise = train_baseline(train);
  const auto n = compute_metrics(predict_baseline(noise, held_out), truth_labels(held_out));
  c.expect(n.f1 >= 0.35 && n.f1 <= 0.65, "shuffled-label F1 " + std::to_string(n.f1));
}

std::string random_text(std::mt19937_64& rng) {
  static const char* kLines[] = {"int x;", "{", "}", "", "return 0;", "  if (p) free(p);", "x++;", "/* c */"};
  std::uniform_int_distribution<int> n(0, 40), pick(0, 7);
  std::string out;
  const int lines = n(rng);
  for (int i = 0; i < lines; ++i) out += std::string(kLines[pick(rng)]) + "\n";
  if (!out.empty() && std::bernoulli_distribution(0.2)(rng)) out.pop_back();
  return out;
}

std::string mutate(const std::string& text, std::mt19937_64& rng) {
  const bool final_newline = text.empty() || text.back() == '\n';
  auto lines = split_lines(text);
  std::uniform_int_distribution<int> ops(1, 5);
  const int count = ops(rng);
  for (int k = 0; k < count; ++k) {
    const auto i = std::uniform_int_distribution<std::size_t>(0, lines.size())(rng);
    switch (ops(rng)) {
      case 1: lines.insert(lines.begin() + i, "added " + std::to_string(k)); break;
      case 2: if (i < lines.size()) lines.erase(lines.begin() + i); break;
      case 3: if (i < lines.size()) lines[i] = "changed " + std::to_string(k); break;
      case 4: if (i < lines.size()) lines.insert(lines.begin() + i, lines[i]); break;
      default: lines.push_back("tail"); break;
    }
  }
  const bool keep_newline = std::bernoulli_distribution(0.9)(rng) ? final_newline : !final_newline;
  return join_lines(lines, keep_newline && !lines.empty());
}

void diff_round_trip(Check& c) {
  std::mt19937_64 rng(1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto before = random_text(rng);
    const auto after = mutate(before, rng);
    const auto text = format_unified(diff_texts(before, after), "a/f.c", "b/f.c");
    std::string applied;
    try {
      applied = apply_hunks(before, parse_unified(text));
    } catch (const std::exception& e) {
      applied = std::string("<threw ") + e.what() + ">";
    }
    c.expect(applied == after, "trial " + std::to_string(trial));
  }
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    double budget_seconds;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric self-consistency", 1, metric_oracle},
      {2, "split arithmetic", 5, split_oracle},
      {3, "copy and authenticate fixes end to end", 1, copy_and_authenticate_fixes},
      {4, "function extractor on annotated corpus", 5, extractor_corpus},
      {5, "curation properties over 100 seeds", 30, curation_properties},
      {6, "offline build determinism", 60, determinism},
      {7, "baseline sanity", 30, baseline_sanity},
      {8, "diff round trip", 30, diff_round_trip},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > criterion.budget_seconds) {
      check.failures.push_back("took " + std::to_string(seconds) + " s, budget " +
                               std::to_string(criterion.budget_seconds) + " s");
    }
    const bool ok = check.failures.empty();
    failed += !ok;
    std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", criterion.number, criterion.name, seconds);
    for (const auto& f : check.failures) std::printf("    %s\n", f.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
