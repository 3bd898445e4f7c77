#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "vulnforge/curator.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/lexer.hpp"

using namespace vulnforge;
using vftest::make_sample;
using vftest::make_twin;

namespace {

std::vector<std::string> ids(const std::vector<FunctionSample>& samples) {
  std::vector<std::string> out;
  for (const auto& s : samples) out.push_back(s.sample_id);
  return out;
}

// Plain dynamic-programming Levenshtein, independent of the library's.
std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

std::vector<FunctionSample> counts_corpus(std::size_t vulnerable, std::size_t secure) {
  std::vector<FunctionSample> out;
  for (std::size_t i = 0; i < vulnerable; ++i) out.push_back(make_sample(1, "int v" + std::to_string(i) + "(void) {}"));
  for (std::size_t i = 0; i < secure; ++i) out.push_back(make_sample(0, "int s" + std::to_string(i) + "(void) {}"));
  return out;
}

std::array<std::size_t, 2> label_counts(const std::vector<FunctionSample>& samples) {
  std::array<std::size_t, 2> c{0, 0};
  for (const auto& s : samples) ++c[s.label];
  return c;
}

}  // namespace

TEST(Normalize, Modes) {
  EXPECT_EQ(normalize_code("int  a ;\n", Normalization::strip_ws), "int a ;");
  EXPECT_EQ(normalize_code("x=1; // fix\n", Normalization::strip_ws_comments), "x=1;");
  EXPECT_EQ(normalize_code("a /* b */ c", Normalization::strip_ws_comments), "a c");
  EXPECT_EQ(normalize_code("s = \"// keep\";", Normalization::strip_ws_comments), "s = \"// keep\";");
  const std::string raw = " weird\t\ncode  ";
  EXPECT_EQ(normalize_code(raw, Normalization::exact), raw);
}

TEST(Config, ValidationAndJson) {
  CurationConfig c;
  EXPECT_NO_THROW(c.validate());
  nlohmann::json j = c;
  EXPECT_EQ(j.get<CurationConfig>(), c);
  c.split_ratios = {0.5, 0.3, 0.3};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.balance_tolerance = 0.9;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.hard_negative_max_distance = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_THROW(split_from_string("holdout"), InvalidArgument);
  EXPECT_EQ(split_from_string("validation"), Split::validation);
}

TEST(Dedup, IdenticalFunctionsFromDifferentRepos) {
  CurationReport report;
  const auto out = deduplicate({make_sample(1, "int f() { return 1; }", "a/x", std::nullopt, "2019-01-01"),
                                make_sample(1, "int f() { return 1; }", "b/y", std::nullopt, "2018-01-01")},
                               {}, &report);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].project, "b/y");  // earliest published wins
  EXPECT_EQ(report.exact_dups, 1u);
}

TEST(Dedup, WhitespaceVariantsCollapseUnderStripWs) {
  const auto a = make_sample(1, "int f() {\n  return 1;\n}");
  const auto b = make_sample(1, "int f()  {\n\treturn 1;\n}\n");
  CurationReport report;
  EXPECT_EQ(deduplicate({a, b}, {}, &report).size(), 1u);
  EXPECT_EQ(report.near_dups, 1u);
  CurationConfig exact;
  exact.dedup_normalization = Normalization::exact;
  EXPECT_EQ(deduplicate({a, b}, exact).size(), 2u);
}

TEST(Dedup, CrossLabelConflictRemovesBoth) {
  CurationReport report;
  const auto out = deduplicate({make_sample(1, "int g() { return 0; }", "datasetA/p"),
                                make_sample(0, "int g() {  return 0; }", "datasetB/q"),
                                make_sample(0, "int other() {}")},
                               {}, &report);
  EXPECT_EQ(ids(out), (std::vector<std::string>{make_sample(0, "int other() {}").sample_id}));
  EXPECT_EQ(report.conflicts, 2u);
}

TEST(Dedup, TwinClashKeepsTwin) {
  // A twin whose texts differ only in whitespace clashes with itself under
  // strip_ws, but it is a real pair, not a labeling conflict.
  auto [v, s] = make_twin("int h() { return 1; }", "int h() {\n  return 1;\n}", "p1");
  CurationReport report;
  EXPECT_EQ(deduplicate({v, s}, {}, &report).size(), 2u);
  EXPECT_EQ(report.conflicts, 0u);
}

TEST(TrivialFixes, WhitespaceOnlyPairRemoved) {
  auto [v, s] = make_twin("int f(int a) {\n  return a;\n}", "int f(int a) {\n    return a;  // same\n}", "p");
  CurationReport report;
  EXPECT_TRUE(drop_trivial_fixes({v, s}, &report).empty());
  EXPECT_EQ(report.whitespace_only_fixes, 2u);
}

TEST(TrivialFixes, RealFixKeptAndUnpairedKept) {
  auto [v, s] = make_twin("int f(int *a) {\n  return a[9];\n}",
                          "int f(int *a) {\n  if (!a) return 0;\n  return a[9];\n}", "p");
  const auto lone = make_sample(1, "void g(void) {}");
  EXPECT_EQ(drop_trivial_fixes({v, s, lone}).size(), 3u);
}

TEST(Unlink, ClearsOrphanedPairIds) {
  auto [v, s] = make_twin("int a() { x(); }", "int a() { y(); }", "p");
  CurationReport report;
  const auto out = unlink_orphans({v}, &report);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_FALSE(out[0].pair_id);
  EXPECT_EQ(report.unlinked_twins, 1u);
  EXPECT_TRUE(unlink_orphans({v, s})[0].pair_id);
}

TEST(EditDistance, Basics) {
  EXPECT_DOUBLE_EQ(normalized_edit_distance({}, {}), 0.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance({"a"}, {}), 1.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance({"a", "b", "c", "d"}, {"a", "x", "c", "d"}), 0.25);
  EXPECT_DOUBLE_EQ(normalized_edit_distance({"k", "i", "t"}, {"s", "i", "t", "s"}), 0.5);
}

TEST(HardNegatives, PatternReversalTwins) {
  const std::string before =
      "static void\nxsltReverseCompMatch(xsltParserContextPtr ctxt, xsltCompMatchPtr comp) {\n"
      "    if (comp->pattern[0] != '/') {\n        xmlChar *query;\n"
      "        query = xmlStrdup((const xmlChar *)\"\");    // Missing string!\n"
      "        query = xmlStrcat(query, comp->pattern);\n        xmlFree((xmlChar *) comp->pattern);\n"
      "        comp->pattern = query;\n    }\n}";
  const std::string missing = "\"\");    // Missing string!";
  std::string after = before;
  after.replace(after.find(missing), missing.size(), "\"//\");");
  const auto v = make_sample(1, before);
  const auto s = make_sample(0, after);
  const auto pairs = mine_hard_negatives({v, s}, {});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].vulnerable_id, v.sample_id);
  EXPECT_EQ(pairs[0].secure_id, s.sample_id);
  EXPECT_FALSE(pairs[0].twin);
  EXPECT_GT(pairs[0].distance, 0.0);
  EXPECT_LE(pairs[0].distance, 0.15);
}

TEST(HardNegatives, DistantPairNotMined) {
  const auto pairs = mine_hard_negatives(
      {make_sample(1, "a b c d e f g h i j"), make_sample(0, "a z y x w v u t s r")}, {});
  EXPECT_TRUE(pairs.empty());
}

TEST(HardNegatives, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto corpus = vftest::random_corpus(seed, 60);
    for (double threshold : {0.0, 0.15, 0.4, 1.0}) {
      CurationConfig config;
      config.hard_negative_max_distance = threshold;
      std::set<std::pair<std::string, std::string>> expected;
      for (const auto& v : corpus) {
        if (v.label != 1) continue;
        for (const auto& s : corpus) {
          if (s.label != 0) continue;
          const auto a = code_tokens(v.labeled_code());
          const auto b = code_tokens(s.labeled_code());
          const double longest = static_cast<double>(std::max(a.size(), b.size()));
          const double d = longest == 0 ? 0.0 : static_cast<double>(levenshtein(a, b)) / longest;
          const bool twin = v.pair_id && v.pair_id == s.pair_id;
          if (twin || d <= threshold) expected.insert({v.sample_id, s.sample_id});
        }
      }
      std::set<std::pair<std::string, std::string>> got;
      for (const auto& p : mine_hard_negatives(corpus, config)) got.insert({p.vulnerable_id, p.secure_id});
      ASSERT_EQ(got, expected) << "seed " << seed << " threshold " << threshold;
    }
  }
}

TEST(Balance, BalancedTotalsUnchanged) {
  // 119,231 secure vs 117,432 vulnerable: ratio 1.0153 within 1.05.
  std::vector<FunctionSample> samples;
  samples.reserve(236663);
  for (int i = 0; i < 117432; ++i) {
    FunctionSample s;
    s.label = 1;
    s.sample_id = "v" + std::to_string(i);
    samples.push_back(std::move(s));
  }
  for (int i = 0; i < 119231; ++i) {
    FunctionSample s;
    s.label = 0;
    s.sample_id = "s" + std::to_string(i);
    samples.push_back(std::move(s));
  }
  CurationReport report;
  const auto out = balance_classes(samples, {}, {}, &report);
  EXPECT_EQ(out.size(), samples.size());
  EXPECT_EQ(report.balance_removed, 0u);
}

TEST(Balance, ExactBalance) {
  CurationConfig c;
  c.balance_tolerance = 1.0;
  EXPECT_EQ(label_counts(balance_classes(counts_corpus(1000, 100), c, {})), (std::array<std::size_t, 2>{100, 100}));
}

TEST(Balance, SeededSubsampleIsReproducible) {
  CurationConfig c;
  c.balance_tolerance = 1.2;
  c.seed = 17;
  const auto corpus = counts_corpus(150, 100);
  const auto a = balance_classes(corpus, c, {});
  const auto b = balance_classes(corpus, c, {});
  EXPECT_EQ(label_counts(a), (std::array<std::size_t, 2>{100, 120}));
  EXPECT_EQ(ids(a), ids(b));
  c.seed = 18;
  EXPECT_NE(ids(balance_classes(corpus, c, {})), ids(a));
}

TEST(Balance, HardNegativesAreProtected) {
  auto corpus = counts_corpus(10, 2);
  std::vector<HardNegativePair> pairs;
  for (int i = 0; i < 8; ++i) pairs.push_back({corpus[i].sample_id, corpus[10].sample_id, 0.1, false});
  CurationConfig c;
  c.balance_tolerance = 1.0;
  CurationReport report;
  const auto out = balance_classes(corpus, c, pairs, &report);
  EXPECT_EQ(label_counts(out)[1], 8u);
  EXPECT_EQ(report.balance_removed, 2u);
  EXPECT_EQ(report.balance_shortfall, 6u);
  EXPECT_THROW(balance_classes(counts_corpus(3, 0), c, {}), EmptyClass);
}

TEST(Splits, Targets) {
  EXPECT_EQ(split_targets(236663, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{189330, 23666, 23667}));
  EXPECT_EQ(split_targets(10, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(split_targets(0, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{0, 0, 0}));
}

TEST(Splits, RandomModeIsTotalPartitionWithTwinsTogether) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<FunctionSample> corpus;
    try {
      corpus = curate(vftest::random_corpus(seed, 150), {}).samples;
    } catch (const EmptyClass&) {
      continue;
    }
    CurationConfig c;
    c.seed = seed;
    const auto splits = make_splits(corpus, c);
    ASSERT_EQ(splits.size(), corpus.size());
    std::map<std::string, std::set<Split>> by_pair;
    for (const auto& s : corpus) {
      ASSERT_TRUE(splits.count(s.sample_id));
      if (s.pair_id) by_pair[*s.pair_id].insert(splits.at(s.sample_id));
    }
    for (const auto& [pid, where] : by_pair) EXPECT_EQ(where.size(), 1u) << pid;
    EXPECT_EQ(make_splits(corpus, c), splits);
  }
}

TEST(Splits, ByProjectIsDisjoint) {
  std::vector<FunctionSample> corpus;
  for (int p = 0; p < 5; ++p) {
    for (int i = 0; i < 4 + p; ++i) {
      corpus.push_back(make_sample(i % 2, "int f" + std::to_string(p) + "_" + std::to_string(i) + "() {}",
                                   "proj/" + std::to_string(p)));
    }
  }
  CurationConfig c;
  c.split_mode = SplitMode::by_project;
  const auto splits = make_splits(corpus, c);
  std::map<std::string, std::set<Split>> where;
  for (const auto& s : corpus) where[s.project].insert(splits.at(s.sample_id));
  std::set<Split> used;
  for (const auto& [project, set] : where) {
    EXPECT_EQ(set.size(), 1u) << project;
    used.insert(*set.begin());
  }
  EXPECT_EQ(used.size(), 3u);

  std::vector<FunctionSample> two_projects(corpus.begin(), corpus.begin() + 9);
  EXPECT_THROW(make_splits(two_projects, c), InsufficientProjects);
}

TEST(Splits, DuplicateIdsRejected) {
  const auto s = make_sample(1, "int x() {}");
  EXPECT_THROW(make_splits({s, s}, {}), InvalidArgument);
}

TEST(Curate, PropertiesOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto corpus = vftest::random_corpus(seed, 200);
    CurationConfig config;
    config.seed = seed;
    const auto once = deduplicate(corpus, config);
    EXPECT_EQ(ids(deduplicate(once, config)), ids(once)) << seed;
    std::set<std::pair<std::string, int>> keys;
    for (const auto& s : once) {
      EXPECT_TRUE(keys.insert({normalize_code(s.labeled_code(), config.dedup_normalization), s.label}).second);
    }
    const auto trimmed = drop_trivial_fixes(once);
    EXPECT_EQ(ids(drop_trivial_fixes(trimmed)), ids(trimmed));

    CurationResult a, b;
    try {
      a = curate(corpus, config);
      b = curate(corpus, config);
    } catch (const EmptyClass&) {
      continue;
    }
    EXPECT_EQ(ids(a.samples), ids(b.samples));
    EXPECT_EQ(a.splits, b.splits);
    EXPECT_EQ(a.report, b.report);
    EXPECT_EQ(a.report.output, a.samples.size());
    for (const auto& p : a.hard_negatives) EXPECT_TRUE(p.twin || p.distance <= config.hard_negative_max_distance);
  }
}
