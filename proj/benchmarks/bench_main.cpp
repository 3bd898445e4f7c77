#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "vulnforge/curator.hpp"
#include "vulnforge/diff.hpp"
#include "vulnforge/function_extractor.hpp"
#include "vulnforge/sample.hpp"

using namespace vulnforge;

namespace {

// A C translation unit with `functions` definitions, comments and a few
// preprocessor lines in between.
std::string synthetic_source(int functions) {
  std::string out = "#include <stdio.h>\n#include <string.h>\n\n";
  for (int i = 0; i < functions; ++i) {
    out += "/* helper { " + std::to_string(i) + " } */\n";
    out += "static int fn" + std::to_string(i) + "(char *buf, const char *src, int n) {\n";
    out += "    const char *msg = \"}{ brace in string\";\n";
    out += "    if (n > 16) {\n        return -1;\n    }\n";
    out += "#ifdef TRACE\n    puts(msg);\n#endif\n";
    out += "    strncpy(buf, src, n);\n    return n;\n}\n\n";
  }
  return out;
}

std::string mutate_every(const std::string& text, int period) {
  std::string out;
  int line = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const auto piece = text.substr(start, end - start);
    out += (++line % period == 0) ? "    /* changed */ " + piece + "\n" : piece + "\n";
    start = end == std::string::npos ? text.size() : end + 1;
  }
  return out;
}

std::vector<FunctionSample> twin_corpus(std::size_t pairs) {
  std::mt19937_64 rng(1);
  static const char* kStatements[] = {"strcpy(buf, src);", "strncpy(buf, src, n);", "if (n > len) return -1;",
                                      "memcpy(dst, src, n);", "free(p);", "p = NULL;", "len = strlen(s);"};
  std::uniform_int_distribution<int> pick(0, 6), count(3, 12);
  std::vector<FunctionSample> out;
  for (std::size_t i = 0; i < pairs; ++i) {
    std::string body;
    const int lines = count(rng);
    for (int k = 0; k < lines; ++k) body += std::string("    ") + kStatements[pick(rng)] + "\n";
    const auto name = "int f" + std::to_string(i) + "(char *buf, char *src, int n) {\n";
    const auto before = name + body + "}\n";
    const auto after = name + "    if (n < 0) return 0;\n" + body + "}\n";
    const auto pair = "p" + std::to_string(i);
    FunctionSample v;
    v.label = 1;
    v.function_before = before;
    v.function_after = after;
    v.pair_id = pair;
    v.sample_id = make_sample_id(1, before);
    FunctionSample s;
    s.label = 0;
    s.function_after = after;
    s.pair_id = pair;
    s.sample_id = make_sample_id(0, after);
    out.push_back(std::move(v));
    out.push_back(std::move(s));
  }
  return out;
}

void BM_ExtractFunctions(benchmark::State& state) {
  const auto source = synthetic_source(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_functions(source));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * source.size()));
}
BENCHMARK(BM_ExtractFunctions)->Arg(10)->Arg(100)->Arg(1000);

void BM_DiffTexts(benchmark::State& state) {
  const auto before = synthetic_source(static_cast<int>(state.range(0)));
  const auto after = mutate_every(before, 7);
  for (auto _ : state) benchmark::DoNotOptimize(diff_texts(before, after));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * before.size()));
}
BENCHMARK(BM_DiffTexts)->Arg(10)->Arg(100)->Arg(1000);

void BM_DiffRoundTrip(benchmark::State& state) {
  const auto before = synthetic_source(100);
  const auto after = mutate_every(before, 5);
  for (auto _ : state) {
    const auto text = format_unified(diff_texts(before, after));
    benchmark::DoNotOptimize(apply_hunks(before, parse_unified(text)));
  }
}
BENCHMARK(BM_DiffRoundTrip);

void BM_MineHardNegatives(benchmark::State& state) {
  const auto corpus = twin_corpus(static_cast<std::size_t>(state.range(0)));
  CurationConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(mine_hard_negatives(corpus, config));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MineHardNegatives)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_Deduplicate(benchmark::State& state) {
  const auto corpus = twin_corpus(static_cast<std::size_t>(state.range(0)));
  CurationConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(deduplicate(corpus, config));
}
BENCHMARK(BM_Deduplicate)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
