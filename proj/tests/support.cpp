#include "support.hpp"

#include <fstream>
#include <sstream>

namespace vftest {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    path_ = fs::temp_directory_path() / ("vulnforge-test-" + std::to_string(rng()));
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

vulnforge::FunctionSample make_sample(int label, const std::string& code, const std::string& project,
                                      std::optional<std::string> pair_id,
                                      const std::string& published) {
  vulnforge::FunctionSample s;
  s.label = label;
  if (label == 1) {
    s.function_before = code;
  } else {
    s.function_after = code;
  }
  s.project = project;
  s.pair_id = std::move(pair_id);
  s.published = published;
  s.sample_id = vulnforge::make_sample_id(label, code);
  return s;
}

std::pair<vulnforge::FunctionSample, vulnforge::FunctionSample> make_twin(
    const std::string& before, const std::string& after, const std::string& pair_id,
    const std::string& project, const std::string& published) {
  auto vuln = make_sample(1, before, project, pair_id, published);
  vuln.function_after = after;
  auto safe = make_sample(0, after, project, pair_id, published);
  return {vuln, safe};
}

std::string random_function(std::mt19937_64& rng) {
  static const char* kStatements[] = {
      "strcpy(buf, src);", "strncpy(buf, src, n);", "if (n > len) return -1;",
      "memcpy(dst, src, n);", "free(p);", "p = NULL;", "len = strlen(s);",
      "buf[n] = 0;", "return 0;", "i++;",
  };
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> name(0, 3);
  std::string code = "int f" + std::to_string(name(rng)) + "(char *buf, char *src, int n) {\n";
  const int lines = count(rng);
  for (int i = 0; i < lines; ++i) code += std::string("    ") + kStatements[pick(rng)] + "\n";
  code += "}\n";
  return code;
}

std::string jitter_whitespace(const std::string& code, std::mt19937_64& rng) {
  std::string out;
  std::bernoulli_distribution coin(0.3);
  for (char c : code) {
    out += c;
    if (c == ' ' && coin(rng)) out += ' ';
    if (c == '\n' && coin(rng)) out += "  ";
  }
  return out;
}

std::vector<vulnforge::FunctionSample> random_corpus(std::uint64_t seed, std::size_t max_samples) {
  std::mt19937_64 rng(seed);
  std::vector<vulnforge::FunctionSample> out;
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<int> year(2015, 2024);
  std::uniform_int_distribution<int> proj(0, 6);
  int pair_counter = 0;
  while (out.size() + 2 <= max_samples) {
    const std::string project = "proj/p" + std::to_string(proj(rng));
    const std::string date = std::to_string(year(rng)) + "-01-01";
    const int k = kind(rng);
    if (k <= 1) {
      const std::string before = random_function(rng);
      std::string after = random_function(rng);
      const std::string pid = "pair" + std::to_string(pair_counter++);
      auto [v, s] = make_twin(before, after, pid, project, date);
      out.push_back(v);
      out.push_back(s);
    } else if (k == 2) {
      // Whitespace-only "fix".
      const std::string before = random_function(rng);
      const std::string pid = "pair" + std::to_string(pair_counter++);
      auto [v, s] = make_twin(before, jitter_whitespace(before, rng) + "\n", pid, project, date);
      out.push_back(v);
      out.push_back(s);
    } else if (k == 3 && !out.empty()) {
      // Duplicate of an earlier sample, possibly reformatted, possibly relabeled.
      std::uniform_int_distribution<std::size_t> at(0, out.size() - 1);
      const auto& src = out[at(rng)];
      std::bernoulli_distribution flip(0.4);
      const int label = flip(rng) ? 1 - src.label : src.label;
      std::string code = src.labeled_code();
      if (flip(rng)) code = jitter_whitespace(code, rng);
      out.push_back(make_sample(label, code, project, std::nullopt, date));
    } else {
      std::bernoulli_distribution coin(0.5);
      out.push_back(make_sample(coin(rng) ? 1 : 0, random_function(rng), project, std::nullopt, date));
    }
  }
  return out;
}

std::vector<vulnforge::FunctionSample> separable_corpus(std::size_t n, std::uint64_t seed) {
  static const char* kFiller[] = {
      "int i = 0;", "len = strlen(s);", "if (p == NULL) return;", "count += 1;", "free(tmp);",
      "x = y * 2;", "log_msg(\"copy\");", "buf[0] = 0;", "n--;", "flag = !flag;",
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 9), lines(2, 5);
  std::vector<vulnforge::FunctionSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    std::string code = "void fn_" + std::to_string(i) + "(char *dst, const char *src) {\n";
    const int before = lines(rng);
    for (int k = 0; k < before; ++k) code += std::string("    ") + kFiller[pick(rng)] + "\n";
    code += label == 1 ? "    strcpy(dst, src);\n" : "    strncpy(dst, src, 16);\n";
    const int after = lines(rng);
    for (int k = 0; k < after; ++k) code += std::string("    ") + kFiller[pick(rng)] + "\n";
    code += "}\n";
    out.push_back(make_sample(label, code, "synthetic/p" + std::to_string(i % 4)));
  }
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vftest
