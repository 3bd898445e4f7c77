#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vulnforge/sample.hpp"

namespace vftest {

inline std::filesystem::path fixture_dir() { return VULNFORGE_FIXTURE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

vulnforge::FunctionSample make_sample(int label, const std::string& code,
                                      const std::string& project = "acme/lib",
                                      std::optional<std::string> pair_id = std::nullopt,
                                      const std::string& published = "2020-01-01");

// A label-1 sample and its label-0 twin sharing `pair_id`.
std::pair<vulnforge::FunctionSample, vulnforge::FunctionSample> make_twin(
    const std::string& before, const std::string& after, const std::string& pair_id,
    const std::string& project = "acme/lib", const std::string& published = "2020-01-01");

// Small-alphabet C-ish function so that duplicates, whitespace variants and
// cross-label clashes show up often in random corpora.
std::string random_function(std::mt19937_64& rng);

// Reformats code with random extra whitespace without changing its tokens.
std::string jitter_whitespace(const std::string& code, std::mt19937_64& rng);

// Up to `max_samples` samples mixing twins, singletons, exact and whitespace
// duplicates, cross-label clashes and whitespace-only fixes.
std::vector<vulnforge::FunctionSample> random_corpus(std::uint64_t seed, std::size_t max_samples);

// Vulnerable functions call strcpy, secure ones strncpy; the rest of each body
// is random filler drawn from the same pool for both classes.
std::vector<vulnforge::FunctionSample> separable_corpus(std::size_t n, std::uint64_t seed);

std::string slurp(const std::filesystem::path& path);

}  // namespace vftest
