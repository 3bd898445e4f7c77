#include "vulnforge/curator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "vulnforge/errors.hpp"
#include "vulnforge/lexer.hpp"
#include "vulnforge/prng.hpp"

namespace vulnforge {

namespace {

template <typename E, std::size_t N>
E enum_from(const std::string& text, const std::array<std::pair<E, const char*>, N>& table,
            const char* what) {
  for (const auto& [value, name] : table) {
    if (text == name) return value;
  }
  throw InvalidArgument(std::string("unknown ") + what + " '" + text + "'");
}

template <typename E, std::size_t N>
std::string enum_to(E value, const std::array<std::pair<E, const char*>, N>& table) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Normalization, const char*>, 3> kNormalizations{{
    {Normalization::exact, "exact"},
    {Normalization::strip_ws, "strip_ws"},
    {Normalization::strip_ws_comments, "strip_ws_comments"},
}};
constexpr std::array<std::pair<SplitMode, const char*>, 2> kSplitModes{{
    {SplitMode::random, "random"},
    {SplitMode::by_project, "by_project"},
}};
constexpr std::array<std::pair<Split, const char*>, 3> kSplits{{
    {Split::train, "train"},
    {Split::validation, "validation"},
    {Split::test, "test"},
}};

// Earliest publication first; undated samples sort after dated ones.
bool published_before(const FunctionSample& a, const FunctionSample& b) {
  if (a.published.empty() != b.published.empty()) return b.published.empty();
  return a.published < b.published;
}

std::map<std::string, std::vector<std::size_t>> by_pair_id(const std::vector<FunctionSample>& samples) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].pair_id) groups[*samples[i].pair_id].push_back(i);
  }
  return groups;
}

std::vector<FunctionSample> keep_marked(const std::vector<FunctionSample>& samples,
                                        const std::vector<bool>& keep) {
  std::vector<FunctionSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.push_back(samples[i]);
  }
  return out;
}

}  // namespace

std::string to_string(Normalization mode) { return enum_to(mode, kNormalizations); }
std::string to_string(SplitMode mode) { return enum_to(mode, kSplitModes); }
std::string to_string(Split split) { return enum_to(split, kSplits); }
Normalization normalization_from_string(const std::string& text) {
  return enum_from(text, kNormalizations, "normalization");
}
SplitMode split_mode_from_string(const std::string& text) {
  return enum_from(text, kSplitModes, "split mode");
}
Split split_from_string(const std::string& text) { return enum_from(text, kSplits, "split"); }

void CurationConfig::validate() const {
  if (!(hard_negative_max_distance >= 0.0 && hard_negative_max_distance <= 1.0)) {
    throw InvalidArgument("hard_negative_max_distance must lie in [0, 1]");
  }
  if (!(balance_tolerance >= 1.0)) throw InvalidArgument("balance_tolerance must be >= 1.0");
  double sum = 0.0;
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw InvalidArgument("split ratios must be non-negative");
    sum += r;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1.0");
}

void to_json(nlohmann::json& j, const CurationConfig& c) {
  j = nlohmann::json{{"dedup_normalization", to_string(c.dedup_normalization)},
                     {"drop_whitespace_only_fixes", c.drop_whitespace_only_fixes},
                     {"hard_negative_max_distance", c.hard_negative_max_distance},
                     {"balance_tolerance", c.balance_tolerance},
                     {"split_ratios", c.split_ratios},
                     {"split_mode", to_string(c.split_mode)},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, CurationConfig& c) {
  c = CurationConfig{};
  if (j.contains("dedup_normalization")) {
    c.dedup_normalization = normalization_from_string(j.at("dedup_normalization").get<std::string>());
  }
  c.drop_whitespace_only_fixes = j.value("drop_whitespace_only_fixes", c.drop_whitespace_only_fixes);
  c.hard_negative_max_distance = j.value("hard_negative_max_distance", c.hard_negative_max_distance);
  c.balance_tolerance = j.value("balance_tolerance", c.balance_tolerance);
  if (j.contains("split_ratios")) c.split_ratios = j.at("split_ratios").get<std::array<double, 3>>();
  if (j.contains("split_mode")) c.split_mode = split_mode_from_string(j.at("split_mode").get<std::string>());
  c.seed = j.value("seed", c.seed);
}

void to_json(nlohmann::json& j, const CurationReport& r) {
  j = nlohmann::json{{"input", r.input},
                     {"exact_dups", r.exact_dups},
                     {"near_dups", r.near_dups},
                     {"conflicts", r.conflicts},
                     {"whitespace_only_fixes", r.whitespace_only_fixes},
                     {"unlinked_twins", r.unlinked_twins},
                     {"balance_removed", r.balance_removed},
                     {"balance_shortfall", r.balance_shortfall},
                     {"hard_negative_pairs", r.hard_negative_pairs},
                     {"output", r.output}};
}

void from_json(const nlohmann::json& j, CurationReport& r) {
  r.input = j.value("input", std::size_t{0});
  r.exact_dups = j.value("exact_dups", std::size_t{0});
  r.near_dups = j.value("near_dups", std::size_t{0});
  r.conflicts = j.value("conflicts", std::size_t{0});
  r.whitespace_only_fixes = j.value("whitespace_only_fixes", std::size_t{0});
  r.unlinked_twins = j.value("unlinked_twins", std::size_t{0});
  r.balance_removed = j.value("balance_removed", std::size_t{0});
  r.balance_shortfall = j.value("balance_shortfall", std::size_t{0});
  r.hard_negative_pairs = j.value("hard_negative_pairs", std::size_t{0});
  r.output = j.value("output", std::size_t{0});
}

void to_json(nlohmann::json& j, const HardNegativePair& p) {
  j = nlohmann::json{{"vulnerable_id", p.vulnerable_id},
                     {"secure_id", p.secure_id},
                     {"distance", p.distance},
                     {"twin", p.twin}};
}

void from_json(const nlohmann::json& j, HardNegativePair& p) {
  p.vulnerable_id = j.at("vulnerable_id").get<std::string>();
  p.secure_id = j.at("secure_id").get<std::string>();
  p.distance = j.at("distance").get<double>();
  p.twin = j.value("twin", false);
}

std::string normalize_code(std::string_view code, Normalization mode) {
  if (mode == Normalization::exact) return std::string(code);
  std::string stripped;
  if (mode == Normalization::strip_ws_comments) {
    stripped = strip_comments(code);
    code = stripped;
  }
  std::string out;
  bool pending_space = false;
  for (char c : code) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<FunctionSample> deduplicate(const std::vector<FunctionSample>& samples,
                                        const CurationConfig& config, CurationReport* report) {
  CurationReport local;
  auto& rep = report ? *report : local;

  std::vector<std::string> norm(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    norm[i] = normalize_code(samples[i].labeled_code(), config.dedup_normalization);
  }
  // norm -> per-label member indices, in input order.
  std::unordered_map<std::string, std::array<std::vector<std::size_t>, 2>> groups;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(norm[i]);
    if (inserted) order.push_back(norm[i]);
    it->second[samples[i].label == 1 ? 1 : 0].push_back(i);
  }

  std::vector<bool> keep(samples.size(), false);
  for (const auto& key : order) {
    const auto& members = groups[key];
    std::array<std::vector<std::size_t>, 2> eligible = members;
    if (!members[0].empty() && !members[1].empty()) {
      // Twin pairs across the clash whose raw texts differ.
      std::set<std::string> secure_pairs;
      for (auto i : members[0]) {
        if (samples[i].pair_id) secure_pairs.insert(*samples[i].pair_id);
      }
      std::set<std::string> linked;
      for (auto i : members[1]) {
        const auto& pid = samples[i].pair_id;
        if (!pid || !secure_pairs.count(*pid)) continue;
        for (auto k : members[0]) {
          if (samples[k].pair_id == pid && samples[k].labeled_code() != samples[i].labeled_code()) {
            linked.insert(*pid);
          }
        }
      }
      if (linked.empty()) {
        rep.conflicts += members[0].size() + members[1].size();
        continue;
      }
      // One linked pair represents the clash, so a second pass sees the same twin.
      std::optional<std::size_t> best;
      for (auto i : members[1]) {
        if (!samples[i].pair_id || !linked.count(*samples[i].pair_id)) continue;
        if (!best || published_before(samples[i], samples[*best])) best = i;
      }
      const auto chosen = *samples[*best].pair_id;
      for (auto& side : eligible) {
        std::erase_if(side, [&](std::size_t i) { return samples[i].pair_id != chosen; });
      }
    }
    for (int label = 0; label < 2; ++label) {
      const auto& side = eligible[label];
      if (side.empty()) continue;
      std::size_t rep_index = side.front();
      for (auto i : side) {
        if (published_before(samples[i], samples[rep_index])) rep_index = i;
      }
      keep[rep_index] = true;
      for (auto i : members[label]) {
        if (i == rep_index) continue;
        if (samples[i].labeled_code() == samples[rep_index].labeled_code()) {
          ++rep.exact_dups;
        } else {
          ++rep.near_dups;
        }
      }
    }
  }
  return keep_marked(samples, keep);
}

std::vector<FunctionSample> drop_trivial_fixes(const std::vector<FunctionSample>& samples,
                                               CurationReport* report) {
  CurationReport local;
  auto& rep = report ? *report : local;
  std::vector<bool> keep(samples.size(), true);
  for (const auto& [pid, members] : by_pair_id(samples)) {
    const FunctionSample* vuln = nullptr;
    const FunctionSample* secure = nullptr;
    for (auto i : members) {
      if (samples[i].label == 1 && !vuln) vuln = &samples[i];
      if (samples[i].label == 0 && !secure) secure = &samples[i];
    }
    if (!vuln || !vuln->function_before) continue;
    const std::string* after = vuln->function_after ? &*vuln->function_after : nullptr;
    if (!after && secure && secure->function_after) after = &*secure->function_after;
    if (!after) continue;
    if (normalize_code(*vuln->function_before, Normalization::strip_ws_comments) ==
        normalize_code(*after, Normalization::strip_ws_comments)) {
      for (auto i : members) keep[i] = false;
      rep.whitespace_only_fixes += members.size();
    }
  }
  return keep_marked(samples, keep);
}

std::vector<FunctionSample> unlink_orphans(const std::vector<FunctionSample>& samples,
                                           CurationReport* report) {
  auto out = samples;
  for (const auto& [pid, members] : by_pair_id(samples)) {
    bool has_vuln = false;
    bool has_secure = false;
    for (auto i : members) (samples[i].label == 1 ? has_vuln : has_secure) = true;
    if (has_vuln && has_secure) continue;
    for (auto i : members) out[i].pair_id.reset();
    if (report) report->unlinked_twins += members.size();
  }
  return out;
}

double normalized_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  const auto longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

namespace {

using TokenIds = std::vector<std::uint32_t>;

// Edit distance when it is at most `bound`, otherwise bound + 1. Only the
// diagonal band of width 2 * bound + 1 is evaluated.
std::size_t bounded_edit_distance(const TokenIds& a, const TokenIds& b, std::size_t bound) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t over = bound + 1;
  if ((n > m ? n - m : m - n) > bound) return over;
  std::vector<std::size_t> prev(m + 1, over);
  std::vector<std::size_t> cur(m + 1, over);
  for (std::size_t j = 0; j <= std::min(m, bound); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > bound ? i - bound : 1;
    const std::size_t hi = std::min(m, i + bound);
    std::fill(cur.begin(), cur.end(), over);
    if (i <= bound) cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub, over});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > bound) return over;
    std::swap(prev, cur);
  }
  return std::min(prev[m], over);
}

// Tokens present in one sorted multiset and not the other; a lower bound on
// the edit distance.
std::size_t bag_distance(const TokenIds& a, const TokenIds& b) {
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::max(a.size(), b.size()) - common;
}

// Largest edit count whose ratio to `longest` stays within the threshold,
// using the same division as normalized_edit_distance. -1 when none does.
long long edit_budget(std::size_t longest, double threshold) {
  if (longest == 0) return 0;
  const double len = static_cast<double>(longest);
  auto k = static_cast<long long>(std::floor(threshold * len));
  while (static_cast<double>(k + 1) / len <= threshold) ++k;
  while (k >= 0 && static_cast<double>(k) / len > threshold) --k;
  return k;
}

}  // namespace

std::vector<HardNegativePair> mine_hard_negatives(const std::vector<FunctionSample>& samples,
                                                  const CurationConfig& config) {
  const double threshold = config.hard_negative_max_distance;
  std::vector<std::size_t> vulnerable;
  std::vector<std::size_t> secure;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == 1 ? vulnerable : secure).push_back(i);
  }

  std::unordered_map<std::string, std::uint32_t> intern;
  std::vector<TokenIds> ids(samples.size());
  std::vector<TokenIds> bags(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (auto& t : code_tokens(samples[i].labeled_code())) {
      ids[i].push_back(intern.emplace(std::move(t), static_cast<std::uint32_t>(intern.size())).first->second);
    }
    bags[i] = ids[i];
    std::sort(bags[i].begin(), bags[i].end());
  }

  // Secure samples ordered by length, for the length window.
  std::vector<std::size_t> by_length = secure;
  std::stable_sort(by_length.begin(), by_length.end(),
                   [&](std::size_t x, std::size_t y) { return ids[x].size() < ids[y].size(); });
  std::unordered_map<std::string, std::vector<std::size_t>> secure_by_pair;
  for (auto s : secure) {
    if (samples[s].pair_id) secure_by_pair[*samples[s].pair_id].push_back(s);
  }

  const auto pairs_for = [&](std::size_t v) {
    const std::size_t la = ids[v].size();
    // Any match has |la - lb| <= threshold * max(la, lb).
    std::size_t lo = 0;
    std::size_t hi = std::numeric_limits<std::size_t>::max();
    if (threshold < 1.0) {
      lo = static_cast<std::size_t>(std::max(0.0, std::floor(static_cast<double>(la) * (1.0 - threshold)) - 1));
      hi = static_cast<std::size_t>(std::ceil(static_cast<double>(la) / (1.0 - threshold)) + 1);
    }
    const auto first = std::lower_bound(by_length.begin(), by_length.end(), lo,
                                        [&](std::size_t s, std::size_t len) { return ids[s].size() < len; });
    const auto last = std::upper_bound(by_length.begin(), by_length.end(), hi,
                                       [&](std::size_t len, std::size_t s) { return len < ids[s].size(); });
    std::vector<std::size_t> candidates(first, last);
    if (samples[v].pair_id) {
      const auto twins = secure_by_pair.find(*samples[v].pair_id);
      if (twins != secure_by_pair.end()) candidates.insert(candidates.end(), twins->second.begin(), twins->second.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<HardNegativePair> found;
    for (auto s : candidates) {
      const bool twin = samples[v].pair_id && samples[v].pair_id == samples[s].pair_id;
      const std::size_t longest = std::max(la, ids[s].size());
      if (twin) {
        const std::size_t full = bounded_edit_distance(ids[v], ids[s], longest);
        found.push_back({samples[v].sample_id, samples[s].sample_id,
                         longest == 0 ? 0.0 : static_cast<double>(full) / static_cast<double>(longest), true});
        continue;
      }
      const long long budget = edit_budget(longest, threshold);
      if (budget < 0) continue;
      const auto k = static_cast<std::size_t>(budget);
      if (bag_distance(bags[v], bags[s]) > k) continue;
      const std::size_t d = bounded_edit_distance(ids[v], ids[s], k);
      if (d > k) continue;
      found.push_back({samples[v].sample_id, samples[s].sample_id,
                       longest == 0 ? 0.0 : static_cast<double>(d) / static_cast<double>(longest), false});
    }
    return found;
  };

  // Contiguous blocks of vulnerable samples per worker, concatenated in order.
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, vulnerable.size() / 32));
  std::vector<std::vector<HardNegativePair>> parts(workers);
  std::vector<std::thread> threads;
  const std::size_t block = (vulnerable.size() + workers - 1) / std::max<std::size_t>(workers, 1);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w * block; i < std::min(vulnerable.size(), (w + 1) * block); ++i) {
          auto found = pairs_for(vulnerable[i]);
          parts[w].insert(parts[w].end(), found.begin(), found.end());
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<HardNegativePair> out;
  for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

std::vector<FunctionSample> balance_classes(const std::vector<FunctionSample>& samples,
                                            const CurationConfig& config,
                                            const std::vector<HardNegativePair>& hard_negatives,
                                            CurationReport* report) {
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < samples.size(); ++i) by_label[samples[i].label == 1 ? 1 : 0].push_back(i);
  if (by_label[0].empty() || by_label[1].empty()) {
    throw EmptyClass("balance_classes needs both labels; got " + std::to_string(by_label[1].size()) +
                     " vulnerable and " + std::to_string(by_label[0].size()) + " secure samples");
  }
  const int majority = by_label[1].size() > by_label[0].size() ? 1 : 0;
  const auto minority_count = by_label[1 - majority].size();
  const auto target = static_cast<std::size_t>(
      std::floor(static_cast<double>(minority_count) * config.balance_tolerance + 1e-9));
  const auto majority_count = by_label[majority].size();
  if (majority_count <= target) return samples;

  std::unordered_set<std::string> protected_ids;
  for (const auto& p : hard_negatives) {
    protected_ids.insert(p.vulnerable_id);
    protected_ids.insert(p.secure_id);
  }
  std::vector<std::size_t> removable;
  for (auto i : by_label[majority]) {
    if (!protected_ids.count(samples[i].sample_id)) removable.push_back(i);
  }
  Prng rng(config.seed ^ 0x62616c616e6365ULL);
  rng.shuffle(removable);
  const auto excess = majority_count - target;
  const auto removed = std::min(excess, removable.size());
  std::vector<bool> keep(samples.size(), true);
  for (std::size_t k = 0; k < removed; ++k) keep[removable[k]] = false;
  if (report) {
    report->balance_removed += removed;
    report->balance_shortfall += excess - removed;
  }
  return keep_marked(samples, keep);
}

std::array<std::size_t, 3> split_targets(std::size_t n, const std::array<double, 3>& ratios) {
  const auto train = std::min(
      n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[0] + 1e-9)));
  const auto rest = n - train;
  const double tail = ratios[1] + ratios[2];
  const auto validation =
      tail > 0 ? static_cast<std::size_t>(
                     std::floor(static_cast<double>(rest) * ratios[1] / tail + 1e-9))
               : std::size_t{0};
  return {train, validation, rest - validation};
}

SplitAssignment make_splits(const std::vector<FunctionSample>& samples,
                            const CurationConfig& config) {
  config.validate();
  std::set<std::string> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.sample_id).second) {
      throw InvalidArgument("make_splits: duplicate sample_id " + s.sample_id);
    }
  }
  const auto targets = split_targets(samples.size(), config.split_ratios);
  SplitAssignment out;

  if (config.split_mode == SplitMode::by_project) {
    std::map<std::string, std::vector<std::size_t>> projects;
    for (std::size_t i = 0; i < samples.size(); ++i) projects[samples[i].project].push_back(i);
    if (projects.size() < 3) {
      throw InsufficientProjects("by_project splits need at least 3 projects, got " +
                                 std::to_string(projects.size()));
    }
    std::vector<std::pair<std::string, std::size_t>> sizes;
    for (const auto& [name, members] : projects) sizes.emplace_back(name, members.size());
    std::stable_sort(sizes.begin(), sizes.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::array<long long, 3> filled{0, 0, 0};
    std::array<std::size_t, 3> assigned{0, 0, 0};
    std::size_t remaining = sizes.size();
    for (const auto& [name, size] : sizes) {
      // Once the projects left only just cover the splits still empty, each
      // of them must go to one of those splits.
      std::size_t empty = 0;
      for (int k = 0; k < 3; ++k) empty += targets[k] > 0 && assigned[k] == 0;
      const bool forced = remaining <= empty;
      int best = -1;
      for (int k = 0; k < 3; ++k) {
        if (forced && !(targets[k] > 0 && assigned[k] == 0)) continue;
        if (best < 0 || static_cast<long long>(targets[k]) - filled[k] >
                            static_cast<long long>(targets[best]) - filled[best]) {
          best = k;
        }
      }
      filled[best] += static_cast<long long>(size);
      ++assigned[best];
      --remaining;
      for (auto i : projects[name]) out[samples[i].sample_id] = static_cast<Split>(best);
    }
    return out;
  }

  // Twin pairs move as one unit.
  std::vector<std::vector<std::size_t>> units;
  std::map<std::string, std::size_t> unit_of_pair;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& pid = samples[i].pair_id;
    if (pid) {
      auto [it, inserted] = unit_of_pair.try_emplace(*pid, units.size());
      if (!inserted) {
        units[it->second].push_back(i);
        continue;
      }
    }
    units.push_back({i});
  }
  Prng rng(config.seed);
  rng.shuffle(units);
  std::array<std::size_t, 3> filled{0, 0, 0};
  for (const auto& unit : units) {
    int split = 2;
    for (int k = 0; k < 2; ++k) {
      if (filled[k] + unit.size() <= targets[k]) {
        split = k;
        break;
      }
    }
    filled[split] += unit.size();
    for (auto i : unit) out[samples[i].sample_id] = static_cast<Split>(split);
  }
  return out;
}

CurationResult curate(const std::vector<FunctionSample>& samples, const CurationConfig& config) {
  config.validate();
  CurationResult result;
  result.report.input = samples.size();
  auto current = deduplicate(samples, config, &result.report);
  if (config.drop_whitespace_only_fixes) current = drop_trivial_fixes(current, &result.report);
  current = unlink_orphans(current, &result.report);
  result.hard_negatives = mine_hard_negatives(current, config);
  current = balance_classes(current, config, result.hard_negatives, &result.report);
  result.report.hard_negative_pairs = result.hard_negatives.size();
  result.splits = make_splits(current, config);
  result.report.output = current.size();
  result.samples = std::move(current);
  return result;
}

}  // namespace vulnforge
