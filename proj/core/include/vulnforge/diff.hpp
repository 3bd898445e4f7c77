#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vulnforge {

struct DiffLine {
  enum class Op : char { context = ' ', removed = '-', added = '+' };
  Op op = Op::context;
  std::string text;        // without the line terminator
  bool has_newline = true;  // false only for a final line lacking '\n'

  bool operator==(const DiffLine&) const = default;
};

struct Hunk {
  int old_start = 0;  // 1-based; for old_count == 0 the line after which text is inserted
  int old_count = 0;
  int new_start = 0;
  int new_count = 0;
  std::vector<DiffLine> lines;

  bool operator==(const Hunk&) const = default;
};

// Line-level changes of one hunk in absolute line numbers.
struct HunkChanges {
  std::vector<int> removed_old_lines;  // 1-based in the old file
  std::vector<int> added_new_lines;    // 1-based in the new file
};

HunkChanges changed_lines(const Hunk& hunk);

// Myers shortest edit script over lines, grouped into hunks with `context`
// lines of surrounding context.
std::vector<Hunk> diff_texts(std::string_view before, std::string_view after, int context = 3);

// Hunks only (no ---/+++ header) when both names are empty.
std::string format_unified(const std::vector<Hunk>& hunks, std::string_view old_name = {},
                           std::string_view new_name = {});

// Accepts output of format_unified and git-style per-file patches; file
// headers are skipped. Throws PatchMismatch on malformed hunks.
std::vector<Hunk> parse_unified(std::string_view text);

// Strict application: every context and removed line must match at the
// stated position. Throws PatchMismatch.
std::string apply_hunks(std::string_view before, const std::vector<Hunk>& hunks);

// Checks that hunk ranges fit inside the two line counts.
bool hunks_fit(const std::vector<Hunk>& hunks, std::size_t old_lines, std::size_t new_lines);

}  // namespace vulnforge
