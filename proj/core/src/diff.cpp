#include "vulnforge/diff.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>

#include "vulnforge/errors.hpp"

namespace vulnforge {

namespace {

struct SourceLine {
  std::string_view text;
  bool has_newline;
  bool operator==(const SourceLine&) const = default;
};

std::vector<SourceLine> to_lines(std::string_view text) {
  std::vector<SourceLine> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back({text.substr(start), false});
      break;
    }
    lines.push_back({text.substr(start, nl - start), true});
    start = nl + 1;
  }
  return lines;
}

enum class Edit { keep, remove, add };

using Lines = std::vector<SourceLine>;

// Furthest-reaching forward and backward paths meet on a middle snake, which
// splits the problem in two (linear-space Myers). Positions are relative to
// the sub-ranges a[a0, a1) and b[b0, b1).
struct Snake {
  std::int64_t x0, y0, x1, y1;
};

std::optional<Snake> middle_snake(const Lines& a, std::int64_t a0, std::int64_t a1, const Lines& b,
                                  std::int64_t b0, std::int64_t b1, std::int64_t max_cost) {
  const std::int64_t n = a1 - a0;
  const std::int64_t m = b1 - b0;
  const std::int64_t delta = n - m;
  const bool odd = (delta & 1) != 0;
  const std::int64_t half = (n + m + 1) / 2;
  const std::int64_t offset = half + 1;
  std::vector<std::int64_t> vf(2 * offset + 1, 0);
  std::vector<std::int64_t> vb(2 * offset + 1, 0);
  for (std::int64_t d = 0; d <= half; ++d) {
    if (2 * d > max_cost) return std::nullopt;
    for (std::int64_t k = -d; k <= d; k += 2) {
      std::int64_t x = (k == -d || (k != d && vf[offset + k - 1] < vf[offset + k + 1])) ? vf[offset + k + 1]
                                                                                         : vf[offset + k - 1] + 1;
      std::int64_t y = x - k;
      const std::int64_t sx = x;
      const std::int64_t sy = y;
      while (x < n && y < m && a[a0 + x] == b[b0 + y]) {
        ++x;
        ++y;
      }
      vf[offset + k] = x;
      const std::int64_t rk = delta - k;
      if (odd && rk >= -(d - 1) && rk <= d - 1 && x + vb[offset + rk] >= n) return Snake{sx, sy, x, y};
    }
    for (std::int64_t k = -d; k <= d; k += 2) {
      std::int64_t u = (k == -d || (k != d && vb[offset + k - 1] < vb[offset + k + 1])) ? vb[offset + k + 1]
                                                                                         : vb[offset + k - 1] + 1;
      std::int64_t v = u - k;
      const std::int64_t su = u;
      const std::int64_t sv = v;
      while (u < n && v < m && a[a1 - 1 - u] == b[b1 - 1 - v]) {
        ++u;
        ++v;
      }
      vb[offset + k] = u;
      const std::int64_t fk = delta - k;
      if (!odd && fk >= -d && fk <= d && u + vf[offset + fk] >= n) return Snake{n - u, m - v, n - su, m - sv};
    }
  }
  return std::nullopt;
}

bool diff_range(const Lines& a, std::int64_t a0, std::int64_t a1, const Lines& b, std::int64_t b0,
                std::int64_t b1, std::int64_t max_cost, std::vector<Edit>& out) {
  std::int64_t prefix = 0;
  while (a0 + prefix < a1 && b0 + prefix < b1 && a[a0 + prefix] == b[b0 + prefix]) ++prefix;
  out.insert(out.end(), static_cast<std::size_t>(prefix), Edit::keep);
  a0 += prefix;
  b0 += prefix;
  std::int64_t suffix = 0;
  while (a1 - suffix > a0 && b1 - suffix > b0 && a[a1 - 1 - suffix] == b[b1 - 1 - suffix]) ++suffix;
  a1 -= suffix;
  b1 -= suffix;

  bool solved = true;
  if (a0 == a1) {
    out.insert(out.end(), static_cast<std::size_t>(b1 - b0), Edit::add);
  } else if (b0 == b1) {
    out.insert(out.end(), static_cast<std::size_t>(a1 - a0), Edit::remove);
  } else if (const auto snake = middle_snake(a, a0, a1, b, b0, b1, max_cost)) {
    diff_range(a, a0, a0 + snake->x0, b, b0, b0 + snake->y0, max_cost, out);
    out.insert(out.end(), static_cast<std::size_t>(snake->x1 - snake->x0), Edit::keep);
    diff_range(a, a0 + snake->x1, a1, b, b0 + snake->y1, b1, max_cost, out);
  } else {
    out.insert(out.end(), static_cast<std::size_t>(a1 - a0), Edit::remove);
    out.insert(out.end(), static_cast<std::size_t>(b1 - b0), Edit::add);
    solved = false;
  }
  out.insert(out.end(), static_cast<std::size_t>(suffix), Edit::keep);
  return solved;
}

// Shortest edit script. Past kMaxEditCost the changed region is emitted as
// delete-all/insert-all. Within each run of changes, removals come first.
std::vector<Edit> edit_script(const Lines& a, const Lines& b) {
  constexpr std::int64_t kMaxEditCost = 20000;
  std::vector<Edit> script;
  script.reserve(a.size() + b.size());
  diff_range(a, 0, static_cast<std::int64_t>(a.size()), b, 0, static_cast<std::int64_t>(b.size()), kMaxEditCost,
             script);
  for (auto it = script.begin(); it != script.end();) {
    if (*it == Edit::keep) {
      ++it;
      continue;
    }
    auto run_end = std::find(it, script.end(), Edit::keep);
    std::stable_partition(it, run_end, [](Edit e) { return e == Edit::remove; });
    it = run_end;
  }
  return script;
}

int parse_int(std::string_view s, std::string_view header) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw PatchMismatch("malformed hunk header: " + std::string(header));
  }
  return value;
}

// "-12,3" or "+7" -> (start, count)
std::pair<int, int> parse_range(std::string_view part, std::string_view header) {
  part.remove_prefix(1);
  const auto comma = part.find(',');
  if (comma == std::string_view::npos) return {parse_int(part, header), 1};
  return {parse_int(part.substr(0, comma), header), parse_int(part.substr(comma + 1), header)};
}

}  // namespace

HunkChanges changed_lines(const Hunk& hunk) {
  HunkChanges changes;
  int old_line = hunk.old_count == 0 ? hunk.old_start + 1 : hunk.old_start;
  int new_line = hunk.new_count == 0 ? hunk.new_start + 1 : hunk.new_start;
  for (const auto& line : hunk.lines) {
    switch (line.op) {
      case DiffLine::Op::context:
        ++old_line;
        ++new_line;
        break;
      case DiffLine::Op::removed:
        changes.removed_old_lines.push_back(old_line++);
        break;
      case DiffLine::Op::added:
        changes.added_new_lines.push_back(new_line++);
        break;
    }
  }
  return changes;
}

std::vector<Hunk> diff_texts(std::string_view before, std::string_view after, int context) {
  const auto a = to_lines(before);
  const auto b = to_lines(after);
  const auto script = edit_script(a, b);

  struct Step {
    Edit edit;
    std::size_t ai;  // index into a of this (or the next) old line
    std::size_t bi;
  };
  std::vector<Step> steps;
  steps.reserve(script.size());
  std::size_t ai = 0;
  std::size_t bi = 0;
  for (auto e : script) {
    steps.push_back({e, ai, bi});
    if (e != Edit::add) ++ai;
    if (e != Edit::remove) ++bi;
  }

  std::vector<Hunk> hunks;
  const auto ctx = static_cast<std::size_t>(std::max(context, 0));
  std::size_t i = 0;
  while (i < steps.size()) {
    if (steps[i].edit == Edit::keep) {
      ++i;
      continue;
    }
    // Extend a hunk while the gap of unchanged lines between changes is at
    // most 2*context.
    const std::size_t begin = i >= ctx ? i - ctx : 0;
    std::size_t end = i;
    for (;;) {
      while (end < steps.size() && steps[end].edit != Edit::keep) ++end;
      std::size_t gap = end;
      while (gap < steps.size() && steps[gap].edit == Edit::keep) ++gap;
      if (gap < steps.size() && gap - end <= 2 * ctx) {
        end = gap;
        continue;
      }
      end = std::min(steps.size(), end + ctx);
      break;
    }
    Hunk hunk;
    for (std::size_t s = begin; s < end; ++s) {
      const auto& step = steps[s];
      DiffLine line;
      if (step.edit == Edit::add) {
        line.op = DiffLine::Op::added;
        line.text = std::string(b[step.bi].text);
        line.has_newline = b[step.bi].has_newline;
        ++hunk.new_count;
      } else {
        line.op = step.edit == Edit::remove ? DiffLine::Op::removed : DiffLine::Op::context;
        line.text = std::string(a[step.ai].text);
        line.has_newline = a[step.ai].has_newline;
        ++hunk.old_count;
        if (step.edit == Edit::keep) ++hunk.new_count;
      }
      hunk.lines.push_back(std::move(line));
    }
    const auto& first = steps[begin];
    hunk.old_start = static_cast<int>(first.ai) + (hunk.old_count > 0 ? 1 : 0);
    hunk.new_start = static_cast<int>(first.bi) + (hunk.new_count > 0 ? 1 : 0);
    hunks.push_back(std::move(hunk));
    i = end;
  }
  return hunks;
}

std::string format_unified(const std::vector<Hunk>& hunks, std::string_view old_name,
                           std::string_view new_name) {
  std::string out;
  if (!old_name.empty() || !new_name.empty()) {
    out += "--- " + std::string(old_name) + "\n";
    out += "+++ " + std::string(new_name) + "\n";
  }
  for (const auto& h : hunks) {
    out += "@@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_count) + " +" +
           std::to_string(h.new_start) + "," + std::to_string(h.new_count) + " @@\n";
    for (const auto& line : h.lines) {
      out.push_back(static_cast<char>(line.op));
      out += line.text;
      out.push_back('\n');
      if (!line.has_newline) out += "\\ No newline at end of file\n";
    }
  }
  return out;
}

std::vector<Hunk> parse_unified(std::string_view text) {
  std::vector<Hunk> hunks;
  std::optional<Hunk> current;
  int old_seen = 0;
  int new_seen = 0;
  const auto finish = [&] {
    if (!current) return;
    if (old_seen != current->old_count || new_seen != current->new_count) {
      throw PatchMismatch("hunk line counts do not match its header");
    }
    hunks.push_back(std::move(*current));
    current.reset();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;

    if (line.starts_with("@@")) {
      finish();
      const auto close = line.find("@@", 2);
      if (close == std::string_view::npos) {
        throw PatchMismatch("malformed hunk header: " + std::string(line));
      }
      const auto body = line.substr(3, close - 4);
      const auto space = body.find(' ');
      if (space == std::string_view::npos || body[0] != '-' || body[space + 1] != '+') {
        throw PatchMismatch("malformed hunk header: " + std::string(line));
      }
      Hunk h;
      std::tie(h.old_start, h.old_count) = parse_range(body.substr(0, space), line);
      std::tie(h.new_start, h.new_count) = parse_range(body.substr(space + 1), line);
      current = std::move(h);
      old_seen = new_seen = 0;
      continue;
    }
    const bool hunk_full =
        current && old_seen == current->old_count && new_seen == current->new_count;
    if (!current || (hunk_full && !line.starts_with("\\"))) {
      finish();
      continue;  // file headers, diff --git lines, index lines
    }
    if (line.starts_with("\\")) {
      if (current->lines.empty()) throw PatchMismatch("newline marker before any hunk line");
      current->lines.back().has_newline = false;
      continue;
    }
    DiffLine dl;
    const char op = line.empty() ? ' ' : line[0];
    dl.text = std::string(line.empty() ? line : line.substr(1));
    if (op == ' ') {
      dl.op = DiffLine::Op::context;
      ++old_seen;
      ++new_seen;
    } else if (op == '-') {
      dl.op = DiffLine::Op::removed;
      ++old_seen;
    } else if (op == '+') {
      dl.op = DiffLine::Op::added;
      ++new_seen;
    } else {
      throw PatchMismatch("unexpected line in hunk: " + std::string(line));
    }
    current->lines.push_back(std::move(dl));
  }
  finish();
  return hunks;
}

std::string apply_hunks(std::string_view before, const std::vector<Hunk>& hunks) {
  const auto a = to_lines(before);
  std::vector<SourceLine> out;
  std::vector<std::string> owned;  // storage for added lines
  std::size_t total_added = 0;
  for (const auto& h : hunks) {
    for (const auto& l : h.lines) total_added += l.op == DiffLine::Op::added;
  }
  owned.reserve(total_added);

  std::size_t cursor = 0;  // next unconsumed index into a
  for (const auto& h : hunks) {
    const std::size_t start =
        h.old_count == 0 ? static_cast<std::size_t>(h.old_start) : static_cast<std::size_t>(h.old_start - 1);
    if (start < cursor || start > a.size()) {
      throw PatchMismatch("hunk @@ -" + std::to_string(h.old_start) + " out of order or range");
    }
    while (cursor < start) out.push_back(a[cursor++]);
    for (const auto& l : h.lines) {
      if (l.op == DiffLine::Op::added) {
        owned.push_back(l.text);
        out.push_back({owned.back(), l.has_newline});
        continue;
      }
      if (cursor >= a.size() || a[cursor].text != l.text ||
          a[cursor].has_newline != l.has_newline) {
        throw PatchMismatch("hunk @@ -" + std::to_string(h.old_start) +
                            " does not match source at line " + std::to_string(cursor + 1));
      }
      if (l.op == DiffLine::Op::context) out.push_back(a[cursor]);
      ++cursor;
    }
  }
  while (cursor < a.size()) out.push_back(a[cursor++]);

  std::string result;
  for (const auto& l : out) {
    result += l.text;
    if (l.has_newline) result.push_back('\n');
  }
  return result;
}

bool hunks_fit(const std::vector<Hunk>& hunks, std::size_t old_lines, std::size_t new_lines) {
  for (const auto& h : hunks) {
    if (h.old_start < 0 || h.new_start < 0 || h.old_count < 0 || h.new_count < 0) return false;
    const auto old_end = static_cast<std::size_t>(h.old_count == 0 ? h.old_start : h.old_start + h.old_count - 1);
    const auto new_end = static_cast<std::size_t>(h.new_count == 0 ? h.new_start : h.new_start + h.new_count - 1);
    if (old_end > old_lines || new_end > new_lines) return false;
  }
  return true;
}

}  // namespace vulnforge
