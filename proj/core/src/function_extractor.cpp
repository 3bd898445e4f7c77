#include "vulnforge/function_extractor.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_set>

#include "vulnforge/diff.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/lexer.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace {

// Identifiers that may precede a parenthesis at declaration level without
// naming a function.
const std::unordered_set<std::string_view> kNotFunctionNames = {
    "if", "while", "for", "switch", "return", "sizeof", "alignof", "_Alignof", "decltype",
    "__attribute__", "__attribute", "__declspec", "alignas", "_Alignas", "noexcept", "throw",
    "requires", "static_assert", "_Static_assert", "asm", "__asm", "__asm__", "typeof",
    "__typeof__", "__typeof", "void", "int", "char", "short", "long", "float", "double",
    "signed", "unsigned", "bool", "_Bool", "auto", "const", "volatile", "struct", "union",
    "enum", "class", "typename", "template", "case", "do", "else", "new", "delete"};

bool is_ident(const Token& t) { return t.kind == TokenKind::identifier; }

bool is(const Token& t, std::string_view text) {
  return t.kind != TokenKind::string_literal && t.kind != TokenKind::char_literal && t.text == text;
}

bool all_caps(std::string_view name) {
  bool has_alpha = false;
  for (char c : name) {
    if (std::islower(static_cast<unsigned char>(c))) return false;
    has_alpha = has_alpha || std::isalpha(static_cast<unsigned char>(c));
  }
  return has_alpha;
}

enum class BlockKind { none, function, other };

struct ScanState {
  int scope_depth = 0;  // open namespace / extern "C" blocks
  std::vector<std::size_t> candidate;
  int init_brace_depth = 0;
  BlockKind block = BlockKind::none;
  int block_depth = 0;
  std::string fn_name;
  int fn_start_line = 0;
};

struct Classification {
  enum Kind { scope, function, init_brace, other } kind = other;
  std::string name;
  std::size_t start = 0;  // index into the candidate
};

class SignatureParser {
 public:
  SignatureParser(const std::vector<Token>& tokens, const std::vector<std::size_t>& candidate)
      : tokens_(tokens), cand_(candidate) {}

  Classification classify() const {
    Classification result;
    if (cand_.empty()) return result;
    std::size_t first = 0;
    if (is(at(0), "inline") && size() > 1) first = 1;
    if (is(at(first), "namespace")) {
      result.kind = Classification::scope;
      return result;
    }
    if (size() == 2 && is(at(0), "extern") && at(1).kind == TokenKind::string_literal) {
      result.kind = Classification::scope;
      return result;
    }

    std::size_t begin = 0;
    while (begin < size() && is(at(begin), "template")) {
      if (begin + 1 >= size() || !is(at(begin + 1), "<")) break;
      begin = skip_angles(begin + 1);
    }
    if (begin >= size()) return result;

    // Depth-0 parenthesis groups and '=' tokens.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    int depth = 0;
    std::size_t open = 0;
    bool has_assign = false;
    for (std::size_t i = begin; i < size(); ++i) {
      const auto& t = at(i);
      if (is(t, "(") || is(t, "[")) {
        if (depth++ == 0 && is(t, "(")) open = i;
      } else if (is(t, ")") || is(t, "]")) {
        if (--depth == 0 && is(t, ")")) groups.emplace_back(open, i);
        if (depth < 0) return result;
      } else if (depth == 0 && is(t, "=") && !(i > 0 && is(at(i - 1), "operator"))) {
        has_assign = true;
      } else if (depth == 0 && (is(t, "{") || is(t, "}"))) {
        // only brace-initializers inside constructor init lists get here
      }
    }
    if (has_assign || groups.empty()) return result;

    struct Candidate {
      std::size_t group;
      std::string name;
      std::size_t name_begin;
    };
    std::vector<Candidate> eligible;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (auto c = name_before(groups, g)) eligible.push_back({c->first, c->second.first, c->second.second});
    }
    if (eligible.empty()) return result;
    const Candidate* chosen = &eligible.front();
    for (const auto& c : eligible) {
      const auto base = c.name.substr(c.name.rfind(':') == std::string::npos ? 0 : c.name.rfind(':') + 1);
      if (!all_caps(base)) {
        chosen = &c;
        break;
      }
    }

    const auto close = groups[chosen->group].second;
    // Constructor initializer list: a lone ':' after the parameter list.
    bool init_list = false;
    for (std::size_t i = close + 1; i < size(); ++i) {
      if (is(at(i), ":")) {
        init_list = true;
        break;
      }
    }
    if (init_list) {
      const auto& last = at(size() - 1);
      if (is_ident(last) || is(last, ">")) {
        result.kind = Classification::init_brace;
        return result;
      }
    }

    result.kind = Classification::function;
    result.name = chosen->name;
    result.start = macro_prefix_end(begin == 0 ? 0 : 0, chosen->name_begin);
    return result;
  }

 private:
  std::size_t size() const { return cand_.size(); }
  const Token& at(std::size_t i) const { return tokens_[cand_[i]]; }

  // Index just past the '>' matching the '<' at `lt`.
  std::size_t skip_angles(std::size_t lt) const {
    int depth = 0;
    for (std::size_t i = lt; i < size(); ++i) {
      if (is(at(i), "<")) ++depth;
      if (is(at(i), ">")) --depth;
      if (is(at(i), ">>")) depth -= 2;
      if (depth <= 0) return i + 1;
    }
    return size();
  }

  // Walks back from index `i` (an identifier or '>') over template arguments
  // and '::' qualifiers. Returns the first index of the qualified name.
  std::size_t qualified_begin(std::size_t i) const {
    for (;;) {
      if (is(at(i), ">")) {
        int depth = 0;
        std::size_t j = i;
        for (;; --j) {
          if (is(at(j), ">")) ++depth;
          if (is(at(j), "<")) --depth;
          if (depth == 0 || j == 0) break;
        }
        if (depth != 0 || j == 0 || !is_ident(at(j - 1))) return i;
        i = j - 1;
      }
      if (i > 0 && is(at(i - 1), "~")) --i;
      if (i >= 2 && is(at(i - 1), "::") && (is_ident(at(i - 2)) || is(at(i - 2), ">"))) {
        i -= 2;
        continue;
      }
      if (i >= 1 && is(at(i - 1), "::")) --i;  // leading global qualifier
      return i;
    }
  }

  std::string join(std::size_t from, std::size_t to) const {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
      if (!out.empty() && is_ident(at(i)) && (std::isalnum(static_cast<unsigned char>(out.back())) || out.back() == '_')) {
        out.push_back(' ');
      }
      out += at(i).text;
    }
    return out;
  }

  // For group g: (parameter group index, (name, first token of name)).
  std::optional<std::pair<std::size_t, std::pair<std::string, std::size_t>>> name_before(
      const std::vector<std::pair<std::size_t, std::size_t>>& groups, std::size_t g) const {
    const auto open = groups[g].first;
    if (open == 0) return std::nullopt;

    // operator()(...) : the first group is part of the name.
    if (is(at(open - 1), "operator")) {
      if (groups[g].second != open + 1 || g + 1 >= groups.size() ||
          groups[g + 1].first != open + 2) {
        return std::nullopt;
      }
      const auto begin = qualified_begin(open - 1);
      return std::make_pair(g + 1, std::make_pair(join(begin, open + 2), begin));
    }
    // operator==, operator new[], operator bool, ...
    for (std::size_t back = 2; back <= 4 && back <= open; ++back) {
      if (is(at(open - back), "operator")) {
        bool plain = true;
        for (std::size_t k = open - back + 1; k < open; ++k) {
          if (is(at(k), "(") || is(at(k), ")")) plain = false;
        }
        if (!plain) break;
        const auto begin = qualified_begin(open - back);
        return std::make_pair(g, std::make_pair(join(begin, open), begin));
      }
    }

    const auto& prev = at(open - 1);
    if (is(prev, ">")) {
      const auto begin = qualified_begin(open - 1);
      if (begin == open - 1 || !is_ident(at(begin)) || kNotFunctionNames.count(at(begin).text)) {
        return std::nullopt;
      }
      return std::make_pair(g, std::make_pair(join(begin, open), begin));
    }
    if (!is_ident(prev) || kNotFunctionNames.count(prev.text)) return std::nullopt;
    const auto begin = qualified_begin(open - 1);
    return std::make_pair(g, std::make_pair(join(begin, open), begin));
  }

  // A leading macro invocation such as `DEFINE_THING(x)` that ends on an
  // earlier line than the following token is not part of the signature.
  std::size_t macro_prefix_end(std::size_t start, std::size_t name_begin) const {
    std::size_t i = start;
    while (i + 1 < name_begin && is_ident(at(i)) && all_caps(at(i).text) && is(at(i + 1), "(")) {
      int depth = 0;
      std::size_t j = i + 1;
      for (; j < name_begin; ++j) {
        if (is(at(j), "(")) ++depth;
        if (is(at(j), ")") && --depth == 0) break;
      }
      if (j + 1 >= name_begin + 1 || j + 1 >= size()) break;
      if (at(j + 1).line <= at(j).end_line) break;
      i = j + 1;
    }
    return i;
  }

  const std::vector<Token>& tokens_;
  const std::vector<std::size_t>& cand_;
};

class Extractor {
 public:
  Extractor(std::string_view source, ExtractionDiagnostics& diag) : diag_(diag) {
    std::size_t replaced = 0;
    text_ = sanitize_utf8(source, &replaced);
    diag_.replaced_bytes += replaced;
    lines_ = split_lines(text_);
  }

  std::vector<FunctionSpan> run() {
    auto lexed = lex(text_);
    diag_.unterminated += lexed.unterminated;
    tokens_ = std::move(lexed.tokens);

    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      const auto& t = tokens_[i];
      if (t.kind == TokenKind::directive) {
        directive(t);
        continue;
      }
      if (skipping()) continue;
      step(i);
    }
    if (st_.block == BlockKind::function) ++diag_.unclosed;

    std::sort(spans_.begin(), spans_.end(),
              [](const auto& a, const auto& b) { return a.start_line < b.start_line; });
    std::vector<FunctionSpan> out;
    for (auto& s : spans_) {
      if (!out.empty() && s.start_line <= out.back().end_line) {
        ++diag_.dropped_overlaps;
        continue;
      }
      s.body_text = slice(s.start_line, s.end_line);
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  struct CondFrame {
    ScanState at_if;
    std::optional<ScanState> taken_end;
    bool zero_branch = false;
  };

  bool skipping() const {
    return std::any_of(frames_.begin(), frames_.end(), [](const auto& f) { return f.zero_branch; });
  }

  static bool zero_condition(std::string_view arg) { return trim(arg) == "0"; }

  void directive(const Token& t) {
    const auto name = directive_name(t);
    if (name == "if" || name == "ifdef" || name == "ifndef") {
      frames_.push_back({st_, std::nullopt, name == "if" && zero_condition(directive_argument(t))});
    } else if (name == "elif" || name == "else") {
      if (frames_.empty()) return;
      auto& f = frames_.back();
      if (!f.zero_branch && !f.taken_end) f.taken_end = st_;
      st_ = f.at_if;
      f.zero_branch = name == "elif" && zero_condition(directive_argument(t));
    } else if (name == "endif") {
      if (frames_.empty()) return;
      auto& f = frames_.back();
      if (!f.zero_branch && !f.taken_end) f.taken_end = st_;
      st_ = f.taken_end.value_or(f.at_if);
      frames_.pop_back();
    }
  }

  void step(std::size_t i) {
    const auto& t = tokens_[i];
    const bool open = is(t, "{");
    const bool close = is(t, "}");

    if (st_.block != BlockKind::none) {
      if (open) ++st_.block_depth;
      if (close && --st_.block_depth == 0) {
        if (st_.block == BlockKind::function) {
          spans_.push_back({st_.fn_name, st_.fn_start_line, t.end_line, {}});
        }
        st_.block = BlockKind::none;
        st_.candidate.clear();
      }
      return;
    }
    if (st_.init_brace_depth > 0) {
      st_.candidate.push_back(i);
      if (open) ++st_.init_brace_depth;
      if (close) --st_.init_brace_depth;
      return;
    }
    if (is(t, ";")) {
      st_.candidate.clear();
      return;
    }
    if (close) {
      if (st_.scope_depth > 0) {
        --st_.scope_depth;
      } else {
        ++diag_.skipped_regions;
      }
      st_.candidate.clear();
      return;
    }
    if (open) {
      const auto c = SignatureParser(tokens_, st_.candidate).classify();
      switch (c.kind) {
        case Classification::scope:
          ++st_.scope_depth;
          st_.candidate.clear();
          break;
        case Classification::init_brace:
          st_.candidate.push_back(i);
          st_.init_brace_depth = 1;
          break;
        case Classification::function:
          st_.block = BlockKind::function;
          st_.block_depth = 1;
          st_.fn_name = c.name;
          st_.fn_start_line = tokens_[st_.candidate[c.start]].line;
          break;
        case Classification::other:
          if (st_.candidate.empty()) ++diag_.skipped_regions;
          st_.block = BlockKind::other;
          st_.block_depth = 1;
          break;
      }
      return;
    }
    st_.candidate.push_back(i);
  }

  std::string slice(int first, int last) const {
    std::string out;
    for (int l = first; l <= last && l <= static_cast<int>(lines_.size()); ++l) {
      if (l > first) out.push_back('\n');
      out += lines_[l - 1];
    }
    return out;
  }

  ExtractionDiagnostics& diag_;
  std::string text_;
  std::vector<std::string> lines_;
  std::vector<Token> tokens_;
  ScanState st_;
  std::vector<CondFrame> frames_;
  std::vector<FunctionSpan> spans_;
};

// Old line -> new line for lines the diff keeps; 0 for removed lines.
std::vector<int> keep_map(const std::vector<Hunk>& hunks, std::size_t old_line_count) {
  std::vector<int> map(old_line_count + 1, 0);
  int old_line = 1;
  int new_line = 1;
  const auto copy_until = [&](int old_stop) {
    while (old_line < old_stop && old_line <= static_cast<int>(old_line_count)) {
      map[old_line++] = new_line++;
    }
  };
  for (const auto& h : hunks) {
    copy_until(h.old_count == 0 ? h.old_start + 1 : h.old_start);
    for (const auto& l : h.lines) {
      switch (l.op) {
        case DiffLine::Op::context:
          if (old_line <= static_cast<int>(old_line_count)) map[old_line] = new_line;
          ++old_line;
          ++new_line;
          break;
        case DiffLine::Op::removed:
          ++old_line;
          break;
        case DiffLine::Op::added:
          ++new_line;
          break;
      }
    }
  }
  copy_until(static_cast<int>(old_line_count) + 1);
  return map;
}

std::vector<int> relative(const std::vector<int>& absolute, const FunctionSpan& span) {
  std::vector<int> out;
  for (int l : absolute) {
    if (l >= span.start_line && l <= span.end_line) out.push_back(l - span.start_line + 1);
  }
  return out;
}

std::vector<std::string> quotes(const std::string& body, const std::vector<int>& numbers) {
  const auto lines = split_lines(body);
  std::vector<std::string> out;
  for (int n : numbers) out.push_back(quote_line(lines.at(static_cast<std::size_t>(n - 1))));
  return out;
}

}  // namespace

void ExtractionDiagnostics::merge(const ExtractionDiagnostics& o) {
  skipped_regions += o.skipped_regions;
  unterminated += o.unterminated;
  replaced_bytes += o.replaced_bytes;
  dropped_overlaps += o.dropped_overlaps;
  unclosed += o.unclosed;
}

std::size_t ExtractionDiagnostics::total() const {
  return skipped_regions + unterminated + replaced_bytes + dropped_overlaps + unclosed;
}

std::vector<FunctionSpan> extract_functions(std::string_view source,
                                            ExtractionDiagnostics* diagnostics) {
  ExtractionDiagnostics local;
  return Extractor(source, diagnostics ? *diagnostics : local).run();
}

std::vector<ChangedFunction> align_diff(const FileDelta& delta,
                                        const std::vector<FunctionSpan>& before_spans,
                                        const std::vector<FunctionSpan>& after_spans,
                                        AlignDiagnostics* diagnostics) {
  AlignDiagnostics local;
  auto& diag = diagnostics ? *diagnostics : local;

  const auto hunks = parse_unified(delta.unified_diff);
  std::vector<int> removed;
  std::vector<int> added;
  for (const auto& h : hunks) {
    auto c = changed_lines(h);
    removed.insert(removed.end(), c.removed_old_lines.begin(), c.removed_old_lines.end());
    added.insert(added.end(), c.added_new_lines.begin(), c.added_new_lines.end());
  }
  const auto old_count = count_lines(delta.before_source.value_or(""));
  const auto kept = keep_map(hunks, old_count);

  // Group indices by name, preserving source order.
  std::map<std::string, std::vector<std::size_t>> before_by_name;
  std::map<std::string, std::vector<std::size_t>> after_by_name;
  for (std::size_t i = 0; i < before_spans.size(); ++i) before_by_name[before_spans[i].name].push_back(i);
  for (std::size_t i = 0; i < after_spans.size(); ++i) after_by_name[after_spans[i].name].push_back(i);

  std::vector<std::optional<std::size_t>> match(before_spans.size());
  std::vector<bool> after_taken(after_spans.size(), false);
  std::vector<bool> ambiguous(before_spans.size(), false);

  for (const auto& [name, bs] : before_by_name) {
    const auto it = after_by_name.find(name);
    if (it == after_by_name.end()) continue;
    const auto& as = it->second;
    // Position: count kept lines of each before span landing in each after span.
    std::vector<std::optional<std::size_t>> by_position(bs.size());
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
      const auto& b = before_spans[bs[bi]];
      std::vector<int> votes(as.size(), 0);
      for (int l = b.start_line; l <= b.end_line && l <= static_cast<int>(old_count); ++l) {
        const int n = kept[static_cast<std::size_t>(l)];
        if (n == 0) continue;
        for (std::size_t ai = 0; ai < as.size(); ++ai) {
          const auto& a = after_spans[as[ai]];
          if (n >= a.start_line && n <= a.end_line) ++votes[ai];
        }
      }
      const auto best = std::max_element(votes.begin(), votes.end());
      if (*best > 0) by_position[bi] = static_cast<std::size_t>(best - votes.begin());
    }
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
      std::optional<std::size_t> ai = by_position[bi];
      if (!ai) {
        if (bs.size() == as.size()) {
          ai = bi;
        } else if (bs.size() == 1 && as.size() == 1) {
          ai = 0;
        } else if (as.size() > 1 || bs.size() > 1) {
          // Unmatched overload among several: only a problem if it changed.
          ambiguous[bs[bi]] = true;
          continue;
        }
      }
      if (ai && !after_taken[as[*ai]]) {
        after_taken[as[*ai]] = true;
        match[bs[bi]] = as[*ai];
      }
    }
  }

  std::vector<ChangedFunction> out;
  for (std::size_t i = 0; i < before_spans.size(); ++i) {
    const auto& b = before_spans[i];
    ChangedFunction cf;
    cf.before = b;
    cf.flaw_line_nos = relative(removed, b);
    if (match[i]) {
      cf.after = after_spans[*match[i]];
      cf.patch_line_nos = relative(added, *cf.after);
    }
    if (cf.flaw_line_nos.empty() && cf.patch_line_nos.empty()) continue;
    if (ambiguous[i]) {
      ++diag.ambiguous;
      diag.messages.push_back(delta.path + ": AlignmentAmbiguous for overload '" + b.name +
                              "' at line " + std::to_string(b.start_line));
      continue;
    }
    if (!cf.after) {
      cf.flaw_line_nos.clear();
      for (int l = 1; l <= b.end_line - b.start_line + 1; ++l) cf.flaw_line_nos.push_back(l);
    }
    out.push_back(std::move(cf));
  }
  for (std::size_t i = 0; i < after_spans.size(); ++i) {
    if (!after_taken[i] && !relative(added, after_spans[i]).empty()) ++diag.added_functions;
  }
  return out;
}

std::vector<FunctionSample> build_samples(const FixCommit& fix, const CveRecord& cve,
                                          const std::optional<CweInfo>& cwe,
                                          const BuildOptions& options,
                                          BuildDiagnostics* diagnostics) {
  BuildDiagnostics local;
  auto& diag = diagnostics ? *diagnostics : local;

  FunctionSample base;
  base.project = fix.commit.project();
  base.commit_sha = fix.commit.sha;
  base.cve_id = cve.cve_id;
  base.published = cve.published;
  if (!cve.cwe_ids.empty()) {
    base.cwe_id = cve.cwe_ids.front();
    base.extra_cwe_ids.assign(cve.cwe_ids.begin() + 1, cve.cwe_ids.end());
  }
  if (cwe) {
    base.cwe_title = cwe->title;
    base.cwe_type = cwe->weakness_type;
    base.cwe_description = cwe->description;
  }

  std::vector<FunctionSample> samples;
  for (const auto& delta : fix.deltas) {
    if (!delta.before_source) continue;  // added file: nothing was vulnerable
    try {
      validate(delta);
    } catch (const PatchMismatch& e) {
      ++diag.invalid_deltas;
      diag.alignment.messages.push_back(e.what());
      continue;
    }
    const auto before = extract_functions(*delta.before_source, &diag.extraction);
    const auto after = delta.after_source ? extract_functions(*delta.after_source, &diag.extraction)
                                          : std::vector<FunctionSpan>{};
    const auto changed = align_diff(delta, before, after, &diag.alignment);

    std::set<int> changed_after_starts;
    for (const auto& cf : changed) {
      FunctionSample vuln = base;
      vuln.label = 1;
      vuln.file_path = delta.path;
      vuln.function_name = cf.before->name;
      vuln.function_before = cf.before->body_text;
      vuln.flaw_line_nos = cf.flaw_line_nos;
      vuln.flaw_lines = quotes(cf.before->body_text, cf.flaw_line_nos);
      if (cf.after) {
        changed_after_starts.insert(cf.after->start_line);
        vuln.function_after = cf.after->body_text;
        vuln.patch_line_nos = cf.patch_line_nos;
        vuln.patch_lines = quotes(cf.after->body_text, cf.patch_line_nos);
        vuln.pair_id = sha256_hex("pair\n" + base.project + "\n" + base.commit_sha + "\n" +
                                  delta.path + "\n" + cf.before->name + "\n" +
                                  std::to_string(cf.before->start_line))
                           .substr(0, 32);
      }
      vuln.sample_id = make_sample_id(1, *vuln.function_before);
      samples.push_back(vuln);

      if (cf.after) {
        FunctionSample twin = base;
        twin.label = 0;
        twin.file_path = delta.path;
        twin.function_name = cf.after->name;
        twin.function_after = cf.after->body_text;
        twin.patch_line_nos = vuln.patch_line_nos;
        twin.patch_lines = vuln.patch_lines;
        twin.pair_id = vuln.pair_id;
        twin.sample_id = make_sample_id(0, *twin.function_after);
        samples.push_back(std::move(twin));
      }
    }
    if (options.include_unchanged) {
      for (const auto& a : after) {
        if (changed_after_starts.count(a.start_line)) continue;
        FunctionSample neg = base;
        neg.label = 0;
        neg.file_path = delta.path;
        neg.function_name = a.name;
        neg.function_after = a.body_text;
        neg.sample_id = make_sample_id(0, a.body_text);
        neg.provenance = "unchanged_in_fix";
        samples.push_back(std::move(neg));
      }
    }
  }
  return samples;
}

}  // namespace vulnforge
