#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/commit_miner.hpp"
#include "vulnforge/cve.hpp"
#include "vulnforge/cwe.hpp"
#include "vulnforge/sample.hpp"

namespace vulnforge {

struct FunctionSpan {
  std::string name;  // as written, qualified when the definition is ("Foo::bar", "operator==")
  int start_line = 0;  // first token of the signature
  int end_line = 0;    // closing brace
  std::string body_text;  // source lines [start_line, end_line] joined by '\n'

  bool operator==(const FunctionSpan&) const = default;
};

struct ExtractionDiagnostics {
  std::size_t skipped_regions = 0;   // brace blocks at declaration level that were not classified
  std::size_t unterminated = 0;      // comments/literals running off the end
  std::size_t replaced_bytes = 0;    // invalid UTF-8 bytes replaced
  std::size_t dropped_overlaps = 0;  // spans sharing a line with a previous span
  std::size_t unclosed = 0;          // definitions whose body never closed

  void merge(const ExtractionDiagnostics& other);
  std::size_t total() const;
};

// Function definitions (with bodies) at file, namespace or extern "C" scope,
// in source order and pairwise disjoint. Class bodies are opaque, so inline
// member functions are not reported separately; nor are lambdas or local
// classes, which stay inside their enclosing span. In #if/#else chains, each
// branch is scanned from the state at the #if and the first live branch
// determines the state after #endif; "#if 0" regions are skipped.
std::vector<FunctionSpan> extract_functions(std::string_view source,
                                            ExtractionDiagnostics* diagnostics = nullptr);

struct ChangedFunction {
  std::optional<FunctionSpan> before;
  std::optional<FunctionSpan> after;
  std::vector<int> flaw_line_nos;   // 1-based, relative to before->start_line
  std::vector<int> patch_line_nos;  // 1-based, relative to after->start_line

  bool operator==(const ChangedFunction&) const = default;
};

struct AlignDiagnostics {
  std::size_t ambiguous = 0;        // AlignmentAmbiguous: skipped
  std::size_t added_functions = 0;  // new functions have no vulnerable side
  std::vector<std::string> messages;
};

// Pairs before/after spans touched by the delta's removed or added lines.
// Spans are matched by name; among same-named candidates, by where their
// unchanged lines land after the diff, then by ordinal position. Removed
// lines become flaw lines and added lines patch lines; a modified line is
// both. A function removed by the fix has every line as a flaw line.
std::vector<ChangedFunction> align_diff(const FileDelta& delta,
                                        const std::vector<FunctionSpan>& before_spans,
                                        const std::vector<FunctionSpan>& after_spans,
                                        AlignDiagnostics* diagnostics = nullptr);

struct BuildOptions {
  // Also emit label-0 samples for functions the fix did not touch, tagged
  // provenance=unchanged_in_fix.
  bool include_unchanged = false;
};

struct BuildDiagnostics {
  ExtractionDiagnostics extraction;
  AlignDiagnostics alignment;
  std::size_t invalid_deltas = 0;
};

std::vector<FunctionSample> build_samples(const FixCommit& fix, const CveRecord& cve,
                                          const std::optional<CweInfo>& cwe,
                                          const BuildOptions& options = {},
                                          BuildDiagnostics* diagnostics = nullptr);

}  // namespace vulnforge
