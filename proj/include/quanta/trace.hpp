#pragma once

#include <string>
#include <vector>

#include "quanta/infon.hpp"

namespace quanta {

// One normalization step. Rewrite entries carry enough to replay the step;
// note entries (skipped guards, appends, effects) are informational only.
struct TraceEntry {
    std::string rule;            // rule/fact/autoname display name
    std::vector<int> path;       // child-index path from the normalize root
    InfonPtr before;             // site before the rewrite (null for notes)
    InfonPtr after;              // site after the rewrite (null for notes)
    std::string text;            // note text for non-rewrite entries
    bool is_note() const { return !before; }
};

using Trace = std::vector<TraceEntry>;

std::string trace_path_str(const std::vector<int>& path);
// Line format used by the shell and tests.
std::string trace_line(const TraceEntry& e);

// Re-applies every rewrite entry to `input` in order, checking each site
// matches the recorded before-form; returns the final form or throws
// QuantaError on any mismatch (trace soundness checker).
InfonPtr replay_trace(const InfonPtr& input, const Trace& trace);

// Subtree access used by the replayer and tests.
InfonPtr subtree_at(const InfonPtr& root, const std::vector<int>& path);
InfonPtr replace_at(const InfonPtr& root, const std::vector<int>& path, const InfonPtr& repl);

}  // namespace quanta
