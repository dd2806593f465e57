#include "quanta/trace.hpp"

#include "quanta/error.hpp"
#include "quanta/printer.hpp"

namespace quanta {

std::string trace_path_str(const std::vector<int>& path) {
    if (path.empty()) return ".";
    std::string s;
    for (int i : path) {
        s += '.';
        s += std::to_string(i);
    }
    return s;
}

std::string trace_line(const TraceEntry& e) {
    if (e.is_note()) return "NOTE " + e.rule + ": " + e.text;
    return "RULE " + e.rule + " AT " + trace_path_str(e.path) + ": " + serialize(e.before) +
           " => " + serialize(e.after);
}

InfonPtr subtree_at(const InfonPtr& root, const std::vector<int>& path) {
    InfonPtr cur = root;
    for (int i : path) {
        if (!cur || i < 0 || static_cast<size_t>(i) >= cur->children.size())
            throw QuantaError(ErrorCode::Io, "trace path leaves the tree");
        cur = cur->children[static_cast<size_t>(i)];
    }
    return cur;
}

InfonPtr replace_at(const InfonPtr& root, const std::vector<int>& path, const InfonPtr& repl) {
    if (path.empty()) return repl;
    if (!root || path[0] < 0 || static_cast<size_t>(path[0]) >= root->children.size())
        throw QuantaError(ErrorCode::Io, "trace path leaves the tree");
    std::vector<int> rest(path.begin() + 1, path.end());
    auto kids = root->children;
    kids[static_cast<size_t>(path[0])] = replace_at(kids[static_cast<size_t>(path[0])], rest, repl);
    return with_children(root, std::move(kids));
}

InfonPtr replay_trace(const InfonPtr& input, const Trace& trace) {
    InfonPtr cur = input;
    for (const auto& e : trace) {
        if (e.is_note()) continue;
        InfonPtr site = subtree_at(cur, e.path);
        if (!structural_equal(site, e.before))
            throw QuantaError(ErrorCode::Io, "trace replay mismatch at " + trace_path_str(e.path) +
                                                 ": expected " + serialize(e.before) + ", found " +
                                                 serialize(site));
        cur = replace_at(cur, e.path, e.after);
    }
    return cur;
}

}  // namespace quanta
