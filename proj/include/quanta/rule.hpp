#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quanta/infon.hpp"

namespace quanta {

struct RuleVar {
    std::string token;
    bool ordered = false;
    InfonPtr range;  // membership guard; null means unconstrained
};

// A directed identity: rewrite lhs -> rhs after binding vars. Ground facts
// are rules with no vars.
struct Rule {
    // Candidate lanes, searched in this order at every site:
    //   Canonical  - order-sensitive shortcuts that sort operands (looked at
    //                before value rules so traces show canonicalization first)
    //   Shortcut   - preloaded derivable identities
    //   Axiom      - user-asserted facts and for-rules, most recent first
    enum class Lane { Canonical, Shortcut, Axiom };

    std::string display;
    std::vector<RuleVar> vars;
    InfonPtr lhs;
    InfonPtr rhs;
    Lane lane = Lane::Axiom;
    uint64_t seq_no = 0;  // registration recency

    bool is_ground() const { return vars.empty(); }
};

// True when lhs/rhs are the same call with permuted arguments — the rule
// reorders operands rather than computing, so it only fires on operand lists
// that are not yet in canonical order (termination guard).
bool rule_is_order_sensitive(const Rule& r);

}  // namespace quanta
