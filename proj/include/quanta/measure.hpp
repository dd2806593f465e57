#pragma once

#include <optional>

#include "quanta/bigint.hpp"
#include "quanta/infon.hpp"
#include "quanta/normalize.hpp"

namespace quanta {

// Information content in bits: {} carries 0; a declared name of a finite
// class with 2^b states carries b; a closed collection carries the sum over
// its identity-distinct members. nullopt when undefined (unbounded classes,
// undeclared names, non-power-of-two state counts).
std::optional<BigInt> info_bits(Evaluator& ev, Context& ctx, const InfonPtr& v);

// b where states == 2^b, if states is a power of two.
std::optional<BigInt> log2_exact(const BigInt& states);

}  // namespace quanta
