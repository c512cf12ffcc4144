// The two parametrizations used by the equivalence constructions:
// f_b (a real read as a Bernoulli parameter) and Z -> μ_Z.
#pragma once

#include "mlab/param_map.hpp"

namespace mlab {

// f_b. star(τ) pins every string of length <= ⌊|τ|/3⌋ to the closed range of
// x^a (1-x)^b over x ∈ [0.τ, 0.τ + 2^-|τ|]; center(τ) = B(0.τ1).
ParamMapPtr bernoulli_param_map();

// Least m with Σ_{1≤j≤⌊m/3⌋} 2^-j min(1, j 2^-m) + 2^-⌊m/3⌋ <= 2^-3n. The
// width of x^a (1-x)^b over an interval of width w is at most (a+b) w, so
// every star(σ) with |σ| = m obeys the size bound.
std::size_t bernoulli_modulus(std::size_t n);

// Z -> μ_Z. star(τ) pins all strings of length <= 2|τ| exactly; modulus(n) = n;
// center(τ) = μ_{τ0^ω}.
ParamMapPtr interleave_param_map();

}  // namespace mlab
