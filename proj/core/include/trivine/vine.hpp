#pragma once

#include "trivine/copula.hpp"

#include <array>
#include <random>
#include <string>

namespace trivine {

/// The three trivariate C-vine orderings. Variables are numbered
/// 1 = sensitivity, 2 = specificity, 3 = prevalence.
enum class VinePermutation {
    P12_13_23g1,  // root 1: edges (1,2), (1,3), (2,3|1)
    P12_23_13g2,  // root 2: edges (2,1), (2,3), (1,3|2)
    P13_23_12g3,  // root 3: edges (3,1), (3,2), (1,2|3)
};

/// Variable indices (0-based) of the canonical slots for a permutation:
/// root, first leaf, second leaf.
struct VineOrder {
    int root;
    int first;
    int second;
};
VineOrder vine_order(VinePermutation p) noexcept;

/// C-vine in canonical form. edge_a couples (root, first) as
/// C(u_root, u_first); edge_b couples (root, second) as C(u_root, u_second);
/// edge_cond couples the two conditional leaves as
/// C(F(first|root), F(second|root)).
struct VineSpec {
    VinePermutation permutation = VinePermutation::P12_13_23g1;
    BivariateCopula edge_a;
    BivariateCopula edge_b;
    BivariateCopula edge_cond;

    /// Truncated at level 1: the conditional edge is independence.
    bool truncated() const noexcept { return edge_cond.is_independence(); }
};

/// Edge labels like "12", "13", "23|1" for the current permutation.
std::array<std::string, 3> edge_labels(VinePermutation p);

double vine_density(const VineSpec& v, double u1, double u2, double u3);
double vine_log_density(const VineSpec& v, double u1, double u2, double u3);

/// Maps independent uniforms (w_root, w_first, w_second) to vine-distributed
/// uniforms, returned indexed by variable (sensitivity, specificity,
/// prevalence):
///   v_root   = w_root
///   v_first  = hinv_a(w_first | w_root)
///   t        = hinv_cond(w_second | w_first)
///   v_second = hinv_b(t | w_root)
std::array<double, 3> dependent_nodes(const VineSpec& v, double w_root, double w_first, double w_second);

/// Inverse of dependent_nodes: variable-indexed vine uniforms back to the
/// independent (root, first, second) uniforms.
std::array<double, 3> independent_nodes(const VineSpec& v, const std::array<double, 3>& u);

/// Draws one variable-indexed triple from the vine.
std::array<double, 3> sample_vine(const VineSpec& v, std::mt19937_64& rng);

std::string to_string(VinePermutation p);
VinePermutation parse_permutation(const std::string& text);

}  // namespace trivine
