#include "trivine/vine.hpp"

#include <cmath>
#include <stdexcept>

namespace trivine {

VineOrder vine_order(VinePermutation p) noexcept {
    switch (p) {
        case VinePermutation::P12_13_23g1:
            return {0, 1, 2};
        case VinePermutation::P12_23_13g2:
            return {1, 0, 2};
        case VinePermutation::P13_23_12g3:
            return {2, 0, 1};
    }
    return {0, 1, 2};
}

std::array<std::string, 3> edge_labels(VinePermutation p) {
    switch (p) {
        case VinePermutation::P12_13_23g1:
            return {"12", "13", "23|1"};
        case VinePermutation::P12_23_13g2:
            return {"12", "23", "13|2"};
        case VinePermutation::P13_23_12g3:
            return {"13", "23", "12|3"};
    }
    return {"12", "13", "23|1"};
}

double vine_log_density(const VineSpec& v, double u1, double u2, double u3) {
    const std::array<double, 3> u{clip_unit(u1), clip_unit(u2), clip_unit(u3)};
    const VineOrder o = vine_order(v.permutation);
    const double ur = u[o.root];
    const double us = u[o.first];
    const double ut = u[o.second];
    return log_pdf(v.edge_a, ur, us) + log_pdf(v.edge_b, ur, ut) +
           log_pdf(v.edge_cond, hfunc(v.edge_a, us, ur), hfunc(v.edge_b, ut, ur));
}

double vine_density(const VineSpec& v, double u1, double u2, double u3) {
    return std::exp(vine_log_density(v, u1, u2, u3));
}

std::array<double, 3> dependent_nodes(const VineSpec& v, double w_root, double w_first, double w_second) {
    const VineOrder o = vine_order(v.permutation);
    std::array<double, 3> out{};
    out[o.root] = clip_unit(w_root);
    out[o.first] = hinv(v.edge_a, w_first, w_root);
    const double t = hinv(v.edge_cond, w_second, w_first);
    out[o.second] = hinv(v.edge_b, t, w_root);
    return out;
}

std::array<double, 3> independent_nodes(const VineSpec& v, const std::array<double, 3>& u) {
    const VineOrder o = vine_order(v.permutation);
    const double ur = clip_unit(u[o.root]);
    const double w_first = hfunc(v.edge_a, u[o.first], ur);
    const double t = hfunc(v.edge_b, u[o.second], ur);
    const double w_second = hfunc(v.edge_cond, t, w_first);
    return {ur, w_first, w_second};
}

std::array<double, 3> sample_vine(const VineSpec& v, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double w1 = unif(rng);
    const double w2 = unif(rng);
    const double w3 = unif(rng);
    return dependent_nodes(v, w1, w2, w3);
}

std::string to_string(VinePermutation p) {
    switch (p) {
        case VinePermutation::P12_13_23g1:
            return "12,13,23|1";
        case VinePermutation::P12_23_13g2:
            return "12,23,13|2";
        case VinePermutation::P13_23_12g3:
            return "13,23,12|3";
    }
    return "?";
}

VinePermutation parse_permutation(const std::string& text) {
    std::string t;
    for (char ch : text) {
        if (ch != ' ' && ch != '{' && ch != '}') {
            t += ch;
        }
    }
    if (t == "12,13,23|1" || t == "1") {
        return VinePermutation::P12_13_23g1;
    }
    if (t == "12,23,13|2" || t == "2") {
        return VinePermutation::P12_23_13g2;
    }
    if (t == "13,23,12|3" || t == "3") {
        return VinePermutation::P13_23_12g3;
    }
    throw std::invalid_argument("unknown vine permutation '" + text +
                                "' (expected 12,13,23|1 or 12,23,13|2 or 13,23,12|3)");
}

}  // namespace trivine
