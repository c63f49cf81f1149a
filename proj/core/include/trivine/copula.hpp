#pragma once

#include <string>

namespace trivine {

enum class CopulaKind { Independence, BVN, Frank, Clayton };

/// Rotation of the copula density, counter-clockwise:
///   90  -> c(1-u, v),  180 -> c(1-u, 1-v),  270 -> c(u, 1-v).
/// Only Clayton uses rotations; the other kinds always carry R0.
enum class Rotation { R0 = 0, R90 = 90, R180 = 180, R270 = 270 };

struct CopulaFamily {
    CopulaKind kind = CopulaKind::Independence;
    Rotation rotation = Rotation::R0;

    friend bool operator==(const CopulaFamily&, const CopulaFamily&) = default;
};

/// Validates the (kind, rotation) combination; throws std::invalid_argument.
CopulaFamily make_family(CopulaKind kind, Rotation rotation = Rotation::R0);

/// A bivariate copula C(u, v; theta). Parameter domains:
///   BVN      theta in (-1, 1)
///   Frank    theta real, |theta| < 1e-8 evaluated as independence
///   Clayton  theta >= 0, theta = 0 is the independence limit
struct BivariateCopula {
    CopulaFamily family;
    double theta = 0.0;

    static BivariateCopula independence() { return {}; }
    bool is_independence() const noexcept;
};

/// Throws std::domain_error when theta is outside the family's domain.
void validate(const BivariateCopula& c);

/// Inputs are clipped to [1e-12, 1 - 1e-12] by every evaluation below.
double clip_unit(double u) noexcept;

double pdf(const BivariateCopula& c, double u, double v);
double log_pdf(const BivariateCopula& c, double u, double v);
double cdf(const BivariateCopula& c, double u, double v);

/// Conditional cdf C(v | u) = dC(u, v)/du.
double hfunc(const BivariateCopula& c, double v, double u);
/// Inverse of hfunc in its first argument: returns v with C(v | u) = p.
double hinv(const BivariateCopula& c, double p, double u);

/// The copula of (V, U) when `c` is the copula of (U, V).
BivariateCopula transpose(const BivariateCopula& c);

/// Kendall's tau to copula parameter. Clayton at 0/180 degrees requires
/// tau in [0,1), at 90/270 degrees tau in (-1,0]; BVN and Frank accept
/// |tau| < 1. tau = 0 gives the independence parameter of every family.
/// Throws std::domain_error naming the admissible interval otherwise.
double tau_to_theta(const CopulaFamily& family, double tau);
double theta_to_tau(const BivariateCopula& c);

struct TauRange {
    double lower;
    double upper;
};
/// Open interval of Kendall's tau values attainable by the family.
TauRange admissible_tau(const CopulaFamily& family);

std::string to_string(CopulaKind kind);
std::string to_string(const CopulaFamily& family);
/// Parses "bvn", "frank", "clayton", "clayton:90", "indep", ...
CopulaFamily parse_family(const std::string& text);

}  // namespace trivine
