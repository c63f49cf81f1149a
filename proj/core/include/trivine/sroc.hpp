#pragma once

#include "trivine/estimation.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace trivine {

/// Copula of (sensitivity, specificity) implied by a trivariate vine. When
/// (1,2) is a vine edge it is used directly; otherwise the bivariate margin
/// is obtained by integrating the third coordinate out with a
/// Gauss-Legendre rule.
class PairCopula12 {
public:
    /// `per_piece` sets the graded rule used when the pair must be integrated.
    explicit PairCopula12(const VineSpec& vine, std::size_t per_piece = 8);

    bool is_explicit() const noexcept { return explicit_.has_value(); }

    double pdf(double u1, double u2) const;
    /// C(u1 | u2) and C(u2 | u1).
    double cond_1_given_2(double u1, double u2) const;
    double cond_2_given_1(double u2, double u1) const;
    double inv_1_given_2(double p, double u2) const;
    double inv_2_given_1(double p, double u1) const;

private:
    VineSpec vine_;
    std::optional<BivariateCopula> explicit_;  // oriented as C(u1, u2)
    QuadratureRule rule_;
};

enum class CurveDirection { X1OnX2, X2OnX1 };
/// Original: proportions. Logit: logit of proportions. Link: the normal
/// margin's link scale (used by density grids for probit/cloglog links).
enum class AxisScale { Original, Logit, Link };

struct CurvePoint {
    double spec;
    double sens;
};

struct CurveSet {
    CurveDirection direction = CurveDirection::X1OnX2;
    double quantile = 0.5;
    AxisScale scale = AxisScale::Original;
    std::vector<CurvePoint> points;
};

/// Quantile regression curve. For X1OnX2 the abscissa runs over
/// specificity quantiles u2 in [0.01, 0.99] and the sensitivity coordinate
/// is F1^{-1}(C^{-1}(q | u2)); X2OnX1 swaps the roles. Throws
/// std::domain_error unless 0 < q < 1.
CurveSet quantile_curve(const ModelSpec& model, double q, CurveDirection direction,
                        AxisScale scale = AxisScale::Original, std::size_t n_points = 99);
CurveSet quantile_curve(const FitResult& fit, double q, CurveDirection direction,
                        AxisScale scale = AxisScale::Original, std::size_t n_points = 99);

/// (sensitivity, specificity) at the estimated pi1, pi2.
std::pair<double, double> summary_point(const FitResult& fit);

/// Joint density of (X1, X2) on a regular grid. Normal margins are laid
/// out on the link scale, beta margins on the proportion scale.
struct DensityGrid {
    std::vector<double> spec_axis;     // x2, strictly increasing
    std::vector<double> sens_axis;     // x1, strictly increasing
    std::vector<double> density;       // row-major [sens][spec]
    std::vector<double> levels;        // absolute density levels
    std::vector<double> level_fractions;
    AxisScale scale = AxisScale::Original;

    double at(std::size_t i_sens, std::size_t j_spec) const { return density[i_sens * spec_axis.size() + j_spec]; }
};

/// Throws std::invalid_argument for grid_size < 2. Each axis covers the
/// margin's [tail, 1 - tail] quantile range.
DensityGrid density_contours(const ModelSpec& model, std::size_t grid_size = 101,
                             std::vector<double> level_fractions = {0.5, 0.25, 0.1, 0.01}, double tail = 5e-5);
DensityGrid density_contours(const FitResult& fit, std::size_t grid_size = 101,
                             std::vector<double> level_fractions = {0.5, 0.25, 0.1, 0.01}, double tail = 5e-5);

/// Trapezoidal mass of the grid, optionally restricted to cells whose
/// density is at least `min_level`.
double grid_mass(const DensityGrid& g, double min_level = 0.0);

struct Segment {
    double x0, y0, x1, y1;
};
/// Marching-squares line segments of the level set {density = level}.
std::vector<Segment> contour_segments(const DensityGrid& g, double level);

void write_curves_csv(std::ostream& os, std::span<const CurveSet> curves);
void write_grid_csv(std::ostream& os, const DensityGrid& g);

/// Static SVG: contours, median and quantile-band curves, summary point and
/// the observed (specificity, sensitivity) proportions of each study.
void write_sroc_svg(std::ostream& os, const FitResult& fit, std::span<const StudyData> data,
                    std::span<const CurveSet> curves, const DensityGrid& grid);

std::string to_string(CurveDirection d);
std::string to_string(AxisScale s);

}  // namespace trivine
