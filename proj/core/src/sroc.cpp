#include "trivine/sroc.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace trivine {

namespace {

double logit(double p) { return std::log(p) - std::log1p(-p); }

// Inverse of a conditional cdf that is nondecreasing on (0,1).
template <class Cdf>
double invert_cdf(Cdf&& cdf, double p) {
    p = clip_unit(p);
    auto fn = [&](double x) { return cdf(x) - p; };
    double lo = 1e-12;
    double hi = 1.0 - 1e-12;
    const double flo = fn(lo);
    const double fhi = fn(hi);
    if (flo >= 0.0) {
        return lo;
    }
    if (fhi <= 0.0) {
        return hi;
    }
    std::uintmax_t iters = 200;
    try {
        const auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi,
                                                              boost::math::tools::eps_tolerance<double>(48), iters);
        return 0.5 * (a + b);
    } catch (const std::exception&) {
        // bisection always terminates
        double fl = flo;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = fn(mid);
            if ((fm < 0.0) == (fl < 0.0)) {
                lo = mid;
                fl = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }
}

double to_axis(AxisScale s, double p) {
    if (s == AxisScale::Original) {
        return p;
    }
    return logit(std::clamp(p, 1e-15, 1.0 - 1e-15));
}

}  // namespace

PairCopula12::PairCopula12(const VineSpec& vine, std::size_t per_piece)
    : vine_(vine), rule_(graded_legendre_01(per_piece)) {
    switch (vine.permutation) {
        case VinePermutation::P12_13_23g1:
            explicit_ = vine.edge_a;
            break;
        case VinePermutation::P12_23_13g2:
            explicit_ = transpose(vine.edge_a);
            break;
        case VinePermutation::P13_23_12g3:
            break;
    }
}

// Root 3, first leaf 1, second leaf 2: edge_a = C(u3,u1), edge_b = C(u3,u2),
// edge_cond = C(F(1|3), F(2|3)). The third coordinate is integrated out by
// drawing u3 from its conditional law given the conditioning variable.
double PairCopula12::pdf(double u1, double u2) const {
    if (explicit_) {
        return trivine::pdf(*explicit_, u1, u2);
    }
    const BivariateCopula a_t = transpose(vine_.edge_a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule_.size(); ++i) {
        const double u3 = hinv(a_t, rule_.nodes[i], u1);
        const double f1 = hfunc(vine_.edge_a, u1, u3);
        const double f2 = hfunc(vine_.edge_b, u2, u3);
        sum += rule_.weights[i] * trivine::pdf(vine_.edge_b, u3, u2) * trivine::pdf(vine_.edge_cond, f1, f2);
    }
    return sum;
}

double PairCopula12::cond_2_given_1(double u2, double u1) const {
    if (explicit_) {
        return hfunc(*explicit_, u2, u1);
    }
    const BivariateCopula a_t = transpose(vine_.edge_a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule_.size(); ++i) {
        const double u3 = hinv(a_t, rule_.nodes[i], u1);
        const double f1 = hfunc(vine_.edge_a, u1, u3);
        const double f2 = hfunc(vine_.edge_b, u2, u3);
        sum += rule_.weights[i] * hfunc(vine_.edge_cond, f2, f1);
    }
    return std::clamp(sum, 0.0, 1.0);
}

double PairCopula12::cond_1_given_2(double u1, double u2) const {
    if (explicit_) {
        return hfunc(transpose(*explicit_), u1, u2);
    }
    const BivariateCopula b_t = transpose(vine_.edge_b);
    const BivariateCopula c_t = transpose(vine_.edge_cond);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule_.size(); ++i) {
        const double u3 = hinv(b_t, rule_.nodes[i], u2);
        const double f1 = hfunc(vine_.edge_a, u1, u3);
        const double f2 = hfunc(vine_.edge_b, u2, u3);
        sum += rule_.weights[i] * hfunc(c_t, f1, f2);
    }
    return std::clamp(sum, 0.0, 1.0);
}

double PairCopula12::inv_2_given_1(double p, double u1) const {
    if (explicit_) {
        return hinv(*explicit_, p, u1);
    }
    return invert_cdf([&](double u2) { return cond_2_given_1(u2, u1); }, p);
}

double PairCopula12::inv_1_given_2(double p, double u2) const {
    if (explicit_) {
        return hinv(transpose(*explicit_), p, u2);
    }
    return invert_cdf([&](double u1) { return cond_1_given_2(u1, u2); }, p);
}

CurveSet quantile_curve(const ModelSpec& model, double q, CurveDirection direction, AxisScale scale,
                        std::size_t n_points) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("quantile_curve: q must lie in (0,1)");
    }
    if (n_points < 2) {
        throw std::invalid_argument("quantile_curve: need at least two points");
    }
    const PairCopula12 pair(model.vine);
    CurveSet out;
    out.direction = direction;
    out.quantile = q;
    out.scale = scale;
    out.points.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double u = 0.01 + 0.98 * static_cast<double>(i) / static_cast<double>(n_points - 1);
        CurvePoint pt{};
        if (direction == CurveDirection::X1OnX2) {
            pt.spec = margin_quantile(model.margins[1], u);
            pt.sens = margin_quantile(model.margins[0], pair.inv_1_given_2(q, u));
        } else {
            pt.sens = margin_quantile(model.margins[0], u);
            pt.spec = margin_quantile(model.margins[1], pair.inv_2_given_1(q, u));
        }
        if (scale == AxisScale::Link) {
            pt.spec = link_apply(model.margins[1].link, std::clamp(pt.spec, 1e-15, 1.0 - 1e-15));
            pt.sens = link_apply(model.margins[0].link, std::clamp(pt.sens, 1e-15, 1.0 - 1e-15));
        } else {
            pt.spec = to_axis(scale, pt.spec);
            pt.sens = to_axis(scale, pt.sens);
        }
        out.points.push_back(pt);
    }
    return out;
}

CurveSet quantile_curve(const FitResult& fit, double q, CurveDirection direction, AxisScale scale,
                        std::size_t n_points) {
    return quantile_curve(fit.model, q, direction, scale, n_points);
}

std::pair<double, double> summary_point(const FitResult& fit) { return {fit.estimates.pi[0], fit.estimates.pi[1]}; }

DensityGrid density_contours(const ModelSpec& model, std::size_t grid_size, std::vector<double> level_fractions,
                             double tail) {
    if (grid_size < 2) {
        throw std::invalid_argument("density_contours: grid_size must be >= 2");
    }
    const MarginSpec& m1 = model.margins[0];
    const MarginSpec& m2 = model.margins[1];
    DensityGrid g;
    if (m1.family == MarginFamily::Normal) {
        g.scale = m1.link == Link::Logit ? AxisScale::Logit : AxisScale::Link;
    }
    auto axis = [&](const MarginSpec& m) {
        const double lo = latent_quantile(m, tail);
        const double hi = latent_quantile(m, 1.0 - tail);
        std::vector<double> a(grid_size);
        for (std::size_t i = 0; i < grid_size; ++i) {
            a[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_size - 1);
        }
        return a;
    };
    g.sens_axis = axis(m1);
    g.spec_axis = axis(m2);
    const PairCopula12 pair(model.vine);

    std::vector<double> f2(grid_size);
    std::vector<double> c2(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) {
        f2[j] = latent_density(m2, g.spec_axis[j]);
        c2[j] = latent_cdf(m2, g.spec_axis[j]);
    }
    g.density.resize(grid_size * grid_size);
    double peak = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double f1 = latent_density(m1, g.sens_axis[i]);
        const double c1 = latent_cdf(m1, g.sens_axis[i]);
        for (std::size_t j = 0; j < grid_size; ++j) {
            const double d = f1 * f2[j] * pair.pdf(c1, c2[j]);
            g.density[i * grid_size + j] = std::isfinite(d) ? d : 0.0;
            peak = std::max(peak, g.density[i * grid_size + j]);
        }
    }
    g.level_fractions = std::move(level_fractions);
    for (double f : g.level_fractions) {
        g.levels.push_back(f * peak);
    }
    return g;
}

DensityGrid density_contours(const FitResult& fit, std::size_t grid_size, std::vector<double> level_fractions,
                             double tail) {
    return density_contours(fit.model, grid_size, std::move(level_fractions), tail);
}

double grid_mass(const DensityGrid& g, double min_level) {
    const std::size_t ns = g.sens_axis.size();
    const std::size_t nx = g.spec_axis.size();
    auto weight = [](const std::vector<double>& axis, std::size_t i) {
        const std::size_t n = axis.size();
        const double left = i > 0 ? axis[i] - axis[i - 1] : 0.0;
        const double right = i + 1 < n ? axis[i + 1] - axis[i] : 0.0;
        return 0.5 * (left + right);
    };
    double mass = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        const double wi = weight(g.sens_axis, i);
        for (std::size_t j = 0; j < nx; ++j) {
            const double d = g.at(i, j);
            if (d >= min_level) {
                mass += wi * weight(g.spec_axis, j) * d;
            }
        }
    }
    return mass;
}

std::vector<Segment> contour_segments(const DensityGrid& g, double level) {
    std::vector<Segment> out;
    const std::size_t ns = g.sens_axis.size();
    const std::size_t nx = g.spec_axis.size();
    auto interp = [level](double x0, double v0, double x1, double v1) {
        const double t = (v1 == v0) ? 0.5 : (level - v0) / (v1 - v0);
        return x0 + t * (x1 - x0);
    };
    for (std::size_t i = 0; i + 1 < ns; ++i) {
        for (std::size_t j = 0; j + 1 < nx; ++j) {
            const double x0 = g.spec_axis[j];
            const double x1 = g.spec_axis[j + 1];
            const double y0 = g.sens_axis[i];
            const double y1 = g.sens_axis[i + 1];
            const double a = g.at(i, j);          // (x0, y0)
            const double b = g.at(i, j + 1);      // (x1, y0)
            const double c = g.at(i + 1, j + 1);  // (x1, y1)
            const double d = g.at(i + 1, j);      // (x0, y1)
            // Edge crossing points in order: bottom, right, top, left.
            std::vector<std::pair<double, double>> pts;
            if ((a >= level) != (b >= level)) {
                pts.emplace_back(interp(x0, a, x1, b), y0);
            }
            if ((b >= level) != (c >= level)) {
                pts.emplace_back(x1, interp(y0, b, y1, c));
            }
            if ((c >= level) != (d >= level)) {
                pts.emplace_back(interp(x1, c, x0, d), y1);
            }
            if ((d >= level) != (a >= level)) {
                pts.emplace_back(x0, interp(y1, d, y0, a));
            }
            for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
                out.push_back({pts[k].first, pts[k].second, pts[k + 1].first, pts[k + 1].second});
            }
        }
    }
    return out;
}

std::string to_string(CurveDirection d) { return d == CurveDirection::X1OnX2 ? "x1_on_x2" : "x2_on_x1"; }

std::string to_string(AxisScale s) {
    switch (s) {
        case AxisScale::Original:
            return "original";
        case AxisScale::Logit:
            return "logit";
        case AxisScale::Link:
            return "link";
    }
    return "?";
}

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_curves_csv(std::ostream& os, std::span<const CurveSet> curves) {
    os << "direction,quantile,scale,index,specificity,sensitivity\n";
    for (const CurveSet& c : curves) {
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            os << to_string(c.direction) << ',' << num(c.quantile) << ',' << to_string(c.scale) << ',' << i << ','
               << num(c.points[i].spec) << ',' << num(c.points[i].sens) << '\n';
        }
    }
}

void write_grid_csv(std::ostream& os, const DensityGrid& g) {
    os << "# scale=" << to_string(g.scale) << " levels=";
    for (std::size_t k = 0; k < g.levels.size(); ++k) {
        os << (k ? ";" : "") << num(g.level_fractions[k]) << ':' << num(g.levels[k]);
    }
    os << '\n';
    os << "specificity,sensitivity,density\n";
    for (std::size_t i = 0; i < g.sens_axis.size(); ++i) {
        for (std::size_t j = 0; j < g.spec_axis.size(); ++j) {
            os << num(g.spec_axis[j]) << ',' << num(g.sens_axis[i]) << ',' << num(g.at(i, j)) << '\n';
        }
    }
}

void write_sroc_svg(std::ostream& os, const FitResult& fit, std::span<const StudyData> data,
                    std::span<const CurveSet> curves, const DensityGrid& grid) {
    const AxisScale scale = grid.scale;
    const Link link = fit.model.margins[0].link;
    auto ax = [&](double p) {
        if (scale == AxisScale::Link) {
            return link_apply(link, std::clamp(p, 1e-15, 1.0 - 1e-15));
        }
        return to_axis(scale, p);
    };
    double xmin = grid.spec_axis.front();
    double xmax = grid.spec_axis.back();
    double ymin = grid.sens_axis.front();
    double ymax = grid.sens_axis.back();
    if (scale == AxisScale::Original) {
        xmin = std::min(xmin, 0.0);
        ymin = std::min(ymin, 0.0);
        xmax = std::max(xmax, 1.0);
        ymax = std::max(ymax, 1.0);
    }
    constexpr double width = 640.0;
    constexpr double height = 640.0;
    constexpr double margin = 60.0;
    auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin); };
    auto clampx = [&](double x) { return std::clamp(x, xmin, xmax); };
    auto clampy = [&](double y) { return std::clamp(y, ymin, ymax); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<title>SROC " << display_label(fit.model_template) << " (" << to_string(fit.model_template.margin)
       << " margins)</title>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin << "\" height=\""
       << height - 2 * margin << "\" fill=\"white\" stroke=\"black\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">Specificity"
       << (scale == AxisScale::Original ? "" : " (" + to_string(link) + ")") << "</text>\n";
    os << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
       << ")\" text-anchor=\"middle\">Sensitivity" << (scale == AxisScale::Original ? "" : " (" + to_string(link) + ")") << "</text>\n";

    os << "<g class=\"contours\" stroke=\"#888888\" stroke-width=\"1\" fill=\"none\">\n";
    for (double level : grid.levels) {
        os << "<path class=\"contour\" d=\"";
        for (const Segment& s : contour_segments(grid, level)) {
            os << 'M' << num(sx(s.x0)) << ' ' << num(sy(s.y0)) << 'L' << num(sx(s.x1)) << ' ' << num(sy(s.y1));
        }
        os << "\"/>\n";
    }
    os << "</g>\n";

    auto polyline = [&](const CurveSet& c, const char* cls, const char* color, const char* dash) {
        os << "<polyline class=\"" << cls << "\" data-direction=\"" << to_string(c.direction) << "\" data-q=\""
           << num(c.quantile) << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash
           << " points=\"";
        // Curves stored on the proportion scale are mapped to the plot scale.
        const bool convert = c.scale == AxisScale::Original && scale != AxisScale::Original;
        for (const CurvePoint& p : c.points) {
            const double x = convert ? ax(p.spec) : p.spec;
            const double y = convert ? ax(p.sens) : p.sens;
            os << num(sx(clampx(x))) << ',' << num(sy(clampy(y))) << ' ';
        }
        os << "\"/>\n";
    };
    for (CurveDirection dir : {CurveDirection::X1OnX2, CurveDirection::X2OnX1}) {
        const char* color = dir == CurveDirection::X1OnX2 ? "red" : "green";
        os << "<g class=\"quantile-band\" data-direction=\"" << to_string(dir) << "\">\n";
        for (const CurveSet& c : curves) {
            if (c.direction == dir && c.quantile != 0.5) {
                polyline(c, "band-curve", color, " stroke-dasharray=\"4 3\"");
            }
        }
        os << "</g>\n";
        for (const CurveSet& c : curves) {
            if (c.direction == dir && c.quantile == 0.5) {
                polyline(c, "median", color, "");
            }
        }
    }

    os << "<g class=\"studies\" fill=\"none\" stroke=\"black\">\n";
    for (const StudyData& s : data) {
        const double n1 = static_cast<double>(s.diseased_evaluable());
        const double n0 = static_cast<double>(s.healthy_evaluable());
        if (n1 <= 0 || n0 <= 0) {
            continue;
        }
        const double sens = static_cast<double>(s.y11) / n1;
        const double spec = static_cast<double>(s.y00) / n0;
        os << "<circle class=\"study\" cx=\"" << num(sx(clampx(ax(spec)))) << "\" cy=\""
           << num(sy(clampy(ax(sens)))) << "\" r=\"4\"/>\n";
    }
    os << "</g>\n";

    const auto [sens, spec] = summary_point(fit);
    os << "<rect class=\"summary-point\" x=\"" << num(sx(ax(spec)) - 5) << "\" y=\""
       << num(sy(ax(sens)) - 5) << "\" width=\"10\" height=\"10\" fill=\"black\"/>\n";
    os << "</svg>\n";
}

}  // namespace trivine
