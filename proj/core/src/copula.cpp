#include "trivine/copula.hpp"

#include "trivine/numerics.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace trivine {

namespace {

constexpr double kClipLo = 1e-12;
constexpr double kClipHi = 1.0 - 1e-12;
constexpr double kFrankIndep = 1e-8;
constexpr double kClaytonIndep = 1e-8;

std::string fmt_range(double lo, double hi, bool lo_closed = false, bool hi_closed = false) {
    auto num = [](double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    };
    return std::string(lo_closed ? "[" : "(") + num(lo) + ", " + num(hi) +
           (hi_closed ? "]" : ")");
}

// ---------------------------------------------------------------- BVN ----

// Upper orthant probability P(X > h, Y > k) for a standard bivariate normal
// with correlation r (Drezner-Wesolowsky with Genz's refinements).
double bvn_upper(double h, double k, double r) {
    if (r == 0.0) {
        return std_normal_cdf(-h) * std_normal_cdf(-k);
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    static const QuadratureRule gl6 = gauss_legendre(6, 0.0, 2.0);
    static const QuadratureRule gl12 = gauss_legendre(12, 0.0, 2.0);
    static const QuadratureRule gl20 = gauss_legendre(20, 0.0, 2.0);
    const double ar = std::abs(r);
    const QuadratureRule& gl = ar < 0.3 ? gl6 : (ar < 0.75 ? gl12 : gl20);

    double hk = h * k;
    double bvn = 0.0;
    if (ar < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = 0.5 * std::asin(r);
        for (std::size_t i = 0; i < gl.size(); ++i) {
            const double sn = std::sin(asr * gl.nodes[i]);
            bvn += gl.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        bvn = bvn * asr / two_pi + std_normal_cdf(-h) * std_normal_cdf(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (ar < 1.0) {
            const double as = 1.0 - r * r;
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 80.0;
            double asr = -0.5 * (bs / as + hk);
            if (asr > -100.0) {
                bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
            }
            if (hk > -100.0) {
                const double b = std::sqrt(bs);
                const double sp = std::sqrt(two_pi) * std_normal_cdf(-b / a);
                bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a *= 0.5;
            double acc = 0.0;
            for (std::size_t i = 0; i < gl.size(); ++i) {
                const double xs = (a * gl.nodes[i]) * (a * gl.nodes[i]);
                asr = -0.5 * (bs / xs + hk);
                if (asr > -100.0) {
                    const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    const double rs = std::sqrt(1.0 - xs);
                    const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                    acc += gl.weights[i] * std::exp(asr) * (sp - ep);
                }
            }
            bvn = (a * acc - bvn) / two_pi;
        }
        if (r > 0.0) {
            bvn += std_normal_cdf(-std::max(h, k));
        } else if (h >= k) {
            bvn = -bvn;
        } else {
            const double l = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h) : std_normal_cdf(-h) - std_normal_cdf(-k);
            bvn = l - bvn;
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

double bvn_log_pdf(double rho, double u, double v) {
    const double x = std_normal_quantile(u);
    const double y = std_normal_quantile(v);
    const double one_m = 1.0 - rho * rho;
    return -0.5 * std::log(one_m) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m);
}

double bvn_h(double rho, double v, double u) {
    const double x = std_normal_quantile(u);
    const double y = std_normal_quantile(v);
    return std_normal_cdf((y - rho * x) / std::sqrt(1.0 - rho * rho));
}

double bvn_hinv(double rho, double p, double u) {
    const double x = std_normal_quantile(u);
    const double z = std_normal_quantile(p);
    return std_normal_cdf(rho * x + std::sqrt(1.0 - rho * rho) * z);
}

double bvn_cdf(double rho, double u, double v) {
    return bvn_upper(-std_normal_quantile(u), -std_normal_quantile(v), rho);
}

// -------------------------------------------------------------- Frank ----

double frank_log_pdf(double th, double u, double v) {
    // c_th(u,v) = c_-th(1-u,v); evaluate with th > 0 and u <= v, where the
    // denominator factors into positive terms without cancellation.
    if (th < 0.0) {
        th = -th;
        u = 1.0 - u;
    }
    if (u > v) {
        std::swap(u, v);
    }
    const double b = -std::expm1(-th * v) - std::exp(-th * (v - u)) * std::expm1(-th * (1.0 - v));
    return std::log(-th * std::expm1(-th)) - th * (v - u) - 2.0 * std::log(b);
}

double frank_h(double th, double v, double u) {
    const double em = std::expm1(-th);
    const double eu = std::expm1(-th * u);
    const double ev = std::expm1(-th * v);
    return std::exp(-th * u) * ev / (em + eu * ev);
}

double frank_hinv(double th, double p, double u) {
    const double em = std::expm1(-th);
    const double a = std::exp(-th * u);
    return -std::log1p(p * em / (p + (1.0 - p) * a)) / th;
}

double frank_cdf(double th, double u, double v) {
    const double em = std::expm1(-th);
    const double eu = std::expm1(-th * u);
    const double ev = std::expm1(-th * v);
    return -std::log1p(eu * ev / em) / th;
}

double frank_tau(double th) {
    if (th == 0.0) {
        return 0.0;
    }
    const double a = std::abs(th);
    const double tau = 1.0 - 4.0 / a + 4.0 * debye1(a) / a;
    return th < 0.0 ? -tau : tau;
}

// ------------------------------------------------------------ Clayton ----

// log(u^-th + v^-th - 1) without overflow.
double clayton_log_s(double th, double u, double v) {
    const double a = -th * std::log(u);
    const double b = -th * std::log(v);
    const double m = std::max(a, b);
    const double n = std::min(a, b);
    return m + std::log1p(std::expm1(n) * std::exp(-m));
}

double clayton_log_pdf(double th, double u, double v) {
    return std::log1p(th) - (th + 1.0) * (std::log(u) + std::log(v)) - (1.0 / th + 2.0) * clayton_log_s(th, u, v);
}

double clayton_cdf(double th, double u, double v) { return std::exp(-clayton_log_s(th, u, v) / th); }

// C(v|u) = (1 + (u/v)^th - u^th)^(-1 - 1/th)
double clayton_h(double th, double v, double u) {
    const double a = th * (std::log(u) - std::log(v));
    const double b = -std::expm1(th * std::log(u));  // 1 - u^th in (0,1)
    double log_inner = 0.0;
    if (a > 0.0) {
        log_inner = a + std::log1p(b * std::exp(-a));
    } else {
        log_inner = std::log1p(std::exp(a) - (1.0 - b));
    }
    return std::exp(-(1.0 + 1.0 / th) * log_inner);
}

// v = u * (p^(-th/(1+th)) - 1 + u^th)^(-1/th)
double clayton_hinv(double th, double p, double u) {
    const double w = std::expm1(-th / (1.0 + th) * std::log(p));
    const double ut = std::exp(th * std::log(u));
    const double v = u * std::exp(-std::log(w + ut) / th);
    return std::min(v, 1.0);
}

// ------------------------------------------------- rotation dispatch ----

enum class Base { Indep, BVN, Frank, Clayton };

Base base_of(const BivariateCopula& c) {
    switch (c.family.kind) {
        case CopulaKind::Independence:
            return Base::Indep;
        case CopulaKind::BVN:
            return c.theta == 0.0 ? Base::Indep : Base::BVN;
        case CopulaKind::Frank:
            return std::abs(c.theta) < kFrankIndep ? Base::Indep : Base::Frank;
        case CopulaKind::Clayton:
            return c.theta < kClaytonIndep ? Base::Indep : Base::Clayton;
    }
    return Base::Indep;
}

double base_log_pdf(Base b, double th, double u, double v) {
    switch (b) {
        case Base::Indep:
            return 0.0;
        case Base::BVN:
            return bvn_log_pdf(th, u, v);
        case Base::Frank:
            return frank_log_pdf(th, u, v);
        case Base::Clayton:
            return clayton_log_pdf(th, u, v);
    }
    return 0.0;
}

double base_cdf(Base b, double th, double u, double v) {
    switch (b) {
        case Base::Indep:
            return u * v;
        case Base::BVN:
            return bvn_cdf(th, u, v);
        case Base::Frank:
            return frank_cdf(th, u, v);
        case Base::Clayton:
            return clayton_cdf(th, u, v);
    }
    return u * v;
}

double base_h(Base b, double th, double v, double u) {
    switch (b) {
        case Base::Indep:
            return v;
        case Base::BVN:
            return bvn_h(th, v, u);
        case Base::Frank:
            return frank_h(th, v, u);
        case Base::Clayton:
            return clayton_h(th, v, u);
    }
    return v;
}

double base_hinv(Base b, double th, double p, double u) {
    switch (b) {
        case Base::Indep:
            return p;
        case Base::BVN:
            return bvn_hinv(th, p, u);
        case Base::Frank:
            return frank_hinv(th, p, u);
        case Base::Clayton:
            return clayton_hinv(th, p, u);
    }
    return p;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

}  // namespace

CopulaFamily make_family(CopulaKind kind, Rotation rotation) {
    if (kind != CopulaKind::Clayton && rotation != Rotation::R0) {
        throw std::invalid_argument("only Clayton copulas may be rotated");
    }
    return CopulaFamily{kind, rotation};
}

bool BivariateCopula::is_independence() const noexcept { return base_of(*this) == Base::Indep; }

void validate(const BivariateCopula& c) {
    switch (c.family.kind) {
        case CopulaKind::Independence:
            return;
        case CopulaKind::BVN:
            if (!(c.theta > -1.0 && c.theta < 1.0)) {
                throw std::domain_error("BVN parameter must lie in (-1, 1)");
            }
            return;
        case CopulaKind::Frank:
            if (!std::isfinite(c.theta)) {
                throw std::domain_error("Frank parameter must be finite");
            }
            return;
        case CopulaKind::Clayton:
            if (!(c.theta >= 0.0) || !std::isfinite(c.theta)) {
                throw std::domain_error("Clayton parameter must lie in [0, inf)");
            }
            return;
    }
}

double clip_unit(double u) noexcept {
    if (!(u >= kClipLo)) {
        return kClipLo;
    }
    return u > kClipHi ? kClipHi : u;
}

double log_pdf(const BivariateCopula& c, double u, double v) {
    u = clip_unit(u);
    v = clip_unit(v);
    const Base b = base_of(c);
    switch (c.family.rotation) {
        case Rotation::R0:
            return base_log_pdf(b, c.theta, u, v);
        case Rotation::R90:
            return base_log_pdf(b, c.theta, 1.0 - u, v);
        case Rotation::R180:
            return base_log_pdf(b, c.theta, 1.0 - u, 1.0 - v);
        case Rotation::R270:
            return base_log_pdf(b, c.theta, u, 1.0 - v);
    }
    return 0.0;
}

double pdf(const BivariateCopula& c, double u, double v) { return std::exp(log_pdf(c, u, v)); }

double cdf(const BivariateCopula& c, double u, double v) {
    u = clip_unit(u);
    v = clip_unit(v);
    const Base b = base_of(c);
    double out = 0.0;
    switch (c.family.rotation) {
        case Rotation::R0:
            out = base_cdf(b, c.theta, u, v);
            break;
        case Rotation::R90:
            out = v - base_cdf(b, c.theta, 1.0 - u, v);
            break;
        case Rotation::R180:
            out = u + v - 1.0 + base_cdf(b, c.theta, 1.0 - u, 1.0 - v);
            break;
        case Rotation::R270:
            out = u - base_cdf(b, c.theta, u, 1.0 - v);
            break;
    }
    return std::clamp(out, 0.0, std::min(u, v));
}

double hfunc(const BivariateCopula& c, double v, double u) {
    u = clip_unit(u);
    v = clip_unit(v);
    const Base b = base_of(c);
    double out = 0.0;
    switch (c.family.rotation) {
        case Rotation::R0:
            out = base_h(b, c.theta, v, u);
            break;
        case Rotation::R90:
            out = base_h(b, c.theta, v, 1.0 - u);
            break;
        case Rotation::R180:
            out = 1.0 - base_h(b, c.theta, 1.0 - v, 1.0 - u);
            break;
        case Rotation::R270:
            out = 1.0 - base_h(b, c.theta, 1.0 - v, u);
            break;
    }
    return std::clamp(out, 0.0, 1.0);
}

double hinv(const BivariateCopula& c, double p, double u) {
    u = clip_unit(u);
    p = clip_unit(p);
    const Base b = base_of(c);
    double out = 0.0;
    switch (c.family.rotation) {
        case Rotation::R0:
            out = base_hinv(b, c.theta, p, u);
            break;
        case Rotation::R90:
            out = base_hinv(b, c.theta, p, 1.0 - u);
            break;
        case Rotation::R180:
            out = 1.0 - base_hinv(b, c.theta, 1.0 - p, 1.0 - u);
            break;
        case Rotation::R270:
            out = 1.0 - base_hinv(b, c.theta, 1.0 - p, u);
            break;
    }
    return clip_unit(out);
}

BivariateCopula transpose(const BivariateCopula& c) {
    // All base families are exchangeable; only 90 <-> 270 changes.
    BivariateCopula t = c;
    if (c.family.rotation == Rotation::R90) {
        t.family.rotation = Rotation::R270;
    } else if (c.family.rotation == Rotation::R270) {
        t.family.rotation = Rotation::R90;
    }
    return t;
}

TauRange admissible_tau(const CopulaFamily& family) {
    switch (family.kind) {
        case CopulaKind::Independence:
            return {0.0, 0.0};
        case CopulaKind::BVN:
        case CopulaKind::Frank:
            return {-1.0, 1.0};
        case CopulaKind::Clayton:
            if (family.rotation == Rotation::R0 || family.rotation == Rotation::R180) {
                return {0.0, 1.0};
            }
            return {-1.0, 0.0};
    }
    return {0.0, 0.0};
}

double tau_to_theta(const CopulaFamily& family, double tau) {
    if (!std::isfinite(tau)) {
        throw std::domain_error("Kendall's tau must be finite");
    }
    switch (family.kind) {
        case CopulaKind::Independence:
            if (tau != 0.0) {
                throw std::domain_error("independence copula admits only tau = 0");
            }
            return 0.0;
        case CopulaKind::BVN:
            if (!(std::abs(tau) < 1.0)) {
                throw std::domain_error("BVN tau must lie in " + fmt_range(-1, 1));
            }
            return std::sin(std::numbers::pi * tau / 2.0);
        case CopulaKind::Frank: {
            if (!(std::abs(tau) < 1.0)) {
                throw std::domain_error("Frank tau must lie in " + fmt_range(-1, 1));
            }
            if (tau == 0.0) {
                return 0.0;
            }
            const double target = std::abs(tau);
            double hi = 1.0;
            while (frank_tau(hi) < target && hi < 1e6) {
                hi *= 2.0;
            }
            const double lo = 0.0;
            auto fn = [target](double th) { return frank_tau(th) - target; };
            std::uintmax_t max_iter = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, -target, frank_tau(hi) - target,
                                                                  boost::math::tools::eps_tolerance<double>(52),
                                                                  max_iter);
            const double th = 0.5 * (a + b);
            return tau < 0.0 ? -th : th;
        }
        case CopulaKind::Clayton: {
            const bool positive = family.rotation == Rotation::R0 || family.rotation == Rotation::R180;
            if (positive && !(tau >= 0.0 && tau < 1.0)) {
                throw std::domain_error("Clayton " + std::to_string(static_cast<int>(family.rotation)) +
                                        " deg tau must lie in " + fmt_range(0, 1, true));
            }
            if (!positive && !(tau > -1.0 && tau <= 0.0)) {
                throw std::domain_error("Clayton " + std::to_string(static_cast<int>(family.rotation)) +
                                        " deg tau must lie in " + fmt_range(-1, 0, false, true));
            }
            const double a = std::abs(tau);
            return 2.0 * a / (1.0 - a);
        }
    }
    return 0.0;
}

double theta_to_tau(const BivariateCopula& c) {
    switch (c.family.kind) {
        case CopulaKind::Independence:
            return 0.0;
        case CopulaKind::BVN:
            return 2.0 / std::numbers::pi * std::asin(c.theta);
        case CopulaKind::Frank:
            return frank_tau(c.theta);
        case CopulaKind::Clayton: {
            const double tau = c.theta / (c.theta + 2.0);
            return (c.family.rotation == Rotation::R90 || c.family.rotation == Rotation::R270) ? -tau : tau;
        }
    }
    return 0.0;
}

std::string to_string(CopulaKind kind) {
    switch (kind) {
        case CopulaKind::Independence:
            return "indep";
        case CopulaKind::BVN:
            return "bvn";
        case CopulaKind::Frank:
            return "frank";
        case CopulaKind::Clayton:
            return "clayton";
    }
    return "?";
}

std::string to_string(const CopulaFamily& family) {
    std::string s = to_string(family.kind);
    if (family.kind == CopulaKind::Clayton) {
        s += ":" + std::to_string(static_cast<int>(family.rotation));
    }
    return s;
}

CopulaFamily parse_family(const std::string& text) {
    const std::string t = lower(text);
    std::string name = t;
    std::string rot;
    if (const auto pos = t.find(':'); pos != std::string::npos) {
        name = t.substr(0, pos);
        rot = t.substr(pos + 1);
    } else if (t.rfind("clayton", 0) == 0 && t.size() > 7) {
        name = "clayton";
        rot = t.substr(7);
    } else if (t.rfind("cln", 0) == 0 && t.size() > 3) {
        name = "clayton";
        rot = t.substr(3);
    }
    CopulaKind kind{};
    if (name == "bvn" || name == "normal" || name == "gaussian") {
        kind = CopulaKind::BVN;
    } else if (name == "frank") {
        kind = CopulaKind::Frank;
    } else if (name == "clayton" || name == "cln") {
        kind = CopulaKind::Clayton;
    } else if (name == "indep" || name == "independence" || name == "i") {
        kind = CopulaKind::Independence;
    } else {
        throw std::invalid_argument("unknown copula family '" + text +
                                    "' (expected bvn, frank, clayton[:0|90|180|270], indep)");
    }
    Rotation rotation = Rotation::R0;
    if (!rot.empty()) {
        if (rot == "0") {
            rotation = Rotation::R0;
        } else if (rot == "90") {
            rotation = Rotation::R90;
        } else if (rot == "180") {
            rotation = Rotation::R180;
        } else if (rot == "270") {
            rotation = Rotation::R270;
        } else {
            throw std::invalid_argument("invalid rotation '" + rot + "' in '" + text + "' (expected 0, 90, 180, 270)");
        }
    }
    return make_family(kind, rotation);
}

}  // namespace trivine
