#include "trivine/margin.hpp"

#include "trivine/copula.hpp"
#include "trivine/numerics.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trivine {

namespace {

using fast_policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

// log(1 + e^x)
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double clamp_open(double t) {
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(t, lo, hi);
}

void require_open(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error(std::string(what) + ": probability must lie in (0,1), got " + std::to_string(p));
    }
}

double link_derivative(Link l, double t) {
    switch (l) {
        case Link::Logit:
            return 1.0 / (t * (1.0 - t));
        case Link::Probit:
            return 1.0 / std_normal_pdf(std_normal_quantile(t));
        case Link::Cloglog:
            return -1.0 / ((1.0 - t) * std::log1p(-t));
        case Link::Identity:
            return 1.0;
    }
    return 1.0;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

}  // namespace

double link_apply(Link l, double p) {
    require_open(p, "link_apply");
    switch (l) {
        case Link::Logit:
            return std::log(p) - std::log1p(-p);
        case Link::Probit:
            return std_normal_quantile(p);
        case Link::Cloglog:
            return std::log(-std::log1p(-p));
        case Link::Identity:
            return p;
    }
    return p;
}

double link_inverse(Link l, double x) {
    switch (l) {
        case Link::Logit:
            return 1.0 / (1.0 + std::exp(-x));
        case Link::Probit:
            return std_normal_cdf(x);
        case Link::Cloglog:
            return -std::expm1(-std::exp(x));
        case Link::Identity:
            return x;
    }
    return x;
}

LogProbPair link_inverse_log(Link l, double x) {
    switch (l) {
        case Link::Logit:
            return {-softplus(-x), -softplus(x)};
        case Link::Probit:
            return {std::log(std_normal_cdf(x)), std::log(std_normal_cdf(-x))};
        case Link::Cloglog: {
            const double ex = std::exp(x);
            return {std::log(-std::expm1(-ex)), -ex};
        }
        case Link::Identity:
            return {std::log(x), std::log1p(-x)};
    }
    return {0.0, 0.0};
}

void validate(const MarginSpec& m) {
    if (!(m.pi > 0.0 && m.pi < 1.0)) {
        throw std::domain_error("margin pi must lie in (0,1), got " + std::to_string(m.pi));
    }
    if (m.family == MarginFamily::Normal) {
        if (!(m.delta > 0.0) || !std::isfinite(m.delta)) {
            throw std::domain_error("normal margin sigma must be positive, got " + std::to_string(m.delta));
        }
        if (m.link == Link::Identity) {
            throw std::invalid_argument("normal margin requires a logit, probit or cloglog link");
        }
    } else {
        if (!(m.delta > 0.0 && m.delta < 1.0)) {
            throw std::domain_error("beta margin gamma must lie in (0,1), got " + std::to_string(m.delta));
        }
        if (m.link != Link::Identity) {
            throw std::invalid_argument("beta margin requires the identity link");
        }
    }
}

BetaShapes beta_shapes(double pi, double gamma) {
    const double scale = (1.0 - gamma) / gamma;
    return {pi * scale, (1.0 - pi) * scale};
}

double margin_quantile(const MarginSpec& m, double u) {
    u = clip_unit(u);
    if (m.family == MarginFamily::Normal) {
        return clamp_open(link_inverse(m.link, link_apply(m.link, m.pi) + m.delta * std_normal_quantile(u)));
    }
    const auto [a, b] = beta_shapes(m.pi, m.delta);
    return clamp_open(boost::math::ibeta_inv(a, b, u, fast_policy()));
}

LogProbPair margin_log_quantile(const MarginSpec& m, double u) {
    u = clip_unit(u);
    if (m.family == MarginFamily::Normal) {
        return link_inverse_log(m.link, link_apply(m.link, m.pi) + m.delta * std_normal_quantile(u));
    }
    const auto [a, b] = beta_shapes(m.pi, m.delta);
    double q = 0.0;
    const double t = boost::math::ibeta_inv(a, b, u, &q, fast_policy());
    return {std::log(t), std::log(q)};
}

double margin_cdf(const MarginSpec& m, double t) {
    require_open(t, "margin_cdf");
    if (m.family == MarginFamily::Normal) {
        return std_normal_cdf((link_apply(m.link, t) - link_apply(m.link, m.pi)) / m.delta);
    }
    const auto [a, b] = beta_shapes(m.pi, m.delta);
    return boost::math::ibeta(a, b, t, fast_policy());
}

double margin_density(const MarginSpec& m, double t) {
    require_open(t, "margin_density");
    if (m.family == MarginFamily::Normal) {
        const double z = (link_apply(m.link, t) - link_apply(m.link, m.pi)) / m.delta;
        return std_normal_pdf(z) / m.delta * link_derivative(m.link, t);
    }
    const auto [a, b] = beta_shapes(m.pi, m.delta);
    return boost::math::ibeta_derivative(a, b, t, fast_policy());
}

double latent_from_prob(const MarginSpec& m, double t) {
    return m.family == MarginFamily::Normal ? link_apply(m.link, t) : t;
}

double prob_from_latent(const MarginSpec& m, double x) {
    return m.family == MarginFamily::Normal ? link_inverse(m.link, x) : x;
}

double latent_quantile(const MarginSpec& m, double u) {
    if (m.family == MarginFamily::Normal) {
        return link_apply(m.link, m.pi) + m.delta * std_normal_quantile(clip_unit(u));
    }
    return margin_quantile(m, u);
}

double latent_cdf(const MarginSpec& m, double x) {
    if (m.family == MarginFamily::Normal) {
        return std_normal_cdf((x - link_apply(m.link, m.pi)) / m.delta);
    }
    return margin_cdf(m, x);
}

double latent_density(const MarginSpec& m, double x) {
    if (m.family == MarginFamily::Normal) {
        return std_normal_pdf((x - link_apply(m.link, m.pi)) / m.delta) / m.delta;
    }
    return margin_density(m, x);
}

std::string to_string(Link l) {
    switch (l) {
        case Link::Logit:
            return "logit";
        case Link::Probit:
            return "probit";
        case Link::Cloglog:
            return "cloglog";
        case Link::Identity:
            return "identity";
    }
    return "?";
}

std::string to_string(MarginFamily f) { return f == MarginFamily::Normal ? "normal" : "beta"; }

Link parse_link(const std::string& text) {
    const std::string t = lower(text);
    if (t == "logit") {
        return Link::Logit;
    }
    if (t == "probit") {
        return Link::Probit;
    }
    if (t == "cloglog") {
        return Link::Cloglog;
    }
    if (t == "identity") {
        return Link::Identity;
    }
    throw std::invalid_argument("unknown link '" + text + "' (expected logit, probit, cloglog, identity)");
}

MarginFamily parse_margin_family(const std::string& text) {
    const std::string t = lower(text);
    if (t == "normal") {
        return MarginFamily::Normal;
    }
    if (t == "beta") {
        return MarginFamily::Beta;
    }
    throw std::invalid_argument("unknown margin family '" + text + "' (expected normal, beta)");
}

}  // namespace trivine
