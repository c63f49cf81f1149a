#pragma once

#include <string>

namespace trivine {

enum class Link { Logit, Probit, Cloglog, Identity };

double link_apply(Link l, double p);
double link_inverse(Link l, double x);
/// log(l^{-1}(x)) and log(1 - l^{-1}(x)), accurate in both tails.
struct LogProbPair {
    double log_p;
    double log_q;
};
LogProbPair link_inverse_log(Link l, double x);

enum class MarginFamily { Normal, Beta };

/// Random-effect margin. Normal: X ~ N(l(pi), sigma) on the link scale,
/// delta = sigma > 0, link in {logit, probit, cloglog}. Beta: the latent
/// proportion is Beta with mean pi and dispersion delta = gamma in (0,1),
/// shape parameters alpha = pi(1-gamma)/gamma and beta = (1-pi)(1-gamma)/gamma,
/// link = identity.
struct MarginSpec {
    MarginFamily family = MarginFamily::Normal;
    double pi = 0.5;
    double delta = 1.0;
    Link link = Link::Logit;
};

/// Throws std::invalid_argument / std::domain_error on an invalid spec.
void validate(const MarginSpec& m);

struct BetaShapes {
    double alpha;
    double beta;
};
BetaShapes beta_shapes(double pi, double gamma);

/// Latent proportion at margin quantile u (clipped like copula inputs).
double margin_quantile(const MarginSpec& m, double u);
/// Same, returned as log(t) and log(1 - t).
LogProbPair margin_log_quantile(const MarginSpec& m, double u);

/// cdf and density of the latent proportion t in (0,1).
double margin_cdf(const MarginSpec& m, double t);
double margin_density(const MarginSpec& m, double t);

/// Latent scale: the link scale for normal margins, the proportion scale
/// for beta margins.
double latent_from_prob(const MarginSpec& m, double t);
double prob_from_latent(const MarginSpec& m, double x);
double latent_quantile(const MarginSpec& m, double u);
double latent_cdf(const MarginSpec& m, double x);
double latent_density(const MarginSpec& m, double x);

std::string to_string(Link l);
std::string to_string(MarginFamily f);
Link parse_link(const std::string& text);
MarginFamily parse_margin_family(const std::string& text);

}  // namespace trivine
