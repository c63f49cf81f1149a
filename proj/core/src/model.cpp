#include "trivine/model.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trivine {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Stand-in for log(0) on the grid so that 0 * log(0) evaluates to 0.
constexpr double kLogFloor = -1e100;
constexpr double kDegenerate = -1e90;

double log_choose(long n, long k) {
    if (k == 0 || k == n) {
        return 0.0;
    }
    return boost::math::lgamma(static_cast<double>(n) + 1.0) - boost::math::lgamma(static_cast<double>(k) + 1.0) -
           boost::math::lgamma(static_cast<double>(n - k) + 1.0);
}

double floor_log(double x) { return std::isfinite(x) ? x : (x > 0.0 ? x : kLogFloor); }

}  // namespace

void validate(const StudyData& s) {
    if (s.y00 < 0 || s.y01 < 0 || s.y10 < 0 || s.y11 < 0 || s.y20 < 0 || s.y21 < 0) {
        throw std::invalid_argument("study '" + s.id + "': counts must be nonnegative");
    }
    if (s.total() <= 0) {
        throw std::invalid_argument("study '" + s.id + "': total count must be positive");
    }
}

void validate(const ModelSpec& m) {
    for (const MarginSpec& mg : m.margins) {
        validate(mg);
    }
    if (m.margins[0].family != m.margins[1].family || m.margins[0].family != m.margins[2].family) {
        throw std::invalid_argument("all three margins must share one family");
    }
    validate(m.vine.edge_a);
    validate(m.vine.edge_b);
    validate(m.vine.edge_cond);
}

CellProbs cell_probs(double p1, double p2, double p3, double p4, double p5) {
    for (double p : {p1, p2, p3, p4, p5}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::domain_error("cell_probs: probabilities must lie in [0,1], got " + std::to_string(p));
        }
    }
    return CellProbs{
        p2 * (1.0 - p3) * (1.0 - p5),
        (1.0 - p1) * p3 * (1.0 - p4),
        (1.0 - p2) * (1.0 - p3) * (1.0 - p5),
        p1 * p3 * (1.0 - p4),
        (1.0 - p3) * p5,
        p3 * p4,
    };
}

double binomial_log_pmf(long y, long n, double p) {
    if (y < 0 || n < 0 || y > n) {
        throw std::invalid_argument("binomial_log_pmf: need 0 <= y <= n, got y=" + std::to_string(y) +
                                    " n=" + std::to_string(n));
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("binomial_log_pmf: p must lie in [0,1]");
    }
    double out = log_choose(n, y);
    if (y > 0) {
        out += static_cast<double>(y) * std::log(p);
    }
    if (n - y > 0) {
        out += static_cast<double>(n - y) * std::log1p(-p);
    }
    return out;
}

LikelihoodGrid::LikelihoodGrid(const ModelSpec& m, const QuadratureRule& q) {
    const std::size_t n = q.size();
    if (n < 2) {
        throw std::invalid_argument("LikelihoodGrid: quadrature needs at least 2 nodes");
    }
    const std::size_t total = n * n * n;
    const VineSpec& v = m.vine;
    const VineOrder o = vine_order(v.permutation);

    log_w_.resize(total);
    for (auto& a : log_p_) {
        a.resize(total);
    }
    for (auto& a : log_q_) {
        a.resize(total);
    }

    std::vector<double> log_wq(n);
    for (std::size_t i = 0; i < n; ++i) {
        log_wq[i] = std::log(q.weights[i]);
    }
    // Conditional-edge inverse depends only on (q2, q3).
    std::vector<double> cond(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            cond[j * n + k] = hinv(v.edge_cond, q.nodes[k], q.nodes[j]);
        }
    }

    const MarginSpec& m_root = m.margins[o.root];
    const MarginSpec& m_first = m.margins[o.first];
    const MarginSpec& m_second = m.margins[o.second];

    for (std::size_t i = 0; i < n; ++i) {
        const double ur = q.nodes[i];
        const LogProbPair pr = margin_log_quantile(m_root, ur);
        for (std::size_t j = 0; j < n; ++j) {
            const double vf = hinv(v.edge_a, q.nodes[j], ur);
            const LogProbPair pf = margin_log_quantile(m_first, vf);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t idx = (i * n + j) * n + k;
                const double vs = hinv(v.edge_b, cond[j * n + k], ur);
                const LogProbPair ps = margin_log_quantile(m_second, vs);
                log_w_[idx] = log_wq[i] + log_wq[j] + log_wq[k];
                log_p_[o.root][idx] = floor_log(pr.log_p);
                log_q_[o.root][idx] = floor_log(pr.log_q);
                log_p_[o.first][idx] = floor_log(pf.log_p);
                log_q_[o.first][idx] = floor_log(pf.log_q);
                log_p_[o.second][idx] = floor_log(ps.log_p);
                log_q_[o.second][idx] = floor_log(ps.log_q);
            }
        }
    }
}

double LikelihoodGrid::study_log_lik(const StudyData& s) const {
    const long n1 = s.diseased_evaluable();
    const long n0 = s.healthy_evaluable();
    const long nd = s.diseased_total();
    const long nt = s.total();
    if (nt == 0) {
        return 0.0;
    }
    const double a1 = static_cast<double>(s.y11);
    const double b1 = static_cast<double>(n1 - s.y11);
    const double a2 = static_cast<double>(s.y00);
    const double b2 = static_cast<double>(n0 - s.y00);
    const double a3 = static_cast<double>(nd);
    const double b3 = static_cast<double>(nt - nd);

    thread_local std::vector<double> terms;
    const std::size_t total = log_w_.size();
    terms.resize(total);
    const double* lw = log_w_.data();
    const double* p1 = log_p_[0].data();
    const double* q1 = log_q_[0].data();
    const double* p2 = log_p_[1].data();
    const double* q2 = log_q_[1].data();
    const double* p3 = log_p_[2].data();
    const double* q3 = log_q_[2].data();
    double mx = kNegInf;
    for (std::size_t i = 0; i < total; ++i) {
        const double t = lw[i] + a1 * p1[i] + b1 * q1[i] + a2 * p2[i] + b2 * q2[i] + a3 * p3[i] + b3 * q3[i];
        terms[i] = t;
        mx = std::max(mx, t);
    }
    if (!(mx > kDegenerate)) {
        return kNegInf;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        sum += std::exp(terms[i] - mx);
    }
    return mx + std::log(sum) + log_choose(n1, s.y11) + log_choose(n0, s.y00) + log_choose(nt, nd);
}

double study_log_lik(const StudyData& s, const ModelSpec& m, const QuadratureRule& q) {
    if (s.total() == 0) {
        return 0.0;
    }
    return LikelihoodGrid(m, q).study_log_lik(s);
}

double dataset_log_lik(std::span<const StudyData> data, const ModelSpec& m, const QuadratureRule& q) {
    if (data.empty()) {
        throw std::invalid_argument("dataset_log_lik: empty dataset");
    }
    const LikelihoodGrid grid(m, q);
    double total = 0.0;
    for (const StudyData& s : data) {
        total += grid.study_log_lik(s);
    }
    return total;
}

double complete_study_log_lik(const StudyData& s, const ModelSpec& m, const QuadratureRule& q, double p4, double p5) {
    return study_log_lik(s, m, q) + binomial_log_pmf(s.y21, s.diseased_total(), p4) +
           binomial_log_pmf(s.y20, s.healthy_total(), p5);
}

PooledNonEvaluable pooled_nonevaluable_probs(std::span<const StudyData> data) {
    long ne_d = 0;
    long ne_h = 0;
    long tot_d = 0;
    long tot_h = 0;
    for (const StudyData& s : data) {
        ne_d += s.y21;
        ne_h += s.y20;
        tot_d += s.diseased_total();
        tot_h += s.healthy_total();
    }
    PooledNonEvaluable out;
    if (tot_d > 0) {
        out.diseased = static_cast<double>(ne_d) / static_cast<double>(tot_d);
    }
    if (tot_h > 0) {
        out.healthy = static_cast<double>(ne_h) / static_cast<double>(tot_h);
    }
    return out;
}

std::array<double, 3> pooled_accuracy(std::span<const StudyData> data) {
    double tp = 0;
    double d = 0;
    double tn = 0;
    double h = 0;
    double ds = 0;
    double all = 0;
    for (const StudyData& s : data) {
        tp += static_cast<double>(s.y11);
        d += static_cast<double>(s.diseased_evaluable());
        tn += static_cast<double>(s.y00);
        h += static_cast<double>(s.healthy_evaluable());
        ds += static_cast<double>(s.diseased_total());
        all += static_cast<double>(s.total());
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {d > 0 ? tp / d : nan, h > 0 ? tn / h : nan, all > 0 ? ds / all : nan};
}

}  // namespace trivine
