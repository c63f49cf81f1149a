#include "trivine/estimation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace trivine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double p) { return std::log(p) - std::log1p(-p); }
double logistic(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

enum class TauMap { Fisher, PositiveLogit, NegativeLogit };

TauMap tau_map(const CopulaFamily& f) {
    if (f.kind != CopulaKind::Clayton) {
        return TauMap::Fisher;
    }
    return (f.rotation == Rotation::R0 || f.rotation == Rotation::R180) ? TauMap::PositiveLogit : TauMap::NegativeLogit;
}

double tau_forward(TauMap m, double tau) {
    switch (m) {
        case TauMap::Fisher:
            return std::atanh(tau);
        case TauMap::PositiveLogit:
            return logit(std::clamp(tau, 1e-12, 1.0 - 1e-12));
        case TauMap::NegativeLogit:
            return logit(std::clamp(-tau, 1e-12, 1.0 - 1e-12));
    }
    return 0.0;
}

double tau_backward(TauMap m, double z) {
    switch (m) {
        case TauMap::Fisher:
            return std::tanh(z);
        case TauMap::PositiveLogit:
            return logistic(z);
        case TauMap::NegativeLogit:
            return -logistic(z);
    }
    return 0.0;
}

// d(natural)/d(transformed) for one tau coordinate
double tau_jacobian(TauMap m, double tau) {
    if (m == TauMap::Fisher) {
        return 1.0 - tau * tau;
    }
    const double a = std::abs(tau);
    return a * (1.0 - a);
}

std::string short_name(const CopulaFamily& f) {
    switch (f.kind) {
        case CopulaKind::Independence:
            return "I";
        case CopulaKind::BVN:
            return "BVN";
        case CopulaKind::Frank:
            return "Frank";
        case CopulaKind::Clayton:
            return "Cln" + std::to_string(static_cast<int>(f.rotation));
    }
    return "?";
}

}  // namespace

bool ModelTemplate::edge_free(int k) const {
    if (k == 2 && truncated) {
        return false;
    }
    return edges[static_cast<std::size_t>(k)].kind != CopulaKind::Independence;
}

int ModelTemplate::parameter_count() const {
    int n = 6;
    for (int k = 0; k < 3; ++k) {
        n += edge_free(k) ? 1 : 0;
    }
    return n;
}

void validate(const ModelTemplate& t) {
    if (t.margin == MarginFamily::Normal && t.link == Link::Identity) {
        throw std::invalid_argument("normal margins require a logit, probit or cloglog link");
    }
    for (const CopulaFamily& f : t.edges) {
        make_family(f.kind, f.rotation);
    }
}

std::string display_label(const ModelTemplate& t) {
    if (!t.label.empty()) {
        return t.label;
    }
    std::string out;
    const bool uniform = t.edges[0] == t.edges[1] && (t.truncated || t.edges[1] == t.edges[2]);
    if (uniform && t.edges[0].kind != CopulaKind::Clayton) {
        out = short_name(t.edges[0]);
    } else {
        out = short_name(t.edges[0]) + "/" + short_name(t.edges[1]) + "/" +
              (t.truncated ? std::string("I") : short_name(t.edges[2]));
    }
    if (t.truncated && uniform) {
        out += "/I";
    }
    return out;
}

ModelSpec make_model(const ModelTemplate& t, const NaturalParams& p) {
    ModelSpec m;
    for (std::size_t k = 0; k < 3; ++k) {
        m.margins[k].family = t.margin;
        m.margins[k].link = t.margin == MarginFamily::Beta ? Link::Identity : t.link;
        m.margins[k].pi = p.pi[k];
        m.margins[k].delta = p.delta[k];
    }
    m.vine.permutation = t.permutation;
    std::array<BivariateCopula*, 3> edges{&m.vine.edge_a, &m.vine.edge_b, &m.vine.edge_cond};
    for (int k = 0; k < 3; ++k) {
        BivariateCopula& e = *edges[static_cast<std::size_t>(k)];
        if (!t.edge_free(k)) {
            e = BivariateCopula::independence();
            continue;
        }
        e.family = t.edges[static_cast<std::size_t>(k)];
        e.theta = tau_to_theta(e.family, p.tau[static_cast<std::size_t>(k)]);
    }
    return m;
}

NaturalParams natural_params(const ModelSpec& m) {
    NaturalParams p;
    for (std::size_t k = 0; k < 3; ++k) {
        p.pi[k] = m.margins[k].pi;
        p.delta[k] = m.margins[k].delta;
    }
    p.tau = {theta_to_tau(m.vine.edge_a), theta_to_tau(m.vine.edge_b), theta_to_tau(m.vine.edge_cond)};
    return p;
}

ModelTemplate template_of(const ModelSpec& m) {
    ModelTemplate t;
    t.margin = m.margins[0].family;
    t.link = m.margins[0].link;
    t.permutation = m.vine.permutation;
    t.edges = {m.vine.edge_a.family, m.vine.edge_b.family, m.vine.edge_cond.family};
    t.truncated = m.vine.edge_cond.family.kind == CopulaKind::Independence;
    return t;
}

Eigen::VectorXd transform_params(const ModelSpec& m, const ModelTemplate& t) {
    const NaturalParams p = natural_params(m);
    Eigen::VectorXd z(t.parameter_count());
    Eigen::Index i = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        z[i++] = logit(p.pi[k]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        z[i++] = t.margin == MarginFamily::Normal ? std::log(p.delta[k]) : logit(p.delta[k]);
    }
    for (int k = 0; k < 3; ++k) {
        if (t.edge_free(k)) {
            const auto ku = static_cast<std::size_t>(k);
            z[i++] = tau_forward(tau_map(t.edges[ku]), p.tau[ku]);
        }
    }
    return z;
}

ModelSpec untransform_params(const Eigen::VectorXd& z, const ModelTemplate& t) {
    if (z.size() != t.parameter_count()) {
        throw std::invalid_argument("untransform_params: expected " + std::to_string(t.parameter_count()) +
                                    " coordinates, got " + std::to_string(z.size()));
    }
    NaturalParams p;
    Eigen::Index i = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        p.pi[k] = logistic(z[i++]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        p.delta[k] = t.margin == MarginFamily::Normal ? std::exp(z[i]) : logistic(z[i]);
        ++i;
    }
    for (int k = 0; k < 3; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        p.tau[ku] = t.edge_free(k) ? tau_backward(tau_map(t.edges[ku]), z[i++]) : 0.0;
    }
    return make_model(t, p);
}

std::array<std::string, 9> parameter_names(const ModelTemplate& t) {
    const std::string d = t.margin == MarginFamily::Normal ? "sigma" : "gamma";
    const auto labels = edge_labels(t.permutation);
    return {"pi1", "pi2", "pi3", d + "1", d + "2", d + "3", "tau" + labels[0], "tau" + labels[1], "tau" + labels[2]};
}

std::array<double, 9> flatten(const NaturalParams& p) {
    return {p.pi[0], p.pi[1], p.pi[2], p.delta[0], p.delta[1], p.delta[2], p.tau[0], p.tau[1], p.tau[2]};
}

NaturalParams default_start(std::span<const StudyData> data, const ModelTemplate& t) {
    NaturalParams p;
    const auto pooled = pooled_accuracy(data);
    for (std::size_t k = 0; k < 3; ++k) {
        const double v = std::isfinite(pooled[k]) ? pooled[k] : 0.5;
        p.pi[k] = std::clamp(v, 0.02, 0.98);
        p.delta[k] = t.margin == MarginFamily::Normal ? 0.5 : 0.05;
    }
    for (std::size_t k = 0; k < 3; ++k) {
        switch (tau_map(t.edges[k])) {
            case TauMap::Fisher:
                p.tau[k] = 0.0;
                break;
            case TauMap::PositiveLogit:
                p.tau[k] = 0.1;
                break;
            case TauMap::NegativeLogit:
                p.tau[k] = -0.1;
                break;
        }
    }
    return p;
}

namespace {

void fill_standard_errors(FitResult& r, const ModelTemplate& t) {
    r.standard_errors.pi.fill(kNaN);
    r.standard_errors.delta.fill(kNaN);
    r.standard_errors.tau.fill(kNaN);
    r.se_available = false;
    if (r.hessian.size() == 0 || !r.hessian.allFinite()) {
        return;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(r.hessian);
    if (llt.info() != Eigen::Success) {
        return;
    }
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(r.hessian.rows(), r.hessian.cols()));
    if (!cov.allFinite()) {
        return;
    }
    const NaturalParams& e = r.estimates;
    Eigen::Index i = 0;
    auto se = [&](double jac) {
        const double v = cov(i, i);
        ++i;
        return v > 0.0 ? std::abs(jac) * std::sqrt(v) : kNaN;
    };
    for (std::size_t k = 0; k < 3; ++k) {
        r.standard_errors.pi[k] = se(e.pi[k] * (1.0 - e.pi[k]));
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const double jac = t.margin == MarginFamily::Normal ? e.delta[k] : e.delta[k] * (1.0 - e.delta[k]);
        r.standard_errors.delta[k] = se(jac);
    }
    for (int k = 0; k < 3; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (t.edge_free(k)) {
            r.standard_errors.tau[ku] = se(tau_jacobian(tau_map(t.edges[ku]), e.tau[ku]));
        }
    }
    r.se_available = true;
}

}  // namespace

FitResult fit(std::span<const StudyData> data, const ModelTemplate& t, const FitConfig& cfg) {
    if (data.size() < 2) {
        throw std::invalid_argument("fit: need at least two studies");
    }
    validate(t);
    const QuadratureRule rule = gauss_legendre_01(cfg.n_q);

    const Objective nll = [&](const Eigen::VectorXd& z) {
        try {
            const ModelSpec m = untransform_params(z, t);
            const double ll = dataset_log_lik(data, m, rule);
            return std::isfinite(ll) ? -ll : kInf;
        } catch (const std::exception&) {
            return kInf;
        }
    };

    const NaturalParams start = cfg.start ? *cfg.start : default_start(data, t);
    const Eigen::VectorXd z0 = transform_params(make_model(t, start), t);

    OptimOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.grad_tol = cfg.tolerance;

    OptimResult best = minimize(nll, z0, opts);
    int starts = 1;
    int evaluations = best.evaluations;
    if (!best.converged) {
        for (int k = 1; k <= cfg.restarts; ++k) {
            Eigen::VectorXd zk = z0;
            for (Eigen::Index i = 0; i < zk.size(); ++i) {
                zk[i] += 0.5 * static_cast<double>(((i + k) % 3) - 1);
            }
            const OptimResult trial = minimize(nll, zk, opts);
            ++starts;
            evaluations += trial.evaluations;
            const bool better = (trial.converged && !best.converged) ||
                                (trial.converged == best.converged && trial.objective < best.objective);
            if (better) {
                best = trial;
            }
            if (best.converged) {
                break;
            }
        }
    }

    FitResult r;
    r.model_template = t;
    r.model = untransform_params(best.argmin, t);
    r.estimates = natural_params(r.model);
    r.log_lik = -best.objective;
    r.converged = best.converged;
    r.iterations = best.iterations;
    r.evaluations = evaluations;
    r.starts_used = starts;
    r.n_studies = data.size();
    r.n_q = cfg.n_q;
    r.argmin = best.argmin;
    r.hessian = best.hessian;
    fill_standard_errors(r, t);
    return r;
}

std::vector<ScanEntry> model_scan(std::span<const StudyData> data, std::span<const ModelTemplate> candidates,
                                  const FitConfig& cfg, unsigned threads) {
    if (candidates.empty()) {
        throw std::invalid_argument("model_scan: no candidates");
    }
    std::vector<ScanEntry> entries(candidates.size());
    detail::parallel_for(candidates.size(), threads, [&](std::size_t i) {
        ScanEntry& e = entries[i];
        e.candidate = i;
        try {
            e.result = fit(data, candidates[i], cfg);
            e.status = e.result->converged ? ScanStatus::Ok : ScanStatus::NotConverged;
        } catch (const std::exception& ex) {
            e.status = ScanStatus::Failed;
            e.message = ex.what();
        }
    });
    auto rank = [](const ScanEntry& e) { return static_cast<int>(e.status); };
    std::stable_sort(entries.begin(), entries.end(), [&](const ScanEntry& a, const ScanEntry& b) {
        if (rank(a) != rank(b)) {
            return rank(a) < rank(b);
        }
        if (a.result && b.result) {
            if (a.result->log_lik != b.result->log_lik) {
                return a.result->log_lik > b.result->log_lik;
            }
            const int pa = a.result->model_template.parameter_count();
            const int pb = b.result->model_template.parameter_count();
            if (pa != pb) {
                return pa < pb;
            }
        }
        return a.candidate < b.candidate;
    });
    if (entries.front().status == ScanStatus::Ok) {
        entries.front().best = true;
    }
    return entries;
}

std::string to_string(ScanStatus s) {
    switch (s) {
        case ScanStatus::Ok:
            return "ok";
        case ScanStatus::NotConverged:
            return "not_converged";
        case ScanStatus::Failed:
            return "failed";
    }
    return "?";
}

}  // namespace trivine
