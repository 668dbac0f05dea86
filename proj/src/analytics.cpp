#include "cutoff/analytics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "cutoff/errors.hpp"
#include "cutoff/rng.hpp"

namespace cutoff {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPoissonTail = 1e-12;
}  // namespace

GeneratorMatrix build_generator(const SpinModel& m, DynKind kind, size_t state_budget) {
    GeneratorMatrix gen;
    gen.kind = kind;
    gen.gibbs = gibbs_enumerate(m, state_budget);
    gen.pi = gen.gibbs.p;
    gen.n_states = gen.pi.size();
    const auto& free_sites = gen.gibbs.free_sites;
    const size_t k = free_sites.size();

    // digit place values: first free site is the most significant
    std::vector<size_t> place(k, 1);
    for (size_t i = k; i-- > 1;) place[i - 1] = place[i] * static_cast<size_t>(m.q);

    gen.row_ptr.assign(gen.n_states + 1, 0);
    gen.diag.assign(gen.n_states, 0.0);
    gen.col.reserve(gen.n_states * k * (m.q - 1));
    gen.val.reserve(gen.n_states * k * (m.q - 1));

    Configuration sigma(m.n_sites(), 0);
    for (int v = 0; v < m.n_sites(); ++v)
        if (m.graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(m.graph->clamp[v]);
    std::vector<double> p;
    for (size_t id = 0; id < gen.n_states; ++id) {
        size_t rest = id;
        for (size_t i = k; i-- > 0;) {
            sigma[free_sites[i]] = static_cast<uint8_t>(rest % m.q);
            rest /= m.q;
        }
        double out_rate = 0.0;
        for (size_t i = 0; i < k; ++i) {
            const int x = free_sites[i];
            const int cur = sigma[x];
            m.conditional_into(sigma, x, p);
            for (int s = 0; s < m.q; ++s) {
                if (s == cur) continue;
                double rate;
                if (kind == DynKind::HeatBath) {
                    rate = p[s];
                } else {  // Metropolis: uniform proposal, accept by conditional ratio
                    rate = p[cur] > 0 ? std::min(1.0, p[s] / p[cur]) / m.q : 1.0 / m.q;
                    if (p[s] == 0.0) rate = 0.0;
                }
                if (rate <= 0.0) continue;
                size_t target = id + (static_cast<size_t>(s) - cur) * place[i];
                gen.col.push_back(static_cast<uint32_t>(target));
                gen.val.push_back(rate);
                out_rate += rate;
            }
        }
        gen.diag[id] = -out_rate;
        gen.row_ptr[id + 1] = gen.col.size();
    }
    gen.uniformization_rate = 0.0;
    for (double d : gen.diag) gen.uniformization_rate = std::max(gen.uniformization_rate, -d);
    return gen;
}

std::vector<double> GeneratorMatrix::apply_to_distribution(const std::vector<double>& nu) const {
    // one uniformized step: nu (I + Q/Lambda)
    const double lam = uniformization_rate;
    std::vector<double> out(n_states, 0.0);
    for (size_t i = 0; i < n_states; ++i) {
        const double mass = nu[i];
        if (mass == 0.0) continue;
        out[i] += mass * (1.0 + diag[i] / lam);
        for (size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e)
            out[col[e]] += mass * val[e] / lam;
    }
    return out;
}

std::vector<double> point_mass(const GeneratorMatrix& gen, size_t state) {
    if (state >= gen.n_states) throw InvalidArgument("point_mass: state out of range");
    std::vector<double> nu(gen.n_states, 0.0);
    nu[state] = 1.0;
    return nu;
}

std::vector<double> heat_kernel(const GeneratorMatrix& gen, const std::vector<double>& init,
                                double t) {
    if (t < 0) throw InvalidArgument("heat_kernel: negative time");
    if (init.size() != gen.n_states) throw InvalidArgument("heat_kernel: size mismatch");
    const double lam = gen.uniformization_rate;
    if (t == 0.0 || lam == 0.0) return init;
    const double mu = lam * t;
    // accumulate sum_k Po(k; mu) * nu P^k, stopping once the remaining tail
    // is below the truncation target (log-space weights avoid underflow)
    std::vector<double> out(gen.n_states, 0.0);
    std::vector<double> v = init;
    const double logmu = std::log(mu);
    double logw = -mu;       // log Po(0)
    double logcum = kNegInf;  // log of accumulated mass
    for (size_t kk = 0;; ++kk) {
        if (kk > 0) {
            logw += logmu - std::log(static_cast<double>(kk));
            v = gen.apply_to_distribution(v);
        }
        const double w = std::exp(logw);
        if (w > 0.0)
            for (size_t i = 0; i < gen.n_states; ++i) out[i] += w * v[i];
        logcum = std::max(logcum, logw) +
                 std::log1p(std::exp(std::min(logcum, logw) - std::max(logcum, logw)));
        if (logcum > std::log1p(-kPoissonTail)) break;
        if (kk > 10 * mu + 1e6) throw std::logic_error("heat_kernel: truncation ran away");
    }
    return out;
}

DistanceTriple distances(const std::vector<double>& nu, const std::vector<double>& pi) {
    if (nu.size() != pi.size()) throw InvalidArgument("distances: size mismatch");
    DistanceTriple d;
    double l2sq = 0.0;
    for (size_t i = 0; i < nu.size(); ++i) {
        if (pi[i] <= 0.0) {
            if (nu[i] > 1e-300)
                throw InvalidArgument("distances: mass outside the support of pi");
            continue;
        }
        const double diff = nu[i] - pi[i];
        d.tv += std::abs(diff);
        const double rel = nu[i] / pi[i] - 1.0;
        l2sq += rel * rel * pi[i];
        d.linf = std::max(d.linf, std::abs(rel));
    }
    d.tv *= 0.5;
    d.l2 = std::sqrt(l2sq);
    return d;
}

namespace {

// feasible-subspace compression and the pi-symmetrized negative generator
struct Symmetrized {
    std::vector<size_t> states;   // feasible state ids
    std::vector<size_t> inverse;  // full -> compressed (SIZE_MAX when infeasible)
    std::vector<double> pi;       // compressed, renormalized copy
    // CSR of A = D^{1/2} (-Q) D^{-1/2} (symmetric PSD), diagonal separate
    std::vector<size_t> row_ptr;
    std::vector<uint32_t> col;
    std::vector<double> val;
    std::vector<double> diag;

    size_t n() const { return states.size(); }
    void multiply(const double* x, double* y) const {
        for (size_t i = 0; i < n(); ++i) {
            double acc = diag[i] * x[i];
            for (size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) acc += val[e] * x[col[e]];
            y[i] = acc;
        }
    }
};

Symmetrized symmetrize(const GeneratorMatrix& gen) {
    Symmetrized s;
    s.inverse.assign(gen.n_states, std::numeric_limits<size_t>::max());
    for (size_t i = 0; i < gen.n_states; ++i) {
        if (gen.pi[i] > 0.0) {
            s.inverse[i] = s.states.size();
            s.states.push_back(i);
        }
    }
    s.pi.resize(s.n());
    for (size_t i = 0; i < s.n(); ++i) s.pi[i] = gen.pi[s.states[i]];
    s.row_ptr.assign(s.n() + 1, 0);
    s.diag.resize(s.n());
    for (size_t ci = 0; ci < s.n(); ++ci) {
        const size_t i = s.states[ci];
        s.diag[ci] = -gen.diag[i];
        for (size_t e = gen.row_ptr[i]; e < gen.row_ptr[i + 1]; ++e) {
            const size_t j = gen.col[e];
            if (s.inverse[j] == std::numeric_limits<size_t>::max()) continue;
            const double a = -gen.val[e] * std::sqrt(gen.pi[i] / gen.pi[j]);
            s.col.push_back(static_cast<uint32_t>(s.inverse[j]));
            s.val.push_back(a);
        }
        s.row_ptr[ci + 1] = s.col.size();
    }
    return s;
}

double gap_dense(const Symmetrized& s) {
    const int n = static_cast<int>(s.n());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = s.diag[i];
        for (size_t e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e)
            a(i, static_cast<int>(s.col[e])) += s.val[e];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::logic_error("gap: eigensolver failed");
    const auto& ev = solver.eigenvalues();  // ascending
    if (n < 2) return 0.0;
    return std::max(0.0, ev(1));
}

// Lanczos with full reorthogonalization on A, deflating the exact null
// vector sqrt(pi); the smallest remaining Ritz value is the gap.
double gap_lanczos(const Symmetrized& s, int max_iter, double tol) {
    const size_t n = s.n();
    std::vector<double> null_vec(n);
    double norm = 0.0;
    for (size_t i = 0; i < n; ++i) {
        null_vec[i] = std::sqrt(s.pi[i]);
        norm += null_vec[i] * null_vec[i];
    }
    norm = std::sqrt(norm);
    for (auto& x : null_vec) x /= norm;

    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    CounterRng rng = make_rng(12345, RngStream::Scratch, 7);
    std::vector<double> v(n), w(n);
    for (size_t i = 0; i < n; ++i) v[i] = rng.uniform(i) - 0.5;
    auto orthogonalize = [&](std::vector<double>& x) {
        double d = 0.0;
        for (size_t i = 0; i < n; ++i) d += x[i] * null_vec[i];
        for (size_t i = 0; i < n; ++i) x[i] -= d * null_vec[i];
        for (const auto& b : basis) {
            d = 0.0;
            for (size_t i = 0; i < n; ++i) d += x[i] * b[i];
            for (size_t i = 0; i < n; ++i) x[i] -= d * b[i];
        }
    };
    orthogonalize(v);
    double vn = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (auto& x : v) x /= vn;

    double prev = std::numeric_limits<double>::max();
    for (int it = 0; it < max_iter; ++it) {
        basis.push_back(v);
        s.multiply(v.data(), w.data());
        double a = std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
        alpha.push_back(a);
        orthogonalize(w);
        double b = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        // tridiagonal Ritz values every few steps
        if (it >= 4 && (it % 4 == 0 || b < 1e-14)) {
            const int k = static_cast<int>(alpha.size());
            Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
            for (int i = 0; i < k; ++i) {
                tri(i, i) = alpha[i];
                if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri, Eigen::EigenvaluesOnly);
            double cur = es.eigenvalues()(0);
            if (std::abs(prev - cur) < tol * std::max(1.0, std::abs(cur)) || b < 1e-14)
                return std::max(0.0, cur);
            prev = cur;
        }
        if (b < 1e-14) break;
        beta.push_back(b);
        for (size_t i = 0; i < n; ++i) v[i] = w[i] / b;
    }
    return std::max(0.0, prev == std::numeric_limits<double>::max() ? 0.0 : prev);
}

}  // namespace

double spectral_gap(const GeneratorMatrix& gen, size_t dense_budget) {
    Symmetrized s = symmetrize(gen);
    if (s.n() < 2) return 0.0;
    if (s.n() <= dense_budget) return gap_dense(s);
    return gap_lanczos(s, 600, 1e-12);
}

namespace {

// entropy-like functional Ent(f) = E_pi[f^2 log(f^2 / E_pi f^2)]
double entropy_term(const Symmetrized& s, const std::vector<double>& f) {
    double m2 = 0.0;
    for (size_t i = 0; i < s.n(); ++i) m2 += s.pi[i] * f[i] * f[i];
    if (m2 <= 0.0) return 0.0;
    double ent = 0.0;
    for (size_t i = 0; i < s.n(); ++i) {
        const double f2 = f[i] * f[i];
        if (f2 > 0.0) ent += s.pi[i] * f2 * std::log(f2 / m2);
    }
    return std::max(ent, 0.0);
}

// Dirichlet form E(f) = <f, A' f> with A' = D_pi (-Q) on the feasible class
double dirichlet(const GeneratorMatrix& gen, const Symmetrized& s,
                 const std::vector<double>& f) {
    double acc = 0.0;
    for (size_t ci = 0; ci < s.n(); ++ci) {
        const size_t i = s.states[ci];
        double row = -gen.diag[i] * f[ci];
        for (size_t e = gen.row_ptr[i]; e < gen.row_ptr[i + 1]; ++e) {
            const size_t cj = s.inverse[gen.col[e]];
            if (cj != std::numeric_limits<size_t>::max()) row -= gen.val[e] * f[cj];
        }
        acc += s.pi[ci] * f[ci] * row;
    }
    return std::max(acc, 0.0);
}

void dirichlet_grad(const GeneratorMatrix& gen, const Symmetrized& s,
                    const std::vector<double>& f, std::vector<double>& grad) {
    // grad E = 2 D_pi (-Q) f, symmetric by detailed balance
    grad.assign(s.n(), 0.0);
    for (size_t ci = 0; ci < s.n(); ++ci) {
        const size_t i = s.states[ci];
        double row = -gen.diag[i] * f[ci];
        for (size_t e = gen.row_ptr[i]; e < gen.row_ptr[i + 1]; ++e) {
            const size_t cj = s.inverse[gen.col[e]];
            if (cj != std::numeric_limits<size_t>::max()) row -= gen.val[e] * f[cj];
        }
        grad[ci] = 2.0 * s.pi[ci] * row;
    }
}

}  // namespace

LogSobolevEstimate log_sobolev_estimate(const GeneratorMatrix& gen, int restarts,
                                        uint64_t seed) {
    LogSobolevEstimate est;
    est.gap = spectral_gap(gen);
    est.restarts = restarts;
    Symmetrized s = symmetrize(gen);
    const size_t n = s.n();

    // The ratio of near-constant perturbations f + c tends to (Rayleigh
    // quotient)/2 as c grows, so gap/2 is always an attainable limit.
    double best = est.gap / 2.0;

    if (n == 2) {
        // two-point closed form: alpha = gap for the symmetric chain scaled
        // by (1-2p)/log((1-p)/p), continuously extended to 1/2 at p = 1/2
        const double p = std::min(s.pi[0], s.pi[1]);
        const double ratio =
            std::abs(1.0 - 2.0 * p) < 1e-9 ? 0.5 : (1.0 - 2.0 * p) / std::log((1.0 - p) / p);
        est.two_point_exact = est.gap * ratio;
        best = std::min(best, est.two_point_exact);
    }

    std::vector<double> f(n), grad(n), trial(n);
    for (int rs = 0; rs < restarts && n > 2; ++rs) {
        CounterRng rng = make_rng(seed, RngStream::Scratch, 1000 + rs);
        for (size_t i = 0; i < n; ++i) {
            // Box-Muller normals
            double u1 = std::max(rng.uniform(2 * i), 1e-300);
            double u2 = rng.uniform(2 * i + 1);
            f[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        }
        double m2 = 0.0;
        for (size_t i = 0; i < n; ++i) m2 += s.pi[i] * f[i] * f[i];
        for (auto& x : f) x /= std::sqrt(m2);
        double cur = std::numeric_limits<double>::max();
        double step = 0.5;
        for (int it = 0; it < 400; ++it) {
            const double ent = entropy_term(s, f);
            const double dir = dirichlet(gen, s, f);
            if (ent < 1e-12) break;
            const double ratio = dir / ent;
            cur = std::min(cur, ratio);
            dirichlet_grad(gen, s, f, grad);
            // grad of Ent with E f^2 normalized on the fly
            double fm2 = 0.0;
            for (size_t i = 0; i < n; ++i) fm2 += s.pi[i] * f[i] * f[i];
            bool improved = false;
            for (int bt = 0; bt < 30; ++bt) {
                for (size_t i = 0; i < n; ++i) {
                    const double f2 = f[i] * f[i];
                    const double gent =
                        f2 > 0 ? 2.0 * s.pi[i] * f[i] * std::log(f2 / fm2) : 0.0;
                    const double g = (grad[i] * ent - dir * gent) / (ent * ent);
                    trial[i] = f[i] - step * g;
                }
                double t2 = 0.0;
                for (size_t i = 0; i < n; ++i) t2 += s.pi[i] * trial[i] * trial[i];
                if (t2 <= 0) {
                    step *= 0.5;
                    continue;
                }
                for (auto& x : trial) x /= std::sqrt(t2);
                const double tent = entropy_term(s, trial);
                const double tdir = dirichlet(gen, s, trial);
                if (tent > 1e-12 && tdir / tent < ratio - 1e-15) {
                    f = trial;
                    improved = true;
                    step = std::min(step * 1.5, 4.0);
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;
        }
        if (cur < best) best = cur;
    }
    est.alpha = best;
    est.cert_positive = est.alpha > 0.0;
    est.cert_two_alpha_le_gap = 2.0 * est.alpha <= est.gap + 1e-9;
    return est;
}

LsBoundCheck check_ls_bound(const GeneratorMatrix& gen, size_t start_state, double s,
                            double alpha_s, double gap) {
    if (!(alpha_s > 0) || !(gap > 0))
        throw InvalidArgument("check_ls_bound: need positive alpha and gap");
    LsBoundCheck out;
    const double pi0 = gen.pi[start_state];
    if (!(pi0 > 0)) throw InvalidArgument("check_ls_bound: start has zero mass");
    const double loglog = std::log(std::log(1.0 / pi0));
    const double first = std::isfinite(loglog) ? std::max(loglog, 0.0) : 0.0;
    out.t = first / (4.0 * alpha_s) + s / gap;
    auto nu = heat_kernel(gen, point_mass(gen, start_state), out.t);
    out.l2 = distances(nu, gen.pi).l2;
    out.bound = std::exp(1.0 - s);
    out.margin = out.bound - out.l2;
    out.ok = out.margin >= 0.0;
    return out;
}

double product_M(const std::vector<double>& component_l2) {
    double m = 0.0;
    for (double d : component_l2) {
        if (d < 0) throw InvalidArgument("product_M: negative distance");
        m += d * d;
    }
    return m;
}

double product_tv_bound(double m_t) {
    if (m_t < 0) throw InvalidArgument("product_tv_bound: negative input");
    return std::sqrt(m_t);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double product_tv_asymptotic(double m_t) {
    if (m_t < 0) throw InvalidArgument("product_tv_asymptotic: negative input");
    return 2.0 * std_normal_cdf(std::sqrt(m_t) / 2.0) - 1.0;
}

double hypercube_tv_exact(long long n, double t) {
    if (n < 1) throw InvalidArgument("hypercube: need n >= 1");
    if (t < 0) throw InvalidArgument("hypercube: negative time");
    // per-coordinate disagreement probability for rate-1/n coordinate flips
    const double p = 0.5 * (1.0 - std::exp(-2.0 * t / n));
    const double log2 = std::log(2.0);
    if (p <= 0.0) return -std::expm1(-static_cast<double>(n) * log2);  // 1 - 2^-n
    const double logp = std::log(p), logq = std::log1p(-p);
    double tv = 0.0;
    double logc = 0.0;  // log C(n, k)
    for (long long k = 0; k <= n; ++k) {
        if (k > 0) logc += std::log(static_cast<double>(n - k + 1)) -
                           std::log(static_cast<double>(k));
        const double a = logc + k * logp + (n - k) * logq;  // log nu-mass of shell k
        const double b = logc - n * log2;                   // log pi-mass of shell k
        tv += std::abs(std::exp(a) - std::exp(b));
    }
    return 0.5 * tv;
}

HypercubeProfile hypercube_profile(long long n, const std::vector<double>& c_grid) {
    HypercubeProfile prof;
    const double nn = static_cast<double>(n);
    for (double c : c_grid) {
        const double t = 0.25 * nn * std::log(nn) + c * nn;
        prof.c.push_back(c);
        prof.t.push_back(t);
        prof.tv.push_back(t >= 0 ? hypercube_tv_exact(n, t) : 1.0);
        prof.asymptotic.push_back(std::erf(std::exp(-2.0 * c) / std::sqrt(8.0)));
    }
    return prof;
}

CutoffPrediction product_cutoff_predict(double gap, double alpha_s, double phi_min, double n) {
    if (!(gap > 0) || !(alpha_s > 0)) throw InvalidArgument("predict: need gap, alpha > 0");
    if (!(phi_min > 0) || phi_min > 1) throw InvalidArgument("predict: need 0 < phi_min <= 1");
    CutoffPrediction p;
    p.location = std::log(n) / (2.0 * gap);
    const double loglog = std::log(std::log(1.0 / phi_min));
    const double clamped = std::isfinite(loglog) ? std::max(loglog, 0.0) : 0.0;
    p.window = 1.0 / gap + clamped / alpha_s;
    return p;
}

double plus_cutoff_predict(int d, double n, const std::vector<double>& lambda_j) {
    if (d < 1 || static_cast<int>(lambda_j.size()) != d)
        throw InvalidArgument("plus predict: need lambda_j for 0 <= j < d");
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
        if (!(lambda_j[j] > 0)) throw InvalidArgument("plus predict: need lambda_j > 0");
        worst = std::max(worst, (d - j) / lambda_j[j]);
    }
    return 0.5 * worst * std::log(n);
}

namespace {

bool monotone_compatible(const SpinModel& m) {
    if (m.q != 2) return false;
    for (size_t e = 0; e < m.edges.size(); ++e) {
        const auto& t = m.tables[m.edge_table[e]];
        if (t(0, 0) + t(1, 1) < t(0, 1) + t(1, 0)) return false;
    }
    return true;
}

std::vector<size_t> pick_starts(const SpinModel& m, const GeneratorMatrix& gen, StartScan scan,
                                std::string& label) {
    if (scan == StartScan::Auto)
        scan = monotone_compatible(m)            ? StartScan::Extremes
               : gen.n_states <= size_t{1} << 12 ? StartScan::AllStates
                                                 : StartScan::Canonical;
    std::vector<size_t> starts;
    switch (scan) {
        case StartScan::Extremes:
            label = "extremes";
            starts.push_back(gen.gibbs.index_of(m.extreme_start(false)));
            starts.push_back(gen.gibbs.index_of(m.extreme_start(true)));
            break;
        case StartScan::AllStates:
            label = "all-states";
            for (size_t i = 0; i < gen.n_states; ++i)
                if (gen.pi[i] > 0) starts.push_back(i);
            break;
        default:
            label = "canonical";
            starts.push_back(gen.gibbs.index_of(m.canonical_start()));
            break;
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    // extreme starts can be infeasible (hard-core all-occupied): drop them
    std::erase_if(starts, [&](size_t i) { return !(gen.pi[i] > 0); });
    if (starts.empty()) {
        label = "canonical";
        starts.push_back(gen.gibbs.index_of(m.canonical_start()));
    }
    return starts;
}

}  // namespace

MixingCurve exact_mixing_curve(const SpinModel& m, const GeneratorMatrix& gen,
                               const std::vector<double>& grid, StartScan scan) {
    MixingCurve curve;
    curve.times = grid;
    curve.tv.assign(grid.size(), 0.0);
    curve.l2.assign(grid.size(), 0.0);
    curve.linf.assign(grid.size(), 0.0);
    std::vector<size_t> starts = pick_starts(m, gen, scan, curve.start_scan);
    for (size_t s0 : starts) {
        std::vector<double> nu = point_mass(gen, s0);
        double prev_t = 0.0;
        for (size_t gi = 0; gi < grid.size(); ++gi) {
            nu = heat_kernel(gen, nu, grid[gi] - prev_t);
            prev_t = grid[gi];
            DistanceTriple d = distances(nu, gen.pi);
            curve.tv[gi] = std::max(curve.tv[gi], d.tv);
            curve.l2[gi] = std::max(curve.l2[gi], d.l2);
            curve.linf[gi] = std::max(curve.linf[gi], d.linf);
        }
    }
    return curve;
}

TmixBracket tmix_exact(const SpinModel& m, double eps, size_t state_budget, StartScan scan) {
    if (!(eps > 0) || eps >= 1) throw InvalidArgument("tmix: need 0 < eps < 1");
    GeneratorMatrix gen = build_generator(m, DynKind::HeatBath, state_budget);
    std::string label;
    std::vector<size_t> starts = pick_starts(m, gen, scan, label);

    auto worst_tv = [&](double t) {
        double tv = 0.0;
        for (size_t s0 : starts)
            tv = std::max(tv, distances(heat_kernel(gen, point_mass(gen, s0), t), gen.pi).tv);
        return tv;
    };
    double hi = 1.0;
    while (worst_tv(hi) > eps) {
        hi *= 2.0;
        if (hi > 1e9) throw std::logic_error("tmix: no mixing up to t = 1e9");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (worst_tv(mid) > eps ? lo : hi) = mid;
    }
    TmixBracket b;
    b.lower = lo;
    b.upper = hi;
    b.exact = true;
    b.note = "bisection on the exact worst-start TV curve, starts: " + label;
    return b;
}

TmixBracket tmix_empirical(const SpinModel& m, Policy policy, double eps,
                           const std::vector<double>& grid, int replicas, uint64_t seed,
                           int workers) {
    if (grid.empty()) throw InvalidArgument("tmix: empty grid");
    TmixBracket b;
    b.exact = false;
    b.confidence = 0.95;

    // upper bracket from coupling coalescence
    TvUpperCurve up = coupling_tv_upper(m, policy, grid, replicas, seed, workers);
    b.upper = grid.back();
    bool upper_found = false;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (up.hi95[i] <= eps) {
            b.upper = grid[i];
            upper_found = true;
            break;
        }
    }

    // lower bracket from binary test statistics: any event probability gap
    // lower-bounds the TV distance
    const Configuration start = monotone_compatible(m) ? m.extreme_start(true)
                                                       : m.canonical_start();
    std::vector<int> test_sites;
    for (int v = 0; v < m.n_sites() && test_sites.size() < 16; ++v)
        if (!m.graph->is_clamped(v)) test_sites.push_back(v);
    const double burn = 4.0 * grid.back() + 8.0;
    const int R = replicas;
    // reference samples approximate stationarity via a long burn-in
    std::vector<Configuration> ref(R);
    std::atomic<int> next{0};
    auto ref_worker = [&]() {
        for (int k = next.fetch_add(1); k < R; k = next.fetch_add(1)) {
            uint64_t sub = make_rng(seed ^ 0x5eedbeefULL, RngStream::Replica,
                                    static_cast<uint64_t>(k))
                               .bits(1);
            UpdateSequence w = sample_updates(*m.graph, burn, sub, DynKind::HeatBath,
                                              Policy::Monotone, m.q);
            ref[k] = evolve(m, m.canonical_start(), w);
        }
    };
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < std::max(1, workers) - 1; ++i) pool.emplace_back(ref_worker);
        ref_worker();
        for (auto& th : pool) th.join();
    }
    // per-grid-time samples from the test start (one long trajectory per
    // replica, snapshots at grid times)
    std::vector<std::vector<Configuration>> snap(R);
    next = 0;
    auto traj_worker = [&]() {
        for (int k = next.fetch_add(1); k < R; k = next.fetch_add(1)) {
            uint64_t sub = make_rng(seed, RngStream::Replica, static_cast<uint64_t>(k)).bits(2);
            UpdateSequence w = sample_updates(*m.graph, grid.back() + 1e-9, sub,
                                              DynKind::HeatBath, Policy::Monotone, m.q);
            Configuration sigma = start;
            std::vector<Configuration> row;
            size_t gi = 0;
            for (const auto& e : w.events) {
                while (gi < grid.size() && grid[gi] < e.t) {
                    row.push_back(sigma);
                    ++gi;
                }
                apply_event(m, sigma, e, DynKind::HeatBath);
            }
            while (gi < grid.size()) {
                row.push_back(sigma);
                ++gi;
            }
            snap[k] = std::move(row);
        }
    };
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < std::max(1, workers) - 1; ++i) pool.emplace_back(traj_worker);
        traj_worker();
        for (auto& th : pool) th.join();
    }

    auto stat_value = [&](const Configuration& c, size_t which) {
        if (which < test_sites.size()) return c[test_sites[which]] == m.q - 1;
        long long mag = 0;  // top-spin count above half the sites
        for (int v : test_sites) mag += c[v] == m.q - 1;
        return mag * 2 >= static_cast<long long>(test_sites.size());
    };
    const size_t n_stats = test_sites.size() + 1;
    const double z = 1.959963984540054;
    std::vector<double> ref_mean(n_stats, 0.0);
    for (int k = 0; k < R; ++k)
        for (size_t a = 0; a < n_stats; ++a) ref_mean[a] += stat_value(ref[k], a);
    for (auto& x : ref_mean) x /= R;

    b.lower = 0.0;
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        double best = 0.0;
        for (size_t a = 0; a < n_stats; ++a) {
            double mean = 0.0;
            for (int k = 0; k < R; ++k) mean += stat_value(snap[k][gi], a);
            mean /= R;
            const double se_t = std::sqrt(std::max(mean * (1 - mean), 0.25 / R) / R);
            const double se_r =
                std::sqrt(std::max(ref_mean[a] * (1 - ref_mean[a]), 0.25 / R) / R);
            best = std::max(best, std::abs(mean - ref_mean[a]) - z * (se_t + se_r));
        }
        if (best > eps) b.lower = grid[gi];
    }
    if (b.lower > b.upper) {  // statistical crossing: report the safe order
        b.note = "lower/upper estimates crossed; clamped";
        b.lower = b.upper;
    } else {
        b.note = upper_found ? "coupling upper + projected statistic lower"
                             : "coupling bound did not reach eps on this grid";
    }
    return b;
}

BlockProfile block_profile(int dim, int side, int plus_axes, double beta, double field,
                           const std::vector<double>& grid, size_t state_budget) {
    BlockSpec spec;
    spec.dim = dim;
    spec.side = side;
    spec.plus_axes = plus_axes;
    spec.plus_spin = 1;
    GraphPtr g = build_block_relaxed(spec);
    SpinModel m = make_ising(g, beta, field);
    GeneratorMatrix gen = build_generator(m, DynKind::HeatBath, state_budget);

    BlockProfile prof;
    prof.states = gen.n_states;
    prof.inner_block = g->inner_block;
    prof.lambda = spectral_gap(gen);
    prof.times = grid;
    prof.m_jt.assign(grid.size(), 0.0);

    // projection of a state-space distribution onto the inner block
    const auto& free_sites = gen.gibbs.free_sites;
    std::vector<int> digit_of(m.n_sites(), -1);
    for (size_t i = 0; i < free_sites.size(); ++i) digit_of[free_sites[i]] = static_cast<int>(i);
    std::vector<int> block_digits;
    for (int v : g->inner_block) {
        if (digit_of[v] < 0) throw std::logic_error("block_profile: clamped inner-block site");
        block_digits.push_back(digit_of[v]);
    }
    const size_t proj_states = size_t{1} << block_digits.size();
    auto project = [&](const std::vector<double>& nu) {
        std::vector<double> out(proj_states, 0.0);
        for (size_t id = 0; id < nu.size(); ++id) {
            if (nu[id] == 0.0) continue;
            size_t key = 0;
            for (int d : block_digits) {
                const size_t place = free_sites.size() - 1 - static_cast<size_t>(d);
                key = (key << 1) | ((id >> place) & 1);
            }
            out[key] += nu[id];
        }
        return out;
    };
    const std::vector<double> pi_b = project(gen.pi);
    for (bool top : {false, true}) {
        std::vector<double> nu = point_mass(gen, gen.gibbs.index_of(m.extreme_start(top)));
        double prev_t = 0.0;
        for (size_t gi = 0; gi < grid.size(); ++gi) {
            nu = heat_kernel(gen, nu, grid[gi] - prev_t);
            prev_t = grid[gi];
            const double l2 = distances(project(nu), pi_b).l2;
            prof.m_jt[gi] = std::max(prof.m_jt[gi], l2 * l2);
        }
    }
    return prof;
}

}  // namespace cutoff
