#include "cutoff/support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "cutoff/errors.hpp"

namespace cutoff {

int compute_r(int delta, double alpha_hat, int n) {
    if (!(alpha_hat > 0)) throw InvalidArgument("compute_r: need alpha_hat > 0");
    if (delta < 1 || n < 1) throw InvalidArgument("compute_r: need delta >= 1, n >= 1");
    return static_cast<int>(std::floor(10.0 * delta * std::log(static_cast<double>(n)) /
                                       alpha_hat));
}

int compute_rho(const Graph& g, int r, Metric metric) {
    int rho = 0;
    for (int v = 0; v < g.n(); ++v) {
        if (g.is_clamped(v)) continue;
        rho = std::max(rho, static_cast<int>(g.ball(v, r, metric).size()));
    }
    return rho;
}

SparseParams SparseParams::from_inputs(int delta, double alpha_hat, int n, double rho) {
    if (!(alpha_hat > 0)) throw InvalidArgument("sparse params: need alpha_hat > 0");
    SparseParams p;
    p.delta = delta;
    p.alpha_hat = alpha_hat;
    p.n = n;
    p.rho = rho;
    p.r = compute_r(delta, alpha_hat, n);
    const double logn = std::log(static_cast<double>(n));
    p.max_size = rho * rho * rho * logn;
    p.max_diameter = 0.5 * logn * logn;
    p.min_separation = 25.0 * delta * logn / alpha_hat;
    return p;
}

SparseParams SparseParams::explicit_params(double max_size, double max_diameter,
                                           double min_separation) {
    SparseParams p;
    p.max_size = max_size;
    p.max_diameter = max_diameter;
    p.min_separation = min_separation;
    return p;
}

SparseVerdict check_sparse(const Graph& g, const std::vector<int>& lambda,
                           const SparseParams& params, MergeRule rule) {
    SparseVerdict v;
    v.sparse = true;
    if (lambda.empty()) return v;
    int merge_dist = rule == MergeRule::FiveR
                         ? 5 * params.r
                         : static_cast<int>(std::ceil(params.min_separation)) - 1;
    merge_dist = std::max(merge_dist, 0);
    v.parts = g.components(lambda, merge_dist);
    for (size_t i = 0; i < v.parts.size(); ++i) {
        const auto& part = v.parts[i];
        if (static_cast<double>(part.size()) > params.max_size) {
            v.size_ok = false;
            if (v.violation.empty())
                v.violation = "component " + std::to_string(i) + " has " +
                              std::to_string(part.size()) + " vertices > max " +
                              std::to_string(params.max_size);
        }
        int diam = g.diameter(part);
        if (diam == kInfDistance || static_cast<double>(diam) > params.max_diameter) {
            v.diameter_ok = false;
            if (v.violation.empty())
                v.violation = "component " + std::to_string(i) + " has diameter " +
                              std::to_string(diam) + " > max " +
                              std::to_string(params.max_diameter);
        }
    }
    for (size_t i = 0; i < v.parts.size() && v.separation_ok; ++i) {
        for (size_t j = i + 1; j < v.parts.size() && v.separation_ok; ++j) {
            int sep = kInfDistance;
            for (int u : v.parts[i]) {
                const auto d = g.distances_from(u);
                for (int w : v.parts[j]) sep = std::min(sep, d[w]);
            }
            if (static_cast<double>(sep) < params.min_separation) {
                v.separation_ok = false;
                if (v.violation.empty())
                    v.violation = "components " + std::to_string(i) + "," + std::to_string(j) +
                                  " at distance " + std::to_string(sep) + " < min " +
                                  std::to_string(params.min_separation);
            }
        }
    }
    v.sparse = v.size_ok && v.diameter_ok && v.separation_ok;
    return v;
}

BarrierSystem make_barrier(const SpinModel& m, int radius, Metric metric) {
    if (radius < 0) throw InvalidArgument("barrier: need radius >= 0");
    if (metric == Metric::LInfinity && !m.graph->has_coords())
        throw InvalidArgument("barrier: l-infinity metric requires lattice coordinates");
    return BarrierSystem{&m, radius, metric};
}

BarrierSystem make_barrier(const SpinModel& m, int radius) {
    return make_barrier(m, radius,
                        m.graph->has_coords() ? Metric::LInfinity : Metric::Graph);
}

int BallModel::local_of(int global) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), global);
    if (it == vertices.end() || *it != global) return -1;
    return static_cast<int>(it - vertices.begin());
}

BallModel induced_ball_model(const SpinModel& m, int center, int radius, Metric metric) {
    BallModel bm;
    bm.vertices = m.graph->ball(center, radius, metric);
    std::sort(bm.vertices.begin(), bm.vertices.end());
    bm.center_local = bm.local_of(center);

    auto sub = std::make_shared<Graph>();
    const int k = static_cast<int>(bm.vertices.size());
    sub->adj.resize(k);
    sub->clamp.resize(k);
    if (m.graph->has_coords()) {
        sub->dim = m.graph->dim;
        sub->periodic_extent = m.graph->periodic_extent;
        sub->coords.resize(static_cast<size_t>(k) * sub->dim);
    }
    SpinModel out;
    out.kind = m.kind;
    out.q = m.q;
    out.ising_beta = m.ising_beta;
    out.ising_field = m.ising_field;
    out.potts_beta = m.potts_beta;
    out.fugacity = m.fugacity;
    out.fields.resize(k);
    for (int i = 0; i < k; ++i) {
        const int v = bm.vertices[i];
        sub->clamp[i] = m.graph->clamp[v];
        if (m.graph->has_coords())
            for (int a = 0; a < sub->dim; ++a)
                sub->coords[static_cast<size_t>(i) * sub->dim + a] = m.graph->coord(v)[a];
        if (!m.fields.empty() && !m.fields[v].empty()) out.fields[i] = m.fields[v];
        for (int y : m.graph->adj[v]) {
            int iy = bm.local_of(y);
            if (iy < 0 || iy <= i) continue;  // severed or already added
            sub->adj[i].push_back(iy);
            sub->adj[iy].push_back(i);
            out.edges.emplace_back(i, iy);
            const bool flip = v > y;
            const auto& t = m.tables[m.edge_table[m.edge_id(v, y)]];
            if (!flip) {
                out.tables.push_back(t);
            } else {
                InteractionTable nt{m.q, std::vector<double>(static_cast<size_t>(m.q) * m.q)};
                for (int x = 0; x < m.q; ++x)
                    for (int yy = 0; yy < m.q; ++yy)
                        nt.w[static_cast<size_t>(x) * m.q + yy] = t(yy, x);
                out.tables.push_back(std::move(nt));
            }
        }
    }
    // edges were appended in sorted order already (outer loop over i ascending)
    out.edge_table.resize(out.edges.size());
    std::iota(out.edge_table.begin(), out.edge_table.end(), 0);
    sub->validate();
    out.graph = sub;
    out.validate();
    bm.model = std::move(out);
    return bm;
}

namespace {

// Per-site lists of ball centers whose ball contains the site (metric balls
// are symmetric, so these are the free vertices of the site's own ball).
std::vector<std::vector<int>> centers_by_site(const Graph& g, int radius, Metric metric) {
    std::vector<std::vector<int>> out(g.n());
    for (int v = 0; v < g.n(); ++v) {
        if (g.is_clamped(v)) continue;
        for (int u : g.ball(v, radius, metric))
            if (!g.is_clamped(u)) out[v].push_back(u);
    }
    return out;
}

UpdateEvent localized(const UpdateEvent& e, int local_site) {
    UpdateEvent le = e;
    le.site = local_site;
    return le;
}

struct GenericBalls {
    std::vector<BallModel> balls;        // indexed by center vertex id (empty for clamps)
    std::vector<CouplingRules> rules;
    std::vector<std::vector<int>> containing;  // per site
};

GenericBalls build_generic(const BarrierSystem& b, Policy policy, bool need_rules) {
    const SpinModel& m = *b.model;
    GenericBalls gb;
    gb.balls.resize(m.n_sites());
    gb.rules.resize(m.n_sites());
    gb.containing = centers_by_site(*m.graph, b.radius, b.metric);
    for (int u = 0; u < m.n_sites(); ++u) {
        if (m.graph->is_clamped(u)) continue;
        gb.balls[u] = induced_ball_model(m, u, b.radius, b.metric);
        if (need_rules) gb.rules[u] = make_rules(gb.balls[u].model, policy);
    }
    return gb;
}

}  // namespace

Configuration barrier_evolve(const BarrierSystem& b, const Configuration& sigma0,
                             const UpdateSequence& w) {
    const SpinModel& m = *b.model;
    if (!m.feasible(sigma0)) throw InfeasibleError("barrier_evolve: infeasible start");
    const bool policy_map = w.policy != Policy::Monotone;
    GenericBalls gb = build_generic(b, w.policy, policy_map);

    std::vector<Configuration> state(m.n_sites());
    for (int u = 0; u < m.n_sites(); ++u) {
        if (m.graph->is_clamped(u)) continue;
        const auto& bm = gb.balls[u];
        Configuration cfg(bm.vertices.size());
        for (size_t i = 0; i < bm.vertices.size(); ++i) cfg[i] = sigma0[bm.vertices[i]];
        state[u] = std::move(cfg);
    }
    for (const auto& e : w.events) {
        for (int u : gb.containing[e.site]) {
            const auto& bm = gb.balls[u];
            int local = bm.local_of(e.site);
            if (policy_map)
                apply_event_policy(bm.model, gb.rules[u], state[u], localized(e, local));
            else
                apply_event(bm.model, state[u], localized(e, local), w.kind);
        }
    }
    Configuration out = sigma0;
    for (int u = 0; u < m.n_sites(); ++u)
        if (!m.graph->is_clamped(u)) out[u] = state[u][gb.balls[u].center_local];
    return out;
}

namespace {

// -------------------------------------------------------------------------
// fast path: monotone coupling on an unclamped coordinate lattice with
// L-infinity balls; ball-local chains live in dense (2r+1)^d windows

struct LatticeFast {
    const SpinModel* m;
    int r, dim, w1;                 // window side = 2r+1
    size_t wsize;                   // w1^dim
    std::vector<int> lo, hi;        // axis bounds of the lattice
    std::vector<uint8_t> lower, upper;  // n * wsize, 255 = absent cell
    std::vector<int> disagree;      // per ball
    std::vector<double> freeze_t;   // per ball, -1 while live
    std::vector<std::vector<int>> containing;

    int wrap_delta(int d, int axis) const {
        int ext = m->graph->periodic_extent[axis];
        if (ext > 0) {
            d %= ext;
            if (d < -ext / 2) d += ext;
            if (d > ext / 2) d -= ext;
        }
        return d;
    }

    // local window index of site y inside the ball centered at u, -1 if outside
    int local_index(int u, int y) const {
        const int* cu = m->graph->coord(u);
        const int* cy = m->graph->coord(y);
        int idx = 0;
        for (int k = 0; k < dim; ++k) {
            int d = wrap_delta(cy[k] - cu[k], k);
            if (d < -r || d > r) return -1;
            idx = idx * w1 + (d + r);
        }
        return idx;
    }
};

LatticeFast fast_init(const BarrierSystem& b) {
    const SpinModel& m = *b.model;
    const Graph& g = *m.graph;
    LatticeFast f;
    f.m = &m;
    f.r = b.radius;
    f.dim = g.dim;
    f.w1 = 2 * b.radius + 1;
    f.wsize = 1;
    for (int k = 0; k < f.dim; ++k) f.wsize *= static_cast<size_t>(f.w1);
    f.lo.assign(f.dim, 0);
    f.hi.assign(f.dim, 0);
    for (int k = 0; k < f.dim; ++k) {
        int mn = g.coord(0)[k], mx = g.coord(0)[k];
        for (int v = 1; v < g.n(); ++v) {
            mn = std::min(mn, g.coord(v)[k]);
            mx = std::max(mx, g.coord(v)[k]);
        }
        f.lo[k] = mn;
        f.hi[k] = mx;
    }
    const size_t n = static_cast<size_t>(g.n());
    f.lower.assign(n * f.wsize, 255);
    f.upper.assign(n * f.wsize, 255);
    f.disagree.assign(g.n(), 0);
    f.freeze_t.assign(g.n(), -1.0);
    f.containing = centers_by_site(g, b.radius, b.metric);
    for (int u = 0; u < g.n(); ++u) {
        for (int y : g.ball(u, b.radius, Metric::LInfinity)) {
            int idx = f.local_index(u, y);
            f.lower[u * f.wsize + idx] = 0;
            f.upper[u * f.wsize + idx] = 1;
            ++f.disagree[u];
        }
    }
    return f;
}

void fast_apply(LatticeFast& f, const UpdateEvent& e) {
    const SpinModel& m = *f.m;
    const Graph& g = *m.graph;
    const int v = e.site;
    for (int u : f.containing[v]) {
        if (f.freeze_t[u] >= 0.0) continue;
        uint8_t* lo = f.lower.data() + static_cast<size_t>(u) * f.wsize;
        uint8_t* hi = f.upper.data() + static_cast<size_t>(u) * f.wsize;
        const int iv = f.local_index(u, v);
        double wl[2] = {m.field(v, 0), m.field(v, 1)};
        double wh[2] = {wl[0], wl[1]};
        for (int y : g.adj[v]) {
            int iy = f.local_index(u, y);
            if (iy < 0 || lo[iy] == 255) continue;  // severed by the barrier
            for (int s = 0; s < 2; ++s) {
                wl[s] += m.interaction(v, y, s, lo[iy]);
                wh[s] += m.interaction(v, y, s, hi[iy]);
            }
        }
        const double pl0 = 1.0 / (1.0 + std::exp(wl[1] - wl[0]));
        const double ph0 = 1.0 / (1.0 + std::exp(wh[1] - wh[0]));
        const uint8_t nl = e.u < pl0 ? 0 : 1;
        const uint8_t nh = e.u < ph0 ? 0 : 1;
        f.disagree[u] += (nl != nh ? 1 : 0) - (lo[iv] != hi[iv] ? 1 : 0);
        lo[iv] = nl;
        hi[iv] = nh;
        if (f.disagree[u] == 0) f.freeze_t[u] = e.t;
    }
}

bool fast_center_unknown(const LatticeFast& f, int u) {
    if (f.freeze_t[u] >= 0.0) return false;
    int c0 = 0;
    for (int k = 0; k < f.dim; ++k) c0 = c0 * f.w1 + f.r;
    return f.lower[u * f.wsize + c0] != f.upper[u * f.wsize + c0];
}

SupportFrame fast_frame(const LatticeFast& f, const std::vector<std::vector<int>>& containing,
                        double t, int n, int free_count) {
    SupportFrame frame;
    frame.t = t;
    frame.in_support.assign(n, 0);
    frame.freeze_age.assign(n, -1.0);
    int covered = 0;
    for (int u = 0; u < n; ++u) {
        if (f.freeze_t[u] >= 0.0) frame.freeze_age[u] = t - f.freeze_t[u];
        if (!fast_center_unknown(f, u)) continue;
        for (int y : containing[u])  // symmetric: the cover of ball u
            if (!frame.in_support[y]) {
                frame.in_support[y] = 1;
                ++covered;
            }
    }
    frame.support_fraction = free_count ? static_cast<double>(covered) / free_count : 0.0;
    return frame;
}

bool fast_path_ok(const BarrierSystem& b, Policy policy) {
    const Graph& g = *b.model->graph;
    return policy == Policy::Monotone && b.metric == Metric::LInfinity && g.has_coords() &&
           g.interior_count() == g.n() && b.model->q == 2;
}

}  // namespace

SupersetResult support_superset(const BarrierSystem& b, const UpdateSequence& w, Policy policy,
                                const SparseParams& params, const SupersetOptions& opts) {
    const SpinModel& m = *b.model;
    const Graph& g = *m.graph;
    const int n = g.n();
    const int free_count = g.interior_count();
    SupersetResult out;
    out.report.exact = false;
    out.report.horizon = w.horizon;
    out.report.radius = b.radius;

    auto finish = [&](const SupportFrame& final_frame) {
        for (int v = 0; v < n; ++v)
            if (final_frame.in_support[v] && !g.is_clamped(v))
                out.report.support.push_back(v);
        out.report.verdict = check_sparse(g, out.report.support, params);
    };

    if (fast_path_ok(b, policy)) {
        make_rules(m, policy);  // validates attractiveness
        LatticeFast f = fast_init(b);
        size_t next_frame = 0;
        auto frames_below = [&](double t) {
            while (next_frame < opts.frame_times.size() && opts.frame_times[next_frame] < t) {
                out.frames.push_back(fast_frame(f, f.containing, opts.frame_times[next_frame],
                                                n, free_count));
                ++next_frame;
            }
        };
        for (const auto& e : w.events) {
            frames_below(e.t);
            fast_apply(f, e);
        }
        frames_below(std::numeric_limits<double>::infinity());
        finish(fast_frame(f, f.containing, w.horizon, n, free_count));
        return out;
    }

    GenericBalls gb = build_generic(b, policy, true);
    std::vector<EnvelopeState> env(n);
    std::vector<double> freeze_t(n, -1.0);
    for (int u = 0; u < n; ++u) {
        if (g.is_clamped(u)) continue;
        env[u] = make_envelope(gb.balls[u].model, policy);
        if (env[u].unknown == 0) freeze_t[u] = 0.0;
    }
    auto center_unknown = [&](int u) {
        return !env[u].determined[gb.balls[u].center_local];
    };
    auto snapshot = [&](double t) {
        SupportFrame frame;
        frame.t = t;
        frame.in_support.assign(n, 0);
        frame.freeze_age.assign(n, -1.0);
        int covered = 0;
        for (int u = 0; u < n; ++u) {
            if (g.is_clamped(u)) continue;
            if (freeze_t[u] >= 0.0) frame.freeze_age[u] = t - freeze_t[u];
            if (!center_unknown(u)) continue;
            for (int y : gb.balls[u].vertices)
                if (!frame.in_support[y]) {
                    frame.in_support[y] = 1;
                    ++covered;
                }
        }
        frame.support_fraction = free_count ? static_cast<double>(covered) / free_count : 0.0;
        return frame;
    };
    size_t next_frame = 0;
    auto frames_below = [&](double t) {
        while (next_frame < opts.frame_times.size() && opts.frame_times[next_frame] < t) {
            out.frames.push_back(snapshot(opts.frame_times[next_frame]));
            ++next_frame;
        }
    };
    for (const auto& e : w.events) {
        frames_below(e.t);
        for (int u : gb.containing[e.site]) {
            if (freeze_t[u] >= 0.0) continue;
            int local = gb.balls[u].local_of(e.site);
            envelope_apply(gb.balls[u].model, gb.rules[u], env[u], localized(e, local));
            if (env[u].unknown == 0) freeze_t[u] = e.t;
        }
    }
    frames_below(std::numeric_limits<double>::infinity());
    finish(snapshot(w.horizon));
    return out;
}

std::vector<int> map_support(const SpinModel& m, const SpinMap& f, size_t pair_budget) {
    std::vector<int> free_sites;
    for (int v = 0; v < m.n_sites(); ++v)
        if (!m.graph->is_clamped(v)) free_sites.push_back(v);
    const size_t k = free_sites.size();
    double states = std::pow(static_cast<double>(m.q), static_cast<double>(k));
    if (states > static_cast<double>(pair_budget))
        throw BudgetExceeded("map_support: state space over budget");

    Configuration sigma(m.n_sites(), 0);
    for (int v = 0; v < m.n_sites(); ++v)
        if (m.graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(m.graph->clamp[v]);

    std::vector<int> support;
    for (size_t vi = 0; vi < k; ++vi) {
        const int v = free_sites[vi];
        bool in_support = false;
        std::vector<int> others;
        for (size_t j = 0; j < k; ++j)
            if (j != vi) others.push_back(free_sites[j]);
        std::vector<int> spins(others.size(), 0);
        while (!in_support) {
            for (size_t j = 0; j < others.size(); ++j)
                sigma[others[j]] = static_cast<uint8_t>(spins[j]);
            sigma[v] = 0;
            Configuration base = f(sigma);
            for (int s = 1; s < m.q && !in_support; ++s) {
                sigma[v] = static_cast<uint8_t>(s);
                Configuration alt = f(sigma);
                for (int w : free_sites)
                    if (base[w] != alt[w]) {
                        in_support = true;
                        break;
                    }
            }
            size_t j = 0;
            while (j < spins.size() && ++spins[j] == m.q) spins[j++] = 0;
            if (j == spins.size()) break;
        }
        if (in_support) support.push_back(v);
    }
    return support;
}

namespace {

// evolve without the feasibility gate: the support definition ranges over
// every input in Sigma^V, feasible or not
Configuration evolve_any(const SpinModel& m, const CouplingRules* rules, Configuration sigma,
                         const UpdateSequence& w) {
    for (const auto& e : w.events) {
        if (rules)
            apply_event_policy(m, *rules, sigma, e);
        else
            apply_event(m, sigma, e, w.kind);
    }
    return sigma;
}

}  // namespace

SupportReport support_exact(const SpinModel& m, const UpdateSequence& w,
                            const SparseParams& params, size_t pair_budget) {
    std::optional<CouplingRules> rules;
    if (w.policy != Policy::Monotone) rules = make_rules(m, w.policy);
    SpinMap f = [&](const Configuration& sigma) {
        return evolve_any(m, rules ? &*rules : nullptr, sigma, w);
    };
    SupportReport rep;
    rep.exact = true;
    rep.horizon = w.horizon;
    rep.support = map_support(m, f, pair_budget);
    rep.verdict = check_sparse(*m.graph, rep.support, params);
    return rep;
}

SupportReport support_exact_barrier(const BarrierSystem& b, const UpdateSequence& w,
                                    const SparseParams& params, size_t pair_budget) {
    const SpinModel& m = *b.model;
    const bool policy_map = w.policy != Policy::Monotone;
    GenericBalls gb = build_generic(b, w.policy, policy_map);
    SpinMap f = [&](const Configuration& sigma) {
        std::vector<Configuration> state(m.n_sites());
        for (int u = 0; u < m.n_sites(); ++u) {
            if (m.graph->is_clamped(u)) continue;
            const auto& bm = gb.balls[u];
            Configuration cfg(bm.vertices.size());
            for (size_t i = 0; i < bm.vertices.size(); ++i) cfg[i] = sigma[bm.vertices[i]];
            state[u] = std::move(cfg);
        }
        for (const auto& e : w.events) {
            for (int u : gb.containing[e.site]) {
                const auto& bm = gb.balls[u];
                int local = bm.local_of(e.site);
                if (policy_map)
                    apply_event_policy(bm.model, gb.rules[u], state[u], localized(e, local));
                else
                    apply_event(bm.model, state[u], localized(e, local), w.kind);
            }
        }
        Configuration out = sigma;
        for (int u = 0; u < m.n_sites(); ++u)
            if (!m.graph->is_clamped(u)) out[u] = state[u][gb.balls[u].center_local];
        return out;
    };
    SupportReport rep;
    rep.exact = true;
    rep.horizon = w.horizon;
    rep.radius = b.radius;
    rep.support = map_support(m, f, pair_budget);
    rep.verdict = check_sparse(*m.graph, rep.support, params);
    return rep;
}

std::string frame_to_pgm(const Graph& g, const SupportFrame& frame, bool binary) {
    if (g.dim != 2) throw InvalidArgument("frame_to_pgm: needs a 2-d lattice");
    int r0 = kInfDistance, r1 = -kInfDistance, c0 = kInfDistance, c1 = -kInfDistance;
    for (int v = 0; v < g.n(); ++v) {
        if (g.is_clamped(v)) continue;
        r0 = std::min(r0, g.coord(v)[0]);
        r1 = std::max(r1, g.coord(v)[0]);
        c0 = std::min(c0, g.coord(v)[1]);
        c1 = std::max(c1, g.coord(v)[1]);
    }
    const int rows = r1 - r0 + 1, cols = c1 - c0 + 1;
    std::vector<uint8_t> pix(static_cast<size_t>(rows) * cols, 0);
    const double horizon = std::max(frame.t, 1e-12);
    for (int v = 0; v < g.n(); ++v) {
        if (g.is_clamped(v)) continue;
        const int rr = g.coord(v)[0] - r0, cc = g.coord(v)[1] - c0;
        uint8_t gray;
        if (frame.in_support[v]) {
            gray = 255;  // support sites
        } else if (frame.freeze_age[v] >= 0.0) {
            // longer-frozen balls darken in 16 buckets
            int bucket = std::min(15, static_cast<int>(16.0 * frame.freeze_age[v] / horizon));
            gray = static_cast<uint8_t>(200 - 10 * bucket);
        } else {
            gray = 220;  // live ball whose center currently agrees
        }
        pix[static_cast<size_t>(rr) * cols + cc] = gray;
    }
    std::ostringstream out;
    if (binary) {
        out << "P5\n" << cols << " " << rows << "\n255\n";
        out.write(reinterpret_cast<const char*>(pix.data()),
                  static_cast<std::streamsize>(pix.size()));
    } else {
        out << "P2\n" << cols << " " << rows << "\n255\n";
        for (int rr = 0; rr < rows; ++rr) {
            for (int cc = 0; cc < cols; ++cc)
                out << (cc ? " " : "") << static_cast<int>(pix[static_cast<size_t>(rr) * cols + cc]);
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace cutoff
