#include "cutoff/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "cutoff/errors.hpp"

namespace cutoff {

std::string to_string(DynKind k) { return k == DynKind::HeatBath ? "hb" : "mh"; }
std::string to_string(Policy p) {
    switch (p) {
        case Policy::Monotone: return "mono";
        case Policy::Threshold: return "thresh";
        default: return "perm";
    }
}
DynKind dyn_kind_from(const std::string& s) {
    if (s == "hb" || s == "heatbath" || s == "heat-bath") return DynKind::HeatBath;
    if (s == "mh" || s == "metropolis") return DynKind::Metropolis;
    throw InvalidArgument("unknown dynamics kind: " + s);
}
Policy policy_from(const std::string& s) {
    if (s == "mono" || s == "monotone") return Policy::Monotone;
    if (s == "thresh" || s == "threshold") return Policy::Threshold;
    if (s == "perm" || s == "permutation") return Policy::Permutation;
    throw InvalidArgument("unknown coupling policy: " + s);
}

UpdateSequence sample_updates(const Graph& g, double horizon, uint64_t seed, DynKind kind,
                              Policy policy, int q) {
    if (horizon < 0) throw InvalidArgument("sample_updates: negative horizon");
    if (q < 2) throw InvalidArgument("sample_updates: need q >= 2");
    UpdateSequence w;
    w.seed = seed;
    w.kind = kind;
    w.policy = policy;
    w.horizon = horizon;
    for (int x = 0; x < g.n(); ++x) {
        if (g.is_clamped(x)) continue;
        CounterRng gap = make_rng(seed, RngStream::EventGap, static_cast<uint64_t>(x));
        CounterRng uni = make_rng(seed, RngStream::EventUniform, static_cast<uint64_t>(x));
        CounterRng aux = make_rng(seed, RngStream::EventAux, static_cast<uint64_t>(x));
        double t = 0.0;
        for (uint64_t k = 0;; ++k) {
            t += gap.exponential(k);
            if (t >= horizon) break;
            UpdateEvent e;
            e.t = t;
            e.site = x;
            e.u = uni.uniform(k);
            if (kind == DynKind::Metropolis)
                e.proposal = static_cast<int>(aux.below(k, static_cast<uint64_t>(q)));
            if (policy == Policy::Permutation) {
                e.perm.resize(q);
                std::iota(e.perm.begin(), e.perm.end(), uint8_t{0});
                for (int i = q - 1; i > 0; --i) {
                    uint64_t j = aux.below(k * static_cast<uint64_t>(q) + i,
                                           static_cast<uint64_t>(i) + 1);
                    std::swap(e.perm[i], e.perm[j]);
                }
            }
            w.events.push_back(std::move(e));
        }
    }
    std::sort(w.events.begin(), w.events.end(), [](const UpdateEvent& a, const UpdateEvent& b) {
        return a.t != b.t ? a.t < b.t : a.site < b.site;
    });
    return w;
}

void apply_event(const SpinModel& m, Configuration& sigma, const UpdateEvent& e, DynKind kind) {
    static thread_local std::vector<double> p;
    m.conditional_into(sigma, e.site, p);
    if (kind == DynKind::HeatBath) {
        double cum = 0.0;
        for (int s = 0; s < m.q; ++s) {
            cum += p[s];
            if (e.u < cum || s == m.q - 1) {
                sigma[e.site] = static_cast<uint8_t>(s);
                return;
            }
        }
        return;
    }
    // Metropolis: accept the proposal iff u <= conditional ratio
    const int cur = sigma[e.site];
    const int prop = e.proposal;
    if (prop < 0 || prop >= m.q) throw InvalidArgument("evolve: event lacks a proposal spin");
    if (prop == cur) return;
    if (p[cur] <= 0.0) {  // current state infeasible: always move
        sigma[e.site] = static_cast<uint8_t>(prop);
        return;
    }
    double ratio = p[prop] / p[cur];
    if (e.u <= std::min(1.0, ratio)) sigma[e.site] = static_cast<uint8_t>(prop);
}

Configuration evolve(const SpinModel& m, Configuration sigma, const UpdateSequence& w) {
    if (!m.feasible(sigma)) throw InfeasibleError("evolve: infeasible initial configuration");
    for (const auto& e : w.events) apply_event(m, sigma, e, w.kind);
    return sigma;
}

CouplingRules make_rules(const SpinModel& m, Policy policy) {
    CouplingRules rules;
    rules.policy = policy;
    switch (policy) {
        case Policy::Monotone: {
            if (m.q != 2)
                throw InvalidArgument("monotone policy: needs a two-spin model");
            for (size_t e = 0; e < m.edges.size(); ++e) {
                const auto& t = m.tables[m.edge_table[e]];
                if (t(0, 0) + t(1, 1) < t(0, 1) + t(1, 0))
                    throw InvalidArgument("monotone policy: interactions are not attractive");
            }
            break;
        }
        case Policy::Threshold: {
            ZetaResult z = zeta(m);
            if (!(z.value > 0))
                throw InvalidArgument("threshold policy: zeta = 0 for this model");
            rules.zeta = z.value;
            rules.floor_pm = z.floor;
            rules.floor_cdf.resize(m.q);
            double cum = 0.0;
            for (int s = 0; s < m.q; ++s) {
                cum += z.floor[s];
                rules.floor_cdf[s] = cum;
            }
            break;
        }
        case Policy::Permutation: {
            if (m.kind != ModelKind::Coloring)
                throw InvalidArgument("permutation policy: only proper colorings");
            break;
        }
    }
    return rules;
}

namespace {

int floor_sample(const CouplingRules& rules, double u) {
    // u in [0, zeta): inverse CDF of floor masses laid out in canonical order
    for (size_t s = 0; s + 1 < rules.floor_cdf.size(); ++s)
        if (u < rules.floor_cdf[s]) return static_cast<int>(s);
    return static_cast<int>(rules.floor_cdf.size()) - 1;
}

int residual_sample(const SpinModel& m, const CouplingRules& rules, const std::vector<double>& p,
                    double uu) {
    // residual masses (p - floor) / (1 - zeta) in canonical order
    const double denom = 1.0 - rules.zeta;
    double cum = 0.0;
    for (int s = 0; s < m.q; ++s) {
        cum += std::max(0.0, p[s] - rules.floor_pm[s]) / denom;
        if (uu < cum) return s;
    }
    return m.q - 1;
}

int permutation_choice(const std::vector<uint8_t>& perm, uint64_t blocked_mask) {
    for (uint8_t c : perm)
        if (!(blocked_mask >> c & 1)) return c;
    return -1;
}

}  // namespace

void apply_event_policy(const SpinModel& m, const CouplingRules& rules, Configuration& sigma,
                        const UpdateEvent& e) {
    switch (rules.policy) {
        case Policy::Monotone:
            apply_event(m, sigma, e, DynKind::HeatBath);
            return;
        case Policy::Threshold: {
            if (e.u < rules.zeta) {
                sigma[e.site] = static_cast<uint8_t>(floor_sample(rules, e.u));
                return;
            }
            static thread_local std::vector<double> p;
            m.conditional_into(sigma, e.site, p);
            double uu = (e.u - rules.zeta) / (1.0 - rules.zeta);
            sigma[e.site] = static_cast<uint8_t>(residual_sample(m, rules, p, uu));
            return;
        }
        case Policy::Permutation: {
            uint64_t blocked = 0;
            for (int y : m.graph->adj[e.site]) blocked |= uint64_t{1} << sigma[y];
            int c = permutation_choice(e.perm, blocked);
            if (c < 0) throw InfeasibleError("permutation update: every color blocked");
            sigma[e.site] = static_cast<uint8_t>(c);
            return;
        }
    }
}

Configuration evolve_policy(const SpinModel& m, const CouplingRules& rules, Configuration sigma,
                            const UpdateSequence& w) {
    if (!m.feasible(sigma)) throw InfeasibleError("evolve: infeasible initial configuration");
    for (const auto& e : w.events) apply_event_policy(m, rules, sigma, e);
    return sigma;
}

EnvelopeState make_envelope(const SpinModel& m, Policy policy) {
    EnvelopeState env;
    const int n = m.n_sites();
    env.determined.assign(n, 0);
    env.value.assign(n, 0);
    env.unknown = 0;
    for (int v = 0; v < n; ++v) {
        if (m.graph->is_clamped(v)) {
            env.determined[v] = 1;
            env.value[v] = static_cast<uint8_t>(m.graph->clamp[v]);
        } else {
            ++env.unknown;
        }
    }
    if (policy == Policy::Monotone) {
        env.lower = m.extreme_start(false);
        env.upper = m.extreme_start(true);
    }
    return env;
}

void envelope_apply(const SpinModel& m, const CouplingRules& rules, EnvelopeState& env,
                    const UpdateEvent& e) {
    const int x = e.site;
    const bool was = env.determined[x];
    switch (rules.policy) {
        case Policy::Monotone: {
            apply_event(m, env.lower, e, DynKind::HeatBath);
            apply_event(m, env.upper, e, DynKind::HeatBath);
            bool now = env.lower[x] == env.upper[x];
            env.determined[x] = now;
            if (now) env.value[x] = env.lower[x];
            env.unknown += (was ? 1 : 0) - (now ? 1 : 0);
            return;
        }
        case Policy::Threshold: {
            bool now;
            if (e.u < rules.zeta) {
                env.value[x] = static_cast<uint8_t>(floor_sample(rules, e.u));
                now = true;
            } else {
                bool all_known = true;
                for (int y : m.graph->adj[x]) all_known = all_known && env.determined[y];
                if (all_known) {
                    static thread_local std::vector<double> p;
                    m.conditional_into(env.value, x, p);
                    double uu = (e.u - rules.zeta) / (1.0 - rules.zeta);
                    env.value[x] = static_cast<uint8_t>(residual_sample(m, rules, p, uu));
                    now = true;
                } else {
                    now = false;
                }
            }
            env.determined[x] = now;
            env.unknown += (was ? 1 : 0) - (now ? 1 : 0);
            return;
        }
        case Policy::Permutation: {
            uint64_t blocked = 0;
            std::vector<int> unknown_nb;
            for (int y : m.graph->adj[x]) {
                if (env.determined[y])
                    blocked |= uint64_t{1} << env.value[y];
                else
                    unknown_nb.push_back(y);
            }
            bool now = false;
            if (unknown_nb.empty()) {
                int c = permutation_choice(e.perm, blocked);
                if (c < 0) throw InfeasibleError("permutation update: every color blocked");
                env.value[x] = static_cast<uint8_t>(c);
                now = true;
            } else {
                // conservative: scan every completion of the unknown neighbors
                // (each may take any color) and require a unanimous outcome
                double combos = std::pow(static_cast<double>(m.q),
                                         static_cast<double>(unknown_nb.size()));
                if (combos <= 4096.0) {
                    int agreed = -2;
                    std::vector<int> fill(unknown_nb.size(), 0);
                    while (true) {
                        uint64_t mask = blocked;
                        for (int c : fill) mask |= uint64_t{1} << c;
                        int c = permutation_choice(e.perm, mask);
                        if (agreed == -2) agreed = c;
                        if (c != agreed) {
                            agreed = -1;
                            break;
                        }
                        size_t i = 0;
                        while (i < fill.size() && ++fill[i] == m.q) fill[i++] = 0;
                        if (i == fill.size()) break;
                    }
                    if (agreed >= 0) {
                        env.value[x] = static_cast<uint8_t>(agreed);
                        now = true;
                    }
                }
            }
            env.determined[x] = now;
            env.unknown += (was ? 1 : 0) - (now ? 1 : 0);
            return;
        }
    }
}

GrandResult grand_evolve(const SpinModel& m, const UpdateSequence& w, Policy policy,
                         const GrandOptions& opts) {
    CouplingRules rules = make_rules(m, policy);
    GrandResult out;
    out.free_sites = m.graph->interior_count();
    EnvelopeState env = make_envelope(m, policy);
    std::vector<Configuration> explicit_configs = opts.explicit_starts;
    for (const auto& c : explicit_configs)
        if (!m.feasible(c)) throw InfeasibleError("grand_evolve: infeasible explicit start");

    auto check = [&](const UpdateEvent* ev) {
        if (!opts.check_containment) return;
        for (const auto& c : explicit_configs) {
            for (int v = 0; v < m.n_sites(); ++v) {
                bool ok = true;
                if (policy == Policy::Monotone)
                    ok = env.lower[v] <= c[v] && c[v] <= env.upper[v];
                else if (env.determined[v])
                    ok = env.value[v] == c[v];
                if (!ok)
                    throw std::logic_error(
                        "grand coupling soundness violated at site " + std::to_string(v) +
                        (ev ? " after event t=" + std::to_string(ev->t) : std::string()));
            }
        }
    };

    size_t next_snap = 0;
    // a snapshot at time t reflects every event with clock time <= t
    auto snapshot_below = [&](double t) {
        while (next_snap < opts.snapshot_times.size() && opts.snapshot_times[next_snap] < t) {
            EnvelopeSnapshot snap;
            snap.t = opts.snapshot_times[next_snap];
            snap.unknown_fraction = env.unknown_fraction(out.free_sites);
            if (opts.keep_site_indicators) snap.determined = env.determined;
            out.snapshots.push_back(std::move(snap));
            ++next_snap;
        }
    };

    check(nullptr);
    for (const auto& e : w.events) {
        snapshot_below(e.t);
        envelope_apply(m, rules, env, e);
        for (auto& c : explicit_configs) apply_event_policy(m, rules, c, e);
        check(&e);
    }
    snapshot_below(std::numeric_limits<double>::infinity());
    out.final_state = std::move(env);
    out.final_explicit = std::move(explicit_configs);
    return out;
}

DisagreementCurve disagreement_curve(const SpinModel& m, const UpdateSequence& w, Policy policy,
                                     const std::vector<double>& grid,
                                     bool keep_site_indicators) {
    GrandOptions opts;
    opts.snapshot_times = grid;
    opts.keep_site_indicators = keep_site_indicators;
    GrandResult res = grand_evolve(m, w, policy, opts);
    DisagreementCurve curve;
    for (const auto& s : res.snapshots) {
        curve.times.push_back(s.t);
        curve.unknown_fraction.push_back(s.unknown_fraction);
        if (keep_site_indicators) {
            std::vector<uint8_t> unknown(s.determined.size());
            for (size_t i = 0; i < unknown.size(); ++i) unknown[i] = !s.determined[i];
            curve.site_unknown.push_back(std::move(unknown));
        }
    }
    return curve;
}

ContactCurve simulate_contact(const Graph& g, double zeta, const std::vector<double>& grid,
                              uint64_t seed) {
    if (!(zeta > 0.0) || zeta > 1.0) throw InvalidArgument("contact: need 0 < zeta <= 1");
    const int n = g.n();
    const double infect = 1.0 - zeta;
    int max_deg = 0;
    for (int v = 0; v < n; ++v) max_deg = std::max(max_deg, static_cast<int>(g.adj[v].size()));

    std::vector<uint8_t> infected(n, 1);
    std::vector<int> alive(n);           // infected sites, unordered
    std::vector<int> pos(n);             // site -> index in alive
    std::iota(alive.begin(), alive.end(), 0);
    std::iota(pos.begin(), pos.end(), 0);
    long long deg_sum = 0;
    for (int v = 0; v < n; ++v) deg_sum += static_cast<long long>(g.adj[v].size());

    auto remove_site = [&](int v) {
        int i = pos[v];
        int last = alive.back();
        alive[i] = last;
        pos[last] = i;
        alive.pop_back();
        infected[v] = 0;
        deg_sum -= static_cast<long long>(g.adj[v].size());
    };
    auto add_site = [&](int v) {
        pos[v] = static_cast<int>(alive.size());
        alive.push_back(v);
        infected[v] = 1;
        deg_sum += static_cast<long long>(g.adj[v].size());
    };

    CounterRng rng = make_rng(seed, RngStream::ContactProcess, 0);
    uint64_t ctr = 0;
    ContactCurve curve;
    double t = 0.0;
    size_t gi = 0;
    while (gi < grid.size()) {
        const double heal_rate = zeta * static_cast<double>(alive.size());
        const double infect_rate = infect * static_cast<double>(deg_sum);
        const double total = heal_rate + infect_rate;
        double t_next = total > 0 ? t + rng.exponential(ctr++) / total
                                  : std::numeric_limits<double>::infinity();
        while (gi < grid.size() && grid[gi] < t_next) {
            curve.times.push_back(grid[gi]);
            curve.infected.push_back(static_cast<int>(alive.size()));
            ++gi;
        }
        if (gi >= grid.size() || total <= 0) break;
        t = t_next;
        if (rng.uniform(ctr++) * total < heal_rate) {
            int v = alive[rng.below(ctr++, alive.size())];
            remove_site(v);
        } else {
            // degree-weighted source pick by rejection, then a uniform neighbor
            int u;
            do {
                u = alive[rng.below(ctr++, alive.size())];
            } while (rng.uniform(ctr++) * max_deg >= static_cast<double>(g.adj[u].size()));
            int v = g.adj[u][rng.below(ctr++, g.adj[u].size())];
            if (!infected[v]) add_site(v);
        }
    }
    while (gi < grid.size()) {  // extinct: zero forever
        curve.times.push_back(grid[gi]);
        curve.infected.push_back(static_cast<int>(alive.size()));
        ++gi;
    }
    return curve;
}

TvUpperCurve coupling_tv_upper(const SpinModel& m, Policy policy, const std::vector<double>& grid,
                               int replicas, uint64_t seed, int workers) {
    if (replicas < 1) throw InvalidArgument("coupling_tv_upper: need replicas >= 1");
    make_rules(m, policy);  // validate applicability up front
    std::vector<std::vector<uint8_t>> uncoalesced(replicas);
    workers = std::max(1, workers);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int k = next.fetch_add(1); k < replicas; k = next.fetch_add(1)) {
            uint64_t sub = make_rng(seed, RngStream::Replica, static_cast<uint64_t>(k)).bits(0);
            UpdateSequence w = sample_updates(*m.graph, grid.back(), sub, DynKind::HeatBath,
                                              policy, m.q);
            DisagreementCurve c = disagreement_curve(m, w, policy, grid);
            std::vector<uint8_t> row(grid.size());
            for (size_t i = 0; i < grid.size(); ++i) row[i] = c.unknown_fraction[i] > 0;
            uncoalesced[k] = std::move(row);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < workers - 1; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    TvUpperCurve out;
    out.times = grid;
    out.replicas = replicas;
    out.estimate.resize(grid.size());
    out.lo95.resize(grid.size());
    out.hi95.resize(grid.size());
    const double z = 1.959963984540054;  // 97.5% normal quantile
    for (size_t i = 0; i < grid.size(); ++i) {
        int fails = 0;
        for (int k = 0; k < replicas; ++k) fails += uncoalesced[k][i];
        double nn = replicas, x = fails;
        double phat = x / nn;
        // Wilson interval
        double denom = 1.0 + z * z / nn;
        double center = (phat + z * z / (2 * nn)) / denom;
        double half = z * std::sqrt(phat * (1 - phat) / nn + z * z / (4 * nn * nn)) / denom;
        out.estimate[i] = phat;
        out.lo95[i] = std::max(0.0, center - half);
        out.hi95[i] = std::min(1.0, center + half);
    }
    return out;
}

std::vector<double> geometric_grid(double t_min, double t_max, int points) {
    if (points < 1 || !(t_min > 0) || t_max < t_min)
        throw InvalidArgument("geometric_grid: bad parameters");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = t_max;
        return g;
    }
    double r = std::pow(t_max / t_min, 1.0 / (points - 1));
    double t = t_min;
    for (int i = 0; i < points; ++i, t *= r) g[i] = t;
    g.back() = t_max;
    return g;
}

std::vector<double> linear_grid(double t_max, int points) {
    if (points < 2 || !(t_max > 0)) throw InvalidArgument("linear_grid: bad parameters");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i) g[i] = t_max * i / (points - 1);
    return g;
}

// ---------------------------------------------------------------------------
// serialization

std::string serialize_updates(const UpdateSequence& w) {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", w.horizon);
    out << "seed=" << w.seed << " kind=" << to_string(w.kind)
        << " policy=" << to_string(w.policy) << " horizon=" << buf << "\n";
    for (const auto& e : w.events) {
        std::snprintf(buf, sizeof buf, "%.17g", e.t);
        out << buf << " " << e.site << " ";
        std::snprintf(buf, sizeof buf, "%.17g", e.u);
        out << buf;
        if (e.proposal >= 0) out << " " << e.proposal;
        if (!e.perm.empty()) {
            out << " ";
            for (size_t i = 0; i < e.perm.size(); ++i)
                out << (i ? "," : "") << static_cast<int>(e.perm[i]);
        }
        out << "\n";
    }
    return out.str();
}

UpdateSequence parse_updates(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("updates parse: empty input");
    UpdateSequence w;
    {
        char kind[16] = {0}, policy[16] = {0};
        unsigned long long seed = 0;
        double horizon = 0;
        if (std::sscanf(line.c_str(), "seed=%llu kind=%15s policy=%15s horizon=%lg", &seed, kind,
                        policy, &horizon) != 4)
            throw IoError("updates parse: bad header: " + line);
        w.seed = seed;
        w.kind = dyn_kind_from(kind);
        w.policy = policy_from(policy);
        w.horizon = horizon;
    }
    double prev_t = -1.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        UpdateEvent e;
        if (!(ls >> e.t >> e.site >> e.u)) throw IoError("updates parse: bad event: " + line);
        std::string aux;
        if (ls >> aux) {
            if (aux.find(',') == std::string::npos) {
                e.proposal = std::stoi(aux);
                if (ls >> aux) {
                    std::istringstream cs(aux);
                    std::string tok;
                    while (std::getline(cs, tok, ','))
                        e.perm.push_back(static_cast<uint8_t>(std::stoi(tok)));
                }
            } else {
                std::istringstream cs(aux);
                std::string tok;
                while (std::getline(cs, tok, ','))
                    e.perm.push_back(static_cast<uint8_t>(std::stoi(tok)));
            }
        }
        if (e.t <= prev_t) throw IoError("updates parse: event times not increasing");
        prev_t = e.t;
        w.events.push_back(std::move(e));
    }
    return w;
}

namespace {
template <typename T>
void put(std::vector<uint8_t>& out, T v) {
    uint8_t b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.insert(out.end(), b, b + sizeof(T));
}
template <typename T>
T get(const std::vector<uint8_t>& in, size_t& at) {
    if (at + sizeof(T) > in.size()) throw IoError("updates parse: truncated binary stream");
    T v;
    std::memcpy(&v, in.data() + at, sizeof(T));
    at += sizeof(T);
    return v;
}
}  // namespace

std::vector<uint8_t> serialize_updates_binary(const UpdateSequence& w) {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'C', 'U', 'T', 'W'});
    put<uint32_t>(out, 1);  // format version
    put<uint64_t>(out, w.seed);
    put<uint8_t>(out, w.kind == DynKind::HeatBath ? 0 : 1);
    put<uint8_t>(out, w.policy == Policy::Monotone  ? 0
                      : w.policy == Policy::Threshold ? 1
                                                      : 2);
    put<double>(out, w.horizon);
    put<uint64_t>(out, w.events.size());
    for (const auto& e : w.events) {
        put<double>(out, e.t);
        put<int32_t>(out, e.site);
        put<double>(out, e.u);
        put<int32_t>(out, e.proposal);
        put<uint8_t>(out, static_cast<uint8_t>(e.perm.size()));
        out.insert(out.end(), e.perm.begin(), e.perm.end());
    }
    return out;
}

UpdateSequence parse_updates_binary(const std::vector<uint8_t>& bytes) {
    size_t at = 0;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "CUTW", 4) != 0)
        throw IoError("updates parse: bad magic");
    at = 4;
    uint32_t version = get<uint32_t>(bytes, at);
    if (version != 1) throw IoError("updates parse: unsupported version");
    UpdateSequence w;
    w.seed = get<uint64_t>(bytes, at);
    w.kind = get<uint8_t>(bytes, at) == 0 ? DynKind::HeatBath : DynKind::Metropolis;
    uint8_t pol = get<uint8_t>(bytes, at);
    w.policy = pol == 0 ? Policy::Monotone : pol == 1 ? Policy::Threshold : Policy::Permutation;
    w.horizon = get<double>(bytes, at);
    uint64_t count = get<uint64_t>(bytes, at);
    w.events.resize(count);
    for (auto& e : w.events) {
        e.t = get<double>(bytes, at);
        e.site = get<int32_t>(bytes, at);
        e.u = get<double>(bytes, at);
        e.proposal = get<int32_t>(bytes, at);
        uint8_t len = get<uint8_t>(bytes, at);
        e.perm.resize(len);
        for (auto& c : e.perm) c = get<uint8_t>(bytes, at);
    }
    return w;
}

void save_updates(const UpdateSequence& w, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write updates file: " + path);
    if (binary) {
        auto bytes = serialize_updates_binary(w);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    } else {
        out << serialize_updates(w);
    }
}

UpdateSequence load_updates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open updates file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "CUTW", 4) == 0)
        return parse_updates_binary(bytes);
    return parse_updates(std::string(bytes.begin(), bytes.end()));
}

}  // namespace cutoff
