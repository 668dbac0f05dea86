#include "cutoff/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "cutoff/errors.hpp"

namespace cutoff {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
std::atomic<bool> g_corrupt{false};
}  // namespace

namespace testing {
void corrupt_conditionals(bool on) { g_corrupt.store(on); }
bool conditionals_corrupted() { return g_corrupt.load(); }
}  // namespace testing

int SpinModel::zeta_budget = 1000000;

bool InteractionTable::symmetric() const {
    for (int x = 0; x < q; ++x)
        for (int y = x + 1; y < q; ++y)
            if ((*this)(x, y) != (*this)(y, x)) return false;
    return true;
}

int SpinModel::edge_id(int u, int v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v));
    if (it == edges.end() || *it != std::make_pair(u, v)) return -1;
    return static_cast<int>(it - edges.begin());
}

double SpinModel::interaction(int u, int v, int xu, int xv) const {
    const bool flip = u > v;
    int id = edge_id(u, v);
    if (id < 0) throw InvalidArgument("interaction: no such edge");
    const auto& t = tables[edge_table[id]];
    return flip ? t(xv, xu) : t(xu, xv);
}

double SpinModel::field(int u, int s) const {
    if (fields.empty() || fields[u].empty()) return 0.0;
    return fields[u][s];
}

void SpinModel::conditional_into(const Configuration& sigma, int x,
                                 std::vector<double>& p) const {
    if (graph->is_clamped(x)) throw InvalidArgument("conditional: site is clamped");
    p.assign(q, 0.0);
    double lw[64];
    double best = kNegInf;
    for (int s = 0; s < q; ++s) {
        double w = field(x, s);
        for (int y : graph->adj[x]) w += interaction(x, y, s, sigma[y]);
        lw[s] = w;
        best = std::max(best, w);
    }
    if (best == kNegInf) throw InfeasibleError("conditional: no feasible spin at site");
    double z = 0.0;
    for (int s = 0; s < q; ++s) {
        p[s] = std::exp(lw[s] - best);
        z += p[s];
    }
    for (int s = 0; s < q; ++s) p[s] /= z;
    if (g_corrupt.load()) {  // negative-control hook
        p[0] = p[0] * 0.8 + 0.1;
        double z2 = std::accumulate(p.begin(), p.end(), 0.0);
        for (int s = 0; s < q; ++s) p[s] /= z2;
    }
}

std::vector<double> SpinModel::conditional(const Configuration& sigma, int x) const {
    std::vector<double> p;
    conditional_into(sigma, x, p);
    return p;
}

std::vector<double> conditional_distribution(const SpinModel& m, const Configuration& sigma,
                                             int x) {
    return m.conditional(sigma, x);
}

double SpinModel::log_weight(const Configuration& sigma) const {
    double w = 0.0;
    for (size_t e = 0; e < edges.size(); ++e) {
        auto [u, v] = edges[e];
        if (graph->is_clamped(u) && graph->is_clamped(v)) continue;
        w += tables[edge_table[e]](sigma[u], sigma[v]);
    }
    for (int v = 0; v < n_sites(); ++v)
        if (!graph->is_clamped(v)) w += field(v, sigma[v]);
    return w;
}

bool SpinModel::feasible(const Configuration& sigma) const {
    return log_weight(sigma) > kNegInf;
}

Configuration SpinModel::canonical_start() const {
    Configuration sigma(n_sites(), 0);
    for (int v = 0; v < n_sites(); ++v)
        if (graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(graph->clamp[v]);
    if (kind == ModelKind::Coloring) {
        // greedy proper coloring; q >= max degree + 1 guarantees it succeeds
        for (int v = 0; v < n_sites(); ++v) {
            if (graph->is_clamped(v)) continue;
            std::vector<bool> used(q, false);
            for (int y : graph->adj[v])
                if (y < v || graph->is_clamped(y)) used[sigma[y]] = true;
            int c = 0;
            while (c < q && used[c]) ++c;
            if (c == q) throw InfeasibleError("canonical_start: greedy coloring failed");
            sigma[v] = static_cast<uint8_t>(c);
        }
    }
    if (!feasible(sigma)) throw InfeasibleError("canonical_start: infeasible start");
    return sigma;
}

Configuration SpinModel::extreme_start(bool top) const {
    Configuration sigma(n_sites(), top ? static_cast<uint8_t>(q - 1) : 0);
    for (int v = 0; v < n_sites(); ++v)
        if (graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(graph->clamp[v]);
    return sigma;
}

void SpinModel::validate() const {
    if (q < 2 || q > 64) throw InvalidArgument("model: need 2 <= q <= 64");
    if (edge_table.size() != edges.size()) throw InvalidArgument("model: missing edge tables");
    for (int id : edge_table)
        if (id < 0 || id >= static_cast<int>(tables.size()))
            throw InvalidArgument("model: edge table id out of range");
    for (const auto& t : tables)
        if (t.q != q || t.w.size() != static_cast<size_t>(q) * q)
            throw InvalidArgument("model: interaction table has wrong shape");
    for (int v = 0; v < n_sites(); ++v) {
        if (graph->is_clamped(v) && (graph->clamp[v] < 0 || graph->clamp[v] >= q))
            throw InvalidArgument("model: clamp value outside the spin alphabet");
        if (!fields.empty() && !fields[v].empty() &&
            fields[v].size() != static_cast<size_t>(q))
            throw InvalidArgument("model: field table has wrong size");
    }
    // single-site feasibility: every neighborhood must leave some spin open
    const int deg = graph->max_degree();
    double combos = std::pow(static_cast<double>(q), deg);
    if (combos <= 4096) {
        for (int v = 0; v < n_sites(); ++v) {
            if (graph->is_clamped(v)) continue;
            const auto& nb = graph->adj[v];
            std::vector<int> eta(nb.size(), 0);
            while (true) {
                double best = kNegInf;
                for (int s = 0; s < q && best == kNegInf; ++s) {
                    double w = field(v, s);
                    for (size_t i = 0; i < nb.size(); ++i) {
                        int y = nb[i];
                        int ys = graph->is_clamped(y) ? graph->clamp[y] : eta[i];
                        w += interaction(v, y, s, ys);
                        if (w == kNegInf) break;
                    }
                    best = std::max(best, w);
                }
                if (best == kNegInf)
                    throw InvalidArgument(
                        "model: some neighborhood blocks every spin at site " +
                        std::to_string(v));
                size_t i = 0;
                while (i < eta.size() && ++eta[i] == q) eta[i++] = 0;
                if (i == eta.size()) break;
            }
        }
    }
}

SpinModel SpinModel::strip_clamps_to_fields() const {
    auto stripped = std::make_shared<Graph>();
    std::vector<int> remap(n_sites(), -1);
    int next = 0;
    for (int v = 0; v < n_sites(); ++v)
        if (!graph->is_clamped(v)) remap[v] = next++;
    stripped->adj.resize(next);
    stripped->clamp.assign(next, kNoClamp);
    if (graph->has_coords()) {
        stripped->dim = graph->dim;
        stripped->periodic_extent = graph->periodic_extent;
        stripped->coords.resize(static_cast<size_t>(next) * graph->dim);
    }
    SpinModel out;
    out.kind = kind;
    out.q = q;
    out.ising_beta = ising_beta;
    out.ising_field = ising_field;
    out.potts_beta = potts_beta;
    out.fugacity = fugacity;
    out.fields.assign(next, {});
    for (int v = 0; v < n_sites(); ++v) {
        if (remap[v] < 0) continue;
        if (graph->has_coords())
            for (int k = 0; k < graph->dim; ++k)
                stripped->coords[static_cast<size_t>(remap[v]) * graph->dim + k] =
                    graph->coord(v)[k];
        std::vector<double> h(q, 0.0);
        for (int s = 0; s < q; ++s) h[s] = field(v, s);
        for (int y : graph->adj[v]) {
            if (graph->is_clamped(y)) {
                for (int s = 0; s < q; ++s) h[s] += interaction(v, y, s, graph->clamp[y]);
            } else if (remap[y] > remap[v]) {
                stripped->adj[remap[v]].push_back(remap[y]);
                stripped->adj[remap[y]].push_back(remap[v]);
                out.edges.emplace_back(remap[v], remap[y]);
                const bool flip = v > y;
                const auto& t = tables[edge_table[edge_id(v, y)]];
                InteractionTable nt{q, std::vector<double>(static_cast<size_t>(q) * q)};
                for (int x = 0; x < q; ++x)
                    for (int yy = 0; yy < q; ++yy)
                        nt.w[static_cast<size_t>(x) * q + yy] = flip ? t(yy, x) : t(x, yy);
                out.tables.push_back(std::move(nt));
            }
        }
        out.fields[remap[v]] = std::move(h);
    }
    std::vector<size_t> order(out.edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return out.edges[a] < out.edges[b]; });
    std::vector<std::pair<int, int>> se(out.edges.size());
    std::vector<InteractionTable> st(out.edges.size());
    for (size_t i = 0; i < order.size(); ++i) {
        se[i] = out.edges[order[i]];
        st[i] = std::move(out.tables[order[i]]);
    }
    out.edges = std::move(se);
    out.tables = std::move(st);
    out.edge_table.resize(out.edges.size());
    std::iota(out.edge_table.begin(), out.edge_table.end(), 0);
    stripped->validate();
    out.graph = stripped;
    out.validate();
    return out;
}

namespace {

SpinModel base_model(GraphPtr g, int q) {
    SpinModel m;
    m.graph = std::move(g);
    m.q = q;
    for (int v = 0; v < m.graph->n(); ++v)
        for (int w : m.graph->adj[v])
            if (w > v) m.edges.emplace_back(v, w);
    std::sort(m.edges.begin(), m.edges.end());
    m.edge_table.assign(m.edges.size(), 0);
    return m;
}

}  // namespace

SpinModel make_ising(GraphPtr g, double beta, double field) {
    SpinModel m = base_model(std::move(g), 2);
    m.kind = ModelKind::Ising;
    m.ising_beta = beta;
    m.ising_field = field;
    m.tables.push_back({2, {beta, -beta, -beta, beta}});
    if (field != 0.0) m.fields.assign(m.n_sites(), {-field, field});
    m.validate();
    return m;
}

SpinModel make_ising_nonuniform(GraphPtr g, const std::vector<double>& edge_beta,
                                const std::vector<double>& vertex_field) {
    SpinModel m = base_model(std::move(g), 2);
    m.kind = ModelKind::Ising;
    if (edge_beta.size() != m.edges.size())
        throw InvalidArgument("make_ising: need one coupling per edge");
    if (vertex_field.size() != static_cast<size_t>(m.n_sites()))
        throw InvalidArgument("make_ising: need one field per vertex");
    m.tables.resize(m.edges.size());
    for (size_t e = 0; e < m.edges.size(); ++e) {
        double b = edge_beta[e];
        m.tables[e] = {2, {b, -b, -b, b}};
        m.edge_table[e] = static_cast<int>(e);
    }
    m.fields.resize(m.n_sites());
    for (int v = 0; v < m.n_sites(); ++v)
        m.fields[v] = {-vertex_field[v], vertex_field[v]};
    m.validate();
    return m;
}

SpinModel make_potts(GraphPtr g, int q, double beta) {
    if (q < 2) throw InvalidArgument("make_potts: need q >= 2");
    SpinModel m = base_model(std::move(g), q);
    m.kind = beta >= 0 ? ModelKind::Potts : ModelKind::AntiPotts;
    m.potts_beta = beta;
    InteractionTable t{q, std::vector<double>(static_cast<size_t>(q) * q, 0.0)};
    for (int x = 0; x < q; ++x) t.w[static_cast<size_t>(x) * q + x] = 2 * beta;
    m.tables.push_back(std::move(t));
    m.validate();
    return m;
}

SpinModel make_coloring(GraphPtr g, int q) {
    const int delta = g->max_degree();
    if (q <= delta)
        throw InvalidArgument("make_coloring: q <= max degree can block every color at a site");
    SpinModel m = base_model(std::move(g), q);
    m.kind = ModelKind::Coloring;
    InteractionTable t{q, std::vector<double>(static_cast<size_t>(q) * q, 0.0)};
    for (int x = 0; x < q; ++x) t.w[static_cast<size_t>(x) * q + x] = kNegInf;
    m.tables.push_back(std::move(t));
    m.validate();
    return m;
}

SpinModel make_hardcore(GraphPtr g, double fugacity) {
    if (!(fugacity > 0)) throw InvalidArgument("make_hardcore: need fugacity > 0");
    SpinModel m = base_model(std::move(g), 2);
    m.kind = ModelKind::HardCore;
    m.fugacity = fugacity;
    m.tables.push_back({2, {0.0, 0.0, 0.0, kNegInf}});
    m.fields.assign(m.n_sites(), {0.0, std::log(fugacity)});
    m.validate();
    return m;
}

namespace {

// Enumerates neighborhoods of a site: clamped neighbors stay fixed, free
// neighbors run over spin tuples (or multisets when every incident table at
// the site is the same and symmetric).
template <typename Fn>
void for_each_neighborhood(const SpinModel& m, int x, Fn&& fn) {
    const auto& nb = m.graph->adj[x];
    std::vector<int> free_nb;
    Configuration sigma(m.n_sites(), 0);
    for (int v = 0; v < m.n_sites(); ++v)
        if (m.graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(m.graph->clamp[v]);
    for (int y : nb)
        if (!m.graph->is_clamped(y)) free_nb.push_back(y);
    const int k = static_cast<int>(free_nb.size());
    bool uniform = true;
    int tid = -1;
    for (int y : nb) {
        int id = m.edge_table[m.edge_id(x, y)];
        if (tid == -1) tid = id;
        uniform = uniform && id == tid && m.tables[id].symmetric();
    }
    if (uniform && k > 0) {
        // multisets of free-neighbor spins: nondecreasing tuples
        double count = 1;
        for (int i = 0; i < std::min(k, m.q - 1); ++i) count *= (k + m.q - 1.0 - i) / (i + 1);
        if (count > SpinModel::zeta_budget)
            throw BudgetExceeded("zeta: neighborhood enumeration over budget");
        std::vector<int> spins(k, 0);
        while (true) {
            for (int i = 0; i < k; ++i) sigma[free_nb[i]] = static_cast<uint8_t>(spins[i]);
            fn(sigma);
            int i = k - 1;
            while (i >= 0 && spins[i] == m.q - 1) --i;
            if (i < 0) break;
            int v = spins[i] + 1;
            for (int j = i; j < k; ++j) spins[j] = v;  // keep nondecreasing
        }
        return;
    }
    double count = std::pow(static_cast<double>(m.q), k);
    if (count > SpinModel::zeta_budget)
        throw BudgetExceeded("zeta: neighborhood enumeration over budget");
    std::vector<int> spins(k, 0);
    while (true) {
        for (int i = 0; i < k; ++i) sigma[free_nb[i]] = static_cast<uint8_t>(spins[i]);
        fn(sigma);
        int i = 0;
        while (i < k && ++spins[i] == m.q) spins[i++] = 0;
        if (i == k) break;
    }
}

}  // namespace

ZetaResult zeta(const SpinModel& m) {
    ZetaResult out;
    out.floor.assign(m.q, 1.0);
    std::vector<double> p;
    bool any = false;
    for (int x = 0; x < m.n_sites(); ++x) {
        if (m.graph->is_clamped(x)) continue;
        any = true;
        for_each_neighborhood(m, x, [&](const Configuration& sigma) {
            m.conditional_into(sigma, x, p);
            for (int s = 0; s < m.q; ++s) out.floor[s] = std::min(out.floor[s], p[s]);
        });
    }
    if (!any) throw InvalidArgument("zeta: model has no free sites");
    out.value = std::accumulate(out.floor.begin(), out.floor.end(), 0.0);
    return out;
}

double zeta_metropolis(const SpinModel& m) {
    std::vector<double> worst(m.q, 1.0);
    std::vector<double> p;
    bool any = false;
    for (int x = 0; x < m.n_sites(); ++x) {
        if (m.graph->is_clamped(x)) continue;
        any = true;
        for_each_neighborhood(m, x, [&](const Configuration& sigma) {
            m.conditional_into(sigma, x, p);
            double pmax = *std::max_element(p.begin(), p.end());
            for (int s = 0; s < m.q; ++s) worst[s] = std::min(worst[s], p[s] / pmax);
        });
    }
    if (!any) throw InvalidArgument("zeta: model has no free sites");
    return std::accumulate(worst.begin(), worst.end(), 0.0) / m.q;
}

size_t GibbsTable::index_of(const Configuration& sigma) const {
    size_t id = 0;
    for (int v : free_sites) id = id * q + sigma[v];
    return id;
}

Configuration GibbsTable::config_of(size_t index, const SpinModel& m) const {
    Configuration sigma(m.n_sites(), 0);
    for (int v = 0; v < m.n_sites(); ++v)
        if (m.graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(m.graph->clamp[v]);
    for (auto it = free_sites.rbegin(); it != free_sites.rend(); ++it) {
        sigma[*it] = static_cast<uint8_t>(index % q);
        index /= q;
    }
    return sigma;
}

GibbsTable gibbs_enumerate(const SpinModel& m, size_t state_budget) {
    GibbsTable table;
    table.q = m.q;
    for (int v = 0; v < m.n_sites(); ++v)
        if (!m.graph->is_clamped(v)) table.free_sites.push_back(v);
    const size_t k = table.free_sites.size();
    double states = std::pow(static_cast<double>(m.q), static_cast<double>(k));
    if (states > static_cast<double>(state_budget))
        throw BudgetExceeded("gibbs_enumerate: state space over budget");
    const size_t total = static_cast<size_t>(states + 0.5);
    std::vector<double> lw(total, kNegInf);
    Configuration sigma(m.n_sites(), 0);
    for (int v = 0; v < m.n_sites(); ++v)
        if (m.graph->is_clamped(v)) sigma[v] = static_cast<uint8_t>(m.graph->clamp[v]);
    double best = kNegInf;
    for (size_t id = 0; id < total; ++id) {
        size_t rest = id;
        for (auto it = table.free_sites.rbegin(); it != table.free_sites.rend(); ++it) {
            sigma[*it] = static_cast<uint8_t>(rest % m.q);
            rest /= m.q;
        }
        lw[id] = m.log_weight(sigma);
        best = std::max(best, lw[id]);
    }
    if (best == kNegInf) throw InfeasibleError("gibbs_enumerate: no feasible configuration");
    table.p.assign(total, 0.0);
    double z = 0.0;
    for (size_t id = 0; id < total; ++id) {
        if (lw[id] > kNegInf) {
            table.p[id] = std::exp(lw[id] - best);
            z += table.p[id];
        }
    }
    for (auto& p : table.p) p /= z;
    return table;
}

}  // namespace cutoff
