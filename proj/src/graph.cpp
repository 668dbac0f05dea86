#include "cutoff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cutoff/errors.hpp"

namespace cutoff {

int Graph::cache_vertex_budget = 65536;

int Graph::interior_count() const {
    int c = 0;
    for (int v = 0; v < n(); ++v)
        if (!is_clamped(v)) ++c;
    return c;
}

int Graph::max_degree() const {
    int d = 0;
    for (int v = 0; v < n(); ++v)
        if (!is_clamped(v)) d = std::max(d, static_cast<int>(adj[v].size()));
    return d;
}

void Graph::validate() const {
    if (clamp.size() != adj.size()) throw InvalidArgument("graph: clamp table size mismatch");
    if (dim > 0 && coords.size() != adj.size() * static_cast<size_t>(dim))
        throw InvalidArgument("graph: coordinate table size mismatch");
    for (int v = 0; v < n(); ++v) {
        for (int w : adj[v]) {
            if (w == v) throw InvalidArgument("graph: self-loop at vertex " + std::to_string(v));
            if (w < 0 || w >= n()) throw InvalidArgument("graph: neighbor out of range");
            if (std::count(adj[w].begin(), adj[w].end(), v) != 1)
                throw InvalidArgument("graph: adjacency not symmetric at edge " +
                                      std::to_string(v) + "-" + std::to_string(w));
        }
        std::set<int> uniq(adj[v].begin(), adj[v].end());
        if (uniq.size() != adj[v].size()) throw InvalidArgument("graph: duplicate edge");
    }
}

std::vector<int> Graph::bfs_row(int source) const {
    std::vector<int> dist(n(), kInfDistance);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int w : adj[u]) {
            if (dist[w] == kInfDistance) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

std::vector<int> Graph::distances_from(int u) const {
    if (n() > cache_vertex_budget) return bfs_row(u);
    std::lock_guard lock(cache_mutex_);
    auto it = bfs_cache_.find(u);
    if (it == bfs_cache_.end()) it = bfs_cache_.emplace(u, bfs_row(u)).first;
    return it->second;
}

int Graph::distance(int u, int v) const {
    if (u == v) return 0;
    return distances_from(u)[v];
}

int Graph::metric_distance(int u, int v, Metric metric) const {
    return metric == Metric::Graph ? distance(u, v) : linf_distance(u, v);
}

namespace {
std::string coord_key(const int* c, int dim) {
    std::string key;
    key.reserve(static_cast<size_t>(dim) * 4);
    for (int k = 0; k < dim; ++k) {
        key += std::to_string(c[k]);
        key += ',';
    }
    return key;
}
}  // namespace

void Graph::ensure_coord_index() const {
    std::lock_guard lock(cache_mutex_);
    if (!coord_index_.empty() || !has_coords()) return;
    coord_index_.reserve(adj.size());
    for (int v = 0; v < n(); ++v) coord_index_.emplace(coord_key(coord(v), dim), v);
}

int Graph::vertex_at(const std::vector<int>& c) const {
    if (!has_coords() || static_cast<int>(c.size()) != dim) return -1;
    ensure_coord_index();
    auto it = coord_index_.find(coord_key(c.data(), dim));
    return it == coord_index_.end() ? -1 : it->second;
}

int Graph::linf_distance(int u, int v) const {
    if (!has_coords()) throw InvalidArgument("linf distance requires lattice coordinates");
    const int* a = coord(u);
    const int* b = coord(v);
    int best = 0;
    for (int k = 0; k < dim; ++k) {
        int d = std::abs(a[k] - b[k]);
        if (periodic_extent[k] > 0) d = std::min(d, periodic_extent[k] - d);
        best = std::max(best, d);
    }
    return best;
}

std::vector<int> Graph::ball(int v, int r, Metric metric) const {
    if (v < 0 || v >= n()) throw InvalidArgument("ball: vertex out of range");
    std::vector<int> out;
    if (metric == Metric::Graph) {
        if (r >= n()) {  // whole component, skip the cache
            const auto d = bfs_row(v);
            for (int w = 0; w < n(); ++w)
                if (d[w] <= r) out.push_back(w);
            return out;
        }
        std::vector<int> dist(n(), kInfDistance);
        std::deque<int> queue{v};
        dist[v] = 0;
        out.push_back(v);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            if (dist[u] == r) continue;
            for (int w : adj[u]) {
                if (dist[w] == kInfDistance) {
                    dist[w] = dist[u] + 1;
                    out.push_back(w);
                    queue.push_back(w);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    if (!has_coords()) throw InvalidArgument("ball: l-infinity metric requires coordinates");
    // enumerate the coordinate window when it beats a full scan
    double window = 1;
    for (int k = 0; k < dim; ++k) {
        int span = 2 * r + 1;
        if (periodic_extent[k] > 0) span = std::min(span, periodic_extent[k]);
        window *= span;
    }
    if (window < static_cast<double>(n())) {
        ensure_coord_index();
        const int* c = coord(v);
        std::vector<int> offsets_lo(dim), offsets_hi(dim);
        for (int k = 0; k < dim; ++k) {
            if (periodic_extent[k] > 0 && 2 * r + 1 >= periodic_extent[k]) {
                offsets_lo[k] = 0;
                offsets_hi[k] = periodic_extent[k] - 1;
            } else {
                offsets_lo[k] = -r;
                offsets_hi[k] = r;
            }
        }
        std::vector<int> off(offsets_lo), target(dim);
        while (true) {
            for (int k = 0; k < dim; ++k) {
                int x = c[k] + off[k];
                if (periodic_extent[k] > 0) {
                    x %= periodic_extent[k];
                    if (x < 0) x += periodic_extent[k];
                }
                target[k] = x;
            }
            int w = vertex_at(target);
            if (w >= 0 && linf_distance(v, w) <= r) out.push_back(w);
            int k = dim - 1;
            while (k >= 0 && ++off[k] > offsets_hi[k]) {
                off[k] = offsets_lo[k];
                --k;
            }
            if (k < 0) break;
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    for (int w = 0; w < n(); ++w)
        if (linf_distance(v, w) <= r) out.push_back(w);
    return out;
}

int Graph::diameter(const std::vector<int>& subset) const {
    if (subset.empty()) throw InvalidArgument("diameter: empty subset");
    int best = 0;
    for (int u : subset) {
        const auto& d = distances_from(u);
        for (int v : subset) {
            if (d[v] == kInfDistance) return kInfDistance;
            best = std::max(best, d[v]);
        }
    }
    return best;
}

std::vector<std::vector<int>> Graph::components(const std::vector<int>& subset,
                                                int threshold) const {
    const int m = static_cast<int>(subset.size());
    std::vector<int> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < m; ++i) {
        const auto& d = distances_from(subset[i]);
        for (int j = i + 1; j < m; ++j)
            if (d[subset[j]] <= threshold) parent[find(i)] = find(j);
    }
    std::unordered_map<int, std::vector<int>> groups;
    for (int i = 0; i < m; ++i) groups[find(i)].push_back(subset[i]);
    std::vector<std::vector<int>> out;
    for (auto& [root, verts] : groups) {
        std::sort(verts.begin(), verts.end());
        out.push_back(std::move(verts));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Row-major indexer over a d-dimensional grid of side n.
struct GridIndex {
    int dim;
    int side;
    int index(const std::vector<int>& c) const {
        int id = 0;
        for (int k = 0; k < dim; ++k) id = id * side + c[k];
        return id;
    }
    std::vector<int> coord(int id) const {
        std::vector<int> c(dim);
        for (int k = dim - 1; k >= 0; --k) {
            c[k] = id % side;
            id /= side;
        }
        return c;
    }
    int count() const {
        int total = 1;
        for (int k = 0; k < dim; ++k) total *= side;
        return total;
    }
};

void add_edge(Graph& g, int u, int v) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
}

}  // namespace

GraphPtr build_box(int dim, int side, const std::vector<FaceBoundary>& faces) {
    if (dim < 1 || side < 1) throw InvalidArgument("build_box: need dim >= 1 and side >= 1");
    if (faces.size() != static_cast<size_t>(2 * dim))
        throw InvalidArgument("build_box: need one boundary entry per face (2*dim)");
    GridIndex grid{dim, side};
    const int interior = grid.count();
    auto g = std::make_shared<Graph>();
    g->dim = dim;
    g->periodic_extent.assign(dim, 0);
    g->adj.resize(interior);
    g->clamp.assign(interior, kNoClamp);
    g->coords.resize(static_cast<size_t>(interior) * dim);
    for (int v = 0; v < interior; ++v) {
        auto c = grid.coord(v);
        for (int k = 0; k < dim; ++k) g->coords[static_cast<size_t>(v) * dim + k] = c[k];
        for (int k = 0; k < dim; ++k) {
            if (c[k] + 1 < side) {
                auto c2 = c;
                ++c2[k];
                add_edge(*g, v, grid.index(c2));
            }
        }
    }
    // one ghost layer per clamped face
    for (int k = 0; k < dim; ++k) {
        for (int hi = 0; hi < 2; ++hi) {
            const FaceBoundary& f = faces[2 * k + hi];
            if (!f.clamped) continue;
            const int face_coord = hi ? side - 1 : 0;
            const int ghost_coord = hi ? side : -1;
            for (int v = 0; v < interior; ++v) {
                auto c = grid.coord(v);
                if (c[k] != face_coord) continue;
                int ghost = g->n();
                g->adj.emplace_back();
                g->clamp.push_back(f.spin);
                for (int a = 0; a < dim; ++a)
                    g->coords.push_back(a == k ? ghost_coord : c[a]);
                add_edge(*g, v, ghost);
            }
        }
    }
    g->validate();
    return g;
}

GraphPtr build_box_uniform(int dim, int side, FaceBoundary face) {
    return build_box(dim, side, std::vector<FaceBoundary>(2 * dim, face));
}

GraphPtr build_torus(int dim, int side) {
    if (dim < 1) throw InvalidArgument("build_torus: need dim >= 1");
    if (side < 3) throw InvalidArgument("build_torus: need side >= 3 to avoid multi-edges");
    GridIndex grid{dim, side};
    const int n = grid.count();
    auto g = std::make_shared<Graph>();
    g->dim = dim;
    g->periodic_extent.assign(dim, side);
    g->adj.resize(n);
    g->clamp.assign(n, kNoClamp);
    g->coords.resize(static_cast<size_t>(n) * dim);
    for (int v = 0; v < n; ++v) {
        auto c = grid.coord(v);
        for (int k = 0; k < dim; ++k) g->coords[static_cast<size_t>(v) * dim + k] = c[k];
        for (int k = 0; k < dim; ++k) {
            auto c2 = c;
            c2[k] = (c[k] + 1) % side;
            add_edge(*g, v, grid.index(c2));
        }
    }
    g->validate();
    return g;
}

GraphPtr build_block(const BlockSpec& spec) {
    if (spec.side < 6)
        throw InvalidArgument("build_block: side < 6 leaves no inner-block window");
    return build_block_relaxed(spec);
}

GraphPtr build_block_relaxed(const BlockSpec& spec) {
    const int d = spec.dim, m = spec.side, j = spec.plus_axes;
    if (d < 1 || j < 0 || j > d) throw InvalidArgument("build_block: need 0 <= j <= dim");
    if (m < 3) throw InvalidArgument("build_block: need side >= 3");
    GridIndex grid{d, m};
    const int interior = grid.count();
    auto g = std::make_shared<Graph>();
    g->dim = d;
    g->periodic_extent.assign(d, 0);
    for (int k = j; k < d; ++k) g->periodic_extent[k] = m;
    g->adj.resize(interior);
    g->clamp.assign(interior, kNoClamp);
    g->coords.resize(static_cast<size_t>(interior) * d);
    for (int v = 0; v < interior; ++v) {
        auto c = grid.coord(v);
        for (int k = 0; k < d; ++k) g->coords[static_cast<size_t>(v) * d + k] = c[k];
        for (int k = 0; k < d; ++k) {
            if (k >= j) {  // periodic axis
                auto c2 = c;
                c2[k] = (c[k] + 1) % m;
                add_edge(*g, v, grid.index(c2));
            } else if (c[k] + 1 < m) {
                auto c2 = c;
                ++c2[k];
                add_edge(*g, v, grid.index(c2));
            }
        }
    }
    // plus collar on both faces of each clamped axis
    for (int k = 0; k < j; ++k) {
        for (int hi = 0; hi < 2; ++hi) {
            const int face_coord = hi ? m - 1 : 0;
            const int ghost_coord = hi ? m : -1;
            for (int v = 0; v < interior; ++v) {
                auto c = grid.coord(v);
                if (c[k] != face_coord) continue;
                int ghost = g->n();
                g->adj.emplace_back();
                g->clamp.push_back(spec.plus_spin);
                for (int a = 0; a < d; ++a) g->coords.push_back(a == k ? ghost_coord : c[a]);
                add_edge(*g, v, ghost);
            }
        }
    }
    // Inner block windows, 1-based in the source convention, all fractional
    // endpoints rounded down: plus axes take {1..2m/3}, periodic axes take
    // {m/6..5m/6}. Stored 0-based; clamped into range for small sides.
    const int plus_hi = std::max(1, (2 * m) / 3);  // inclusive, 1-based
    const int per_lo = std::max(1, m / 6), per_hi = std::min(m, (5 * m) / 6);
    g->inner_block.clear();
    for (int v = 0; v < interior; ++v) {
        auto c = grid.coord(v);
        bool in = true;
        for (int k = 0; k < d && in; ++k) {
            const int x = c[k] + 1;  // 1-based
            in = (k < j) ? (x >= 1 && x <= plus_hi) : (x >= per_lo && x <= per_hi);
        }
        if (in) g->inner_block.push_back(v);
    }
    g->validate();
    return g;
}

GraphPtr build_ladder(int cycle_len) {
    if (cycle_len < 3) throw InvalidArgument("build_ladder: need cycle length >= 3");
    auto g = std::make_shared<Graph>();
    const int n = 2 * cycle_len;
    g->dim = 2;
    g->periodic_extent = {cycle_len, 0};
    g->adj.resize(n);
    g->clamp.assign(n, kNoClamp);
    g->coords.resize(static_cast<size_t>(n) * 2);
    for (int i = 0; i < cycle_len; ++i) {
        for (int rail = 0; rail < 2; ++rail) {
            int v = 2 * i + rail;
            g->coords[2 * v] = i;
            g->coords[2 * v + 1] = rail;
        }
        add_edge(*g, 2 * i, 2 * i + 1);                          // rung
        add_edge(*g, 2 * i, 2 * ((i + 1) % cycle_len));          // rail 0
        add_edge(*g, 2 * i + 1, 2 * ((i + 1) % cycle_len) + 1);  // rail 1
    }
    g->validate();
    return g;
}

GraphPtr build_triangular(int rows, int cols) {
    if (rows < 3 || cols < 3) throw InvalidArgument("build_triangular: need sides >= 3");
    auto g = std::make_shared<Graph>();
    const int n = rows * cols;
    g->dim = 2;
    g->periodic_extent = {rows, cols};
    g->adj.resize(n);
    g->clamp.assign(n, kNoClamp);
    g->coords.resize(static_cast<size_t>(n) * 2);
    auto id = [&](int r, int c) { return ((r + rows) % rows) * cols + ((c + cols) % cols); };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = id(r, c);
            g->coords[2 * v] = r;
            g->coords[2 * v + 1] = c;
            add_edge(*g, v, id(r, c + 1));
            add_edge(*g, v, id(r + 1, c));
            add_edge(*g, v, id(r + 1, c + 1));  // diagonal closing the triangles
        }
    g->validate();
    return g;
}

GraphPtr build_hexagonal(int rows, int cols) {
    // brick-wall embedding of the honeycomb on a torus; parity of r+c picks
    // whether the vertical edge points up or down, so both sides must be even
    if (rows < 4 || cols < 4 || rows % 2 || cols % 2)
        throw InvalidArgument("build_hexagonal: need even sides >= 4");
    auto g = std::make_shared<Graph>();
    const int n = rows * cols;
    g->dim = 2;
    g->periodic_extent = {rows, cols};
    g->adj.resize(n);
    g->clamp.assign(n, kNoClamp);
    g->coords.resize(static_cast<size_t>(n) * 2);
    auto id = [&](int r, int c) { return ((r + rows) % rows) * cols + ((c + cols) % cols); };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = id(r, c);
            g->coords[2 * v] = r;
            g->coords[2 * v + 1] = c;
            add_edge(*g, v, id(r, c + 1));
            if ((r + c) % 2 == 0) add_edge(*g, v, id(r + 1, c));
        }
    g->validate();
    return g;
}

GraphPtr build_product_with_cycle(int cycle_len, const std::vector<std::vector<int>>& h_adj) {
    if (cycle_len < 3) throw InvalidArgument("product: need cycle length >= 3");
    const int hn = static_cast<int>(h_adj.size());
    if (hn < 1) throw InvalidArgument("product: factor graph is empty");
    auto g = std::make_shared<Graph>();
    const int n = cycle_len * hn;
    g->dim = 2;
    g->periodic_extent = {cycle_len, 0};
    g->adj.resize(n);
    g->clamp.assign(n, kNoClamp);
    g->coords.resize(static_cast<size_t>(n) * 2);
    auto id = [&](int i, int a) { return i * hn + a; };
    for (int i = 0; i < cycle_len; ++i)
        for (int a = 0; a < hn; ++a) {
            int v = id(i, a);
            g->coords[2 * v] = i;
            g->coords[2 * v + 1] = a;
            add_edge(*g, v, id((i + 1) % cycle_len, a));
            for (int b : h_adj[a])
                if (b > a) add_edge(*g, v, id(i, b));
        }
    g->validate();
    return g;
}

GraphPtr build_long_range(int dim, int side, int range) {
    if (range < 1) throw InvalidArgument("build_long_range: need range >= 1");
    if (side < 2 * range + 1)
        throw InvalidArgument("build_long_range: side too small for the interaction range");
    auto base = build_torus(dim, side);
    auto g = std::make_shared<Graph>(*base);
    for (auto& nb : g->adj) nb.clear();
    for (int v = 0; v < g->n(); ++v) {
        const auto& dist = base->distances_from(v);
        for (int w = v + 1; w < g->n(); ++w)
            if (dist[w] <= range) add_edge(*g, v, w);
    }
    g->validate();
    return g;
}

std::string serialize_graph(const Graph& g) {
    std::ostringstream out;
    out << "n=" << g.n() << " delta=" << g.max_degree() << "\n";
    for (int v = 0; v < g.n(); ++v) {
        out << v << ":";
        for (size_t i = 0; i < g.adj[v].size(); ++i) out << (i ? "," : " ") << g.adj[v][i];
        out << "\n";
    }
    for (int v = 0; v < g.n(); ++v)
        if (g.is_clamped(v)) out << "clamp " << v << "=" << g.clamp[v] << "\n";
    if (g.has_coords()) {
        for (int v = 0; v < g.n(); ++v) {
            out << "coord " << v << "=";
            for (int k = 0; k < g.dim; ++k) out << (k ? "," : "") << g.coord(v)[k];
            out << "\n";
        }
        out << "periodic";
        for (int k = 0; k < g.dim; ++k) out << " " << g.periodic_extent[k];
        out << "\n";
    }
    return out.str();
}

GraphPtr parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("graph parse: empty input");
    int n = -1, delta = -1;
    if (std::sscanf(line.c_str(), "n=%d delta=%d", &n, &delta) != 2 || n < 0)
        throw IoError("graph parse: bad header: " + line);
    auto g = std::make_shared<Graph>();
    g->adj.resize(n);
    g->clamp.assign(n, kNoClamp);
    std::vector<std::vector<int>> coord_rows(n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("clamp ", 0) == 0) {
            int v, s;
            if (std::sscanf(line.c_str(), "clamp %d=%d", &v, &s) != 2 || v < 0 || v >= n)
                throw IoError("graph parse: bad clamp line: " + line);
            g->clamp[v] = s;
            continue;
        }
        if (line.rfind("coord ", 0) == 0) {
            std::istringstream ls(line.substr(6));
            int v;
            char eq;
            ls >> v >> eq;
            if (!ls || eq != '=' || v < 0 || v >= n)
                throw IoError("graph parse: bad coord line: " + line);
            std::string rest;
            ls >> rest;
            std::istringstream cs(rest);
            std::string tok;
            while (std::getline(cs, tok, ',')) coord_rows[v].push_back(std::stoi(tok));
            continue;
        }
        if (line.rfind("periodic", 0) == 0) {
            std::istringstream ls(line.substr(8));
            int e;
            g->periodic_extent.clear();
            while (ls >> e) g->periodic_extent.push_back(e);
            continue;
        }
        std::istringstream ls(line);
        int v;
        char colon;
        ls >> v >> colon;
        if (!ls || colon != ':' || v < 0 || v >= n)
            throw IoError("graph parse: bad adjacency line: " + line);
        std::string rest;
        ls >> rest;
        if (!rest.empty()) {
            std::istringstream cs(rest);
            std::string tok;
            while (std::getline(cs, tok, ',')) {
                int w = std::stoi(tok);
                if (w > v) {  // each edge listed from both sides; add once
                    g->adj[v].push_back(w);
                    g->adj[w].push_back(v);
                }
            }
        }
    }
    if (!coord_rows.empty() && !coord_rows[0].empty()) {
        g->dim = static_cast<int>(coord_rows[0].size());
        g->coords.resize(static_cast<size_t>(n) * g->dim);
        for (int v = 0; v < n; ++v) {
            if (static_cast<int>(coord_rows[v].size()) != g->dim)
                throw IoError("graph parse: inconsistent coordinate dimension");
            for (int k = 0; k < g->dim; ++k)
                g->coords[static_cast<size_t>(v) * g->dim + k] = coord_rows[v][k];
        }
        if (g->periodic_extent.empty()) g->periodic_extent.assign(g->dim, 0);
    }
    g->validate();
    if (g->max_degree() != delta)
        throw IoError("graph parse: header delta does not match adjacency");
    return g;
}

GraphPtr load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

void save_graph(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write graph file: " + path);
    out << serialize_graph(g);
}

}  // namespace cutoff
