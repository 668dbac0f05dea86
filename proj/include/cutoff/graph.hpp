#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace cutoff {

inline constexpr int kInfDistance = std::numeric_limits<int>::max();
inline constexpr int kNoClamp = -1;

enum class Metric { Graph, LInfinity };

// Finite graph with optional lattice embedding. Boundary conditions are
// realized as extra "ghost" vertices carrying a clamped spin index; ghosts
// are never updated by any dynamics and sit after the interior vertices in
// the numbering (interior vertices are row-major for lattices).
class Graph {
  public:
    std::vector<std::vector<int>> adj;  // symmetric, loop-free
    std::vector<int> clamp;             // per vertex: kNoClamp or a spin index
    int dim = 0;                        // 0 when no lattice embedding
    std::vector<int> coords;            // flattened, dim entries per vertex
    std::vector<int> periodic_extent;   // per axis: n for wraparound, 0 if open
    std::vector<int> inner_block;       // B_j for mixed-boundary blocks, else empty

    Graph() = default;
    Graph(const Graph& other)
        : adj(other.adj),
          clamp(other.clamp),
          dim(other.dim),
          coords(other.coords),
          periodic_extent(other.periodic_extent),
          inner_block(other.inner_block) {}
    Graph& operator=(const Graph&) = delete;

    int n() const { return static_cast<int>(adj.size()); }
    int interior_count() const;
    bool is_clamped(int v) const { return clamp[v] != kNoClamp; }
    int max_degree() const;  // over non-clamped vertices
    bool has_coords() const { return dim > 0; }
    const int* coord(int v) const { return coords.data() + static_cast<size_t>(v) * dim; }

    void validate() const;  // symmetry, loop-freeness, clamp table shape

    // metric queries (exact BFS; rows cached once computed when n() is
    // below cache_vertex_budget)
    int distance(int u, int v) const;
    std::vector<int> distances_from(int u) const;
    int linf_distance(int u, int v) const;
    std::vector<int> ball(int v, int r, Metric metric = Metric::Graph) const;
    int metric_distance(int u, int v, Metric metric) const;
    int diameter(const std::vector<int>& subset) const;
    std::vector<std::vector<int>> components(const std::vector<int>& subset, int threshold) const;
    int vertex_at(const std::vector<int>& c) const;  // -1 when absent

    static int cache_vertex_budget;  // default 65536

  private:
    mutable std::unordered_map<int, std::vector<int>> bfs_cache_;
    mutable std::unordered_map<std::string, int> coord_index_;
    mutable std::mutex cache_mutex_;
    std::vector<int> bfs_row(int source) const;
    void ensure_coord_index() const;
};

using GraphPtr = std::shared_ptr<const Graph>;

// One face of a box: either open or clamped to a spin index.
struct FaceBoundary {
    bool clamped = false;
    int spin = 0;
    static FaceBoundary free() { return {false, 0}; }
    static FaceBoundary clamp(int s) { return {true, s}; }
};

// Side-m block with plus boundary on the first j axes, periodic elsewhere.
struct BlockSpec {
    int dim = 2;
    int side = 6;
    int plus_axes = 0;  // j: number of plus-clamped axes, 0 <= j <= dim
    int plus_spin = 1;  // spin index used for the clamped collar
};

GraphPtr build_box(int dim, int side, const std::vector<FaceBoundary>& faces);
GraphPtr build_box_uniform(int dim, int side, FaceBoundary face);
GraphPtr build_torus(int dim, int side);
GraphPtr build_block(const BlockSpec& spec);
// block with the inner-block windows clamped into range, for side >= 3
// (exact small-block computations use sides the strict builder rejects)
GraphPtr build_block_relaxed(const BlockSpec& spec);

GraphPtr build_ladder(int cycle_len);                    // cycle x edge
GraphPtr build_triangular(int rows, int cols);           // periodic, degree 6
GraphPtr build_hexagonal(int rows, int cols);            // periodic, degree 3
GraphPtr build_product_with_cycle(int cycle_len, const std::vector<std::vector<int>>& h_adj);
GraphPtr build_long_range(int dim, int side, int range);  // torus, edges within distance l

std::string serialize_graph(const Graph& g);
GraphPtr parse_graph(const std::string& text);
GraphPtr load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

}  // namespace cutoff
