#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cutoff/graph.hpp"

namespace cutoff {

// Spin assignment for every vertex, clamped vertices included (their entries
// hold the clamp and never change).
using Configuration = std::vector<uint8_t>;

// q x q interaction table in log-weight space; -inf encodes a hard constraint.
struct InteractionTable {
    int q = 2;
    std::vector<double> w;  // row-major, w[x*q + y]
    double operator()(int x, int y) const { return w[static_cast<size_t>(x) * q + y]; }
    bool symmetric() const;
};

enum class ModelKind { Ising, Potts, AntiPotts, Coloring, HardCore, Custom };

// Nearest-neighbor spin system: per-edge interaction tables g_{u,v} and
// per-vertex field tables h_u over a finite spin alphabet 0..q-1. For the
// Ising alphabet index 0 is spin -1 and index 1 is spin +1.
class SpinModel {
  public:
    GraphPtr graph;
    ModelKind kind = ModelKind::Custom;
    int q = 2;
    // edge (u,v) with u < v uses table edge_table[edge_id] oriented as (x at u, y at v)
    std::vector<InteractionTable> tables;
    std::vector<int> edge_table;           // per edge id
    std::vector<std::pair<int, int>> edges;  // u < v, sorted
    std::vector<std::vector<double>> fields;  // per vertex, size q (empty row = zero field)
    double ising_beta = 0.0;               // parameters kept for reporting
    double ising_field = 0.0;
    double potts_beta = 0.0;
    double fugacity = 0.0;

    int n_sites() const { return graph->n(); }
    int edge_id(int u, int v) const;  // -1 when absent
    double interaction(int u, int v, int xu, int xv) const;
    double field(int u, int s) const;

    // weights and conditionals for site x given the configuration off x
    std::vector<double> conditional(const Configuration& sigma, int x) const;
    void conditional_into(const Configuration& sigma, int x, std::vector<double>& p) const;
    double log_weight(const Configuration& sigma) const;  // unnormalized

    bool feasible(const Configuration& sigma) const;
    Configuration canonical_start() const;
    Configuration extreme_start(bool top) const;  // all q-1 / all 0 on free sites
    void validate() const;

    // clamp -> field conversion: same interior sites, ghosts folded into fields
    SpinModel strip_clamps_to_fields() const;

    static int zeta_budget;  // neighborhood enumeration cap per vertex
};

SpinModel make_ising(GraphPtr g, double beta, double field);
SpinModel make_ising_nonuniform(GraphPtr g, const std::vector<double>& edge_beta,
                                const std::vector<double>& vertex_field);
SpinModel make_potts(GraphPtr g, int q, double beta);
SpinModel make_coloring(GraphPtr g, int q);
SpinModel make_hardcore(GraphPtr g, double fugacity);

std::vector<double> conditional_distribution(const SpinModel& m, const Configuration& sigma,
                                             int x);

// Temperature measures: total floor mass of the single-site conditionals
// (heat-bath) and the worst conditional ratio variant (Metropolis).
struct ZetaResult {
    double value = 0.0;
    std::vector<double> floor;  // per spin: min over sites and neighborhoods
};
ZetaResult zeta(const SpinModel& m);
double zeta_metropolis(const SpinModel& m);

// Full Gibbs distribution over free-site configurations, mixed-radix indexed
// (first free site is the most significant digit).
struct GibbsTable {
    std::vector<double> p;
    std::vector<int> free_sites;
    int q = 2;
    size_t index_of(const Configuration& sigma) const;
    Configuration config_of(size_t index, const SpinModel& m) const;
};
GibbsTable gibbs_enumerate(const SpinModel& m, size_t state_budget = size_t{1} << 20);

namespace testing {
// fault hook for the negative-control check: skews every conditional
void corrupt_conditionals(bool on);
bool conditionals_corrupted();
}  // namespace testing

}  // namespace cutoff
