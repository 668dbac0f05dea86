#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cutoff/dynamics.hpp"
#include "cutoff/model.hpp"

namespace cutoff {

// radius r = floor(10 * Delta * log(n) / alpha_hat)
int compute_r(int delta, double alpha_hat, int n);
// rho = max ball size at radius r over free vertices
int compute_rho(const Graph& g, int r, Metric metric = Metric::Graph);

struct SparseParams {
    double max_size = 0;        // rho^3 log n
    double max_diameter = 0;    // (1/2) log^2 n
    double min_separation = 0;  // 25 Delta log(n) / alpha_hat
    int delta = 0;
    double alpha_hat = 1.0;
    int n = 0;
    double rho = 0;
    int r = 0;

    static SparseParams from_inputs(int delta, double alpha_hat, int n, double rho);
    static SparseParams explicit_params(double max_size, double max_diameter,
                                        double min_separation);
};

enum class MergeRule { SeparationThreshold, FiveR };

struct SparseVerdict {
    bool sparse = false;
    bool size_ok = true, diameter_ok = true, separation_ok = true;
    std::string violation;  // first failure, empty when sparse
    std::vector<std::vector<int>> parts;
};

SparseVerdict check_sparse(const Graph& g, const std::vector<int>& lambda,
                           const SparseParams& params,
                           MergeRule rule = MergeRule::SeparationThreshold);

struct SupportReport {
    std::vector<int> support;  // sorted vertex ids
    bool exact = false;        // brute-force support vs. covering superset
    SparseVerdict verdict;
    double horizon = 0.0;
    int radius = 0;
};

// Coupled family of ball-restricted chains sharing the base chain's updates:
// an update at site v is replayed inside every ball B_u(r) containing v, with
// interactions crossing the ball's border severed (free boundary).
struct BarrierSystem {
    const SpinModel* model = nullptr;
    int radius = 0;
    Metric metric = Metric::Graph;
};
// default metric: graph distance in general, L-infinity on coordinate lattices
BarrierSystem make_barrier(const SpinModel& m, int radius);
BarrierSystem make_barrier(const SpinModel& m, int radius, Metric metric);

// the ball-restricted model around one center, plus local/global maps
struct BallModel {
    SpinModel model;
    std::vector<int> vertices;  // sorted global ids; local index = position
    int center_local = -1;
    int local_of(int global) const;
};
BallModel induced_ball_model(const SpinModel& m, int center, int radius, Metric metric);

// the barrier-dynamics map G_s: evolve every ball chain under the shared
// events, then read each center's value off its own ball
Configuration barrier_evolve(const BarrierSystem& b, const Configuration& sigma0,
                             const UpdateSequence& w);

// per-frame view of the superset evolution, for snapshot emission
struct SupportFrame {
    double t = 0.0;
    std::vector<uint8_t> in_support;   // per site: covered by some failing ball
    std::vector<double> freeze_age;    // per center: t - coalescence time, <0 if live
    double support_fraction = 0.0;
};

struct SupersetOptions {
    std::vector<double> frame_times;  // sorted; empty = final state only
    int workers = 1;
};

struct SupersetResult {
    SupportReport report;
    std::vector<SupportFrame> frames;
};

// Covering superset of the update support: run the grand coupling inside
// every ball; wherever the center is still undetermined at the horizon, the
// whole ball joins the cover.
SupersetResult support_superset(const BarrierSystem& b, const UpdateSequence& w, Policy policy,
                                const SparseParams& params, const SupersetOptions& opts = {});

// Exhaustive support of a deterministic map on spin space (free sites only):
// v is in the support iff two inputs differing only at v map differently.
using SpinMap = std::function<Configuration(const Configuration&)>;
std::vector<int> map_support(const SpinModel& m, const SpinMap& f, size_t pair_budget);

SupportReport support_exact(const SpinModel& m, const UpdateSequence& w,
                            const SparseParams& params, size_t pair_budget = size_t{1} << 16);
SupportReport support_exact_barrier(const BarrierSystem& b, const UpdateSequence& w,
                                    const SparseParams& params,
                                    size_t pair_budget = size_t{1} << 16);

// P2/P5 graymap emission for lattice graphs: support sites are white, the
// rest darken with the age of their ball's coalescence.
std::string frame_to_pgm(const Graph& g, const SupportFrame& frame, bool binary = true);

}  // namespace cutoff
