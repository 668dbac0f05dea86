#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cutoff/dynamics.hpp"
#include "cutoff/model.hpp"

namespace cutoff {

// Sparse generator of the continuous-time single-site dynamics over the
// mixed-radix state space of the free sites (first free site = most
// significant digit). Rows sum to zero; reversible w.r.t. the Gibbs law.
struct GeneratorMatrix {
    size_t n_states = 0;
    DynKind kind = DynKind::HeatBath;
    GibbsTable gibbs;                 // stationary law and state indexing
    std::vector<double> pi;           // alias of gibbs.p
    std::vector<size_t> row_ptr;      // CSR over off-diagonal entries
    std::vector<uint32_t> col;
    std::vector<double> val;
    std::vector<double> diag;         // negative row sums
    double uniformization_rate = 0.0;  // max |diag|

    std::vector<double> apply_to_distribution(const std::vector<double>& nu) const;  // nu P
};

GeneratorMatrix build_generator(const SpinModel& m, DynKind kind,
                                size_t state_budget = size_t{1} << 16);

// nu e^{tQ} by uniformization; truncated Poisson tail below 1e-12
std::vector<double> heat_kernel(const GeneratorMatrix& gen, const std::vector<double>& init,
                                double t);
std::vector<double> point_mass(const GeneratorMatrix& gen, size_t state);

struct DistanceTriple {
    double tv = 0.0, l2 = 0.0, linf = 0.0;
};
DistanceTriple distances(const std::vector<double>& nu, const std::vector<double>& pi);

// exact spectral gap of the pi-symmetrized generator (dense below the
// crossover, Lanczos with full reorthogonalization above it)
double spectral_gap(const GeneratorMatrix& gen, size_t dense_budget = 2048);

struct LogSobolevEstimate {
    double alpha = 0.0;   // upper estimate of the log-Sobolev constant
    double gap = 0.0;
    bool cert_two_alpha_le_gap = false;
    bool cert_positive = false;
    double two_point_exact = -1.0;  // closed form when the chain has 2 states
    int restarts = 0;
};
LogSobolevEstimate log_sobolev_estimate(const GeneratorMatrix& gen, int restarts = 32,
                                        uint64_t seed = 1);

struct LsBoundCheck {
    double t = 0.0;
    double l2 = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    bool ok = false;
};
// t = (4 alpha)^{-1} |log log(1/pi(y0))|^+ + s/gap, then L2-distance at t
// must not exceed exp(1-s)
LsBoundCheck check_ls_bound(const GeneratorMatrix& gen, size_t start_state, double s,
                            double alpha_s, double gap);

// product-chain machinery
double product_M(const std::vector<double>& component_l2);  // sum of squares
double product_tv_bound(double m_t);                        // sqrt
double product_tv_asymptotic(double m_t);                   // 2 Phi(sqrt/2) - 1
double std_normal_cdf(double x);

// continuous-time random walk on the n-dimensional hypercube: exact TV from
// a point mass via the binomial collapse, log-space guarded up to n = 1e6
double hypercube_tv_exact(long long n, double t);
struct HypercubeProfile {
    std::vector<double> c, t, tv, asymptotic;
};
HypercubeProfile hypercube_profile(long long n, const std::vector<double>& c_grid);

struct CutoffPrediction {
    double location = 0.0;
    double window = 0.0;
};
CutoffPrediction product_cutoff_predict(double gap, double alpha_s, double phi_min, double n);
// location = (1/2) max_{0<=j<d} (d-j)/lambda_j * log n
double plus_cutoff_predict(int d, double n, const std::vector<double>& lambda_j);

// worst-start mixing curve; which starts get scanned is reported, never
// silently assumed
enum class StartScan { Auto, Extremes, AllStates, Canonical };
struct MixingCurve {
    std::vector<double> times;
    std::vector<double> tv, l2, linf;
    std::string start_scan;  // "extremes" | "all-states" | "canonical"
};
MixingCurve exact_mixing_curve(const SpinModel& m, const GeneratorMatrix& gen,
                               const std::vector<double>& grid,
                               StartScan scan = StartScan::Auto);

struct TmixBracket {
    double lower = 0.0;
    double upper = 0.0;
    bool exact = false;
    double confidence = 1.0;  // statistical modes report their nominal level
    std::string note;
};
TmixBracket tmix_exact(const SpinModel& m, double eps, size_t state_budget = size_t{1} << 14,
                       StartScan scan = StartScan::Auto);
TmixBracket tmix_empirical(const SpinModel& m, Policy policy, double eps,
                           const std::vector<double>& grid, int replicas, uint64_t seed,
                           int workers = 1);

// mixed-boundary block quantities: the squared L2 decay of the inner-block
// projection and the block spectral gap
struct BlockProfile {
    std::vector<double> times;
    std::vector<double> m_jt;  // max over the two extreme starts
    double lambda = 0.0;       // block gap
    size_t states = 0;
    std::vector<int> inner_block;
};
BlockProfile block_profile(int dim, int side, int plus_axes, double beta, double field,
                           const std::vector<double>& grid,
                           size_t state_budget = size_t{1} << 16);

}  // namespace cutoff
