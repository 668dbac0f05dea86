#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cutoff/model.hpp"
#include "cutoff/rng.hpp"

namespace cutoff {

enum class DynKind { HeatBath, Metropolis };
enum class Policy { Monotone, Threshold, Permutation };

std::string to_string(DynKind k);
std::string to_string(Policy p);
DynKind dyn_kind_from(const std::string& s);
Policy policy_from(const std::string& s);

// One site update: clock time, target site, the primary uniform, and
// whatever auxiliary randomness the dynamics/policy consumes.
struct UpdateEvent {
    double t = 0.0;
    int site = 0;
    double u = 0.0;
    int proposal = -1;           // Metropolis proposal spin, -1 when unused
    std::vector<uint8_t> perm;   // color permutation, empty when unused
};

// The full randomness W of the random-mapping representation over (0, horizon).
struct UpdateSequence {
    uint64_t seed = 0;
    DynKind kind = DynKind::HeatBath;
    Policy policy = Policy::Monotone;
    double horizon = 0.0;
    std::vector<UpdateEvent> events;  // strictly increasing in t
};

// Per-site rate-one Poisson clocks merged into one stream; q is the spin
// alphabet size consumed by Metropolis proposals and color permutations.
UpdateSequence sample_updates(const Graph& g, double horizon, uint64_t seed, DynKind kind,
                              Policy policy, int q);

std::string serialize_updates(const UpdateSequence& w);
UpdateSequence parse_updates(const std::string& text);
std::vector<uint8_t> serialize_updates_binary(const UpdateSequence& w);
UpdateSequence parse_updates_binary(const std::vector<uint8_t>& bytes);
void save_updates(const UpdateSequence& w, const std::string& path, bool binary = false);
UpdateSequence load_updates(const std::string& path);

// Deterministic evolution: heat-bath resamples by inverse CDF of the
// conditional in the canonical spin order (the shared-uniform coupling);
// Metropolis accepts the proposal iff u <= conditional ratio.
Configuration evolve(const SpinModel& m, Configuration sigma, const UpdateSequence& w);
void apply_event(const SpinModel& m, Configuration& sigma, const UpdateEvent& e, DynKind kind);

// Bounding-chain state: per site either a value shared by every coupled
// trajectory or UNKNOWN; monotone mode additionally keeps the extreme pair.
struct EnvelopeState {
    std::vector<uint8_t> determined;
    Configuration value;
    Configuration lower, upper;  // monotone mode only
    int unknown = 0;

    double unknown_fraction(int free_sites) const {
        return free_sites ? static_cast<double>(unknown) / free_sites : 0.0;
    }
};

struct EnvelopeSnapshot {
    double t = 0.0;
    double unknown_fraction = 0.0;
    std::vector<uint8_t> determined;  // kept only when requested
};

struct GrandOptions {
    std::vector<double> snapshot_times;        // sorted
    bool keep_site_indicators = false;         // store per-site flags per snapshot
    std::vector<Configuration> explicit_starts;  // co-simulated under the same W
    bool check_containment = false;            // assert envelope soundness per event
};

struct GrandResult {
    EnvelopeState final_state;
    std::vector<EnvelopeSnapshot> snapshots;
    std::vector<Configuration> final_explicit;
    int free_sites = 0;
};

// Shared-randomness data a policy needs before events can be replayed.
struct CouplingRules {
    Policy policy = Policy::Monotone;
    double zeta = 0.0;               // threshold mode
    std::vector<double> floor_cdf;   // cumulative floor masses, total = zeta
    std::vector<double> floor_pm;    // per-spin floor masses
};
CouplingRules make_rules(const SpinModel& m, Policy policy);

// One trajectory under the policy's per-event rule (same marginals as the
// plain dynamics; the split of [0,1) differs for the threshold policy).
void apply_event_policy(const SpinModel& m, const CouplingRules& rules, Configuration& sigma,
                        const UpdateEvent& e);
Configuration evolve_policy(const SpinModel& m, const CouplingRules& rules, Configuration sigma,
                            const UpdateSequence& w);

EnvelopeState make_envelope(const SpinModel& m, Policy policy);
void envelope_apply(const SpinModel& m, const CouplingRules& rules, EnvelopeState& env,
                    const UpdateEvent& e);

GrandResult grand_evolve(const SpinModel& m, const UpdateSequence& w, Policy policy,
                         const GrandOptions& opts = {});

// Exact disagreement curve (monotone) or a pointwise superset (bounding modes).
struct DisagreementCurve {
    std::vector<double> times;
    std::vector<double> unknown_fraction;
    std::vector<std::vector<uint8_t>> site_unknown;  // optional per-time indicators
};
DisagreementCurve disagreement_curve(const SpinModel& m, const UpdateSequence& w, Policy policy,
                                     const std::vector<double>& grid,
                                     bool keep_site_indicators = false);

// Standard contact process: per-site heal clocks at rate zeta, per directed
// edge infect clocks at rate 1 - zeta, all sites initially infected.
struct ContactCurve {
    std::vector<double> times;
    std::vector<int> infected;
};
ContactCurve simulate_contact(const Graph& g, double zeta, const std::vector<double>& grid,
                              uint64_t seed);

// Coupling upper bound on worst-start TV: fraction of replicas whose grand
// coupling has not fully coalesced by t, with binomial confidence bounds.
struct TvUpperCurve {
    std::vector<double> times;
    std::vector<double> estimate;
    std::vector<double> lo95, hi95;
    int replicas = 0;
};
TvUpperCurve coupling_tv_upper(const SpinModel& m, Policy policy, const std::vector<double>& grid,
                               int replicas, uint64_t seed, int workers = 1);

std::vector<double> geometric_grid(double t_min, double t_max, int points);
std::vector<double> linear_grid(double t_max, int points);

}  // namespace cutoff
