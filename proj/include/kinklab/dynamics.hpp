#pragma once
#include <functional>
#include <string>
#include <vector>

#include "kinklab/kink.hpp"
#include "kinklab/spectral.hpp"

namespace kinklab {

// perturbation of the moving front: position field and its velocity
struct FieldState {
    double t = 0;
    GridFn phi1;
    GridFn phi2;
};

enum class BoundaryKind { dirichlet, sponge };

struct SimConfig {
    double dt = 0;
    double T_final = 0;
    BoundaryKind boundary = BoundaryKind::sponge;
    double sponge_width = 10.0;
    int sample_every = 25;
    bool linear_only = false; // drop the nonlinear force (phase-check hook)
};

// dt = 0.4 h, sponge boundary, sampling every 25 steps
SimConfig make_sim_config(const Grid& g, double T_final);

// kinds: "internal-mode" (epsilon * Ybar1, 0), "radiation" (odd Gaussian pair
// at +-20, velocity zero, scaled to norm epsilon), "mixed" (equal split,
// scaled to norm epsilon)
FieldState make_initial(const std::string& kind, double epsilon, const SpectralData& sd);

// sqrt(integral phi1'^2 + phi1^2 + phi2^2)
double norm_h1l2(const FieldState& s);

// same norm restricted to |y| <= a
double norm_h1l2_window(const FieldState& s, double a);

// one kick-drift-kick step of phi1' = phi2, phi2' = -(weighted operator)phi1
// - (3 K phi1^2 + phi1^3); ends pinned to zero, sponge damps phi2 in the
// outer band
FieldState step(const FieldState& s, const KinkProfile& kink, const DriftProfile& drift,
                const SimConfig& cfg);

// integral p [phi2^2 + phi1 * (weighted operator phi1) + 2 K phi1^3 + phi1^4/2],
// with the same conservative stencil the stepper uses
double energy(const FieldState& s, const KinkProfile& kink, const DriftProfile& drift);

struct Trajectory {
    std::vector<double> times; // sampling instants
    std::vector<FieldState> snapshots;
    FieldState final_state;
    double sup_norm = 0; // over sampled states
    long steps = 0;
};

using SampleFn = std::function<void(const FieldState&)>;

// advance to T_final; invokes on_sample every sample_every steps (including
// the initial and final states) and keeps a coarse set of full snapshots
Trajectory run(const FieldState& init, const KinkProfile& kink, const DriftProfile& drift,
               const SimConfig& cfg, const SampleFn& on_sample = {});

} // namespace kinklab
