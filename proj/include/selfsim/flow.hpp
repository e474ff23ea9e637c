#pragma once

#include <string>
#include <vector>

#include "selfsim/func.hpp"
#include "selfsim/profile.hpp"

namespace selfsim {

// Outer boundary at r_max. Decay imposes w' = -alpha w / r, the tail law of decaying profiles.
enum class Boundary { Auto, Neumann, Dirichlet, Decay };
std::string to_string(Boundary b);

struct FlowGridConfig {
    int cells = 800;
    double r_max = 20.0;
    Boundary boundary = Boundary::Auto;  // Neumann for constant data, Decay otherwise
    bool equilibrate = true;             // replace shooting profiles by the nearby discrete equilibrium
};

struct StepConfig {
    double dt_max = 0.01;
    double dt_frac = 0.02;  // dt <= dt_frac * ||w||_inf^{1-p}
};

struct StopConfig {
    double cap_factor = 1000.0;  // blow-up once ||w||_inf > cap_factor * kappa
    double conv_tol = 1e-8;      // ||d_tau w||_inf below this counts as converged
    std::size_t max_steps = 2000000;
    double eps_radius = 5.0;
};

struct FlowDiag {
    double tau = 0.0, sup_norm = 0.0, weighted_avg = 0.0, energy = 0.0, dt = 0.0, min_dtau_w = 0.0;
    double argmax_r = 0.0, outer_sup = 0.0;
    double min_ratio = 0.0;  // min of d_tau w / |w|^p over r <= eps_radius
};

struct FlowState {
    Parameters params;
    Boundary boundary = Boundary::Neumann;
    double tau = 0.0;
    double dt = 0.0;
    std::vector<double> r, mass;  // cell centers and Gaussian cell measures (sum = 1 up to truncation)
    std::vector<double> w;
    // stationary reference kept exact by the splitting (empty: zero)
    std::vector<double> w_ref;
    double ref_radius = 0.05;  // dropped once sup|w - w_ref| exceeds this fraction of sup|w_ref|
    // previous states for BDF2 differencing of d_tau w
    std::vector<double> w_prev, w_prev2;
    double dt_prev = 0.0, dt_prev2 = 0.0;
    int steps = 0;
    std::vector<double> k_diag, k_off;  // stiffness K, M w' = -K w - M G'(w)
    double k_bnd = 0.0;                 // outer boundary contribution to the last diagonal entry
};

FlowState init_flow(const RadialProfile& initial, const FlowGridConfig& grid = {});
FlowState init_flow(const RadialProfile& base, const RadialField& direction, double s, const FlowGridConfig& grid = {});
FlowState init_constant(const Parameters& par, double w0, const FlowGridConfig& grid = {});

// max(1, sup|w|^p), the size of the reaction term; residual tolerances are relative to it
double reaction_scale(const FlowState& st);
// Newton iteration for the stationary state of the semi-discrete flow nearest st.w;
// returns the final max-norm residual of d_tau w (tol is relative to reaction_scale).
double equilibrate(FlowState& st, int max_iter = 40, double tol = 1e-11);
// Positive ground state of the discrete linearization at st.w (sum M f^2 = 1) and its eigenvalue
// in the convention L f + lambda f = 0.
std::vector<double> discrete_ground_state(const FlowState& st, double& lambda);

// Scale of the direction f in w + s f. L2: int f^2 rho = 1. ProfileSup: sup|f| = sup|w|, so s is a
// relative amplitude; the L2-normalized ground state of a sharp core peaks far above the profile.
enum class DirectionScale { L2, ProfileSup };
std::string to_string(DirectionScale d);

// st.w += s f with f the discrete ground state at st.w; returns its eigenvalue. The stationary
// reference (if any) is kept, so s = 0 leaves an equilibrated state unchanged.
double perturb_along_ground_state(FlowState& st, double s, DirectionScale scale = DirectionScale::ProfileSup);

// One Strang step: half reaction (exact), linear part (TR-BDF2), half reaction.
void step(FlowState& st, double dt);
double choose_dt(const FlowState& st, const StepConfig& cfg);

// Discrete Giga-Kohn energy, the Lyapunov functional of the semi-discrete flow.
double flow_energy(const FlowState& st);
// A(tau) = int w rho
double weighted_average(const FlowState& st);
// A(tau) - kappa; positive certifies blow-up ahead for positive solutions
double blowup_criterion(const FlowState& st);

enum class FlowOutcome { ConvergedToProfile, BlewUp, ReachedMaxTime };
std::string to_string(FlowOutcome o);

struct FlowReport {
    FlowOutcome outcome = FlowOutcome::ReachedMaxTime;
    double tau_end = 0.0;
    double tau1 = 0.0;  // extrapolated blow-up time (BlewUp only)
    bool cap_reached = false;  // false: stopped when dt no longer resolves tau
    std::vector<FlowDiag> series;
    std::vector<double> r, w_final;
    std::string limit;  // "zero", "kappa", "other" (ConvergedToProfile only)
    double max_energy_increase = 0.0;  // largest per-step increase of the energy
    double min_dtau_w = 0.0;           // over grid and time
    double max_avg_minus_kappa = 0.0;  // sup_tau A(tau) - kappa
    Boundary boundary = Boundary::Neumann;
    int steps = 0;
};

FlowReport run(FlowState& st, double tau_max, const StepConfig& step_cfg = {}, const StopConfig& stop = {});

struct FlowSummary {
    double min_dtau_w = 0.0;
    double type1_indicator = 0.0;  // sup (tau1 - tau)^{1/(p-1)} ||w||_inf, BlewUp only
    double blowup_r = 0.0;         // argmax at the last resolved step
    double outer_sup_initial = 0.0, outer_sup_final = 0.0;
    bool compact_blowup_set = false;
    double eps_estimate = 0.0;  // min d_tau w / w^p over the window (see flow_diagnostics)
    double energy_plateau = 0.0;
};
// eps is estimated as min d_tau w / w^p over the second half of the run (r <= eps_radius).
FlowSummary flow_diagnostics(const FlowReport& rep, const Parameters& par);

std::string flow_csv(const FlowReport& rep);

struct PerturbationReport {
    double s = 0.0;
    double lambda_w = 0.0, lambda_ws = 0.0, margin = 0.0;  // margin = lambda_w - lambda_ws
    bool entropy_unconverged = false;
    double E_kappa = 0.0;
    bool flow_run = false;
    FlowOutcome outcome = FlowOutcome::ReachedMaxTime;
    double tau1 = 0.0;
    double final_energy = 0.0, plateau_energy = 0.0;
    double min_dtau_w = 0.0;
    double discrete_lambda1 = 0.0;
    double direction_sup = 0.0;  // sup |f| of the direction actually used
};

struct PerturbationConfig {
    EntropyConfig entropy;
    DirectionScale scale = DirectionScale::ProfileSup;
    bool run_flow = true;
    double tau_max = 20.0;
    FlowGridConfig grid;
    int eigen_resolution = 1000;
};
PerturbationReport entropy_perturbation_experiment(const RadialProfile& profile, double s,
                                                   const PerturbationConfig& cfg = {});

}  // namespace selfsim
