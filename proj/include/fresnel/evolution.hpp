#pragma once

// Hyperbolic models with time-dependent coefficients: second-order wave
// operators, higher-order scalar equations and first-order systems. Provides
// characteristic roots, hypothesis checks, time-averaged phases and an exact
// per-frequency evolution solver.
//
// Sign conventions: D = -i d, so D_x^alpha becomes xi^alpha under the Fourier
// transform and a plane wave e^{i(x.xi + t tau)} turns D_t into tau.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "fresnel/oscint.hpp"
#include "fresnel/phase.hpp"

namespace fresnel {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

/// d_t^2 u - sum a_ij(t) d_i d_j u = 0.
struct WaveModelSpec {
    int n = 2;
    std::vector<std::vector<TimeFunction>> a;  // n x n, symmetric
    bool isotropic = false;                     // a_ij = a(t) delta_ij

    static WaveModelSpec isotropic_model(int n, TimeFunction a);
    static WaveModelSpec diagonal(std::vector<TimeFunction> diag);

    /// a(t, xi) = sum a_ij(t) xi_i xi_j.
    double symbol(double t, const Vec& xi) const;
    Mat matrix(double t) const;
    bool constant_coefficients() const;
};

/// D_t^m u + sum_{k < m} sum_{|alpha| = m - k} a_{k,alpha}(t) D_t^k D_x^alpha u = 0.
struct HigherOrderSpec {
    struct Term {
        int k = 0;
        /// Multi-index of D_x; empty stands for |D_x|^(m-k), i.e. |xi|^(m-k).
        std::vector<int> alpha;
        TimeFunction coefficient;
    };
    int n = 2;
    int m = 2;
    std::vector<Term> terms;

    /// Coefficients c_0..c_{m-1} of tau^m + sum c_k tau^k at (t, xi).
    std::vector<double> polynomial(double t, const Vec& xi) const;
    bool constant_coefficients() const;
};

/// D_t U = A(t, D_x) U with A(t, xi) 1-homogeneous in xi.
struct SystemSpec {
    int n = 2;
    int m = 2;
    std::function<CMat(double t, const Vec& xi)> symbol;
    bool self_adjoint = true;
    bool constant_in_t = false;
    bool radial = false;  // A(t, xi) depends on xi only through |xi| (used to share ODE solves)

    /// diag(|xi|, -|xi|).
    static SystemSpec diagonal_wave(int n);
};

using EvolutionSpec = std::variant<WaveModelSpec, HigherOrderSpec, SystemSpec>;

int root_count(const EvolutionSpec& spec);
int spatial_dimension(const EvolutionSpec& spec);

/// Sorted real roots tau_1 < ... < tau_m of the characteristic polynomial.
/// Imaginary parts above imag_tol |xi| raise HypothesisViolation; adjacent
/// roots closer than gap_tol |xi| raise DistinctnessError.
std::vector<double> characteristic_roots(const EvolutionSpec& spec, double t, const Vec& xi, double imag_tol = 1e-9,
                                         double gap_tol = 1e-9);

struct HyperbolicityReport {
    double c_gap = 0.0;
    double witness_t = 0.0;
    Vec witness_xi;
};

/// min over the grids of min_{i != j} |tau_i - tau_j| on unit directions.
HyperbolicityReport check_strict_hyperbolicity(const EvolutionSpec& spec, const std::vector<double>& t_grid,
                                               const std::vector<Vec>& directions, double gap_tol = 1e-6);

/// (1/t) int_0^t tau_j(theta, xi) dtheta; j indexes the sorted roots.
double averaged_phase(const EvolutionSpec& spec, int j, double t, const Vec& xi, double rel_tol = 1e-9);

/// Time-averaged phase at a fixed time, as a PhaseSpec of kind TimeAveraged.
/// Wave models get exact jets; other models differentiate numerically. The
/// default root is the largest.
PhaseSpec fresnel_phase_at(const EvolutionSpec& spec, double t, std::optional<int> j = std::nullopt);

struct HhReport {
    double sup = 0.0;
    double witness_t = 0.0;
    int witness_root = 0;
    Vec witness_direction;
};

/// sup over roots j, t <= t_max and directions of
/// |sum_{k != j} int_0^t d_theta tau_j / (tau_j - tau_k) dtheta|.
HhReport check_hh_condition(const EvolutionSpec& spec, double t_max, const std::vector<Vec>& directions);

// ---------------------------------------------------------------------------
// Evolution

/// Initial data: (u_0, ..., u_{m-1}) with u_j = d_t^j u(0) for scalar models,
/// or the m components of U(0) for systems. All fields share one grid.
struct CauchyData {
    std::vector<GriddedField> fields;
};

struct EvolveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// Frequencies where every datum is below this fraction of the peak are left at zero.
    double spectrum_floor = 1e-15;
};

struct EvolutionResult {
    std::vector<double> times;
    /// fields[i][c]: component c at times[i] (one component for scalar models).
    std::vector<std::vector<GriddedField>> fields;
    /// Scalar models: sum over the grid of |d_t u_hat|^2 + a(t, xi) |u_hat|^2 (wave) or the
    /// squared norm of the state vector (other models); systems: squared L2 norm of U.
    std::vector<double> energies;
    std::vector<double> sup_norms;
    std::vector<double> l2_norms;
    std::size_t ode_solves = 0;
};

EvolutionResult evolve(const EvolutionSpec& spec, const CauchyData& data, const std::vector<double>& t_list,
                       const EvolveOptions& options = {});

/// Fundamental solution of the per-frequency ODE at xi: entry [i](r, c) is the
/// r-th time derivative (scalar models) or component r (systems) at t_list[i]
/// for unit initial vector c.
std::vector<CMat> mode_propagator(const EvolutionSpec& spec, const Vec& xi, const std::vector<double>& t_list,
                                  const EvolveOptions& options = {});

/// Isotropic wave model, n = 2, data u_hat_0 = psi(|xi|) (annulus profile), u_1 = 0:
/// u(t, r) = (2 pi)^-1 int psi(s) V(t, s) J0(s r) s ds, where V solves
/// V'' + a(t) s^2 V = 0, V(0) = 1, V'(0) = 0.
class RadialWaveEvolution {
public:
    RadialWaveEvolution(WaveModelSpec spec, AnnulusProfile profile, std::vector<double> t_list,
                        const EvolveOptions& options = {});

    const std::vector<double>& times() const { return times_; }
    /// u(times()[i], r).
    cplx value(std::size_t i, double r) const;
    /// max over r of |u| on a sampling of the wavefront band, refined locally.
    double sup_norm(std::size_t i) const;
    /// int_0^t sqrt(a) dtheta: the wavefront radius at times()[i].
    double front(std::size_t i) const { return fronts_[i]; }
    std::size_t node_count() const { return s_.size(); }

private:
    WaveModelSpec spec_;
    AnnulusProfile profile_;
    std::vector<double> times_;
    std::vector<double> fronts_;
    std::vector<double> s_;
    std::vector<double> weights_;            // GL weight * psi(s) * s / (2 pi)
    std::vector<std::vector<double>> v_;     // v_[i][node] = V(t_i, s_node)
};

/// J0 with a large-argument asymptotic expansion above 25.
double bessel_j0(double z);

}  // namespace fresnel
