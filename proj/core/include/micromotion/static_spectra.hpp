#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "micromotion/numerov.hpp"
#include "micromotion/units.hpp"

namespace micromotion {

/// H0(d) in the d = 0 basis: diag(E_n) + d^2/2 - d X (oscillator units).
Eigen::MatrixXd build_H0(const UnperturbedBasis& basis, double d);

/// d_min, d_min + step, ..., d_max (inclusive up to rounding).
std::vector<double> distance_grid(double d_min, double d_max, double step);

struct LevelDiscontinuity {
    std::size_t step = 0;  ///< index into distances of the later (smaller-d) point
    double d = 0.0;
    int label = 0;
    double overlap = 0.0;
};

/// Eigenvalues of H0 on a distance grid with continuity-tracked levels.
///
/// The ground level is the trap ground state at the largest distance,
/// followed towards smaller d by maximal overlap with a reference vector. A
/// label's reference is refreshed while its overlap stays above
/// ScanOptions::refresh_overlap, and otherwise after at most max_stale_steps,
/// so narrow crossings are passed diabatically and wide ones adiabatically. Level n > 0 is the n-th
/// trap-localised level (<X> > d'/2) above the ground level in energy order
/// at the same distance; level -n is the n-th level below it. Every level is
/// also tracked individually; `tracked` holds those labels, which equal the
/// energy-order offset at the largest distance.
struct StaticSpectrum {
    std::vector<double> distances;            ///< nominal trap distance, ascending
    double delta_d = 0.0;                     ///< H0 is evaluated at d + delta_d
    std::vector<Eigen::VectorXd> energies;    ///< ascending, per distance
    std::vector<int> ground;                  ///< energy index of the ground level, per distance
    std::vector<std::vector<int>> excited;    ///< energy indices of levels 1, 2, ..., per distance
    std::vector<std::vector<int>> tracked;    ///< tracked label of each energy index, per distance
    std::vector<LevelDiscontinuity> discontinuities;
    std::vector<Eigen::MatrixXd> vectors;     ///< eigenvectors per distance (optional)

    std::size_t size() const noexcept { return distances.size(); }
    /// Energy index of level n at step i, or -1 outside the basis.
    int index_of(std::size_t i, int n) const;
    /// Energy index of tracked label at step i, or -1.
    int tracked_index_of(std::size_t i, int label) const;
    /// E_n(d) over all distances (NaN where absent).
    std::vector<double> level(int n) const;
    std::vector<double> tracked_level(int label) const;
    /// Step whose distance is closest to d.
    std::size_t nearest_step(double d) const;
};

struct ScanOptions {
    double delta_d = 0.0;
    double overlap_threshold = 0.5;   ///< matches below this are recorded as discontinuities
    double refresh_overlap = 0.99;
    int max_stale_steps = 8;
    bool keep_vectors = false;
};

StaticSpectrum scan_spectrum(const UnperturbedBasis& basis, const std::vector<double>& distances,
                             const ScanOptions& opts = {});

/// Eigenvectors of H0(d) at one step of a scan, columns in energy order.
Eigen::MatrixXd eigenvectors_at(const UnperturbedBasis& basis, const StaticSpectrum& spec, std::size_t step);

struct Resonance {
    double d = 0.0;
    int level = 0;     ///< partner level n, as in StaticSpectrum
    int tracked = 0;   ///< tracked label of the partner
    int order = 1;     ///< kappa in E_n - E_0 = kappa omega
    double slope = 0.0;        ///< d/dd (E_n - E_0) at the crossing
    double residual = 0.0;     ///< interpolation estimate of |E_n - E_0 - kappa omega| at d
    bool low_confidence = false;
};

/// Roots of E(d) - E_0(d) - kappa omega, kappa in `orders`, for every
/// tracked level within [d_lo, d_hi]. Sorted by order, then by d.
std::vector<Resonance> find_resonances(const StaticSpectrum& spec, double omega, double d_lo, double d_hi,
                                       double tol = 1e-3, std::vector<int> orders = {1, 2});

/// |<0|V_j|n>| in the instantaneous eigenbasis, with levels n as in
/// StaticSpectrum. Rows follow spec.distances, columns follow `levels`.
///
/// V1 = -gamma^2 (X - d')^2, V2 = -gamma {X - d', P}, V3 = gamma l_ac (X - d'),
/// V4 = -l_ac P, with d' = d + delta_d.
///
/// v2 applies the commutator identity with the instantaneous energies,
/// |<0|V2|n>| = |E_n - E_0| |<0|V1|n>| / gamma. v2_direct evaluates the
/// anticommutator from the derivative matrices. In a truncated basis the two
/// differ by the truncation commutator d [X, X^2] (`truncation_mismatch`).
/// `route_mismatch` instead compares v2_direct with the same identity written
/// in the d = 0 basis, which only feels the discretisation.
struct CouplingTable {
    std::vector<double> distances;
    std::vector<int> levels;
    Eigen::MatrixXd v1, v2, v2_direct, v3, v4;
    double route_mismatch = 0.0;
    double truncation_mismatch = 0.0;
};

struct CouplingOptions {
    int n_min = 0;
    int n_max = 110;
    bool direct_route = true;
    double route_tolerance = 1e-6;  ///< route_mismatch above this throws NumericalError
    double route_floor = 1e-3;      ///< mismatches are |a - b| / max(|b|, floor)
};

CouplingTable coupling_strengths(const UnperturbedBasis& basis, const DimensionlessModel& model,
                                 const StaticSpectrum& spec, const CouplingOptions& opts = {});

enum class DmmStatistic { median, max };

struct DmmOptions {
    double threshold = 0.05;  ///< hbar omega_0
    int n_lo = 3;
    int n_hi = 110;
    DmmStatistic statistic = DmmStatistic::median;
    double hold = 0.1;        ///< the profile must stay above threshold this far below d
};

/// Median (or max) of |<0|V2|n>| over n in [n_lo, n_hi], per distance.
std::vector<double> coupling_profile(const CouplingTable& table, const DmmOptions& opts = {});

/// Largest d at which the coupling profile reaches the threshold coming from
/// large d and stays above it over the next `hold`, linearly interpolated.
/// The median ignores single levels caught in an avoided crossing with a
/// molecular level; isolated narrow crossings are rejected by `hold`.
/// Empty if never reached.
std::optional<double> detect_dmm(const CouplingTable& table, const DmmOptions& opts = {});

struct FieldCoupling {
    double d = 0.0;
    double omega_f = 0.0;       ///< (E_0 - E_target) / hbar, in omega_0
    double x_element = 0.0;     ///< |<0|X|target>| in oscillator lengths
    double rabi = 0.0;          ///< e E0 |<0|X|target>| / hbar [rad/s]
};

/// Resonant frequency and Rabi frequency of a field E0 cos(omega_f t) [V/m]
/// driving level 0 to level `target` at the scan step nearest to d. The
/// length unit follows `convention`.
FieldCoupling field_coupling(const UnperturbedBasis& basis, const StaticSpectrum& spec, const TrapConfig& cfg,
                             double d, double field, int target = -3,
                             MassConvention convention = MassConvention::ion);

/// Analytic centre-of-mass couplings for equal trap frequencies, in hbar omega_0:
/// gamma^2 |<0,0|X_cm^2|n_cm,n>| and gamma |<0,0|{X_cm,P_cm}|n_cm,n>|.
struct CmCouplings {
    double x2 = 0.0;
    double anticommutator = 0.0;
};
CmCouplings cm_rel_couplings(double gamma, int n_cm, int n);

/// E_n - E_0 - (omega - 1): zero on the centre-of-mass sideband resonance.
double sideband_detuning(double E_n, double E_0, double omega);

}  // namespace micromotion
