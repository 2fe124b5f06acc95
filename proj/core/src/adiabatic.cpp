#include "micromotion/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "linalg.hpp"
#include "micromotion/error.hpp"
#include "micromotion/units.hpp"

namespace micromotion {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

// (exp(i k dt) - 1) / (i k), the exact integral of exp(i k t) over [0, dt]
cplx phase_integral(double k, double dt) {
    const double x = k * dt;
    if (std::abs(x) < 1e-6) return dt * cplx(1.0 - x * x / 6.0, 0.5 * x);
    return (std::polar(1.0, x) - 1.0) / (I * k);
}

std::array<double, 4> project_simplex(std::array<double, 4> v) {
    std::array<double, 4> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, tau = 0.0;
    for (int k = 0; k < 4; ++k) {
        css += u[std::size_t(k)];
        const double t = (css - 1.0) / (k + 1);
        if (u[std::size_t(k)] - t > 0.0) tau = t;
    }
    for (auto& x : v) x = std::max(x - tau, 0.0);
    return v;
}

double vmv(const Eigen::Matrix4d& M, const std::array<double, 4>& v) {
    const Eigen::Vector4d x(v[0], v[1], v[2], v[3]);
    return x.dot(M * x);
}

}  // namespace

double landau_zener_angle(double gap, double alpha, double rate) {
    if (!(alpha > 0.0) || !(alpha < constants::pi)) throw UsageError("landau_zener_angle: alpha must lie in (0, pi)");
    if (!(rate > 0.0)) throw UsageError("landau_zener_angle: rate must be positive");
    return std::exp(-0.25 * constants::pi * gap * gap / (rate * std::tan(0.5 * alpha)));
}

double landau_zener(const AvoidedCrossing& c, double rate) {
    if (c.slope_difference == 0.0) throw NumericalError("landau_zener: zero slope difference (degenerate crossing)");
    if (rate == 0.0) throw UsageError("landau_zener: rate must be nonzero");
    const double half = 0.5 * c.gap;
    return std::exp(-2.0 * constants::pi * half * half / std::abs(c.slope_difference * rate));
}

std::vector<AvoidedCrossing> extract_avoided_crossings(const std::vector<double>& x,
                                                       const std::vector<std::vector<double>>& curves,
                                                       double gap_threshold, double omega, int half_window) {
    const std::size_t n = x.size();
    for (const auto& c : curves)
        if (c.size() != n) throw UsageError("extract_avoided_crossings: curve length does not match the grid");
    if (half_window < 1) throw UsageError("extract_avoided_crossings: half_window must be >= 1");
    std::vector<AvoidedCrossing> out;
    if (n < 3) return out;
    std::vector<double> sep(n);
    for (std::size_t a = 0; a < curves.size(); ++a)
        for (std::size_t b = a + 1; b < curves.size(); ++b) {
            for (std::size_t j = 0; j < n; ++j)
                sep[j] = omega > 0.0 ? zone_distance(curves[a][j], curves[b][j], omega) : std::abs(curves[a][j] - curves[b][j]);
            for (std::size_t j = 1; j + 1 < n; ++j) {
                if (!(sep[j] < gap_threshold && sep[j] <= sep[j - 1] && sep[j] < sep[j + 1])) continue;
                const std::size_t lo = j >= std::size_t(half_window) ? j - std::size_t(half_window) : 0;
                const std::size_t hi = std::min(n - 1, j + std::size_t(half_window));
                const auto m = Eigen::Index(hi - lo + 1);
                // sep^2 = A u^2 + B u + C with u = x - x_j
                Eigen::MatrixXd D(m, 3);
                Eigen::VectorXd y(m);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const double u = x[lo + std::size_t(i)] - x[j];
                    D(i, 0) = u * u;
                    D(i, 1) = u;
                    D(i, 2) = 1.0;
                    y[i] = sep[lo + std::size_t(i)] * sep[lo + std::size_t(i)];
                }
                AvoidedCrossing c;
                c.curve_a = int(a);
                c.curve_b = int(b);
                c.location = x[j];
                c.gap = sep[j];
                if (m >= 3) {
                    const Eigen::Vector3d p = D.colPivHouseholderQr().solve(y);
                    const double g2 = p[2] - p[1] * p[1] / (4.0 * p[0]);
                    if (p[0] > 0.0 && g2 >= 0.0) {
                        c.slope = 0.5 * std::sqrt(p[0]);
                        c.location = x[j] - p[1] / (2.0 * p[0]);
                        c.gap = std::sqrt(g2);
                        double rss = 0.0;
                        for (Eigen::Index i = 0; i < m; ++i) {
                            const double fit = std::sqrt(std::max(D.row(i).dot(p), 0.0));
                            rss += (fit - sep[lo + std::size_t(i)]) * (fit - sep[lo + std::size_t(i)]);
                        }
                        c.fit_residual = c.gap > 0.0 ? std::sqrt(rss / double(m)) / c.gap
                                                     : (rss > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
                    } else {
                        c.fit_residual = std::numeric_limits<double>::infinity();
                    }
                } else {
                    c.fit_residual = std::numeric_limits<double>::infinity();
                }
                c.slope_difference = 2.0 * c.slope;
                c.angle = 2.0 * std::atan(c.slope);
                c.reliable = c.fit_residual <= 0.2;
                out.push_back(c);
            }
        }
    std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) { return p.location < q.location; });
    return out;
}

std::vector<RampPoint> linear_ramp(double lambda0, double lambda1, double rate, int points) {
    if (points < 2) throw UsageError("linear_ramp: need at least two points");
    if (!(std::abs(rate) > 0.0)) throw UsageError("linear_ramp: rate must be nonzero");
    std::vector<RampPoint> r(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) {
        const double lam = lambda0 + (lambda1 - lambda0) * j / (points - 1);
        r[std::size_t(j)] = {std::abs(lam - lambda0) / std::abs(rate), lam};
    }
    return r;
}

TransitionAmplitudes transition_amplitudes(const FloquetMatrixFn& floquet_matrix, const FloquetLayout& layout,
                                           double omega, const std::vector<RampPoint>& ramp, int initial_state) {
    if (ramp.size() < 2) throw UsageError("transition_amplitudes: the ramp needs at least two points");
    if (initial_state < 0 || initial_state >= layout.n_states)
        throw UsageError("transition_amplitudes: initial state outside the basis");
    for (std::size_t j = 1; j < ramp.size(); ++j)
        if (ramp[j].t < ramp[j - 1].t) throw UsageError("transition_amplitudes: ramp times must not decrease");

    const Eigen::Index N = layout.size();
    TransitionAmplitudes r;
    auto first = detail::eigh(floquet_matrix(ramp.front().lambda));
    Eigen::Index init = 0;
    first.vectors.row(layout.index(initial_state, 0)).cwiseAbs().maxCoeff(&init);

    Eigen::MatrixXd prev = std::move(first.vectors), prev2;
    Eigen::VectorXd e_prev = first.values;
    std::vector<Eigen::VectorXd> zeros{prev.col(init)};  // initial-state vectors, newest last
    std::vector<int> perm(static_cast<std::size_t>(N));
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(N);
    Eigen::VectorXd phase = Eigen::VectorXd::Zero(N);
    double rich_num = 0.0, rich_den = 0.0;
    bool rich_valid = true;

    for (std::size_t j = 1; j < ramp.size(); ++j) {
        const bool last = j + 1 == ramp.size();
        const auto F = floquet_matrix(ramp[j].lambda);
        Eigen::MatrixXd next;
        Eigen::VectorXd vals;
        if (last) {
            r.final_spectrum = diagonalize_floquet(F, layout, omega, 0.0, true);
            next = r.final_spectrum.vectors;
            vals.resize(N);
            for (Eigen::Index i = 0; i < N; ++i) vals[i] = r.final_spectrum.states[std::size_t(i)].raw;
        } else {
            auto e = detail::eigh(F);
            next = std::move(e.vectors);
            vals = std::move(e.values);
        }

        // continuity tracking: greedy assignment by descending |overlap|
        const Eigen::MatrixXd O = prev.transpose() * next;
        std::vector<std::pair<double, std::pair<int, int>>> cand;
        std::vector<int> best(static_cast<std::size_t>(N));
        bool unique = true;
        std::vector<char> taken(static_cast<std::size_t>(N), 0);
        for (Eigen::Index a = 0; a < N; ++a) {
            Eigen::Index b = 0;
            O.row(a).cwiseAbs().maxCoeff(&b);
            best[std::size_t(a)] = int(b);
            if (taken[std::size_t(b)]) unique = false;
            taken[std::size_t(b)] = 1;
        }
        if (unique) {
            perm = best;
        } else {
            for (Eigen::Index a = 0; a < N; ++a)
                for (Eigen::Index b = 0; b < N; ++b)
                    if (std::abs(O(a, b)) > 1e-3) cand.push_back({-std::abs(O(a, b)), {int(a), int(b)}});
            std::sort(cand.begin(), cand.end());
            std::vector<char> used_a(static_cast<std::size_t>(N), 0), used_b(std::size_t(N), 0);
            std::fill(perm.begin(), perm.end(), -1);
            for (const auto& [w, ab] : cand) {
                if (used_a[std::size_t(ab.first)] || used_b[std::size_t(ab.second)]) continue;
                used_a[std::size_t(ab.first)] = used_b[std::size_t(ab.second)] = 1;
                perm[std::size_t(ab.first)] = ab.second;
            }
            int nb = 0;
            for (Eigen::Index a = 0; a < N; ++a)
                if (perm[std::size_t(a)] < 0) {
                    while (used_b[std::size_t(nb)]) ++nb;
                    perm[std::size_t(a)] = nb;
                    used_b[std::size_t(nb)] = 1;
                }
            r.log.push_back("ambiguous eigenvector tracking at lambda = " + std::to_string(ramp[j].lambda));
        }
        bool reordered = false;
        Eigen::MatrixXd cur(N, N);
        Eigen::VectorXd e_cur(N);
        for (Eigen::Index a = 0; a < N; ++a) {
            const int b = perm[std::size_t(a)];
            if (b != a) reordered = true;
            const double s = O(a, b) < 0.0 ? -1.0 : 1.0;
            if (s < 0.0) ++r.gauge_flips;
            cur.col(a) = s * next.col(b);
            e_cur[a] = vals[b];
        }
        if (reordered) ++r.reorderings;

        const double h = ramp[j].lambda - ramp[j - 1].lambda;
        const double dt = ramp[j].t - ramp[j - 1].t;
        if (h != 0.0) {
            // <a_{j-1}|0_j> - <a_j|0_{j-1}>, central at the midpoint
            const Eigen::VectorXd g = (prev.transpose() * cur.col(init) - cur.transpose() * prev.col(init)) / (2.0 * h);
            for (Eigen::Index a = 0; a < N; ++a) {
                if (a == init) continue;
                const double k = 0.5 * ((e_prev[a] - e_prev[init]) + (e_cur[a] - e_cur[init]));
                const cplx w = dt > 0.0 ? (h / dt) * phase_integral(k, dt) : cplx(h);
                c[a] -= g[a] * std::polar(1.0, phase[a]) * w;
                phase[a] += k * dt;
            }
        } else {
            for (Eigen::Index a = 0; a < N; ++a)
                phase[a] += 0.5 * ((e_prev[a] - e_prev[init]) + (e_cur[a] - e_cur[init])) * dt;
        }

        zeros.push_back(cur.col(init));
        if (zeros.size() > 5) zeros.erase(zeros.begin());
        // Richardson check centred two steps back
        if (zeros.size() == 5 && prev2.size() != 0 && rich_valid) {
            const double hh = ramp[j - 2].lambda - ramp[j - 3].lambda;
            bool uniform = hh != 0.0;
            for (int k = 0; k < 4 && uniform; ++k) {
                const double step = ramp[j - std::size_t(k)].lambda - ramp[j - std::size_t(k) - 1].lambda;
                uniform = std::abs(step - hh) <= 1e-9 * std::abs(hh);
            }
            if (uniform) {
                const Eigen::VectorXd gh = prev2.transpose() * (zeros[3] - zeros[1]) / (2.0 * hh);
                const Eigen::VectorXd g2h = prev2.transpose() * (zeros[4] - zeros[0]) / (4.0 * hh);
                for (Eigen::Index a = 0; a < N; ++a) {
                    if (a == init) continue;
                    rich_num = std::max(rich_num, std::abs(gh[a] - g2h[a]));
                    rich_den = std::max(rich_den, std::abs(gh[a]));
                }
            } else {
                rich_valid = false;
                r.log.push_back("non-uniform lambda grid: Richardson check skipped");
            }
        }
        prev2 = std::move(prev);
        prev = std::move(cur);
        e_prev = e_cur;
    }
    r.richardson_error = rich_valid && rich_den > 0.0 ? rich_num / rich_den : 0.0;
    if (r.gauge_flips > 0) r.log.push_back(std::to_string(r.gauge_flips) + " eigenvector sign flips fixed by continuity");

    // tracked index a ends in eigenpair perm[a] of the final spectrum
    r.c_floquet.assign(std::size_t(N), cplx(0.0));
    for (Eigen::Index a = 0; a < N; ++a) r.c_floquet[std::size_t(perm[std::size_t(a)])] = c[a];
    r.initial_index = perm[std::size_t(init)];
    r.floquet_class = assign_classes(r.final_spectrum);
    r.c_state.assign(r.final_spectrum.classes.size(), cplx(0.0));
    for (std::size_t i = 0; i < r.c_floquet.size(); ++i)
        if (r.floquet_class[i] >= 0) r.c_state[std::size_t(r.floquet_class[i])] += r.c_floquet[i];
    return r;
}

std::array<double, 4> GatePhaseSet::alpha() const {
    std::array<double, 4> a{};
    for (std::size_t k = 0; k < 4; ++k) a[k] = theta_excited[k] - theta[k];
    return a;
}

Eigen::Matrix4d gate_matrix(const std::array<double, 4>& alpha) {
    Eigen::Matrix4d M;
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j) M(k, j) = 1.0 - std::cos(alpha[std::size_t(k)] - alpha[std::size_t(j)]);
    return M;
}

double simplex_max_vmv(const Eigen::Matrix4d& M, std::array<double, 4>* argmax, int restarts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    const double L = 2.0 * std::max(M.cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);
    std::vector<std::array<double, 4>> starts;
    for (int k = 0; k < 4; ++k) {
        std::array<double, 4> v{};
        v[std::size_t(k)] = 1.0;
        starts.push_back(v);
    }
    starts.push_back({0.25, 0.25, 0.25, 0.25});
    for (int r = 0; r < restarts; ++r) {
        std::array<double, 4> v{};
        double s = 0.0;
        for (auto& x : v) s += (x = expo(rng));
        for (auto& x : v) x /= s;
        starts.push_back(v);
    }
    double best = -std::numeric_limits<double>::infinity();
    std::array<double, 4> arg{};
    for (auto v : starts) {
        double f = vmv(M, v);
        for (int it = 0; it < 20000; ++it) {
            const Eigen::Vector4d x(v[0], v[1], v[2], v[3]);
            const Eigen::Vector4d g = 2.0 * M * x;
            std::array<double, 4> w{};
            for (std::size_t k = 0; k < 4; ++k) w[k] = v[k] + g[Eigen::Index(k)] / L;
            w = project_simplex(w);
            const double fw = vmv(M, w);
            double move = 0.0;
            for (std::size_t k = 0; k < 4; ++k) move = std::max(move, std::abs(w[k] - v[k]));
            v = w;
            f = fw;
            if (move < 1e-14) break;
        }
        if (f > best) {
            best = f;
            arg = v;
        }
    }
    if (argmax) *argmax = arg;
    return best;
}

GateFidelity gate_fidelity(const GatePhaseSet& phases, int restarts, std::uint64_t seed) {
    if (!(phases.p_e >= 0.0 && phases.p_e < 1.0)) throw UsageError("gate_fidelity: p_e must lie in [0, 1)");
    GateFidelity out;
    if (phases.p_e > 0.2) out.warnings.push_back("p_e = " + std::to_string(phases.p_e) + " is not small");
    const Eigen::Matrix4d M = gate_matrix(phases.alpha());
    Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
    lu.setThreshold(1e-10);
    bool done = false;
    if (lu.isInvertible()) {
        const Eigen::Vector4d x = lu.solve(Eigen::Vector4d::Ones());
        const double s = x.sum();
        if (s > 0.0 && x.minCoeff() >= -1e-12) {
            out.max_vmv = 1.0 / s;
            for (std::size_t k = 0; k < 4; ++k) out.maximizer[k] = std::max(x[Eigen::Index(k)], 0.0) / s;
            out.used_inverse = true;
            done = true;
        }
    }
    if (!done) out.max_vmv = simplex_max_vmv(M, &out.maximizer, restarts, seed);
    out.max_vmv = std::max(out.max_vmv, 0.0);
    out.fidelity = std::sqrt(1.0 - phases.p_e * out.max_vmv);
    out.bound = std::sqrt(1.0 - 1.5 * phases.p_e);
    return out;
}

}  // namespace micromotion
