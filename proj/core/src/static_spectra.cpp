#include "micromotion/static_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linalg.hpp"
#include "micromotion/error.hpp"
#include "micromotion/parallel.hpp"

namespace micromotion {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t chunk = 32;
constexpr double trap_slack = 1e-9;

/// Greedy one-to-one matching of current eigenvectors to reference ones by
/// |overlap|. Returns the reference index and overlap for each current index.
std::vector<std::pair<int, double>> match(const Eigen::MatrixXd& prev, const Eigen::MatrixXd& cur) {
    const Eigen::MatrixXd O = (prev.transpose() * cur).cwiseAbs();
    const Eigen::Index n = O.cols();
    std::vector<std::pair<int, double>> out(std::size_t(n), {-1, 0.0});

    std::vector<int> best(static_cast<std::size_t>(n));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    bool unique = true;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index i;
        O.col(j).maxCoeff(&i);
        best[std::size_t(j)] = int(i);
        if (taken[std::size_t(i)]) unique = false;
        taken[std::size_t(i)] = 1;
    }
    if (unique) {
        for (Eigen::Index j = 0; j < n; ++j) out[std::size_t(j)] = {best[std::size_t(j)], O(best[std::size_t(j)], j)};
        return out;
    }

    std::vector<std::pair<double, Eigen::Index>> entries;
    entries.reserve(std::size_t(n * n));
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) entries.push_back({O(i, j), i + n * j});
    std::sort(entries.begin(), entries.end(), [](auto& a, auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<char> row_used(static_cast<std::size_t>(n), 0), col_used(static_cast<std::size_t>(n), 0);
    Eigen::Index left = n;
    for (auto& [val, idx] : entries) {
        const Eigen::Index i = idx % n, j = idx / n;
        if (row_used[std::size_t(i)] || col_used[std::size_t(j)]) continue;
        row_used[std::size_t(i)] = col_used[std::size_t(j)] = 1;
        out[std::size_t(j)] = {int(i), val};
        if (--left == 0) break;
    }
    return out;
}

double lagrange(const double* x, const double* y, int n, double t) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double w = y[i];
        for (int j = 0; j < n; ++j)
            if (j != i) w *= (t - x[j]) / (x[i] - x[j]);
        s += w;
    }
    return s;
}

}  // namespace

Eigen::MatrixXd build_H0(const UnperturbedBasis& basis, double d) {
    const int n = basis.size();
    if (basis.X.rows() != n) throw UsageError("basis has no position matrix");
    Eigen::MatrixXd H = -d * basis.X;
    for (int i = 0; i < n; ++i) H(i, i) += basis.energies[std::size_t(i)] + 0.5 * d * d;
    return H;
}

std::vector<double> distance_grid(double d_min, double d_max, double step) {
    if (!(step > 0.0) || d_max < d_min) throw UsageError("distance_grid: need step > 0 and d_max >= d_min");
    const auto n = std::size_t(std::floor((d_max - d_min) / step + 1e-9)) + 1;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = d_min + double(i) * step;
    return d;
}

int StaticSpectrum::index_of(std::size_t i, int n) const {
    if (n > 0) {
        const auto& e = excited.at(i);
        return std::size_t(n) <= e.size() ? e[std::size_t(n - 1)] : -1;
    }
    const int j = ground.at(i) + n;
    return j >= 0 ? j : -1;
}

int StaticSpectrum::tracked_index_of(std::size_t i, int label) const {
    const auto& l = tracked.at(i);
    for (std::size_t j = 0; j < l.size(); ++j)
        if (l[j] == label) return int(j);
    return -1;
}

std::vector<double> StaticSpectrum::level(int n) const {
    std::vector<double> out(size(), nan);
    for (std::size_t i = 0; i < size(); ++i) {
        const int j = index_of(i, n);
        if (j >= 0) out[i] = energies[i][j];
    }
    return out;
}

std::vector<double> StaticSpectrum::tracked_level(int label) const {
    std::vector<double> out(size(), nan);
    for (std::size_t i = 0; i < size(); ++i) {
        const int j = tracked_index_of(i, label);
        if (j >= 0) out[i] = energies[i][j];
    }
    return out;
}

std::size_t StaticSpectrum::nearest_step(double d) const {
    if (distances.empty()) throw UsageError("empty spectrum");
    auto it = std::lower_bound(distances.begin(), distances.end(), d);
    if (it == distances.end()) return size() - 1;
    const auto i = std::size_t(it - distances.begin());
    if (i > 0 && std::abs(distances[i - 1] - d) <= std::abs(distances[i] - d)) return i - 1;
    return i;
}

StaticSpectrum scan_spectrum(const UnperturbedBasis& basis, const std::vector<double>& distances, const ScanOptions& opts) {
    if (distances.empty()) throw UsageError("scan_spectrum: empty distance grid");
    for (std::size_t i = 1; i < distances.size(); ++i)
        if (!(distances[i] > distances[i - 1])) throw UsageError("scan_spectrum: distances must ascend");
    const std::size_t m = distances.size();
    const int n = basis.size();

    StaticSpectrum spec;
    spec.distances = distances;
    spec.delta_d = opts.delta_d;
    spec.energies.resize(m);
    spec.ground.resize(m);
    spec.excited.resize(m);
    spec.tracked.resize(m);
    if (opts.keep_vectors) spec.vectors.resize(m);

    Eigen::MatrixXd ref;
    std::vector<int> age;
    std::vector<int> prev_labels;
    std::vector<detail::Eigh> work;
    std::vector<Eigen::VectorXd> positions;
    for (std::size_t hi = m; hi > 0;) {
        const std::size_t lo = hi > chunk ? hi - chunk : 0;
        work.assign(hi - lo, {});
        positions.assign(hi - lo, {});
        detail::parallel_for(hi - lo, [&](std::size_t k) {
            work[k] = detail::eigh(build_H0(basis, distances[lo + k] + opts.delta_d));
            detail::fix_signs(work[k].vectors);
            const auto& v = work[k].vectors;
            positions[k] = (v.cwiseProduct(basis.X * v)).colwise().sum().transpose();
        });
        for (std::size_t s = hi; s-- > lo;) {
            auto& e = work[s - lo];
            std::vector<int> labels(static_cast<std::size_t>(n));
            const double deff = distances[s] + opts.delta_d;
            const auto& pos = positions[s - lo];
            if (ref.size() == 0) {
                int g = -1;
                for (int j = 0; j < n && g < 0; ++j)
                    if (pos[j] > 0.5 * deff - trap_slack) g = j;
                if (g < 0) g = 0;
                for (int j = 0; j < n; ++j) labels[std::size_t(j)] = j - g;
                ref = e.vectors;
                age.assign(std::size_t(n), 0);
            } else {
                const auto mt = match(ref, e.vectors);
                Eigen::MatrixXd next(ref.rows(), n);
                std::vector<int> next_age(std::size_t(n), 0);
                for (int j = 0; j < n; ++j) {
                    const auto [i, ov] = mt[std::size_t(j)];
                    labels[std::size_t(j)] = prev_labels[std::size_t(i)];
                    const auto u = std::size_t(j);
                    next_age[u] = ov >= opts.refresh_overlap ? 0 : age[std::size_t(i)] + 1;
                    if (next_age[u] > opts.max_stale_steps) next_age[u] = 0;
                    next.col(j) = next_age[u] == 0 ? Eigen::VectorXd(e.vectors.col(j)) : Eigen::VectorXd(ref.col(i));
                    if (ov < opts.overlap_threshold)
                        spec.discontinuities.push_back({s, distances[s], labels[std::size_t(j)], ov});
                }
                ref = std::move(next);
                age = std::move(next_age);
            }
            spec.energies[s] = e.values;
            const int g = int(std::find(labels.begin(), labels.end(), 0) - labels.begin());
            spec.ground[s] = g;
            for (int j = g + 1; j < n; ++j)
                if (pos[j] > 0.5 * deff - trap_slack) spec.excited[s].push_back(j);
            spec.tracked[s] = labels;
            prev_labels = std::move(labels);
            if (opts.keep_vectors) spec.vectors[s] = std::move(e.vectors);
        }
        hi = lo;
    }
    std::reverse(spec.discontinuities.begin(), spec.discontinuities.end());
    return spec;
}

Eigen::MatrixXd eigenvectors_at(const UnperturbedBasis& basis, const StaticSpectrum& spec, std::size_t step) {
    if (step < spec.vectors.size() && spec.vectors[step].size() > 0) return spec.vectors[step];
    auto e = detail::eigh(build_H0(basis, spec.distances.at(step) + spec.delta_d));
    detail::fix_signs(e.vectors);
    return e.vectors;
}

std::vector<Resonance> find_resonances(const StaticSpectrum& spec, double omega, double d_lo, double d_hi, double tol,
                                       std::vector<int> orders) {
    std::vector<Resonance> out;
    const auto& ds = spec.distances;
    std::size_t first = 0, last = spec.size();
    while (first < last && ds[first] < d_lo - 1e-12) ++first;
    while (last > first && ds[last - 1] > d_hi + 1e-12) --last;
    if (last - first < 2) return out;

    std::vector<int> all_labels;
    for (std::size_t i = first; i < last; ++i) all_labels.insert(all_labels.end(), spec.tracked[i].begin(), spec.tracked[i].end());
    std::sort(all_labels.begin(), all_labels.end());
    all_labels.erase(std::unique(all_labels.begin(), all_labels.end()), all_labels.end());

    const auto ground = spec.tracked_level(0);
    auto flagged = [&](std::size_t step, int label) {
        for (auto& dc : spec.discontinuities)
            if ((dc.step == step || dc.step + 1 == step) && (dc.label == label || dc.label == 0)) return true;
        return false;
    };

    for (int kappa : orders) {
        for (int label : all_labels) {
            if (label == 0) continue;
            const auto lev = spec.tracked_level(label);
            auto f = [&](std::size_t i) { return lev[i] - ground[i] - kappa * omega; };
            for (std::size_t i = first; i + 1 < last; ++i) {
                const double f0 = f(i), f1 = f(i + 1);
                if (!std::isfinite(f0) || !std::isfinite(f1)) continue;
                if ((f0 > 0.0) == (f1 > 0.0)) continue;
                // cubic through up to four neighbouring samples
                std::vector<double> xs, ys;
                for (std::size_t k = (i > first ? i - 1 : i); k <= std::min(i + 2, last - 1); ++k) {
                    if (!std::isfinite(f(k))) continue;
                    xs.push_back(ds[k]);
                    ys.push_back(f(k));
                }
                double a = ds[i], b = ds[i + 1];
                const int np = int(xs.size());
                double fa = f0;
                for (int it = 0; it < 100 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
                    const double mid = 0.5 * (a + b);
                    const double fm = lagrange(xs.data(), ys.data(), np, mid);
                    if ((fm > 0.0) == (fa > 0.0)) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                Resonance r;
                r.d = 0.5 * (a + b);
                r.tracked = label;
                {
                    const std::size_t k = r.d - ds[i] < ds[i + 1] - r.d ? i : i + 1;
                    const int j = spec.tracked_index_of(k, label);
                    const auto& ex = spec.excited[k];
                    const auto it = std::find(ex.begin(), ex.end(), j);
                    r.level = it != ex.end() ? int(it - ex.begin()) + 1 : j - spec.ground[k];
                }
                r.order = kappa;
                r.slope = (f1 - f0) / (ds[i + 1] - ds[i]);
                r.residual = std::abs(f0 + r.slope * (r.d - ds[i]));
                r.low_confidence = r.residual > tol || i == first || i + 2 == last || flagged(i, label) ||
                                   flagged(i + 1, label);
                out.push_back(r);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Resonance& x, const Resonance& y) {
        return x.order != y.order ? x.order < y.order : x.d < y.d;
    });
    return out;
}

CouplingTable coupling_strengths(const UnperturbedBasis& basis, const DimensionlessModel& model,
                                 const StaticSpectrum& spec, const CouplingOptions& opts) {
    if (opts.n_max < opts.n_min) throw UsageError("coupling_strengths: empty level range");
    CouplingTable t;
    t.distances = spec.distances;
    for (int n = opts.n_min; n <= opts.n_max; ++n) t.levels.push_back(n);
    const auto m = Eigen::Index(spec.size());
    const auto L = Eigen::Index(t.levels.size());
    t.v1 = t.v2 = t.v2_direct = t.v3 = t.v4 = Eigen::MatrixXd::Constant(m, L, nan);
    const double g = model.gamma;
    const int nb = basis.size();
    const bool direct = opts.direct_route && basis.A.rows() == nb && basis.D.rows() == nb;

    // (E_l - E_k) X_kl and (E_l - E_k) X2_kl: the anticommutator pieces by the identity at d = 0
    Eigen::MatrixXd P1, P2;
    if (direct) {
        const Eigen::Map<const Eigen::VectorXd> e0(basis.energies.data(), nb);
        const Eigen::MatrixXd ediff = e0.transpose().replicate(nb, 1) - e0.replicate(1, nb);
        P1 = ediff.cwiseProduct(basis.X);
        P2 = ediff.cwiseProduct(basis.X2);
    }
    std::vector<double> route(std::size_t(m), 0.0), trunc(std::size_t(m), 0.0);

    detail::parallel_for(std::size_t(m), [&](std::size_t s) {
        const int i0 = spec.ground[s];
        const double d = spec.distances[s] + spec.delta_d;
        const Eigen::MatrixXd V = eigenvectors_at(basis, spec, s);
        const Eigen::VectorXd v0 = V.col(i0);
        const Eigen::RowVectorXd x_row = (basis.X * v0).transpose() * V;
        const Eigen::RowVectorXd x2_row = (basis.X2 * v0).transpose() * V;
        Eigen::RowVectorXd sq_row = x2_row - 2.0 * d * x_row;
        sq_row[i0] += d * d;
        Eigen::RowVectorXd dv_row, a_row, id0_row;
        if (direct || model.l_ac != 0.0) dv_row = (basis.D.transpose() * v0).transpose() * V;
        if (direct) {
            a_row = (basis.A.transpose() * v0).transpose() * V;
            id0_row = ((P2 - 2.0 * d * P1).transpose() * v0).transpose() * V;
        }
        const auto& E = spec.energies[s];
        const auto si = Eigen::Index(s);
        for (Eigen::Index c = 0; c < L; ++c) {
            const int j = spec.index_of(s, t.levels[std::size_t(c)]);
            if (j < 0) continue;
            t.v1(si, c) = g * g * std::abs(sq_row[j]);
            t.v2(si, c) = g * std::abs(E[j] - E[i0]) * std::abs(sq_row[j]);
            const double xd = j == i0 ? x_row[j] - d : x_row[j];
            t.v3(si, c) = g * std::abs(model.l_ac) * std::abs(xd);
            t.v4(si, c) = model.l_ac != 0.0 ? std::abs(model.l_ac) * std::abs(dv_row[j]) : 0.0;
            if (direct) {
                const double dir = g * std::abs(a_row[j] - 2.0 * d * dv_row[j]);
                t.v2_direct(si, c) = dir;
                const double scale = std::max(dir, opts.route_floor);
                route[s] = std::max(route[s], std::abs(g * std::abs(id0_row[j]) - dir) / scale);
                trunc[s] = std::max(trunc[s], std::abs(t.v2(si, c) - dir) / scale);
            }
        }
    });
    t.route_mismatch = *std::max_element(route.begin(), route.end());
    t.truncation_mismatch = *std::max_element(trunc.begin(), trunc.end());
    if (direct && t.route_mismatch > opts.route_tolerance)
        throw NumericalError("V2 from the commutator identity and from {X - d, P} differ by " +
                             std::to_string(t.route_mismatch) + " (relative)");
    return t;
}

std::vector<double> coupling_profile(const CouplingTable& table, const DmmOptions& opts) {
    const auto m = std::size_t(table.v2.rows());
    std::vector<double> out(m, 0.0);
    std::vector<double> vals;
    for (std::size_t s = 0; s < m; ++s) {
        vals.clear();
        for (std::size_t c = 0; c < table.levels.size(); ++c) {
            const int n = table.levels[c];
            if (n < opts.n_lo || n > opts.n_hi) continue;
            const double v = table.v2(Eigen::Index(s), Eigen::Index(c));
            if (std::isfinite(v)) vals.push_back(v);
        }
        if (vals.empty()) continue;
        if (opts.statistic == DmmStatistic::max) {
            out[s] = *std::max_element(vals.begin(), vals.end());
        } else {
            const auto mid = vals.begin() + std::ptrdiff_t(vals.size() / 2);
            std::nth_element(vals.begin(), mid, vals.end());
            out[s] = *mid;
        }
    }
    return out;
}

std::optional<double> detect_dmm(const CouplingTable& table, const DmmOptions& opts) {
    const auto p = coupling_profile(table, opts);
    const auto& d = table.distances;
    const std::size_t m = p.size();
    for (std::size_t s = m; s-- > 0;) {
        if (p[s] < opts.threshold) continue;
        bool held = true;
        for (std::size_t t = s; t-- > 0 && d[s] - d[t] <= opts.hold;)
            if (p[t] < opts.threshold) {
                held = false;
                break;
            }
        if (!held) continue;
        if (s + 1 == m || p[s + 1] >= opts.threshold) return d[s];
        return d[s + 1] + (d[s] - d[s + 1]) * (opts.threshold - p[s + 1]) / (p[s] - p[s + 1]);
    }
    return std::nullopt;
}

FieldCoupling field_coupling(const UnperturbedBasis& basis, const StaticSpectrum& spec, const TrapConfig& cfg, double d,
                             double field, int target, MassConvention convention) {
    const std::size_t s = spec.nearest_step(d);
    const int i0 = spec.index_of(s, 0);
    const int it = spec.index_of(s, target);
    if (i0 < 0 || it < 0)
        throw ScopeError("level " + std::to_string(i0 < 0 ? 0 : target) + " is not present in the basis window");
    const Eigen::MatrixXd V = eigenvectors_at(basis, spec, s);
    FieldCoupling fc;
    fc.d = spec.distances[s];
    fc.omega_f = spec.energies[s][i0] - spec.energies[s][it];
    fc.x_element = std::abs(V.col(i0).dot(basis.X * V.col(it)));
    const auto lengths = derived_lengths(cfg);
    const double l = convention == MassConvention::ion ? lengths.l_i : lengths.l_rel;
    fc.rabi = constants::elementary_charge * field * fc.x_element * l / constants::hbar;
    return fc;
}

CmCouplings cm_rel_couplings(double gamma, int n_cm, int n) {
    if (n != 0) return {};
    const double delta = (n_cm == 2 ? std::sqrt(2.0) : 0.0) + (n_cm == 0 ? 1.0 : 0.0);
    return {0.5 * gamma * gamma * delta, 0.5 * gamma * n_cm * delta};
}

double sideband_detuning(double E_n, double E_0, double omega) { return E_n - E_0 - (omega - 1.0); }

}  // namespace micromotion
