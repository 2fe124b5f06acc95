#include "micromotion/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linalg.hpp"
#include "micromotion/error.hpp"

namespace micromotion {

Eigen::MatrixXd build_floquet_matrix(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& first,
                                     const Eigen::MatrixXd& second, double omega, int n_f) {
    const auto n = H0.rows();
    if (H0.cols() != n) throw UsageError("build_floquet_matrix: H0 must be square");
    if (n_f < 0) throw UsageError("build_floquet_matrix: n_f must be >= 0");
    for (const auto* b : {&first, &second})
        if (b->size() != 0 && (b->rows() != n || b->cols() != n))
            throw UsageError("build_floquet_matrix: coupling blocks must match H0");
    const double asym = (H0 - H0.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, H0.cwiseAbs().maxCoeff()))
        throw UsageError("build_floquet_matrix: H0 is not symmetric (residual " + std::to_string(asym) + ")");

    const FloquetLayout L{int(n), n_f};
    const Eigen::Index N = L.size();
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(N, N);
    for (int k = -n_f; k <= n_f; ++k) {
        const Eigen::Index r = L.index(0, k);
        F.block(r, r, n, n) = H0;
        F.block(r, r, n, n).diagonal().array() += k * omega;
        if (first.size() != 0 && k + 1 <= n_f) {
            const Eigen::Index c = L.index(0, k + 1);
            F.block(r, c, n, n) = first;
            F.block(c, r, n, n) = first.transpose();
        }
        if (second.size() != 0 && k + 2 <= n_f) {
            const Eigen::Index c = L.index(0, k + 2);
            F.block(r, c, n, n) = second;
            F.block(c, r, n, n) = second.transpose();
        }
    }
    return F;
}

Eigen::MatrixXd cosine_floquet_matrix(const Eigen::MatrixXd& H0, const Eigen::MatrixXd& V, double omega, int n_f) {
    return build_floquet_matrix(H0, 0.5 * V, Eigen::MatrixXd(), omega, n_f);
}

AtomIonDrive atom_ion_drive(const UnperturbedBasis& basis, const DimensionlessModel& model, double d) {
    const int n = basis.size();
    if (basis.X.rows() != n || basis.X2.rows() != n) throw UsageError("atom_ion_drive: basis has no X, X^2 matrices");
    AtomIonDrive out;
    out.d = d;
    out.H0 = -d * basis.X;
    for (int i = 0; i < n; ++i) out.H0(i, i) += basis.energies[std::size_t(i)] + 0.5 * d * d;
    const double g2 = model.gamma * model.gamma;
    out.V1 = -g2 * (basis.X2 - 2.0 * d * basis.X);
    out.V1.diagonal().array() -= g2 * d * d;
    out.iV2.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double de = basis.energies[std::size_t(j)] - basis.energies[std::size_t(i)];
            // (E_m - E_n) V1 / gamma = -gamma (E_m - E_n) <n|(X - d)^2|m>, finite at gamma = 0
            out.iV2(i, j) = -model.gamma * de * (basis.X2(i, j) - 2.0 * d * basis.X(i, j));
        }
    return out;
}

Eigen::MatrixXd atom_ion_floquet_matrix(const AtomIonDrive& drive, double omega, int n_f, bool include_v2) {
    const Eigen::MatrixXd first = include_v2 ? Eigen::MatrixXd(0.5 * drive.iV2) : Eigen::MatrixXd();
    return build_floquet_matrix(drive.H0, first, 0.5 * drive.V1, omega, n_f);
}

double reduce_to_zone(double e, double omega, double center) {
    const double lo = center - 0.5 * omega;
    double r = e - omega * std::floor((e - lo) / omega);
    if (r >= lo + omega) r -= omega;
    if (r < lo) r += omega;
    return r;
}

double zone_distance(double a, double b, double omega) {
    const double r = std::fmod(std::abs(a - b), omega);
    return std::min(r, omega - r);
}

std::size_t nearest_in_zone(const std::vector<double>& values, double e, double omega) {
    if (values.empty()) throw UsageError("nearest_in_zone: no values");
    std::size_t best = 0;
    double dist = zone_distance(values[0], e, omega);
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double t = zone_distance(values[i], e, omega);
        if (t < dist) {
            dist = t;
            best = i;
        }
    }
    return best;
}

std::vector<double> FloquetSpectrum::class_quasienergies() const {
    std::vector<double> out;
    out.reserve(classes.size());
    for (int c : classes) out.push_back(states[std::size_t(c)].quasienergy);
    return out;
}

double FloquetSpectrum::truncation_residual() const {
    double r = 0.0;
    for (int c : classes) r = std::max(r, states[std::size_t(c)].edge_weight);
    return r;
}

namespace {

int block_shift(const FloquetSpectrum& spec, int i) {
    const auto& s = spec.states[std::size_t(i)];
    return int(std::lround((s.raw - s.quasienergy) / spec.omega));
}

// |<a| shifted by the block offset between a and c |c>|
double shifted_overlap(const FloquetSpectrum& spec, int a, int c) {
    const int ne = spec.layout.n_states, nm = spec.layout.modes();
    const int shift = block_shift(spec, c) - block_shift(spec, a);
    double o = 0.0;
    for (int b = 0; b < nm; ++b) {
        const int ba = b - shift;
        if (ba < 0 || ba >= nm) continue;
        o += spec.vectors.col(a).segment(Eigen::Index(ba) * ne, ne).dot(spec.vectors.col(c).segment(Eigen::Index(b) * ne, ne));
    }
    return std::abs(o);
}

}  // namespace

FloquetSpectrum diagonalize_floquet(const Eigen::MatrixXd& F, const FloquetLayout& layout, double omega,
                                    double zone_center, bool want_vectors) {
    if (F.rows() != layout.size() || F.cols() != layout.size())
        throw UsageError("diagonalize_floquet: matrix size does not match the layout");
    if (!(omega > 0.0)) throw UsageError("diagonalize_floquet: omega must be positive");

    FloquetSpectrum out;
    out.layout = layout;
    out.omega = omega;
    out.zone_center = zone_center;
    auto eig = detail::eigh(F, want_vectors);
    const auto N = std::size_t(layout.size());
    out.states.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        auto& s = out.states[i];
        s.raw = eig.values[Eigen::Index(i)];
        s.quasienergy = reduce_to_zone(s.raw, omega, zone_center);
    }
    if (!want_vectors) return out;

    const int ne = layout.n_states, nm = layout.modes();
    Eigen::MatrixXd w(nm, Eigen::Index(N));  // block weights
    for (std::size_t i = 0; i < N; ++i) {
        auto& s = out.states[i];
        const auto v = eig.vectors.col(Eigen::Index(i));
        Eigen::Index best = 0;
        v.cwiseAbs2().maxCoeff(&best);
        std::tie(s.dominant_n, s.dominant_k) = layout.split(int(best));
        for (int b = 0; b < nm; ++b) w(b, Eigen::Index(i)) = v.segment(Eigen::Index(b) * ne, ne).squaredNorm();
        s.k0_weight = w(layout.n_f, Eigen::Index(i));
        s.edge_weight = nm > 1 ? std::max(w(0, Eigen::Index(i)), w(nm - 1, Eigen::Index(i))) : 0.0;
    }

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return out.states[std::size_t(a)].k0_weight > out.states[std::size_t(b)].k0_weight;
    });
    out.vectors = std::move(eig.vectors);
    const double qtol = 1e-4 * omega;
    for (int c : order) {
        if (int(out.classes.size()) == ne) break;
        bool duplicate = false;
        for (int a : out.classes) {
            if (zone_distance(out.states[std::size_t(a)].quasienergy, out.states[std::size_t(c)].quasienergy, omega) > qtol)
                continue;
            if (shifted_overlap(out, a, c) > 0.5) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) out.classes.push_back(c);
    }
    std::sort(out.classes.begin(), out.classes.end(), [&](int a, int b) {
        return out.states[std::size_t(a)].quasienergy < out.states[std::size_t(b)].quasienergy;
    });
    return out;
}

std::vector<int> assign_classes(const FloquetSpectrum& spec) {
    if (spec.vectors.size() == 0) throw UsageError("assign_classes: the spectrum has no eigenvectors");
    std::vector<int> out(spec.states.size(), -1);
    for (std::size_t i = 0; i < spec.states.size(); ++i) {
        double best = 0.5;
        for (std::size_t c = 0; c < spec.classes.size(); ++c) {
            const double o = shifted_overlap(spec, spec.classes[c], int(i));
            if (o > best) {
                best = o;
                out[i] = int(c);
            }
        }
    }
    return out;
}

RsPerturbation rs_perturbation(const Eigen::VectorXd& energies, const Eigen::MatrixXd& V, double omega,
                               double warn_ratio) {
    const auto n = energies.size();
    if (V.rows() != n || V.cols() != n) throw UsageError("rs_perturbation: V must match the energies");
    RsPerturbation r;
    r.e1 = Eigen::VectorXd::Zero(n);
    r.e2 = Eigen::VectorXd::Zero(n);
    r.cos_amp = Eigen::MatrixXd::Zero(n, n);
    r.sin_amp = Eigen::MatrixXd::Zero(n, n);
    const double w2 = omega * omega;
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index m = 0; m < n; ++m) {
            if (m == k) continue;
            const double v = V(m, k);
            if (v == 0.0) continue;
            const double de = energies[k] - energies[m];
            const double den = de * de - w2;
            const double ratio = v * v / std::abs(den);
            if (ratio > r.worst_ratio) {
                r.worst_ratio = ratio;
                r.worst_n = int(k);
                r.worst_m = int(m);
            }
            r.e2[k] += 0.5 * v * v * de / den;
            r.cos_amp(m, k) = v * de / den;
            r.sin_amp(m, k) = v * omega / den;
        }
    if (r.worst_ratio > warn_ratio)
        r.warnings.push_back("near resonance: |<m|V|n>|^2 / |dE^2 - omega^2| = " + std::to_string(r.worst_ratio) +
                             " for n = " + std::to_string(r.worst_n) + ", m = " + std::to_string(r.worst_m));
    return r;
}

TwoLevelResult two_level_submatrix(double e1, double e2, double coupling) {
    const double mean = 0.5 * (e1 + e2), half = 0.5 * (e1 - e2);
    const double root = std::hypot(half, coupling);
    TwoLevelResult r;
    r.lower = mean - root;
    r.upper = mean + root;
    if (coupling == 0.0) {
        r.vectors = e1 <= e2 ? Eigen::Matrix2d::Identity() : Eigen::Matrix2d(Eigen::Matrix2d::Identity().rowwise().reverse());
        return r;
    }
    // eigenvector of [[e1, c], [c, e2]] for eigenvalue x is (c, x - e1)
    for (int j = 0; j < 2; ++j) {
        const double x = j == 0 ? r.lower : r.upper;
        Eigen::Vector2d v(coupling, x - e1);
        v.normalize();
        if (v[0] < 0.0) v = -v;
        r.vectors.col(j) = v;
    }
    return r;
}

Eigen::Matrix2d TwoLevelModel::H0() const {
    Eigen::Matrix2d h;
    h << 0.5 * omega0, 0.0, 0.0, -0.5 * omega0;
    return h;
}

Eigen::Matrix2d TwoLevelModel::V() const {
    Eigen::Matrix2d v;
    v << 0.0, eta, eta, 0.0;
    return v;
}

std::vector<double> two_level_quasienergies(const TwoLevelModel& m, int n_f, double zone_center) {
    const auto F = cosine_floquet_matrix(m.H0(), m.V(), m.omega, n_f);
    const auto spec = diagonalize_floquet(F, FloquetLayout{2, n_f}, m.omega, zone_center);
    return spec.class_quasienergies();
}

double two_level_off_resonance(const TwoLevelModel& m, int level) {
    const double sign = level == 1 ? 1.0 : -1.0;
    return sign * 0.5 * m.omega0 * (1.0 + m.eta * m.eta / (m.omega0 * m.omega0 - m.omega * m.omega));
}

}  // namespace micromotion
