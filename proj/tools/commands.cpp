#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "micromotion/adiabatic.hpp"
#include "micromotion/error.hpp"
#include "micromotion/floquet.hpp"
#include "micromotion/io.hpp"
#include "micromotion/parallel.hpp"
#include "micromotion/propagator.hpp"
#include "micromotion/single_ion.hpp"
#include "micromotion/static_spectra.hpp"

namespace mmcli {

using namespace micromotion;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

RunConfig resolve_config(const CommonOptions& opts) {
    RunConfig cfg;
    if (opts.config_path.empty()) {
        std::istringstream preset("preset = ba-rb\n");
        cfg = parse_config(preset);
    } else {
        cfg = load_config(opts.config_path);
    }
    NumericsConfig& n = cfg.numerics;
    if (opts.d_min) n.d_min = *opts.d_min;
    if (opts.d_max) n.d_max = *opts.d_max;
    if (opts.d_step) n.d_step = *opts.d_step;
    if (opts.ne) n.n_basis = *opts.ne;
    if (opts.nf) n.n_floquet = *opts.nf;
    if (opts.dt) n.dt_fraction = *opts.dt;
    if (opts.seed) n.seed = *opts.seed;
    if (n.d_step <= 0.0 || n.d_max < n.d_min) throw ConfigError("invalid distance range");
    if (n.n_basis < 0 || n.n_floquet < 0) throw ConfigError("--ne and --nf must be non-negative");
    if (n.dt_fraction <= 0.0 || n.dt_fraction > 1.0) throw ConfigError("--dt must lie in (0, 1]");
    return cfg;
}

namespace {

class Timer {
public:
    explicit Timer(std::string what) : what_(std::move(what)), start_(std::chrono::steady_clock::now()) {}
    ~Timer() {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
        std::cerr << what_ << ": " << dt.count() << " s\n";
    }

private:
    std::string what_;
    std::chrono::steady_clock::time_point start_;
};

struct Run {
    fs::path dir;
    RunManifest manifest;
    std::string hash;

    void finish_manifest() {
        hash = manifest.hash();
        write_text(dir / "manifest.txt", manifest.text());
    }
    void csv(const std::string& name, CsvTable t, const std::string& figure) const {
        t.comments.insert(t.comments.begin(), {"manifest " + hash, "figure " + figure});
        t.write(dir / name);
        std::cerr << "wrote " << (dir / name).string() << "\n";
    }
    void report(const std::string& name, json j, const std::string& figure) const {
        json out;
        out["manifest"] = hash;
        out["figure"] = figure;
        for (auto& [k, v] : j.items()) out[k] = v;
        write_text(dir / name, out.dump(2) + "\n");
        std::cerr << "wrote " << (dir / name).string() << "\n";
    }
};

Run start_run(const std::string& command, const CommonOptions& common, const RunConfig& cfg) {
    Run r;
    r.dir = common.out_dir;
    r.manifest = make_manifest(command, cfg);
    return r;
}

void add_grid(RunManifest& m, const std::vector<double>& d) {
    m.set("grid_points", std::to_string(d.size()));
    if (!d.empty()) {
        m.set("grid_first", d.front());
        m.set("grid_last", d.back());
    }
}

UnperturbedBasis load_basis_for(const CommonOptions& common, const RunConfig& cfg, RunManifest& m) {
    Timer t("basis");
    bool hit = false;
    UnperturbedBasis basis = cached_basis(cfg, fs::path(common.out_dir) / "cache", !common.no_compute, &hit);
    std::cerr << "basis: " << basis.size() << " states (" << (hit ? "cached" : "computed") << ")\n";
    m.set("basis_key", basis_cache_key(cfg));
    m.set("basis_states", std::to_string(basis.size()));
    m.set("basis_r_min", basis.info.r_min);
    const int ne = cfg.numerics.n_basis;
    if (ne > 0) {
        if (ne > basis.size())
            throw ScopeError("--ne " + std::to_string(ne) + " exceeds the " + std::to_string(basis.size()) +
                             " states in the energy window");
        basis = truncate(basis, ne);
    }
    m.set("basis_used", std::to_string(basis.size()));
    for (const auto& w : basis.warnings) std::cerr << "warning: " << w << "\n";
    return basis;
}

std::vector<double> grid_of(const RunConfig& cfg) {
    const NumericsConfig& n = cfg.numerics;
    return distance_grid(n.d_min, n.d_max, n.d_step);
}

std::string level_cell(const StaticSpectrum& s, std::size_t i, int j) {
    const int g = s.ground[i];
    if (j == g) return "0";
    if (j < g) return std::to_string(j - g);
    const auto& ex = s.excited[i];
    const auto it = std::find(ex.begin(), ex.end(), j);
    if (it == ex.end()) return "";
    return std::to_string(it - ex.begin() + 1);
}

std::vector<FloquetSpectrum> floquet_scan(const UnperturbedBasis& basis, const DimensionlessModel& model,
                                          const std::vector<double>& d, int nf, bool include_v2) {
    Timer t("floquet scan");
    const FloquetLayout layout{basis.size(), nf};
    std::vector<FloquetSpectrum> out(d.size());
    detail::parallel_for(d.size(), [&](std::size_t i) {
        const AtomIonDrive drive = atom_ion_drive(basis, model, d[i] + model.delta_d);
        out[i] = diagonalize_floquet(atom_ion_floquet_matrix(drive, model.omega, nf, include_v2), layout, model.omega);
    });
    return out;
}

}  // namespace

void cmd_spectrum(const CommonOptions& common, const SpectrumOptions& opts) {
    static const std::vector<std::string> engines = {"static", "floquet", "propagator", "both"};
    if (std::find(engines.begin(), engines.end(), opts.engine) == engines.end())
        throw ConfigError("unknown engine '" + opts.engine + "'");
    const RunConfig cfg = resolve_config(common);
    const DimensionlessModel model = dimensionless(cfg.trap, cfg.convention);
    const std::vector<double> d = grid_of(cfg);
    Run run = start_run("spectrum", common, cfg);
    run.manifest.set("engine", opts.engine);
    run.manifest.set("first_term_only", opts.first_term_only ? "true" : "false");
    add_grid(run.manifest, d);
    const UnperturbedBasis basis = load_basis_for(common, cfg, run.manifest);
    run.finish_manifest();

    const int nf = cfg.numerics.n_floquet;
    const bool floquet = opts.engine == "floquet" || opts.engine == "both";
    const bool propagator = opts.engine == "propagator" || opts.engine == "both";

    if (opts.engine == "static") {
        Timer t("static scan");
        ScanOptions so;
        so.delta_d = model.delta_d;
        const StaticSpectrum s = scan_spectrum(basis, d, so);
        CsvTable csv;
        csv.columns = {"d", "level_label", "tracked_label", "energy"};
        for (std::size_t i = 0; i < s.size(); ++i)
            for (int j = 0; j < int(s.energies[i].size()); ++j)
                csv.add(s.distances[i], level_cell(s, i, j), s.tracked[i][std::size_t(j)], s.energies[i][j]);
        run.csv("spectrum_static.csv", std::move(csv), "energy levels versus trap distance");
        json rep;
        rep["discontinuities"] = json::array();
        for (const auto& dc : s.discontinuities)
            rep["discontinuities"].push_back({{"d", dc.d}, {"label", dc.label}, {"overlap", dc.overlap}});
        run.report("spectrum_static.json", rep, "energy levels versus trap distance");
        return;
    }

    std::vector<FloquetSpectrum> fs_;
    if (floquet) {
        fs_ = floquet_scan(basis, model, d, nf, !opts.first_term_only);
        CsvTable csv;
        csv.columns = {"d", "quasienergy", "class_label", "dominant_n", "dominant_k", "convergence_residual"};
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t c = 0; c < fs_[i].classes.size(); ++c) {
                const FloquetState& st = fs_[i].states[std::size_t(fs_[i].classes[c])];
                csv.add(d[i], st.quasienergy, c, st.dominant_n, st.dominant_k, st.edge_weight);
            }
        run.csv("spectrum_floquet.csv", std::move(csv),
                opts.first_term_only ? "quasienergies without the first-harmonic term" : "quasienergies versus trap distance");
    }

    std::vector<PropagatorResult> pr;
    if (propagator) {
        Timer t("propagator scan");
        HamiltonianTerms terms;
        terms.v2 = !opts.first_term_only;
        PropagatorOptions po;
        po.dt_fraction = cfg.numerics.dt_fraction;
        pr.resize(d.size());
        detail::parallel_for(d.size(), [&](std::size_t i) {
            pr[i] = propagate_one_period(micromotion_hamiltonian(basis, model, d[i], terms), po);
        });
        CsvTable csv;
        csv.comments = {"engine propagator"};
        csv.columns = {"d", "quasienergy", "index", "dominant_n", "dominant_weight", "unitarity_residual"};
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t k = 0; k < pr[i].quasienergies.size(); ++k)
                csv.add(d[i], pr[i].quasienergies[k], k, pr[i].dominant_state[k], pr[i].dominant_weight[k],
                        pr[i].unitarity_residual);
        run.csv("spectrum_propagator.csv", std::move(csv), "quasienergies versus trap distance");
    }

    if (floquet && propagator) {
        json rep;
        rep["classes_compared"] = opts.report_classes;
        rep["distances"] = json::array();
        double worst = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            std::vector<double> q = fs_[i].class_quasienergies();
            std::sort(q.begin(), q.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
            q.resize(std::min<std::size_t>(q.size(), std::size_t(opts.report_classes)));
            double local = 0.0;
            json per = json::array();
            for (double e : q) {
                const double p = pr[i].quasienergies[nearest_in_zone(pr[i].quasienergies, e, model.omega)];
                const double diff = zone_distance(e, p, model.omega);
                local = std::max(local, diff);
                per.push_back({{"floquet", e}, {"propagator", p}, {"difference", diff}});
            }
            worst = std::max(worst, local);
            rep["distances"].push_back({{"d", d[i]}, {"max_difference", local}, {"classes", per}});
        }
        rep["max_difference"] = worst;
        run.report("agreement.json", rep, "engine agreement");
        std::cout << "max |floquet - propagator| = " << worst << " hbar omega_0\n";
    }
}

void cmd_couplings(const CommonOptions& common, const CouplingReportOptions& opts) {
    const RunConfig cfg = resolve_config(common);
    const DimensionlessModel model = dimensionless(cfg.trap, cfg.convention);
    const std::vector<double> d = grid_of(cfg);
    Run run = start_run("couplings", common, cfg);
    add_grid(run.manifest, d);
    const double threshold = common.threshold.value_or(cfg.numerics.dmm_threshold);
    run.manifest.set("threshold", threshold);
    const UnperturbedBasis basis = load_basis_for(common, cfg, run.manifest);
    run.finish_manifest();

    ScanOptions so;
    so.delta_d = model.delta_d;
    const StaticSpectrum s = scan_spectrum(basis, d, so);
    micromotion::CouplingOptions co;
    co.n_max = cfg.numerics.coupling_n_max;
    const CouplingTable table = coupling_strengths(basis, model, s, co);

    CsvTable csv;
    csv.columns = {"d", "n", "v1", "v2", "v3", "v4"};
    for (Eigen::Index i = 0; i < table.v1.rows(); ++i)
        for (Eigen::Index j = 0; j < table.v1.cols(); ++j)
            csv.add(table.distances[std::size_t(i)], table.levels[std::size_t(j)], table.v1(i, j), table.v2(i, j),
                    table.v3(i, j), table.v4(i, j));
    run.csv("couplings.csv", std::move(csv), "micromotion couplings versus trap distance");

    DmmOptions dopt;
    dopt.threshold = threshold;
    dopt.n_hi = co.n_max;
    json rep;
    const auto dmm = detect_dmm(table, dopt);
    rep["d_mm"] = dmm ? json(*dmm) : json(nullptr);
    rep["threshold"] = threshold;
    rep["route_mismatch"] = table.route_mismatch;
    rep["truncation_mismatch"] = table.truncation_mismatch;
    rep["characteristic_distance"] = model.R > 0.0 ? json(characteristic_distance(model.R)) : json(nullptr);
    if (model.R > 0.0 && opts.field_d >= d.front() && opts.field_d <= d.back()) {
        const FieldCoupling fc = field_coupling(basis, s, cfg.trap, opts.field_d, opts.field, opts.field_target,
                                                cfg.convention);
        rep["field_coupling"] = {{"d", fc.d},         {"target", opts.field_target}, {"omega_f", fc.omega_f},
                                 {"x_element", fc.x_element}, {"field", opts.field},  {"rabi_rad_s", fc.rabi}};
    }
    run.report("couplings.json", rep, "micromotion couplings versus trap distance");
    if (dmm) std::cout << "d_mm = " << *dmm << " l\n";
    else std::cout << "d_mm: threshold not reached\n";
}

void cmd_resonances(const CommonOptions& common) {
    const RunConfig cfg = resolve_config(common);
    const DimensionlessModel model = dimensionless(cfg.trap, cfg.convention);
    const std::vector<double> d = grid_of(cfg);
    Run run = start_run("resonances", common, cfg);
    add_grid(run.manifest, d);
    const UnperturbedBasis basis = load_basis_for(common, cfg, run.manifest);
    run.finish_manifest();

    ScanOptions so;
    so.delta_d = model.delta_d;
    const StaticSpectrum s = scan_spectrum(basis, d, so);
    const auto res = find_resonances(s, model.omega, d.front(), d.back(), cfg.numerics.resonance_tol);
    json rep;
    json counts;
    json list = json::array();
    int n1 = 0, n2 = 0;
    for (const auto& r : res) {
        (r.order == 1 ? n1 : n2) += 1;
        list.push_back({{"d", r.d},
                        {"level", r.level},
                        {"tracked", r.tracked},
                        {"order", r.order},
                        {"slope", r.slope},
                        {"residual", r.residual},
                        {"low_confidence", r.low_confidence}});
    }
    counts["omega"] = n1;
    counts["two_omega"] = n2;
    rep["counts"] = counts;
    rep["resonances"] = list;
    run.report("resonances.json", rep, "resonances of the ground level");
    std::cout << "resonances: " << n1 << " at omega, " << n2 << " at 2 omega\n";
}

void cmd_crossings(const CommonOptions& common, const CrossingOptions& opts) {
    const RunConfig cfg = resolve_config(common);
    const DimensionlessModel model = dimensionless(cfg.trap, cfg.convention);
    const std::vector<double> d = grid_of(cfg);
    if (d.size() < 9) throw ConfigError("crossing detection needs at least 9 distances");
    Run run = start_run("crossings", common, cfg);
    add_grid(run.manifest, d);
    const double threshold = common.threshold.value_or(0.05);
    run.manifest.set("threshold", threshold);
    run.manifest.set("rate", opts.rate);
    run.manifest.set("first_term_only", opts.first_term_only ? "true" : "false");
    const UnperturbedBasis basis = load_basis_for(common, cfg, run.manifest);
    run.finish_manifest();

    const auto spectra = floquet_scan(basis, model, d, cfg.numerics.n_floquet, !opts.first_term_only);
    std::size_t count = spectra.front().classes.size();
    for (const auto& s : spectra) count = std::min(count, s.classes.size());
    std::vector<std::vector<double>> curves(count, std::vector<double>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<double> q = spectra[i].class_quasienergies();
        for (std::size_t c = 0; c < count; ++c) curves[c][i] = q[c];
    }
    const auto crossings = extract_avoided_crossings(d, curves, threshold, model.omega);
    json list = json::array();
    for (const auto& c : crossings) {
        json e = {{"d", c.location},           {"gap", c.gap},     {"slope_difference", c.slope_difference},
                  {"angle", c.angle},          {"curve_a", c.curve_a}, {"curve_b", c.curve_b},
                  {"fit_residual", c.fit_residual}, {"reliable", c.reliable}};
        try {
            e["p_lz"] = landau_zener(c, opts.rate);
        } catch (const NumericalError&) {
            e["p_lz"] = nullptr;
        }
        list.push_back(e);
    }
    json rep;
    rep["reference_rate"] = opts.rate;
    rep["crossings"] = list;
    run.report("crossings.json", rep, "avoided crossings in the quasienergy spectrum");
    std::cout << crossings.size() << " avoided crossings below " << threshold << "\n";
}

void cmd_single_ion(const CommonOptions& common, const SingleIonOptions& opts) {
    if (opts.levels < 1 || opts.samples < 2) throw ConfigError("--levels and --samples must be positive");
    const RunConfig cfg = resolve_config(common);
    const DimensionlessModel model = dimensionless(cfg.trap, cfg.convention);
    Run run = start_run("single-ion", common, cfg);
    run.manifest.set("levels", std::to_string(opts.levels));
    run.manifest.set("samples", std::to_string(opts.samples));
    run.finish_manifest();

    const MathieuSolution sol = mathieu_floquet(model.a, model.q, model.omega);
    const PeriodicDrive drive = excess_drive(sol, model.delta_d, model.l_ac);
    const double T = 2.0 * std::numbers::pi / model.omega;

    CsvTable xp;
    xp.columns = {"t", "x_p", "x_p_dot"};
    for (int k = 0; k < opts.samples; ++k) {
        const double t = T * k / opts.samples;
        xp.add(t, drive.x(t), drive.x_dot(t));
    }
    run.csv("single_ion_xp.csv", std::move(xp), "periodic excess micromotion");

    CsvTable lv;
    lv.columns = {"n", "quasienergy", "quasienergy_zone", "kinetic_energy"};
    const auto eps = single_ion_quasienergies(sol, opts.levels);
    for (int n = 0; n < opts.levels; ++n)
        lv.add(n, eps[std::size_t(n)], reduce_to_zone(eps[std::size_t(n)], model.omega), mean_kinetic_energy(drive, n));
    run.csv("single_ion_levels.csv", std::move(lv), "single-ion quasienergies");

    json rep;
    rep["a"] = model.a;
    rep["q"] = model.q;
    rep["omega"] = model.omega;
    rep["mu"] = sol.mu;
    rep["nu"] = sol.nu;
    rep["secular_frequency"] = sol.secular_frequency();
    rep["mu_correction"] = (sol.mu - sol.secular_frequency()) / sol.secular_frequency();
    rep["delta_d"] = model.delta_d;
    rep["l_ac"] = model.l_ac;
    rep["excess_kinetic_energy"] = excess_kinetic_energy(drive);
    rep["excess_kinetic_energy_lowest_order"] =
        0.5 * (model.delta_d * model.delta_d + 0.5 * model.l_ac * model.l_ac);
    rep["ode_residual"] = sol.ode_residual();
    rep["wronskian_drift"] = sol.wronskian_drift();
    run.report("single_ion.json", rep, "single-ion quasienergies");
    std::cout << "mu = " << sol.mu << " omega_0\n";
}

void cmd_fidelity(const CommonOptions& common, const FidelityOptions& opts) {
    const RunConfig cfg = resolve_config(common);
    Run run = start_run("fidelity", common, cfg);
    run.manifest.set("p_e", opts.p_e);
    run.manifest.set("samples", std::to_string(opts.samples));
    run.manifest.set("restarts", std::to_string(opts.restarts));
    std::vector<GatePhaseSet> sets;
    if (opts.samples > 0) {
        std::mt19937_64 rng(cfg.numerics.seed);
        std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
        for (int s = 0; s < opts.samples; ++s) {
            GatePhaseSet p;
            for (int k = 0; k < 4; ++k) p.theta[std::size_t(k)] = u(rng);
            for (int k = 0; k < 4; ++k) p.theta_excited[std::size_t(k)] = u(rng);
            p.p_e = opts.p_e;
            sets.push_back(p);
        }
    } else {
        sets.push_back({opts.theta, opts.theta_excited, opts.p_e});
        std::ostringstream th, te;
        for (int k = 0; k < 4; ++k) {
            th << (k ? "," : "") << format_number(opts.theta[std::size_t(k)]);
            te << (k ? "," : "") << format_number(opts.theta_excited[std::size_t(k)]);
        }
        run.manifest.set("theta", th.str());
        run.manifest.set("theta_excited", te.str());
    }
    run.finish_manifest();

    json list = json::array();
    double worst = 1.0;
    for (const auto& p : sets) {
        const GateFidelity f = gate_fidelity(p, opts.restarts, cfg.numerics.seed);
        worst = std::min(worst, f.fidelity);
        list.push_back({{"alpha", p.alpha()},
                        {"fidelity", f.fidelity},
                        {"bound", f.bound},
                        {"max_vmv", f.max_vmv},
                        {"maximizer", f.maximizer},
                        {"used_inverse", f.used_inverse},
                        {"warnings", f.warnings}});
    }
    json rep;
    rep["p_e"] = opts.p_e;
    rep["min_fidelity"] = worst;
    rep["bound"] = std::sqrt(1.0 - 1.5 * opts.p_e);
    rep["sets"] = list;
    run.report("fidelity.json", rep, "phase-gate fidelity");
    std::cout << "F = " << worst << "\n";
}

}  // namespace mmcli
