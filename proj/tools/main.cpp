#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "commands.hpp"
#include "micromotion/error.hpp"

namespace {

void add_common(CLI::App* sub, mmcli::CommonOptions& o) {
    sub->add_option("--config", o.config_path, "key = value config file (default: built-in preset)");
    sub->add_option("--d-min", o.d_min, "smallest trap distance [l]");
    sub->add_option("--d-max", o.d_max, "largest trap distance [l]");
    sub->add_option("--d-step", o.d_step, "distance step [l]");
    sub->add_option("--ne", o.ne, "number of unperturbed states kept");
    sub->add_option("--nf", o.nf, "Floquet blocks k = -nf..nf");
    sub->add_option("--dt", o.dt, "propagator step as a fraction of the period");
    sub->add_option("--threshold", o.threshold, "coupling threshold (couplings) or gap threshold (crossings)");
    sub->add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
    sub->add_flag("--no-compute", o.no_compute, "fail instead of computing a missing basis");
    sub->add_option("--seed", o.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atom-ion quasienergy spectra in a Paul trap"};
    app.require_subcommand(1);

    mmcli::CommonOptions common;

    mmcli::SpectrumOptions spectrum;
    auto* sp = app.add_subcommand("spectrum", "energy or quasienergy spectra over a distance grid");
    add_common(sp, common);
    sp->add_option("--engine", spectrum.engine, "static, floquet, propagator or both")
        ->check(CLI::IsMember({"static", "floquet", "propagator", "both"}))
        ->capture_default_str();
    sp->add_flag("--first-term-only", spectrum.first_term_only, "drop the sin(omega t) coupling");
    sp->add_option("--classes", spectrum.report_classes, "classes compared when --engine both")->capture_default_str();

    mmcli::CouplingReportOptions couplings;
    auto* cp = app.add_subcommand("couplings", "micromotion coupling strengths and d_mm");
    add_common(cp, common);
    cp->add_option("--field-d", couplings.field_d, "distance of the field-coupling report [l]")->capture_default_str();
    cp->add_option("--field", couplings.field, "field amplitude [V/m]")->capture_default_str();
    cp->add_option("--field-target", couplings.field_target, "target level of the field coupling")->capture_default_str();

    auto* rs = app.add_subcommand("resonances", "resonances of the ground level with excited levels");
    add_common(rs, common);

    mmcli::CrossingOptions crossings;
    auto* cr = app.add_subcommand("crossings", "avoided crossings of the quasienergy curves");
    add_common(cr, common);
    cr->add_flag("--first-term-only", crossings.first_term_only, "drop the sin(omega t) coupling");
    cr->add_option("--rate", crossings.rate, "reference ramp rate for P_LZ [l omega_0]")->capture_default_str();

    mmcli::SingleIonOptions single;
    auto* si = app.add_subcommand("single-ion", "exact single-ion solution");
    add_common(si, common);
    si->add_option("--levels", single.levels, "number of levels")->capture_default_str();
    si->add_option("--samples", single.samples, "x_p samples per period")->capture_default_str();

    mmcli::FidelityOptions fidelity;
    auto* fi = app.add_subcommand("fidelity", "phase-gate fidelity from excited-state occupancy");
    add_common(fi, common);
    fi->add_option("--theta", fidelity.theta, "ground-branch phases for 00, 01, 10, 11");
    fi->add_option("--theta-excited", fidelity.theta_excited, "excited-branch phases");
    fi->add_option("--pe", fidelity.p_e, "excited-state occupancy")->capture_default_str();
    fi->add_option("--samples", fidelity.samples, "random phase sets instead of --theta")->capture_default_str();
    fi->add_option("--restarts", fidelity.restarts, "simplex search restarts")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sp) mmcli::cmd_spectrum(common, spectrum);
        else if (*cp) mmcli::cmd_couplings(common, couplings);
        else if (*rs) mmcli::cmd_resonances(common);
        else if (*cr) mmcli::cmd_crossings(common, crossings);
        else if (*si) mmcli::cmd_single_ion(common, single);
        else if (*fi) mmcli::cmd_fidelity(common, fidelity);
    } catch (const micromotion::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
