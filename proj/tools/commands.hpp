#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "micromotion/config.hpp"

namespace mmcli {

struct CommonOptions {
    std::string config_path;
    std::optional<double> d_min, d_max, d_step;
    std::optional<int> ne, nf;
    std::optional<double> dt;
    std::optional<double> threshold;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool no_compute = false;
};

/// Config file (or the built-in preset) with command-line overrides applied.
micromotion::RunConfig resolve_config(const CommonOptions& opts);

struct SpectrumOptions {
    std::string engine = "floquet";
    bool first_term_only = false;
    int report_classes = 20;
};

struct CrossingOptions {
    bool first_term_only = false;
    double rate = 1.0e-3;
};

struct CouplingReportOptions {
    double field_d = 6.0;
    double field = 1.0;
    int field_target = -3;
};

struct SingleIonOptions {
    int levels = 6;
    int samples = 64;
};

struct FidelityOptions {
    std::array<double, 4> theta{};
    std::array<double, 4> theta_excited{};
    double p_e = 0.0;
    int samples = 0;
    int restarts = 100;
};

void cmd_spectrum(const CommonOptions& common, const SpectrumOptions& opts);
void cmd_couplings(const CommonOptions& common, const CouplingReportOptions& opts);
void cmd_resonances(const CommonOptions& common);
void cmd_crossings(const CommonOptions& common, const CrossingOptions& opts);
void cmd_single_ion(const CommonOptions& common, const SingleIonOptions& opts);
void cmd_fidelity(const CommonOptions& common, const FidelityOptions& opts);

}  // namespace mmcli
