#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morsesplit/functional_model.hpp"
#include "morsesplit/normal_form.hpp"
#include "morsesplit/reduction.hpp"
#include "morsesplit/spectral.hpp"
#include "morsesplit/topology.hpp"

namespace morsesplit {

/// Run configuration: the problem, tolerance overrides, radii/resolution
/// overrides and output control. Same config (including seed) yields
/// identical numeric report content.
struct RunConfig {
    ProblemSpec problem;
    Tolerances tolerances;
    // radii overrides; <= 0 means "choose automatically"
    double r0_seed = 0.0;
    double chart_delta = 0.0;
    double topology_radius = 0.0;
    double certificate_radius = 0.0;
    int topology_resolution = 64;
    int certificate_samples = 48;
    int chart_samples = 100;
    std::vector<std::string> commands;  // subset of {analyze, verify, report}
    std::string output_dir = "analysis_out";
    std::uint64_t seed = 0;

    static RunConfig from_json(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json() const;
};

/// One verification ledger entry: every pass/fail carries the measured
/// quantity and the threshold it was compared against.
struct LedgerEntry {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool hard = true;  // hard gates decide the exit status
    std::string note;
};

struct AnalysisReport {
    std::string problem_name;
    int dim = 0;
    int nu = 0, mu = 0;
    double a0 = 0.0;
    std::vector<double> eigenvalues;
    // certificates
    double certificate_radius = 0.0;
    double a1 = 0.0;
    double omega_max = 0.0;
    bool certificate_pass = false;
    // reduction
    double r0 = 0.0;
    double contraction_factor = 0.0;
    double lipschitz_h = 0.0;
    double lipschitz_h_hnorm = 0.0;
    double max_reduction_residual = 0.0;
    // chart
    double chart_eps = 0.0, chart_eps1 = 0.0, chart_delta = 0.0, chart_radius = 0.0;
    double max_normal_form_residual = 0.0;
    double x_continuity_modulus = 0.0;  // report-only
    BehaviorReport behavior;
    // topology
    CriticalGroupReport critical_groups;
    bool shifting_checked = false;
    bool shifting_pass = false;
    std::vector<int> betti_full_oracle;
    // ledger + timings
    std::vector<LedgerEntry> ledger;
    std::vector<std::pair<std::string, double>> timings_ms;

    bool hard_gates_pass() const;
    std::string to_json(bool include_timings = true) const;
};

/// Runs the full pipeline (split, certify, reduce, chart, topology) and
/// writes report.json plus the CSV grids into config.output_dir.
AnalysisReport cmd_analyze(const RunConfig& config);

/// Runs every module invariant over the catalog (or the configured problem)
/// and prints a ledger. Returns 0 iff all pass.
int cmd_verify(const RunConfig& config, bool whole_catalog, std::ostream& out);

/// Renders the human-readable summary from a prior analyze run.
int cmd_report(const std::string& output_dir, std::ostream& out);

/// The per-problem invariant suite used by cmd_verify; exposed for tests.
std::vector<LedgerEntry> verify_problem(const std::string& name, const RunConfig& base,
                                        std::ostream* log = nullptr);

}  // namespace morsesplit
