#include "morsesplit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morsesplit/sampling.hpp"

namespace morsesplit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

Tolerances tolerances_from_json(const json& j) {
    Tolerances t;
    reject_unknown(j,
                   {"hessian_symmetry", "grad_fd_rel", "hess_fd_rel", "critical_point",
                    "null_tol_rel", "eigen_residual", "projector", "reduction_residual",
                    "reduction_max_iterations", "contraction_bound", "lipschitz_bound",
                    "maximizer", "invert", "normal_form", "equivariance", "isometry",
                    "intertwine"},
                   "tolerances");
    auto get = [&](const char* k, double& slot) {
        if (j.contains(k)) {
            slot = j[k].get<double>();
            if (!(slot > 0.0)) throw ConfigError(std::string("tolerance '") + k + "' must be positive");
        }
    };
    get("hessian_symmetry", t.hessian_symmetry);
    get("grad_fd_rel", t.grad_fd_rel);
    get("hess_fd_rel", t.hess_fd_rel);
    get("critical_point", t.critical_point);
    get("null_tol_rel", t.null_tol_rel);
    get("eigen_residual", t.eigen_residual);
    get("projector", t.projector);
    get("reduction_residual", t.reduction_residual);
    get("contraction_bound", t.contraction_bound);
    get("lipschitz_bound", t.lipschitz_bound);
    get("maximizer", t.maximizer);
    get("invert", t.invert);
    get("normal_form", t.normal_form);
    get("equivariance", t.equivariance);
    get("isometry", t.isometry);
    get("intertwine", t.intertwine);
    if (j.contains("reduction_max_iterations"))
        t.reduction_max_iterations = j["reduction_max_iterations"].get<int>();
    return t;
}

// Deterministic 17-point grid over the kernel ball.
std::vector<Vec> kernel_grid17(int nu, double r) {
    std::vector<Vec> zs;
    if (nu == 0) {
        zs.push_back(Vec());
        return zs;
    }
    if (nu == 1) {
        for (int i = 0; i < 17; ++i) {
            Vec z(1);
            z[0] = -r + 2.0 * r * i / 16.0;
            zs.push_back(z);
        }
        return zs;
    }
    zs.push_back(Vec::Zero(nu));
    for (auto& p : halton_ball(nu, r, 16)) zs.push_back(p);
    return zs;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

json ledger_to_json(const std::vector<LedgerEntry>& ledger) {
    json arr = json::array();
    for (const auto& e : ledger) {
        json row;
        row["name"] = e.name;
        row["measured"] = finite_or_null(e.measured);
        row["threshold"] = finite_or_null(e.threshold);
        row["pass"] = e.pass;
        row["hard"] = e.hard;
        if (!e.note.empty()) row["note"] = e.note;
        arr.push_back(row);
    }
    return arr;
}

std::string number_or_dash(const json& v) {
    if (!v.is_number()) return "-";
    std::ostringstream os;
    os << v.get<double>();
    return os.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

std::string csv_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"problem", "catalog", "tolerances", "radii", "resolutions", "commands",
                    "output_dir", "seed"},
                   "run config");
    RunConfig c;
    if (j.contains("catalog")) {
        if (j.contains("problem")) throw ConfigError("give either 'catalog' or 'problem', not both");
        c.problem = catalog_spec(j["catalog"].get<std::string>());
    } else if (j.contains("problem")) {
        c.problem = parse_problem_spec(j["problem"].dump());
    } else {
        throw ConfigError("config needs a 'problem' or a 'catalog' entry");
    }
    if (j.contains("tolerances")) c.tolerances = tolerances_from_json(j["tolerances"]);
    if (j.contains("radii")) {
        reject_unknown(j["radii"], {"r0_seed", "chart_delta", "topology", "certificate"}, "radii");
        c.r0_seed = j["radii"].value("r0_seed", 0.0);
        c.chart_delta = j["radii"].value("chart_delta", 0.0);
        c.topology_radius = j["radii"].value("topology", 0.0);
        c.certificate_radius = j["radii"].value("certificate", 0.0);
    }
    if (j.contains("resolutions")) {
        reject_unknown(j["resolutions"], {"topology", "certificate_samples", "chart_samples"},
                       "resolutions");
        c.topology_resolution = j["resolutions"].value("topology", 64);
        c.certificate_samples = j["resolutions"].value("certificate_samples", 48);
        c.chart_samples = j["resolutions"].value("chart_samples", 100);
        if (c.topology_resolution < 8) throw ConfigError("resolutions must be >= 8");
        if (c.certificate_samples < 10) throw ConfigError("certificate_samples must be >= 10");
    }
    if (j.contains("commands")) {
        for (const auto& cmd : j["commands"]) {
            const std::string s = cmd.get<std::string>();
            if (s != "analyze" && s != "verify" && s != "report")
                throw ConfigError("unknown command '" + s + "' in config");
            c.commands.push_back(s);
        }
    }
    c.output_dir = j.value("output_dir", std::string("analysis_out"));
    c.seed = j.value("seed", 0ULL);
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string RunConfig::to_json() const {
    json j;
    j["problem"] = json::parse(problem_spec_to_json(problem));
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    j["resolutions"] = {{"topology", topology_resolution},
                        {"certificate_samples", certificate_samples},
                        {"chart_samples", chart_samples}};
    return j.dump(2);
}

bool AnalysisReport::hard_gates_pass() const {
    for (const auto& e : ledger)
        if (e.hard && !e.pass) return false;
    return true;
}

std::string AnalysisReport::to_json(bool include_timings) const {
    json j;
    j["problem"] = problem_name;
    j["dim"] = dim;
    j["splitting"] = {{"nu", nu},
                      {"mu", mu},
                      {"a0", std::isfinite(a0) ? json(a0) : json()},
                      {"eigenvalues", eigenvalues}};
    j["certificate"] = {{"radius", certificate_radius},
                        {"a1", a1},
                        {"omega_max", omega_max},
                        {"pass", certificate_pass}};
    j["reduction"] = {{"r0", r0},
                      {"contraction_factor", contraction_factor},
                      {"lipschitz_h_xnorm", lipschitz_h},
                      {"lipschitz_h_hnorm", lipschitz_h_hnorm},
                      {"max_residual", max_reduction_residual}};
    j["chart"] = {{"delta", chart_delta},
                  {"eps1", chart_eps1},
                  {"eps", chart_eps},
                  {"chart_radius", chart_radius},
                  {"max_normal_form_residual", max_normal_form_residual},
                  {"x_continuity_modulus", x_continuity_modulus}};
    j["behavior"] = {{"applicable", behavior.applicable},
                     {"a1", behavior.a1},
                     {"a1_prime", behavior.a1_prime},
                     {"c1_prime", behavior.c1_prime},
                     {"c2_prime", behavior.c2_prime},
                     {"q0_norm", behavior.q0_norm},
                     {"s", behavior.s},
                     {"r", behavior.r},
                     {"eps", behavior.eps},
                     {"hbar", behavior.hbar},
                     {"premises_ok", behavior.premises_ok},
                     {"margin_i", behavior.margin_i},
                     {"margin_ii", behavior.margin_ii},
                     {"margin_iii", behavior.margin_iii},
                     {"note", behavior.note}};
    j["critical_groups"] = {{"betti_reduced", critical_groups.betti_reduced},
                            {"mu", critical_groups.mu},
                            {"nu", critical_groups.nu},
                            {"betti", critical_groups.betti},
                            {"classification", to_string(critical_groups.classification)},
                            {"degree", critical_groups.brouwer_degree_reduced},
                            {"poincare_hopf",
                             {{"lhs", critical_groups.poincare_hopf.lhs},
                              {"rhs", critical_groups.poincare_hopf.rhs},
                              {"pass", critical_groups.poincare_hopf.pass}}}};
    j["topology_extra"] = {{"hofer_detector", critical_groups.hofer_detector},
                           {"poincare_hopf_middle", critical_groups.poincare_hopf.middle},
                           {"resolutions_tested", critical_groups.resolutions_tested},
                           {"betti_full_oracle", betti_full_oracle},
                           {"shifting_checked", shifting_checked},
                           {"shifting_pass", shifting_pass}};
    j["ledger"] = ledger_to_json(ledger);
    if (include_timings) {
        json t = json::object();
        for (const auto& [k, v] : timings_ms) t[k] = v;
        j["timings_ms"] = t;
    }
    return j.dump(2);
}

namespace {

struct PipelineState {
    FunctionalModel model;
    SpectralSplitting splitting;
    ConditionCertificate certificate;
    std::unique_ptr<Reduction> reduction;
    std::unique_ptr<ReducedFunctional> reduced;
    std::unique_ptr<NormalFormChart> chart;
};

void run_reduction_stage(const RunConfig& config, PipelineState& st, AnalysisReport& rep) {
    const Tolerances& tol = config.tolerances;
    st.reduction = std::make_unique<Reduction>(st.model, st.splitting, tol,
                                               ReductionSolver::fixed_point, config.r0_seed);
    st.reduced = std::make_unique<ReducedFunctional>(*st.reduction);
    const Reduction& red = *st.reduction;
    rep.r0 = red.r0();

    double max_resid = 0.0;
    const auto grid17 = kernel_grid17(st.splitting.nu, 0.95 * red.r0());
    for (const auto& z : grid17) {
        const Vec zz = z.size() ? z : Vec::Zero(st.splitting.nu);
        const Vec h = red.solve_h(zz);
        max_resid = std::max(max_resid, red.residual(zz, h));
    }
    rep.max_reduction_residual = max_resid;
    rep.ledger.push_back({"reduction_residual", max_resid, 1e-10, max_resid <= 1e-10, true, ""});

    red.grid(9);
    rep.contraction_factor = red.contraction_factor();
    rep.lipschitz_h = red.lipschitz_h();
    rep.lipschitz_h_hnorm = red.lipschitz_h_hnorm();
    rep.ledger.push_back({"contraction_factor", rep.contraction_factor, tol.contraction_bound,
                          rep.contraction_factor < tol.contraction_bound, true, ""});
    rep.ledger.push_back({"lipschitz_h_xnorm", rep.lipschitz_h, tol.lipschitz_bound,
                          rep.lipschitz_h <= tol.lipschitz_bound, true, ""});

    // Gradient formula of the reduced functional against finite differences.
    if (st.splitting.nu > 0) {
        double worst = 0.0;
        const double r = 0.8 * red.r0();
        // Annulus samples: the origin is covered by the d2L0(theta) check,
        // and a relative comparison there would divide rounding noise by
        // a vanishing gradient.
        auto pts = halton_ball(st.splitting.nu, r, 10);
        for (auto& z : pts)
            if (z.norm() < 0.3 * r) z *= (0.3 * r) / std::max(z.norm(), 1e-12);
        const double step = std::max(1e-6, 1e-5 * r);
        for (const auto& z : pts) {
            const Vec g = st.reduced->gradient(z);
            Vec gfd(st.splitting.nu);
            Vec e = Vec::Zero(st.splitting.nu);
            for (int i = 0; i < st.splitting.nu; ++i) {
                e[i] = step;
                gfd[i] = (st.reduced->value(z + e) - st.reduced->value(z - e)) / (2.0 * step);
                e[i] = 0.0;
            }
            const double scale = std::max(1e-8, gfd.norm());
            worst = std::max(worst, (g - gfd).norm() / scale);
        }
        rep.ledger.push_back(
            {"reduced_gradient_formula_fd_rel", worst, 1e-5, worst <= 1e-5, true, ""});

        const double d2norm = st.reduced->fd_hessian_at_theta(1e-3).norm();
        rep.ledger.push_back(
            {"reduced_hessian_at_origin", d2norm, 1e-4, d2norm <= 1e-4, true, ""});
    }
}

void run_chart_stage(const RunConfig& config, PipelineState& st, AnalysisReport& rep) {
    const Tolerances& tol = config.tolerances;
    st.chart = std::make_unique<NormalFormChart>(*st.reduction, st.certificate, tol,
                                                 config.chart_delta);
    const NormalFormChart& chart = *st.chart;
    rep.chart_delta = chart.delta();
    rep.chart_eps1 = chart.eps1();
    rep.chart_eps = chart.eps();
    rep.chart_radius = chart.chart_radius();

    const int dp = chart.dim_plus(), dm = chart.dim_minus();
    const double cr = 0.95 * chart.chart_radius();
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto rand_ball = [&](int d, double radius) {
        Vec v(d);
        if (d == 0) return Vec();
        for (int i = 0; i < d; ++i) v[i] = gauss(rng);
        const double n = std::max(v.norm(), 1e-300);
        return Vec(radius * std::pow(unif(rng), 1.0 / d) / n * v);
    };

    double worst = 0.0;
    if (dp + dm > 0 && cr > 0.0) {
        for (int k = 0; k < config.chart_samples; ++k) {
            const Vec z = (st.splitting.nu > 0) ? rand_ball(st.splitting.nu, chart.z_radius())
                                                : Vec();
            const Vec up = rand_ball(dp, cr);
            const Vec um = rand_ball(dm, cr);
            worst = std::max(worst, chart.normal_form_residual(z, up, um));
        }
    } else {
        // No complement directions: the identity degenerates to L(z + h(z)) = L0(z).
        worst = 0.0;
    }
    rep.max_normal_form_residual = worst;
    rep.ledger.push_back(
        {"normal_form_identity", worst, tol.normal_form, worst <= tol.normal_form, true, ""});

    // Report-only modulus of X-continuity of Phi on B_H0 x B_H-.
    double modulus = 0.0;
    if (dm > 0 || st.splitting.nu > 0) {
        const FunctionalModel& model = st.model;
        const SpectralSplitting& s = st.splitting;
        for (int k = 0; k < 8; ++k) {
            const Vec z = (s.nu > 0) ? rand_ball(s.nu, 0.8 * chart.z_radius()) : Vec();
            const Vec um = rand_ball(dm, 0.8 * cr);
            for (double scale : {1e-3, 5e-4}) {
                const Vec dz = (s.nu > 0) ? rand_ball(s.nu, scale * chart.z_radius()) : Vec();
                const Vec dum = rand_ball(dm, scale * cr);
                const Vec p1 = st.chart->big_phi(z, Vec::Zero(dp), um);
                const Vec p2 = st.chart->big_phi((s.nu > 0) ? Vec(z + dz) : z, Vec::Zero(dp),
                                                 (dm > 0) ? Vec(um + dum) : um);
                Vec darg = Vec::Zero(model.dim);
                if (s.nu > 0) darg += s.basis_H0 * dz;
                if (dm > 0) darg += s.basis_Hminus * dum;
                const double dx = model.x_norm(darg);
                if (dx > 1e-14) modulus = std::max(modulus, model.x_norm(p1 - p2) / dx);
            }
        }
    }
    rep.x_continuity_modulus = modulus;
    rep.ledger.push_back({"x_continuity_modulus", modulus,
                          std::numeric_limits<double>::infinity(), true, false,
                          "report-only"});

    rep.behavior = verify_behavior_estimates(chart, st.certificate);
    if (rep.behavior.applicable) {
        rep.ledger.push_back({"behavior_margin_i", rep.behavior.margin_i, 0.0,
                              rep.behavior.margin_i >= 0.0, false, "report-only"});
        rep.ledger.push_back({"behavior_margin_ii", rep.behavior.margin_ii, 0.0,
                              rep.behavior.margin_ii >= 0.0, false, "report-only"});
        rep.ledger.push_back({"behavior_margin_iii", rep.behavior.margin_iii, 0.0,
                              rep.behavior.margin_iii >= 0.0, false, "report-only"});
    }
}

void run_topology_stage(const RunConfig& config, PipelineState& st, AnalysisReport& rep) {
    const SpectralSplitting& s = st.splitting;
    const int nu = s.nu, mu = s.mu;
    const int res = config.topology_resolution;

    std::vector<int> reduced_groups;
    int degree = 1;  // degree of the trivial map on the zero-dimensional kernel
    double radius = 0.0;
    std::function<double(const Vec&)> reduced_value;
    if (nu >= 1) {
        if (nu > 3) throw ConfigError("topology stage needs nu <= 3");
        radius = (config.topology_radius > 0.0)
                     ? config.topology_radius
                     : 0.9 * st.reduction->r0() / std::sqrt(static_cast<double>(nu));
        reduced_groups = critical_groups_reduced(*st.reduced, radius, res);
        auto grad = [&](const Vec& z) { return st.reduced->gradient(z); };
        degree = brouwer_degree(nu, grad, radius, res);
        reduced_value = [&](const Vec& z) { return st.reduced->value(z); };
    }

    CriticalGroupReport cg = shift(reduced_groups, mu, nu,
                                   reduced_value ? &reduced_value : nullptr, radius, res);
    cg.resolutions_tested = {res, 2 * res};
    cg.brouwer_degree_reduced = degree;
    cg.poincare_hopf = poincare_hopf_check(cg, degree, mu);
    rep.critical_groups = cg;
    rep.ledger.push_back({"poincare_hopf", static_cast<double>(cg.poincare_hopf.lhs),
                          static_cast<double>(cg.poincare_hopf.rhs), cg.poincare_hopf.pass, true,
                          "integer ledger lhs = middle = rhs"});

    if (st.model.dim <= 3) {
        const double full_r = 0.5 * st.model.domain_radius / std::sqrt(static_cast<double>(st.model.dim));
        rep.betti_full_oracle = full_space_groups_oracle(st.model, full_r, res);
        rep.shifting_checked = true;
        bool equal = true;
        const size_t len = std::max(rep.betti_full_oracle.size(), cg.betti.size());
        for (size_t q = 0; q < len; ++q) {
            const int a = q < rep.betti_full_oracle.size() ? rep.betti_full_oracle[q] : 0;
            const int b = q < cg.betti.size() ? cg.betti[q] : 0;
            equal = equal && (a == b);
        }
        rep.shifting_pass = equal;
        rep.ledger.push_back({"shifting_theorem", equal ? 1.0 : 0.0, 1.0, equal, true,
                              "full-space cubical groups vs mu-shifted reduced groups"});
    }
}

void write_outputs(const RunConfig& config, const PipelineState& st, const AnalysisReport& rep) {
    fs::create_directories(config.output_dir);
    write_text_file(fs::path(config.output_dir) / "report.json", rep.to_json());
    write_text_file(fs::path(config.output_dir) / "config.json", config.to_json());

    // Reduction grid CSV: kernel coordinates, h in complement coordinates,
    // reduced value.
    std::ostringstream csv;
    const int nu = st.splitting.nu;
    const int m = st.splitting.dim_pm();
    for (int i = 0; i < nu; ++i) csv << "z" << i << ",";
    for (int i = 0; i < m; ++i) csv << "h" << i << ",";
    csv << "value\n";
    if (st.reduction) {
        for (const auto& row : st.reduction->grid()) {
            for (int i = 0; i < nu; ++i) csv << csv_double(row.z[i]) << ",";
            for (int i = 0; i < m; ++i) csv << csv_double(row.h[i]) << ",";
            csv << csv_double(row.value) << "\n";
        }
    }
    write_text_file(fs::path(config.output_dir) / "reduction_grid.csv", csv.str());

    // Chart residual grid CSV.
    std::ostringstream ccsv;
    ccsv << "z_norm,u_plus_norm,u_minus_norm,residual\n";
    if (st.chart) {
        const auto& chart = *st.chart;
        const double cr = 0.9 * chart.chart_radius();
        const int dp = chart.dim_plus(), dm = chart.dim_minus();
        if (cr > 0.0 && dp + dm > 0) {
            for (int iz = 0; iz < (nu > 0 ? 3 : 1); ++iz) {
                Vec z = nu > 0 ? Vec(Vec::Zero(nu)) : Vec();
                if (nu > 0 && iz > 0) {
                    z = Vec::Zero(nu);
                    z[0] = (iz == 1 ? 0.5 : -0.5) * chart.z_radius();
                }
                for (int iu = 0; iu <= 4; ++iu)
                    for (int iv = 0; iv <= 4; ++iv) {
                        if (dm == 0 && iv > 0) continue;
                        Vec up = Vec::Zero(dp);
                        if (dp > 0) up[0] = cr * iu / 4.0;
                        Vec um = Vec::Zero(dm);
                        if (dm > 0) um[0] = cr * iv / 4.0;
                        const double resid = chart.normal_form_residual(z, up, um);
                        ccsv << csv_double(nu > 0 ? z.norm() : 0.0) << ","
                             << csv_double(dp > 0 ? up.norm() : 0.0) << ","
                             << csv_double(dm > 0 ? um.norm() : 0.0) << ","
                             << csv_double(resid) << "\n";
                    }
            }
        }
    }
    write_text_file(fs::path(config.output_dir) / "chart_residuals.csv", ccsv.str());
}

}  // namespace

AnalysisReport cmd_analyze(const RunConfig& config) {
    AnalysisReport rep;
    PipelineState st;
    const Tolerances& tol = config.tolerances;

    Stopwatch total;
    {
        Stopwatch sw;
        st.model = build_model(config.problem, tol);
        rep.timings_ms.emplace_back("build_model", sw.ms());
    }
    rep.problem_name = st.model.name;
    rep.dim = st.model.dim;

    {
        Stopwatch sw;
        st.splitting = split(st.model, tol.null_tol_rel);
        rep.timings_ms.emplace_back("split", sw.ms());
    }
    rep.nu = st.splitting.nu;
    rep.mu = st.splitting.mu;
    rep.a0 = st.splitting.a0;
    rep.eigenvalues.assign(st.splitting.eigenvalues.data(),
                           st.splitting.eigenvalues.data() + st.splitting.eigenvalues.size());
    const auto scheck = check_splitting(st.model, st.splitting, tol);
    rep.ledger.push_back({"splitting_invariants", scheck.eigen_residual, tol.eigen_residual,
                          scheck.pass, true, "projectors, residuals, block orthogonality"});

    {
        Stopwatch sw;
        const double crad = (config.certificate_radius > 0.0)
                                ? config.certificate_radius
                                : 0.5 * st.model.domain_radius;
        st.certificate =
            certify_conditions(st.model, st.splitting, crad, config.certificate_samples);
        rep.timings_ms.emplace_back("certify_conditions", sw.ms());
    }
    rep.certificate_radius = st.certificate.certified_radius;
    rep.a1 = st.certificate.a1;
    rep.omega_max = st.certificate.omega_max;
    rep.certificate_pass = st.certificate.pass_all();
    rep.ledger.push_back({"conditions_certificate", st.certificate.certified_radius, 0.0,
                          st.certificate.certified_radius > 0.0, false,
                          "measured = largest radius at which all sampled conditions hold"});

    auto staged = [&](const char* stage, auto&& fn, const char* hint) {
        Stopwatch sw;
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw AnalysisError(std::string(stage) + ": " + e.what() + " (" + hint + ")");
        }
        rep.timings_ms.emplace_back(stage, sw.ms());
    };
    staged("reduction", [&] { run_reduction_stage(config, st, rep); },
           "shrink radii.r0_seed or loosen tolerances.reduction_residual");
    staged("normal_form", [&] { run_chart_stage(config, st, rep); },
           "shrink radii.chart_delta or the certificate radius");
    staged("topology", [&] { run_topology_stage(config, st, rep); },
           "refine resolutions.topology or shrink radii.topology");
    rep.timings_ms.emplace_back("total", total.ms());

    write_outputs(config, st, rep);
    return rep;
}

// ---------------------------------------------------------------------------
// verify

namespace {

void push(std::vector<LedgerEntry>& ledger, std::string name, double measured, double threshold,
          bool pass, bool hard = true, std::string note = "") {
    ledger.push_back({std::move(name), measured, threshold, pass, hard, std::move(note)});
}

// Model-level invariants (derivative consistency, norm domination, the
// grid-problem extras).
void verify_model_invariants(const std::string& name, const FunctionalModel& model,
                             const Tolerances& tol, std::vector<LedgerEntry>& ledger) {
    const int n = model.dim;
    auto pts = halton_ball(n, 0.25 * model.domain_radius, 20);
    pts.push_back(Vec::Zero(n));
    double grad_err = 0.0, hess_err = 0.0, sym_err = 0.0, domination = 0.0;
    for (const auto& x : pts) {
        const Vec g = model.gradient(x);
        const Vec gfd = finite_difference_gradient(model, x, 1e-6);
        grad_err = std::max(grad_err, (g - gfd).norm() / std::max(1.0, g.norm()));
        const Mat h = model.hessian(x);
        const Mat hfd = finite_difference_hessian(model, x, 1e-4);
        hess_err = std::max(hess_err, (h - hfd).norm() / std::max(1.0, h.norm()));
        sym_err = std::max(sym_err, (h - h.transpose()).norm() / std::max(1.0, h.norm()));
        domination = std::max(domination, model.norm_h(x) - model.x_norm(x));
    }
    push(ledger, name + "/fd_gradient_consistency", grad_err, tol.grad_fd_rel,
         grad_err <= tol.grad_fd_rel);
    push(ledger, name + "/fd_hessian_consistency", hess_err, tol.hess_fd_rel,
         hess_err <= tol.hess_fd_rel);
    push(ledger, name + "/hessian_symmetry", sym_err, tol.hessian_symmetry,
         sym_err <= tol.hessian_symmetry);
    push(ledger, name + "/norm_domination", domination, 0.0, domination <= 1e-12);
    push(ledger, name + "/critical_point_gradient", model.norm_h(model.a(Vec::Zero(n))),
         tol.critical_point, model.norm_h(model.a(Vec::Zero(n))) <= tol.critical_point);
}

Mat cyclic_shift_matrix(int n) {
    Mat J = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) J((i + 1) % n, i) = 1.0;
    return J;
}

void verify_spectral_invariants(const std::string& name, const FunctionalModel& model,
                                const SpectralSplitting& s, const Tolerances& tol,
                                std::vector<LedgerEntry>& ledger) {
    const auto c = check_splitting(model, s, tol);
    push(ledger, name + "/eigen_residual", c.eigen_residual, tol.eigen_residual,
         c.eigen_residual <= tol.eigen_residual);
    push(ledger, name + "/projector_identities",
         std::max({c.projector_sum_error, c.projector_idempotent, c.projector_selfadjoint}),
         tol.projector * model.dim,
         std::max({c.projector_sum_error, c.projector_idempotent, c.projector_selfadjoint}) <=
             tol.projector * model.dim);
    push(ledger, name + "/splitting_orthogonality", c.block_orthogonality,
         1e-10 * std::max(1.0, model.hessian(Vec::Zero(model.dim)).norm()),
         c.block_orthogonality <=
             1e-10 * std::max(1.0, model.hessian(Vec::Zero(model.dim)).norm()));

    // Scale equivariance of the split: c B(theta) keeps nu, mu and the
    // projectors, and scales a0.
    const double scale = 3.5;
    FunctionalModel scaled = model;
    scaled.value = [f = model.value, scale](const Vec& x) { return scale * f(x); };
    scaled.gradient = [g = model.gradient, scale](const Vec& x) { return Vec(scale * g(x)); };
    scaled.hessian = [h = model.hessian, scale](const Vec& x) { return Mat(scale * h(x)); };
    const SpectralSplitting s2 = split(scaled, tol.null_tol_rel);
    const bool same_counts = (s2.nu == s.nu) && (s2.mu == s.mu);
    const double proj_drift = std::max({(s2.P0 - s.P0).norm(), (s2.Pminus - s.Pminus).norm(),
                                        (s2.Pplus - s.Pplus).norm()});
    const double a0_rel = std::isfinite(s.a0) ? std::abs(s2.a0 - scale * s.a0) / (scale * s.a0) : 0.0;
    push(ledger, name + "/split_scale_equivariance", proj_drift + a0_rel, 1e-9,
         same_counts && proj_drift <= 1e-9 && a0_rel <= 1e-12);
}

void verify_reduction_invariants(const std::string& name, const FunctionalModel& model,
                                 const SpectralSplitting& s, Reduction& red,
                                 const Tolerances& tol, std::vector<LedgerEntry>& ledger,
                                 std::uint64_t seed) {
    const int nu = s.nu;
    // h(theta) = theta.
    const Vec h0 = red.solve_h(Vec::Zero(nu));
    const double h0n = h0.size() ? h0.norm() : 0.0;
    push(ledger, name + "/h_at_origin", h0n, tol.reduction_residual,
         h0n <= 10 * tol.reduction_residual);

    if (nu == 0) {
        push(ledger, name + "/nu0_trivial_reduction", 0.0, 0.0, true, true,
             "solve_h returns the empty vector; L0 is the constant L(theta)");
        return;
    }

    double max_resid = 0.0;
    for (const auto& z : kernel_grid17(nu, 0.95 * red.r0())) {
        const Vec h = red.solve_h(z);
        max_resid = std::max(max_resid, red.residual(z, h));
    }
    push(ledger, name + "/reduction_residual_grid", max_resid, 1e-10, max_resid <= 1e-10);

    red.grid(9);
    push(ledger, name + "/contraction_factor", red.contraction_factor(), tol.contraction_bound,
         red.contraction_factor() < tol.contraction_bound);
    push(ledger, name + "/lipschitz_h_xnorm", red.lipschitz_h(), tol.lipschitz_bound,
         red.lipschitz_h() <= tol.lipschitz_bound);
    push(ledger, name + "/lipschitz_h_hnorm", red.lipschitz_h_hnorm(),
         std::numeric_limits<double>::infinity(), true, false, "measured, report-only");

    // Uniqueness: random restarts land on the same fixed point.
    std::mt19937_64 rng(seed ^ 0xabcdef12345ULL);
    std::normal_distribution<double> gauss;
    Vec z = Vec::Zero(nu);
    z[0] = 0.5 * red.r0();
    const Vec href = red.solve_h(z);
    double worst_dev = 0.0;
    const int m = s.dim_pm();
    for (int k = 0; k < 5; ++k) {
        Vec x0(m);
        for (int i = 0; i < m; ++i) x0[i] = gauss(rng);
        if (x0.norm() > 0) x0 *= (0.2 * model.domain_radius) / x0.norm();
        try {
            const Vec h = red.solve_h(z, x0);
            worst_dev = std::max(worst_dev, (h - href).norm());
        } catch (const ContractionError&) {
            // A start outside the contraction basin is not a uniqueness failure.
        }
    }
    push(ledger, name + "/uniqueness_restarts", worst_dev, 1e-8, worst_dev <= 1e-8);

    // Isolatedness propagation: sampled, report-only when inconclusive.
    bool full_isolated = true;
    for (const auto& x : halton_ball(model.dim, 0.3 * model.domain_radius, 40)) {
        if (model.norm_h(x) < 1e-3) continue;
        if (model.norm_h(model.a(x)) < 1e-12) full_isolated = false;
    }
    bool reduced_isolated = true;
    ReducedFunctional rf(red);
    for (const auto& zz : halton_ball(nu, 0.9 * red.r0(), 40)) {
        if (zz.norm() < 1e-3) continue;
        if (rf.gradient(zz).norm() < 1e-12) reduced_isolated = false;
    }
    push(ledger, name + "/isolatedness_propagation", reduced_isolated ? 1.0 : 0.0, 1.0,
         !full_isolated || reduced_isolated, false, "sampled at grid resolution, report-only");

    // h'(theta) = 0, formula and finite differences.
    const double dnorm = red.h_derivative_at_theta().norm();
    push(ledger, name + "/h_derivative_formula", dnorm, 1e-8, dnorm <= 1e-8);
    double slope = 0.0;
    const double step = 1e-4;
    for (int i = 0; i < nu; ++i) {
        Vec e = Vec::Zero(nu);
        e[i] = step;
        const Vec hp = red.solve_h(e), hm = red.solve_h(-e);
        if (m > 0) slope = std::max(slope, (hp - hm).norm() / (2.0 * step));
    }
    push(ledger, name + "/h_fd_slope_at_origin", slope, 1e-3, slope <= 1e-3);
}

void verify_chart_invariants(const std::string& name, const FunctionalModel& model,
                             const SpectralSplitting& s, const NormalFormChart& chart,
                             const ConditionCertificate& cert, const Tolerances& tol,
                             std::vector<LedgerEntry>& ledger, std::uint64_t seed) {
    const int dp = chart.dim_plus(), dm = chart.dim_minus();
    const int nu = s.nu;
    std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
    std::normal_distribution<double> gauss;
    auto rand_ball = [&](int d, double radius) {
        if (d == 0) return Vec();
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = gauss(rng);
        const double n = std::max(v.norm(), 1e-300);
        return Vec(radius * std::pow(std::uniform_real_distribution<double>(0, 1)(rng), 1.0 / d) /
                   n * v);
    };

    // F(z, theta) = 0 and D2F(z, theta) = 0.
    double f0 = 0.0, df0 = 0.0;
    for (int k = 0; k < 6; ++k) {
        const Vec z = nu > 0 ? rand_ball(nu, chart.z_radius()) : Vec();
        f0 = std::max(f0, std::abs(chart.fiber_value(z, Vec::Zero(dp), Vec::Zero(dm))));
        const Vec gp = chart.fiber_gradient_plus(z, Vec::Zero(dp), Vec::Zero(dm));
        const Vec gm = chart.fiber_gradient_minus(z, Vec::Zero(dp), Vec::Zero(dm));
        df0 = std::max(df0, std::sqrt(gp.squaredNorm() + gm.squaredNorm()));
    }
    push(ledger, name + "/fiber_zero_at_origin", std::max(f0, df0), 1e-9,
         std::max(f0, df0) <= 1e-9);

    if (dp + dm == 0) {
        push(ledger, name + "/chart_trivial", 0.0, 0.0, true, true,
             "no complement directions; Phi(z) = z + h(z)");
        return;
    }

    const double cr = 0.9 * chart.chart_radius();
    // Round-trip and normal-form identity.
    double rt = 0.0, nf = 0.0, inj_min = std::numeric_limits<double>::infinity();
    std::vector<std::tuple<Vec, Vec, Vec>> pts;
    for (int k = 0; k < 40; ++k) {
        const Vec z = nu > 0 ? rand_ball(nu, chart.z_radius()) : Vec();
        const Vec up = rand_ball(dp, cr);
        const Vec um = rand_ball(dm, cr);
        pts.emplace_back(z, up, um);
        const auto [x, y] = chart.chart_inverse(z, up, um);
        const auto [p1, p2] = chart.psi_forward(z, x, y);
        const double dev = std::sqrt((dp ? (p1 - up).squaredNorm() : 0.0) +
                                     (dm ? (p2 - um).squaredNorm() : 0.0));
        rt = std::max(rt, dev);
        nf = std::max(nf, chart.normal_form_residual(z, up, um));
    }
    push(ledger, name + "/chart_roundtrip", rt, tol.invert, rt <= tol.invert);
    push(ledger, name + "/normal_form_identity", nf, tol.normal_form, nf <= tol.normal_form);

    // Phi(z, theta) = z + h(z).
    double base_dev = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec z = nu > 0 ? rand_ball(nu, chart.z_radius()) : Vec();
        const Vec p = chart.big_phi(z, Vec::Zero(dp), Vec::Zero(dm));
        base_dev = std::max(base_dev, model.norm_h(p - chart.base_point(z)));
    }
    push(ledger, name + "/phi_at_fiber_origin", base_dev, tol.invert, base_dev <= tol.invert);

    // u+ = theta forces the fiber part into H-.
    if (dm > 0) {
        double drift = 0.0;
        for (int k = 0; k < 4; ++k) {
            const Vec z = nu > 0 ? rand_ball(nu, chart.z_radius()) : Vec();
            const Vec um = rand_ball(dm, cr);
            const Vec p = chart.big_phi(z, Vec::Zero(dp), um);
            const Vec fiber = p - chart.base_point(z);
            drift = std::max(drift, model.norm_h(s.Pplus * fiber));
        }
        push(ledger, name + "/minus_membership", drift, 1e-9, drift <= 1e-9);
    }

    // Injectivity at sample resolution.
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
            const auto& [zi, upi, umi] = pts[i];
            const auto& [zj, upj, umj] = pts[j];
            const double arg_dist = std::sqrt(
                (nu ? (zi - zj).squaredNorm() : 0.0) + (dp ? (upi - upj).squaredNorm() : 0.0) +
                (dm ? (umi - umj).squaredNorm() : 0.0));
            if (arg_dist < 1e-6) continue;
            const double img_dist =
                model.norm_h(chart.big_phi(zi, upi, umi) - chart.big_phi(zj, upj, umj));
            inj_min = std::min(inj_min, img_dist);
        }
    push(ledger, name + "/injectivity_sampled", inj_min, tol.invert, inj_min > tol.invert);

    // Monotone coercivity along H+ and the sign condition.
    const double a1 = std::min(cert.a1, std::isfinite(s.a0) ? s.a0 : cert.a1);
    double coercivity_margin = std::numeric_limits<double>::infinity();
    double sign_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 12; ++k) {
        const Vec z = nu > 0 ? rand_ball(nu, chart.z_radius()) : Vec();
        if (dp > 0) {
            Vec up = rand_ball(dp, chart.eps() > 0 ? 2.0 * chart.eps() : cr);
            if (up.norm() < 1e-8) up = Vec::Unit(dp, 0) * 0.1 * cr;
            const Vec gp = chart.fiber_gradient_plus(z, up, Vec::Zero(dm));
            coercivity_margin = std::min(coercivity_margin,
                                         gp.dot(up) - cert.a1 * up.squaredNorm() * (1.0 - 1e-6));
        }
        if (dp > 0 && dm > 0) {
            const Vec up = rand_ball(dp, chart.eps() > 0 ? chart.eps() : 0.5 * cr);
            const Vec um = rand_ball(dm, 0.9 * chart.delta());
            if (up.norm() + um.norm() < 1e-8) continue;
            const Vec gp = chart.fiber_gradient_plus(z, up, um);
            const Vec gm = chart.fiber_gradient_minus(z, up, um);
            sign_min = std::min(sign_min, gp.dot(up) - gm.dot(um));
        }
    }
    (void)a1;
    if (dp > 0)
        push(ledger, name + "/fiber_coercivity_plus", coercivity_margin, 0.0,
             coercivity_margin >= 0.0);
    if (dp > 0 && dm > 0)
        push(ledger, name + "/fiber_sign_condition", sign_min, 0.0, sign_min > 0.0);

    // Deformation monotonicity: t -> L(Phi(z, t u+ + u-)) nondecreasing.
    double worst_drop = 0.0;
    for (int k = 0; k < 4; ++k) {
        const Vec z = nu > 0 ? rand_ball(nu, chart.z_radius()) : Vec();
        const Vec up = rand_ball(dp, cr);
        const Vec um = rand_ball(dm, cr);
        double prev = -std::numeric_limits<double>::infinity();
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double v = model.value(chart.big_phi(z, (dp ? Vec(t * up) : up), um));
            worst_drop = std::max(worst_drop, prev - v);
            prev = v;
        }
    }
    push(ledger, name + "/deformation_monotone", worst_drop, 1e-10, worst_drop <= 1e-10);
}

void verify_topology_invariants(const std::string& name, const FunctionalModel& model,
                                const SpectralSplitting& s, Reduction& red,
                                const RunConfig& config, std::vector<LedgerEntry>& ledger) {
    const int nu = s.nu, mu = s.mu;
    const int res = config.topology_resolution;
    std::vector<int> reduced_groups;
    int degree = 1;
    double radius = 0.0;
    ReducedFunctional rf(red);
    std::function<double(const Vec&)> rvalue;
    if (nu >= 1 && nu <= 3) {
        radius = 0.9 * red.r0() / std::sqrt(static_cast<double>(nu));
        reduced_groups = critical_groups_reduced(rf, radius, res);
        auto grad = [&](const Vec& z) { return rf.gradient(z); };
        degree = brouwer_degree(nu, grad, radius, res);
        const int degree_half = brouwer_degree(nu, grad, 0.5 * radius, res);
        push(ledger, name + "/degree_stability_r_halving", degree, degree_half,
             degree == degree_half);
        const auto groups_half = critical_groups_reduced(rf, 0.5 * radius, res);
        push(ledger, name + "/excision_stability", 0.0, 0.0, groups_half == reduced_groups);
        rvalue = [&](const Vec& z) { return rf.value(z); };
    }
    CriticalGroupReport cg = shift(reduced_groups, mu, nu, rvalue ? &rvalue : nullptr, radius, res);
    cg.brouwer_degree_reduced = degree;
    cg.poincare_hopf = poincare_hopf_check(cg, degree, mu);
    push(ledger, name + "/poincare_hopf", static_cast<double>(cg.poincare_hopf.lhs),
         static_cast<double>(cg.poincare_hopf.rhs), cg.poincare_hopf.pass);

    // Range property: C_q(L) vanishes outside [mu, mu+nu].
    bool range_ok = true;
    for (int q = 0; q < static_cast<int>(cg.betti.size()); ++q)
        if ((q < mu || q > mu + nu) && cg.betti[q] != 0) range_ok = false;
    if (model.dim <= 3) {
        const auto full = full_space_groups_oracle(
            model, 0.5 * model.domain_radius / std::sqrt(static_cast<double>(model.dim)), res);
        for (int q = 0; q < static_cast<int>(full.size()); ++q)
            if ((q < mu || q > mu + nu) && full[q] != 0) range_ok = false;
        bool equal = true;
        const size_t len = std::max(full.size(), cg.betti.size());
        for (size_t q = 0; q < len; ++q) {
            const int a = q < full.size() ? full[q] : 0;
            const int b = q < cg.betti.size() ? cg.betti[q] : 0;
            equal = equal && (a == b);
        }
        push(ledger, name + "/shifting_theorem", equal ? 1.0 : 0.0, 1.0, equal);
    }
    push(ledger, name + "/critical_group_range", range_ok ? 1.0 : 0.0, 1.0, range_ok);

    // Minimum characterization: grid-verified strict local minimum iff
    // rank C_0 != 0. A negative Hessian direction rules the minimum out;
    // otherwise the reduced values on the kernel grid decide.
    bool grid_minimum = (mu == 0);
    if (grid_minimum && nu >= 1) {
        const int gres = 32;
        std::vector<int> idx(nu, 0);
        const double gr = 0.5 * radius;
        std::function<bool(int)> scan = [&](int axis) -> bool {
            if (axis == nu) {
                bool at_origin = true;
                for (int i = 0; i < nu; ++i) at_origin = at_origin && (idx[i] == gres / 2);
                if (at_origin) return true;
                Vec z(nu);
                for (int i = 0; i < nu; ++i) z[i] = -gr + 2.0 * gr * idx[i] / gres;
                return rf.value(z) > 0.0;
            }
            for (idx[axis] = 0; idx[axis] <= gres; ++idx[axis])
                if (!scan(axis + 1)) return false;
            return true;
        };
        grid_minimum = scan(0);
    }
    const bool c0_nonzero = !cg.betti.empty() && cg.betti[0] != 0;
    push(ledger, name + "/minimum_characterization", grid_minimum == c0_nonzero ? 1.0 : 0.0, 1.0,
         grid_minimum == c0_nonzero);
}

}  // namespace

std::vector<LedgerEntry> verify_problem(const std::string& name, const RunConfig& base,
                                        std::ostream* log) {
    std::vector<LedgerEntry> ledger;
    RunConfig config = base;
    config.problem = catalog_spec(name);
    const Tolerances& tol = config.tolerances;

    FunctionalModel model = build_model(config.problem, tol);
    verify_model_invariants(name, model, tol, ledger);

    if (name == "pendulum") {
        // Discrete time translation commutes with the Hessian at theta.
        const Mat J = cyclic_shift_matrix(model.dim);
        const Mat H = model.hessian(Vec::Zero(model.dim));
        const double comm = (H * J - J * H).cwiseAbs().maxCoeff();
        push(ledger, name + "/shift_commutes_with_hessian", comm, 1e-12, comm <= 1e-12);
        const auto eq = check_equivariance(model, model, J, tol);
        push(ledger, name + "/cyclic_shift_equivariance", eq.max_h_mismatch, tol.equivariance,
             eq.admissible && eq.pass);
        // A non-isometric map must be classified inadmissible, not failed.
        const auto bad = check_equivariance(model, model, 2.0 * J, tol);
        push(ledger, name + "/non_isometry_rejected", bad.admissible ? 1.0 : 0.0, 0.0,
             !bad.admissible, true, bad.rejection);
    }
    if (config.problem.kind == ProblemKind::elliptic_1d) {
        push(ledger, name + "/zero_value_at_origin", std::abs(model.value(Vec::Zero(model.dim))),
             0.0, std::abs(model.value(Vec::Zero(model.dim))) == 0.0);
    }
    if (name == "coupled_quartic") {
        Mat J = Mat::Identity(2, 2);
        J(0, 0) = -1.0;  // the reflection x -> -x preserves the functional
        const auto eq = check_equivariance(model, model, J, tol);
        push(ledger, name + "/reflection_equivariance",
             std::max(eq.max_h_mismatch, eq.max_value_mismatch), tol.equivariance,
             eq.admissible && eq.pass);
        const auto id = check_equivariance(model, model, Mat::Identity(2, 2), tol);
        push(ledger, name + "/identity_equivariance", id.max_h_mismatch, tol.equivariance,
             id.admissible && id.pass);
    }

    SpectralSplitting s = split(model, tol.null_tol_rel);
    verify_spectral_invariants(name, model, s, tol, ledger);
    const auto cert = certify_conditions(model, s, 0.5 * model.domain_radius,
                                         config.certificate_samples);
    push(ledger, name + "/conditions_certificate", cert.certified_radius, 0.0,
         cert.certified_radius > 0.0, false,
         "measured = largest radius at which all sampled conditions hold");

    Reduction red(model, s, tol);
    verify_reduction_invariants(name, model, s, red, tol, ledger, config.seed);

    NormalFormChart chart(red, cert, tol);
    verify_chart_invariants(name, model, s, chart, cert, tol, ledger, config.seed);

    verify_topology_invariants(name, model, s, red, config, ledger);

    if (log) {
        for (const auto& e : ledger)
            (*log) << (e.pass ? "PASS " : "FAIL ") << e.name << "  measured=" << e.measured
                   << " threshold=" << e.threshold << (e.hard ? "" : " [soft]")
                   << (e.note.empty() ? "" : "  (" + e.note + ")") << "\n";
    }
    return ledger;
}

int cmd_verify(const RunConfig& config, bool whole_catalog, std::ostream& out) {
    std::vector<std::string> names;
    if (whole_catalog)
        names = catalog_names();
    else
        names.push_back(config.problem.name);

    bool all_pass = true;
    for (const auto& name : names) {
        out << "== " << name << "\n";
        std::vector<LedgerEntry> ledger;
        try {
            ledger = verify_problem(name, config, &out);
        } catch (const std::exception& e) {
            out << "FAIL " << name << "/exception  (" << e.what() << ")\n";
            all_pass = false;
            continue;
        }
        for (const auto& e : ledger)
            if (e.hard && !e.pass) all_pass = false;
    }
    out << (all_pass ? "verification ledger: all hard checks passed\n"
                     : "verification ledger: FAILURES present\n");
    return all_pass ? 0 : 1;
}

int cmd_report(const std::string& output_dir, std::ostream& out) {
    const fs::path dir(output_dir);
    const fs::path report_path = dir / "report.json";
    if (!fs::exists(report_path))
        throw ConfigError("no report.json in '" + output_dir + "'; run analyze first");
    std::ifstream in(report_path);
    json j;
    in >> j;

    std::ostringstream os;
    os << "analysis summary: " << j.value("problem", std::string("?")) << "\n";
    os << "  dim " << j["dim"].get<int>() << ", nu " << j["splitting"]["nu"].get<int>() << ", mu "
       << j["splitting"]["mu"].get<int>() << "\n";
    if (!j["splitting"]["a0"].is_null())
        os << "  spectral gap a0 = " << j["splitting"]["a0"].get<double>() << "\n";
    os << "  reduction: r0 = " << j["reduction"]["r0"].get<double>()
       << ", contraction factor = " << j["reduction"]["contraction_factor"].get<double>()
       << ", Lipschitz (X-norm) = " << j["reduction"]["lipschitz_h_xnorm"].get<double>() << "\n";
    os << "  chart: radius = " << j["chart"]["chart_radius"].get<double>()
       << ", max normal-form residual = "
       << j["chart"]["max_normal_form_residual"].get<double>() << "\n";
    const auto& cg = j["critical_groups"];
    os << "  critical groups C_q: [";
    for (size_t q = 0; q < cg["betti"].size(); ++q)
        os << (q ? "," : "") << cg["betti"][q].get<int>();
    os << "]  classification: " << cg["classification"].get<std::string>() << "\n";
    os << "  Brouwer degree (reduced) = " << cg["degree"].get<int>() << ", Poincare-Hopf "
       << (cg["poincare_hopf"]["pass"].get<bool>() ? "holds" : "FAILS") << " (lhs "
       << cg["poincare_hopf"]["lhs"].get<long long>() << ", rhs "
       << cg["poincare_hopf"]["rhs"].get<long long>() << ")\n";
    os << "  verification ledger:\n";
    for (const auto& e : j["ledger"]) {
        os << "    " << (e["pass"].get<bool>() ? "PASS" : "FAIL") << " "
           << e["name"].get<std::string>() << " measured=" << number_or_dash(e["measured"])
           << " threshold=" << number_or_dash(e["threshold"])
           << (e["hard"].get<bool>() ? "" : " [soft]") << "\n";
    }
    os << "  grids: reduction_grid.csv, chart_residuals.csv\n";

    write_text_file(dir / "summary.txt", os.str());
    out << os.str();
    return 0;
}

}  // namespace morsesplit
