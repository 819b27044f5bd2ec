#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "morsesplit/normal_form.hpp"
#include "morsesplit/pipeline.hpp"
#include "morsesplit/topology.hpp"

namespace py = pybind11;
using namespace morsesplit;

namespace {

// Bundles the per-problem pipeline objects so python sees one handle with
// stable lifetimes.
struct Analysis {
    FunctionalModel model;
    SpectralSplitting splitting;
    ConditionCertificate certificate;
    std::shared_ptr<Reduction> reduction;
    std::shared_ptr<NormalFormChart> chart;

    explicit Analysis(FunctionalModel m, double null_tol_rel = 1e-8,
                      double certificate_radius = 0.0, int certificate_samples = 32)
        : model(std::move(m)) {
        splitting = split(model, null_tol_rel);
        const double rad =
            certificate_radius > 0.0 ? certificate_radius : 0.5 * model.domain_radius;
        certificate = certify_conditions(model, splitting, rad, certificate_samples);
        reduction = std::make_shared<Reduction>(model, splitting, Tolerances{});
        chart = std::make_shared<NormalFormChart>(*reduction, certificate, Tolerances{});
    }
};

FunctionalModel model_from_callables(int dim, const std::function<double(Vec)>& value,
                                     const std::function<Vec(Vec)>& gradient,
                                     const std::function<Mat(Vec)>& hessian,
                                     py::object h_inner, py::object x_norm,
                                     double domain_radius, const std::string& name) {
    FunctionalModel m;
    m.dim = dim;
    m.name = name;
    m.value = [value](const Vec& x) { return value(x); };
    m.gradient = [gradient](const Vec& x) { return gradient(x); };
    m.hessian = [hessian](const Vec& x) { return hessian(x); };
    m.h_inner = h_inner.is_none() ? Mat(Mat::Identity(dim, dim)) : h_inner.cast<Mat>();
    if (x_norm.is_none()) {
        const Mat M = m.h_inner;
        m.x_norm = [M](const Vec& v) { return std::sqrt(v.dot(M * v)); };
    } else {
        auto fn = x_norm.cast<std::function<double(Vec)>>();
        m.x_norm = [fn](const Vec& v) { return fn(v); };
    }
    m.domain_radius = domain_radius;
    validate_model(m, Tolerances{});
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "splitting, reduction and critical-group analysis of discretized variational "
              "functionals at degenerate critical points";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<AnalysisError>(m, "AnalysisError");

    py::class_<FunctionalModel>(m, "Model")
        .def_readonly("dim", &FunctionalModel::dim)
        .def_readonly("name", &FunctionalModel::name)
        .def_readonly("h_inner", &FunctionalModel::h_inner)
        .def_readonly("domain_radius", &FunctionalModel::domain_radius)
        .def("value", [](const FunctionalModel& s, const Vec& x) { return s.value(x); })
        .def("gradient", [](const FunctionalModel& s, const Vec& x) { return s.gradient(x); })
        .def("hessian", [](const FunctionalModel& s, const Vec& x) { return s.hessian(x); })
        .def("h_gradient", [](const FunctionalModel& s, const Vec& x) { return s.a(x); })
        .def("hessian_operator", [](const FunctionalModel& s, const Vec& x) { return s.b(x); })
        .def("norm_h", &FunctionalModel::norm_h)
        .def("norm_x", [](const FunctionalModel& s, const Vec& v) { return s.x_norm(v); });

    py::class_<SpectralSplitting>(m, "Splitting")
        .def_readonly("nu", &SpectralSplitting::nu)
        .def_readonly("mu", &SpectralSplitting::mu)
        .def_readonly("a0", &SpectralSplitting::a0)
        .def_readonly("eigenvalues", &SpectralSplitting::eigenvalues)
        .def_readonly("eigenvectors", &SpectralSplitting::eigenvectors)
        .def_readonly("basis_H0", &SpectralSplitting::basis_H0)
        .def_readonly("basis_Hminus", &SpectralSplitting::basis_Hminus)
        .def_readonly("basis_Hplus", &SpectralSplitting::basis_Hplus)
        .def_readonly("P0", &SpectralSplitting::P0)
        .def_readonly("Pminus", &SpectralSplitting::Pminus)
        .def_readonly("Pplus", &SpectralSplitting::Pplus);

    py::class_<ConditionCertificate>(m, "ConditionCertificate")
        .def_readonly("a1", &ConditionCertificate::a1)
        .def_readonly("omega_max", &ConditionCertificate::omega_max)
        .def_readonly("certified_radius", &ConditionCertificate::certified_radius)
        .def_readonly("pass_d1", &ConditionCertificate::pass_d1)
        .def_readonly("pass_d2", &ConditionCertificate::pass_d2)
        .def_readonly("pass_d3", &ConditionCertificate::pass_d3)
        .def_readonly("pass_d4", &ConditionCertificate::pass_d4)
        .def("passed", &ConditionCertificate::pass_all);

    py::class_<Analysis>(m, "Analysis")
        .def(py::init<FunctionalModel, double, double, int>(), py::arg("model"),
             py::arg("null_tol_rel") = 1e-8, py::arg("certificate_radius") = 0.0,
             py::arg("certificate_samples") = 32)
        .def_readonly("model", &Analysis::model)
        .def_readonly("splitting", &Analysis::splitting)
        .def_readonly("certificate", &Analysis::certificate)
        .def_property_readonly("nu", [](const Analysis& a) { return a.splitting.nu; })
        .def_property_readonly("mu", [](const Analysis& a) { return a.splitting.mu; })
        .def_property_readonly("r0", [](const Analysis& a) { return a.reduction->r0(); })
        .def("solve_h", [](const Analysis& a, const Vec& z) { return a.reduction->solve_h(z); })
        .def("reduction_point",
             [](const Analysis& a, const Vec& z) {
                 return a.reduction->ambient(z, a.reduction->solve_h(z));
             })
        .def("reduced_value",
             [](const Analysis& a, const Vec& z) {
                 return ReducedFunctional(*a.reduction).value(z);
             })
        .def("reduced_gradient",
             [](const Analysis& a, const Vec& z) {
                 return ReducedFunctional(*a.reduction).gradient(z);
             })
        .def("contraction_factor",
             [](const Analysis& a) {
                 a.reduction->grid(9);
                 return a.reduction->contraction_factor();
             })
        .def("chart_radius", [](const Analysis& a) { return a.chart->chart_radius(); })
        .def("z_radius", [](const Analysis& a) { return a.chart->z_radius(); })
        .def("big_phi",
             [](const Analysis& a, const Vec& z, const Vec& up, const Vec& um) {
                 return a.chart->big_phi(z, up, um);
             })
        .def("normal_form_residual",
             [](const Analysis& a, const Vec& z, const Vec& up, const Vec& um) {
                 return a.chart->normal_form_residual(z, up, um);
             })
        .def("maximizer_phi", [](const Analysis& a, const Vec& z, const Vec& xp) {
            return a.chart->maximizer_phi(z, xp);
        });

    m.def("catalog", &catalog_names, "names of the built-in problems");
    m.def(
        "build", [](const std::string& name) { return catalog_model(name); }, py::arg("name"),
        "build a catalog problem");
    m.def(
        "build_from_json",
        [](const std::string& text) { return build_model(parse_problem_spec(text)); },
        py::arg("json_text"), "build a model from a problem-spec JSON document");
    m.def("custom_model", &model_from_callables, py::arg("dim"), py::arg("value"),
          py::arg("gradient"), py::arg("hessian"), py::arg("h_inner") = py::none(),
          py::arg("x_norm") = py::none(), py::arg("domain_radius") = 1.0,
          py::arg("name") = "custom",
          "wrap python callables as a validated model (value, gradient, hessian)");

    m.def(
        "critical_groups",
        [](const Analysis& a, double radius, int resolution) {
            ReducedFunctional rf(*a.reduction);
            const int nu = a.splitting.nu;
            std::vector<int> reduced;
            int degree = 1;
            double rr = radius;
            std::function<double(const Vec&)> rvalue;
            if (nu >= 1) {
                if (rr <= 0.0) rr = 0.9 * a.reduction->r0() / std::sqrt(static_cast<double>(nu));
                reduced = critical_groups_reduced(rf, rr, resolution);
                degree = brouwer_degree(
                    nu, [&](const Vec& z) { return rf.gradient(z); }, rr, resolution);
                rvalue = [&](const Vec& z) { return rf.value(z); };
            }
            CriticalGroupReport rep =
                shift(reduced, a.splitting.mu, nu, rvalue ? &rvalue : nullptr, rr, resolution);
            rep.brouwer_degree_reduced = degree;
            rep.poincare_hopf = poincare_hopf_check(rep, degree, a.splitting.mu);
            py::dict d;
            d["betti_reduced"] = rep.betti_reduced;
            d["mu"] = rep.mu;
            d["nu"] = rep.nu;
            d["betti"] = rep.betti;
            d["classification"] = to_string(rep.classification);
            d["degree"] = rep.brouwer_degree_reduced;
            py::dict ph;
            ph["lhs"] = rep.poincare_hopf.lhs;
            ph["rhs"] = rep.poincare_hopf.rhs;
            ph["pass"] = rep.poincare_hopf.pass;
            d["poincare_hopf"] = ph;
            d["hofer_detector"] = rep.hofer_detector;
            return d;
        },
        py::arg("analysis"), py::arg("radius") = 0.0, py::arg("resolution") = 64,
        "critical groups of the reduced functional, shifted by the Morse index");

    m.def(
        "full_space_groups",
        [](const FunctionalModel& model, double radius, int resolution) {
            return full_space_groups_oracle(model, radius, resolution);
        },
        py::arg("model"), py::arg("radius"), py::arg("resolution") = 64);

    m.def(
        "check_equivariance",
        [](const FunctionalModel& a, const FunctionalModel& b, const Mat& J) {
            const auto rep = check_equivariance(a, b, J);
            py::dict d;
            d["admissible"] = rep.admissible;
            d["rejection"] = rep.rejection;
            d["pass"] = rep.pass;
            d["max_h_mismatch"] = rep.max_h_mismatch;
            d["max_value_mismatch"] = rep.max_value_mismatch;
            return d;
        },
        py::arg("model_a"), py::arg("model_b"), py::arg("J"));

    m.def(
        "analyze_json",
        [](const std::string& config_json) {
            const RunConfig config = RunConfig::from_json(config_json);
            const AnalysisReport rep = cmd_analyze(config);
            return rep.to_json();
        },
        py::arg("config_json"),
        "run the full pipeline from a config document; returns the report JSON");

    m.def("verify_catalog", []() {
        RunConfig config;
        config.problem = catalog_spec("quartic_min");
        std::ostringstream out;
        const int status = cmd_verify(config, true, out);
        return py::make_tuple(status, out.str());
    });
}
