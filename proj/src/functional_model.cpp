#include "morsesplit/functional_model.hpp"

#include <cmath>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morsesplit/sampling.hpp"

namespace morsesplit {

using nlohmann::json;

const Eigen::LLT<Mat>& FunctionalModel::mass_solver() const {
    // FunctionalModel is shared read-only across threads; the factorization
    // is computed in build_model before any concurrent use.
    if (!mass_llt_) mass_llt_ = std::make_shared<Eigen::LLT<Mat>>(h_inner);
    return *mass_llt_;
}

namespace {

double eval_monomials(const std::vector<MonomialTerm>& terms, const Vec& x) {
    double s = 0.0;
    for (const auto& t : terms) {
        double m = t.coeff;
        for (int i = 0; i < static_cast<int>(t.powers.size()); ++i)
            for (int p = 0; p < t.powers[i]; ++p) m *= x[i];
        s += m;
    }
    return s;
}

std::vector<MonomialTerm> differentiate(const std::vector<MonomialTerm>& terms, int axis) {
    std::vector<MonomialTerm> out;
    for (const auto& t : terms) {
        if (t.powers[axis] == 0) continue;
        MonomialTerm d = t;
        d.coeff *= t.powers[axis];
        d.powers[axis] -= 1;
        if (d.coeff != 0.0) out.push_back(std::move(d));
    }
    return out;
}

FunctionalModel build_polynomial(const ProblemSpec& spec) {
    const int n = static_cast<int>(spec.critical_point.size());
    for (const auto& t : spec.terms)
        if (static_cast<int>(t.powers.size()) != n)
            throw ConfigError("polynomial term arity does not match critical_point dimension");

    // Translate the critical point to the origin: work with f(theta + x).
    const Vec theta = spec.critical_point;
    auto shifted = [theta](const Vec& x) { return Vec(theta + x); };

    std::vector<std::vector<MonomialTerm>> grads(n);
    std::vector<std::vector<std::vector<MonomialTerm>>> hess(n);
    for (int i = 0; i < n; ++i) grads[i] = differentiate(spec.terms, i);
    for (int i = 0; i < n; ++i) {
        hess[i].resize(n);
        for (int j = 0; j < n; ++j) hess[i][j] = differentiate(grads[i], j);
    }

    FunctionalModel m;
    m.dim = n;
    m.name = spec.name;
    m.domain_radius = spec.domain_radius;
    const double value_at_theta = eval_monomials(spec.terms, theta);
    m.value = [terms = spec.terms, shifted, value_at_theta](const Vec& x) {
        return eval_monomials(terms, shifted(x)) - value_at_theta;
    };
    m.gradient = [grads, shifted, n](const Vec& x) {
        const Vec y = shifted(x);
        Vec g(n);
        for (int i = 0; i < n; ++i) g[i] = eval_monomials(grads[i], y);
        return g;
    };
    m.hessian = [hess, shifted, n](const Vec& x) {
        const Vec y = shifted(x);
        Mat h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) h(i, j) = eval_monomials(hess[i][j], y);
        return Mat(0.5 * (h + h.transpose()));
    };
    m.h_inner = Mat::Identity(n, n);
    // Remark: for the polynomial family X = H, so the X-norm is the H-norm.
    m.x_norm = [](const Vec& v) { return v.norm(); };
    return m;
}

struct Lagrangian {
    // L(t, q, v) and its first/second partials in (q, v).
    std::function<double(double, double, double)> L, Lq, Lv, Lqq, Lqv, Lvv;
    bool autonomous = true;
};

Lagrangian make_lagrangian(const std::string& name, double gravity) {
    if (name == "pendulum") {
        // L = v^2/2 - g (1 - cos q)
        Lagrangian l;
        const double g = gravity;
        l.L = [g](double, double q, double v) { return 0.5 * v * v - g * (1.0 - std::cos(q)); };
        l.Lq = [g](double, double q, double) { return -g * std::sin(q); };
        l.Lv = [](double, double, double v) { return v; };
        l.Lqq = [g](double, double q, double) { return -g * std::cos(q); };
        l.Lqv = [](double, double, double) { return 0.0; };
        l.Lvv = [](double, double, double) { return 1.0; };
        return l;
    }
    throw ConfigError("unknown lagrangian '" + name + "' (available: pendulum)");
}

// Periodic action discretization: rectangle quadrature with forward-difference
// velocities,  sum_i L(t_i, q_i, (q_{i+1}-q_i)/dt) dt.  The second-difference
// part of the Hessian at a constant loop is then the circulant [-1,2,-1]/dt^2,
// whose eigenvalues are 4 sin^2(pi k/n)/dt^2.
FunctionalModel build_lagrangian_action(const ProblemSpec& spec) {
    const int n = spec.grid_size;
    if (n < 4) throw ConfigError("lagrangian_action grid_size must be >= 4");
    if (!(spec.period > 0.0)) throw ConfigError("lagrangian_action period must be positive");
    if (spec.critical_point.size() != n)
        throw ConfigError("critical_point must have grid_size entries");
    const double dt = spec.period / n;
    const Lagrangian lag = make_lagrangian(spec.lagrangian, spec.gravity);
    const Vec theta = spec.critical_point;

    auto node_time = [dt](int i) { return dt * i; };
    auto wrap = [n](int i) { return (i % n + n) % n; };

    FunctionalModel m;
    m.dim = n;
    m.name = spec.name;
    m.domain_radius = spec.domain_radius;

    auto action = [=](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double qi = theta[i] + x[i];
            const double qn = theta[wrap(i + 1)] + x[wrap(i + 1)];
            s += lag.L(node_time(i), qi, (qn - qi) / dt) * dt;
        }
        return s;
    };
    const double action_at_theta = action(Vec::Zero(n));
    m.value = [action, action_at_theta](const Vec& x) { return action(x) - action_at_theta; };
    m.gradient = [=](const Vec& x) {
        Vec g = Vec::Zero(n);
        for (int i = 0; i < n; ++i) {
            const double qi = theta[i] + x[i];
            const double qn = theta[wrap(i + 1)] + x[wrap(i + 1)];
            const double v = (qn - qi) / dt;
            const double t = node_time(i);
            const double lq = lag.Lq(t, qi, v) * dt;
            const double lv = lag.Lv(t, qi, v);
            g[i] += lq - lv;
            g[wrap(i + 1)] += lv;
        }
        return g;
    };
    m.hessian = [=](const Vec& x) {
        Mat h = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            const int j = wrap(i + 1);
            const double qi = theta[i] + x[i];
            const double qn = theta[j] + x[j];
            const double v = (qn - qi) / dt;
            const double t = node_time(i);
            const double lqq = lag.Lqq(t, qi, v) * dt;
            const double lqv = lag.Lqv(t, qi, v);
            const double lvv = lag.Lvv(t, qi, v) / dt;
            h(i, i) += lqq - 2.0 * lqv + lvv;
            h(i, j) += lqv - lvv;
            h(j, i) += lqv - lvv;
            h(j, j) += lvv;
        }
        return h;
    };
    m.h_inner = dt * Mat::Identity(n, n);
    // Discrete C^1 norm: the max of the H-norm, the sup norm and the sup of
    // forward difference quotients. Dominates the H-norm by construction.
    m.x_norm = [n, dt, M = m.h_inner](const Vec& v) {
        double sup = 0.0, dsup = 0.0;
        for (int i = 0; i < n; ++i) {
            sup = std::max(sup, std::abs(v[i]));
            dsup = std::max(dsup, std::abs(v[(i + 1) % n] - v[i]) / dt);
        }
        const double h = std::sqrt(v.dot(M * v));
        return std::max({h, sup, dsup});
    };
    return m;
}

struct Nonlinearity {
    // F(x,u), f = dF/du, f' = d2F/du2. "resonant" shifts by the first
    // discrete Dirichlet eigenvalue so the linearization at 0 has a kernel.
    std::function<double(double, double)> F, f, fp;
};

Nonlinearity make_nonlinearity(const std::string& name, double resonance_shift) {
    if (name == "cubic") {
        Nonlinearity nl;
        nl.F = [](double, double u) { return 0.25 * u * u * u * u; };
        nl.f = [](double, double u) { return u * u * u; };
        nl.fp = [](double, double u) { return 3.0 * u * u; };
        return nl;
    }
    if (name == "cubic_resonant") {
        Nonlinearity nl;
        const double lam = resonance_shift;
        nl.F = [lam](double, double u) { return 0.5 * lam * u * u + 0.25 * u * u * u * u; };
        nl.f = [lam](double, double u) { return lam * u + u * u * u; };
        nl.fp = [lam](double, double u) { return lam + 3.0 * u * u; };
        return nl;
    }
    throw ConfigError("unknown nonlinearity '" + name + "' (available: cubic, cubic_resonant)");
}

// J(u) = (1/2) u^T K u - sum_i w_i F(x_i, u_i) on interior nodes of (0,1)
// with zero boundary values, K the standard stiffness matrix, w_i = h.
FunctionalModel build_elliptic_1d(const ProblemSpec& spec) {
    const int n = spec.grid_size;
    if (n < 4) throw ConfigError("elliptic_1d grid_size must be >= 4");
    if (spec.critical_point.size() != n)
        throw ConfigError("critical_point must have grid_size entries");
    const double h = 1.0 / (n + 1);
    Mat K = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = 2.0 / h;
        if (i + 1 < n) {
            K(i, i + 1) = -1.0 / h;
            K(i + 1, i) = -1.0 / h;
        }
    }
    // First eigenvalue of M^{-1} K on the discrete grid (for the resonant kind).
    const double lam1 = (4.0 / (h * h)) * std::pow(std::sin(0.5 * M_PI * h), 2);
    const Nonlinearity nl = make_nonlinearity(spec.nonlinearity, lam1);
    const Vec theta = spec.critical_point;

    FunctionalModel m;
    m.dim = n;
    m.name = spec.name;
    m.domain_radius = spec.domain_radius;
    auto node = [h](int i) { return h * (i + 1); };

    auto raw_value = [=](const Vec& x) {
        const Vec u = theta + x;
        double s = 0.5 * u.dot(K * u);
        for (int i = 0; i < n; ++i) s -= h * nl.F(node(i), u[i]);
        return s;
    };
    const double value_at_theta = raw_value(Vec::Zero(n));
    m.value = [raw_value, value_at_theta](const Vec& x) { return raw_value(x) - value_at_theta; };
    m.gradient = [=](const Vec& x) {
        const Vec u = theta + x;
        Vec g = K * u;
        for (int i = 0; i < n; ++i) g[i] -= h * nl.f(node(i), u[i]);
        return g;
    };
    m.hessian = [=](const Vec& x) {
        const Vec u = theta + x;
        Mat hs = K;
        for (int i = 0; i < n; ++i) hs(i, i) -= h * nl.fp(node(i), u[i]);
        return hs;
    };
    m.h_inner = h * Mat::Identity(n, n);
    m.x_norm = [n, h, M = m.h_inner](const Vec& v) {
        double sup = 0.0, dsup = std::abs(v[0]) / h;  // difference against u_0 = 0
        for (int i = 0; i < n; ++i) {
            sup = std::max(sup, std::abs(v[i]));
            const double right = (i + 1 < n) ? v[i + 1] : 0.0;
            dsup = std::max(dsup, std::abs(right - v[i]) / h);
        }
        const double hn = std::sqrt(v.dot(M * v));
        return std::max({hn, sup, dsup});
    };
    return m;
}

}  // namespace

Vec finite_difference_gradient(const FunctionalModel& model, const Vec& x, double step) {
    if (!(step > 0.0)) throw ConfigError("finite difference step must be positive");
    const double scale = std::max(1.0, x.norm());
    if (step / scale < 1e-12) throw ConfigError("finite difference step underflow");
    Vec g(model.dim);
    Vec e = Vec::Zero(model.dim);
    for (int i = 0; i < model.dim; ++i) {
        e[i] = step;
        g[i] = (model.value(x + e) - model.value(x - e)) / (2.0 * step);
        e[i] = 0.0;
    }
    return g;
}

Mat finite_difference_hessian(const FunctionalModel& model, const Vec& x, double step) {
    Mat h(model.dim, model.dim);
    Vec e = Vec::Zero(model.dim);
    for (int j = 0; j < model.dim; ++j) {
        e[j] = step;
        h.col(j) = (model.gradient(x + e) - model.gradient(x - e)) / (2.0 * step);
        e[j] = 0.0;
    }
    return h;
}

void validate_model(const FunctionalModel& model, const Tolerances& tol, int samples) {
    const int n = model.dim;
    if (n <= 0) throw ConfigError("model dimension must be positive");
    if (model.h_inner.rows() != n || model.h_inner.cols() != n)
        throw ConfigError("h_inner must be dim x dim");
    if ((model.h_inner - model.h_inner.transpose()).norm() > 1e-12 * (1.0 + model.h_inner.norm()))
        throw ConfigError("h_inner must be symmetric");
    if (model.mass_solver().info() != Eigen::Success)
        throw ConfigError("h_inner must be positive definite");

    // Critical point: A(theta) = 0.
    const double gradient_at_origin = model.norm_h(model.a(Vec::Zero(n)));
    if (gradient_at_origin > tol.critical_point) {
        std::ostringstream os;
        os << "gradient at the critical point has H-norm " << gradient_at_origin
           << " > " << tol.critical_point << " (condition C1 fails after translation)";
        throw ConfigError(os.str());
    }

    const double r = 0.25 * model.domain_radius;
    auto pts = halton_ball(n, r, samples);
    pts.push_back(Vec::Zero(n));
    const double fd_step = std::max(1e-6, 1e-6 * r);
    for (const auto& x : pts) {
        const Mat hess = model.hessian(x);
        const double hnorm = std::max(1.0, hess.norm());
        if ((hess - hess.transpose()).norm() > tol.hessian_symmetry * hnorm * 10)
            throw ConfigError("hessian(x) is not symmetric w.r.t. h_inner at a sampled point");

        const Vec g = model.gradient(x);
        const Vec gfd = finite_difference_gradient(model, x, fd_step);
        if ((g - gfd).norm() > tol.grad_fd_rel * std::max(1.0, g.norm()) * 10)
            throw ConfigError("gradient is inconsistent with value (finite differences)");

        const Mat hfd = finite_difference_hessian(model, x, std::sqrt(fd_step));
        if ((hess - hfd).norm() > tol.hess_fd_rel * std::max(1.0, hess.norm()) * 10)
            throw ConfigError("hessian is inconsistent with gradient (finite differences)");

        if (model.norm_h(x) > model.x_norm(x) * (1.0 + 1e-12))
            throw ConfigError("norm domination |v| <= |v|_X fails at a sampled point");
    }
}

FunctionalModel build_model(const ProblemSpec& spec, const Tolerances& tol) {
    FunctionalModel m;
    switch (spec.kind) {
        case ProblemKind::polynomial: m = build_polynomial(spec); break;
        case ProblemKind::lagrangian_action: m = build_lagrangian_action(spec); break;
        case ProblemKind::elliptic_1d: m = build_elliptic_1d(spec); break;
    }
    validate_model(m, tol, 8);
    return m;
}

// ---------------------------------------------------------------------------
// JSON ingestion

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

Vec json_to_vec(const json& j) {
    if (!j.is_array()) throw ConfigError("expected an array of numbers");
    Vec v(j.size());
    for (int i = 0; i < static_cast<int>(j.size()); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace

ProblemSpec parse_problem_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("problem spec is not valid JSON: ") + e.what());
    }
    reject_unknown_keys(j, {"kind", "parameters", "critical_point", "name"}, "problem spec");
    if (!j.contains("kind")) throw ConfigError("problem spec needs a 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    const json params = j.value("parameters", json::object());

    ProblemSpec spec;
    spec.name = j.value("name", kind);
    if (j.contains("critical_point")) spec.critical_point = json_to_vec(j["critical_point"]);

    if (kind == "polynomial") {
        spec.kind = ProblemKind::polynomial;
        reject_unknown_keys(params, {"terms", "domain_radius"}, "polynomial parameters");
        if (!params.contains("terms")) throw ConfigError("polynomial needs 'terms'");
        for (const auto& t : params["terms"]) {
            reject_unknown_keys(t, {"coeff", "powers"}, "polynomial term");
            MonomialTerm term;
            term.coeff = t.at("coeff").get<double>();
            for (const auto& p : t.at("powers")) {
                const int pw = p.get<int>();
                if (pw < 0) throw ConfigError("monomial powers must be nonnegative");
                term.powers.push_back(pw);
            }
            spec.terms.push_back(std::move(term));
        }
        spec.domain_radius = params.value("domain_radius", 1.0);
        if (spec.critical_point.size() == 0 && !spec.terms.empty())
            spec.critical_point = Vec::Zero(spec.terms.front().powers.size());
    } else if (kind == "lagrangian_action") {
        spec.kind = ProblemKind::lagrangian_action;
        reject_unknown_keys(params,
                            {"lagrangian", "period", "grid_size", "gravity", "domain_radius",
                             "boundary"},
                            "lagrangian_action parameters");
        spec.lagrangian = params.value("lagrangian", std::string("pendulum"));
        spec.period = params.value("period", 0.0);
        spec.grid_size = params.value("grid_size", 0);
        spec.gravity = params.value("gravity", 1.0);
        spec.domain_radius = params.value("domain_radius", 1.0);
        const std::string boundary = params.value("boundary", std::string("periodic"));
        if (boundary != "periodic")
            throw ConfigError("lagrangian_action requires periodic data, got boundary='" +
                              boundary + "'");
        if (spec.critical_point.size() == 0) spec.critical_point = Vec::Zero(spec.grid_size);
    } else if (kind == "elliptic_1d") {
        spec.kind = ProblemKind::elliptic_1d;
        reject_unknown_keys(params, {"nonlinearity", "grid_size", "domain_radius"},
                            "elliptic_1d parameters");
        spec.nonlinearity = params.value("nonlinearity", std::string("cubic"));
        spec.grid_size = params.value("grid_size", 0);
        spec.domain_radius = params.value("domain_radius", 1.0);
        if (spec.critical_point.size() == 0) spec.critical_point = Vec::Zero(spec.grid_size);
    } else {
        throw ConfigError("unknown problem kind '" + kind + "'");
    }
    return spec;
}

std::string problem_spec_to_json(const ProblemSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["critical_point"] = std::vector<double>(spec.critical_point.data(),
                                              spec.critical_point.data() + spec.critical_point.size());
    json p;
    switch (spec.kind) {
        case ProblemKind::polynomial: {
            j["kind"] = "polynomial";
            json terms = json::array();
            for (const auto& t : spec.terms)
                terms.push_back({{"coeff", t.coeff}, {"powers", t.powers}});
            p["terms"] = terms;
            p["domain_radius"] = spec.domain_radius;
            break;
        }
        case ProblemKind::lagrangian_action:
            j["kind"] = "lagrangian_action";
            p["lagrangian"] = spec.lagrangian;
            p["period"] = spec.period;
            p["grid_size"] = spec.grid_size;
            p["gravity"] = spec.gravity;
            p["domain_radius"] = spec.domain_radius;
            break;
        case ProblemKind::elliptic_1d:
            j["kind"] = "elliptic_1d";
            p["nonlinearity"] = spec.nonlinearity;
            p["grid_size"] = spec.grid_size;
            p["domain_radius"] = spec.domain_radius;
            break;
    }
    j["parameters"] = p;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

ProblemSpec poly(const std::string& name, int n, std::vector<MonomialTerm> terms,
                 double radius = 1.0, Vec theta = Vec()) {
    ProblemSpec s;
    s.kind = ProblemKind::polynomial;
    s.name = name;
    s.terms = std::move(terms);
    s.domain_radius = radius;
    s.critical_point = theta.size() ? theta : Vec::Zero(n);
    return s;
}

MonomialTerm mono(double c, std::vector<int> p) { return MonomialTerm{c, std::move(p)}; }

}  // namespace

std::vector<std::string> catalog_names() {
    return {"saddle_2d",      "quartic_min",    "quartic_saddle",
            "coupled_quartic", "monkey_saddle",  "monkey_saddle_3d",
            "double_well",     "quartic_mountain_pass", "pendulum",
            "elliptic_resonant"};
}

ProblemSpec catalog_spec(const std::string& name) {
    if (name == "saddle_2d")  // x^2 - y^2
        return poly(name, 2, {mono(1, {2, 0}), mono(-1, {0, 2})});
    if (name == "quartic_min")  // x^4 + y^2
        return poly(name, 2, {mono(1, {4, 0}), mono(1, {0, 2})});
    if (name == "quartic_saddle")  // x^4 - y^2
        return poly(name, 2, {mono(1, {4, 0}), mono(-1, {0, 2})});
    if (name == "coupled_quartic")  // y^2/2 + x^2 y + x^4
        return poly(name, 2, {mono(0.5, {0, 2}), mono(1, {2, 1}), mono(1, {4, 0})});
    if (name == "monkey_saddle")  // x^3 - 3 x y^2
        return poly(name, 2, {mono(1, {3, 0}), mono(-3, {1, 2})});
    if (name == "monkey_saddle_3d")  // x^3 - 3 x y^2 + w^2
        return poly(name, 3, {mono(1, {3, 0, 0}), mono(-3, {1, 2, 0}), mono(1, {0, 0, 2})});
    if (name == "double_well") {
        // (x^2 - 1)^2 + y^2 analyzed at the saddle between the two wells.
        ProblemSpec s = poly(name, 2,
                             {mono(1, {4, 0}), mono(-2, {2, 0}), mono(1, {0, 0}),
                              mono(1, {0, 2})});
        s.domain_radius = 0.8;  // keep clear of the wells at x = +-1
        return s;
    }
    if (name == "quartic_mountain_pass")  // y^2 - x^4
        return poly(name, 2, {mono(1, {0, 2}), mono(-1, {4, 0})});
    if (name == "pendulum") {
        ProblemSpec s;
        s.kind = ProblemKind::lagrangian_action;
        s.name = name;
        s.lagrangian = "pendulum";
        s.period = M_PI;  // below 2*pi the k = +-1 modes stay positive
        s.grid_size = 64;
        s.gravity = 1.0;
        s.domain_radius = 1.0;
        s.critical_point = Vec::Zero(64);
        return s;
    }
    if (name == "elliptic_resonant") {
        ProblemSpec s;
        s.kind = ProblemKind::elliptic_1d;
        s.name = name;
        s.nonlinearity = "cubic_resonant";
        s.grid_size = 24;
        s.domain_radius = 1.0;
        s.critical_point = Vec::Zero(24);
        return s;
    }
    throw ConfigError("unknown catalog problem '" + name + "'");
}

FunctionalModel catalog_model(const std::string& name, const Tolerances& tol) {
    return build_model(catalog_spec(name), tol);
}

}  // namespace morsesplit
