#include "morsesplit/normal_form.hpp"

#include <cmath>
#include <sstream>

#include "morsesplit/sampling.hpp"

namespace morsesplit {

namespace {

double sqrt_clamped(double v, const char* what) {
    if (v < -1e-12) {
        std::ostringstream os;
        os << what << ": radicand " << v << " below -1e-12 (maximizer failure)";
        throw ChartError(os.str());
    }
    return std::sqrt(std::max(0.0, v));
}

// Solves val(t) = target for t in [0, 1] with val(0) <= target <= val(1):
// bisection down to a machine-width bracket, then one secant polish step
// accepted only inside the bracket. Monotonicity is not assumed; the
// bracket keeps the iteration from walking off on evaluation noise.
template <typename F>
double solve_scalar_level(F&& val, double target) {
    double lo = 0.0, hi = 1.0;
    double flo = val(lo) - target, fhi = val(hi) - target;
    if (flo > 0.0 && fhi > 0.0) return (std::abs(flo) < std::abs(fhi)) ? lo : hi;
    for (int it = 0; it < 80 && (hi - lo) > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = val(mid) - target;
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    double best = (std::abs(flo) < std::abs(fhi)) ? lo : hi;
    double fbest = std::min(std::abs(flo), std::abs(fhi));
    if (std::abs(fhi - flo) > 1e-300) {
        const double t2 = lo - flo * (hi - lo) / (fhi - flo);
        if (t2 >= lo && t2 <= hi) {
            const double f2 = val(t2) - target;
            if (std::abs(f2) < fbest) best = t2;
        }
    }
    return best;
}

}  // namespace

NormalFormChart::NormalFormChart(const Reduction& red, const ConditionCertificate& cert,
                                 const Tolerances& tol, double delta_override)
    : red_(&red), split_(&red.splitting()), model_(&red.model()), tol_(tol) {
    a1_ = cert.a1;
    if (dim_plus() > 0 && !(a1_ > 0.0))
        throw ChartError("conditions certificate has a1 <= 0; the chart needs coercivity on H+");
    // p(t) = a1 t^2 / 2, capped at 4 t^2 so that the inclusion radii of the
    // square-root construction stay below delta.
    p_coeff_ = std::min(0.5 * a1_, 4.0);
    choose_radii(cert, delta_override);
}

Vec NormalFormChart::base_point(const Vec& z) const {
    const Vec zz = z.size() ? z : Vec::Zero(split_->nu);
    const Vec h = red_->solve_h(zz);
    return red_->ambient(zz, h);
}

double NormalFormChart::fiber_value_ambient(const Vec& base, const Vec& u_amb) const {
    return model_->value(base + u_amb) - model_->value(base);
}

double NormalFormChart::fiber_value(const Vec& z, const Vec& x_plus, const Vec& y_minus) const {
    Vec u = Vec::Zero(model_->dim);
    if (x_plus.size()) u += split_->basis_Hplus * x_plus;
    if (y_minus.size()) u += split_->basis_Hminus * y_minus;
    return fiber_value_ambient(base_point(z), u);
}

Vec NormalFormChart::fiber_gradient_plus(const Vec& z, const Vec& x_plus,
                                         const Vec& y_minus) const {
    Vec u = Vec::Zero(model_->dim);
    if (x_plus.size()) u += split_->basis_Hplus * x_plus;
    if (y_minus.size()) u += split_->basis_Hminus * y_minus;
    const Vec g = model_->gradient(base_point(z) + u);
    return split_->basis_Hplus.transpose() * g;
}

Vec NormalFormChart::fiber_gradient_minus(const Vec& z, const Vec& x_plus,
                                          const Vec& y_minus) const {
    Vec u = Vec::Zero(model_->dim);
    if (x_plus.size()) u += split_->basis_Hplus * x_plus;
    if (y_minus.size()) u += split_->basis_Hminus * y_minus;
    const Vec g = model_->gradient(base_point(z) + u);
    return split_->basis_Hminus.transpose() * g;
}

double NormalFormChart::chart_radius() const {
    if (dim_plus() == 0 && dim_minus() > 0) return minus_radius_;
    return std::sqrt(0.5 * p(eps_));
}

void NormalFormChart::choose_radii(const ConditionCertificate& cert, double delta_override) {
    // Everything must stay inside the ball where the certificate holds:
    // |z + h(z) + x + y| <= |z|(1 + Lip_h) + |x| + |y| with Lip_h <= 2.
    const double cap = std::min(cert.certified_radius, 0.9 * model_->domain_radius);
    if (!(cap > 0.0)) throw ChartError("conditions certificate has empty certified radius");
    z_radius_ = std::min(0.1 * cap, 0.95 * red_->r0());
    delta_ = (delta_override > 0.0) ? std::min(delta_override, 0.5 * cap) : 0.3 * cap;
    eps1_ = 0.5 * delta_;

    if (dim_plus() == 0) {
        eps_ = 0.0;
        if (dim_minus() > 0) {
            // Pure-maximum fiber: the chart radius is the depth of F on the
            // boundary sphere of H-.
            const Vec z0 = Vec::Zero(split_->nu);
            double depth = std::numeric_limits<double>::infinity();
            const auto dirs = halton_sphere(dim_minus(), 16);
            for (const auto& d : dirs) {
                Vec y = delta_ * d;
                depth = std::min(depth, -fiber_value(z0, Vec(), y));
            }
            if (!(depth > 0.0)) throw ChartError("F is not negative on the H- boundary sphere");
            minus_radius_ = 0.9 * std::sqrt(depth);
        }
        return;
    }

    // Constructive search for eps: the segment construction of the inverse
    // needs F(z, x + y) <= -p(eps)/2 on the H- boundary sphere for all
    // |x| <= 2 eps, plus phi_z(x) inside the half ball.
    const int z_samples = (split_->nu > 0) ? 5 : 1;
    const int dir_samples = 8;
    std::vector<Vec> zs;
    if (split_->nu > 0) {
        zs = halton_ball(split_->nu, z_radius_, z_samples - 1);
        zs.push_back(Vec::Zero(split_->nu));
    } else {
        zs.push_back(Vec());
    }
    double eps = 0.25 * eps1_;
    for (int attempt = 0; attempt < 40; ++attempt, eps *= 0.5) {
        bool ok = true;
        for (const auto& z : zs) {
            const auto xdirs = halton_sphere(dim_plus(), dir_samples);
            for (const auto& xd : xdirs) {
                const Vec x = 2.0 * eps * xd;
                Vec phi;
                try {
                    phi = maximizer_phi(z, x);
                } catch (const ChartError&) {
                    ok = false;
                    break;
                }
                if (dim_minus() > 0 && phi.norm() >= 0.5 * delta_) {
                    ok = false;
                    break;
                }
                if (dim_minus() > 0) {
                    const auto ydirs = halton_sphere(dim_minus(), dir_samples, 64);
                    for (const auto& yd : ydirs) {
                        const Vec y = delta_ * yd;
                        if (fiber_value(z, x, y) > -0.5 * p(eps)) {
                            ok = false;
                            break;
                        }
                    }
                }
                if (!ok) break;
            }
            if (!ok) break;
        }
        if (ok) {
            eps_ = eps;
            return;
        }
    }
    throw ChartError("no admissible eps found for the chart (boundary condition keeps failing)");
}

Vec NormalFormChart::maximizer_phi(const Vec& z, const Vec& x_plus,
                                   std::optional<Vec> warm_start) const {
    const int m = dim_minus();
    if (m == 0) return Vec();
    if (x_plus.size() && x_plus.norm() >= 2.0 * eps1_ * (1.0 + 1e-9))
        throw ConfigError("maximizer_phi: |x+| out of range");

    const Vec base = base_point(z);
    const Vec xamb = x_plus.size() ? Vec(split_->basis_Hplus * x_plus) : Vec(Vec::Zero(model_->dim));
    auto value = [&](const Vec& y) {
        return fiber_value_ambient(base, xamb + split_->basis_Hminus * y);
    };
    auto grad = [&](const Vec& y) {
        const Vec g = model_->gradient(base + xamb + split_->basis_Hminus * y);
        return Vec(split_->basis_Hminus.transpose() * g);
    };
    auto project = [&](Vec y) {
        const double n = y.norm();
        if (n > delta_) y *= delta_ / n;
        return y;
    };

    Vec y = warm_start.value_or(Vec::Zero(m));
    y = project(y);
    double fy = value(y);
    double step = 1.0 / std::max(1.0, 2.0 * std::abs(split_->lambda_minus.minCoeff()));
    const int max_iter = 500;
    for (int it = 0; it < max_iter; ++it) {
        const Vec g = grad(y);
        if (g.norm() <= tol_.maximizer) break;
        // Concavity guard along the ascent direction.
        const Mat hm = split_->basis_Hminus.transpose() *
                       model_->hessian(base + xamb + split_->basis_Hminus * y) *
                       split_->basis_Hminus;
        Eigen::SelfAdjointEigenSolver<Mat> es(hm, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().maxCoeff() > 0.0)
            throw ChartError(
                "positive curvature along an H- direction: strict concavity fails at this "
                "radius");
        // Newton proposal on the concave fiber, fallback to Armijo ascent.
        Vec dir = -hm.ldlt().solve(g);
        if (!dir.allFinite() || dir.dot(g) <= 0.0) dir = g;
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Vec cand = project(y + t * dir);
            const double fc = value(cand);
            if (fc >= fy + 1e-4 * g.dot(cand - y)) {
                y = cand;
                fy = fc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Gradient step with the cached scale.
            const Vec cand = project(y + step * g);
            if (value(cand) <= fy) break;
            y = cand;
            fy = value(y);
        }
    }
    // One unguarded Newton polish: the fiber is strictly concave here, so
    // this lands well below the stopping tolerance and keeps phi consistent
    // between the forward map and the inverse construction.
    {
        const Vec g = grad(y);
        const Mat hm = split_->basis_Hminus.transpose() *
                       model_->hessian(base + xamb + split_->basis_Hminus * y) *
                       split_->basis_Hminus;
        const Vec dir = -hm.ldlt().solve(g);
        if (dir.allFinite() && (y + dir).norm() < delta_) y += dir;
    }
    const Vec gfin = grad(y);
    if (gfin.norm() > 10.0 * tol_.maximizer && y.norm() >= delta_ * (1.0 - 1e-9))
        throw ChartError("fiber maximum sits on the H- boundary sphere; delta too small");
    return y;
}

std::pair<Vec, Vec> NormalFormChart::psi_forward(const Vec& z, const Vec& x_plus,
                                                 const Vec& y_minus) const {
    const Vec phi = maximizer_phi(z, x_plus);
    const double f_top = fiber_value(z, x_plus, phi);
    Vec psi1 = Vec::Zero(dim_plus());
    if (x_plus.size() && x_plus.norm() > 0.0)
        psi1 = sqrt_clamped(f_top, "psi1") / x_plus.norm() * x_plus;
    Vec psi2 = Vec::Zero(dim_minus());
    if (y_minus.size()) {
        const Vec d = y_minus - phi;
        if (d.norm() > 0.0) {
            const double f_here = fiber_value(z, x_plus, y_minus);
            psi2 = sqrt_clamped(f_top - f_here, "psi2") / d.norm() * d;
        }
    }
    return {psi1, psi2};
}

std::pair<Vec, Vec> NormalFormChart::chart_inverse(const Vec& z, const Vec& u_plus,
                                                   const Vec& u_minus) const {
    const double cr = chart_radius();
    if ((u_plus.size() && u_plus.norm() >= cr * (1.0 + 1e-9)) ||
        (u_minus.size() && u_minus.norm() >= cr * (1.0 + 1e-9)))
        throw ConfigError("chart_inverse: point outside the chart domain");

    // H+ part: find s in [0,1] with sqrt(F(z, s x_max + phi(s x_max))) = |u+|
    // along the ray through u+.
    Vec x = Vec::Zero(dim_plus());
    Vec last_phi = Vec::Zero(dim_minus());
    const double target_plus = u_plus.size() ? u_plus.norm() : 0.0;
    if (target_plus > 0.0) {
        const Vec dir = u_plus / target_plus;
        const double xmax = 2.0 * eps_;
        auto val = [&](double s) {
            const Vec xs = s * xmax * dir;
            last_phi = maximizer_phi(z, xs, last_phi);
            return sqrt_clamped(fiber_value(z, xs, last_phi), "chart_inverse/plus");
        };
        if (val(1.0) < target_plus)
            throw ChartError("chart_inverse bracket failure on the H+ ray (eps too large)");
        const double s1 = solve_scalar_level(val, target_plus);
        x = s1 * xmax * dir;
    }

    // H- part: walk the segment from phi(x) toward the boundary sphere in
    // the direction of u-.
    Vec y = maximizer_phi(z, x, last_phi);
    const double target_minus = u_minus.size() ? u_minus.norm() : 0.0;
    if (target_minus > 0.0) {
        const Vec phi = y;
        const Vec w = u_minus / target_minus;
        const double pw = phi.size() ? phi.dot(w) : 0.0;
        const double k = -pw + std::sqrt(std::max(0.0, pw * pw + delta_ * delta_ -
                                                           (phi.size() ? phi.squaredNorm() : 0.0)));
        const double f_top = fiber_value(z, x, phi);
        auto val = [&](double t) {
            const Vec yt = phi + t * k * w;
            return sqrt_clamped(f_top - fiber_value(z, x, yt), "chart_inverse/minus");
        };
        if (val(1.0) < target_minus)
            throw ChartError("chart_inverse bracket failure on the H- segment (eps too large)");
        const double t1 = solve_scalar_level(val, target_minus);
        y = phi + t1 * k * w;
    }

    // Residual check against the forward map.
    const auto [p1, p2] = psi_forward(z, x, y);
    const double resid = std::sqrt((u_plus.size() ? (p1 - u_plus).squaredNorm() : 0.0) +
                                   (u_minus.size() ? (p2 - u_minus).squaredNorm() : 0.0));
    if (resid > tol_.invert) {
        std::ostringstream os;
        os << "chart_inverse residual " << resid << " exceeds " << tol_.invert;
        throw ChartError(os.str());
    }
    return {x, y};
}

Vec NormalFormChart::big_phi(const Vec& z, const Vec& u_plus, const Vec& u_minus) const {
    const auto [x, y] = chart_inverse(z, u_plus, u_minus);
    Vec p = base_point(z);
    if (x.size()) p += split_->basis_Hplus * x;
    if (y.size()) p += split_->basis_Hminus * y;
    return p;
}

double NormalFormChart::normal_form_residual(const Vec& z, const Vec& u_plus,
                                             const Vec& u_minus) const {
    const Vec p = big_phi(z, u_plus, u_minus);
    const double lhs = model_->value(p);
    const double l0 = model_->value(base_point(z));
    const double rhs = (u_plus.size() ? u_plus.squaredNorm() : 0.0) -
                       (u_minus.size() ? u_minus.squaredNorm() : 0.0) + l0;
    return std::abs(lhs - rhs);
}

BehaviorReport verify_behavior_estimates(const NormalFormChart& chart,
                                         const ConditionCertificate& cert, double s_radius,
                                         int samples) {
    const Reduction& red = chart.reduction();
    const SpectralSplitting& s = red.splitting();
    const FunctionalModel& model = red.model();
    const int n = model.dim;
    BehaviorReport rep;
    rep.a1 = std::min(cert.a1, std::isfinite(s.a0) ? s.a0 : cert.a1);
    if (chart.dim_plus() == 0 || !(rep.a1 > 0.0)) {
        rep.note = "H+ is trivial; the growth estimates are vacuous";
        return rep;
    }

    // Empirical two-sided bounds for P(x) = P+ B(x) - P- B(x) + P0 in the
    // eigenframe (quadratic forms only, so the symmetrized matrix decides).
    const Mat V = s.eigenvectors;
    Vec sel_plus = Vec::Zero(n), sel_minus = Vec::Zero(n), sel_null = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        const double lam = s.eigenvalues[i];
        if (std::abs(lam) <= s.null_tol)
            sel_null[i] = 1.0;
        else if (lam < 0.0)
            sel_minus[i] = 1.0;
        else
            sel_plus[i] = 1.0;
    }
    const double rho0 = 0.5 * cert.certified_radius;
    const Eigen::LLT<Mat>& llt = model.mass_solver();
    auto to_h_ball = [&](const Vec& raw) { return Vec(llt.matrixL().transpose().solve(raw)); };

    double c1p = std::numeric_limits<double>::infinity(), c2p = 0.0;
    double omega_max = 0.0, qdrift_max = 0.0;
    const Mat hess0 = model.hessian(Vec::Zero(n));
    const Mat B0c = V.transpose() * hess0 * V;  // ~ diag(lambda)
    for (const auto& raw : halton_ball(n, rho0, std::max(10, samples / 2))) {
        const Vec x = to_h_ball(raw);
        const Mat Bc = V.transpose() * model.hessian(x) * V;
        Mat P = sel_plus.asDiagonal() * Bc;
        P -= Mat(sel_minus.asDiagonal() * Bc);
        P += Mat(sel_null.asDiagonal().toDenseMatrix());
        const Mat Ps = 0.5 * (P + P.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(Ps, Eigen::EigenvaluesOnly);
        c1p = std::min(c1p, es.eigenvalues().minCoeff());
        c2p = std::max(c2p, es.eigenvalues().maxCoeff());
        const Mat Qc = 2.0 * Mat(sel_minus.asDiagonal() * Bc) +
                       Mat(sel_null.asDiagonal().toDenseMatrix()) +
                       Mat(sel_null.asDiagonal() * Bc);
        const Mat Q0c = 2.0 * Mat(sel_minus.asDiagonal() * B0c) +
                        Mat(sel_null.asDiagonal().toDenseMatrix()) +
                        Mat(sel_null.asDiagonal() * B0c);
        qdrift_max = std::max(qdrift_max, (Qc - Q0c).operatorNorm());
    }
    // |Q(theta)| in the eigenframe: diagonal up to the eigen residual.
    const Mat Q0c = 2.0 * Mat(sel_minus.asDiagonal() * B0c) +
                    Mat(sel_null.asDiagonal().toDenseMatrix()) +
                    Mat(sel_null.asDiagonal() * B0c);
    rep.q0_norm = Q0c.operatorNorm();
    rep.c1_prime = c1p;
    rep.c2_prime = c2p;
    rep.a1_prime = 0.5 * (2.0 * c2p + rep.q0_norm + 1.0) + 1.0 / (3.0 * rep.a1);
    const double ratio = std::sqrt(8.0 * rep.a1_prime / rep.a1);
    // s <= 0 asks for the largest s whose companion radius r fits the ball.
    rep.s = (s_radius > 0.0) ? s_radius : 0.9 * rho0 / ratio;
    rep.r = rep.s * ratio;
    rep.eps = rep.a1_prime * rep.s * rep.s;
    rep.hbar = rep.a1 / 8.0 * rep.s * rep.s;
    for (double w : cert.omega_values) omega_max = std::max(omega_max, w);
    rep.premises_ok = (c1p > 0.0) && (omega_max <= rep.a1 / (8.0 * rep.a1_prime)) &&
                      (omega_max <= std::sqrt(0.5 * rep.a1)) && (qdrift_max <= 0.5 * c1p);
    if (rep.r > rho0 || rep.s > rho0) {
        rep.note = "radii (r, s) do not fit inside the certified ball; margins not evaluated";
        return rep;
    }
    rep.applicable = true;

    const int mu = s.mu;
    const int dp = chart.dim_plus();
    std::vector<Vec> zs;
    if (s.nu > 0) {
        zs = halton_ball(s.nu, std::min(chart.z_radius(), rho0), 3);
        zs.push_back(Vec::Zero(s.nu));
    } else {
        zs.push_back(Vec());
    }
    auto grad_pm = [&](const Vec& z, const Vec& up, const Vec& um, Vec& gp, Vec& gm) {
        Vec u = Vec::Zero(n);
        if (up.size()) u += s.basis_Hplus * up;
        if (um.size()) u += s.basis_Hminus * um;
        const Vec g = model.gradient(chart.base_point(z) + u);
        gp = s.basis_Hplus.transpose() * g;
        gm = mu ? Vec(s.basis_Hminus.transpose() * g) : Vec();
    };

    double m1 = std::numeric_limits<double>::infinity();
    double m2 = std::numeric_limits<double>::infinity();
    double m3 = std::numeric_limits<double>::infinity();
    for (const auto& z : zs) {
        for (const auto& dplus : halton_sphere(dp, samples / 4 + 2)) {
            const Vec up = rep.s * dplus;
            // (i): boundary |P+ u| = s, any |P- u| <= r.
            const auto minus_pts =
                mu ? halton_ball(mu, rep.r, 3) : std::vector<Vec>{Vec()};
            for (const auto& um : minus_pts) {
                Vec gp, gm;
                grad_pm(z, up, um, gp, gm);
                m1 = std::min(m1, gp.dot(up) - rep.hbar);
                ++rep.samples_i;
            }
            if (mu) {
                // (iii): boundary |P- u| = r, any |P+ u| <= s.
                for (const auto& dminus : halton_sphere(mu, 4, 128)) {
                    const Vec um = rep.r * dminus;
                    for (double scale : {0.0, 0.5, 1.0}) {
                        const double f = chart.fiber_value(z, scale * up, um);
                        m3 = std::min(m3, -rep.eps - f);
                        ++rep.samples_iii;
                        // (ii): points of the sublevel {F <= -eps}.
                        if (f <= -rep.eps) {
                            Vec gp, gm;
                            grad_pm(z, scale * up, um, gp, gm);
                            m2 = std::min(m2, -rep.hbar - gm.dot(um));
                            ++rep.samples_ii;
                        }
                    }
                }
            }
        }
    }
    rep.margin_i = m1;
    rep.margin_ii = (rep.samples_ii > 0) ? m2 : 0.0;
    rep.margin_iii = (rep.samples_iii > 0) ? m3 : 0.0;
    return rep;
}

}  // namespace morsesplit
