#include "morsesplit/reduction.hpp"

#include <cmath>
#include <sstream>

#include "morsesplit/sampling.hpp"

namespace morsesplit {

namespace {

// Deterministic probe directions in the nu-ball used for the radius search
// and the grid statistics.
std::vector<Vec> kernel_probes(int nu, double radius, int extra) {
    std::vector<Vec> probes;
    if (nu == 0) return probes;
    for (int i = 0; i < nu; ++i) {
        Vec e = Vec::Zero(nu);
        e[i] = radius;
        probes.push_back(e);
        probes.push_back(-e);
    }
    for (auto& p : halton_ball(nu, radius, extra)) probes.push_back(p);
    return probes;
}

}  // namespace

Reduction::Reduction(const FunctionalModel& model, const SpectralSplitting& split,
                     const Tolerances& tol, ReductionSolver solver, double r0_seed)
    : model_(&model), split_(&split), tol_(tol), solver_(solver) {
    basis_pm_ = split.basis_pm();
    lambda_pm_ = split.lambda_pm();
    for (int i = 0; i < lambda_pm_.size(); ++i)
        if (lambda_pm_[i] == 0.0)
            throw SplitError("restricted block of B(theta) is singular; the splitting is broken");
    certify_radius(r0_seed);
}

Vec Reduction::ambient(const Vec& z, const Vec& x) const {
    Vec p = Vec::Zero(model_->dim);
    if (z.size()) p += split_->basis_H0 * z;
    if (x.size()) p += basis_pm_ * x;
    return p;
}

Vec Reduction::contraction_map(const Vec& z, const Vec& x) const {
    // S(z,x) = -(B(theta)|_{X^pm})^{-1} (I-P0) A(z+x) + x. In the eigenbasis
    // the restricted solve is diagonal and exact.
    const Vec g = model_->gradient(ambient(z, x));
    const Vec c = basis_pm_.transpose() * g;  // coordinates of (I-P0)A
    return x - c.cwiseQuotient(lambda_pm_);
}

double Reduction::residual(const Vec& z, const Vec& h) const {
    const Vec g = model_->gradient(ambient(z, h));
    return (basis_pm_.transpose() * g).norm();
}

Vec Reduction::solve_h_impl(const Vec& z, const Vec& x0, double* max_ratio) const {
    const int m = static_cast<int>(lambda_pm_.size());
    if (m == 0) return Vec();  // H0 is everything; nothing to solve
    Vec x = x0;
    double prev_step = -1.0;
    int bad_ratios = 0;
    double worst_ratio = 0.0;
    for (int it = 0; it < tol_.reduction_max_iterations; ++it) {
        Vec xn;
        if (solver_ == ReductionSolver::newton) {
            const Vec g = model_->gradient(ambient(z, x));
            const Vec c = basis_pm_.transpose() * g;
            const Mat Bres = basis_pm_.transpose() * model_->hessian(ambient(z, x)) * basis_pm_;
            xn = x - Bres.ldlt().solve(c);
        } else {
            xn = contraction_map(z, x);
        }
        const double step = model_->x_norm(basis_pm_ * (xn - x));
        if (prev_step > 0.0) {
            const double ratio = step / prev_step;
            worst_ratio = std::max(worst_ratio, ratio);
            if (solver_ == ReductionSolver::fixed_point) {
                bad_ratios = (ratio >= 1.0) ? bad_ratios + 1 : 0;
                if (bad_ratios >= 3)
                    throw ContractionError(
                        "fixed-point iteration is not contracting at this z; shrink the radius",
                        z);
            }
        }
        prev_step = step;
        x = xn;
        if (residual(z, x) <= tol_.reduction_residual) {
            if (max_ratio) *max_ratio = worst_ratio;
            return x;
        }
    }
    std::ostringstream os;
    os << "reduction did not reach residual " << tol_.reduction_residual << " in "
       << tol_.reduction_max_iterations << " iterations";
    throw ContractionError(os.str(), z);
}

Vec Reduction::solve_h(const Vec& z, std::optional<Vec> x0) const {
    if (nu() > 0 && z.size() != nu()) throw ConfigError("z must have nu entries");
    if (nu() > 0 && z.norm() > r0_ * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "|z| = " << z.norm() << " exceeds the certified radius r0 = " << r0_;
        throw ConfigError(os.str());
    }
    const bool cacheable = !x0.has_value();
    std::vector<double> key;
    if (cacheable) {
        key.assign(z.data(), z.data() + z.size());
        std::lock_guard<std::mutex> lk(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    Vec start = x0.value_or(Vec::Zero(lambda_pm_.size()));
    double ratio = 0.0;
    Vec h = solve_h_impl(z.size() ? z : Vec::Zero(nu()), start, &ratio);
    std::lock_guard<std::mutex> lk(mutex_);
    contraction_factor_ = std::max(contraction_factor_, ratio);
    if (cacheable) cache_.emplace(std::move(key), h);
    return h;
}

Mat Reduction::h_derivative_at_theta() const {
    // h'(theta) z = -[(I-P0) A'(theta)|_{X^pm}]^{-1} (I-P0) A'(theta) z.
    // A'(theta) = B(theta) kills H0, so this is the zero matrix up to the
    // eigendecomposition residual.
    const Mat cross = basis_pm_.transpose() * model_->hessian(Vec::Zero(model_->dim)) *
                      split_->basis_H0;  // coords of (I-P0) B(theta) on H0
    Mat d(lambda_pm_.size(), nu());
    for (int j = 0; j < d.cols(); ++j)
        d.col(j) = -cross.col(j).cwiseQuotient(lambda_pm_);
    return d;
}

void Reduction::certify_radius(double r0_seed) {
    if (nu() == 0) {
        r0_ = model_->domain_radius;
        return;
    }
    // Constructive radius search: start at the seed (default half the domain
    // radius) and halve while the iteration fails to contract below the
    // certified bound.
    double r = (r0_seed > 0.0) ? std::min(r0_seed, model_->domain_radius)
                               : 0.5 * model_->domain_radius;
    const double floor = 1e-6;
    while (true) {
        bool ok = true;
        double worst = 0.0;
        const auto probes = kernel_probes(nu(), 0.98 * r, 6);
        for (const auto& z : probes) {
            try {
                double ratio = 0.0;
                solve_h_impl(z, Vec::Zero(lambda_pm_.size()), &ratio);
                worst = std::max(worst, ratio);
            } catch (const ContractionError&) {
                ok = false;
                break;
            }
        }
        if (ok && worst < tol_.contraction_bound) {
            r0_ = r;
            contraction_factor_ = std::max(contraction_factor_, worst);
            return;
        }
        r *= 0.5;
        if (r < floor)
            throw AnalysisError(
                "no contraction radius above the floor 1e-6; the problem violates the "
                "small-neighborhood regime");
    }
}

const std::vector<Reduction::GridRow>& Reduction::grid(int points_per_axis) const {
    std::lock_guard<std::mutex> lk(mutex_);
    if (!grid_.empty()) return grid_;
    if (nu() == 0) {
        GridRow row;
        row.z = Vec();
        row.h = solve_h_impl(Vec(), Vec::Zero(lambda_pm_.size()), nullptr);
        row.value = model_->value(ambient(row.z, row.h));
        grid_.push_back(row);
        return grid_;
    }
    std::vector<Vec> zs;
    const double r = 0.95 * r0_;
    if (nu() == 1) {
        for (int i = 0; i < points_per_axis; ++i) {
            Vec z(1);
            z[0] = -r + 2.0 * r * i / (points_per_axis - 1);
            zs.push_back(z);
        }
    } else {
        zs = kernel_probes(nu(), r, points_per_axis * nu());
        Vec zero = Vec::Zero(nu());
        zs.push_back(zero);
    }
    std::vector<GridRow> rows(zs.size());
    for (size_t i = 0; i < zs.size(); ++i) {
        GridRow row;
        row.z = zs[i];
        row.h = solve_h_impl(zs[i], Vec::Zero(lambda_pm_.size()), nullptr);
        row.value = model_->value(ambient(row.z, row.h));
        rows[i] = row;
    }
    // Lipschitz statistics over all grid pairs, in both norms.
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = i + 1; j < rows.size(); ++j) {
            const double dz_x = model_->x_norm(split_->basis_H0 * (rows[i].z - rows[j].z));
            const double dh_x = model_->x_norm(basis_pm_ * (rows[i].h - rows[j].h));
            const double dz_h = model_->norm_h(split_->basis_H0 * (rows[i].z - rows[j].z));
            const double dh_h = model_->norm_h(basis_pm_ * (rows[i].h - rows[j].h));
            if (dz_x > 1e-14) lipschitz_x_ = std::max(lipschitz_x_, dh_x / dz_x);
            if (dz_h > 1e-14) lipschitz_h_ = std::max(lipschitz_h_, dh_h / dz_h);
        }
    grid_ = std::move(rows);
    return grid_;
}

double ReducedFunctional::value(const Vec& z) const {
    const Vec h = red_->solve_h(z);
    return red_->model().value(red_->ambient(z, h));
}

Vec ReducedFunctional::gradient(const Vec& z) const {
    if (red_->nu() == 0) return Vec();
    const Vec h = red_->solve_h(z);
    const Vec g = red_->model().gradient(red_->ambient(z, h));
    return red_->splitting().basis_H0.transpose() * g;  // coords of P0 A
}

Mat ReducedFunctional::fd_hessian_at_theta(double step) const {
    const int nu = red_->nu();
    Mat h = Mat::Zero(nu, nu);
    Vec e = Vec::Zero(nu);
    for (int j = 0; j < nu; ++j) {
        e[j] = step;
        h.col(j) = (gradient(e) - gradient(-e)) / (2.0 * step);
        e[j] = 0.0;
    }
    return h;
}

ReducedFunctional reduced_functional(const Reduction& red) { return ReducedFunctional(red); }

EquivarianceReport check_equivariance(const FunctionalModel& model_a,
                                      const FunctionalModel& model_b, const Mat& J,
                                      const Tolerances& tol, int samples) {
    EquivarianceReport rep;
    rep.samples = samples;
    if (J.cols() != model_a.dim || J.rows() != model_b.dim) {
        rep.rejection = "J has the wrong shape";
        return rep;
    }
    // (J u, J v)_Hhat = (u, v)_H.
    const Mat gram = J.transpose() * model_b.h_inner * J;
    if ((gram - model_a.h_inner).norm() > tol.isometry * std::max(1.0, model_a.h_inner.norm())) {
        rep.rejection = "not an admissible J: J is not an isometry of the H inner products";
        return rep;
    }
    const auto pts = halton_ball(model_a.dim, 0.4 * model_a.domain_radius, samples);
    for (const auto& x : pts) {
        if (std::abs(model_b.value(J * x) - model_a.value(x)) >
            tol.isometry * std::max(1.0, std::abs(model_a.value(x)))) {
            rep.rejection = "not an admissible J: L_hat(J x) != L(x) at a sampled point";
            return rep;
        }
        const Vec lhs = model_b.a(J * x);
        const Vec rhs = J * model_a.a(x);
        if (model_b.norm_h(lhs - rhs) > tol.intertwine * std::max(1.0, model_b.norm_h(rhs))) {
            rep.rejection = "not an admissible J: A_hat(J x) != J A(x) at a sampled point";
            return rep;
        }
    }
    rep.admissible = true;

    const SpectralSplitting sa = split(model_a);
    const SpectralSplitting sb = split(model_b);
    if (sa.nu != sb.nu || sa.mu != sb.mu) {
        rep.rejection = "not an admissible J: the two splittings have different (nu, mu)";
        rep.admissible = false;
        return rep;
    }
    Reduction ra(model_a, sa, tol);
    Reduction rb(model_b, sb, tol);
    const double r = 0.9 * std::min(ra.r0(), rb.r0());

    std::vector<Vec> zs;
    if (sa.nu > 0) {
        zs = halton_ball(sa.nu, r, samples);
        zs.push_back(Vec::Zero(sa.nu));
    } else {
        zs.push_back(Vec());
    }
    for (const auto& zc : zs) {
        const Vec z_amb = sa.nu ? Vec(sa.basis_H0 * zc) : Vec(Vec::Zero(model_a.dim));
        const Vec jz = J * z_amb;
        // J z must land in the kernel of the hat problem.
        if (model_b.norm_h(jz - sb.P0 * jz) > 1e-9 * std::max(1.0, model_b.norm_h(jz))) {
            rep.rejection = "not an admissible J: J does not preserve the kernel splitting";
            rep.admissible = false;
            return rep;
        }
        const Vec z_hat = sb.basis_H0.transpose() * model_b.h_inner * jz;
        const Vec ha = ra.solve_h(zc.size() ? zc : Vec::Zero(0));
        const Vec hb = rb.solve_h(z_hat);
        const Vec lhs = rb.ambient(z_hat, hb) - jz;       // h_hat(Jz), ambient
        const Vec rhs = J * (ra.ambient(zc, ha) - z_amb);  // J h(z), ambient
        const double mismatch = model_b.norm_h(lhs - rhs);
        const double vdiff = std::abs(model_b.value(rb.ambient(z_hat, hb)) -
                                      model_a.value(ra.ambient(zc, ha)));
        rep.max_h_mismatch = std::max(rep.max_h_mismatch, mismatch);
        rep.max_value_mismatch = std::max(rep.max_value_mismatch, vdiff);
        rep.sample_pass.push_back(mismatch <= tol.equivariance && vdiff <= tol.equivariance);
    }
    rep.pass = true;
    for (bool b : rep.sample_pass) rep.pass = rep.pass && b;
    return rep;
}

}  // namespace morsesplit
