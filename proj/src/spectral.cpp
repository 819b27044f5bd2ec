#include "morsesplit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "morsesplit/sampling.hpp"

namespace morsesplit {

Mat SpectralSplitting::basis_pm() const {
    Mat b(eigenvectors.rows(), mu + static_cast<int>(lambda_plus.size()));
    b.leftCols(mu) = basis_Hminus;
    b.rightCols(lambda_plus.size()) = basis_Hplus;
    return b;
}

Vec SpectralSplitting::lambda_pm() const {
    Vec l(mu + static_cast<int>(lambda_plus.size()));
    l.head(mu) = lambda_minus;
    l.tail(lambda_plus.size()) = lambda_plus;
    return l;
}

SpectralSplitting split_absolute(const FunctionalModel& model, double null_tol_abs) {
    const int n = model.dim;
    const Mat hess = model.hessian(Vec::Zero(n));
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(hess, model.h_inner);
    if (es.info() != Eigen::Success) throw SplitError("generalized eigensolver failed");

    SpectralSplitting s;
    s.eigenvalues = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();  // V^T M V = I
    s.null_tol = null_tol_abs;

    // Ambiguous gap guard: an eigenvalue in (tol, 10 tol) means the kernel
    // cannot be separated from the small nonzero spectrum at this tolerance.
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(s.eigenvalues[i]);
        if (a > null_tol_abs && a < 10.0 * null_tol_abs) {
            std::ostringstream os;
            os << "eigenvalue " << s.eigenvalues[i] << " falls in the ambiguous band ("
               << null_tol_abs << ", " << 10.0 * null_tol_abs
               << "); the kernel split cannot be certified at this tolerance";
            throw SplitError(os.str());
        }
    }

    std::vector<int> idx0, idxm, idxp;
    for (int i = 0; i < n; ++i) {
        const double lam = s.eigenvalues[i];
        if (std::abs(lam) <= null_tol_abs)
            idx0.push_back(i);
        else if (lam < 0)
            idxm.push_back(i);
        else
            idxp.push_back(i);
    }
    s.nu = static_cast<int>(idx0.size());
    s.mu = static_cast<int>(idxm.size());

    auto gather = [&](const std::vector<int>& idx) {
        Mat b(n, idx.size());
        for (int k = 0; k < static_cast<int>(idx.size()); ++k) b.col(k) = s.eigenvectors.col(idx[k]);
        return b;
    };
    s.basis_H0 = gather(idx0);
    s.basis_Hminus = gather(idxm);
    s.basis_Hplus = gather(idxp);
    s.lambda_minus.resize(idxm.size());
    for (int k = 0; k < static_cast<int>(idxm.size()); ++k) s.lambda_minus[k] = s.eigenvalues[idxm[k]];
    s.lambda_plus.resize(idxp.size());
    for (int k = 0; k < static_cast<int>(idxp.size()); ++k) s.lambda_plus[k] = s.eigenvalues[idxp[k]];

    double min_nonzero = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        if (std::abs(s.eigenvalues[i]) > null_tol_abs)
            min_nonzero = std::min(min_nonzero, std::abs(s.eigenvalues[i]));
    s.a0 = 0.5 * min_nonzero;  // +inf when the spectrum is {0}

    auto projector = [&](const Mat& basis) {
        if (basis.cols() == 0) return Mat(Mat::Zero(n, n));
        return Mat(basis * basis.transpose() * model.h_inner);
    };
    s.P0 = projector(s.basis_H0);
    s.Pminus = projector(s.basis_Hminus);
    s.Pplus = projector(s.basis_Hplus);
    return s;
}

SpectralSplitting split(const FunctionalModel& model, double null_tol_rel) {
    if (!(null_tol_rel > 0.0)) throw ConfigError("null_tol must be positive");
    const Mat hess = model.hessian(Vec::Zero(model.dim));
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> probe(hess, model.h_inner,
                                                        Eigen::EigenvaluesOnly);
    const double max_abs = probe.eigenvalues().cwiseAbs().maxCoeff();
    // A completely flat Hessian has kernel everything; any tiny absolute
    // threshold classifies it correctly.
    const double abs_tol = (max_abs > 0.0) ? null_tol_rel * max_abs : 1e-300;
    return split_absolute(model, abs_tol);
}

SplittingCheck check_splitting(const FunctionalModel& model, const SpectralSplitting& s,
                               const Tolerances& tol) {
    const int n = model.dim;
    const Mat B = model.b(Vec::Zero(n));
    const Mat I = Mat::Identity(n, n);
    SplittingCheck c;
    c.projector_sum_error = (s.P0 + s.Pminus + s.Pplus - I).norm();
    for (const Mat* P : {&s.P0, &s.Pminus, &s.Pplus}) {
        c.projector_idempotent = std::max(c.projector_idempotent, ((*P) * (*P) - (*P)).norm());
        const Mat MP = model.h_inner * (*P);
        c.projector_selfadjoint =
            std::max(c.projector_selfadjoint, (MP - MP.transpose()).norm());
    }
    const double bnorm = std::max(1e-300, B.norm());
    for (int i = 0; i < n; ++i) {
        const Vec v = s.eigenvectors.col(i);
        c.eigen_residual = std::max(c.eigen_residual,
                                    (B * v - s.eigenvalues[i] * v).norm() / bnorm);
    }
    // (B u, v)_H = 0 across distinct blocks.
    const Mat blocks[3] = {s.basis_H0, s.basis_Hminus, s.basis_Hplus};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == b || blocks[a].cols() == 0 || blocks[b].cols() == 0) continue;
            const Mat cross = blocks[a].transpose() * model.hessian(Vec::Zero(n)) * blocks[b];
            c.block_orthogonality = std::max(c.block_orthogonality, cross.cwiseAbs().maxCoeff());
        }
    c.gap_margin_plus = std::numeric_limits<double>::infinity();
    for (int k = 0; k < s.basis_Hplus.cols(); ++k) {
        const Vec u = s.basis_Hplus.col(k);
        c.gap_margin_plus = std::min(c.gap_margin_plus,
                                     u.dot(model.hessian(Vec::Zero(n)) * u) - 2.0 * s.a0);
    }
    c.gap_margin_minus = std::numeric_limits<double>::infinity();
    for (int k = 0; k < s.basis_Hminus.cols(); ++k) {
        const Vec u = s.basis_Hminus.col(k);
        c.gap_margin_minus = std::min(c.gap_margin_minus,
                                      -2.0 * s.a0 - u.dot(model.hessian(Vec::Zero(n)) * u));
    }
    const double slack = 1e-9;  // eigensolver roundoff on the gap boundary
    c.pass = c.projector_sum_error <= tol.projector * n && c.projector_idempotent <= tol.projector * n &&
             c.projector_selfadjoint <= tol.projector * n * model.h_inner.norm() &&
             c.eigen_residual <= tol.eigen_residual &&
             c.block_orthogonality <= 1e-10 * std::max(1.0, model.hessian(Vec::Zero(n)).norm()) &&
             (s.basis_Hplus.cols() == 0 || c.gap_margin_plus >= -slack * std::max(1.0, s.a0)) &&
             (s.basis_Hminus.cols() == 0 || c.gap_margin_minus >= -slack * std::max(1.0, s.a0));
    return c;
}

ConditionCertificate certify_conditions(const FunctionalModel& model,
                                        const SpectralSplitting& s, double radius,
                                        int samples) {
    if (radius > model.domain_radius)
        throw ConfigError("certificate radius exceeds the model domain radius");
    if (samples < 10) throw ConfigError("certificate needs at least 10 samples");

    ConditionCertificate cert;
    cert.requested_radius = radius;
    cert.samples = samples;
    cert.pass_d1 = true;  // nu and mu are finite by construction at finite dimension

    const int n = model.dim;
    // Sample in the H-ball: euclidean ball points mapped through L^{-T},
    // where M = L L^T, so |x|_H = |raw|_2.
    const Eigen::LLT<Mat>& llt = model.mass_solver();
    std::vector<Vec> raw = halton_ball(n, radius, samples);
    std::vector<Vec> pts(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        pts[i] = llt.matrixL().transpose().solve(raw[i]);

    const Mat W = [&] {  // frame of H0 + H-
        Mat w(n, s.nu + s.mu);
        w.leftCols(s.nu) = s.basis_H0;
        w.rightCols(s.mu) = s.basis_Hminus;
        return w;
    }();
    const Mat hess0 = model.hessian(Vec::Zero(n));
    const Mat Linv_t = Mat(llt.matrixL().transpose()).inverse();

    struct Sample {
        double a1 = std::numeric_limits<double>::infinity();
        double minus_margin = std::numeric_limits<double>::infinity();
        double omega = 0.0;
    };
    std::vector<Sample> results(pts.size());
    parallel_for(static_cast<int>(pts.size()), [&](int i) {
        const Mat hx = model.hessian(pts[i]);
        Sample r;
        if (s.basis_Hplus.cols() > 0) {
            const Mat hp = s.basis_Hplus.transpose() * hx * s.basis_Hplus;
            Eigen::SelfAdjointEigenSolver<Mat> ep(hp, Eigen::EigenvaluesOnly);
            r.a1 = ep.eigenvalues().minCoeff();
        }
        if (s.mu > 0) {
            const Mat hm = s.basis_Hminus.transpose() * hx * s.basis_Hminus;
            Eigen::SelfAdjointEigenSolver<Mat> em(hm, Eigen::EigenvaluesOnly);
            r.minus_margin = -s.a0 - em.eigenvalues().maxCoeff();
        }
        if (W.cols() > 0) {
            // omega(x): operator norm of (B(x)-B(theta)) restricted to H0+H-,
            // measured H -> H.
            const Mat D = W.transpose() * (hx - hess0) * Linv_t;
            Eigen::JacobiSVD<Mat> svd(D);
            r.omega = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        }
        results[i] = r;
    });

    cert.checked_points = pts;
    cert.omega_values.resize(pts.size());
    double a1 = std::numeric_limits<double>::infinity();
    double mm = std::numeric_limits<double>::infinity();
    double om = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        cert.omega_values[i] = results[i].omega;
        a1 = std::min(a1, results[i].a1);
        mm = std::min(mm, results[i].minus_margin);
        om = std::max(om, results[i].omega);
    }
    cert.a1 = (s.basis_Hplus.cols() > 0) ? a1 : 0.0;
    cert.minus_margin = (s.mu > 0) ? mm : 0.0;
    cert.omega_max = om;
    cert.pass_d2 = (s.basis_Hplus.cols() == 0) || cert.a1 > 0.0;  // vacuous when H+ = {0}
    cert.pass_d4 = (s.mu == 0) || cert.minus_margin >= 0.0;       // vacuous when H- = {0}
    // The proofs consume omega < a0 (so that B(x) stays negative on H-).
    cert.pass_d3 = (W.cols() == 0) || !std::isfinite(s.a0) || cert.omega_max < s.a0;

    // Largest sampled radius at which every point passes.
    if (cert.pass_all()) {
        cert.certified_radius = radius;
    } else {
        double worst = radius;
        for (size_t i = 0; i < pts.size(); ++i) {
            const bool ok = (s.basis_Hplus.cols() == 0 || results[i].a1 > 0.0) &&
                            (s.mu == 0 || results[i].minus_margin >= 0.0) &&
                            (W.cols() == 0 || !std::isfinite(s.a0) || results[i].omega < s.a0);
            if (!ok) worst = std::min(worst, model.norm_h(pts[i]));
        }
        cert.certified_radius = 0.95 * worst;
    }
    return cert;
}

}  // namespace morsesplit
